"""Cartan calculus on R^n with polynomial coefficients."""
from .manifold import ManifoldContext, TensorShapeError
from .operators import (
    DEFAULT_MARGIN,
    Compose,
    CommutatorSetting,
    DerivationOp,
    FormSpace,
    FunctionOp,
    Interior,
    LeftMul,
    MissingOrderBoundError,
    Operator,
    OperatorError,
    Sum,
    UnsupportedShapeError,
    algebraic_components,
    compose,
    first_difference,
    identity,
    op_commutator,
    op_equal,
    op_is_zero,
    op_sum,
    operator_from_components,
    order_bound,
    zero_operator,
)
from .brackets import (
    algebraic_commutator,
    check_cartan_identities,
    courant_jacobiator,
    buttin_rhs,
    courant,
    courant_from_dorfman,
    derived_op_bracket,
    dorfman,
    extract_tensor,
    fn_residual,
    frolicher_nijenhuis,
    highest_type_term,
    interior_wedge_commutator,
    lie_bracket,
    lie_derivation,
    lie_operator,
    nonlinearity_defect,
    pair_operator,
    pointwise_big_bracket,
    schouten,
    schouten_via_hamiltonian,
    schouten_via_pit,
    vinogradov,
    vinogradov_fn_formula,
)
