"""Exact derived-bracket calculus over free graded-commutative algebras."""
from .gca import (
    Algebra,
    BracketStructure,
    CheckReport,
    ContextMismatchError,
    Derivation,
    Element,
    GCAError,
    Generator,
    GradingError,
    IncompleteDerivationError,
    apply_derivation,
    bracket_eval,
    check_graded_jacobi,
    parse_element,
)
from .brackets import (
    DerivedContext,
    PoissonSetting,
    check_compatibility,
    check_loday,
    check_morphism_derivation,
    derived_bracket,
    derived_by_element,
    skew_symmetrize,
)

__version__ = "0.1.0"
