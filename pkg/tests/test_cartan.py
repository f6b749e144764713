from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from derivedbrackets.brackets import DerivedContext, check_loday
from derivedbrackets.cartan import (
    CommutatorSetting,
    FunctionOp,
    ManifoldContext,
    MissingOrderBoundError,
    TensorShapeError,
    UnsupportedShapeError,
    algebraic_commutator,
    buttin_rhs,
    check_cartan_identities,
    courant,
    courant_from_dorfman,
    courant_jacobiator,
    derived_op_bracket,
    dorfman,
    extract_tensor,
    fn_residual,
    frolicher_nijenhuis,
    highest_type_term,
    interior_wedge_commutator,
    lie_bracket,
    lie_operator,
    nonlinearity_defect,
    op_commutator,
    op_equal,
    op_is_zero,
    op_sum,
    pointwise_big_bracket,
    schouten,
    schouten_via_pit,
    vinogradov,
    vinogradov_fn_formula,
    zero_operator,
)

from _sampling import nonzero, rng

R2 = ManifoldContext(2)
R3 = ManifoldContext(3)
seeds = st.integers(0, 10 ** 6)


def sign(e):
    return -1 if e % 2 else 1


def P(text, ctx=R2):
    return ctx.parse(text)


def rand_vf(ctx, r, max_degree=2):
    return nonzero(lambda: ctx.random_tensor(r, 0, 1, max_degree))


def rand_decomposable(ctx, r, q, p):
    return nonzero(lambda: ctx.random_decomposable(r, q, p))


# -- embedding ---------------------------------------------------------------------


def test_embedding_examples():
    i = R2.embed_i
    assert i(P("@1"))(P("dx1*dx2")) == P("dx2")
    assert i(P("@1*@2"))(P("dx1*dx2")) == P("-1")
    assert i(P("@1"))(i(P("@2"))(P("dx1*dx2"))) == P("-1")
    assert not i(P("dx1*@1"))(P("dx2"))
    assert i(P("x2*dx1*@2"))(P("dx2")) == P("x2*dx1")


def test_embedding_degree_and_order():
    op = R2.embed_i(P("dx1*@1*@2"))
    assert op.degree == -1 and op.order == 0
    assert op_commutator(op, R2.d_op).order == 1


def test_extract_round_trip():
    r = rng(1)
    for q in range(3):
        for p in range(3):
            X = R2.random_tensor(r, q, p)
            assert extract_tensor(R2, R2.embed_i(X)) == X


def test_extract_rejects_differential_operator():
    with pytest.raises(UnsupportedShapeError):
        extract_tensor(R2, R2.d_op)


def test_missing_order_bound():
    opaque = FunctionOp(R2.space, lambda a: a, 0)
    with pytest.raises(MissingOrderBoundError):
        op_equal(opaque, opaque)


def test_wrong_shape_rejected():
    with pytest.raises(TensorShapeError):
        R2.e(P("@1"))
    with pytest.raises(TensorShapeError):
        lie_bracket(R2, P("@1*@2"), P("@1"))


# -- operator equality and Cartan relations -------------------------------------------


def test_commutator_examples():
    d = R2.d_op
    assert op_is_zero(op_commutator(d, d))
    assert op_is_zero(op_commutator(R2.embed_i(P("@1")), R2.embed_i(P("@2"))))
    assert op_equal(d, op_sum([(1, d), (0, R2.e(P("dx1*dx2")))]))
    assert not op_equal(d, op_sum([(1, d), (1, R2.e(P("dx1*dx2")) @ R2.embed_i(P("@1")))]))


def test_cartan_relations_named_pair():
    x, y = P("@1"), P("x1*@2")
    assert all(check_cartan_identities(R2, x, y).values())
    assert op_equal(op_commutator(lie_operator(R2, x), R2.embed_i(y)), R2.embed_i(P("@2")))


@pytest.mark.parametrize("ctx", [R2, R3], ids=["R2", "R3"])
def test_cartan_relations_random(ctx):
    r = rng(2)
    for _ in range(8):
        x, y = rand_vf(ctx, r), rand_vf(ctx, r)
        results = check_cartan_identities(ctx, x, y)
        assert all(results.values()), results


def test_interior_of_bivector_against_wedge():
    r = rng(3)
    for _ in range(10):
        x, y = rand_vf(R3, r, 1), rand_vf(R3, r, 1)
        assert op_equal(R3.embed_i(x * y), R3.embed_i(x) @ R3.embed_i(y))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_interior_wedge_commutator(k):
    r = rng(10 + k)
    for _ in range(5):
        x, y = rand_vf(R3, r, 1), rand_vf(R3, r, 1)
        xi = nonzero(lambda: R3.random_tensor(r, k, 0, 1))
        lhs = op_commutator(R3.embed_i(x * y), R3.e(xi))
        assert op_equal(lhs, interior_wedge_commutator(R3, x, y, xi))


def test_interior_wedge_commutator_sign_depends_on_parity():
    # the variant e_{i_y xi} i_x + (-1)^k e_{i_x xi} i_y - (-1)^k e_{i_{x^y} xi}
    # agrees with the commutator for odd k only
    x, y = P("@1", R3), P("@2", R3)

    def variant(xi, k):
        terms = [(1, R3.e(R3.contract(y, xi)) @ R3.embed_i(x)),
                 (sign(k), R3.e(R3.contract(x, xi)) @ R3.embed_i(y))]
        if R3.contract(x * y, xi):
            terms.append((-sign(k), R3.e(R3.contract(x * y, xi))))
        return op_sum(terms)

    for xi, k, agrees in ((P("dx1*dx2*dx3", R3), 3, True), (P("dx1*dx2", R3), 2, False)):
        lhs = op_commutator(R3.embed_i(x * y), R3.e(xi))
        assert op_equal(lhs, variant(xi, k)) is agrees


# -- Schouten ------------------------------------------------------------------------


def test_schouten_examples():
    assert schouten(R2, P("@1"), P("x1*@2")) == P("@2")
    assert not schouten(R2, P("@1*@2"), P("@1*@2"))
    assert not schouten(R2, P("x1^2"), P("x2"))
    # [f, P] recovers the hamiltonian vector field up to the fixed sign
    assert schouten(R2, P("x1"), P("@1*@2")) == P("-@2")


def test_schouten_in_pit_model():
    pit = R2.pit
    xt1, xt2, x1 = pit.gens("xt1", "xt2", "x1")
    S = R2.schouten_structure
    assert S(xt1, x1 * xt2) == xt2
    assert not S(xt1 * xt2, xt1 * xt2)


def random_multivector(ctx, r):
    p = r.randint(0, min(3, ctx.dim))
    return nonzero(lambda: ctx.random_tensor(r, 0, p, 2))


@pytest.mark.parametrize("ctx", [R2, R3], ids=["R2", "R3"])
def test_schouten_two_ways(ctx):
    r = rng(4)
    for _ in range(25):
        u, v = random_multivector(ctx, r), random_multivector(ctx, r)
        w = schouten(ctx, u, v, cross_check=False)
        assert w == schouten_via_pit(ctx, u, v)
        assert op_equal(ctx.embed_i(w), derived_op_bracket(ctx, ctx.embed_i(u), ctx.embed_i(v)))


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_schouten_graded_skew(seed):
    r = rng(seed)
    u, v = random_multivector(R2, r), random_multivector(R2, r)
    (_, p), = R2.bidegrees(u)
    (_, q), = R2.bidegrees(v)
    assert schouten(R2, u, v) == schouten(R2, v, u).scale(-sign((p - 1) * (q - 1)))


def test_vector_field_schouten_is_lie_bracket():
    r = rng(5)
    for _ in range(10):
        x, y = rand_vf(R3, r), rand_vf(R3, r)
        assert schouten(R3, x, y) == lie_bracket(R3, x, y)


# -- Frolicher-Nijenhuis -----------------------------------------------------------------


def test_fn_examples():
    ident = P("dx1*@1 + dx2*@2")
    assert not frolicher_nijenhuis(R2, ident, ident)
    assert frolicher_nijenhuis(R2, P("x2*dx1*@1"), P("dx2*@2")) == P("-dx1*dx2*@1")
    assert not frolicher_nijenhuis(R2, P("dx1*@2"), P("dx2*@1"))


def test_fn_rejects_multivector_input():
    with pytest.raises(TensorShapeError):
        frolicher_nijenhuis(R2, P("@1*@2"), P("dx1*@1"))


@pytest.mark.parametrize("ctx", [R2, R3], ids=["R2", "R3"])
def test_fn_residual_vanishes(ctx):
    r = rng(6)
    for _ in range(10):
        X = rand_decomposable(ctx, r, r.randint(0, 2), 1)
        Y = rand_decomposable(ctx, r, r.randint(0, 2), 1)
        assert op_is_zero(fn_residual(ctx, X, Y))


def test_fn_is_derived_through_lie_derivatives():
    r = rng(7)
    for _ in range(8):
        X = rand_decomposable(R2, r, r.randint(0, 2), 1)
        Y = rand_decomposable(R2, r, r.randint(0, 2), 1)
        fn = frolicher_nijenhuis(R2, X, Y)
        assert op_equal(buttin_rhs(R2, X, Y), lie_operator(R2, fn) if fn else zero_operator(R2.space))


# -- derived bracket of operators ----------------------------------------------------------


def operator_triple(ctx, r):
    ops = []
    for _ in range(3):
        q, p = r.randint(0, 2), r.randint(0, 2)
        ops.append(ctx.embed_i(nonzero(lambda: ctx.random_tensor(r, q, p, 1, 1))))
    return tuple(ops)


def test_operator_loday_identity():
    r = rng(8)
    ctx = DerivedContext(CommutatorSetting(R2.space), element=R2.d_op)
    triples = [operator_triple(R2, r) for _ in range(15)]
    assert check_loday(ctx, triples).passed


def test_two_forms_have_zero_derived_bracket():
    a, b = R2.e(P("x1*dx2")), R2.e(P("x2^2*dx1"))
    assert op_is_zero(derived_op_bracket(R2, a, b))


def test_derived_bracket_on_functions():
    # [i_{xi(x)x}, i_{eta(x)y}]_d f = -eta ^ (i_y xi) L_x f
    r = rng(9)
    for _ in range(6):
        xi, eta = R3.random_tensor(r, 1, 0, 1), R3.random_tensor(r, 1, 0, 1)
        x, y = rand_vf(R3, r, 1), rand_vf(R3, r, 1)
        f = R3.random_polynomial(r, 3)
        D = derived_op_bracket(R3, R3.embed_i(xi * x), R3.embed_i(eta * y))
        assert D(f) == (eta * R3.contract(y, xi) * R3.lie_derivative(x, f)).scale(-1)


def test_non_closure_witness():
    x = y = P("@1*@2", R3)
    xi, eta = P("dx1", R3), P("dx3", R3)
    beta, gamma = P("dx1", R3), P("dx2", R3)
    f = P("x1*x2*x3", R3)
    df = R3.d(f)
    expected = (R3.contract(x, beta * df) * R3.contract(y, xi * gamma)
                - R3.contract(x, gamma * df) * R3.contract(y, xi * beta)) * eta
    defect = nonlinearity_defect(R3, xi * x, eta * y, f, beta * gamma)
    assert defect == expected == P("x1*x3*dx3", R3)


def test_non_closure_defect_formula():
    # defect = xi ^ N(f, i_Y alpha) - i_Y(xi ^ N(f, alpha)), N(beta) = i_x(df ^ beta) - df ^ i_x beta
    r = rng(10)
    for _ in range(8):
        xi, eta = R3.random_tensor(r, 1, 0, 1), R3.random_tensor(r, 1, 0, 1)
        x, y = rand_decomposable(R3, r, 0, 2), rand_decomposable(R3, r, 0, 2)
        f = R3.random_polynomial(r, 3)
        alpha = R3.random_tensor(r, 2, 0, 1)
        df = R3.d(f)
        Y = eta * y

        def N(b):
            return R3.contract(x, df * b) - df * R3.contract(x, b)

        expected = xi * N(R3.contract(Y, alpha)) - R3.contract(Y, xi * N(alpha))
        assert nonlinearity_defect(R3, xi * x, Y, f, alpha) == expected


# -- Dorfman, Courant, Vinogradov ---------------------------------------------------------


def test_dorfman_examples():
    zero = R2.algebra.zero()
    assert dorfman(R2, P("@1"), zero, zero, P("x1*dx2")) == (zero, P("dx2"))
    assert dorfman(R2, zero, P("x1*dx2"), P("@1"), zero) == (zero, P("-dx2"))
    assert dorfman(R2, zero, P("x1*dx2"), zero, P("x2*dx1")) == (zero, zero)
    # closed eta with constant contraction
    assert dorfman(R2, P("@1"), zero, zero, P("dx1"))[1] == zero


def test_courant_examples():
    zero = R2.algebra.zero()
    assert courant(R2, P("@1"), P("x2*dx1"), P("@2"), zero) == (zero, P("-dx1"))
    a = (P("x1*@2"), P("x2^2*dx1"))
    assert courant(R2, *a, *a) == (zero, zero)


def test_courant_is_skew_symmetrized_dorfman():
    r = rng(11)
    for _ in range(10):
        x, y = rand_vf(R3, r, 1), rand_vf(R3, r, 1)
        xi, eta = R3.random_tensor(r, 1, 0, 1), R3.random_tensor(r, 1, 0, 1)
        vec, form = courant(R3, x, xi, y, eta)
        d1, d2 = dorfman(R3, x, xi, y, eta), dorfman(R3, y, eta, x, xi)
        assert vec == (d1[0] - d2[0]).scale(Fraction(1, 2))
        assert form == (d1[1] - d2[1]).scale(Fraction(1, 2))
        assert (vec, form) == courant_from_dorfman(R3, x, xi, y, eta)


def test_dorfman_matches_operator_bracket():
    r = rng(12)
    for _ in range(6):
        x, y = rand_vf(R3, r, 1), rand_vf(R3, r, 1)
        xi, eta = R3.random_tensor(r, 1, 0, 1), R3.random_tensor(r, 1, 0, 1)
        vec, form = dorfman(R3, x, xi, y, eta)
        op = derived_op_bracket(R3, R3.embed_i(x + xi), R3.embed_i(y + eta))
        assert op_equal(op, R3.embed_i(vec + form))


def test_courant_jacobi_failure_witness():
    zero = R3.algebra.zero()
    a, b, c = (P("@1", R3), zero), (P("x1*@2", R3), zero), (zero, P("x2*dx1", R3))
    assert courant_jacobiator(R3, a, b, c) == (zero, P("-1/4*dx1", R3))


def test_vinogradov_on_multivectors_is_schouten():
    r = rng(13)
    for _ in range(10):
        u, v = random_multivector(R2, r), random_multivector(R2, r)
        V = vinogradov(R2, R2.embed_i(u), R2.embed_i(v))
        assert op_equal(V, R2.embed_i(schouten(R2, u, v)))


def test_vinogradov_skew():
    r = rng(14)
    for _ in range(10):
        a, b, _ = operator_triple(R2, r)
        s = sign((a.parity + 1) * (b.parity + 1))
        assert op_is_zero(op_sum([(1, vinogradov(R2, a, b)), (s, vinogradov(R2, b, a))]))


def test_vinogradov_on_vector_valued_forms():
    r = rng(15)
    for _ in range(10):
        X = rand_decomposable(R2, r, r.randint(0, 2), 1)
        Y = rand_decomposable(R2, r, r.randint(0, 2), 1)
        V = vinogradov(R2, R2.embed_i(X), R2.embed_i(Y))
        assert op_equal(V, vinogradov_fn_formula(R2, X, Y))


# -- algebraic bracket and the big bracket -------------------------------------------------


def test_highest_type_vector_valued_one_forms():
    # only terms of highest type: the commutator itself is algebraic of type 1
    r = rng(16)
    for _ in range(8):
        X, Y = rand_decomposable(R3, r, 1, 1), rand_decomposable(R3, r, 1, 1)
        Z = highest_type_term(R3, X, Y)
        assert Z == algebraic_commutator(R3, X, Y)
        assert op_equal(R3.embed_i(Z), op_commutator(R3.embed_i(X), R3.embed_i(Y)))


def test_highest_type_bivector_and_form():
    x, y = P("x2*@1", R3), P("@2 + x1*@3", R3)
    xi = P("dx1*dx2 + x3*dx2*dx3", R3)
    k = 2
    Z = highest_type_term(R3, x * y, xi)
    # type-1 part of the commutator: (-1)^{k-1} i_y xi (x) x + (-1)^k i_x xi (x) y
    assert Z == (R3.contract(y, xi) * x).scale(sign(k - 1)) + (R3.contract(x, xi) * y).scale(sign(k))


def test_highest_type_is_pointwise_big_bracket():
    r = rng(17)
    for _ in range(12):
        X = rand_decomposable(R3, r, r.randint(0, 2), r.randint(0, 2))
        Y = rand_decomposable(R3, r, r.randint(0, 2), r.randint(0, 2))
        assert highest_type_term(R3, X, Y) == pointwise_big_bracket(R3, X, Y)


def test_six_term_formula_for_bivector_valued_one_forms():
    r = rng(18)
    for _ in range(6):
        x1, y1, x2, y2 = (rand_vf(R3, r, 1) for _ in range(4))
        xi1, xi2 = R3.random_tensor(r, 1, 0, 1), R3.random_tensor(r, 1, 0, 1)
        X, Y = xi1 * x1 * y1, xi2 * x2 * y2
        i = R3.contract
        first = xi1 * (i(x1, xi2) * y1 - i(y1, xi2) * x1) * x2 * y2
        second = xi2 * (i(x2, xi1) * y2 - i(y2, xi1) * x2) * x1 * y1
        Z = highest_type_term(R3, X, Y)
        assert Z == pointwise_big_bracket(R3, X, Y)
        assert Z == (first + second).scale(-1)


# -- Buttin right-hand side -----------------------------------------------------------------


def test_buttin_multivectors():
    r = rng(19)
    for _ in range(6):
        u, v = random_multivector(R2, r), random_multivector(R2, r)
        s = schouten(R2, u, v)
        rhs = lie_operator(R2, s) if s else zero_operator(R2.space)
        assert op_equal(buttin_rhs(R2, u, v), rhs)


def test_buttin_pure_form_is_algebraic():
    # [i_xi, d] = (-1)^{q+1} e_{d xi}, so the commutator with [i_Y, d] does not differentiate its argument
    xi = P("x1*x2*dx1", R2)
    assert op_equal(lie_operator(R2, xi), R2.e(R2.d(xi)))
    Y = P("x1^2*dx2*@1 + x2*dx1*@2", R2)
    Z = extract_tensor(R2, buttin_rhs(R2, xi, Y))
    assert R2.is_form(Z)
    assert Z == R2.lie_derivative(Y, R2.d(xi)).scale(-1)
