import random

import pytest

from derivedbrackets.algebroid import (
    Algebroid,
    AlgebroidContext,
    NotAnAlgebroidError,
    algebroid_fn_check,
    anchor_morphism_residuals,
    build_algebroid,
    cotangent_algebroid,
    koszul_bracket,
    lie_algebra_algebroid,
    poisson_bracket,
    random_section,
    sharp,
    three_way_equivalence,
    verify_derived_identities,
)
from derivedbrackets.bigbracket import algebraic_schouten, ce_differential, heisenberg, sl2
from derivedbrackets.brackets import NotSquareZeroError
from derivedbrackets.cartan import ManifoldContext, schouten

from _sampling import nonzero, rename, rng

R2 = ManifoldContext(2)
R3 = ManifoldContext(3)
KP = R2.parse("x1*@1*@2")


def tangent(m):
    ctx = AlgebroidContext(m, m)
    return build_algebroid(ctx, [[1 if i == a else 0 for a in range(m)] for i in range(m)], {})


T2 = tangent(2)
COT = cotangent_algebroid(R2, KP)
HEIS_A = lie_algebra_algebroid(3, {(1, 2, 3): 1})
SL2_A = lie_algebra_algebroid(3, {(1, 2, 2): 2, (1, 3, 3): -2, (2, 3, 1): 1})
EXAMPLES = [T2, COT, HEIS_A, SL2_A]
IDS = ["tangent", "cotangent", "heisenberg", "sl2"]


def random_form(A, r, degree):
    c = A.ctx
    out = c.algebra.zero()
    for _ in range(2):
        m = c.algebra.scalar(r.randint(-3, 3))
        for _ in range(r.randint(0, 2)):
            if c.x:
                m = m * c.g(r.choice(c.x))
        for y in r.sample(c.yt, degree):
            m = m * c.g(y)
        out = out + m
    return out


# -- construction ------------------------------------------------------------------


def test_tangent_hamiltonian():
    c = T2.ctx
    assert T2.H == c.parse("-p1*th1 - p2*th2")
    assert T2.valid and not T2.HH


def test_action_algebroid_on_line():
    A = build_algebroid(AlgebroidContext(1, 1), [[1]], {})
    assert A.valid
    assert A.bracket(A.section(1), A.ctx.parse("x1^2")) == A.ctx.parse("2*x1")


def test_cotangent_data():
    c = COT.ctx
    assert COT.anchor == [[c.parse("0"), c.parse("x1")], [c.parse("-x1"), c.parse("0")]]
    assert COT.C == {(1, 2, 1): c.parse("1"), (2, 1, 1): c.parse("-1")}
    assert sharp(R2, KP, R2.dx(1)) == R2.parse("x1*@2")


def test_cotangent_anchor_as_derived_bracket():
    c = COT.ctx
    e1 = COT.section(1)
    assert not COT.bracket(e1, c.parse("x1"))
    assert COT.bracket(e1, c.parse("x2")) == c.parse("x1")


def test_rejected_candidate_keeps_structures():
    ctx = AlgebroidContext(1, 2)
    with pytest.raises(NotAnAlgebroidError) as info:
        build_algebroid(ctx, [[1], ["x1"]], {})
    assert info.value.residual == ctx.parse("-2*p1*th1*th2")
    A = Algebroid(ctx, [[1], ["x1"]], {})
    assert not A.valid and A.H and A.P
    rep = three_way_equivalence(A)
    assert rep.verdicts == (False, False, False)
    assert rep.consistent


def test_structure_functions_must_be_antisymmetric():
    from derivedbrackets.gca import GCAError

    with pytest.raises(GCAError):
        Algebroid(AlgebroidContext(0, 2), [[], []], {(1, 1, 2): 1})
    with pytest.raises(GCAError):
        Algebroid(AlgebroidContext(0, 2), [[], []], {(1, 2, 1): 1, (2, 1, 1): 1})


# -- the three equivalent structures -------------------------------------------------


@pytest.mark.parametrize("A", EXAMPLES, ids=IDS)
def test_three_way_equivalence_accepted(A):
    rep = three_way_equivalence(A)
    assert rep.verdicts == (True, True, True)


def random_candidate(r):
    m, n = r.randint(0, 2), r.randint(1, 2)
    ctx = AlgebroidContext(m, n)
    polys = ["0", "1", "-1"] + [["x1", "2*x1^2"], ["x1", "x2", "x1*x2", "2*x1^2"]][m - 1] if m else ["0", "1", "-1"]
    anchor = [[r.choice(polys) for _ in range(m)] for _ in range(n)]
    C = {}
    if n == 2:
        for k in (1, 2):
            C[(1, 2, k)] = r.choice(polys)
    return Algebroid(ctx, anchor, C)


def test_three_way_equivalence_random_candidates():
    r = rng(1)
    seen = set()
    for _ in range(60):
        A = random_candidate(r)
        rep = three_way_equivalence(A)
        assert rep.consistent, (A.anchor, A.C, rep)
        seen.add(rep.verdicts[0])
    assert seen == {True, False}


# -- Q in the standard cases ---------------------------------------------------------


def test_tangent_Q_is_de_rham():
    r = rng(2)
    c = T2.ctx
    mapping = {f"yt{i}": f"dx{i}" for i in (1, 2)}
    back = {v: k for k, v in mapping.items()}
    for _ in range(20):
        alpha = random_form(T2, r, r.randint(0, 2))
        via_man = R2.d(rename(alpha, c.algebra, R2.algebra, mapping))
        assert T2.d_A(alpha) == rename(via_man, R2.algebra, c.algebra, back)


def test_cotangent_Q_is_lichnerowicz():
    from derivedbrackets.algebroid import PoissonManifold

    pm = PoissonManifold(R2, KP)
    c = COT.ctx
    mapping = {f"yt{i}": f"xt{i}" for i in (1, 2)}
    back = {v: k for k, v in mapping.items()}
    r = rng(3)
    for _ in range(20):
        alpha = random_form(COT, r, r.randint(0, 2))
        via = pm.dP(rename(alpha, c.algebra, R2.pit, mapping))
        assert COT.d_A(alpha) == rename(via, R2.pit, c.algebra, back)


@pytest.mark.parametrize("L,A", [(heisenberg(), HEIS_A), (sl2(), SL2_A)], ids=["heisenberg", "sl2"])
def test_point_base_Q_is_chevalley_eilenberg(L, A):
    mapping = {f"yt{i}": f"eps{i}" for i in (1, 2, 3)}
    back = {v: k for k, v in mapping.items()}
    r = rng(4)
    for _ in range(20):
        alpha = random_form(A, r, r.randint(0, 3))
        via = ce_differential(L, rename(alpha, A.ctx.algebra, L.algebra, mapping))
        assert A.d_A(alpha) == rename(via, L.algebra, A.ctx.algebra, back)


# -- derived-bracket identities ------------------------------------------------------


@pytest.mark.parametrize("A", EXAMPLES, ids=IDS)
def test_derived_identities(A):
    reports = verify_derived_identities(A, samples=20, seed=5)
    for name, rep in reports.items():
        assert rep.passed, (name, rep.witness)
    assert reports["LAhamilt"].count >= 20


def test_tangent_bracket_is_schouten():
    c = T2.ctx
    mapping = {f"ht{i}": f"@{i}" for i in (1, 2)}
    r = rng(6)
    for _ in range(20):
        u = nonzero(lambda: random_section(T2, r))
        v = nonzero(lambda: random_section(T2, r))
        if r.random() < 0.5:
            u = u * c.g("ht1") + c.parse("x1*ht1*ht2")
        br = rename(T2.bracket(u, v), c.algebra, R2.algebra, mapping)
        expected = schouten(R2, rename(u, c.algebra, R2.algebra, mapping), rename(v, c.algebra, R2.algebra, mapping))
        assert br == expected


def test_point_bracket_is_algebraic_schouten():
    L = sl2()
    A = SL2_A
    mapping = {f"ht{i}": f"e{i}" for i in (1, 2, 3)}
    back = {v: k for k, v in mapping.items()}
    r = rng(7)
    hts = [A.ctx.g(h) for h in A.ctx.ht]
    for _ in range(20):
        u = nonzero(lambda: sum((r.choice(hts) * r.choice(hts)).scale(r.randint(-2, 2)) for _ in range(2)))
        v = r.choice(hts).scale(r.randint(1, 3))
        got = A.bracket(u, v)
        want = algebraic_schouten(L, rename(u, A.ctx.algebra, L.algebra, mapping),
                                  rename(v, A.ctx.algebra, L.algebra, mapping))
        assert got == rename(want, L.algebra, A.ctx.algebra, back)


@pytest.mark.parametrize("A", EXAMPLES[:2], ids=IDS[:2])
def test_anchor_is_a_morphism(A):
    r = rng(8)
    sections = [nonzero(lambda: random_section(A, r)) for _ in range(6)]
    pairs = [(sections[i], sections[i + 1]) for i in range(5)]
    c = A.ctx
    functions = [c.parse("x1*x2"), c.parse("x1^3 - x2"), c.parse("x2^2")]
    assert anchor_morphism_residuals(A, pairs, functions).passed


def test_anchor_morphism_fails_for_rejected_candidate():
    ctx = AlgebroidContext(1, 2)
    A = Algebroid(ctx, [[1], ["x1"]], {})
    e1, e2 = A.section(1), A.section(2)
    rep = anchor_morphism_residuals(A, [(e1, e2)], [ctx.parse("x1")])
    assert not rep.passed


@pytest.mark.parametrize("A", [T2, COT], ids=["tangent", "cotangent"])
def test_algebroid_fn_bracket(A):
    r = rng(9)
    c = A.ctx
    for _ in range(4):
        X = random_form(A, r, r.randint(0, 1)) * c.g(r.choice(c.ht))
        Y = random_form(A, r, r.randint(0, 1)) * c.g(r.choice(c.ht))
        if X and Y:
            assert algebroid_fn_check(A, X, Y)


# -- Koszul bracket -----------------------------------------------------------------


def test_koszul_examples():
    dx1, dx2 = R2.dx(1), R2.dx(2)
    assert not koszul_bracket(R2, R2.parse("@1*@2"), dx1, dx2)
    assert koszul_bracket(R2, KP, dx1, dx2) == dx1
    assert poisson_bracket(R2, KP, R2.x(1), R2.x(2)) == R2.x(1)
    assert not koszul_bracket(R2, R2.algebra.zero(), R2.parse("x2*dx1"), dx2)


def test_koszul_rejects_non_poisson():
    with pytest.raises(NotSquareZeroError):
        koszul_bracket(R3, R3.parse("x2*@1*@2 + @2*@3"), R3.dx(1), R3.dx(2))


def test_koszul_on_exact_forms():
    P = R3.parse("x3*@1*@2 + @2*@3")
    r = rng(10)
    for _ in range(8):
        f, g = R3.random_polynomial(r, 2), R3.random_polynomial(r, 2)
        assert koszul_bracket(R3, P, R3.d(f), R3.d(g)) == R3.d(poisson_bracket(R3, P, f, g))


def test_koszul_is_skew_and_leibniz():
    r = rng(11)
    for _ in range(6):
        a = R2.random_tensor(r, 1, 0, 1)
        b = R2.random_tensor(r, 1, 0, 1)
        f = R2.random_polynomial(r, 2)
        ab = koszul_bracket(R2, KP, a, b)
        assert ab == koszul_bracket(R2, KP, b, a).scale(-1)
        rho_f = R2.contract(sharp(R2, KP, a), R2.d(f))
        assert koszul_bracket(R2, KP, a, f * b) == f * ab + rho_f * b
