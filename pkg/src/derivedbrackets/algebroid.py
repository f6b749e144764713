"""Lie algebroids over R^m in local coordinates.

One generator context holds every coordinate model of an algebroid ``A``
of rank ``r`` over ``R^m``:

=============  ======  =========================================
generator      degree  meaning
=============  ======  =========================================
``x1..xm``     0       base coordinates
``p1..pm``     2       momenta dual to ``x`` on ``T*(PiA*)``
``eta1..``     0       linear fibre coordinates on ``A*``
``yt1..``      1       fibre coordinates on ``PiA`` (sections of ``A*``)
``ht1..``      1       fibre coordinates on ``PiA*`` (sections of ``A``)
``th1..``      1       momenta dual to ``ht`` on ``T*(PiA*)``
``xt1..``      1       momenta dual to ``x`` on ``PiT*A*``
``zeta1..``    1       momenta dual to ``eta`` on ``PiT*A*``
=============  ======  =========================================

Three structures encode the algebroid: the hamiltonian ``H`` on
``T*(PiA*)`` (bracket of degree -2 with ``{x,p} = {ht,th} = 1``), the
homological vector field ``Q`` on ``PiA`` and the linear Poisson bivector
``P`` on ``A*`` (Schouten bracket of degree -1 with ``{xt,x} = {zeta,eta} = 1``).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .brackets import NotSquareZeroError
from .cartan.manifold import ManifoldContext
from .cartan.operators import (
    DerivationOp,
    FormSpace,
    Interior,
    LeftMul,
    Operator,
    Sum,
    algebraic_components,
    compose,
    first_difference,
    op_commutator,
    op_equal,
    op_sum,
    operator_from_components,
    zero_operator,
)
from .gca import Algebra, BracketStructure, CheckReport, Derivation, Element, GCAError, left_derivative, substitute


class NotAnAlgebroidError(NotSquareZeroError):
    pass


def _sign(e: int) -> int:
    return -1 if e % 2 else 1


class AlgebroidContext:
    """Generator context for an algebroid of rank ``rank`` over ``R^base_dim``."""

    def __init__(self, base_dim: int, rank: int):
        self.m, self.r = base_dim, rank
        M, R = range(1, base_dim + 1), range(1, rank + 1)
        gens = ([(f"x{a}", 0) for a in M] + [(f"p{a}", 2) for a in M] + [(f"eta{i}", 0) for i in R]
                + [(f"yt{i}", 1) for i in R] + [(f"ht{i}", 1) for i in R] + [(f"th{i}", 1) for i in R]
                + [(f"xt{a}", 1) for a in M] + [(f"zeta{i}", 1) for i in R])
        self.algebra = Algebra(gens, name=f"algebroid(m={base_dim}, r={rank})")
        self.x = tuple(f"x{a}" for a in M)
        self.p = tuple(f"p{a}" for a in M)
        self.eta = tuple(f"eta{i}" for i in R)
        self.yt = tuple(f"yt{i}" for i in R)
        self.ht = tuple(f"ht{i}" for i in R)
        self.th = tuple(f"th{i}" for i in R)
        self.xt = tuple(f"xt{a}" for a in M)
        self.zeta = tuple(f"zeta{i}" for i in R)
        table = {}
        for a in range(base_dim):
            table[(self.x[a], self.p[a])] = 1
        for i in range(rank):
            table[(self.ht[i], self.th[i])] = 1
        self.big = BracketStructure(self.algebra, -2, table)
        table = {}
        for a in range(base_dim):
            table[(self.xt[a], self.x[a])] = 1
        for i in range(rank):
            table[(self.zeta[i], self.eta[i])] = 1
        self.schouten = BracketStructure(self.algebra, -1, table)
        self.forms = FormSpace(self.algebra, self.x, self.yt, name="Gamma(Lambda A*)")

    def g(self, name: str) -> Element:
        return self.algebra.gen(name)

    def parse(self, text: str) -> Element:
        return self.algebra.parse(text)

    def section_to_linear(self, u: Element) -> Element:
        """Section ``u^i(x) ht_i`` of ``A`` to the linear function ``u^i eta_i`` on ``A*``."""
        return substitute(u, {h: self.g(e) for h, e in zip(self.ht, self.eta)})

    def section_to_form_dual(self, u: Element) -> Element:
        return substitute(u, {h: self.g(y) for h, y in zip(self.ht, self.yt)})


class Algebroid:
    """Anchor ``a[i][alpha]`` and structure functions ``C[(i, j, k)] = C^k_ij`` (1-based, polynomials).

    ``H``, ``Q`` and ``P`` are always built; ``valid`` records whether
    ``{H,H} = 0``.  Use :func:`build_algebroid` to reject invalid data.
    """

    def __init__(self, ctx: AlgebroidContext, anchor, structure: Mapping[Tuple[int, int, int], Element]):
        self.ctx = ctx
        alg = ctx.algebra
        self.anchor = [[_as_element(alg, anchor[i][a]) for a in range(ctx.m)] for i in range(ctx.r)]
        C: Dict[Tuple[int, int, int], Element] = {}
        for (i, j, k), v in structure.items():
            v = _as_element(alg, v)
            if i == j and v:
                raise GCAError(f"C^{k}_{i}{i} must vanish")
            for key, val in (((i, j, k), v), ((j, i, k), -v)):
                if key in C and C[key] != val:
                    raise GCAError(f"structure functions not antisymmetric at {key}")
                C[key] = val
        self.C = {k: v for k, v in C.items() if v}
        self.H = self._hamiltonian()
        self.Q = self._homological()
        self.P = self._bivector()
        self.HH = ctx.big(self.H, self.H)
        self.valid = not self.HH

    def _c(self, i, j, k) -> Element:
        return self.C.get((i, j, k), self.ctx.algebra.zero())

    def _hamiltonian(self) -> Element:
        c = self.ctx
        H = c.algebra.zero()
        for i in range(c.r):
            for a in range(c.m):
                H = H - self.anchor[i][a] * c.g(c.p[a]) * c.g(c.th[i])
        for (i, j, k), v in self.C.items():
            H = H + (v * c.g(c.ht[k - 1]) * c.g(c.th[j - 1]) * c.g(c.th[i - 1])).scale(Fraction(1, 2))
        return H

    def _homological(self) -> Derivation:
        c = self.ctx
        imgs = {}
        for a in range(c.m):
            imgs[c.x[a]] = sum((c.g(c.yt[i]) * self.anchor[i][a] for i in range(c.r)), c.algebra.zero())
        for k in range(1, c.r + 1):
            val = c.algebra.zero()
            for (i, j, kk), v in self.C.items():
                if kk == k:
                    val = val + (c.g(c.yt[j - 1]) * c.g(c.yt[i - 1]) * v).scale(Fraction(1, 2))
            imgs[c.yt[k - 1]] = val
        return Derivation(c.algebra, 1, imgs, default_zero=True)

    def _bivector(self) -> Element:
        c = self.ctx
        P = c.algebra.zero()
        for i in range(c.r):
            for a in range(c.m):
                P = P + self.anchor[i][a] * c.g(c.xt[a]) * c.g(c.zeta[i])
        for (i, j, k), v in self.C.items():
            P = P + (c.g(c.eta[k - 1]) * v * c.g(c.zeta[j - 1]) * c.g(c.zeta[i - 1])).scale(Fraction(1, 2))
        return P

    # -- the three brackets ----------------------------------------------------
    def section(self, i: int) -> Element:
        return self.ctx.g(self.ctx.ht[i - 1])

    def bracket(self, u: Element, v: Element) -> Element:
        """``[u, v]_A = {{u, H}, v}`` on ``Gamma(Lambda A)`` (and functions)."""
        B = self.ctx.big
        return B(B(u, self.H), v)

    def anchor_apply(self, u: Element, f: Element) -> Element:
        """``rho(u) f`` by the anchor components, for a section ``u = u^i ht_i``."""
        c = self.ctx
        out = c.algebra.zero()
        for i in range(c.r):
            ui = left_derivative(u, c.ht[i])
            if ui:
                for a in range(c.m):
                    out = out + ui * self.anchor[i][a] * left_derivative(f, c.x[a])
        return out

    def direct_bracket(self, u: Element, v: Element) -> Element:
        """Bracket of sections from the anchor and structure functions:
        ``[u^i e_i, v^j e_j] = u^i v^j C^k_ij e_k + rho(u)(v^j) e_j - rho(v)(u^i) e_i``."""
        c = self.ctx
        out = c.algebra.zero()
        comps_u = [left_derivative(u, h) for h in c.ht]
        comps_v = [left_derivative(v, h) for h in c.ht]
        for (i, j, k), C in self.C.items():
            out = out + comps_u[i - 1] * comps_v[j - 1] * C * c.g(c.ht[k - 1])
        for j in range(c.r):
            out = out + self.anchor_apply(u, comps_v[j]) * c.g(c.ht[j])
            out = out - self.anchor_apply(v, comps_u[j]) * c.g(c.ht[j])
        return out

    def poisson(self, phi: Element, psi: Element) -> Element:
        """``{phi, psi}_A = [[phi, P], psi]`` on functions on ``A*``."""
        S = self.ctx.schouten
        return S(S(phi, self.P), psi)

    def d_A(self, c: Element) -> Element:
        return self.Q(c)

    def interior(self, u: Element) -> Operator:
        """``i_u`` on ``Gamma(Lambda A*)`` for ``u`` a polynomial in ``x`` and ``ht``."""
        c = self.ctx
        sp = c.forms
        nh = len(c.algebra.even)
        terms = []
        for (exps, mask), coeff in u.terms.items():
            odd_names = [c.algebra.odd[j].name for j in range(len(c.algebra.odd)) if (mask >> j) & 1]
            if any(n not in c.ht for n in odd_names):
                raise GCAError(f"{u} is not a multisection of A")
            fn = c.algebra.monomial_element((exps, 0), coeff)
            chain = [LeftMul(sp, fn)] + [Interior(sp, c.yt[c.ht.index(n)]) for n in odd_names]
            terms.append((1, compose(*chain)))
        return Sum(sp, terms) if terms else zero_operator(sp)

    def d_A_operator(self) -> DerivationOp:
        return DerivationOp(self.ctx.forms, self.Q, "d_A")


def _as_element(alg: Algebra, v) -> Element:
    if isinstance(v, Element):
        return v
    if isinstance(v, str):
        return alg.parse(v)
    return alg.scalar(v)


def build_algebroid(ctx: AlgebroidContext, anchor, structure) -> Algebroid:
    """Construct and verify ``{H, H} = 0``; raises :class:`NotAnAlgebroidError` with the residual."""
    A = Algebroid(ctx, anchor, structure)
    if not A.valid:
        raise NotAnAlgebroidError("{H, H} != 0", A.HH)
    return A


# -- standard examples -------------------------------------------------------


def tangent_algebroid(m: int) -> Algebroid:
    ctx = AlgebroidContext(m, m)
    return build_algebroid(ctx, [[1 if i == a else 0 for a in range(m)] for i in range(m)], {})


def lie_algebra_algebroid(dim: int, constants: Mapping[Tuple[int, int, int], Fraction]) -> Algebroid:
    """Algebroid over a point (base dimension 0)."""
    ctx = AlgebroidContext(0, dim)
    return build_algebroid(ctx, [[] for _ in range(dim)], constants)


def poisson_bracket(man: ManifoldContext, P: Element, f: Element, g: Element) -> Element:
    """``{f, g}_P = <P# df, dg>`` with ``P# xi = i_xi P`` (first slot)."""
    return man.contract(sharp(man, P, man.d(f)), man.d(g))


def sharp(man: ManifoldContext, P: Element, xi: Element) -> Element:
    """``P# xi = i_xi P`` for a 1-form ``xi``: contraction into the first slot of ``P``."""
    out = man.algebra.zero()
    for (a,), w in man.vector_components(_swap_form_to_vector(man, xi)).items():
        out = out + w * left_derivative(P, man.vecs[a])
    return out


def _swap_form_to_vector(man: ManifoldContext, xi: Element) -> Element:
    """Re-read a 1-form ``xi_a dx^a`` as ``xi_a @a`` (only to index its components)."""
    return substitute(xi, {dx: man.algebra.gen(v) for dx, v in zip(man.dxs, man.vecs)})


def cotangent_algebroid(man: ManifoldContext, P: Element) -> Algebroid:
    """``T*R^n`` with frame ``dx^i``, anchor ``P#`` and Koszul structure functions."""
    n = man.dim
    ctx = AlgebroidContext(n, n)
    to_ctx = {c: ctx.g(c) for c in man.coords}
    anchor = []
    for i in range(n):
        v = sharp(man, P, man.dx(i + 1))
        comps = man.vector_components(v)
        anchor.append([substitute(comps.get((a,), man.algebra.zero()), to_ctx, target=ctx.algebra) for a in range(n)])
    C = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            br = koszul_bracket(man, P, man.dx(i), man.dx(j))
            for (k,), w in man.vector_components(_swap_form_to_vector(man, br)).items():
                C[(i, j, k + 1)] = substitute(w, to_ctx, target=ctx.algebra)
    return build_algebroid(ctx, anchor, C)


# -- the Koszul bracket ------------------------------------------------------


class PoissonManifold:
    """A bivector on ``R^n`` in the ``PiT*R^n`` model, with ``[P,P] = 0`` checked."""

    def __init__(self, man: ManifoldContext, P: Element, check: bool = True):
        self.man = man
        self.P = P
        self.P_pit = man.to_pit(P)
        S = man.schouten_structure
        self.PP = S(self.P_pit, self.P_pit)
        if check and self.PP:
            raise NotSquareZeroError("[P, P] != 0", man.from_pit(self.PP))
        self.space = FormSpace(man.pit, man.coords, man.tildes, name="multivectors")
        pit = man.pit
        self.dP = Derivation(pit, 1, {g.name: S(self.P_pit, pit.gen(g.name)) for g in pit.generators})
        self.dP_op = DerivationOp(self.space, self.dP, "d_P")

    def form_operator(self, alpha: Element) -> Operator:
        """``i_alpha`` on multivectors for a form ``alpha`` of ``man``."""
        man = self.man
        comps = {}
        for m, c in alpha.terms.items():
            form, I = man.split_monomial(m)
            if I:
                raise GCAError(f"{alpha} is not a form")
            exps, mask = form
            K = tuple(k for k in range(man.dim) if (mask >> k) & 1)
            w = substitute(man.algebra.monomial_element((exps, 0), c), {}, target=man.pit)
            comps[K] = comps.get(K, man.pit.zero()) + w
        return operator_from_components(self.space, {K: w for K, w in comps.items() if w})

    def form_from_components(self, comps) -> Element:
        man = self.man
        out = man.algebra.zero()
        for K, w in comps.items():
            basis = man.algebra.one()
            for k in K:
                basis = basis * man.dx(k + 1)
            out = out + substitute(w, {}, target=man.algebra) * basis
        return out


def koszul_bracket(man: ManifoldContext, P: Element, alpha: Element, beta: Element, check: bool = True) -> Element:
    """Form ``[alpha, beta]^P`` with ``i_{[alpha,beta]^P} = [[i_alpha, d_P], i_beta]``."""
    pm = PoissonManifold(man, P, check=check)
    op = op_commutator(op_commutator(pm.form_operator(alpha), pm.dP_op), pm.form_operator(beta))
    comps = algebraic_components(op)
    result_op = operator_from_components(pm.space, comps)
    diff = first_difference(result_op, op)
    if diff is not None:
        raise GCAError(f"[[i_alpha, d_P], i_beta] is not an interior product: {diff}")
    return pm.form_from_components(comps)


# -- verification ------------------------------------------------------------


def random_section(A: Algebroid, rng: random.Random, max_degree: int = 2) -> Element:
    c = A.ctx
    out = c.algebra.zero()
    for i in range(c.r):
        out = out + _random_poly(c, rng, max_degree) * c.g(c.ht[i])
    return out


def _random_poly(c: AlgebroidContext, rng, max_degree: int, terms: int = 2) -> Element:
    out = c.algebra.zero()
    for _ in range(terms):
        mono = c.algebra.scalar(rng.randint(-3, 3))
        for _ in range(rng.randint(0, max_degree)):
            if c.x:
                mono = mono * c.g(rng.choice(c.x))
        out = out + mono
    return out


def verify_derived_identities(A: Algebroid, samples: int = 20, seed: int = 0, max_degree: int = 2) -> Dict[str, CheckReport]:
    """LAhamilt, LAbiv, LAend, the anchor identity and the Leibniz rule.

    Inputs are all frame sections and coordinates plus ``samples`` random
    polynomial combinations.
    """
    c = A.ctx
    rng = random.Random(seed)
    sections = [c.g(h) for h in c.ht] + [random_section(A, rng, max_degree) for _ in range(samples)]
    # over a point the random polynomials are constants
    functions = [c.g(x) for x in c.x] + [_random_poly(c, rng, max_degree + 1, 3) for _ in range(samples)]
    reports = {k: CheckReport(k) for k in ("LAhamilt", "LAbiv", "LAend", "anchor", "leibniz")}
    pairs = [(sections[i], sections[j]) for i in range(len(sections)) for j in range(len(sections))
             if i < c.r or j < c.r or i == j + 1]
    dA = A.d_A_operator()
    for u, v in pairs:
        br = A.bracket(u, v)
        reports["LAhamilt"].record((u, v), br - A.direct_bracket(u, v))
        reports["LAbiv"].record((u, v), A.poisson(c.section_to_linear(u), c.section_to_linear(v)) - c.section_to_linear(br))
        lhs = A.interior(br)
        rhs = op_commutator(op_commutator(A.interior(u), dA), A.interior(v))
        diff = first_difference(lhs, rhs)
        reports["LAend"].record((u, v), diff[2] - diff[1] if diff else c.algebra.zero())
    for u in sections:
        for f in functions:
            reports["anchor"].record((u, f), A.bracket(u, f) - A.anchor_apply(u, f))
            reports["LAbiv"].record((u, f), A.poisson(c.section_to_linear(u), f) - A.anchor_apply(u, f))
    for k in range(min(len(sections), len(functions))):
        u, v, f = sections[k], sections[-1 - k], functions[k]
        r = A.bracket(u, f * v) - f * A.bracket(u, v) - A.anchor_apply(u, f) * v
        reports["leibniz"].record((u, f, v), r)
    return reports


@dataclass
class EquivalenceReport:
    HH: Element
    QQ: Dict[str, Element]
    PP: Element

    @property
    def verdicts(self) -> Tuple[bool, bool, bool]:
        return (not self.HH, not any(self.QQ.values()), not self.PP)

    @property
    def consistent(self) -> bool:
        return len(set(self.verdicts)) == 1


def three_way_equivalence(A: Algebroid) -> EquivalenceReport:
    """``{H,H}``, ``Q o Q`` on generators and ``[P,P]``; they vanish together."""
    c = A.ctx
    QQ = {}
    for name in c.x + c.yt:
        v = A.Q(A.Q(c.g(name)))
        if v:
            QQ[name] = v
    return EquivalenceReport(A.HH, QQ, c.schouten(A.P, A.P))


def anchor_morphism_residuals(A: Algebroid, pairs, functions) -> CheckReport:
    """``rho([u,v]) f - (rho(u) rho(v) - rho(v) rho(u)) f``."""
    rep = CheckReport("anchor is a morphism of brackets")
    for u, v in pairs:
        w = A.direct_bracket(u, v)
        for f in functions:
            r = A.anchor_apply(w, f) - A.anchor_apply(u, A.anchor_apply(v, f)) + A.anchor_apply(v, A.anchor_apply(u, f))
            rep.record((u, v, f), r)
    return rep


# -- algebroid Frolicher-Nijenhuis bracket ------------------------------------


def _vv_terms(A: Algebroid, X: Element):
    """Split ``X = sum_i xi_i ht_i`` (``xi_i`` in ``Gamma(Lambda A*)``)."""
    c = A.ctx
    for i, h in enumerate(c.ht):
        xi = left_derivative(X, h)
        # X = sum ht_i * (left derivative); move ht_i to the right
        if xi:
            degs = {d for d in xi.degrees()}
            for q in sorted(degs):
                part = xi.homogeneous_parts()[q]
                yield q, part.scale(_sign(q)), c.g(h)


def _contract(A: Algebroid, u: Element, alpha: Element) -> Element:
    return A.interior(u)(alpha)


def _lie(A: Algebroid, u: Element, alpha: Element) -> Element:
    """``L_u = [i_u, d_A]`` for a section ``u``."""
    return _contract(A, u, A.Q(alpha)) + A.Q(_contract(A, u, alpha))


def algebroid_fn(A: Algebroid, X: Element, Y: Element) -> Element:
    """Frolicher-Nijenhuis bracket of ``A``-valued ``A``-forms written ``xi * ht_i``.

    The termwise formula of the de Rham case with ``d``, ``L`` and the Lie
    bracket replaced by ``d_A``, ``[i_u, d_A]`` and ``[ , ]_A``.
    """
    out = A.ctx.algebra.zero()
    for q, xi, x in _vv_terms(A, X):
        for q2, eta, y in _vv_terms(A, Y):
            first = xi * _lie(A, x, eta) + (A.Q(xi) * _contract(A, x, eta)).scale(_sign(q))
            second = eta * _lie(A, y, xi) + (A.Q(eta) * _contract(A, y, xi)).scale(_sign(q2))
            out = out + xi * eta * A.direct_bracket(x, y) + first * y - (second * x).scale(_sign(q * q2))
    return out


def vv_interior(A: Algebroid, X: Element) -> Operator:
    """``i_{xi (x) u} = e_xi o i_u`` for ``X = sum xi * ht_i``."""
    sp = A.ctx.forms
    terms = []
    for q, xi, u in _vv_terms(A, X):
        terms.append((1, compose(LeftMul(sp, xi), A.interior(u))))
    return Sum(sp, terms) if terms else zero_operator(sp)


def algebroid_fn_check(A: Algebroid, X: Element, Y: Element) -> bool:
    """``[i_{[X,Y]_FN}, d_A] = [[i_X, d_A], [i_Y, d_A]]``."""
    dA = A.d_A_operator()
    Z = algebroid_fn(A, X, Y)
    lhs = op_commutator(vv_interior(A, Z), dA)
    rhs = op_commutator(op_commutator(vv_interior(A, X), dA), op_commutator(vv_interior(A, Y), dA))
    return op_equal(lhs, rhs)
