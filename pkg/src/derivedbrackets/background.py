"""Courant brackets with a closed 3-form background and twisted Poisson structures.

Conventions: ``P# xi = i_xi P`` (contraction into the first slot),
multivectors and forms are evaluated as ``T(a_1, ..., a_k) = i_{a_k} ... i_{a_1} T``
and ``i_{x ^ y} = i_x i_y``.
"""
from __future__ import annotations

import itertools
import random
import warnings
from fractions import Fraction
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .algebroid import Algebroid, AlgebroidContext, koszul_bracket, sharp
from .brackets import NotSquareZeroError
from .cartan.brackets import dorfman, lie_bracket, schouten
from .cartan.manifold import ManifoldContext, TensorShapeError
from .cartan.operators import LeftMul, Operator, Sum, compose, first_difference, op_commutator
from .gca import CheckReport, Derivation, Element, GCAError, GradingError, left_derivative, substitute


class ClosureWarning(UserWarning):
    pass


def _form_degrees(man: ManifoldContext, psi: Element) -> set:
    if not man.is_form(psi):
        raise TensorShapeError(f"{psi} is not a form")
    return {q for q, _ in man.bidegrees(psi)}


class BackgroundContext:
    """A manifold with a closed form ``psi`` of odd degree."""

    def __init__(self, man: ManifoldContext, psi: Element):
        degs = _form_degrees(man, psi)
        if any(q % 2 == 0 for q in degs):
            raise GradingError(f"background {psi} must have odd degree")
        dpsi = man.d(psi)
        if dpsi:
            raise NotSquareZeroError("d psi != 0: [d^psi, d^psi] = e_{d psi}", dpsi)
        self.man = man
        self.psi = psi
        self.degree = degs.pop() if degs else 3
        self.operator = twisted_differential(man, psi, check=False)


def twisted_differential(man: ManifoldContext, psi: Element, check: bool = True) -> Operator:
    """``d^psi = d + e_psi``; with ``check`` a non-closed ``psi`` is rejected."""
    degs = _form_degrees(man, psi)
    if any(q % 2 == 0 for q in degs):
        raise GradingError(f"background {psi} must have odd degree")
    if check and man.d(psi):
        raise NotSquareZeroError("d psi != 0: [d^psi, d^psi] = e_{d psi}", man.d(psi))
    if not psi:
        return man.d_op
    return Sum(man.space, [(1, man.d_op), (1, LeftMul(man.space, psi))])


def twisted_square(man: ManifoldContext, psi: Element) -> Operator:
    """``1/2 [d^psi, d^psi] = (d^psi)^2`` (expected to be ``e_{d psi}``)."""
    D = twisted_differential(man, psi, check=False)
    return compose(D, D)


def i_wedge(man: ManifoldContext, x: Element, y: Element, alpha: Element) -> Element:
    """``i_{x ^ y} alpha = i_x i_y alpha``."""
    return man.contract(x, man.contract(y, alpha))


def background_dorfman(man: ManifoldContext, psi: Element, x: Element, xi: Element, y: Element,
                       eta: Element) -> Tuple[Element, Element]:
    """``[x + xi, y + eta]_{d^psi} = [x,y] + L_x eta - i_y d xi + i_{x^y} psi``.

    Warns with :class:`ClosureWarning` when ``psi`` is not a 3-form, since the
    form part then leaves the 1-forms.
    """
    degs = _form_degrees(man, psi)
    if degs - {3}:
        warnings.warn(f"background of degree {sorted(degs)}: V^1 + Omega^1 is not closed under the bracket",
                      ClosureWarning, stacklevel=2)
    vec, form = dorfman(man, x, xi, y, eta)
    return vec, form + i_wedge(man, x, y, psi)


def background_operator_check(man: ManifoldContext, psi: Element, x: Element, xi: Element, y: Element,
                              eta: Element):
    """``i_{[a,b]} + e_{...} = [[i_x + e_xi, d^psi], i_y + e_eta]``; returns the first difference or None."""
    D = twisted_differential(man, psi)
    a, b = man.embed_i(x + xi), man.embed_i(y + eta)
    vec, form = background_dorfman(man, psi, x, xi, y, eta)
    return first_difference(man.embed_i(vec + form), op_commutator(op_commutator(a, D), b))


# -- P#, wedge powers and the twisted Koszul bracket ---------------------------


def evaluate(man: ManifoldContext, T: Element, *args: Element) -> Element:
    """``T(a_1, ..., a_k) = i_{a_k} ... i_{a_1} T`` (forms take vectors, multivectors take 1-forms)."""
    out = T
    for a in args:
        if man.is_form(T):
            out = man.contract(a, out)
        else:
            out = _form_into_multivector(man, a, out)
    return out


def _form_into_multivector(man: ManifoldContext, xi: Element, u: Element) -> Element:
    """``i_xi u`` for a 1-form ``xi`` and a multivector ``u`` (left derivative in the ``@`` generators)."""
    out = man.algebra.zero()
    for m, c in xi.terms.items():
        form, I = man.split_monomial(m)
        exps, mask = form
        K = [k for k in range(man.dim) if (mask >> k) & 1]
        if I or len(K) != 1:
            raise TensorShapeError(f"{xi} is not a 1-form")
        out = out + man.algebra.monomial_element((exps, 0), c) * left_derivative(u, man.vecs[K[0]])
    return out


def pairing(man: ManifoldContext, xi: Element, x: Element) -> Element:
    """``<xi, x>``."""
    return man.contract(x, xi)


def wedge_power_sharp(man: ManifoldContext, P: Element, psi: Element) -> Element:
    """``(^k P#)(psi)``: the ``k``-vector with ``T(xi_1, ..., xi_k) = psi(P# xi_1, ..., P# xi_k)``."""
    out = man.algebra.zero()
    images = [sharp(man, P, man.dx(a)) for a in range(1, man.dim + 1)]
    for q in sorted(_form_degrees(man, psi)):
        part = man.bidegree_part(psi, q=q)
        for I in itertools.combinations(range(man.dim), q):
            val = evaluate(man, part, *[images[a] for a in I])
            if val:
                out = out + val * man.vector_monomial(I)
    return out


def sharp_psi_form(man: ManifoldContext, P: Element, psi: Element) -> Element:
    """``(^2 P#)(psi)`` as the bivector-valued 1-form ``sum_c dx^c (x) B_c`` with
    ``B_c(xi, eta) = psi(P# xi, P# eta, d_c)``."""
    out = man.algebra.zero()
    images = [sharp(man, P, man.dx(a)) for a in range(1, man.dim + 1)]
    for c in range(man.dim):
        for a, b in itertools.combinations(range(man.dim), 2):
            val = evaluate(man, psi, images[a], images[b], man.vec(c + 1))
            if val:
                out = out + val * man.dx(c + 1) * man.vector_monomial((a, b))
    return out


def background_form_bracket(man: ManifoldContext, P: Element, psi: Element, xi: Element, eta: Element) -> Element:
    """``[xi, eta]^{P,psi} = [xi, eta]^P + i_{P#xi ^ P#eta} psi`` for 1-forms."""
    base = koszul_bracket(man, P, xi, eta, check=False)
    return base + i_wedge(man, sharp(man, P, xi), sharp(man, P, eta), psi)


# -- d_{P,psi} ----------------------------------------------------------------


def twisted_poisson_derivation(man: ManifoldContext, P: Element, psi: Element) -> Derivation:
    """``d_{P,psi} = d_P + i_{(^2 P#)(psi)}`` as a derivation of the ``PiT*M`` model."""
    pit = man.pit
    S = man.schouten_structure
    Pp = man.to_pit(P)
    W = sharp_psi_form(man, P, psi)
    images = {}
    for c in man.coords:
        images[c] = S(Pp, pit.gen(c))
    for k, t in enumerate(man.tildes):
        # i_W on the vector d_k: insert d_k in the form slot of W
        extra = man.contract(man.vec(k + 1), W)
        images[t] = S(Pp, pit.gen(t)) + man.to_pit(extra)
    return Derivation(pit, 1, images)


def twisted_poisson_differential(man: ManifoldContext, P: Element, psi: Element, u: Element) -> Element:
    """``d_{P,psi} u`` for a multivector ``u``."""
    D = twisted_poisson_derivation(man, P, psi)
    return man.from_pit(D(man.to_pit(u)))


def dual_formula(man: ManifoldContext, P: Element, psi: Element, x: Element, xi: Element, eta: Element) -> Element:
    """``P#xi <eta, x> - P#eta <xi, x> - <[xi, eta]^{P,psi}, x>``."""
    def act(v, f):
        return man.contract(v, man.d(f))
    return (act(sharp(man, P, xi), pairing(man, eta, x)) - act(sharp(man, P, eta), pairing(man, xi, x))
            - pairing(man, background_form_bracket(man, P, psi, xi, eta), x))


def twisted_square_residual(man: ManifoldContext, P: Element, psi: Element) -> Dict[str, Element]:
    """``d_{P,psi}^2`` on the generators of the multivector algebra; nonzero entries only."""
    D = twisted_poisson_derivation(man, P, psi)
    out = {}
    for g in man.pit.generators:
        v = D(D(man.pit.gen(g.name)))
        if v:
            out[g.name] = man.from_pit(v)
    return out


# -- the compatibility condition and the anchor ----------------------------------------


@dataclass
class WZWReport:
    lhs: Element
    rhs: Element

    @property
    def residual(self) -> Element:
        return self.lhs - self.rhs

    @property
    def verdict(self) -> bool:
        return not self.residual


def wzw_condition(man: ManifoldContext, P: Element, psi: Element) -> WZWReport:
    """``1/2 [P,P]_SN`` against ``(^3 P#)(psi)``."""
    if not man.is_multivector(P) or man.bidegrees(P) - {(0, 2)}:
        raise TensorShapeError(f"{P} is not a bivector")
    half = schouten(man, P, P).scale(Fraction(1, 2))
    return WZWReport(half, wedge_power_sharp(man, P, man.bidegree_part(psi, q=3)))


def random_one_form(man: ManifoldContext, rng, max_degree: int = 1) -> Element:
    return man.random_tensor(rng, 1, 0, max_degree, 2)


def check_anchor_morphism(man: ManifoldContext, P: Element, psi: Element, samples: int = 5, seed: int = 0,
                          max_degree: int = 1) -> CheckReport:
    """``P#[xi, eta]^{P,psi} - [P#xi, P#eta]`` on coordinate pairs and random 1-forms."""
    rng = random.Random(seed)
    forms = [man.dx(a) for a in range(1, man.dim + 1)]
    pairs = list(itertools.combinations(forms, 2))
    pairs += [(random_one_form(man, rng, max_degree), random_one_form(man, rng, max_degree)) for _ in range(samples)]
    rep = CheckReport("anchor morphism")
    for xi, eta in pairs:
        lhs = sharp(man, P, background_form_bracket(man, P, psi, xi, eta))
        rhs = lie_bracket(man, sharp(man, P, xi), sharp(man, P, eta))
        rep.record((xi, eta), lhs - rhs)
    return rep


@dataclass
class TriangleReport:
    wzw: WZWReport
    square: Dict[str, Element]
    anchor: CheckReport

    @property
    def verdicts(self) -> Tuple[bool, bool, bool]:
        return self.wzw.verdict, not self.square, self.anchor.passed

    @property
    def consistent(self) -> bool:
        return len(set(self.verdicts)) == 1


def equivalence_triangle(man: ManifoldContext, P: Element, psi: Element, samples: int = 3, seed: int = 0) -> TriangleReport:
    return TriangleReport(wzw_condition(man, P, psi), twisted_square_residual(man, P, psi),
                          check_anchor_morphism(man, P, psi, samples, seed))


def twisted_cotangent_algebroid(man: ManifoldContext, P: Element, psi: Element) -> Algebroid:
    """``(T*M, [ , ]^{P,psi}, P#)`` in the frame ``dx^i``; flagged invalid when the compatibility condition fails."""
    n = man.dim
    ctx = AlgebroidContext(n, n)
    to_ctx = {c: ctx.g(c) for c in man.coords}
    anchor = []
    for i in range(1, n + 1):
        comps = man.vector_components(sharp(man, P, man.dx(i)))
        anchor.append([substitute(comps.get((a,), man.algebra.zero()), to_ctx, target=ctx.algebra)
                       for a in range(n)])
    C = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            br = background_form_bracket(man, P, psi, man.dx(i), man.dx(j))
            for k in range(1, n + 1):
                w = pairing(man, br, man.vec(k))
                if w:
                    C[(i, j, k)] = substitute(w, to_ctx, target=ctx.algebra)
    return Algebroid(ctx, anchor, C)
