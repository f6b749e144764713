"""Finite-dimensional Lie algebras through the big bracket.

``Lambda(E + E*)`` is the free algebra on odd generators ``e1..er`` (a basis
of ``E``) and ``eps1..epsr`` (the dual basis), all of degree 1, with the
degree -2 bracket ``{e_i, eps_j} = delta_ij``.  A Lie bracket
``[e_i, e_j] = C^k_ij e_k`` is encoded as

    mu = 1/2 C^k_ij e_k eps_j eps_i

so that ``{{e_i, mu}, e_j} = [e_i, e_j]``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence, Tuple

from .brackets import DerivedContext, NotSquareZeroError, PoissonSetting
from .cartan.operators import DerivationOp, FormSpace, Interior, LeftMul, Operator, compose, op_commutator, \
    op_equal, zero_operator, Sum
from .gca import Algebra, BracketStructure, Derivation, Element, GCAError, left_derivative

StructureConstants = Mapping[Tuple[int, int, int], Fraction]


class NotALieAlgebraError(NotSquareZeroError):
    pass


def big_algebra(dim: int) -> Tuple[Algebra, BracketStructure]:
    alg = Algebra([(f"e{i}", 1) for i in range(1, dim + 1)] + [(f"eps{i}", 1) for i in range(1, dim + 1)],
                  name=f"Lambda(E+E*), dim E = {dim}")
    B = BracketStructure(alg, -2, {(f"e{i}", f"eps{i}"): 1 for i in range(1, dim + 1)})
    return alg, B


def complete_constants(dim: int, table: StructureConstants) -> Dict[Tuple[int, int, int], Fraction]:
    """Antisymmetric completion of ``{(i, j, k): C^k_ij}`` (1-based indices)."""
    full: Dict[Tuple[int, int, int], Fraction] = {}
    for (i, j, k), v in table.items():
        v = Fraction(v)
        if not (1 <= min(i, j, k) and max(i, j, k) <= dim):
            raise GCAError(f"index out of range in structure constant {(i, j, k)}")
        if i == j and v:
            raise GCAError(f"C^{k}_{i}{i} must vanish")
        for key, val in (((i, j, k), v), ((j, i, k), -v)):
            if key in full and full[key] != val:
                raise GCAError(f"structure constants not antisymmetric at {key}")
            full[key] = val
    return {k: v for k, v in full.items() if v}


def jacobi_defects(dim: int, C: Mapping[Tuple[int, int, int], Fraction]) -> Dict[Tuple[int, int, int, int], Fraction]:
    """Classical Jacobi ``sum_cyc C^m_il C^l_jk`` by a direct index sum; nonzero entries only."""
    out = {}
    idx = range(1, dim + 1)
    for i, j, k, m in itertools.product(idx, repeat=4):
        s = Fraction(0)
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            for l in idx:
                s += C.get((a, l, m), 0) * C.get((b, c, l), 0)
        if s:
            out[(i, j, k, m)] = s
    return out


class LieStructure:
    """Structure constants packaged as ``mu`` with ``{mu, mu} = 0`` verified."""

    def __init__(self, dim: int, constants: StructureConstants, check: bool = True):
        self.dim = dim
        self.constants = complete_constants(dim, constants)
        self.algebra, self.big = big_algebra(dim)
        self.mu = self._mu()
        self.square = self.big(self.mu, self.mu)
        if check:
            defects = jacobi_defects(dim, self.constants)
            if bool(self.square) != bool(defects):
                raise GCAError("internal: {mu,mu} and the Jacobi sum disagree")
            if self.square:
                raise NotALieAlgebraError("{mu, mu} != 0", self.square)
        self.setting = PoissonSetting(self.big)
        self.context = DerivedContext(self.setting, element=self.mu, unchecked=not check, element_degree=3)

    def _mu(self) -> Element:
        alg = self.algebra
        mu = alg.zero()
        for (i, j, k), c in self.constants.items():
            mu = mu + (alg.gen(f"e{k}") * alg.gen(f"eps{j}") * alg.gen(f"eps{i}")).scale(c / 2)
        return mu

    def e(self, i: int) -> Element:
        return self.algebra.gen(f"e{i}")

    def eps(self, i: int) -> Element:
        return self.algebra.gen(f"eps{i}")

    def bracket_of_basis(self, i: int, j: int) -> Element:
        out = self.algebra.zero()
        for k in range(1, self.dim + 1):
            out = out + self.e(k).scale(self.constants.get((i, j, k), 0))
        return out

    def parse(self, text: str) -> Element:
        return self.algebra.parse(text)

    # bidegrees
    def bidegree(self, a: Element) -> set:
        """Set of ``(p, q)``: ``p`` factors from ``E``, ``q`` from ``E*``."""
        out = set()
        for (_, mask) in a.terms:
            p = bin(mask & ((1 << self.dim) - 1)).count("1")
            q = bin(mask >> self.dim).count("1")
            out.add((p, q))
        return out


def heisenberg() -> LieStructure:
    return LieStructure(3, {(1, 2, 3): 1})


def sl2() -> LieStructure:
    """Basis ``h, e, f`` as ``e1, e2, e3``: ``[h,e] = 2e``, ``[h,f] = -2f``, ``[e,f] = h``."""
    return LieStructure(3, {(1, 2, 2): 2, (1, 3, 3): -2, (2, 3, 1): 1})


def abelian(dim: int) -> LieStructure:
    return LieStructure(dim, {})


def big_bracket(L: LieStructure, a: Element, b: Element) -> Element:
    return L.big(a, b)


def ce_differential(L: LieStructure, c: Element) -> Element:
    """``d_mu c = {mu, c}``."""
    return L.big(L.mu, c)


def ce_derivation(L: LieStructure) -> Derivation:
    alg = L.algebra
    return Derivation(alg, 1, {g.name: L.big(L.mu, alg.gen(g.name)) for g in alg.generators})


def algebraic_schouten(L: LieStructure, x: Element, y: Element) -> Element:
    """``[x, y]_mu = {{x, mu}, y}``."""
    return L.big(L.big(x, L.mu), y)


def evaluate_cochain(L: LieStructure, beta: Element, *vectors: Element) -> Element:
    """``beta(x_1, ..., x_p) = i_{x_p} ... i_{x_1} beta`` for vectors in ``E``."""
    out = beta
    for x in vectors:
        out = L.big(x, out)
    return out


# operators on Lambda E*


def cochain_space(L: LieStructure) -> FormSpace:
    sp = getattr(L, "_space", None)
    if sp is None:
        sp = L._space = FormSpace(L.algebra, (), [f"eps{i}" for i in range(1, L.dim + 1)], name="Lambda E*")
    return sp


def interior(L: LieStructure, x: Element) -> Operator:
    """``i_x`` on ``Lambda E*`` for ``x`` in ``Lambda E``; ``i_{e_I} = i_{e_i1} ... i_{e_ip}``."""
    sp = cochain_space(L)
    if any(q for _, q in L.bidegree(x)):
        raise GCAError(f"{x} is not in Lambda E")
    terms = []
    for m, c in x.terms.items():
        idx = [j for j in range(L.dim) if (m[1] >> j) & 1]
        chain = [Interior(sp, f"eps{j + 1}") for j in idx]
        op = compose(*chain) if chain else LeftMul(sp, L.algebra.one())
        terms.append((c, op))
    return Sum(sp, terms) if terms else zero_operator(sp)


def liealg_operator_check(L: LieStructure, x: Element, y: Element) -> bool:
    """``i_{[x,y]_mu} = [[i_x, d_mu], i_y]`` as operators on ``Lambda E*``."""
    sp = cochain_space(L)
    dmu = DerivationOp(sp, ce_derivation(L), "d_mu")
    lhs = interior(L, algebraic_schouten(L, x, y))
    rhs = op_commutator(op_commutator(interior(L, x), dmu), interior(L, y))
    return op_equal(lhs, rhs, margin=0)


# linear Poisson structure on E*


class LinearPoisson:
    """``E*`` with linear coordinates ``eta1..etar`` and the bivector of ``mu``.

    Realized in the odd cotangent model with fibre coordinates ``zeta1..zetar``
    and ``{zeta_i, eta_j} = delta_ij`` (degree -1); the bivector is
    ``P_mu = 1/2 eta_k C^k_ij zeta_j zeta_i``.
    """

    def __init__(self, L: LieStructure):
        self.lie = L
        r = L.dim
        self.algebra = Algebra([(f"eta{i}", 0) for i in range(1, r + 1)] + [(f"zeta{i}", 1) for i in range(1, r + 1)],
                               name="PiT*E*")
        self.structure = BracketStructure(self.algebra, -1, {(f"zeta{i}", f"eta{i}"): 1 for i in range(1, r + 1)})
        alg = self.algebra
        P = alg.zero()
        for (i, j, k), c in L.constants.items():
            P = P + (alg.gen(f"eta{k}") * alg.gen(f"zeta{j}") * alg.gen(f"zeta{i}")).scale(c / 2)
        self.P = P

    def eta(self, i: int) -> Element:
        return self.algebra.gen(f"eta{i}")

    def bracket(self, f: Element, g: Element) -> Element:
        """``{f, g}_mu = [[f, P_mu], g]``."""
        S = self.structure
        return S(S(f, self.P), g)


def linear_model(L: LieStructure) -> LinearPoisson:
    """The (cached) linear Poisson model of ``L``; arguments of :func:`linear_poisson` live in it."""
    lp = getattr(L, "_linear", None)
    if lp is None:
        lp = L._linear = LinearPoisson(L)
    return lp


def linear_poisson(L: LieStructure, f: Element, g: Element) -> Element:
    return linear_model(L).bracket(f, g)


# r-matrices


@dataclass
class GCYBEReport:
    r: Element
    schouten_square: Element
    drinfeld: Element
    invariance_residual: Element
    chain_residual: Element

    @property
    def invariant(self) -> bool:
        return not self.invariance_residual

    @property
    def chain_holds(self) -> bool:
        return not self.chain_residual


def gcybe_check(L: LieStructure, r: Element) -> GCYBEReport:
    """``[r,r]_mu``, its ad-invariance ``{mu, [r,r]_mu} = 0`` and the chain
    ``{d_mu r, d_mu r} = d_mu [r,r]_mu``."""
    if r and L.bidegree(r) != {(2, 0)}:
        raise GCAError(f"r = {r} is not in Lambda^2 E")
    sq = algebraic_schouten(L, r, r)
    dr = ce_differential(L, r)
    return GCYBEReport(
        r=r,
        schouten_square=sq,
        drinfeld=sq.scale(-2),
        invariance_residual=ce_differential(L, sq),
        chain_residual=L.big(dr, dr) - ce_differential(L, sq),
    )
