"""Coordinate model of R^n: forms, multivectors and multivector-valued forms.

All three live in one graded-commutative algebra with generators

* ``x1..xn``  (degree 0) coordinates,
* ``dx1..dxn`` (degree 1) coordinate 1-forms,
* ``@1..@n``  (degree -1) coordinate vector fields ``d/dx^a``.

A monomial ``x^J dx^K @_I`` is read as the multivector-valued form
``x^J dx^K (x) d_{i1} ^ ... ^ d_{ip}`` and embeds as the operator
``e_{x^J dx^K} i_{d_{i1}} ... i_{d_{ip}}`` on forms, so its degree in the
algebra is the degree of that operator.

Multivectors also have a second encoding as functions on the odd cotangent
bundle ``PiT*R^n`` with odd fibre coordinates ``xt1..xtn`` (degree 1); the
bijection sends ``@a1 ... @ap`` to ``xt_a1 ... xt_ap``.
"""
from __future__ import annotations

import itertools
from typing import Dict, Iterable, List, Sequence, Tuple

from ..gca import Algebra, BracketStructure, Derivation, Element, GCAError, GradingError, left_derivative, substitute
from .operators import (
    Compose,
    DerivationOp,
    FormSpace,
    Interior,
    LeftMul,
    Operator,
    Sum,
    compose,
    zero_operator,
)


class TensorShapeError(GCAError):
    pass


class ManifoldContext:
    """Polynomial differential calculus on ``R^n``."""

    def __init__(self, dim: int):
        if dim < 1:
            raise GCAError("dimension must be positive")
        self.dim = dim
        self.coords = tuple(f"x{i}" for i in range(1, dim + 1))
        self.dxs = tuple(f"dx{i}" for i in range(1, dim + 1))
        self.vecs = tuple(f"@{i}" for i in range(1, dim + 1))
        self.tildes = tuple(f"xt{i}" for i in range(1, dim + 1))
        gens = [(c, 0) for c in self.coords] + [(c, 1) for c in self.dxs] + [(c, -1) for c in self.vecs]
        self.algebra = Algebra(gens, name=f"T(R^{dim})")
        self.space = FormSpace(self.algebra, self.coords, self.dxs, name=f"Omega(R^{dim})")
        alg = self.algebra
        self.d = Derivation(alg, 1, {c: alg.gen(dc) for c, dc in zip(self.coords, self.dxs)}, default_zero=True)
        self.d_op = DerivationOp(self.space, self.d, "d")
        self.pit = Algebra([(c, 0) for c in self.coords] + [(t, 1) for t in self.tildes], name=f"PiT*R^{dim}")
        self.schouten_structure = BracketStructure(
            self.pit, -1, {(t, c): 1 for t, c in zip(self.tildes, self.coords)})
        self._to_pit = {v: self.pit.gen(t) for v, t in zip(self.vecs, self.tildes)}
        self._from_pit = {t: alg.gen(v) for v, t in zip(self.vecs, self.tildes)}
        n_forms = dim
        self._form_mask = (1 << n_forms) - 1

    def __repr__(self):
        return f"ManifoldContext(R^{self.dim})"

    # -- element constructors -------------------------------------------------
    def x(self, i: int) -> Element:
        return self.algebra.gen(self.coords[i - 1])

    def dx(self, i: int) -> Element:
        return self.algebra.gen(self.dxs[i - 1])

    def vec(self, i: int) -> Element:
        return self.algebra.gen(self.vecs[i - 1])

    def parse(self, text: str) -> Element:
        return self.algebra.parse(text)

    # -- bidegrees ---------------------------------------------------------------
    def split_monomial(self, m) -> Tuple[tuple, Tuple[int, ...]]:
        """``x^J dx^K @_I`` -> (monomial ``x^J dx^K``, increasing index tuple ``I``)."""
        exps, mask = m
        form = (exps, mask & self._form_mask)
        vec_mask = mask >> self.dim
        I = tuple(i for i in range(self.dim) if (vec_mask >> i) & 1)
        return form, I

    def bidegrees(self, X: Element) -> set:
        """Set of (form degree q, vector degree p) over the terms of ``X``."""
        out = set()
        for m in X.terms:
            form, I = self.split_monomial(m)
            out.add((bin(form[1]).count("1"), len(I)))
        return out

    def is_form(self, X: Element) -> bool:
        return all(p == 0 for _, p in self.bidegrees(X))

    def is_multivector(self, X: Element) -> bool:
        return all(q == 0 for q, _ in self.bidegrees(X))

    def vector_components(self, X: Element) -> Dict[Tuple[int, ...], Element]:
        """Group ``X = sum_I w_I (x) @_I`` by the index set ``I``."""
        comps: Dict[Tuple[int, ...], Element] = {}
        alg = self.algebra
        for m, c in X.terms.items():
            form, I = self.split_monomial(m)
            comps[I] = comps.get(I, alg.zero()) + alg.monomial_element(form, c)
        return {I: w for I, w in comps.items() if w}

    def vector_monomial(self, I: Sequence[int]) -> Element:
        out = self.algebra.one()
        for i in I:
            out = out * self.algebra.gen(self.vecs[i])
        return out

    def bidegree_part(self, X: Element, q: int = None, p: int = None) -> Element:
        def keep(m):
            form, I = self.split_monomial(m)
            return (q is None or bin(form[1]).count("1") == q) and (p is None or len(I) == p)
        return X.filter(keep)

    def type_part(self, X: Element, p: int) -> Element:
        return self.bidegree_part(X, p=p)

    # -- the two multivector encodings ---------------------------------------
    def to_pit(self, u: Element) -> Element:
        if not self.is_multivector(u):
            raise TensorShapeError(f"{u} is not a multivector")
        return substitute(u, self._to_pit, target=self.pit)

    def from_pit(self, u: Element) -> Element:
        return substitute(u, self._from_pit, target=self.algebra)

    # -- operators -----------------------------------------------------------
    def embed_i(self, X: Element) -> Operator:
        """``i_X`` with ``i_{xi (x) x} = e_xi o i_{x_1} ... i_{x_p}``."""
        terms = []
        for I, w in sorted(self.vector_components(X).items()):
            chain = [LeftMul(self.space, w)] + [Interior(self.space, self.dxs[i]) for i in I]
            terms.append((1, compose(*chain)))
        if not terms:
            return zero_operator(self.space)
        return Sum(self.space, terms)

    def e(self, xi: Element) -> Operator:
        if not self.is_form(xi):
            raise TensorShapeError(f"{xi} is not a form")
        return LeftMul(self.space, xi)

    def contract(self, X: Element, alpha: Element) -> Element:
        """``i_X alpha`` for a multivector-valued form ``X`` and a tensor ``alpha``.

        The form part of each term of ``alpha`` is contracted and its vector
        part is carried along, i.e. ``i_{xi (x) x}(eta (x) y) = xi ^ i_x eta (x) y``.
        """
        out = self.algebra.zero()
        comps_a = self.vector_components(alpha)
        for I, w in self.vector_components(X).items():
            for J, eta in comps_a.items():
                val = eta
                for i in reversed(I):
                    val = left_derivative(val, self.dxs[i])
                    if not val:
                        break
                if val:
                    out = out + w * val * self.vector_monomial(J)
        return out

    def exterior_derivative(self, alpha: Element) -> Element:
        if not self.is_form(alpha):
            raise TensorShapeError(f"d applied to a non-form {alpha}")
        return self.d(alpha)

    def lie_derivative(self, X: Element, alpha: Element) -> Element:
        """``L_X alpha = [i_X, d] alpha`` for a multivector-valued form ``X``."""
        out = self.algebra.zero()
        for (q, p), part in self._homogeneous(X):
            sign = -1 if (q - p) % 2 else 1
            out = out + self.contract(part, self.d(alpha)) - self.d(self.contract(part, alpha)).scale(sign)
        return out

    def _homogeneous(self, X: Element):
        for q, p in sorted(self.bidegrees(X)):
            yield (q, p), self.bidegree_part(X, q, p)

    # -- random sampling -----------------------------------------------------
    def random_polynomial(self, rng, max_degree: int = 2, terms: int = 3, coeff_range: int = 3) -> Element:
        alg = self.algebra
        out = alg.zero()
        for _ in range(terms):
            deg = rng.randint(0, max_degree)
            mono = alg.one()
            for _ in range(deg):
                mono = mono * alg.gen(rng.choice(self.coords))
            c = rng.randint(-coeff_range, coeff_range)
            out = out + mono.scale(c)
        return out

    def random_tensor(self, rng, q: int, p: int, max_degree: int = 2, terms: int = 2, coeff_range: int = 3) -> Element:
        """Random polynomial-coefficient element of bidegree ``(q, p)``."""
        alg = self.algebra
        out = alg.zero()
        for _ in range(terms):
            K = sorted(rng.sample(range(self.dim), q))
            I = sorted(rng.sample(range(self.dim), p))
            basis = alg.one()
            for k in K:
                basis = basis * alg.gen(self.dxs[k])
            basis = basis * self.vector_monomial(I)
            out = out + self.random_polynomial(rng, max_degree, 2, coeff_range) * basis
        return out

    def random_decomposable(self, rng, q: int, p: int, max_degree: int = 1) -> Element:
        """``xi (x) x_1 ^ ... ^ x_p`` with random polynomial 1-forms and vectors."""
        alg = self.algebra
        xi = alg.one()
        for _ in range(q):
            xi = xi * self.random_tensor(rng, 1, 0, max_degree, 2)
        x = alg.one()
        for _ in range(p):
            x = x * self.random_tensor(rng, 0, 1, max_degree, 2)
        return xi * x
