"""Derived brackets of graded Lie brackets.

Everything here is written against a small *Lie setting* interface so the
same code serves graded Poisson algebras (:class:`PoissonSetting`) and the
commutator algebra of operators on forms (see
:class:`derivedbrackets.cartan.operators.CommutatorSetting`):

``setting.n``
    degree of the base bracket
``setting.bracket(a, b)``, ``setting.degree(a)``, ``setting.is_zero(x)``
    the bracket, the degree of a homogeneous element and a zero test.

A :class:`DerivedContext` pairs a setting with an odd differential, given
either as an element ``d`` with ``[d, d] = 0`` (interior derivation) or as a
derivation ``D`` with ``D o D = 0``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Tuple

from .gca import BracketStructure, CheckReport, Derivation, Element, GCAError, GradingError


class DerivedBracketError(GCAError):
    pass


class NotSquareZeroError(DerivedBracketError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InternalInconsistencyError(DerivedBracketError):
    pass


def _sign(e: int) -> int:
    return -1 if e % 2 else 1


class PoissonSetting:
    """A graded algebra with a :class:`BracketStructure`, viewed as a Lie setting."""

    def __init__(self, structure: BracketStructure):
        self.structure = structure
        self.n = structure.degree
        self.algebra = structure.algebra

    def bracket(self, a: Element, b: Element) -> Element:
        return self.structure(a, b)

    def degree(self, a: Element) -> int:
        if not a.is_homogeneous():
            raise GradingError(f"inhomogeneous element {a}")
        return a.degree()

    def is_zero(self, x: Element) -> bool:
        return not x

    def add(self, a, b):
        return a + b

    def scale(self, a, c):
        return a.scale(c)

    def apply_derivation(self, D: Derivation, a: Element) -> Element:
        return D(a)

    def derivation_degree(self, D: Derivation) -> int:
        return D.degree

    def derivation_square_residuals(self, D: Derivation):
        for g in self.algebra.generators:
            yield g.name, D(D(self.algebra.gen(g.name)))

    def derivation_bracket_residuals(self, D: Derivation):
        """``D{g,h} - {Dg,h} - (-1)^{|D|(|g|+n)}{g,Dh}`` on generator pairs."""
        alg = self.algebra
        gens = alg.generators
        for g in gens:
            for h in gens:
                a, b = alg.gen(g.name), alg.gen(h.name)
                r = (D(self.bracket(a, b)) - self.bracket(D(a), b)
                     - self.bracket(a, D(b)).scale(_sign(D.degree * (g.degree + self.n))))
                yield (g.name, h.name), r

    def anticommutator_residuals(self, D1: Derivation, D2: Derivation):
        for g in self.algebra.generators:
            x = self.algebra.gen(g.name)
            yield g.name, D1(D2(x)) + D2(D1(x))


class DerivedContext:
    """A base bracket together with an odd square-zero differential.

    Parameters
    ----------
    setting
        Lie setting providing the base bracket.
    element
        Odd element ``d`` with ``[d, d] = 0`` and ``|d| + n`` odd.
    derivation
        Alternatively, an odd derivation ``D`` with ``D o D = 0``.
    unchecked
        Skip the square-zero verification.  Only meant for exhibiting
        failure witnesses in tests.
    element_degree
        Degree to assume for ``element``; needed when the element is zero
        and so has no degree of its own.
    """

    def __init__(self, setting, element=None, derivation=None, unchecked: bool = False,
                 element_degree: int = None):
        if (element is None) == (derivation is None):
            raise DerivedBracketError("give exactly one of element= or derivation=")
        self.setting = setting
        self.n = setting.n
        self.element = element
        self.derivation = derivation
        self.unchecked = unchecked
        if element is not None:
            if element_degree is None:
                element_degree = setting.degree(element)
            self.diff_degree = element_degree + self.n
        else:
            self.diff_degree = setting.derivation_degree(derivation)
        if not unchecked:
            self._verify()

    def _verify(self):
        s = self.setting
        if self.diff_degree % 2 == 0:
            raise DerivedBracketError(f"differential has even degree {self.diff_degree}")
        if self.element is not None:
            sq = s.bracket(self.element, self.element)
            if not s.is_zero(sq):
                raise NotSquareZeroError("[d, d] != 0", sq)
            return
        for name, r in s.derivation_square_residuals(self.derivation):
            if not s.is_zero(r):
                raise NotSquareZeroError(f"D(D({name})) != 0", r)
        for pair, r in s.derivation_bracket_residuals(self.derivation):
            if not s.is_zero(r):
                raise DerivedBracketError(f"D is not a derivation of the bracket on {pair}: {r}")

    @property
    def derived_degree(self) -> int:
        """Degree of the derived bracket, ``n + |D|`` (odd shift of ``n``)."""
        return self.n + self.diff_degree

    def D(self, a):
        """The differential: ``[d, a]`` or ``D(a)``."""
        if self.element is not None:
            return self.setting.bracket(self.element, a)
        return self.setting.apply_derivation(self.derivation, a)


def derived_bracket(ctx: DerivedContext, a, b):
    """``[a,b]_(D) = (-1)^{n+|a|+1} [Da, b]``."""
    s = ctx.setting
    da = s.degree(a)
    return s.scale(s.bracket(ctx.D(a), b), _sign(ctx.n + da + 1))


def derived_by_element(ctx: DerivedContext, a, b, cross_check: bool = True):
    """``[a,b]_d = [[a, d], b]``, cross-checked against :func:`derived_bracket`."""
    if ctx.element is None:
        raise DerivedBracketError("derived_by_element needs an element differential")
    s = ctx.setting
    s.degree(a)
    out = s.bracket(s.bracket(a, ctx.element), b)
    if cross_check:
        other = derived_bracket(ctx, a, b)
        if not s.is_zero(s.add(out, s.scale(other, -1))):
            raise InternalInconsistencyError(f"[[a,d],b] and (-1)^(n+|a|+1)[Da,b] differ for a={a}, b={b}")
    return out


def skew_symmetrize(ctx: DerivedContext, a, b):
    """``1/2 ([a, Db] - (-1)^{n+|a|} [Da, b])``."""
    s = ctx.setting
    da = s.degree(a)
    s.degree(b)
    first = s.bracket(a, ctx.D(b))
    second = s.bracket(ctx.D(a), b)
    return s.scale(s.add(first, s.scale(second, -_sign(ctx.n + da))), Fraction(1, 2))


def check_loday(ctx: DerivedContext, triples: Iterable[Tuple]) -> CheckReport:
    """Jacobi identity in Loday form for the derived bracket, at degree ``n + |D|``."""
    s = ctx.setting
    report = CheckReport("Loday identity of the derived bracket")

    def br(x, y):
        return derived_bracket(ctx, x, y)

    n1 = ctx.derived_degree
    for a, b, c in triples:
        da, db = s.degree(a), s.degree(b)
        sign = _sign((n1 + da) * (n1 + db))
        r = s.add(s.add(br(a, br(b, c)), s.scale(br(br(a, b), c), -1)), s.scale(br(b, br(a, c)), -sign))
        report.record((a, b, c), r, s.is_zero)
    return report


def check_skew_jacobi(ctx: DerivedContext, triples: Iterable[Tuple]) -> CheckReport:
    """Jacobi residuals of the skew-symmetrized derived bracket."""
    s = ctx.setting
    report = CheckReport("Jacobi identity of the skew-symmetrized bracket")

    def br(x, y):
        return skew_symmetrize(ctx, x, y)

    n1 = ctx.derived_degree
    for a, b, c in triples:
        da, db = s.degree(a), s.degree(b)
        sign = _sign((n1 + da) * (n1 + db))
        r = s.add(s.add(br(a, br(b, c)), s.scale(br(br(a, b), c), -1)), s.scale(br(b, br(a, c)), -sign))
        report.record((a, b, c), r, s.is_zero)
    return report


def check_morphism_derivation(ctx: DerivedContext, pairs: Iterable[Tuple]) -> Tuple[CheckReport, ...]:
    """Morphism and derivation properties of ``D`` for the derived bracket.

    Returns reports for

    * ``D[a,b]_(D) = [Da, Db]`` (``D`` is a morphism to the base bracket),
    * ``D[a,b]_(D) = [Da,b]_(D) + (-1)^{|D|(|a|+n')}[a,Db]_(D)`` with
      ``n' = n + |D|`` (``D`` is a derivation of the derived bracket),
    * for an element differential, ``[[a,b]_d, d] = [[a,d],[b,d]]``.
    """
    s = ctx.setting
    morph = CheckReport("D is a morphism to the base bracket")
    deriv = CheckReport("D is a derivation of the derived bracket")
    right = CheckReport("a -> [a,d] is a morphism") if ctx.element is not None else None
    n1 = ctx.derived_degree
    for a, b in pairs:
        da = s.degree(a)
        s.degree(b)
        ab = derived_bracket(ctx, a, b)
        Dab = ctx.D(ab)
        Da, Db = ctx.D(a), ctx.D(b)
        morph.record((a, b), s.add(Dab, s.scale(s.bracket(Da, Db), -1)), s.is_zero)
        rhs = s.add(derived_bracket(ctx, Da, b),
                    s.scale(derived_bracket(ctx, a, Db), _sign(ctx.diff_degree * (da + n1))))
        deriv.record((a, b), s.add(Dab, s.scale(rhs, -1)), s.is_zero)
        if right is not None:
            d = ctx.element
            lhs = s.bracket(ab, d)
            rhs = s.bracket(s.bracket(a, d), s.bracket(b, d))
            right.record((a, b), s.add(lhs, s.scale(rhs, -1)), s.is_zero)
    return tuple(r for r in (morph, deriv, right) if r is not None)


def check_compatibility(ctx1: DerivedContext, ctx2: DerivedContext, triples: Sequence[Tuple]) -> Tuple[CheckReport, ...]:
    """Compatibility of the derived brackets of two anticommuting differentials.

    Verifies ``[a,b]_{d1} + [a,b]_{d2} = [a,b]_{d1+d2}`` and the Loday
    identity of the sum bracket on ``triples``.
    """
    if ctx1.setting is not ctx2.setting:
        raise DerivedBracketError("compatibility needs a common base bracket")
    s = ctx1.setting
    if (ctx1.element is None) != (ctx2.element is None):
        raise DerivedBracketError("both differentials must be of the same kind")
    if ctx1.element is not None:
        cross = s.bracket(ctx1.element, ctx2.element)
        if not s.is_zero(cross):
            raise NotSquareZeroError("[d1, d2] != 0", cross)
        total = DerivedContext(s, element=s.add(ctx1.element, ctx2.element))
    else:
        for name, r in s.anticommutator_residuals(ctx1.derivation, ctx2.derivation):
            if not s.is_zero(r):
                raise NotSquareZeroError(f"D1 D2 + D2 D1 != 0 on {name}", r)
        total = DerivedContext(s, derivation=ctx1.derivation + ctx2.derivation)
    additivity = CheckReport("sum of derived brackets is the derived bracket of the sum")
    for a, b, _ in triples:
        lhs = s.add(derived_bracket(ctx1, a, b), derived_bracket(ctx2, a, b))
        additivity.record((a, b), s.add(lhs, s.scale(derived_bracket(total, a, b), -1)), s.is_zero)
    return additivity, check_loday(total, triples)
