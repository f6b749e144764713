"""Linear operators on a form algebra, as composition trees.

A :class:`FormSpace` names the even coordinates and the odd "form"
generators of a graded-commutative algebra.  Operators are built from left
multiplications ``e_a``, interior derivatives ``i_g = d/dg`` with respect to
odd generators, arbitrary :class:`~derivedbrackets.gca.Derivation` objects
(``d``, ``Q``, ``d_P`` ...), sums and compositions.

Every operator carries an *order bound*: the number of derivation factors
acting on the even coordinates along any branch.  Two operators whose order
is at most ``k`` agree iff they agree on the finite family
``x^J * g_K`` with ``|J| <= k`` and ``K`` any subset of the odd generators,
because a polynomial-coefficient differential operator of order ``k`` is
determined by its values on polynomials of degree ``<= k``.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import reduce
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from ..gca import Algebra, CheckReport, Derivation, Element, GCAError, GradingError, left_derivative


class OperatorError(GCAError):
    pass


class MissingOrderBoundError(OperatorError):
    pass


class UnsupportedShapeError(OperatorError):
    pass


DEFAULT_MARGIN = 1


class FormSpace:
    """Even coordinates and odd generators spanning a space of "forms"."""

    def __init__(self, algebra: Algebra, coords: Sequence[str], odd: Sequence[str], name: str = ""):
        self.algebra = algebra
        self.coords = tuple(coords)
        self.odd = tuple(odd)
        self.name = name
        self._family_cache: Dict[int, Tuple[Element, ...]] = {}
        for g in self.odd:
            if not algebra.generator(g).odd:
                raise OperatorError(f"{g} is not an odd generator")

    def __repr__(self):
        return f"FormSpace({self.name or self.algebra.name})"

    def odd_monomial(self, subset: Sequence[int]) -> Element:
        out = self.algebra.one()
        for i in subset:
            out = out * self.algebra.gen(self.odd[i])
        return out

    def subsets(self):
        m = len(self.odd)
        for r in range(m + 1):
            yield from itertools.combinations(range(m), r)

    def polynomials(self, max_degree: int):
        alg = self.algebra
        for total in range(max_degree + 1):
            for combo in itertools.combinations_with_replacement(self.coords, total):
                out = alg.one()
                for c in combo:
                    out = out * alg.gen(c)
                yield out

    def test_family(self, order: int, margin: int = DEFAULT_MARGIN) -> Tuple[Element, ...]:
        k = order + margin
        fam = self._family_cache.get(k)
        if fam is None:
            odd = [self.odd_monomial(s) for s in self.subsets()]
            fam = tuple(p * w for p in self.polynomials(k) for w in odd)
            self._family_cache[k] = fam
        return fam


def _sign(e) -> int:
    return -1 if e % 2 else 1


class Operator:
    """Base class; subclasses set ``space``, ``degree``, ``parity`` and ``order``.

    ``degree`` is ``None`` for sums of terms of different degrees sharing one
    parity (e.g. ``i_x + e_xi``); signs only ever use ``parity``.
    """

    space: FormSpace
    degree: Optional[int]
    parity: int
    order: Optional[int]

    def apply(self, a: Element) -> Element:
        raise NotImplementedError

    def __call__(self, a: Element) -> Element:
        if a.algebra is not self.space.algebra:
            raise OperatorError("operator applied to an element of another algebra")
        return self.apply(a)

    # algebra of operators
    def __add__(self, other: "Operator") -> "Operator":
        return op_sum([(1, self), (1, other)])

    def __sub__(self, other: "Operator") -> "Operator":
        return op_sum([(1, self), (-1, other)])

    def __neg__(self) -> "Operator":
        return op_sum([(-1, self)])

    def __mul__(self, c) -> "Operator":
        if isinstance(c, (int, Fraction)):
            return op_sum([(c, self)])
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        return compose(self, other)

    @property
    def grading(self) -> int:
        """Degree if homogeneous, otherwise a representative of the parity."""
        return self.degree if self.degree is not None else self.parity


class LeftMul(Operator):
    """``e_a``: left multiplication by an element (``a`` may be of mixed degree, one parity)."""

    def __init__(self, space: FormSpace, element: Element):
        self.space = space
        self.element = element
        degs = element.degrees()
        if len({d % 2 for d in degs}) > 1:
            raise GradingError(f"e_a needs a parity-homogeneous element, got {element}")
        self.degree = degs.pop() if len(degs) == 1 else (None if degs else 0)
        self.parity = element.parity()
        self.order = 0

    def apply(self, a):
        return self.element * a

    def __repr__(self):
        return f"e[{self.element}]"


class Interior(Operator):
    """Left derivative with respect to an odd generator (``i_{d/dx^a}`` on forms)."""

    def __init__(self, space: FormSpace, name: str):
        self.space = space
        self.name = name
        self.degree = -space.algebra.generator(name).degree
        self.parity = self.degree % 2
        self.order = 0

    def apply(self, a):
        return left_derivative(a, self.name)

    def __repr__(self):
        return f"i[{self.name}]"


class DerivationOp(Operator):
    """A :class:`Derivation` of the underlying algebra acting as an operator."""

    def __init__(self, space: FormSpace, derivation: Derivation, label: str = "D"):
        self.space = space
        self.derivation = derivation
        self.degree = derivation.degree
        self.parity = derivation.degree % 2
        self.order = 1 if derivation.acts_on_even() else 0
        self.label = label

    def apply(self, a):
        return self.derivation(a)

    def __repr__(self):
        return self.label


class FunctionOp(Operator):
    """Opaque linear map given as a Python callable with a declared order bound."""

    def __init__(self, space: FormSpace, fn: Callable[[Element], Element], degree: int, order: Optional[int] = None,
                 label: str = "f"):
        self.space = space
        self.fn = fn
        self.degree = degree
        self.parity = degree % 2
        self.order = order
        self.label = label

    def apply(self, a):
        return self.fn(a)

    def __repr__(self):
        return self.label


class Compose(Operator):
    def __init__(self, left: Operator, right: Operator):
        if left.space is not right.space:
            raise OperatorError("composition across different form spaces")
        self.space = left.space
        self.left, self.right = left, right
        self.degree = None if left.degree is None or right.degree is None else left.degree + right.degree
        self.parity = (left.parity + right.parity) % 2
        self.order = None if left.order is None or right.order is None else left.order + right.order

    def apply(self, a):
        b = self.right.apply(a)
        return self.left.apply(b) if b else b

    def __repr__(self):
        return f"{self.left!r}.{self.right!r}"


class Sum(Operator):
    def __init__(self, space: FormSpace, terms: Sequence[Tuple[Fraction, Operator]]):
        self.space = space
        # empty sums are zero operators of every degree; drop them
        self.terms = tuple((Fraction(c), op) for c, op in terms
                           if c and not _is_null(op))
        pars = {op.parity for _, op in self.terms}
        if len(pars) > 1:
            raise GradingError("sum of operators of different parity")
        self.parity = pars.pop() if pars else 0
        degs = {op.degree for _, op in self.terms}
        self.degree = degs.pop() if len(degs) == 1 else (None if degs else 0)
        orders = [op.order for _, op in self.terms]
        self.order = None if any(o is None for o in orders) else max(orders, default=0)

    def apply(self, a):
        out = self.space.algebra.zero()
        for c, op in self.terms:
            v = op.apply(a)
            if v:
                out = out + (v if c == 1 else v.scale(c))
        return out

    def __repr__(self):
        return " + ".join(f"{c}*({op!r})" for c, op in self.terms) or "0"


def _is_null(op: Operator) -> bool:
    """Syntactically zero: an empty sum or multiplication by 0."""
    return (isinstance(op, Sum) and not op.terms) or (isinstance(op, LeftMul) and not op.element)


def zero_operator(space: FormSpace) -> Operator:
    return Sum(space, [])


def identity(space: FormSpace) -> Operator:
    return LeftMul(space, space.algebra.one())


def op_sum(terms: Sequence[Tuple[Fraction, Operator]]) -> Operator:
    flat: List[Tuple[Fraction, Operator]] = []
    space = None
    for c, op in terms:
        space = space or op.space
        if isinstance(op, Sum):
            flat.extend((c * c2, op2) for c2, op2 in op.terms)
        else:
            flat.append((Fraction(c), op))
    if not flat:
        if space is None:
            raise OperatorError("empty operator sum needs an explicit space")
        return zero_operator(space)
    return Sum(flat[0][1].space, flat)


def compose(*ops: Operator) -> Operator:
    if any(_is_null(op) for op in ops):
        return zero_operator(ops[0].space)
    return reduce(Compose, ops)


def op_commutator(a: Operator, b: Operator) -> Operator:
    """Graded commutator ``ab - (-1)^{|a||b|} ba``."""
    return Sum(a.space, [(1, compose(a, b)), (-_sign(a.parity * b.parity), compose(b, a))])


def order_bound(*ops: Operator) -> int:
    k = 0
    for op in ops:
        if op.order is None:
            raise MissingOrderBoundError(f"operator {op!r} has no declared order bound")
        k = max(k, op.order)
    return k


def first_difference(a: Operator, b: Operator, margin: int = DEFAULT_MARGIN):
    """First test input on which ``a`` and ``b`` differ, with both values, or ``None``."""
    if a.space is not b.space:
        raise OperatorError("operators act on different form spaces")
    k = order_bound(a, b)
    for t in a.space.test_family(k, margin):
        va, vb = a.apply(t), b.apply(t)
        if va != vb:
            return t, va, vb
    return None


def op_equal(a: Operator, b: Operator, margin: int = DEFAULT_MARGIN) -> bool:
    """Decide ``a == b`` by evaluation on the test family of their order bound."""
    return first_difference(a, b, margin) is None


def op_is_zero(a: Operator, margin: int = DEFAULT_MARGIN) -> bool:
    k = order_bound(a)
    for t in a.space.test_family(k, margin):
        if a.apply(t):
            return False
    return True


class CommutatorSetting:
    """Operators on a form space under the graded commutator (a degree-0 Lie setting)."""

    n = 0

    def __init__(self, space: FormSpace, margin: int = DEFAULT_MARGIN):
        self.space = space
        self.margin = margin

    def bracket(self, a, b):
        return op_commutator(a, b)

    def degree(self, a):
        return a.grading

    def is_zero(self, x):
        return op_is_zero(x, self.margin)

    def add(self, a, b):
        return a + b

    def scale(self, a, c):
        return a * c


# ---------------------------------------------------------------------------
# extraction of algebraic operators
# ---------------------------------------------------------------------------


def interior_sign(p: int) -> int:
    """``i_{g_1} ... i_{g_p} (g_1 ... g_p) = (-1)^{p(p-1)/2}``."""
    return _sign(p * (p - 1) // 2)


def algebraic_components(op: Operator) -> Dict[Tuple[int, ...], Element]:
    """Write a C-infinity-linear operator as ``sum_I e_{w_I} i_{g_I}``.

    ``i_{g_I} = i_{g_{i1}} ... i_{g_{ip}}`` for ``I`` increasing.  The
    coefficients ``w_I`` are found by polarization: evaluate on the odd
    monomials ``g_K`` in order of size and strip the contributions of the
    lower-type terms already found.  The caller must check that the result
    reproduces ``op``; see :func:`extract_tensor`.
    """
    space = op.space
    comps: Dict[Tuple[int, ...], Element] = {}
    for K in space.subsets():
        gK = space.odd_monomial(K)
        val = op.apply(gK)
        for I, w in comps.items():
            if set(I) <= set(K):
                contracted = gK
                for i in reversed(I):
                    contracted = left_derivative(contracted, space.odd[i])
                val = val - w * contracted
        if val:
            comps[K] = val.scale(interior_sign(len(K)))
    return comps


def operator_from_components(space: FormSpace, comps: Dict[Tuple[int, ...], Element]) -> Operator:
    terms = []
    for I, w in comps.items():
        chain = [LeftMul(space, w)] + [Interior(space, space.odd[i]) for i in I]
        terms.append((1, compose(*chain)))
    if not terms:
        return zero_operator(space)
    # group by parity is unnecessary: a well-formed operator has one parity
    return Sum(space, terms)
