"""Free Z-graded commutative algebras over the rationals.

An :class:`Algebra` is generated by even generators (polynomial variables)
and odd generators (Grassmann variables).  Elements are finite sums of
monomials with :class:`fractions.Fraction` coefficients.  A monomial is stored
as ``(exps, mask)`` where ``exps`` holds the exponents of the even generators
and bit ``j`` of ``mask`` marks the ``j``-th odd generator.  Inside a monomial
the generators are ordered even-first, then odd, each in declaration order,
so two elements are equal exactly when their term maps are equal.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Sequence, Tuple, Union

Monomial = Tuple[Tuple[int, ...], int]
Scalar = Union[int, Fraction]


class GCAError(Exception):
    """Base class for kernel errors."""


class ContextMismatchError(GCAError):
    pass


class GradingError(GCAError):
    pass


class IncompleteDerivationError(GCAError):
    pass


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int

    @property
    def odd(self) -> bool:
        return self.degree % 2 == 1


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _bits(mask: int) -> Iterator[int]:
    j = 0
    while mask:
        if mask & 1:
            yield j
        mask >>= 1
        j += 1


class Algebra:
    """Generator context of a free graded-commutative algebra.

    Parameters
    ----------
    generators : sequence of (name, degree) pairs or :class:`Generator`
        Parity is read off the degree.  Names must be unique.
    """

    def __init__(self, generators: Iterable[Union[Generator, Tuple[str, int]]], name: str = ""):
        gens = [g if isinstance(g, Generator) else Generator(*g) for g in generators]
        names = [g.name for g in gens]
        if len(set(names)) != len(names):
            raise GCAError(f"duplicate generator names in {names}")
        self.name = name
        self.even = tuple(g for g in gens if not g.odd)
        self.odd = tuple(g for g in gens if g.odd)
        self.generators = self.even + self.odd
        self._index = {}
        for i, g in enumerate(self.even):
            self._index[g.name] = (False, i)
        for j, g in enumerate(self.odd):
            self._index[g.name] = (True, j)
        self._even_deg = tuple(g.degree for g in self.even)
        self._odd_deg = tuple(g.degree for g in self.odd)
        self._zero_exps = (0,) * len(self.even)

    def __repr__(self) -> str:
        inner = ", ".join(f"{g.name}:{g.degree}" for g in self.generators)
        return f"Algebra({self.name or '?'}; {inner})"

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def generator(self, name: str) -> Generator:
        odd, i = self._lookup(name)
        return self.odd[i] if odd else self.even[i]

    def _lookup(self, name: str) -> Tuple[bool, int]:
        try:
            return self._index[name]
        except KeyError:
            raise GCAError(f"unknown generator {name!r} in {self!r}") from None

    def gen_monomial(self, name: str) -> Monomial:
        odd, i = self._lookup(name)
        if odd:
            return (self._zero_exps, 1 << i)
        exps = list(self._zero_exps)
        exps[i] = 1
        return (tuple(exps), 0)

    def gen(self, name: str) -> "Element":
        return Element(self, {self.gen_monomial(name): Fraction(1)})

    def gens(self, *names: str) -> Tuple["Element", ...]:
        return tuple(self.gen(n) for n in names)

    def one(self) -> "Element":
        return self.scalar(1)

    def zero(self) -> "Element":
        return Element(self, {})

    def scalar(self, c: Scalar) -> "Element":
        c = Fraction(c)
        return Element(self, {(self._zero_exps, 0): c} if c else {})

    def monomial_degree(self, m: Monomial) -> int:
        exps, mask = m
        deg = sum(e * d for e, d in zip(exps, self._even_deg))
        for j in _bits(mask):
            deg += self._odd_deg[j]
        return deg

    def monomial_element(self, m: Monomial, coeff: Scalar = 1) -> "Element":
        return Element(self, {m: Fraction(coeff)} if coeff else {})

    def mul_monomials(self, a: Monomial, b: Monomial) -> Tuple[int, Monomial]:
        """Return ``(sign, monomial)``; sign 0 means the product vanishes."""
        ea, ma = a
        eb, mb = b
        if ma & mb:
            return 0, a
        sign = 1
        m = mb
        j = 0
        while m:
            if m & 1 and _popcount(ma >> (j + 1)) & 1:
                sign = -sign
            m >>= 1
            j += 1
        if eb is self._zero_exps or not any(eb):
            exps = ea
        elif ea is self._zero_exps or not any(ea):
            exps = eb
        else:
            exps = tuple(x + y for x, y in zip(ea, eb))
        return sign, (exps, ma | mb)

    def format_monomial(self, m: Monomial) -> str:
        exps, mask = m
        parts = []
        for g, e in zip(self.even, exps):
            if e == 1:
                parts.append(g.name)
            elif e > 1:
                parts.append(f"{g.name}^{e}")
        for j in _bits(mask):
            parts.append(self.odd[j].name)
        return "*".join(parts)

    def parse(self, text: str) -> "Element":
        """Parse the canonical text form produced by :meth:`Element.to_text`."""
        return parse_element(self, text)


def _sort_key(alg: Algebra, m: Monomial):
    exps, mask = m
    return (sum(exps) + _popcount(mask), tuple(-e for e in exps), tuple(_bits(mask)))


class Element:
    """Immutable element of a graded-commutative algebra."""

    __slots__ = ("algebra", "terms", "_hash")

    def __init__(self, algebra: Algebra, terms: Mapping[Monomial, Fraction]):
        self.algebra = algebra
        self.terms: Dict[Monomial, Fraction] = {m: c for m, c in terms.items() if c}
        self._hash = None

    # -- construction helpers -------------------------------------------------
    def _coerce(self, other) -> "Element":
        if isinstance(other, Element):
            if other.algebra is not self.algebra:
                raise ContextMismatchError(f"{self.algebra!r} vs {other.algebra!r}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.algebra.scalar(other)
        return NotImplemented

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for m, c in other.terms.items():
            v = terms.get(m, 0) + c
            if v:
                terms[m] = v
            else:
                terms.pop(m, None)
        return Element(self.algebra, terms)

    __radd__ = __add__

    def __neg__(self):
        return Element(self.algebra, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Scalar) -> "Element":
        c = Fraction(c)
        if not c:
            return self.algebra.zero()
        return Element(self.algebra, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        alg = self.algebra
        out: Dict[Monomial, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                s, m = alg.mul_monomials(ma, mb)
                if not s:
                    continue
                v = out.get(m, 0) + (ca * cb if s > 0 else -ca * cb)
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return Element(alg, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, k: int):
        out = self.algebra.one()
        for _ in range(k):
            out = out * self
        return out

    # -- comparison -----------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.algebra.scalar(other)
        if not isinstance(other, Element):
            return NotImplemented
        return self.algebra is other.algebra and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # -- grading --------------------------------------------------------------
    def degrees(self) -> set:
        return {self.algebra.monomial_degree(m) for m in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def degree(self) -> int:
        """Degree of a homogeneous element (0 for the zero element)."""
        degs = self.degrees()
        if len(degs) > 1:
            raise GradingError(f"inhomogeneous element {self}: degrees {sorted(degs)}")
        return degs.pop() if degs else 0

    def parity(self) -> int:
        pars = {d % 2 for d in self.degrees()}
        if len(pars) > 1:
            raise GradingError(f"element of mixed parity: {self}")
        return pars.pop() if pars else 0

    def homogeneous_parts(self) -> Dict[int, "Element"]:
        parts: Dict[int, Dict[Monomial, Fraction]] = {}
        for m, c in self.terms.items():
            parts.setdefault(self.algebra.monomial_degree(m), {})[m] = c
        return {d: Element(self.algebra, t) for d, t in parts.items()}

    def filter(self, pred) -> "Element":
        """Keep the terms whose monomial satisfies ``pred(monomial)``."""
        return Element(self.algebra, {m: c for m, c in self.terms.items() if pred(m)})

    def constant_term(self) -> Fraction:
        return self.terms.get((self.algebra._zero_exps, 0), Fraction(0))

    # -- text form ------------------------------------------------------------
    def sorted_terms(self):
        alg = self.algebra
        return sorted(self.terms.items(), key=lambda mc: _sort_key(alg, mc[0]))

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for m, c in self.sorted_terms():
            mono = self.algebra.format_monomial(m)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if not pieces:
                pieces.append(body if c > 0 else f"-{body}")
            else:
                pieces.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(pieces)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"Element({self.to_text()})"


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_@~][A-Za-z0-9_@~']*)|(?P<op>[-+*^]))")


def parse_element(alg: Algebra, text: str) -> Element:
    """Parse ``c*g1^k1*g2 + ... - ...`` into an element of ``alg``.

    ``^`` followed by an integer is a power; ``^`` between factors is a
    (graded) product, so ``dx1^dx2`` is accepted as well.
    """
    pos = 0
    tokens = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise GCAError(f"cannot parse {text!r} at column {pos + 1}")
        pos = m.end()
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
    total = alg.zero()
    i = 0
    sign = 1
    expect_term = True
    while i < len(tokens):
        kind, val = tokens[i]
        if expect_term and kind == "op" and val in "+-":
            sign = -sign if val == "-" else sign
            i += 1
            continue
        term = alg.scalar(sign)
        while True:
            kind, val = tokens[i]
            if kind == "num":
                term = term.scale(Fraction(val))
            elif kind == "name":
                term = term * alg.gen(val)
            else:
                raise GCAError(f"unexpected {val!r} in {text!r}")
            i += 1
            if i < len(tokens) and tokens[i] == ("op", "^") and i + 1 < len(tokens) and tokens[i + 1][0] == "num":
                k = int(tokens[i + 1][1])
                last = alg.gen(val) if kind == "name" else None
                if last is None:
                    raise GCAError(f"power of a number in {text!r}")
                term = term * last ** (k - 1)
                i += 2
            if i < len(tokens) and tokens[i][0] == "op" and tokens[i][1] in "*^":
                i += 1
                continue
            break
        total = total + term
        sign = 1
        if i < len(tokens):
            kind, val = tokens[i]
            if kind != "op" or val not in "+-":
                raise GCAError(f"expected + or - in {text!r}")
    return total


# ---------------------------------------------------------------------------
# derivations
# ---------------------------------------------------------------------------


class Derivation:
    """Graded derivation given by its values on generators.

    ``D(ab) = D(a) b + (-1)^{|D||a|} a D(b)``.  Generators missing from
    ``images`` raise :class:`IncompleteDerivationError` when hit, unless
    ``default_zero`` is set.
    """

    def __init__(self, algebra: Algebra, degree: int, images: Mapping[str, Element], default_zero: bool = False):
        self.algebra = algebra
        self.degree = degree
        self.default_zero = default_zero
        self._even: Dict[int, Element] = {}
        self._odd: Dict[int, Element] = {}
        for name, img in images.items():
            odd, i = algebra._lookup(name)
            if not isinstance(img, Element):
                img = algebra.scalar(img)
            if img.algebra is not algebra:
                raise ContextMismatchError(f"image of {name} lives in {img.algebra!r}")
            if img:
                want = algebra.generator(name).degree + degree
                if img.degrees() != {want}:
                    raise GradingError(f"D({name}) = {img} should have degree {want}")
            (self._odd if odd else self._even)[i] = img

    def image(self, name: str) -> Element:
        odd, i = self.algebra._lookup(name)
        table = self._odd if odd else self._even
        if i in table:
            return table[i]
        if self.default_zero:
            return self.algebra.zero()
        raise IncompleteDerivationError(f"derivation has no image for generator {name!r}")

    def _img(self, odd: bool, i: int) -> Element:
        table = self._odd if odd else self._even
        if i in table:
            return table[i]
        if self.default_zero:
            return self.algebra.zero()
        g = (self.algebra.odd if odd else self.algebra.even)[i]
        raise IncompleteDerivationError(f"derivation has no image for generator {g.name!r}")

    def __call__(self, a: Element) -> Element:
        return apply_derivation(self, a)

    def acts_on_even(self) -> bool:
        return any(v for v in self._even.values())

    def __add__(self, other: "Derivation") -> "Derivation":
        if other.algebra is not self.algebra or other.degree != self.degree:
            raise GCAError("can only add derivations of one algebra and degree")
        names = {g.name for g in self.algebra.generators}
        imgs = {}
        for n in names:
            imgs[n] = self.image(n) if self._has(n) else self.algebra.zero()
            if other._has(n):
                imgs[n] = imgs[n] + other.image(n)
        return Derivation(self.algebra, self.degree, imgs, default_zero=self.default_zero and other.default_zero)

    def _has(self, name: str) -> bool:
        odd, i = self.algebra._lookup(name)
        return i in (self._odd if odd else self._even) or self.default_zero

    def scale(self, c: Scalar) -> "Derivation":
        imgs = {}
        for i, v in self._even.items():
            imgs[self.algebra.even[i].name] = v.scale(c)
        for i, v in self._odd.items():
            imgs[self.algebra.odd[i].name] = v.scale(c)
        return Derivation(self.algebra, self.degree, imgs, default_zero=self.default_zero)


def apply_derivation(D: Derivation, a: Element) -> Element:
    alg = D.algebra
    if a.algebra is not alg:
        raise ContextMismatchError(f"{alg!r} vs {a.algebra!r}")
    out = alg.zero()
    odd_degree = D.degree % 2 == 1
    for (exps, mask), c in a.terms.items():
        for i, e in enumerate(exps):
            if not e:
                continue
            img = D._img(False, i)
            if not img:
                continue
            rest = list(exps)
            rest[i] -= 1
            out = out + (img * alg.monomial_element((tuple(rest), mask), c * e))
        pos = 0
        for j in _bits(mask):
            img = D._img(True, j)
            if img:
                low = mask & ((1 << j) - 1)
                high = mask & ~((1 << (j + 1)) - 1)
                sign = -1 if odd_degree and pos % 2 else 1
                prefix = alg.monomial_element((exps, low), c * sign)
                suffix = alg.monomial_element((alg._zero_exps, high))
                out = out + prefix * img * suffix
            pos += 1
    return out


def left_derivative(a: Element, name: str) -> Element:
    """Left partial derivative with respect to a generator."""
    alg = a.algebra
    odd, i = alg._lookup(name)
    out: Dict[Monomial, Fraction] = {}
    for (exps, mask), c in a.terms.items():
        if odd:
            if not (mask >> i) & 1:
                continue
            sign = -1 if _popcount(mask & ((1 << i) - 1)) % 2 else 1
            m = (exps, mask & ~(1 << i))
            out[m] = out.get(m, 0) + sign * c
        else:
            e = exps[i]
            if not e:
                continue
            rest = list(exps)
            rest[i] -= 1
            m = (tuple(rest), mask)
            out[m] = out.get(m, 0) + e * c
    return Element(alg, out)


def right_derivative(a: Element, name: str) -> Element:
    """Right partial derivative: ``a = (a d<-/dg) * g + (terms without g)``."""
    alg = a.algebra
    odd, i = alg._lookup(name)
    if not odd:
        return left_derivative(a, name)
    out: Dict[Monomial, Fraction] = {}
    for (exps, mask), c in a.terms.items():
        if not (mask >> i) & 1:
            continue
        sign = -1 if _popcount(mask >> (i + 1)) % 2 else 1
        m = (exps, mask & ~(1 << i))
        out[m] = out.get(m, 0) + sign * c
    return Element(alg, out)


def occurring_generators(a: Element) -> set:
    alg = a.algebra
    names = set()
    for exps, mask in a.terms:
        for i, e in enumerate(exps):
            if e:
                names.add(alg.even[i].name)
        for j in _bits(mask):
            names.add(alg.odd[j].name)
    return names


def substitute(a: Element, images: Mapping[str, Element], target: Algebra = None) -> Element:
    """Algebra morphism sending each generator to ``images[name]`` (identity if absent).

    With ``target`` given, every generator occurring in ``a`` must be mapped.
    Images of odd generators must be odd for the result to be well defined.
    """
    tgt = target or a.algebra
    alg = a.algebra
    out = tgt.zero()
    for (exps, mask), c in a.terms.items():
        term = tgt.scalar(c)
        for i, e in enumerate(exps):
            if e:
                name = alg.even[i].name
                img = images[name] if name in images else tgt.gen(name)
                term = term * img ** e
        for j in _bits(mask):
            name = alg.odd[j].name
            img = images[name] if name in images else tgt.gen(name)
            term = term * img
        out = out + term
    return out


# ---------------------------------------------------------------------------
# brackets
# ---------------------------------------------------------------------------


class BracketStructure:
    """Bilinear bracket of degree ``n`` extended from a generator table.

    The table maps ordered pairs of generator names to elements; unlisted
    pairs are zero.  With ``symmetry="graded-skew"`` the table is completed
    by ``{b,a} = -(-1)^{(|a|+n)(|b|+n)} {a,b}`` and conflicting entries are
    rejected.  ``check_degrees=False`` accepts entries of the wrong degree,
    which is only useful for building deliberately broken brackets.
    """

    def __init__(self, algebra: Algebra, degree: int, table: Mapping[Tuple[str, str], Element],
                 symmetry: str = "graded-skew", check_degrees: bool = True):
        if symmetry not in ("graded-skew", "none"):
            raise GCAError(f"unknown symmetry {symmetry!r}")
        self.algebra = algebra
        self.degree = degree
        self.symmetry = symmetry
        full: Dict[Tuple[str, str], Element] = {}
        for (a, b), v in table.items():
            if not isinstance(v, Element):
                v = algebra.scalar(v)
            ga, gb = algebra.generator(a), algebra.generator(b)
            if v and check_degrees:
                want = ga.degree + gb.degree + degree
                if v.degrees() != {want}:
                    raise GradingError(f"{{{a},{b}}} = {v} should have degree {want}")
            full[(a, b)] = v
        if symmetry == "graded-skew":
            for (a, b), v in list(full.items()):
                ga, gb = algebra.generator(a), algebra.generator(b)
                sign = -1 if ((ga.degree + degree) * (gb.degree + degree)) % 2 == 0 else 1
                mirrored = v.scale(sign)
                if (b, a) in full and full[(b, a)] != mirrored:
                    raise GCAError(f"table entries for ({a},{b}) and ({b},{a}) are not graded-skew")
                full[(b, a)] = mirrored
        self.table = {k: v for k, v in full.items() if v}
        self._by_left: Dict[str, list] = {}
        for (a, b), v in self.table.items():
            self._by_left.setdefault(a, []).append((b, v))

    def __call__(self, a: Element, b: Element) -> Element:
        return bracket_eval(self, a, b)


def bracket_eval(B: BracketStructure, a: Element, b: Element) -> Element:
    """Biderivation extension: ``{a,b} = sum (a d<-/dg_i) {g_i,g_j} (d->/dg_j b)``."""
    alg = B.algebra
    if a.algebra is not alg or b.algebra is not alg:
        raise ContextMismatchError("bracket arguments live in a different algebra")
    out = alg.zero()
    if not a or not b:
        return out
    gens_b = occurring_generators(b)
    left_cache: Dict[str, Element] = {}
    for gi in occurring_generators(a):
        row = B._by_left.get(gi)
        if not row:
            continue
        ri = None
        for gj, v in row:
            if gj not in gens_b:
                continue
            if ri is None:
                ri = right_derivative(a, gi)
            lj = left_cache.get(gj)
            if lj is None:
                lj = left_cache[gj] = left_derivative(b, gj)
            out = out + ri * v * lj
    return out


@dataclass
class CheckReport:
    """Outcome of an identity checked over a sample.

    ``witness`` holds the first failing input together with its residual.
    """

    name: str
    count: int = 0
    witness: tuple = None
    residuals: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.witness is None

    def __bool__(self):
        return self.passed

    def record(self, inputs, residual, is_zero=None):
        self.count += 1
        self.residuals.append(residual)
        zero = is_zero(residual) if is_zero else not residual
        if not zero and self.witness is None:
            self.witness = (inputs, residual)
        return zero


def jacobi_residual(bracket, n: int, a, b, c, deg=None):
    """``[a,[b,c]] - [[a,b],c] - (-1)^{(n+|a|)(n+|b|)} [b,[a,c]]``."""
    deg = deg or (lambda x: x.degree())
    da, db = deg(a), deg(b)
    sign = -1 if ((n + da) * (n + db)) % 2 else 1
    return bracket(a, bracket(b, c)) - bracket(bracket(a, b), c) - bracket(b, bracket(a, c)) * sign


def check_graded_jacobi(B: BracketStructure, sample: Sequence[Tuple[Element, Element, Element]]) -> CheckReport:
    report = CheckReport("graded Jacobi")
    for a, b, c in sample:
        for x in (a, b, c):
            if not x.is_homogeneous():
                raise GradingError(f"sample element {x} is not homogeneous")
        report.record((a, b, c), jacobi_residual(B, B.degree, a, b, c))
    return report
