"""Script interpreter and command-line front end.

A script is a sequence of lines; ``#`` starts a comment.  Statements::

    seed 7
    expect pass|fail
    manifold M dim=3
    liealgebra g dim=3 C[1,2,3]=1 [basis=h,e,f]
    liealgebra g heisenberg | sl2 | abelian dim=N
    algebroid A base=2 tangent
    algebroid A base=2 cotangent x1*@1^@2
    algebroid A base=1 rank=2 anchor=1;x1 C[1,2,1]=1
    bivector P = @1^@2            (also: form, multivector, element)
    background psi                (declares the closed form psi as the background)
    bracket <kind> <a> <b> [using <name>]
    check <suite> [args...] [key=value...]
    print <expr>

Bracket kinds on a manifold: lie, schouten, fn, nr (highest type of the
operator commutator), big, dorfman, courant, background, and with
``using P``: koszul, poisson, twisted (the Koszul bracket corrected by the
background).  On a Lie algebra: mu (= lie), big.  On an algebroid:
algebroid, big, poisson; the frame sections are ``e1..er`` on input and
print as ``ht1..htr``.

The first of ``manifold``, ``liealgebra`` or ``algebroid`` fixes the
generator context of the script.  Expressions use ``+ - * ^`` (``^`` is the
product), rationals ``p/q``, parentheses and declared names.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import multiprocessing
import random
import re
import sys
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import algebroid as alg_mod
from . import background as bg
from . import bigbracket as bb
from .cartan import brackets as cb
from .cartan.manifold import ManifoldContext
from .brackets import check_loday
from .cartan.operators import op_is_zero
from .gca import Algebra, Element, GCAError, substitute

DEFAULT_SEED = 20240601
DEFAULT_DEGREE_CAP = 12


class ScriptError(Exception):
    def __init__(self, message: str, line: int, col: int = 1):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line, self.col = line, col


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


@dataclass
class Statement:
    keyword: str
    words: List[Tuple[str, int]]  # (text, column)
    line: int
    text: str


@dataclass
class Script:
    statements: List[Statement]


_WORD = re.compile(r"\S+")
_KEYWORDS = {"seed", "expect", "manifold", "liealgebra", "algebroid", "bivector", "form", "multivector",
             "element", "background", "bracket", "check", "print"}
_DECL_VALUES = {"bivector", "form", "multivector", "element"}
BRACKET_KINDS = {"lie", "schouten", "fn", "nr", "big", "dorfman", "courant", "koszul", "twisted", "background", "mu",
                 "algebroid", "poisson"}
CHECK_SUITES = {"cartan", "schouten", "fn", "wzw", "triangle", "poisson", "closed", "gcybe", "liealgebra",
                "algebroid", "supermanifold", "dorfman"}


def parse_script(text: str) -> Script:
    """Split into statements and check keywords, arities and declaration shapes."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        words = [(m.group(), m.start() + 1) for m in _WORD.finditer(body)]
        kw, col = words[0]
        if kw not in _KEYWORDS:
            raise ScriptError(f"unknown statement {kw!r}", lineno, col)
        st = Statement(kw, words[1:], lineno, body.strip())
        _check_shape(st, body)
        out.append(st)
    return Script(out)


def _end_col(st: Statement, body: str) -> int:
    return len(body) + 1


def _check_shape(st: Statement, body: str):
    w = [t for t, _ in st.words]
    end = _end_col(st, body)
    if st.keyword in ("seed", "expect"):
        if len(w) != 1:
            raise ScriptError(f"{st.keyword} takes one argument", st.line, end)
        if st.keyword == "seed" and not w[0].isdigit():
            raise ScriptError("seed must be a non-negative integer", st.line, st.words[0][1])
        if st.keyword == "expect" and w[0] not in ("pass", "fail"):
            raise ScriptError("expect takes 'pass' or 'fail'", st.line, st.words[0][1])
    elif st.keyword in _DECL_VALUES:
        if len(w) < 3 or w[1] != "=":
            raise ScriptError(f"expected '{st.keyword} NAME = EXPR'", st.line, end if len(w) < 3 else st.words[1][1])
        _check_name(st, 0)
    elif st.keyword in ("manifold", "liealgebra", "algebroid"):
        if len(w) < 2:
            raise ScriptError(f"{st.keyword} needs a name and parameters", st.line, end)
        _check_name(st, 0)
    elif st.keyword == "background":
        if len(w) != 1:
            raise ScriptError("background takes one declared form", st.line, end)
    elif st.keyword == "bracket":
        if not w:
            raise ScriptError("bracket needs a kind", st.line, end)
        if w[0] not in BRACKET_KINDS:
            raise ScriptError(f"unknown bracket kind {w[0]!r}", st.line, st.words[0][1])
        args = w[1:]
        if "using" in args:
            k = args.index("using")
            if k != len(args) - 2:
                raise ScriptError("'using' takes exactly one name", st.line, st.words[1 + k][1])
            args = args[:k]
        if len(args) != 2:
            raise ScriptError(f"bracket {w[0]} takes 2 arguments, got {len(args)}", st.line, end)
    elif st.keyword == "check":
        if not w:
            raise ScriptError("check needs a suite", st.line, end)
        if w[0] not in CHECK_SUITES:
            raise ScriptError(f"unknown check suite {w[0]!r}", st.line, st.words[0][1])
        arity = {"wzw": 2, "triangle": 2, "poisson": 1, "closed": 1, "gcybe": 1, "algebroid": 0, "cartan": 0,
                 "liealgebra": 0, "supermanifold": 0}
        positional = [t for t in w[1:] if "=" not in t]
        want = arity.get(w[0])
        if w[0] in ("schouten", "fn") and positional:
            want = 2
        if want is not None and len(positional) != want:
            raise ScriptError(f"check {w[0]} takes {want} arguments, got {len(positional)}", st.line, end)
    elif st.keyword == "print":
        if not w:
            raise ScriptError("print needs an expression", st.line, end)


def _check_name(st: Statement, idx: int):
    name, col = st.words[idx]
    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
        raise ScriptError(f"invalid name {name!r}", st.line, col)


# -- expressions --------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_@][A-Za-z0-9_@]*)|(?P<op>[-+*^()]))")


class ExprParser:
    """Recursive descent over ``+ - * ^ ( )`` with names resolved by ``lookup``."""

    def __init__(self, text: str, line: int, col: int, algebra: Algebra, lookup: Callable[[str], Optional[Element]]):
        self.text, self.line, self.col0 = text, line, col
        self.algebra, self.lookup = algebra, lookup
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ScriptError(f"unexpected character {text[pos:].strip()[0]!r}", line, col + pos)
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind), col + m.start(kind)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, self.col0 + len(self.text))

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> Element:
        e = self.sum()
        kind, val, col = self.peek()
        if kind is not None:
            raise ScriptError(f"unexpected {val!r}", self.line, col)
        return e

    def sum(self) -> Element:
        sign = 1
        if self.peek()[1] in ("+", "-"):
            sign = -1 if self.take()[1] == "-" else 1
        out = self.product().scale(sign)
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            term = self.product()
            out = out + term if op == "+" else out - term
        return out

    def product(self) -> Element:
        out = self.atom()
        while self.peek()[1] in ("*", "^"):
            self.take()
            out = out * self.atom()
        return out

    def atom(self) -> Element:
        kind, val, col = self.take()
        if kind == "num":
            return self.algebra.scalar(Fraction(val))
        if kind == "name":
            v = self.lookup(val)
            if v is None:
                raise ScriptError(f"unknown symbol {val!r}", self.line, col)
            return v
        if val == "(":
            e = self.sum()
            k2, v2, c2 = self.take()
            if v2 != ")":
                raise ScriptError("expected ')'", self.line, c2)
            return e
        if val == "-":
            return -self.atom()
        raise ScriptError(f"unexpected {val!r}" if val else "unexpected end of expression", self.line, col)


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


@dataclass
class Record:
    kind: str
    name: str
    status: str
    payload: str

    def line(self) -> str:
        clean = self.payload.replace("\n", " ").replace("|", "/")
        return f"{self.kind}|{self.name}|{self.status}|{clean}"


@dataclass
class Report:
    records: List[Record] = field(default_factory=list)
    expect: Optional[str] = None

    @property
    def ok(self) -> bool:
        return all(r.status not in ("FAIL", "ERROR") for r in self.records)

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def structured(self) -> str:
        return "".join(r.line() + "\n" for r in self.records)

    def text(self) -> str:
        lines = []
        for r in self.records:
            if r.kind == "decl":
                lines.append(f"declared {r.name}: {r.payload}")
            else:
                lines.append(f"[{r.status}] {r.kind} {r.name}: {r.payload}")
        lines.append("all checks passed" if self.ok else "FAILURES present")
        return "\n".join(lines) + "\n"


class DegreeCapError(GCAError):
    pass


def _poly_degree(e: Element) -> int:
    return max((sum(exps) for exps, _ in e.terms), default=0)


class Interpreter:
    def __init__(self, seed: int = DEFAULT_SEED, degree_cap: int = DEFAULT_DEGREE_CAP, seed_override: bool = False):
        self.seed = seed
        self.seed_override = seed_override
        self.degree_cap = degree_cap
        self.context = None  # "manifold" | "liealgebra" | "algebroid"
        self.man: Optional[ManifoldContext] = None
        self.lie: Optional[bb.LieStructure] = None
        self.algebroid: Optional[alg_mod.Algebroid] = None
        self.algebra: Optional[Algebra] = None
        self.names: Dict[str, Element] = {}
        self.aliases: Dict[str, Element] = {}
        self.background: Optional[Element] = None
        self.expect: Optional[str] = None

    # -- helpers ---------------------------------------------------------------
    def rng(self, st: Statement) -> random.Random:
        return random.Random(self.seed * 1000003 + st.line)

    def cap(self, e: Element, st: Statement) -> Element:
        if _poly_degree(e) > self.degree_cap:
            raise DegreeCapError(f"polynomial degree {_poly_degree(e)} exceeds the cap {self.degree_cap}")
        return e

    def lookup(self, name: str) -> Optional[Element]:
        if name in self.names:
            return self.names[name]
        if name in self.aliases:
            return self.aliases[name]
        if self.algebra is not None and name in self.algebra:
            return self.algebra.gen(name)
        return None

    def expr(self, st: Statement, start: int, stop: Optional[int] = None) -> Element:
        if self.algebra is None:
            raise ScriptError("no context declared (manifold, liealgebra or algebroid)", st.line, 1)
        words = st.words[start:stop]
        if not words:
            raise ScriptError("missing expression", st.line, len(st.text) + 1)
        col = words[0][1]
        text = " ".join(w for w, _ in words)
        return self.cap(ExprParser(text, st.line, col, self.algebra, self.lookup).parse(), st)

    def value(self, st: Statement, word_index: int) -> Element:
        text, col = st.words[word_index]
        if self.algebra is None:
            raise ScriptError("no context declared", st.line, col)
        return self.cap(ExprParser(text, st.line, col, self.algebra, self.lookup).parse(), st)

    def need(self, kind: str, st: Statement):
        if self.context != kind:
            raise ScriptError(f"this statement needs a {kind} context", st.line, 1)

    # -- statements --------------------------------------------------------------
    def declare_context(self, st: Statement) -> Record:
        if self.context is not None:
            raise ScriptError("one context per script", st.line, 1)
        name = st.words[0][0]
        opts, flags = _options(st.words[1:])
        if st.keyword == "manifold":
            dim = _int_opt(opts, "dim", st)
            self.man = ManifoldContext(dim)
            self.algebra = self.man.algebra
            self.context = "manifold"
            return Record("decl", name, "OK", f"manifold dim={dim}")
        if st.keyword == "liealgebra":
            dim = _int_opt(opts, "dim", st)
            if "heisenberg" in flags:
                L = bb.heisenberg()
            elif "sl2" in flags:
                L = bb.sl2()
            elif "abelian" in flags:
                L = bb.abelian(dim)
            else:
                L = bb.LieStructure(dim, {k: Fraction(v) for k, v in _structure(opts, st).items()})
            if L.dim != dim:
                raise ScriptError(f"dim={dim} does not match the named algebra", st.line, 1)
            self.lie = L
            self.algebra = L.algebra
            self.context = "liealgebra"
            if "basis" in opts:
                basis = opts["basis"].split(",")
                if len(basis) != dim:
                    raise ScriptError("basis needs one name per dimension", st.line, 1)
                self.aliases = {b: L.e(i + 1) for i, b in enumerate(basis)}
            return Record("decl", name, "OK", f"mu = {L.mu.to_text()}")
        # algebroid
        base = _int_opt(opts, "base", st)
        if "tangent" in flags:
            A = alg_mod.tangent_algebroid(base) if base else None
            if A is None:
                raise ScriptError("tangent algebroid needs base >= 1", st.line, 1)
        elif "cotangent" in flags:
            k = [w for w, _ in st.words].index("cotangent")
            man = ManifoldContext(base)
            text, col = st.words[k + 1] if k + 1 < len(st.words) else ("", len(st.text) + 1)
            P = ExprParser(text, st.line, col, man.algebra, lambda n: man.algebra.gen(n) if n in man.algebra else None).parse()
            A = alg_mod.cotangent_algebroid(man, P)
        else:
            rank = _int_opt(opts, "rank", st)
            ctx = alg_mod.AlgebroidContext(base, rank)
            anchor = [[ctx.algebra.zero()] * base for _ in range(rank)]
            if "anchor" in opts:
                rows = opts["anchor"].split(";")
                if len(rows) != rank or any(len(r.split(",")) != base for r in rows):
                    raise ScriptError(f"anchor needs {rank} rows of {base} entries", st.line, 1)
                anchor = [[ctx.parse(v) for v in r.split(",")] for r in rows]
            C = {k: ctx.parse(v) for k, v in _structure(opts, st).items()}
            A = alg_mod.build_algebroid(ctx, anchor, C)
        self.algebroid = A
        self.algebra = A.ctx.algebra
        self.context = "algebroid"
        self.aliases = {f"e{i + 1}": A.ctx.g(h) for i, h in enumerate(A.ctx.ht)}
        return Record("decl", name, "OK", f"H = {A.H.to_text()}")

    def declare_value(self, st: Statement) -> Record:
        name = st.words[0][0]
        e = self.expr(st, 2)
        if self.context == "manifold":
            man = self.man
            bideg = man.bidegrees(e)
            if st.keyword == "bivector" and not bideg <= {(0, 2)}:
                raise ScriptError(f"{name} is not a bivector", st.line, st.words[2][1])
            if st.keyword == "form" and any(p for _, p in bideg):
                raise ScriptError(f"{name} is not a form", st.line, st.words[2][1])
            if st.keyword == "multivector" and any(q for q, _ in bideg):
                raise ScriptError(f"{name} is not a multivector", st.line, st.words[2][1])
        self.names[name] = e
        return Record("decl", name, "OK", e.to_text())

    def run_statement(self, st: Statement):
        """Returns a Record, or a thunk producing one for deferred checks."""
        kw = st.keyword
        if kw == "seed":
            if not self.seed_override:
                self.seed = int(st.words[0][0])
            return None
        if kw == "expect":
            self.expect = st.words[0][0]
            return None
        if kw in ("manifold", "liealgebra", "algebroid"):
            return self.declare_context(st)
        if kw in _DECL_VALUES:
            return self.declare_value(st)
        if kw == "background":
            self.need("manifold", st)
            name, col = st.words[0]
            if name not in self.names:
                raise ScriptError(f"undeclared form {name!r}", st.line, col)
            bg.BackgroundContext(self.man, self.names[name])
            self.background = self.names[name]
            return Record("decl", "background", "OK", self.background.to_text())
        if kw == "print":
            e = self.expr(st, 0)
            return Record("print", st.text[len("print"):].strip(), "OK", e.to_text())
        if kw == "bracket":
            return self.bracket(st)
        if kw == "check":
            return self.check(st)
        raise ScriptError(f"unhandled statement {kw}", st.line, 1)

    # -- brackets ------------------------------------------------------------------
    def bracket(self, st: Statement) -> Record:
        kind = st.words[0][0]
        words = [w for w, _ in st.words]
        using = None
        if "using" in words:
            using = self.value(st, words.index("using") + 1)
        a, b = self.value(st, 1), self.value(st, 2)
        label = f"{kind}({st.words[1][0]},{st.words[2][0]})"
        if self.context == "manifold":
            res = self._manifold_bracket(kind, a, b, using, st)
        elif self.context == "liealgebra":
            L = self.lie
            fns = {"big": L.big, "mu": lambda x, y: bb.algebraic_schouten(L, x, y),
                   "lie": lambda x, y: bb.algebraic_schouten(L, x, y)}
            if kind not in fns:
                raise ScriptError(f"bracket {kind} is not available for a Lie algebra", st.line, st.words[0][1])
            res = fns[kind](a, b)
        elif self.context == "algebroid":
            A = self.algebroid
            fns = {"algebroid": A.bracket, "big": A.ctx.big, "poisson": A.poisson}
            if kind not in fns:
                raise ScriptError(f"bracket {kind} is not available for an algebroid", st.line, st.words[0][1])
            res = fns[kind](a, b)
        else:
            raise ScriptError("no context declared", st.line, 1)
        return Record("bracket", label, "OK", self.cap(res, st).to_text())

    def _manifold_bracket(self, kind, a, b, using, st) -> Element:
        man = self.man
        if kind == "lie":
            return cb.lie_bracket(man, a, b)
        if kind == "schouten":
            return cb.schouten(man, a, b)
        if kind == "fn":
            return cb.frolicher_nijenhuis(man, a, b)
        if kind == "nr":
            return cb.highest_type_term(man, a, b)
        if kind == "big":
            return cb.pointwise_big_bracket(man, a, b)
        if kind in ("dorfman", "courant", "background"):
            x, xi = man.bidegree_part(a, 0, 1), man.bidegree_part(a, q=1, p=0)
            y, eta = man.bidegree_part(b, 0, 1), man.bidegree_part(b, q=1, p=0)
            if x + xi != a or y + eta != b:
                raise ScriptError(f"{kind} needs vector field + 1-form arguments", st.line, st.words[1][1])
            if kind == "dorfman":
                v, f = cb.dorfman(man, x, xi, y, eta)
            elif kind == "courant":
                v, f = cb.courant(man, x, xi, y, eta)
            else:
                psi = using if using is not None else self.background
                if psi is None:
                    raise ScriptError("background bracket needs a background form", st.line, 1)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    v, f = bg.background_dorfman(man, psi, x, xi, y, eta)
            return v + f
        if kind in ("koszul", "poisson", "twisted"):
            if using is None:
                raise ScriptError(f"bracket {kind} needs 'using P'", st.line, 1)
            if kind == "poisson":
                return alg_mod.poisson_bracket(man, using, a, b)
            if kind == "twisted":
                if self.background is None:
                    raise ScriptError("twisted bracket needs a background form", st.line, 1)
                return bg.background_form_bracket(man, using, self.background, a, b)
            return alg_mod.koszul_bracket(man, using, a, b)
        raise ScriptError(f"bracket {kind} is not available on a manifold", st.line, st.words[0][1])

    # -- checks ----------------------------------------------------------------------
    def check(self, st: Statement):
        suite = st.words[0][0]
        positional = [i for i, (w, _) in enumerate(st.words) if i > 0 and "=" not in w]
        opts, _ = _options([w for i, w in enumerate(st.words) if i > 0 and "=" in w[0]])
        args = [self.value(st, i) for i in positional]
        label = " ".join([suite] + [st.words[i][0] for i in positional])
        samples = int(opts.get("samples", 5))
        degree = int(opts.get("degree", 2))
        if degree > self.degree_cap:
            raise DegreeCapError(f"degree={degree} exceeds the cap {self.degree_cap}")
        seed = self.seed * 1000003 + st.line
        fn = _suite(self, suite, args, samples, degree, seed, st)
        return label, fn


def _options(words):
    opts, flags = {}, []
    for w, _ in words:
        if "=" in w:
            k, v = w.split("=", 1)
            opts[k] = v
        else:
            flags.append(w)
    return opts, flags


def _int_opt(opts, key, st) -> int:
    if key not in opts:
        raise ScriptError(f"missing {key}=N", st.line, len(st.text) + 1)
    try:
        return int(opts[key])
    except ValueError:
        raise ScriptError(f"{key} must be an integer", st.line, 1) from None


def _structure(opts, st) -> Dict[Tuple[int, int, int], str]:
    out = {}
    for k, v in opts.items():
        m = re.fullmatch(r"C\[(\d+),(\d+),(\d+)\]", k)
        if m:
            out[tuple(int(g) for g in m.groups())] = v
    return out


# -- suites ---------------------------------------------------------------------------


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def _suite(it: Interpreter, suite: str, args, samples: int, degree: int, seed: int, st: Statement):
    """Validate the context now and return a closure computing ``(status, payload)``."""
    ctx_needed = {"cartan": "manifold", "schouten": "manifold", "fn": "manifold", "wzw": "manifold",
                  "triangle": "manifold", "poisson": "manifold", "closed": "manifold", "dorfman": "manifold",
                  "supermanifold": "manifold", "gcybe": "liealgebra", "liealgebra": "liealgebra",
                  "algebroid": "algebroid"}[suite]
    it.need(ctx_needed, st)
    man, L, A = it.man, it.lie, it.algebroid

    if suite == "cartan":
        def run():
            rng = random.Random(seed)
            bad = []
            for k in range(samples):
                x, y = man.random_tensor(rng, 0, 1, degree, 2), man.random_tensor(rng, 0, 1, degree, 2)
                res = cb.check_cartan_identities(man, x, y)
                bad += [f"{name} fails for x={x.to_text()}, y={y.to_text()}" for name, ok in res.items() if not ok]
            return _verdict(not bad), bad[0] if bad else f"5 identities on {samples} pairs"
        return run
    if suite == "schouten":
        def run():
            pairs = [tuple(args)] if args else []
            rng = random.Random(seed)
            while len(pairs) < (1 if args else samples):
                top = min(3, man.dim)
                pairs.append((man.random_tensor(rng, 0, rng.randint(0, top), degree, 2),
                              man.random_tensor(rng, 0, rng.randint(0, top), degree, 2)))
            for u, v in pairs:
                w = cb.schouten_via_pit(man, u, v)
                if cb.schouten(man, u, v, cross_check=False) != w:
                    return "FAIL", f"models disagree on {u.to_text()}, {v.to_text()}"
            return "PASS", w.to_text() if args else f"{len(pairs)} pairs agree"
        return run
    if suite == "fn":
        def run():
            rng = random.Random(seed)
            pairs = [tuple(args)] if args else [
                (man.random_decomposable(rng, rng.randint(0, 2), 1), man.random_decomposable(rng, rng.randint(0, 2), 1))
                for _ in range(samples)]
            for X, Y in pairs:
                if not op_is_zero(cb.fn_residual(man, X, Y)):
                    return "FAIL", f"residual nonzero for {X.to_text()}, {Y.to_text()}"
            return "PASS", (cb.frolicher_nijenhuis(man, *pairs[0]).to_text() if args else f"{len(pairs)} pairs")
        return run
    if suite == "wzw":
        P, psi = args

        def run():
            r = bg.wzw_condition(man, P, psi)
            return _verdict(r.verdict), f"lhs={r.lhs.to_text()}; rhs={r.rhs.to_text()}"
        return run
    if suite == "triangle":
        P, psi = args

        def run():
            t = bg.equivalence_triangle(man, P, psi, samples, seed)
            v = ",".join("1" if b else "0" for b in t.verdicts)
            status = "PASS" if all(t.verdicts) else "FAIL"
            note = "consistent" if t.consistent else "INCONSISTENT"
            return status if t.consistent else "ERROR", f"wzw,square,anchor={v} {note}; residual={t.wzw.residual.to_text()}"
        return run
    if suite == "poisson":
        (P,) = args

        def run():
            PP = cb.schouten(man, P, P)
            return _verdict(not PP), f"[P,P]={PP.to_text()}"
        return run
    if suite == "closed":
        (psi,) = args

        def run():
            d = man.d(psi)
            return _verdict(not d), f"d={d.to_text()}"
        return run
    if suite == "dorfman":
        psi = args[0] if args else (it.background if it.background is not None else man.algebra.zero())

        def run():
            rng = random.Random(seed)
            for _ in range(samples):
                x, y = man.random_tensor(rng, 0, 1, degree, 2), man.random_tensor(rng, 0, 1, degree, 2)
                xi, eta = man.random_tensor(rng, 1, 0, degree, 2), man.random_tensor(rng, 1, 0, degree, 2)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    diff = bg.background_operator_check(man, psi, x, xi, y, eta)
                if diff is not None:
                    return "FAIL", f"operator identity fails on test form {diff[0].to_text()}"
            return "PASS", f"{samples} operator identities"
        return run
    if suite == "supermanifold":
        def run():
            salg, B, S, to_m, from_m, sctx = cb.schouten_via_hamiltonian(man.dim)
            rng = random.Random(seed)
            for _ in range(samples):
                u = man.random_tensor(rng, 0, rng.randint(0, 2), degree, 2)
                v = man.random_tensor(rng, 0, rng.randint(0, 2), degree, 2)
                u2, v2 = substitute(u, {}, target=sctx.algebra), substitute(v, {}, target=sctx.algebra)
                lhs = to_m(cb.schouten(sctx, u2, v2, cross_check=False))
                if lhs != B(B(to_m(u2), S), to_m(v2)):
                    return "FAIL", f"{u.to_text()}, {v.to_text()}"
            return "PASS", f"S={S.to_text()}; {samples} pairs"
        return run
    if suite == "gcybe":
        (r,) = args

        def run():
            rep = bb.gcybe_check(L, r)
            ok = rep.invariant and rep.chain_holds
            return _verdict(ok), (f"[r,r]={rep.schouten_square.to_text()}; invariant={rep.invariant}; "
                                  f"chain={rep.chain_holds}")
        return run
    if suite == "liealgebra":
        def run():
            rng = random.Random(seed)
            gens = [L.e(i) for i in range(1, L.dim + 1)] + [L.eps(i) for i in range(1, L.dim + 1)]
            triples = [tuple(_random_word(L.algebra, gens, rng) for _ in range(3)) for _ in range(samples)]
            rep = check_loday(L.context, triples)
            return _verdict(not L.square and rep.passed), f"{{mu,mu}}={L.square.to_text()}; {rep.count} triples"
        return run
    if suite == "algebroid":
        def run():
            reps = alg_mod.verify_derived_identities(A, samples=samples, seed=seed)
            eq = alg_mod.three_way_equivalence(A)
            failed = [k for k, r in reps.items() if not r.passed]
            ok = not failed and eq.consistent and A.valid
            return _verdict(ok), (f"identities={'ok' if not failed else ','.join(failed)}; "
                                  f"HH,QQ,PP={','.join('1' if b else '0' for b in eq.verdicts)}")
        return run
    raise ScriptError(f"unknown suite {suite}", st.line, 1)


def _random_word(algebra: Algebra, gens, rng) -> Element:
    """Random homogeneous product of 1 to 3 generators with a small coefficient."""
    e = algebra.scalar(rng.choice([1, 2, -1, Fraction(1, 2)]))
    for _ in range(rng.randint(1, 3)):
        e = e * rng.choice(gens)
    return e if e else rng.choice(gens)


# -- driver -----------------------------------------------------------------------------

_PENDING: List[Callable] = []


def _run_pending(i: int):
    try:
        return _PENDING[i]()
    except Exception as exc:  # engine errors surface as ERROR records
        return "ERROR", f"{type(exc).__name__}: {exc}"


def run(script: Script, seed: Optional[int] = None, degree_cap: int = DEFAULT_DEGREE_CAP, jobs: int = 1) -> Report:
    """Execute statements in order; checks may run in parallel but are reported in script order."""
    it = Interpreter(DEFAULT_SEED if seed is None else seed, degree_cap, seed_override=seed is not None)
    slots: List = []
    pending: List[Tuple[int, str, Callable]] = []
    for st in script.statements:
        try:
            out = it.run_statement(st)
        except (ScriptError, GCAError) as exc:
            msg = str(exc) if isinstance(exc, ScriptError) else f"line {st.line}: {type(exc).__name__}: {exc}"
            slots.append(Record("error", st.keyword, "ERROR", msg))
            continue
        if out is None:
            continue
        if isinstance(out, Record):
            slots.append(out)
        else:
            label, fn = out
            pending.append((len(slots), label, fn))
            slots.append(None)
    global _PENDING
    _PENDING = [fn for _, _, fn in pending]
    if jobs > 1 and len(pending) > 1 and "fork" in multiprocessing.get_all_start_methods():
        mp = multiprocessing.get_context("fork")
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs, mp_context=mp) as ex:
            results = list(ex.map(_run_pending, range(len(pending))))
    else:
        results = [_run_pending(i) for i in range(len(pending))]
    _PENDING = []
    for (slot, label, _), (status, payload) in zip(pending, results):
        slots[slot] = Record("check", label, status, payload)
    return Report(slots, it.expect)


def run_text(text: str, **kw) -> Report:
    try:
        script = parse_script(text)
    except ScriptError as exc:
        return Report([Record("error", "parse", "ERROR", str(exc))])
    return run(script, **kw)


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="derivedbrackets", description="Check derived-bracket identities from scripts.")
    sub = ap.add_subparsers(dest="cmd", required=True)
    p_run = sub.add_parser("run", help="run one script")
    p_run.add_argument("script", type=Path)
    p_all = sub.add_parser("check-all", help="run every *.dbr script in a directory")
    p_all.add_argument("directory", type=Path)
    for p in (p_run, p_all):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--degree-cap", type=int, default=DEFAULT_DEGREE_CAP)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--report", type=Path, default=None, help="write the structured report here")
    args = ap.parse_args(argv)
    kw = dict(seed=args.seed, degree_cap=args.degree_cap, jobs=args.jobs)

    if args.cmd == "run":
        report = run_text(args.script.read_text(encoding="utf-8"), **kw)
        sys.stdout.write(report.text())
        if args.report:
            args.report.write_text(report.structured(), encoding="utf-8")
        return report.exit_code

    scripts = sorted(args.directory.glob("*.dbr"))
    if not scripts:
        print(f"no *.dbr scripts in {args.directory}", file=sys.stderr)
        return 2
    structured, mismatches = [], 0
    for path in scripts:
        report = run_text(path.read_text(encoding="utf-8"), **kw)
        expected = report.expect or "pass"
        got = "pass" if report.ok else "fail"
        match = expected == got
        mismatches += not match
        print(f"{path.name}: {got} (expected {expected}){'' if match else '  MISMATCH'}")
        structured.append(f"script|{path.name}|{got.upper()}|expected {expected}\n" + report.structured())
    if args.report:
        args.report.write_text("".join(structured), encoding="utf-8")
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
