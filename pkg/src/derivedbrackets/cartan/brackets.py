"""Brackets of forms, multivectors and multivector-valued forms.

Every bracket here is computed twice where that is cheap: once by a direct
coordinate formula and once as an operator on forms, the operator being
turned back into a tensor by :func:`extract_tensor`.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Tuple

from ..brackets import InternalInconsistencyError
from ..gca import Algebra, BracketStructure, Derivation, Element, GradingError, left_derivative, substitute
from .manifold import ManifoldContext, TensorShapeError
from .operators import (
    DEFAULT_MARGIN,
    DerivationOp,
    Operator,
    Sum,
    UnsupportedShapeError,
    algebraic_components,
    first_difference,
    op_commutator,
    op_equal,
    op_is_zero,
    op_sum,
    zero_operator,
)


def _sign(e: int) -> int:
    return -1 if e % 2 else 1


# ---------------------------------------------------------------------------
# operator constructions
# ---------------------------------------------------------------------------


def lie_operator(ctx: ManifoldContext, X: Element) -> Operator:
    """``L_X = [i_X, d]``."""
    return op_commutator(ctx.embed_i(X), ctx.d_op)


def derived_op_bracket(ctx: ManifoldContext, a: Operator, b: Operator) -> Operator:
    """``[a,b]_d = [[a, d], b]`` on endomorphisms of forms."""
    return op_commutator(op_commutator(a, ctx.d_op), b)


def vinogradov(ctx: ManifoldContext, a: Operator, b: Operator) -> Operator:
    """``1/2 ([[a,d],b] - (-1)^{|b|} [a,[b,d]])``."""
    first = op_commutator(op_commutator(a, ctx.d_op), b)
    second = op_commutator(a, op_commutator(b, ctx.d_op))
    return op_sum([(Fraction(1, 2), first), (-Fraction(_sign(b.parity), 2), second)])


def lie_derivation(ctx: ManifoldContext, x: Element) -> DerivationOp:
    """``L_x`` for a vector field, built as the derivation with
    ``L_x f = x(f)`` and ``L_x dx^a = d(x^a)``."""
    if ctx.bidegrees(x) - {(0, 1)}:
        raise TensorShapeError(f"{x} is not a vector field")
    comps = ctx.vector_components(x)
    imgs = {}
    for a, (c, dc) in enumerate(zip(ctx.coords, ctx.dxs)):
        xa = comps.get((a,), ctx.algebra.zero())
        imgs[c] = xa
        imgs[dc] = ctx.d(xa)
    return DerivationOp(ctx.space, Derivation(ctx.algebra, 0, imgs, default_zero=True), f"L[{x}]")


# ---------------------------------------------------------------------------
# operators back to tensors
# ---------------------------------------------------------------------------


def extract_tensor(ctx: ManifoldContext, op: Operator, verify: bool = True) -> Element:
    """The multivector-valued form ``Z`` with ``i_Z = op``.

    Raises :class:`UnsupportedShapeError` when ``op`` is not of that form
    (for instance when it differentiates its argument).
    """
    comps = algebraic_components(op)
    Z = ctx.algebra.zero()
    for I, w in comps.items():
        Z = Z + w * ctx.vector_monomial(I)
    if verify:
        diff = first_difference(ctx.embed_i(Z), op)
        if diff is not None:
            t, got, want = diff
            raise UnsupportedShapeError(f"operator is not algebraic: on {t} expected {want}, tensor gives {got}")
    return Z


# ---------------------------------------------------------------------------
# vector fields and multivectors
# ---------------------------------------------------------------------------


def lie_bracket(ctx: ManifoldContext, x: Element, y: Element) -> Element:
    """Lie bracket of vector fields by differentiating components."""
    cx, cy = ctx.vector_components(x), ctx.vector_components(y)
    if any(len(I) != 1 for I in cx) or any(len(I) != 1 for I in cy) or not (ctx.is_multivector(x) and ctx.is_multivector(y)):
        raise TensorShapeError("lie_bracket needs vector fields")
    out = ctx.algebra.zero()
    for b in range(ctx.dim):
        yb = cy.get((b,), ctx.algebra.zero())
        xb = cx.get((b,), ctx.algebra.zero())
        comp = ctx.algebra.zero()
        for (a,), xa in cx.items():
            comp = comp + xa * left_derivative(yb, ctx.coords[a])
        for (a,), ya in cy.items():
            comp = comp - ya * left_derivative(xb, ctx.coords[a])
        out = out + comp * ctx.vec(b + 1)
    return out


def _multivector_parts(ctx, u):
    return [ctx.bidegree_part(u, 0, p) for p in sorted({p for _, p in ctx.bidegrees(u)})]


def schouten_via_pit(ctx: ManifoldContext, u: Element, v: Element) -> Element:
    """Schouten bracket through the odd Poisson structure of ``PiT*R^n``."""
    return ctx.from_pit(ctx.schouten_structure(ctx.to_pit(u), ctx.to_pit(v)))


def schouten(ctx: ManifoldContext, u: Element, v: Element, cross_check: bool = True) -> Element:
    """The multivector ``w`` with ``i_w = [[i_u, d], i_v]``.

    With ``cross_check`` the result is compared with :func:`schouten_via_pit`.
    """
    if not (ctx.is_multivector(u) and ctx.is_multivector(v)):
        raise TensorShapeError("schouten needs multivectors")
    out = ctx.algebra.zero()
    for up in _multivector_parts(ctx, u):
        for vp in _multivector_parts(ctx, v):
            op = derived_op_bracket(ctx, ctx.embed_i(up), ctx.embed_i(vp))
            try:
                out = out + extract_tensor(ctx, op)
            except UnsupportedShapeError as exc:
                raise InternalInconsistencyError(f"derived bracket of multivectors is not a multivector: {exc}")
    if cross_check:
        other = schouten_via_pit(ctx, u, v)
        if other != out:
            raise InternalInconsistencyError(f"Schouten models disagree: {out} vs {other}")
    return out


def schouten_via_hamiltonian(dim: int):
    """``T*(PiT*R^n)`` with ``S = -p_i pt^i``; returns ``(algebra, structure, S, to_model, from_model)``.

    Coordinates: ``y`` (0), ``yt`` (1) on ``PiT*R^n``, momenta ``p`` (0) and
    ``pt`` (-1).  The bracket is the canonical even one with ``{y,p} = 1``
    and ``{yt,pt} = 1``.  ``to_model`` sends a multivector of a
    :class:`ManifoldContext` to a function of ``(y, yt)``.
    """
    gens = ([(f"y{i}", 0) for i in range(1, dim + 1)] + [(f"p{i}", 0) for i in range(1, dim + 1)]
            + [(f"yt{i}", 1) for i in range(1, dim + 1)] + [(f"pt{i}", -1) for i in range(1, dim + 1)])
    alg = Algebra(gens, name=f"T*(PiT*R^{dim})")
    table = {}
    for i in range(1, dim + 1):
        table[(f"y{i}", f"p{i}")] = 1
        table[(f"yt{i}", f"pt{i}")] = 1
    B = BracketStructure(alg, 0, table)
    S = alg.zero()
    for i in range(1, dim + 1):
        S = S - alg.gen(f"p{i}") * alg.gen(f"pt{i}")
    ctx = ManifoldContext(dim)
    fwd = {**{c: alg.gen(f"y{i}") for i, c in enumerate(ctx.coords, 1)},
           **{v: alg.gen(f"yt{i}") for i, v in enumerate(ctx.vecs, 1)}}
    back = {**{f"y{i}": ctx.x(i) for i in range(1, dim + 1)}, **{f"yt{i}": ctx.vec(i) for i in range(1, dim + 1)}}

    def to_model(u: Element) -> Element:
        return substitute(u, fwd, target=alg)

    def from_model(f: Element) -> Element:
        return substitute(f, back, target=ctx.algebra)

    return alg, B, S, to_model, from_model, ctx


# ---------------------------------------------------------------------------
# vector-valued forms
# ---------------------------------------------------------------------------


def _vv_parts(ctx, X):
    bideg = ctx.bidegrees(X)
    if any(p != 1 for _, p in bideg):
        raise TensorShapeError(f"{X} is not a vector-valued form")
    for q in sorted({q for q, _ in bideg}):
        for (a,), xi in sorted(ctx.vector_components(ctx.bidegree_part(X, q, 1)).items()):
            yield q, xi, ctx.vec(a + 1)


def frolicher_nijenhuis(ctx: ManifoldContext, X: Element, Y: Element) -> Element:
    """Frolicher-Nijenhuis bracket, evaluated termwise on ``xi (x) x`` pieces.

    ``[xi(x)x, eta(x)y] = xi^eta (x) [x,y] + (xi^L_x eta + (-1)^q dxi ^ i_x eta) (x) y
    - (-1)^{q q'} (eta^L_y xi + (-1)^{q'} deta ^ i_y xi) (x) x``.
    """
    out = ctx.algebra.zero()
    for q, xi, x in _vv_parts(ctx, X):
        for q2, eta, y in _vv_parts(ctx, Y):
            term = xi * eta * lie_bracket(ctx, x, y)
            first = xi * ctx.lie_derivative(x, eta) + (ctx.d(xi) * ctx.contract(x, eta)).scale(_sign(q))
            second = eta * ctx.lie_derivative(y, xi) + (ctx.d(eta) * ctx.contract(y, xi)).scale(_sign(q2))
            out = out + term + first * y - (second * x).scale(_sign(q * q2))
    return out


def fn_residual(ctx: ManifoldContext, X: Element, Y: Element) -> Operator:
    """``[i_X,i_Y]_d - i_{[X,Y]_FN} + (-1)^{q(q'-1)} L_{i_Y X}`` for homogeneous ``X``, ``Y``."""
    (q, _), = ctx.bidegrees(X)
    (q2, _), = ctx.bidegrees(Y)
    lhs = derived_op_bracket(ctx, ctx.embed_i(X), ctx.embed_i(Y))
    fn = ctx.embed_i(frolicher_nijenhuis(ctx, X, Y))
    corr = lie_operator(ctx, ctx.contract(Y, X))
    return op_sum([(1, lhs), (-1, fn), (_sign(q * (q2 - 1)), corr)])


def vinogradov_fn_formula(ctx: ManifoldContext, X: Element, Y: Element) -> Operator:
    """``i_{[X,Y]_FN} + 1/2 (-1)^{p'} L_{i_X Y + (-1)^{(p-1)(p'-1)} i_Y X}``.

    ``p, p'`` are the form degrees of ``X`` and ``Y``.  The prefactor follows
    from :func:`fn_residual` applied in both orders.
    """
    (p, _), = ctx.bidegrees(X)
    (p2, _), = ctx.bidegrees(Y)
    Z = ctx.contract(X, Y) + ctx.contract(Y, X).scale(_sign((p - 1) * (p2 - 1)))
    return op_sum([(1, ctx.embed_i(frolicher_nijenhuis(ctx, X, Y))),
                   (Fraction(_sign(p2), 2), lie_operator(ctx, Z))])


# ---------------------------------------------------------------------------
# vector fields plus forms
# ---------------------------------------------------------------------------


def _check_vf(ctx, x):
    if x and ctx.bidegrees(x) != {(0, 1)}:
        raise TensorShapeError(f"{x} is not a vector field")


def _check_form(ctx, xi):
    if not ctx.is_form(xi):
        raise TensorShapeError(f"{xi} is not a form")


def dorfman(ctx: ManifoldContext, x: Element, xi: Element, y: Element, eta: Element) -> Tuple[Element, Element]:
    """``[x+xi, y+eta]_d = [x,y] + L_x eta - i_y d xi``; returns (vector, form)."""
    for v in (x, y):
        _check_vf(ctx, v)
    for f in (xi, eta):
        _check_form(ctx, f)
    return lie_bracket(ctx, x, y), ctx.lie_derivative(x, eta) - ctx.contract(y, ctx.d(xi))


def courant(ctx: ManifoldContext, x: Element, xi: Element, y: Element, eta: Element) -> Tuple[Element, Element]:
    """``[x,y] + L_x eta - L_y xi - 1/2 d(i_x eta - i_y xi)``."""
    for v in (x, y):
        _check_vf(ctx, v)
    for f in (xi, eta):
        _check_form(ctx, f)
    form = (ctx.lie_derivative(x, eta) - ctx.lie_derivative(y, xi)
            - ctx.d(ctx.contract(x, eta) - ctx.contract(y, xi)).scale(Fraction(1, 2)))
    return lie_bracket(ctx, x, y), form


def _form_degree(ctx, xi) -> int:
    degs = {q for q, _ in ctx.bidegrees(xi)}
    if len(degs) > 1:
        raise GradingError(f"{xi} is not homogeneous")
    return degs.pop() if degs else 0


def courant_from_dorfman(ctx: ManifoldContext, x, xi, y, eta) -> Tuple[Element, Element]:
    """Skew-symmetrization of :func:`dorfman`, component by component.

    As operators ``i_x`` has degree -1 and ``e_xi`` degree ``|xi|``; the
    derived bracket has degree 1, so a pair ``(u, v)`` picks up
    ``(-1)^{(|u|+1)(|v|+1)}``, which is 1 unless both are forms of even degree.
    """
    q, q2 = _form_degree(ctx, xi), _form_degree(ctx, eta)
    zero = ctx.algebra.zero()
    vec = lie_bracket(ctx, x, y)
    # (x, eta), (xi, y), (xi, eta) pieces
    a = dorfman(ctx, x, zero, zero, eta)[1]
    a_rev = dorfman(ctx, zero, eta, x, zero)[1]
    b = dorfman(ctx, zero, xi, y, zero)[1]
    b_rev = dorfman(ctx, y, zero, zero, xi)[1]
    form = (a - a_rev) + (b - b_rev)
    # two forms have zero bracket in both orders, whatever the sign
    return vec, form.scale(Fraction(1, 2)) if form else form


def pair_operator(ctx: ManifoldContext, x: Element, xi: Element) -> Operator:
    """``i_x + e_xi`` (requires ``xi`` of odd degree so the sum has one parity)."""
    return ctx.embed_i(x + xi)


# ---------------------------------------------------------------------------
# algebraic (Buttin) bracket and the pointwise big bracket
# ---------------------------------------------------------------------------


def pointwise_big_bracket(ctx: ManifoldContext, X: Element, Y: Element) -> Element:
    """Big bracket taken pointwise: ``{d_a, dx^b} = delta``, coordinates inert."""
    B = getattr(ctx, "_big", None)
    if B is None:
        B = BracketStructure(ctx.algebra, 0, {(v, dx): 1 for v, dx in zip(ctx.vecs, ctx.dxs)})
        ctx._big = B
    return B(X, Y)


def algebraic_commutator(ctx: ManifoldContext, X: Element, Y: Element) -> Element:
    """The tensor ``Z`` with ``i_Z = [i_X, i_Y]`` (all types), by bilinear extension."""
    out = ctx.algebra.zero()
    for _, Xp in ctx._homogeneous(X):
        for _, Yp in ctx._homogeneous(Y):
            out = out + extract_tensor(ctx, op_commutator(ctx.embed_i(Xp), ctx.embed_i(Yp)))
    return out


def highest_type_term(ctx: ManifoldContext, X: Element, Y: Element) -> Element:
    """Buttin's algebraic bracket: the type ``p+p'-1`` part of ``[i_X, i_Y]``.

    Computed on type-homogeneous pieces of ``X`` and ``Y`` and summed.
    """
    out = ctx.algebra.zero()
    for (_, p), Xp in ctx._homogeneous(X):
        for (_, p2), Yp in ctx._homogeneous(Y):
            op = op_commutator(ctx.embed_i(Xp), ctx.embed_i(Yp))
            Z = extract_tensor(ctx, op)
            out = out + ctx.type_part(Z, p + p2 - 1)
    return out


def buttin_rhs(ctx: ManifoldContext, X: Element, Y: Element) -> Operator:
    """``[[i_X, d], [i_Y, d]]``."""
    terms = []
    for _, Xp in ctx._homogeneous(X):
        for _, Yp in ctx._homogeneous(Y):
            terms.append((1, op_commutator(lie_operator(ctx, Xp), lie_operator(ctx, Yp))))
    if not terms:
        return zero_operator(ctx.space)
    return op_sum(terms)


# ---------------------------------------------------------------------------
# identities and witnesses
# ---------------------------------------------------------------------------


def interior_wedge_commutator(ctx: ManifoldContext, x: Element, y: Element, xi: Element) -> Operator:
    """Closed form of ``[i_{x^y}, e_xi]`` for vector fields ``x, y`` and a ``k``-form ``xi``:
    ``(-1)^{k-1} e_{i_y xi} i_x + (-1)^k e_{i_x xi} i_y + e_{i_{x^y} xi}``."""
    k = _form_degree(ctx, xi)
    A = ctx.e(ctx.contract(y, xi)) @ ctx.embed_i(x) if ctx.contract(y, xi) else zero_operator(ctx.space)
    B = ctx.e(ctx.contract(x, xi)) @ ctx.embed_i(y) if ctx.contract(x, xi) else zero_operator(ctx.space)
    C = ctx.contract(x * y, xi)
    terms = [(_sign(k - 1), A), (_sign(k), B)]
    if C:
        terms.append((1, ctx.e(C)))
    return op_sum(terms)


def nonlinearity_defect(ctx: ManifoldContext, X: Element, Y: Element, f: Element, alpha: Element) -> Element:
    """``[i_X,i_Y]_d (f alpha) - f [i_X,i_Y]_d alpha``; zero for every ``f`` iff the bracket is C-infinity linear."""
    D = derived_op_bracket(ctx, ctx.embed_i(X), ctx.embed_i(Y))
    return D(f * alpha) - f * D(alpha)


def courant_jacobiator(ctx: ManifoldContext, a, b, c) -> Tuple[Element, Element]:
    """``[a,[b,c]] - [[a,b],c] - [b,[a,c]]`` for the Courant bracket on pairs ``(x, xi)``."""
    def br(u, v):
        return courant(ctx, u[0], u[1], v[0], v[1])

    def sub(u, v):
        return (u[0] - v[0], u[1] - v[1])

    r = sub(sub(br(a, br(b, c)), br(br(a, b), c)), br(b, br(a, c)))
    return r


def check_cartan_identities(ctx: ManifoldContext, x: Element, y: Element, margin: int = None) -> Dict[str, bool]:
    """The five Cartan relations as operator equalities for vector fields ``x, y``."""
    m = DEFAULT_MARGIN if margin is None else margin
    d = ctx.d_op
    ix, iy = ctx.embed_i(x), ctx.embed_i(y)
    Lx = lie_derivation(ctx, x)
    return {
        "[d,d]=0": op_is_zero(op_commutator(d, d), m),
        "[i_x,i_y]=0": op_is_zero(op_commutator(ix, iy), m),
        "L_x=[i_x,d]": op_equal(Lx, op_commutator(ix, d), m),
        "[L_x,d]=0": op_is_zero(op_commutator(Lx, d), m),
        "[L_x,i_y]=i_[x,y]": op_equal(op_commutator(Lx, iy), ctx.embed_i(lie_bracket(ctx, x, y)), m),
    }

