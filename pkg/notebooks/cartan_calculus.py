"""
Cartan calculus as operator commutators
=======================================

Tensors act on forms by interior products.  Commutators with d give Lie
derivatives, and the derived bracket [[i_u, d], i_v] of multivectors is the
interior product of their Schouten bracket.
"""
from derivedbrackets.cartan import (
    ManifoldContext,
    check_cartan_identities,
    courant,
    courant_jacobiator,
    derived_op_bracket,
    frolicher_nijenhuis,
    op_equal,
    schouten,
)

R3 = ManifoldContext(3)
x, y = R3.parse("x2*@1"), R3.parse("x1^2*@3")
print(check_cartan_identities(R3, x, y))

# a Poisson bivector has vanishing Schouten square; this one does not
P = R3.parse("x2*@1*@2 + @2*@3")
print("[P, P] =", schouten(R3, P, P).to_text())

u, v = R3.parse("x3*@1*@2"), R3.parse("x1*@3")
w = schouten(R3, u, v)
print("[u, v] =", w.to_text())
print("operator check:", op_equal(derived_op_bracket(R3, R3.embed_i(u), R3.embed_i(v)), R3.embed_i(w)))

###############################################################################
# Vector-valued 1-forms: [N, N]_FN is twice the Nijenhuis torsion of N.

N = R3.parse("x3*dx1*@2 + dx2*@1")
print("[N, N]_FN =", frolicher_nijenhuis(R3, N, N).to_text())

###############################################################################
# The Courant bracket is skew but not Jacobi.

zero = R3.algebra.zero()
vec, form = courant(R3, R3.parse("@1"), R3.parse("x2*dx1"), R3.parse("@2"), zero)
print("[@1 + x2 dx1, @2] =", vec.to_text(), "+", form.to_text())
a, b, c = (R3.parse("@1"), zero), (R3.parse("x1*@2"), zero), (zero, R3.parse("x2*dx1"))
vec, form = courant_jacobiator(R3, a, b, c)
print("jacobiator:", vec.to_text(), "+", form.to_text())
