"""
Poisson structures with a closed 3-form background
==================================================

A bivector P and a closed 3-form psi are compatible when half the Schouten
square of P equals the image of psi under the third power of P#.  Three
formulations are checked side by side.
"""
from derivedbrackets.background import equivalence_triangle, wzw_condition
from derivedbrackets.cartan import ManifoldContext

R4 = ManifoldContext(4)
P = R4.parse("@1*@2 + @3*@4 + x1*@1*@3")
psi = R4.parse("dx1*dx2*dx4")

rep = wzw_condition(R4, P, psi)
print("1/2 [P,P]  =", rep.lhs.to_text())
print("(^3 P#)psi =", rep.rhs.to_text())

# condition, square-zero twisted differential, anchor morphism
print("verdicts:", equivalence_triangle(R4, P, psi, samples=2).verdicts)
print("flipped psi:", equivalence_triangle(R4, P, psi.scale(-1), samples=2).verdicts)

###############################################################################
# On R^3 every bivector has rank at most 2, so the right-hand side vanishes and
# the condition reduces to [P, P] = 0.

R3 = ManifoldContext(3)
vol = R3.parse("dx1*dx2*dx3")
for text in ("x3*@1*@2 + @2*@3", "x2*@1*@2 + @2*@3"):
    print(text, "->", equivalence_triangle(R3, R3.parse(text), vol).verdicts)
