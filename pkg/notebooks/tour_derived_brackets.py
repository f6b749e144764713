"""
Derived brackets from a square-zero element
===========================================

A Lie algebra structure is an element mu of the big bracket algebra with
{mu, mu} = 0.  Deriving the big bracket by mu gives back the Lie bracket.
"""
from derivedbrackets.bigbracket import LieStructure, ce_differential, heisenberg, sl2
from derivedbrackets.brackets import check_loday, derived_bracket

# the Heisenberg algebra: [e1, e2] = e3
h = heisenberg()
print("mu =", h.mu.to_text())
print("{mu, mu} =", h.square.to_text() or "0")

# the derived bracket on E recovers the structure constants
print("[e1, e2]_mu =", derived_bracket(h.context, h.e(1), h.e(2)).to_text())

# on E* the same element acts as the Chevalley-Eilenberg differential
print("d eps3 =", ce_differential(h, h.eps(3)).to_text())

###############################################################################
# The Jacobi identity in Loday form holds on mixed elements too, not only on E.

g = sl2()
triples = [(g.e(1) * g.eps(2), g.e(3), g.eps(1)), (g.e(2), g.e(2) * g.e(3), g.eps(3))]
print("Loday on sl2:", check_loday(g.context, triples).passed)

###############################################################################
# Constants violating Jacobi are rejected up front, with the residual attached.

try:
    LieStructure(3, {(1, 2, 1): 1, (2, 3, 2): 1, (1, 3, 3): 1})
except Exception as exc:
    print(type(exc).__name__, "residual:", exc.residual.to_text())
