"""Random inputs shared by the test modules."""
import random
from fractions import Fraction

from derivedbrackets.gca import substitute

COEFFS = [1, -1, 2, -2, 3, Fraction(1, 2), Fraction(-3, 2)]


def nonzero(make, tries=200):
    for _ in range(tries):
        v = make()
        if v:
            return v
    raise RuntimeError("sampler kept producing zero")


def random_word(algebra, gens, rng, max_len=3):
    """Coefficient times a product of 1..max_len generators; homogeneous by construction."""
    e = algebra.scalar(rng.choice(COEFFS))
    for _ in range(rng.randint(1, max_len)):
        e = e * rng.choice(gens)
    return e


def random_homogeneous(algebra, gens, rng, max_len=3, terms=2):
    """Sum of words of one degree (words of other degrees are discarded)."""
    first = nonzero(lambda: random_word(algebra, gens, rng, max_len))
    deg = first.degree()
    out = first
    for _ in range(terms - 1):
        w = random_word(algebra, gens, rng, max_len)
        if w and w.degree() == deg:
            out = out + w
    return out if out else first


def homogeneous_triples(algebra, gens, rng, count, max_len=3):
    out = []
    while len(out) < count:
        t = tuple(random_homogeneous(algebra, gens, rng, max_len) for _ in range(3))
        out.append(t)
    return out


def rng(seed):
    return random.Random(seed)


def rename(elt, source, target, mapping):
    """Move ``elt`` between algebras by generator names, renaming through ``mapping``."""
    images = {}
    for g in source.generators:
        name = mapping.get(g.name, g.name)
        images[g.name] = target.gen(name) if name in target else target.zero()
    return substitute(elt, images, target=target)
