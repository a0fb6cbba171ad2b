"""
Discretized orbits
==================

Iterating a chaotic map in floating point loses every bit of the start
after about fifty steps.  Here orbits are computed exactly (or with a
certified error budget) and rounded once, at the end.
"""

from fractions import Fraction

from telic_lab import GridPoint, discretize_orbit, doubling, logistic, rotation, tent, working_precision
from telic_lab.algebraic import QuadraticIrrational

# The doubling map shifts binary digits out, so 1/4 reaches 0 after two steps
# and stays there.
print(discretize_orbit(doubling(), GridPoint((4,), 4), 3, 4)[0])

# Tent and doubling keep dyadic points dyadic, so exact mode is cheap.
g, trace = discretize_orbit(tent(), GridPoint((5,), 6), 40, 6)
print(g, trace.mode)

# Floats are dyadic too, so the tent map is exact on them.  The logistic
# map is not: a float orbit of 3/32 is noise after sixty steps, while the
# certified grid point is right to within 2^-8.
x = 3 / 32
for _ in range(60):
    x = 4 * x * (1 - x)
g, _ = discretize_orbit(logistic(4), (Fraction(3, 32),), 60, 8)
print("float:", round(x, 4), "certified:", float(g.values()[0]))

# The logistic map doubles the numerator size each step.  Past the bit cap
# the discretizer switches to fixed point at a working precision large
# enough that the accumulated error stays below a quarter grid step.
spec = logistic(4)
g, trace = discretize_orbit(spec, GridPoint((3,), 5), 40, 8)
print(g, trace.mode, "w =", trace.w, "error bound =", float(trace.error_bound))
print("w from the budget formula:", working_precision(spec.lipschitz, 40, 8))

# Irrational rotations run on exact integer square roots.
golden = rotation(QuadraticIrrational(-1, 1, 2, 5))
for k in (1, 10, 100, 1000):
    print(k, discretize_orbit(golden, GridPoint((0,), 10), k, 10)[0])
