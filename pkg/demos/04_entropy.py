"""
Counting separated orbits
=========================

Topological entropy measures how fast the number of distinguishable
orbits grows.  Tent and doubling maps should double their count per step;
rotations never separate anything new.
"""

from fractions import Fraction

from telic_lab import doubling, entropy_estimate, exact_max_separated, greedy_separated_set, rotation, tent
from telic_lab.algebraic import QuadraticIrrational

eps = Fraction(1, 16)
for spec in (tent(), doubling(), rotation(QuadraticIrrational(-1, 1, 1, 2))):
    rep = entropy_estimate(spec, range(2, 11), eps, 16)
    print(spec.id, rep.counts, f"slope {rep.slope_tail:.3f} bits/step")

# The greedy set is sandwiched between exact maxima at 2*eps and eps.
for n in range(1, 6):
    g = len(greedy_separated_set(tent(), n, Fraction(1, 8), 5))
    lo = exact_max_separated(tent(), n, Fraction(1, 4), 5)
    hi = exact_max_separated(tent(), n, Fraction(1, 8), 5)
    print(f"n={n}: {lo} <= {g} <= {hi}")
