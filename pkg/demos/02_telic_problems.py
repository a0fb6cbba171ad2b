"""
Telic reachability
==================

A telic problem asks, for each n, whether some precision-n seed lands in a
target rectangle after n steps.  Brute force scans all 2^n seeds; for
rotations the target can be pulled back along the orbit instead.
"""

from fractions import Fraction
from pathlib import Path

from telic_lab import (
    Counters,
    brute_force_decide,
    load_instance,
    pullback_decide,
    verify_certificate,
)

here = Path(__file__).parent / "instances"
rot = load_instance(here / "rotation_quarter.json")

# Both deciders agree, and any YES comes with a checkable witness.
for n in range(1, 9):
    b, p = brute_force_decide(rot, n), pullback_decide(rot, n)
    print(n, b, "|", p, "| verified:", verify_certificate(rot, n, p.witness) if p.yes else "-")

# Cost: brute force doubles per n on a NO instance, the pullback stays flat.
tent_point = load_instance(here / "tent_point.json")
for n in range(6, 13):
    c = Counters()
    brute_force_decide(tent_point, n, counters=c)
    print(f"tent n={n:2d} orbits={c.orbits}")

for n in (4, 8, 16, 32, 64):
    c = Counters()
    d = pullback_decide(rot, n, counters=c)
    print(f"rotation n={n:2d} {d.answer} map_steps={c.map_steps} arc={d.trace['pulled_back']}")

# Witnesses are plain seed indices; 1/2 is not one at n=3.
print(verify_certificate(rot, 3, (Fraction(1, 2),)))
