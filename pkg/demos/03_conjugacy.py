"""
Conjugate systems, same answers
===============================

phi(x) = 2 - 4x carries the logistic map 4x(1-x) on [0,1] onto y^2 - 2 on
[-2,2].  Pushing seeds through phi and pulling endpoints back gives an
instance over the quadratic map with the same answer for every n.
"""

from fractions import Fraction

from telic_lab import (
    ConjugacySpec,
    SeedFamily,
    TargetFamily,
    TelicInstance,
    affine_quadratic,
    check_reduction,
    conjugate_instance,
    logistic,
    logistic_quadratic,
    validate_conjugacy,
)

phi = logistic_quadratic()
rep = validate_conjugacy(phi)
print("conjugacy holds:", rep.ok, "points checked:", rep.equation_checked)

inst = TelicInstance(logistic(4), SeedFamily("square"), TargetFamily.interval("1/3", "1/3 + 2^-n"))
other = conjugate_instance(inst, phi)
print("orbit precision at n=5:", inst.v(5), "->", other.v(5))
print(check_reduction(inst, other, 10).to_csv())

# Nudge phi by 1/8.  Validation refuses it; forcing it through shows the damage.
bad = ConjugacySpec(Fraction(-4), Fraction(17, 8), logistic(4), affine_quadratic())
print("corrupted map valid:", validate_conjugacy(bad).ok)
rep = check_reduction(inst, conjugate_instance(inst, bad, validate=False), 10)
print("answers differ at n =", rep.disagreements)
