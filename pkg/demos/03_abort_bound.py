"""Where the non-abort lower bound holds and where it does not.

With one-bit blocks every nonzero block difference is a unit modulo
``m = 2q`` and the bound ``1/(4 q 2^ell n)`` holds. With wider blocks an even
difference can make two identities' sums move together mod ``m``. Then a
query that collides with the challenge kills the simulation every time.
"""

import random

from nibe.abort_analysis import (
    AbortExperiment,
    bound_check,
    differences_coprime,
    lemma1_exact,
    random_experiment,
)

print("one-bit blocks, q=1, n=1, query (0,), challenge (1,)")
print(bound_check(AbortExperiment(1, 1, 1, [(0,)], (1,))).to_text())

print("two-bit blocks, q=1, n=1, query (0,), challenge (2,)")
rep = bound_check(AbortExperiment(1, 2, 1, [(0,)], (2,)))
print(f"  exact non-abort probability {rep.estimate}, bound {rep.lam}")
print("  difference 2 coprime to m=2?", differences_coprime((0,), (2,), 2))

print("joint law of (S(v), S(v')) mod 4 for v=(0,), v'=(2,):")
for a in range(4):
    print("  ", " ".join(str(lemma1_exact((0,), (2,), a, b, 4, 1)).rjust(4) for b in range(4)))

rng = random.Random(0)
misses = sum(not bound_check(random_experiment(2, 2, 2, rng)).passed for _ in range(200))
print(f"random experiments at q=2, ell=2, n=2 below the bound: {misses}/200")
