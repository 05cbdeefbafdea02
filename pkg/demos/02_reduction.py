"""Run the DBDH simulator against an adversary that breaks the toy scheme.

On the toy group discrete logs are free, so the adversary always wins the
IND-ID-CPA game. The simulator turns that into a DBDH distinguisher; its edge
is diluted by aborts but stays above ``lambda * eps / 4``.
"""

import random
from collections import Counter

from nibe.abort_analysis import lambda_bound
from nibe.bilinear import ToyGroup
from nibe.ibe import EncodedIdentity, SchemeConfig
from nibe.reduction import ToyDlogAdversary, run_reduction

rng = random.Random(1)
group = ToyGroup()  # p = 1009
config = SchemeConfig(n=1, ell=1)
q = 1
adversary = ToyDlogAdversary(rng, EncodedIdentity((1,), 1), [EncodedIdentity((0,), 1)])

games, wins, kinds = 20_000, 0, Counter()
for _ in range(games):
    guess, transcript = run_reduction(adversary, group, config, q, rng)
    wins += guess == transcript.beta
    kinds[transcript.abort_kind.value] += 1

lam = lambda_bound(q, config.ell, config.n)
print(f"lambda = {lam}, required edge lambda*eps/4 = {float(lam) / 8:.4f}")
print(f"measured edge: {wins / games - 0.5:.4f} over {games} games")
for kind, count in sorted(kinds.items()):
    print(f"  {kind:>10}: {count}")
