"""The integer resonance structure of the quartic dispersion.

Exact phase factorization, the nonresonant triple sets, and how divisor
counting controls how many triples share a factor product.
"""

import numpy as np

from bnls.resonance import (
    count_triples_with_factor,
    divisor_count,
    nonresonant_triples,
    phase,
    phase_factored,
)

print("phase(1,0,1,2)          =", phase(1, 0, 1, 2))
print("factored form           =", phase_factored(1, 0, 1, 2))

limit = 30
rng = np.arange(-limit, limit + 1, dtype=np.int64)
n1, n2, n3 = [a.ravel() for a in np.meshgrid(rng, rng, rng, indexing="ij")]
n = n1 - n2 + n3
mism = np.count_nonzero(n1**4 - n2**4 + n3**4 - n**4
                        != (n1 - n2) * (n1 - n) * (n1**2 + n2**2 + n3**2 + n**2 + 2 * (n1 + n3) ** 2))
print(f"factorization mismatches over {n1.size} quads: {mism}")

print("\ntriple set sizes at |n_j| <= 16:")
for center in (0, 4, 12):
    triples = nonresonant_triples(center, 16)
    smallest = np.min(np.abs(triples.phi))
    print(f"  n = {center:3d}: {len(triples):5d} triples, min |phase| = {smallest}")

print("\ndivisor control of factor products (n = 0, |n_j| <= 20):")
for mu in (4, 36, 360):
    cnt = count_triples_with_factor(0, mu, 20)
    print(f"  mu = {mu:4d}: {cnt:3d} triples <= 2*d(mu) = {2 * divisor_count(mu)}")
