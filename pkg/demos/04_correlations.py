"""Linear ACF, volatility clustering and the leverage correlation.

Every statistic is compared against the same data shuffled: a permutation
keeps the distribution and destroys the order, which is exactly the null
hypothesis of "no temporal structure".
"""

import math

import numpy as np

from logfluct.corr import abs_acf, acf, antisymmetry_score, leverage, shuffle, shuffled_antisymmetry_scores, significant_lags

# a GARCH-type recursion with an asymmetric response of volatility to returns
rng = np.random.default_rng(4)
n = 10_000
z = rng.standard_normal(n)
r = np.empty(n)
h = 1.0
for t in range(n):
    r[t] = math.sqrt(h) * z[t]
    h = 0.1 + 0.85 * h + 0.1 * r[t] ** 2 - 0.05 * r[t]
r = (r - r.mean()) / r.std()

c = acf(r, 50)
print(f"noise level 1/sqrt(n) = {c.noise_level:.4f}")
print("significant lags of r (3 sigma):", significant_lags(c).tolist())
print("significant lags of |r|:", significant_lags(abs_acf(r, 50)).tolist()[:20], "...")
print("after shuffling, |r|:", significant_lags(abs_acf(shuffle(r, 1), 50)).tolist())

lev = leverage(r, 25, n_shuffles=20, seed=2)
print(f"L(1) = {lev.at(1):+.3f}, L(-1) = {lev.at(-1):+.3f}, shuffle band +-{lev.noise_band:.3f}")
score = antisymmetry_score(lev)
null = shuffled_antisymmetry_scores(r, 25, 100, seed=3)
print(f"antisymmetry score {score:+.3f}; shuffled scores mean {null.mean():+.3f}, 95th percentile {np.quantile(null, 0.95):+.3f}")
