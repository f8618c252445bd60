"""Which attractor do sums of returns approach, and how persistent is |r|?

Sums over N days rescaled by N^(1/alpha) keep their shape only for the right
alpha.  DFA measures persistence: H = 0.5 for independent data, larger for
long memory.
"""

import numpy as np

from logfluct.dist import StableParams, fgn_sample, stable_sample
from logfluct.scaling import (
    collapse,
    collapse_bins,
    crossover_scan,
    default_tail_range,
    dfa,
    dfa_scales,
    hurst_fit,
    pooled_tail_fit,
)

horizons = [1, 5, 20, 100]
for name, x, alpha in (
    ("stable alpha=1.7", stable_sample(StableParams(1.7), 13_865, seed=0), 1.7),
    ("Gaussian", np.random.default_rng(0).standard_normal(13_865), 1.7),
):
    x = (x - x.mean()) / x.std()
    curves = collapse(x, horizons, alpha, collapse_bins(x))
    fit = pooled_tail_fit(curves, default_tail_range(x))
    print(f"{name:18s} rescaled by N^(1/{alpha}): pooled tail slope {fit.slope:6.2f}, r2 {fit.r2:.3f}")

n = 2**15
for label, x in (("white noise", np.random.default_rng(1).standard_normal(n)), ("fGn H=0.8", fgn_sample(0.8, n, 1))):
    print(f"{label:12s} DFA H = {hurst_fit(dfa(x, dfa_scales(n, 16))).params['H']:.3f}")

# two regimes: white noise dominates short boxes, a weak long-memory
# component (H = 0.95) takes over once its fluctuation outgrows the noise
x = np.random.default_rng(0).standard_normal(n) + 0.4 * fgn_sample(0.95, n, 10)
cross = crossover_scan(dfa(x))
print(f"crossover found={cross.found} at N = {cross.N_cross:.0f}: H below {cross.H_below:.2f}, above {cross.H_above:.2f}")
