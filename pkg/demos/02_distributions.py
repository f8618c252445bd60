"""The two density families and how their tails line up.

A q-Gaussian with 5/3 < q < 3 has tails |x|^(-2/(q-1)); a symmetric stable law
has tails |x|^(-(1+alpha)).  Matching the exponents gives alpha = (3-q)/(q-1),
the stable law that sums of q-Gaussian variables flow to.
"""

import numpy as np

from logfluct.dist import QGaussianParams, StableParams, alpha_from_q, qgauss_pdf, stable_pdf, stable_sample

q = 1.72
alpha = alpha_from_q(q)
print(f"q = {q} -> alpha = {alpha:.3f}, tail exponent 1 + alpha = {1 + alpha:.3f}")

x = np.array([0.0, 1.0, 3.0, 10.0, 30.0, 100.0])
qg = qgauss_pdf(QGaussianParams(q, 5.9), x)
st = stable_pdf(StableParams(alpha), x)
print(f"{'x':>6} {'q-Gaussian':>12} {'stable':>12}")
for xi, a, b in zip(x, qg, st):
    print(f"{xi:6.0f} {a:12.4e} {b:12.4e}")

# local log-log slopes far out: both approach -(1 + alpha)
far = np.array([100.0, 1000.0])
for name, f in (("q-Gaussian", qgauss_pdf(QGaussianParams(q, 5.9), far)), ("stable", stable_pdf(StableParams(alpha), far))):
    print(f"{name} slope between 100 and 1000: {np.diff(np.log(f))[0] / np.log(10):.3f}")

# sampling is reproducible from a seed
assert np.array_equal(stable_sample(StableParams(1.7), 5, seed=1), stable_sample(StableParams(1.7), 5, seed=1))
print("stable draws:", np.round(stable_sample(StableParams(1.7), 5, seed=1), 3))
