"""The softplus link and the negative binomial conditional distribution.

Why softplus?  A count model's conditional mean must stay positive, but
forcing regression coefficients to be non-negative (as the classical linear
INGARCH does) rules out negative autocorrelation.  The softplus function
sp(x) = c*ln(1 + exp(x/c)) is a smooth, strictly positive stand-in for
ReLU: coefficients can be any sign while the mean stays positive.
"""

import numpy as np

from spingarch import (
    RngStream,
    logistic,
    nb_log_pmf,
    nb_sample,
    relu,
    softplus,
    softplus_deriv,
)

print("softplus basics")
print("---------------")
for x in (-5.0, 0.0, 2.0, 50.0):
    print(f"  sp({x:5.1f}, c=1) = {softplus(x):12.7f}   ReLU = {relu(x):5.1f}")
print(f"  sp(0) = ln 2 = {softplus(0.0):.7f}; derivative at 0 = {softplus_deriv(0.0):.2f}")
print(f"  derivative == logistic:  sp'(1) = {softplus_deriv(1.0):.7f}, "
      f"logistic(1) = {logistic(1.0):.7f}")

print("\nshrinking c pulls softplus onto ReLU (gap <= c ln 2):")
for c in (1.0, 0.5, 0.1, 0.01):
    xs = np.linspace(-3, 3, 601)
    gap = max(softplus(x, c) - relu(x) for x in xs)
    print(f"  c = {c:5.2f}: max gap = {gap:.5f}  (bound {c * np.log(2):.5f})")

print("\nnegative binomial with dispersion n and mean lambda")
print("---------------------------------------------------")
n, lam = 3.0, 6.0
draws = nb_sample(RngStream(7), n, lam, size=200_000)
print(f"  n={n}, lambda={lam}: sample mean {draws.mean():.3f}, "
      f"sample var/mean {draws.var(ddof=1) / draws.mean():.3f} "
      f"(theory 1 + lambda/n = {1 + lam / n:.1f})")

xs = np.arange(8)
pmf = np.exp(nb_log_pmf(xs, n, lam))
emp = np.bincount(draws, minlength=8)[:8] / draws.size
print("  x      pmf      empirical")
for x, p, e in zip(xs, pmf, emp):
    print(f"  {x}   {p:.5f}   {e:.5f}")

print("\nAs n grows the NB collapses onto the Poisson (variance -> mean):")
for n_big in (3, 30, 3000):
    d = nb_sample(RngStream(8), float(n_big), 4.0, size=100_000)
    print(f"  n = {n_big:5d}: var/mean = {d.var(ddof=1) / d.mean():.3f}")
