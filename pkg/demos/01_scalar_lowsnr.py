#!/usr/bin/env python3
"""Scalar channel tour: Y = W + sqrt(q) X for standardized X.

Walks through the Bayes estimator, the error curve against the Gaussian
benchmark 1/(1+q), the output's divergence from Gaussianity, and the
low-snr Taylor machinery: third-order error expansion, fourth divergence
derivative from moments, and the finite-difference cross-check.
"""

import numpy as np

from mmselab import (
    ScalarChannel,
    conditional_mean,
    d4_at_zero_from_moments,
    divergence_derivatives_at_zero,
    expstd,
    gaussian,
    gaussian_mmse,
    mmse,
    mmse_taylor3,
    nongaussianity,
    rademacher,
    uniform,
)

print("=" * 72)
print("1. Bayes estimators at q = 0.5")
print("=" * 72)
ys = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
for src in (rademacher(), gaussian(), uniform()):
    ch = ScalarChannel(src, 0.5)
    est = conditional_mean(ch, ys)
    cells = "  ".join(f"{v:+.4f}" for v in est)
    print(f"  {src.name:10s} E[X|y] at y={ys}: {cells}")
print("  (rademacher is tanh(sqrt(q) y); gaussian is the linear estimator)")

print()
print("=" * 72)
print("2. Error curves: every source beats the Gaussian benchmark 1/(1+q)")
print("=" * 72)
qs = (0.1, 0.5, 1.0, 2.0, 5.0)
header = "q".rjust(6) + "".join(f"{s.name:>12s}" for s in (rademacher(), uniform(), expstd())) + f"{'gaussian':>12s}"
print("  " + header)
for q in qs:
    row = [f"{q:6.2f}"]
    for src in (rademacher(), uniform(), expstd()):
        row.append(f"{mmse(ScalarChannel(src, q)):12.6f}")
    row.append(f"{gaussian_mmse(q):12.6f}")
    print("  " + "".join(row))

print()
print("=" * 72)
print("3. Non-Gaussianity of the output (divergence from the matched normal)")
print("=" * 72)
for src in (rademacher(), uniform(), expstd(), gaussian()):
    vals = "  ".join(f"D({q})={nongaussianity(ScalarChannel(src, q)):.3e}" for q in (0.25, 1.0))
    print(f"  {src.name:10s} {vals}")
print("  (identically zero only for the Gaussian input)")

print()
print("=" * 72)
print("4. Third-order expansion residuals shrink like q^4 (rademacher)")
print("=" * 72)
for q in (0.2, 0.1, 0.05, 0.025):
    exact = mmse(ScalarChannel(rademacher(), q))
    series = mmse_taylor3(rademacher(), q)
    print(f"  q={q:6.3f}  mmse={exact:.9f}  series={series:.9f}  residual/q^4={(exact - series)/q**4:8.4f}")

print()
print("=" * 72)
print("5. Divergence derivatives at zero snr vs the moment formula")
print("=" * 72)
for src in (rademacher(), uniform(), expstd()):
    ests = divergence_derivatives_at_zero(src)
    line = "  ".join(f"D{e.order}(0)={e.value:+.4e}" for e in ests)
    print(f"  {src.name:10s} {line}")
    print(f"  {'':10s} moment formula for D4(0): {d4_at_zero_from_moments(src):+.4f}")
print()
print("  Symmetric laws: orders 1-3 vanish and the formula nails D4(0).")
print("  The skewed exponential shows the formula's limit: the measured")
print("  D3(0) equals (EX^3)^2/2 = 2, and D4(0) tracks the 12*m3^2 variant")
print("  (see README, 'Known limits of the moment formulas').")
