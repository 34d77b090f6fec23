import math
import time

import numpy as np

from dhtexp import (
    GaussianSpec, SearchBudget, gauss_kl, mac_gauss_achievable,
    mac_gauss_upper, mac_ortho_gauss_optimal, p2p_gauss_optimal,
)
from dhtexp.gaussian import _hybrid_theta, _hybrid_violation, _separate_min_xi


def grid_oracle(spec, step=0.05, xi_max=16.0, top=12):
    """Exhaustive 4-D grid over (xi_sq, alpha, beta, gamma_sq): coarse pass at
    the given step, then staged refinement around the leading coarse cells."""
    amax = math.sqrt(spec.P)
    rho, s, P = spec.rho, spec.sigma_sq, spec.P
    extra = (spec.sigma0_sq + 2 + 2 * rho) / (2 * spec.sigmay_sq) - 0.5

    def values_on(xis, als, bes, gas):
        X, A, B, G = np.meshgrid(xis, als, bes, gas, indexing="ij")
        d2 = (A - B) ** 2
        denom = s + 2.0 * d2 * (1 + rho) * X / (1 + rho + X)
        lhs1 = ((1 + X) ** 2 - rho**2) / ((1 + X) * X)
        rhs1 = (s + 2 * P - G + 2 * A**2 * rho - (A * (1 + rho) + B * X) ** 2 / (1 + X)) / denom
        lhs2 = ((1 + X) ** 2 - rho**2) / X**2
        rhs2 = (s + 2 * P + 2 * A**2 * rho) / denom
        used = G + A**2 + B**2 * X
        feas = (lhs1 <= rhs1 + 1e-12) & (lhs2 <= rhs2 + 1e-12) & (used <= P + 1e-12)
        f = 2 * X * (1 + rho) * s / (2 * X * d2 * (1 + rho) + s * (1 + rho + X))
        th = 0.5 * np.log2(spec.sigmay_sq / (f + spec.sigma0_sq)) + extra * math.log2(math.e)
        return np.where(feas, th, -np.inf), (X, A, B, G)

    def window(center, width, fine, lo, hi):
        pts = np.arange(center - width, center + width + fine / 2, fine)
        return np.clip(pts, lo, hi)

    xis = np.arange(step, xi_max + step / 2, step)
    als = np.arange(0.0, amax + step / 2, step)
    gas = np.arange(0.0, P + step / 2, step)
    th, coords = values_on(xis, als, als, gas)
    best, arg = -math.inf, None
    for ix, x in enumerate(xis):
        col = th[ix]
        j = np.unravel_index(np.argmax(col), col.shape)
        if not math.isfinite(col[j]):
            continue
        v = col[j]
        a0, b0, g0 = als[j[0]], als[j[1]], gas[j[2]]
        if v > best:
            best, arg = v, (x, a0, b0, g0)
        w, f = step, step / 5
        for _ in range(3):
            thr, coordsr = values_on(np.array([x]),
                                     window(a0, w, f, 0.0, amax),
                                     window(b0, w, f, 0.0, amax),
                                     window(g0, w, f, 0.0, P))
            k = np.unravel_index(np.argmax(thr), thr.shape)
            if math.isfinite(thr[k]) and thr[k] > v:
                v = thr[k]
                a0, b0, g0 = (coordsr[1][k], coordsr[2][k], coordsr[3][k])
                if v > best:
                    best, arg = v, (x, a0, b0, g0)
            w, f = f * 1.2, f / 5
    return best, arg


# 1. grid-oracle instance
spec = GaussianSpec(rho=0.0, sigma0_sq=1.0, sigmay_sq=3.0, sigma_sq=1.0, P=1.0)
t0 = time.time()
vg, arg = grid_oracle(spec)
t1 = time.time()
va = mac_gauss_achievable(spec)
t2 = time.time()
vg0 = vg
print(f"rho=0: grid {vg:.6f} (coarse {vg0:.6f}, {t1-t0:.1f}s) search {va:.6f} "
      f"({t2-t1:.1f}s) diff {abs(vg-va):.2e} arg {arg}")

# 2. Fig-7-style ordering
spec7 = GaussianSpec(rho=0.8, sigma0_sq=1.0, sigmay_sq=1.5, sigma_sq=1.0, P=1.0)
vg7, arg7 = grid_oracle(spec7)
hyb = mac_gauss_achievable(spec7)
sep = mac_gauss_achievable(spec7, mode="separate")
up = mac_gauss_upper(spec7)
print(f"fig7 P=1: sep {sep:.6f} hyb {hyb:.6f} grid {vg7:.6f} upper {up:.6f} "
      f"gap {up-hyb:.4f} arg {arg7}")

for P in (0.1, 0.5, 2.0, 10.0):
    s = GaussianSpec(rho=0.8, sigma0_sq=1.0, sigmay_sq=1.5, sigma_sq=1.0, P=P)
    hyb = mac_gauss_achievable(s, SearchBudget(starts=32, seed=0, polish_iters=200, rounds=1))
    sep = mac_gauss_achievable(s, mode="separate")
    up = mac_gauss_upper(s)
    ok = sep <= hyb + 1e-9 <= up + 1e-9
    print(f"  P={P}: sep {sep:.5f} hyb {hyb:.5f} up {up:.5f} ordered {ok}")

# 3. power-starved limit
tiny = GaussianSpec(rho=0.8, sigma0_sq=1.0, sigmay_sq=1.5, sigma_sq=1.0, P=1e-6)
d = gauss_kl(2 + 2 * 0.8 + 1.0, 1.5)
va = mac_gauss_achievable(tiny, SearchBudget(starts=8, seed=0, polish_iters=150, rounds=1))
print(f"P=1e-6: ach {va:.8f} divergence {d:.8f} diff {abs(va-d):.2e}")

# 4. random-spec ordering timing
rng = np.random.default_rng(0)
t0 = time.time()
bad = 0
for i in range(100):
    s = GaussianSpec(rho=rng.uniform(0, 1), sigma0_sq=rng.uniform(0.1, 3),
                     sigmay_sq=rng.uniform(0.2, 5), sigma_sq=rng.uniform(0.1, 3),
                     P=rng.uniform(0.05, 10))
    hyb = mac_gauss_achievable(s, SearchBudget(starts=2, seed=i, polish_iters=80, rounds=1))
    sep = mac_gauss_achievable(s, mode="separate")
    up = mac_gauss_upper(s)
    if not (sep <= hyb + 1e-9 and hyb <= up + 1e-9):
        bad += 1
        print(f"  VIOLATION at {s}: sep {sep} hyb {hyb} up {up}")
t1 = time.time()
print(f"100 random specs in {t1-t0:.1f}s, violations {bad}")

# 5. p2p numeric oracle
from scipy.optimize import brentq
def p2p_numeric(rho0, C):
    if rho0 == 0.0 or C == 0.0:
        return 0.0
    xi = 1.0 / (4.0 ** C - 1.0)
    return 0.5 * math.log2(1.0 / (1.0 - rho0**2 / (1.0 + xi)))
worst = 0.0
for rho0 in np.linspace(0.05, 0.95, 10):
    for C in np.linspace(0.1, 2.0, 10):
        a = p2p_gauss_optimal(GaussianSpec(rho0=rho0, C=C))
        b = p2p_numeric(rho0, C)
        worst = max(worst, abs(a - b))
print(f"p2p closed vs substitution worst {worst:.2e}")

# 6. ortho checks
s = GaussianSpec(sigma0_sq=1.3, sigmay_sq=3.3, C1=40, C2=40)
print(f"ortho large-C {mac_ortho_gauss_optimal(s):.9f} vs "
      f"{0.5*math.log2(3.3/1.3):.9f}")
s = GaussianSpec(sigma0_sq=1.3, sigmay_sq=3.3, C1=0, C2=0)
print(f"ortho zero-C {mac_ortho_gauss_optimal(s):.9f} vs "
      f"{gauss_kl(2+1.3, 3.3):.9f}")

# 7. upper at P=0
s = GaussianSpec(rho=0.8, sigma0_sq=1.0, sigmay_sq=1.5, P=0.0)
print(f"upper P=0 {mac_gauss_upper(s):.9f} vs D {gauss_kl(2+1.6+1.0, 1.5):.9f}")
