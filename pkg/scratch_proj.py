import math
import time

import numpy as np

from dhtexp import (
    Alphabet, JointPmf, CouplingProblem, MarginalConstraint, EntropyFloor,
    solve, brute_force, kl_divergence, entropy_measures, marginalize,
)


def bern_pair(p0, q0, r):
    # X ~ Bern(p0); Y = X xor Bern(q0); S = X xor Bern(r)
    px = np.array([1 - p0, p0])
    joint = np.zeros((2, 2, 2))  # S, X, Y
    for x in range(2):
        for y in range(2):
            for s in range(2):
                fy = q0 if y != x else 1 - q0
                fs = r if s != x else 1 - r
                joint[s, x, y] = px[x] * fy * fs
    axes = (Alphabet("S", 2), Alphabet("X", 2), Alphabet("Y", 2))
    return JointPmf(axes, joint)


p0, q0, p1, r = 0.2, 0.3, 0.4, 0.1
P = bern_pair(p0, q0, r)
qy = p0 * (1 - q0) + (1 - p0) * q0
# Q: X ~ Bern(p1), Y ~ Bern(p0*q0 convolved) independent, same S|X channel
qx = np.array([1 - p1, p1])
ref = np.zeros((2, 2, 2))
for x in range(2):
    for y in range(2):
        for s in range(2):
            fs = r if s != x else 1 - r
            fy = qy if y == 1 else 1 - qy
            ref[s, x, y] = qx[x] * fy * fs
R = JointPmf(P.axes, ref)

P_SX = marginalize(P, keep=("S", "X"))
P_SY = marginalize(P, keep=("S", "Y"))
P_Y = marginalize(P, keep=("Y",))

# standard pattern: pi_SX = P_SX, pi_SY = P_SY
prob_std = CouplingProblem(R, (
    MarginalConstraint(("S", "X"), P_SX),
    MarginalConstraint(("S", "Y"), P_SY),
))
t0 = time.time()
rep = solve(prob_std)
t1 = time.time()
px_p = marginalize(P, keep=("X",))
qx_p = marginalize(R, keep=("X",))
closed = kl_divergence(px_p, qx_p) + entropy_measures(P_SY, ("S",), versus_axes=("Y",))
print(f"std solve {rep.value:.9f} closed {closed:.9f} kkt {rep.kkt_residual:.2e} "
      f"iters {rep.iterations} {t1-t0:.2f}s")

t0 = time.time()
rep_b = brute_force(prob_std)
t1 = time.time()
print(f"std brute {rep_b.value:.9f} gap {rep_b.gap:.4f} pts {rep_b.iterations} {t1-t0:.2f}s")

rep_p = solve(prob_std, method="penalty")
print(f"std penalty {rep_p.value:.9f} kkt {rep_p.kkt_residual:.2e} iters {rep_p.iterations}")

# dec pattern: pi_SX = P_SX, pi_Y = P_Y, H(S|Y) >= H_P(S|Y)
hp = entropy_measures(P, ("S",), conditioning_axes=("Y",))
prob_dec = CouplingProblem(R, (
    MarginalConstraint(("S", "X"), P_SX),
    MarginalConstraint(("Y",), P_Y),
), EntropyFloor(("S",), ("Y",), hp))
t0 = time.time()
rep_d = solve(prob_dec)
t1 = time.time()
closed_dec = kl_divergence(px_p, qx_p)
print(f"dec solve {rep_d.value:.9f} closed {closed_dec:.9f} kkt {rep_d.kkt_residual:.2e} "
      f"iters {rep_d.iterations} {t1-t0:.2f}s")
t0 = time.time()
rep_db = brute_force(prob_dec, grid_step=1/32)
t1 = time.time()
print(f"dec brute {rep_db.value:.9f} gap {rep_db.gap:.4f} pts {rep_db.iterations} {t1-t0:.2f}s")
rep_dp = solve(prob_dec, method="penalty")
print(f"dec penalty {rep_dp.value:.9f} iters {rep_dp.iterations}")

# BINDING entropy floor: reference P has H(Y|X)=h2(0.3)=0.881 < 0.9, but the
# coupling can push H(Y|X) to 1, so the floor is feasible and active
prob_bind = CouplingProblem(P, (
    MarginalConstraint(("S", "X"), P_SX),
), EntropyFloor(("Y",), ("X",), 0.9))
t0 = time.time()
rep_bind = solve(prob_bind)
t1 = time.time()
print(f"bind solve {rep_bind.value:.9f} kkt {rep_bind.kkt_residual:.2e} "
      f"iters {rep_bind.iterations} {t1-t0:.2f}s  Hviol check")
t0 = time.time()
rep_bb = brute_force(prob_bind, grid_step=1/32)
t1 = time.time()
print(f"bind brute {rep_bb.value:.9f} gap {rep_bb.gap:.4f} pts {rep_bb.iterations} {t1-t0:.2f}s")
rep_bp = solve(prob_bind, method="penalty")
print(f"bind penalty {rep_bp.value:.9f} iters {rep_bp.iterations}")
assert abs(rep_bind.value - rep_bp.value) < 2e-6, "dual route mismatch"
assert rep_bb.value >= rep_bind.value - 1e-6, "brute below solve?!"
assert abs(rep_bind.value - rep_bb.value) <= rep_bb.gap + 1e-3

# infeasible: entropy floor above log2|A|
rep_inf = solve(CouplingProblem(R, (MarginalConstraint(("S", "X"), P_SX),),
                                EntropyFloor(("X",), (), 1.5)))
print(f"over-cap feasible={rep_inf.feasible} value={rep_inf.value}")

# +inf: reference with a zero forced positive
ref0 = ref.copy()
ref0[0, 0, 0] = 0.0
ref0 /= ref0.sum()
R0 = JointPmf(P.axes, ref0)
rep_zero = solve(CouplingProblem(R0, (
    MarginalConstraint(("S", "X"), P_SX),
    MarginalConstraint(("S", "Y"), P_SY),
)))
print(f"forced-zero value={rep_zero.value} feasible={rep_zero.feasible}")

# contradictory marginals -> infeasible
bad = JointPmf((Alphabet("S", 2),), np.array([0.9, 0.1]))
bad2 = JointPmf((Alphabet("S", 2), Alphabet("X", 2)),
                np.array([[0.25, 0.25], [0.25, 0.25]]))
rep_bad = solve(CouplingProblem(R, (
    MarginalConstraint(("S",), bad), MarginalConstraint(("S", "X"), bad2))))
print(f"contradiction feasible={rep_bad.feasible}")
print("smoke ok")
