import math
import time

import numpy as np

from dhtexp import (
    Alphabet, Channel, HypothesisProblem, JointPmf, DmcAuxChoice,
    SearchBudget, dmc_exponents, dmc_optimize, dmc_no_uep, bsc_row_divergence,
)


def family(p0, q0, p1, r):
    """Null: X~Bern(p0), Y = X xor Bern(q0). Alt: X~Bern(p1), Y indep same marg.
    Channel: BSC(r)."""
    qy = p0 * (1 - q0) + (1 - p0) * q0
    p = np.zeros((2, 2))
    for x in range(2):
        for y in range(2):
            px = p0 if x else 1 - p0
            fy = q0 if y != x else 1 - q0
            p[x, y] = px * fy
    q = np.zeros((2, 2))
    for x in range(2):
        for y in range(2):
            qx = p1 if x else 1 - p1
            fy = qy if y else 1 - qy
            q[x, y] = qx * fy
    axes = (Alphabet("X", 2), Alphabet("Y", 2))
    chan = Channel((Alphabet("W", 2),), (Alphabet("V", 2),),
                   np.array([[1 - r, r], [r, 1 - r]]))
    return HypothesisProblem(JointPmf(axes, p), JointPmf(axes, q), chan, "DMC")


# timing of one evaluation
prob = family(0.2, 0.3, 0.4, 0.1)
k = np.array([[0.9, 0.1, 0.0, 0.0], [0.1, 0.9, 0.0, 0.0]])
aux = DmcAuxChoice(
    Channel((Alphabet("X", 2),), (Alphabet("S", 4),), k),
    JointPmf((Alphabet("T", 2),), np.array([1.0, 0.0])),
    Channel((Alphabet("T", 2),), (Alphabet("W", 2),), np.full((2, 2), 0.5)),
)
t0 = time.time()
for _ in range(20):
    rep = dmc_exponents(prob, aux)
dt = (time.time() - t0) / 20
print(f"one dmc_exponents eval: {dt*1000:.1f} ms; components {rep.components}"
      f" feasible {rep.feasible}")

# criterion 1 anchor check: r = 4/9
prob49 = family(0.2, 0.3, 0.4, 4 / 9)
t0 = time.time()
rep49 = dmc_optimize(prob49, SearchBudget(starts=12, seed=1, polish_iters=150, rounds=1))
t1 = time.time()
target = bsc_row_divergence(4 / 9)
print(f"r=4/9: theta {rep49.theta:.6f} target {target:.6f} active {rep49.active} "
      f"({t1-t0:.1f}s, evals {rep49.trace.evaluations})")

# criterion 2: r = 0.1 -> 0.19
t0 = time.time()
rep01 = dmc_optimize(prob, SearchBudget(starts=16, seed=1, polish_iters=250, rounds=2))
t1 = time.time()
print(f"r=0.1: theta {rep01.theta:.6f} target 0.19 active {rep01.active} "
      f"components { {k: round(v, 4) for k, v in rep01.components.items()} } "
      f"({t1-t0:.1f}s, evals {rep01.trace.evaluations})")
