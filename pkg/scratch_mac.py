"""Scratch checks for mac.py before freezing tests. Not part of the package."""
import itertools
import math
import time

import numpy as np

from dhtexp.probability import (
    Alphabet, Channel, HypothesisProblem, InfeasibleError, InputError, JointPmf,
    channel_capacity, compose, entropy_measures, kl_divergence, marginalize,
    product,
)
from dhtexp.projection import brute_force, solve
from dhtexp.search import SearchBudget, multistart_maximize
from dhtexp import mac
from dhtexp.mac import (
    MacAuxChoice, MacSeparateAux, component_problem, mac_exponents, mac_gtci,
    mac_gtci_slack, mac_optimize, orthogonal_optimal, split_orthogonal,
)

rng = np.random.default_rng(7)


def rnd_pmf(*sizes, names):
    w = rng.random(sizes) + 0.05
    w /= w.sum()
    return JointPmf(tuple(Alphabet(n, s) for n, s in zip(names, sizes)), w)


def rnd_kernel(in_sizes, out_size):
    w = rng.random(tuple(in_sizes) + (out_size,)) + 0.05
    return w / w.sum(axis=-1, keepdims=True)


def make_problem(nx1=2, nx2=2, ny=2, nw1=2, nw2=2, nv=2, same=False):
    p = rnd_pmf(nx1, nx2, ny, names=("X1", "X2", "Y"))
    q = p if same else rnd_pmf(nx1, nx2, ny, names=("X1", "X2", "Y"))
    ch = Channel((Alphabet("W1", nw1), Alphabet("W2", nw2)),
                 (Alphabet("V", nv),), rnd_kernel((nw1, nw2), nv))
    return HypothesisProblem(p, q, ch, "MAC")


def make_aux(prob, ns1=2, ns2=2, f1=None, f2=None, soft=True):
    nx1, nx2 = prob.p.axes[0].size, prob.p.axes[1].size
    nw1, nw2 = (a.size for a in prob.channel.input_axes)
    t_ax = (Alphabet("T1", nw1), Alphabet("T2", nw2))
    pt = rng.random((nw1, nw2)) + 0.2
    pt /= pt.sum()
    k1 = rnd_kernel((nx1, nw1, nw2), ns1)
    k2 = rnd_kernel((nx2, nw1, nw2), ns2)
    if f1 is None:
        f1 = rng.integers(0, nw1, (ns1, nx1))
    if f2 is None:
        f2 = rng.integers(0, nw2, (ns2, nx2))
    return MacAuxChoice(JointPmf(t_ax, pt),
                        Channel((Alphabet("X1", nx1),) + t_ax, (Alphabet("S1", ns1),), k1),
                        Channel((Alphabet("X2", nx2),) + t_ax, (Alphabet("S2", ns2),), k2),
                        f1, f2)


# ---------------------------------------------------------------- check 1
# law builder vs direct nested-loop summation
prob = make_problem()
aux = make_aux(prob)
law = mac._mac_law(prob.p, prob, aux)
assert law.names == ("X1", "X2", "Y", "T1", "T2", "S1", "S2", "V")
direct = np.zeros(law.probs.shape)
k1 = aux.p_s1_given_x1_t.kernel
k2 = aux.p_s2_given_x2_t.kernel
G = prob.channel.kernel
for x1, x2, y, t1, t2, s1, s2, v in itertools.product(*(range(n) for n in law.probs.shape)):
    direct[x1, x2, y, t1, t2, s1, s2, v] = (
        prob.p.probs[x1, x2, y] * aux.p_t1t2.probs[t1, t2]
        * k1[x1, t1, t2, s1] * k2[x2, t1, t2, s2]
        * G[aux.f1[s1, x1], aux.f2[s2, x2], v])
print("check1 law vs direct:", np.max(np.abs(law.probs - direct)))
assert np.max(np.abs(law.probs - direct)) < 1e-14

# references vs direct
refs = mac._references(prob, aux)
r1 = refs["drop1"]
assert r1.names == ("X2", "Y", "T1", "T2", "S2", "V")
direct1 = np.zeros(r1.probs.shape)
q_x2y = marginalize(prob.q, keep=("X2", "Y")).probs
for x2, y, t1, t2, s2, v in itertools.product(*(range(n) for n in r1.probs.shape)):
    direct1[x2, y, t1, t2, s2, v] = (
        q_x2y[x2, y] * aux.p_t1t2.probs[t1, t2] * k2[x2, t1, t2, s2]
        * G[t1, aux.f2[s2, x2], v])
print("check1 drop1 ref vs direct:", np.max(np.abs(r1.probs - direct1)))
assert np.max(np.abs(r1.probs - direct1)) < 1e-14

rc = refs["channel"]
assert rc.names == ("Y", "T1", "T2", "V")
q_y = marginalize(prob.q, keep=("Y",)).probs
directc = np.einsum("y,ab,abv->yabv", q_y, aux.p_t1t2.probs, G)
print("check1 channel ref vs direct:", np.max(np.abs(rc.probs - directc)))
assert np.max(np.abs(rc.probs - directc)) < 1e-14

# ---------------------------------------------------------------- check 2
# brute-force oracle covered separately (seeds 12 and 11 measured clean);
# timing probe only
probA = make_problem(nw1=1, nw2=1, nv=2)
auxA = make_aux(probA)
t0 = time.time()
repA = mac_exponents(probA, auxA)
tA = time.time() - t0
print(f"check2 mac_exponents on A took {tA:.2f}s  feasible={repA.feasible}")

# ---------------------------------------------------------------- check 3
# instance B: nw=2; brute only the miss scopes; ipf vs penalty on all nine
probB = make_problem()
auxB = make_aux(probB)
t0 = time.time()
repB = mac_exponents(probB, auxB)
tB = time.time() - t0
repBp = mac_exponents(probB, auxB, method="penalty")
print(f"check3 B ipf {tB:.2f}s  feasible={repB.feasible}")
for name in mac.COMPONENT_NAMES:
    d = abs(repB.components[name] - repBp.components[name])
    print(f"  {name:9s} ipf={repB.components[name]: .6f} "
          f"pen={repBp.components[name]: .6f} |d|={d:.2e}")
    assert d < 2e-6 or (math.isinf(repB.components[name]) and math.isinf(repBp.components[name]))

# Remark-3 orderings on raw divergences, several random auxes
for trial in range(4):
    pr = make_problem()
    ax = make_aux(pr)
    rep = mac_exponents(pr, ax)
    dv = rep.divergences
    assert dv["miss1a"] <= dv["miss1b"] + 1e-6, (trial, dv)
    assert dv["miss2a"] <= dv["miss2b"] + 1e-6, (trial, dv)
    for k in ("dec1", "dec2", "standard"):
        assert dv["dec12"] <= dv[k] + 1e-6, (trial, k, dv)
print("check3 remark-3 orderings hold on 4 random auxes")

# ---------------------------------------------------------------- check 4
# trivial instance: Q = P, noiseless super-channel, identity quantizers
probT = make_problem(nv=4, same=True)
ident = np.eye(2)[..., None, None, :] * np.ones((1, 2, 2, 1))
kern_noiseless = np.zeros((2, 2, 4))
for w1, w2 in itertools.product(range(2), range(2)):
    kern_noiseless[w1, w2, 2 * w1 + w2] = 1.0
probT = HypothesisProblem(probT.p, probT.p,
                          Channel(probT.channel.input_axes, (Alphabet("V", 4),),
                                  kern_noiseless), "MAC")
t_ax = (Alphabet("T1", 2), Alphabet("T2", 2))
f_id = np.array([[0, 0], [1, 1]])
auxT = MacAuxChoice(JointPmf(t_ax, np.full((2, 2), 0.25)),
                    Channel((Alphabet("X1", 2),) + t_ax, (Alphabet("S1", 2),),
                            np.broadcast_to(np.eye(2)[:, None, None, :], (2, 2, 2, 2)).copy()),
                    Channel((Alphabet("X2", 2),) + t_ax, (Alphabet("S2", 2),),
                            np.broadcast_to(np.eye(2)[:, None, None, :], (2, 2, 2, 2)).copy()),
                    f_id, f_id)
repT = mac_exponents(probT, auxT)
print("check4 trivial:", {k: round(v, 7) for k, v in repT.components.items()},
      "feasible", repT.feasible)
assert repT.feasible
assert abs(repT.components["standard"]) < 1e-6
for k in ("dec1", "dec2", "dec12"):
    assert repT.components[k] > -1e-9

# uncoded: S constant, W = f(X)
auxU = MacAuxChoice(JointPmf(t_ax, np.full((2, 2), 0.25)),
                    Channel((Alphabet("X1", 2),) + t_ax, (Alphabet("S1", 1),),
                            np.ones((2, 2, 2, 1))),
                    Channel((Alphabet("X2", 2),) + t_ax, (Alphabet("S2", 1),),
                            np.ones((2, 2, 2, 1))),
                    np.array([[0, 1]]), np.array([[0, 1]]))
probU = make_problem(nv=4)
probU = HypothesisProblem(probU.p, probU.q,
                          Channel(probU.channel.input_axes, (Alphabet("V", 4),),
                                  kern_noiseless), "MAC")
repU = mac_exponents(probU, auxU)
print("check4 uncoded:", {k: round(v, 5) for k, v in repU.components.items()},
      "feasible", repU.feasible)
assert repU.feasible

# ---------------------------------------------------------------- check 5
# gtci hybrid value vs direct nested-loop sum on a split instance
def xor_bsc(flip):
    k = np.zeros((2, 2, 2))
    for w1, w2, v in itertools.product(range(2), repeat=3):
        k[w1, w2, v] = (1 - flip) if v == (w1 + w2) % 2 else flip
    return Channel((Alphabet("W1", 2), Alphabet("W2", 2)), (Alphabet("V", 2),), k)

def make_split(nz=2, nyb=2, q_cond=None):
    p_xz = rng.random((2, 2, nz)) + 0.05
    p_xz /= p_xz.sum()
    p_yb = rnd_kernel((2, 2, nz), nyb)
    probs_p = np.einsum("abz,abzy->abyz", p_xz, p_yb)
    if q_cond is None:
        q_cond = rnd_kernel((nz,), nyb)
    probs_q = np.einsum("abz,zy->abyz", p_xz, q_cond)
    axes = (Alphabet("X1", 2), Alphabet("X2", 2), Alphabet("Yb", nyb), Alphabet("Z", nz))
    return HypothesisProblem(JointPmf(axes, probs_p), JointPmf(axes, probs_q),
                             xor_bsc(0.05), "MAC")

def soft_aux(prob, eps):
    """Quantizers eps-mixed toward uniform so the rate conditions hold."""
    t_ax = (Alphabet("T1", 2), Alphabet("T2", 2))
    pt = rng.random((2, 2)) + 0.2
    pt /= pt.sum()
    k1 = (1 - eps) * 0.5 + eps * rnd_kernel((2, 2, 2), 2)
    k2 = (1 - eps) * 0.5 + eps * rnd_kernel((2, 2, 2), 2)
    f_s = np.array([[0, 0], [1, 1]])
    return MacAuxChoice(JointPmf(t_ax, pt),
                        Channel((Alphabet("X1", 2),) + t_ax, (Alphabet("S1", 2),), k1),
                        Channel((Alphabet("X2", 2),) + t_ax, (Alphabet("S2", 2),), k2),
                        f_s, f_s)

probS = make_split()
# find a feasible random aux
for _ in range(200):
    auxS = soft_aux(probS, 0.35)
    if mac_gtci_slack(probS, auxS, "hybrid") <= 1e-9:
        break
else:
    raise SystemExit("no feasible hybrid aux found")
val = mac_gtci(probS, auxS, "hybrid")
joint = mac._split_law(probS, auxS)
# direct: E_{Z T1 T2 V} D(P_{Yb|...} || Q_{Yb|Z}) + I(S1 S2; Yb | Z T1 T2 V)
m = marginalize(joint, keep=("Yb", "Z", "T1", "T2", "V"))
q_yz = marginalize(probS.q, keep=("Yb", "Z"))
qk = q_yz.probs / q_yz.probs.sum(axis=0, keepdims=True)  # (Yb, Z)
term = 0.0
pr = np.transpose(m.probs, [m.index(n) for n in ("Yb", "Z", "T1", "T2", "V")])
for yb, z, t1, t2, v in itertools.product(*(range(s) for s in pr.shape)):
    val_p = pr[yb, z, t1, t2, v]
    if val_p > 0:
        cond = pr[:, z, t1, t2, v].sum()
        term += val_p * math.log2(val_p / cond / qk[yb, z])
term += entropy_measures(joint, ("S1", "S2"), ("Z", "T1", "T2", "V"), ("Yb",))
print(f"check5 gtci hybrid {val:.8f} direct {term:.8f} diff {abs(val - term):.2e}")
assert abs(val - term) < 1e-10

# separate mode vs direct
aux_sep = MacSeparateAux(
    Channel((Alphabet("X1", 2),), (Alphabet("S1", 2),), rnd_kernel((2,), 2)),
    Channel((Alphabet("X2", 2),), (Alphabet("S2", 2),), rnd_kernel((2,), 2)),
    JointPmf((Alphabet("T1", 2), Alphabet("T2", 2)), np.full((2, 2), 0.25)),
    Channel((Alphabet("T1", 2), Alphabet("T2", 2)), (Alphabet("W1", 2),), rnd_kernel((2, 2), 2)),
    Channel((Alphabet("T1", 2), Alphabet("T2", 2)), (Alphabet("W2", 2),), rnd_kernel((2, 2), 2)))
slack = mac_gtci_slack(probS, aux_sep, "separate")
print("check5 separate slack:", slack)
if slack <= 1e-9:
    vs = mac_gtci(probS, aux_sep, "separate")
    src = compose(compose(probS.p, aux_sep.p_s1_given_x1), aux_sep.p_s2_given_x2)
    mz = marginalize(src, keep=("Yb", "Z"))
    przz = np.transpose(mz.probs, [mz.index("Yb"), mz.index("Z")])
    term2 = 0.0
    for yb, z in itertools.product(range(przz.shape[0]), range(przz.shape[1])):
        if przz[yb, z] > 0:
            term2 += przz[yb, z] * math.log2(przz[yb, z] / przz[:, z].sum() / qk[yb, z])
    term2 += entropy_measures(src, ("S1", "S2"), ("Z",), ("Yb",))
    print(f"check5 gtci separate {vs:.8f} direct {term2:.8f}")
    assert abs(vs - term2) < 1e-10

# zero-capacity channel + matching conditionals -> exactly 0
p_same = make_split(q_cond=None)
ch0 = Channel((Alphabet("W1", 2), Alphabet("W2", 2)), (Alphabet("V", 2),),
              np.broadcast_to(np.array([0.6, 0.4]), (2, 2, 2)).copy())
p_yz_cond = marginalize(p_same.p, keep=("Yb", "Z"))
qc = np.transpose(p_yz_cond.probs, [p_yz_cond.index("Z"), p_yz_cond.index("Yb")])
qc = qc / qc.sum(axis=1, keepdims=True)
p_xz0 = marginalize(p_same.p, keep=("X1", "X2", "Z"))
q0_probs = np.einsum("abz,zy->abyz", p_xz0.probs, qc)
prob0 = HypothesisProblem(p_same.p, JointPmf(p_same.p.axes, q0_probs), ch0, "MAC")
aux0 = MacAuxChoice(JointPmf(t_ax, np.full((2, 2), 0.25)),
                    Channel((Alphabet("X1", 2),) + t_ax, (Alphabet("S1", 1),),
                            np.ones((2, 2, 2, 1))),
                    Channel((Alphabet("X2", 2),) + t_ax, (Alphabet("S2", 1),),
                            np.ones((2, 2, 2, 1))),
                    np.zeros((1, 2), dtype=int), np.zeros((1, 2), dtype=int))
v0 = mac_gtci(prob0, aux0, "hybrid")
print("check5 zero-capacity value:", v0)
assert abs(v0) < 1e-9

# ---------------------------------------------------------------- check 6
# corollary-1 instances: standard attains min of {standard, dec1, dec2, dec12}
kern4 = np.zeros((2, 2, 4))
for w1, w2 in itertools.product(range(2), range(2)):
    kern4[w1, w2, 2 * w1 + w2] = 1.0
for trial in range(3):
    p_x = rng.random((2, 2)) + 0.1
    p_x /= p_x.sum()
    p_y_cond = rnd_kernel((2, 2), 2)
    probs_p = np.einsum("ab,aby->aby", p_x, p_y_cond)
    qy = rng.random(2) + 0.2
    qy /= qy.sum()
    probs_q = np.einsum("ab,y->aby", p_x, qy)
    axes3 = (Alphabet("X1", 2), Alphabet("X2", 2), Alphabet("Y", 2))
    prC = HypothesisProblem(JointPmf(axes3, probs_p), JointPmf(axes3, probs_q),
                            Channel((Alphabet("W1", 2), Alphabet("W2", 2)),
                                    (Alphabet("V", 4),), kern4), "MAC")
    # BSC quantizers, f(s, x) = s: any such aux satisfies the conditional
    # independence constraints (V reveals S exactly)
    a1, a2 = rng.uniform(0.05, 0.45, 2)
    kq1 = np.broadcast_to(np.array([[1 - a1, a1], [a1, 1 - a1]])[:, None, None, :],
                          (2, 2, 2, 2)).copy()
    kq2 = np.broadcast_to(np.array([[1 - a2, a2], [a2, 1 - a2]])[:, None, None, :],
                          (2, 2, 2, 2)).copy()
    f_s = np.array([[0, 0], [1, 1]])
    auxC = MacAuxChoice(JointPmf(t_ax, np.full((2, 2), 0.25)),
                        Channel((Alphabet("X1", 2),) + t_ax, (Alphabet("S1", 2),), kq1),
                        Channel((Alphabet("X2", 2),) + t_ax, (Alphabet("S2", 2),), kq2),
                        f_s, f_s)
    lawC = mac._mac_law(prC.p, prC, auxC)
    ci = (entropy_measures(lawC, ("S1",), ("S2", "T1", "T2"), ("X1",))
          - entropy_measures(lawC, ("S1",), ("S2", "T1", "T2"), ("V",)),
          entropy_measures(lawC, ("S2",), ("S1", "T1", "T2"), ("X2",))
          - entropy_measures(lawC, ("S2",), ("S1", "T1", "T2"), ("V",)),
          entropy_measures(lawC, ("S1", "S2"), ("T1", "T2"), ("X1", "X2"))
          - entropy_measures(lawC, ("S1", "S2"), ("T1", "T2"), ("V",)))
    assert max(ci) <= 1e-9, ci
    repC = mac_exponents(prC, auxC, cap=4)
    four = {k: repC.components[k] for k in ("standard", "dec1", "dec2", "dec12")}
    print(f"check6 trial {trial}:", {k: round(v, 5) for k, v in four.items()})
    assert four["standard"] <= min(four.values()) + 1e-5, four

# ---------------------------------------------------------------- check 7
# orthogonal channels
def bsc(r):
    return np.array([[1 - r, r], [r, 1 - r]])

def ortho_channel(r1, r2):
    k = np.zeros((2, 2, 4))
    b1, b2 = bsc(r1), bsc(r2)
    for w1, w2, v1, v2 in itertools.product(range(2), repeat=4):
        k[w1, w2, 2 * v1 + v2] = b1[w1, v1] * b2[w2, v2]
    return Channel((Alphabet("W1", 2), Alphabet("W2", 2)), (Alphabet("V", 4),), k)

def ortho_problem(r1, r2, flip=0.1):
    p_x = np.full((2, 2), 0.25)
    y_cond = np.zeros((2, 2, 2))
    for x1, x2 in itertools.product(range(2), range(2)):
        y_cond[x1, x2] = bsc(flip)[(x1 + x2) % 2]
    probs_p = p_x[..., None] * y_cond
    p_y = probs_p.sum(axis=(0, 1))
    probs_q = p_x[..., None] * p_y[None, None, :]
    axes3 = (Alphabet("X1", 2), Alphabet("X2", 2), Alphabet("Y", 2))
    return HypothesisProblem(JointPmf(axes3, probs_p), JointPmf(axes3, probs_q),
                             ortho_channel(r1, r2), "MAC")

ch1, ch2 = split_orthogonal(ortho_channel(0.1, 0.2))
print("check7 capacities:", channel_capacity(ch1), channel_capacity(ch2))

pr_zero = ortho_problem(0.5, 0.5)
t0 = time.time()
v_zero = orthogonal_optimal(pr_zero)
print(f"check7 C=0 value {v_zero:.8f} base "
      f"{kl_divergence(marginalize(pr_zero.p, keep=('Y',)), marginalize(pr_zero.q, keep=('Y',))):.8f} "
      f"({time.time() - t0:.1f}s)")

pr_clean = ortho_problem(0.0, 0.0)
t0 = time.time()
v_clean = orthogonal_optimal(pr_clean)
ixy = entropy_measures(pr_clean.p, ("X1", "X2"), (), ("Y",))
print(f"check7 noiseless {v_clean:.8f} expect D+I = {ixy:.8f} ({time.time() - t0:.1f}s)")
assert abs(v_zero - kl_divergence(marginalize(pr_zero.p, keep=("Y",)),
                                  marginalize(pr_zero.q, keep=("Y",)))) < 1e-9
assert abs(v_clean - ixy) < 1e-6

# capacity 0.5 instance: restricted binary-symmetric family grid
from scipy.optimize import brentq
r_half = brentq(lambda r: 1.0 + r * math.log2(r) + (1 - r) * math.log2(1 - r) - 0.5,
                1e-6, 0.5 - 1e-9)
pr_half = ortho_problem(r_half, r_half)
c_half = channel_capacity(split_orthogonal(pr_half.channel)[0])
print("check7 r_half", r_half, "capacity", c_half)

def grid_value(pr, c1, c2, n=161):
    best = -1.0
    vals = np.linspace(0.0, 0.5, n)
    for a1 in vals:
        k1 = bsc(a1)
        for a2 in vals:
            k2 = bsc(a2)
            joint = compose(pr.p, Channel((Alphabet("X1", 2),), (Alphabet("S1", 2),), k1))
            joint = compose(joint, Channel((Alphabet("X2", 2),), (Alphabet("S2", 2),), k2))
            if entropy_measures(joint, ("S1",), ("S2",), ("X1",)) > c1 + 1e-12:
                continue
            if entropy_measures(joint, ("S2",), ("S1",), ("X2",)) > c2 + 1e-12:
                continue
            if entropy_measures(joint, ("S1", "S2"), (), ("X1", "X2")) > c1 + c2 + 1e-12:
                continue
            best = max(best, entropy_measures(joint, ("S1", "S2"), (), ("Y",)))
    return best

t0 = time.time()
g = grid_value(pr_half, c_half, c_half)
tg = time.time() - t0
t0 = time.time()
v_half = orthogonal_optimal(pr_half)
tv = time.time() - t0
base_half = kl_divergence(marginalize(pr_half.p, keep=("Y",)), marginalize(pr_half.q, keep=("Y",)))
print(f"check7 half: search {v_half:.6f} grid {base_half + g:.6f} "
      f"diff {abs(v_half - base_half - g):.2e} (grid {tg:.0f}s search {tv:.0f}s)")

# monotone in capacity
vals = []
for r in (0.5, 0.35, 0.2, 0.05):
    vals.append(orthogonal_optimal(ortho_problem(r, 0.3)))
print("check7 monotone ladder:", [round(v, 5) for v in vals])
assert all(vals[i] <= vals[i + 1] + 1e-6 for i in range(len(vals) - 1))

# ---------------------------------------------------------------- check 8
# separate-mode search matches orthogonal_optimal
pr_x = pr_half
nz1 = 1
axes4 = (Alphabet("X1", 2), Alphabet("X2", 2), Alphabet("Yb", 2), Alphabet("Z", nz1))
prob_sep = HypothesisProblem(JointPmf(axes4, pr_x.p.probs[..., None]),
                             JointPmf(axes4, pr_x.q.probs[..., None]),
                             pr_x.channel, "MAC")

def sep_objective(arrays):
    k1, k2 = arrays
    aux = MacSeparateAux(
        Channel((Alphabet("X1", 2),), (Alphabet("S1", 3),), k1),
        Channel((Alphabet("X2", 2),), (Alphabet("S2", 3),), k2),
        JointPmf((Alphabet("T1", 2), Alphabet("T2", 2)), np.full((2, 2), 0.25)),
        Channel((Alphabet("T1", 2), Alphabet("T2", 2)), (Alphabet("W1", 2),),
                np.full((2, 2, 2), 0.5)),
        Channel((Alphabet("T1", 2), Alphabet("T2", 2)), (Alphabet("W2", 2),),
                np.full((2, 2, 2), 0.5)))
    viol = mac_gtci_slack(prob_sep, aux, "separate")
    if viol > 1e-9:
        return mac._gtci_value(prob_sep, aux, "separate") - 1e4 * viol
    return mac_gtci(prob_sep, aux, "separate")

t0 = time.time()
_arr, v_sep, _tr = multistart_maximize(
    sep_objective, [(2, 3), (2, 3)], SearchBudget(starts=24, seed=0, polish_iters=400, rounds=2))
print(f"check8 separate search {v_sep:.6f} vs orthogonal {v_half:.6f} "
      f"diff {abs(v_sep - v_half):.2e} ({time.time() - t0:.0f}s)")

# ---------------------------------------------------------------- check 9
# mac_optimize smoke test + timing
pr9 = make_problem(same=True)
t0 = time.time()
rep9 = mac_optimize(pr9, SearchBudget(starts=2, seed=1, polish_iters=30, rounds=1))
print(f"check9 mac_optimize theta {rep9.theta:.5f} active {rep9.active} "
      f"({time.time() - t0:.0f}s, evals {rep9.trace.evaluations})")
assert rep9.feasible
print("all scratch checks passed")
