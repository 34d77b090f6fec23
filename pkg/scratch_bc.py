"""Scratch validation for bc.py before freezing tests. Delete before final run."""
import itertools
import math
import time

import numpy as np

from dhtexp import (
    Alphabet,
    BcDiffAux,
    BcEqualAux,
    BcLabeling,
    Channel,
    HypothesisProblem,
    InfeasibleError,
    InputError,
    JointPmf,
    SearchBudget,
    bc_diff_laws,
    bc_diff_region,
    bc_equal_law,
    bc_equal_region,
    bc_optimize,
    brute_force,
    diff_component_problem,
    entropy_measures,
    equal_component_problem,
    kl_divergence,
    marginalize,
    solve,
)
from dhtexp.bc import _transport_min, _cross_channel_value, _gamma_single
from dhtexp.probability import kl_divergence_raw

AX = Alphabet


def shared_rho_problem(seed, nx, ny1, ny2, nw, nv1, nv2):
    """P and Q with one shared X-marginal (equal route for any labeling)."""
    rng = np.random.default_rng(seed)
    rho = rng.random(nx) + 0.3
    rho /= rho.sum()

    def cond():
        w = rng.random((nx, ny1, ny2)) + 0.05
        return w / w.sum(axis=(1, 2), keepdims=True)

    p = JointPmf((AX("X", nx), AX("Y1", ny1), AX("Y2", ny2)), rho[:, None, None] * cond())
    q = JointPmf((AX("X", nx), AX("Y1", ny1), AX("Y2", ny2)), rho[:, None, None] * cond())
    gk = rng.random((nw, nv1, nv2)) + 0.05
    gk /= gk.sum(axis=(1, 2), keepdims=True)
    ch = Channel((AX("W", nw),), (AX("V1", nv1), AX("V2", nv2)), gk)
    return HypothesisProblem(p, q, ch, "BC")


def rand_equal_aux(seed, nx, nw, ns, nu1, nu2, spread=1.0, factored=False):
    rng = np.random.default_rng(seed)
    pt = rng.random(nw) + 0.3
    pt /= pt.sum()
    if factored:
        ks = rng.random((nx, nw, ns)) ** spread + 0.4
        ks /= ks.sum(axis=2, keepdims=True)
        k1 = rng.random((nx, nw, ns, nu1)) ** spread + 0.4
        k1 /= k1.sum(axis=3, keepdims=True)
        k2 = rng.random((nx, nw, ns, nu2)) ** spread + 0.4
        k2 /= k2.sum(axis=3, keepdims=True)
        k = ks[..., :, None, None] * k1[..., :, :, None] * k2[..., :, None, :]
    else:
        k = rng.random((nx, nw, ns, nu1, nu2)) ** spread + 0.4
        k /= k.sum(axis=(2, 3, 4), keepdims=True)
    f = rng.integers(0, nw, (ns, nu1, nu2, nx))
    return BcEqualAux(
        JointPmf((AX("T", nw),), pt),
        Channel((AX("X", nx), AX("T", nw)), (AX("S", ns), AX("U1", nu1), AX("U2", nu2)), k),
        f)


def soften(aux, eps):
    """Mix the layer kernel toward uniform to restore rate feasibility."""
    k = aux.p_su_given_xt.kernel
    u = np.full_like(k, 1.0 / (k.shape[2] * k.shape[3] * k.shape[4]))
    return BcEqualAux(aux.p_t,
                      Channel(aux.p_su_given_xt.input_axes,
                              aux.p_su_given_xt.output_axes,
                              (1 - eps) * k + eps * u),
                      aux.f)


# ---------------------------------------------------------------- law oracle
def law_loops(src, pt, k, f, gk):
    nx, ny1, ny2 = src.shape
    nw = pt.size
    ns, nu1, nu2 = k.shape[2:]
    nv1, nv2 = gk.shape[1:]
    out = np.zeros((nx, ny1, ny2, nw, ns, nu1, nu2, nv1, nv2))
    for x, y1, y2, t, s, u1, u2, v1, v2 in itertools.product(
            *(range(n) for n in out.shape)):
        out[x, y1, y2, t, s, u1, u2, v1, v2] = (
            src[x, y1, y2] * pt[t] * k[x, t, s, u1, u2] * gk[f[s, u1, u2, x], v1, v2])
    return out


prob = shared_rho_problem(3, 2, 2, 2, 2, 2, 2)
aux = rand_equal_aux(4, 2, 2, 2, 2, 2, factored=True)
aux = soften(aux, 0.75)
lab = BcLabeling(0, 1)
law = bc_equal_law(prob, lab, aux, 1)
direct = law_loops(prob.p.probs, aux.p_t.probs, aux.p_su_given_xt.kernel,
                   aux.f, prob.channel.kernel)
print("law axes:", law.names)
print("law vs loops:", np.max(np.abs(law.probs - direct)))
law_q = bc_equal_law(BcLabeling(1, 1), prob, aux, 1) if False else None

# q-law for receiver 1 under lab=(0,1) must be the Q-source law
law_q1 = law_loops(prob.q.probs, aux.p_t.probs, aux.p_su_given_xt.kernel,
                   aux.f, prob.channel.kernel)
ref = equal_component_problem("standard", prob, lab, aux, 1).reference
axes_order = [("X", 0), ("Y1", 1), ("T", 3), ("S", 4), ("U1", 5), ("V1", 7)]
drop = (2, 6, 8)
qm = law_q1.sum(axis=drop)
print("std reference vs loop q-marginal:", np.max(np.abs(ref.probs - qm)),
      ref.names)

# ---------------------------------------------------------- region evaluation
t0 = time.time()
region = bc_equal_region(prob, lab, aux)
print("equal region took", round(time.time() - t0, 2), "s")
print("components:", {k: tuple(round(v, 5) for v in vv) for k, vv in region.components.items()})
print("caps:", region.caps, "sums:", region.sum_caps, "penalty:", region.penalty)

# assembly identities
std, da, db, miss = (region.components[n] for n in ("standard", "dec_a", "dec_b", "miss"))
pair = min(std[0] + std[1], std[0] + da[1], std[0] + db[1],
           std[1] + da[0], std[1] + db[0], miss[0] + miss[1])
assert abs(region.sum_caps[0] - (pair - region.penalty)) < 1e-12
assert abs(region.sum_caps[1]
           - (min(da[0], db[0]) + min(da[1], db[1]) - 2 * region.penalty)) < 1e-12
assert region.contains(0.0, 0.0)
print("assembly identities OK; pareto:", region.pareto_vertices())

# miss closed form oracle: minimization is fully pinned
for i in (1, 2):
    y, v = f"Y{i}", f"V{i}"
    p_law = bc_equal_law(prob, lab, aux, i)
    psrc = lab.source_null(prob, i)
    qsrc = lab.source_alt(prob, i)
    g = _gamma_single(prob.channel, i)
    q_y = marginalize(qsrc, keep=(y,)).probs
    ref_tail = q_y[:, None, None] * aux.p_t.probs[None, :, None] * g[None, :, :]
    lhs = kl_divergence_raw(marginalize(p_law, keep=(y, "T", v)).probs, ref_tail)
    off = (entropy_measures(p_law, ("S", f"U{i}"), ("T",), (y, v))
           - entropy_measures(p_law, ("S", f"U{i}"), ("T",), ("X",)))
    print(f"miss closed form r{i}:", abs(region.components["miss"][i - 1] - (lhs + off)))

# ipf vs penalty
r2 = bc_equal_region(prob, lab, aux, method="penalty")
for name in region.components:
    d = np.max(np.abs(np.array(region.components[name]) - np.array(r2.components[name])))
    print("route agreement", name, d)

# --------------------------------------------------------- brute instances
# each keeps every coupling at <= 16 reference cells so the eliminated
# lattice stays inside the point budget
gb = np.array([[0.9, 0.1], [0.1, 0.9]])


def uniform_layer_aux(nx, nw, f):
    """S = U1 = U2 = 1: trivial layers, the map f alone drives the channel."""
    k = np.ones((nx, nw, 1, 1, 1))
    return BcEqualAux(JointPmf((AX("T", nw),), np.full(nw, 1.0 / nw)),
                      Channel((AX("X", nx), AX("T", nw)),
                              (AX("S", 1), AX("U1", 1), AX("U2", 1)), k),
                      np.asarray(f, dtype=np.int64))


def x_blind_aux(seed, nx, nw, ns, nu1, nu2, f):
    """Layer kernel independent of X (keeps every quantization rate at zero)."""
    rng = np.random.default_rng(seed)
    k = rng.random((1, nw, ns, nu1, nu2)) + 0.4
    k /= k.sum(axis=(2, 3, 4), keepdims=True)
    k = np.repeat(k, nx, axis=0)
    pt = rng.random(nw) + 0.5
    pt /= pt.sum()
    return BcEqualAux(JointPmf((AX("T", nw),), pt),
                      Channel((AX("X", nx), AX("T", nw)),
                              (AX("S", ns), AX("U1", nu1), AX("U2", nu2)), k),
                      np.asarray(f, dtype=np.int64))


# A: trivial layers, W = X, full binary side information
probA = shared_rho_problem(21, 2, 2, 2, 2, 2, 2)
gkA = gb[:, :, None] * gb[:, None, :]
probA = HypothesisProblem(probA.p, probA.q,
                          Channel((AX("W", 2),), (AX("V1", 2), AX("V2", 2)), gkA), "BC")
auxA = uniform_layer_aux(2, 2, np.arange(2).reshape(1, 1, 1, 2))
labA = BcLabeling(0, 1)

# B: X-blind joint (S, U2) layer, single-letter channel, Y2 degenerate
probB = shared_rho_problem(31, 2, 2, 1, 1, 2, 1)
auxB = x_blind_aux(32, 2, 1, 2, 1, 2, np.zeros((2, 1, 2, 2)))
labB = BcLabeling(0, 0)

# C: X-blind cloud with W = S, so the channel resolves the layer itself
probC = shared_rho_problem(51, 2, 1, 2, 2, 2, 1)
gkC = gb[:, :, None] * np.ones((1, 1, 1))
probC = HypothesisProblem(probC.p, probC.q,
                          Channel((AX("W", 2),), (AX("V1", 2), AX("V2", 1)), gkC), "BC")
fC = np.zeros((2, 1, 1, 2), dtype=np.int64)
fC[1] = 1
auxC = x_blind_aux(52, 2, 2, 2, 1, 1, fC)
labC = BcLabeling(1, 0)

BRUTE_CASES = [
    ("A", probA, auxA, labA,
     {("standard", 1): 1 / 8, ("standard", 2): 1 / 8,
      ("dec_a", 1): 1 / 8, ("dec_a", 2): 1 / 8,
      ("dec_b", 1): 1 / 8, ("dec_b", 2): 1 / 8,
      ("miss", 1): 1 / 16, ("miss", 2): 1 / 16}),
    ("B", probB, auxB, labB,
     {("standard", 1): 1 / 8, ("standard", 2): 1 / 8,
      ("dec_a", 1): 1 / 4, ("dec_a", 2): 1 / 8,
      ("dec_b", 1): 1 / 8, ("dec_b", 2): 1 / 8,
      ("miss", 1): 1 / 16, ("miss", 2): 1 / 16}),
    ("C", probC, auxC, labC,
     {("standard", 1): 1 / 8, ("standard", 2): 1 / 8,
      ("dec_a", 1): 1 / 8, ("dec_a", 2): 1 / 8,
      ("dec_b", 1): 1 / 8, ("dec_b", 2): 1 / 8,
      ("miss", 1): 1 / 16, ("miss", 2): 1 / 16}),
]

for tag, pr, ax, lb, steps in BRUTE_CASES:
    reg = bc_equal_region(pr, lb, ax)
    print(f"{tag} caps {reg.caps} penalty {reg.penalty:.3g}")
    for i in (1, 2):
        p_law = bc_equal_law(pr, lb, ax, i)
        su, y, v = ("S", f"U{i}"), f"Y{i}", f"V{i}"
        off_a = (entropy_measures(p_law, su, ("T",), (y, v))
                 - entropy_measures(p_law, su, ("T",), ("X",)))
        off_b = (entropy_measures(p_law, (f"U{i}",), ("S", "T"), (y, v))
                 - entropy_measures(p_law, (f"U{i}",), ("S", "T"), ("X",)))
        offs = {"standard": 0.0, "dec_a": off_a, "dec_b": off_b, "miss": off_a}
        for name in ("standard", "dec_a", "dec_b", "miss"):
            cp = equal_component_problem(name, pr, lb, ax, i)
            t0 = time.time()
            try:
                bf = brute_force(cp, grid_step=steps[(name, i)])
            except Exception as e:
                print(f"{tag} brute {name} r{i}: cells={cp.reference.probs.size} "
                      f"FAILED {e}")
                continue
            total = reg.components[name][i - 1]
            print(f"{tag} brute {name} r{i}: cells={cp.reference.probs.size} "
                  f"brute+off={bf.value + offs[name]:.6f} gap={bf.gap:.2g} "
                  f"region={total:.6f} diff={abs(bf.value + offs[name] - total):.2e} "
                  f"t={time.time() - t0:.1f}s")

# --------------------------------------------------------------- diff route
def split_rho_problem(seed, nx, ny1, ny2, nw, nv1, nv2):
    rng = np.random.default_rng(seed)
    rho = rng.random(nx) + 0.3
    rho /= rho.sum()
    sig = rng.random(nx) + 0.1
    sig /= sig.sum()

    def cond():
        w = rng.random((nx, ny1, ny2)) + 0.05
        return w / w.sum(axis=(1, 2), keepdims=True)

    p = JointPmf((AX("X", nx), AX("Y1", ny1), AX("Y2", ny2)), rho[:, None, None] * cond())
    q = JointPmf((AX("X", nx), AX("Y1", ny1), AX("Y2", ny2)), sig[:, None, None] * cond())
    gk = rng.random((nw, nv1, nv2)) + 0.05
    gk /= gk.sum(axis=(1, 2), keepdims=True)
    ch = Channel((AX("W", nw),), (AX("V1", nv1), AX("V2", nv2)), gk)
    return HypothesisProblem(p, q, ch, "BC")


def rand_diff_aux(seed, nx, ns, nw, sharp=0.25):
    rng = np.random.default_rng(seed)

    def rows(shape):
        w = rng.random(shape) + 0.3
        return w / w.sum(axis=-1, keepdims=True)

    def quant():
        base = rows((nx, ns))
        u = np.full((nx, ns), 1.0 / ns)
        return (1 - sharp) * u + sharp * base

    pt = rng.random(nw) + 0.3
    pt /= pt.sum()
    return BcDiffAux(
        Channel((AX("X", nx),), (AX("S", ns),), quant()),
        Channel((AX("X", nx),), (AX("S", ns),), quant()),
        JointPmf((AX("T", nw),), pt),
        Channel((AX("T", nw),), (AX("T1", nw),), rows((nw, nw))),
        Channel((AX("T", nw),), (AX("T2", nw),), rows((nw, nw))),
        Channel((AX("T", nw), AX("T1", nw)), (AX("W", nw),), rows((nw, nw, nw))),
        Channel((AX("T", nw), AX("T2", nw)), (AX("W", nw),), rows((nw, nw, nw))))


probD = split_rho_problem(41, 2, 2, 2, 2, 2, 2)
gkD = gb[:, :, None] * gb[:, None, :]
probD = HypothesisProblem(probD.p, probD.q,
                          Channel((AX("W", 2),), (AX("V1", 2), AX("V2", 2)), gkD), "BC")
auxD = rand_diff_aux(42, 2, 2, 2)
labD = BcLabeling(0, 1)
t0 = time.time()
regD = bc_diff_region(probD, labD, auxD)
print("diff region", round(time.time() - t0, 2), "s; caps", regD.caps)
print("diff components:", {k: tuple(round(v, 5) for v in vv) for k, vv in regD.components.items()})
assert regD.sum_caps == ()

# piecewise oracle: std/dec/cross couplings by brute force, LP by BFS, miss by sums
def lp_bfs(cost, pin_pair, pin_chan):
    nt, nti, nw = cost.shape
    flat = cost.reshape(-1)
    finite = np.where(np.isfinite(flat))[0]
    idx = np.arange(flat.size)
    a_pair = np.kron(np.eye(nt * nti), np.ones(nw))
    a_chan = np.zeros((nt * nw, flat.size))
    a_chan[(idx // (nti * nw)) * nw + idx % nw, idx] = 1.0
    a = np.vstack([a_pair, a_chan])
    b = np.concatenate([pin_pair.reshape(-1), pin_chan.reshape(-1)])
    r = np.linalg.matrix_rank(a)
    best = math.inf
    for cols in itertools.combinations(finite, min(r, finite.size)):
        sub = a[:, cols]
        x, *_ = np.linalg.lstsq(sub, b, rcond=None)
        full = np.zeros(flat.size)
        full[list(cols)] = x
        if np.max(np.abs(a @ full - b)) > 1e-9 or full.min() < -1e-9:
            continue
        best = min(best, float(np.where(np.isfinite(flat), flat, 0.0) @ full))
    return best


for i in (1, 2):
    src_law, ch_law = bc_diff_laws(probD, labD, auxD, i)
    ch_other = bc_diff_laws(probD, labD, auxD, 3 - i)[1]
    g = _gamma_single(probD.channel, i)
    y = f"Y{i}"
    a_i = entropy_measures(src_law, ("S",), (y,), ("X",))
    b_i = entropy_measures(ch_law, ("W",), ("T", f"T{i}"), (f"V{i}",))
    off = b_i - a_i
    vals = {}
    for name in ("standard", "dec", "cross"):
        cp = diff_component_problem(name, probD, labD, auxD, i)
        bf = brute_force(cp, grid_step=1.0 / 64)
        rep = solve(cp)
        if name == "cross" and math.isinf(regD.components["cross"][i - 1]):
            print(f"diff cross r{i}: empty set; brute feasible={bf.feasible} "
                  f"solve feasible={rep.feasible}")
            vals[name] = math.inf
            continue
        vals[name] = rep.value
        print(f"diff brute {name} r{i}: brute={bf.value:.6f} gap={bf.gap} "
              f"solve={rep.value:.6f} diff={abs(bf.value - rep.value):.2e}")
    m = marginalize(ch_law, keep=("T", f"T{i}", f"V{i}")).probs
    mass = m.sum(axis=2)
    cost = np.zeros((mass.shape[0], mass.shape[1], g.shape[0]))
    for t in range(mass.shape[0]):
        for ti in range(mass.shape[1]):
            if mass[t, ti] <= 0:
                continue
            for w in range(g.shape[0]):
                cost[t, ti, w] = kl_divergence_raw(m[t, ti] / mass[t, ti], g[w])
    q_tw = marginalize(ch_other, keep=("T", "W")).probs
    lp = _transport_min(cost, mass, q_tw)
    bfs = lp_bfs(cost, mass, q_tw)
    print(f"LP r{i}: highs={lp:.8f} bfs={bfs:.8f} diff={abs(lp - bfs):.2e}")
    # closed forms
    psrc, qsrc = labD.source_null(probD, i), labD.source_alt(probD, i)
    head = kl_divergence(marginalize(psrc, keep=(y,)), marginalize(qsrc, keep=(y,)))
    m_tv = marginalize(ch_law, keep=("T", f"V{i}")).probs
    tail = kl_divergence_raw(m_tv, auxD.p_t.probs[:, None] * g)
    comp = regD.components
    cross_err = (0.0 if math.isinf(comp["cross"][i - 1]) and math.isinf(vals["cross"])
                 else abs(comp["cross"][i - 1] - (vals["cross"] + lp + off)))
    print(f"recon r{i}: std={abs(comp['standard'][i-1]-vals['standard']):.2e} "
          f"dec={abs(comp['dec'][i-1]-(vals['dec']+off)):.2e} "
          f"cross={cross_err:.2e} "
          f"miss={abs(comp['miss'][i-1]-(head+tail+off)):.2e}")

# noiseless common link: V1 = V2 = W
gid = np.zeros((2, 2, 2))
for w in range(2):
    gid[w, w, w] = 1.0
probN = HypothesisProblem(probD.p, probD.q, Channel((AX("W", 2),), (AX("V1", 2), AX("V2", 2)), gid), "BC")
regN = bc_diff_region(probN, labD, auxD)
print("noiseless: cross:", regN.components["cross"], "miss:", regN.components["miss"])
print("noiseless caps from std/dec only:",
      [abs(regN.caps[i] - min(regN.components["standard"][i], regN.components["dec"][i]))
       for i in (0, 1)])

# Ti constant: does cross drop?
rngt = np.random.default_rng(7)
for trial in range(6):
    aA = rand_diff_aux(100 + trial, 2, 2, 2, sharp=0.35)
    # collapse T1: deterministic T1=0, chain-marginal W rows
    kt1 = np.zeros((2, 2))
    kt1[:, 0] = 1.0
    kw1 = np.einsum("ab,abw->aw", aA.p_t1_given_t.kernel, aA.p_w1_given_t.kernel)
    kw1 = np.repeat(kw1[:, None, :], 2, axis=1)
    aB = BcDiffAux(aA.p_s1_given_x, aA.p_s2_given_x, aA.p_t,
                   Channel((AX("T", 2),), (AX("T1", 2),), kt1),
                   aA.p_t2_given_t,
                   Channel((AX("T", 2), AX("T1", 2)), (AX("W", 2),), kw1),
                   aA.p_w2_given_t)
    rA = bc_diff_region(probD, labD, aA)
    rB = bc_diff_region(probD, labD, aB)
    print(f"trial {trial}: cross1 with T1 {rA.components['cross'][0]:.6f} "
          f"const {rB.components['cross'][0]:.6f} "
          f"drop={rA.components['cross'][0] - rB.components['cross'][0]:+.6f}")

# optimize smoke
t0 = time.time()
repE = bc_optimize(prob, lab, SearchBudget(starts=2, seed=0, polish_iters=15, rounds=1))
print("optimize equal:", repE.value, "evals", repE.trace.evaluations,
      round(time.time() - t0, 1), "s")
t0 = time.time()
repD = bc_optimize(probD, labD, SearchBudget(starts=2, seed=0, polish_iters=15, rounds=1))
print("optimize diff:", repD.value, "evals", repD.trace.evaluations,
      round(time.time() - t0, 1), "s")
print("ALL SCRATCH CHECKS DONE")
