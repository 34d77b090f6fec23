"""Nine-component exponent evaluation for the two-sensor MAC setup."""

import itertools
import math

import numpy as np
import pytest
from scipy.optimize import brentq

from dhtexp import (
    COMPONENT_NAMES,
    Alphabet,
    Channel,
    HypothesisProblem,
    InfeasibleError,
    InputError,
    JointPmf,
    MacAuxChoice,
    MacSeparateAux,
    SearchBudget,
    brute_force,
    channel_capacity,
    component_problem,
    compose,
    entropy_measures,
    kl_divergence,
    mac_exponents,
    mac_gtci,
    mac_gtci_slack,
    mac_joint_law,
    mac_optimize,
    marginalize,
    multistart_maximize,
    orthogonal_optimal,
    split_orthogonal,
)

T_AX = (Alphabet("T1", 2), Alphabet("T2", 2))
F_ID = np.array([[0, 0], [1, 1]])


def build(seed, sizes):
    """Random instance plus auxiliary drawn from a single seeded stream.

    sizes = (ns1, ns2, nx1, nx2, ny, nw1, nw2, nv).
    """
    rng = np.random.default_rng(seed)
    ns1, ns2, nx1, nx2, ny, nw1, nw2, nv = sizes

    def pmf(*ss, names):
        w = rng.random(ss) + 0.05
        w /= w.sum()
        return JointPmf(tuple(Alphabet(n, s) for n, s in zip(names, ss)), w)

    def kern(ins, out):
        w = rng.random(tuple(ins) + (out,)) + 0.05
        return w / w.sum(axis=-1, keepdims=True)

    p = pmf(nx1, nx2, ny, names=("X1", "X2", "Y"))
    q = pmf(nx1, nx2, ny, names=("X1", "X2", "Y"))
    ch = Channel((Alphabet("W1", nw1), Alphabet("W2", nw2)),
                 (Alphabet("V", nv),), kern((nw1, nw2), nv))
    prob = HypothesisProblem(p, q, ch, "MAC")
    t_ax = (Alphabet("T1", nw1), Alphabet("T2", nw2))
    pt = rng.random((nw1, nw2)) + 0.2
    pt /= pt.sum()
    aux = MacAuxChoice(
        JointPmf(t_ax, pt),
        Channel((Alphabet("X1", nx1),) + t_ax, (Alphabet("S1", ns1),),
                kern((nx1, nw1, nw2), ns1)),
        Channel((Alphabet("X2", nx2),) + t_ax, (Alphabet("S2", ns2),),
                kern((nx2, nw1, nw2), ns2)),
        rng.integers(0, nw1, (ns1, nx1)), rng.integers(0, nw2, (ns2, nx2)))
    return prob, aux


def bsc(r):
    return np.array([[1.0 - r, r], [r, 1.0 - r]])


def aux_from_rows(k1, k2, f1, f2, pt=None):
    """Quantizers constant in (T1, T2); row i of k gives P(S | X = i)."""
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    if pt is None:
        pt = np.full((2, 2), 0.25)
    return MacAuxChoice(
        JointPmf(T_AX, np.asarray(pt, dtype=float)),
        Channel((Alphabet("X1", k1.shape[0]),) + T_AX, (Alphabet("S1", k1.shape[1]),),
                np.broadcast_to(k1[:, None, None, :],
                                (k1.shape[0], 2, 2, k1.shape[1])).copy()),
        Channel((Alphabet("X2", k2.shape[0]),) + T_AX, (Alphabet("S2", k2.shape[1]),),
                np.broadcast_to(k2[:, None, None, :],
                                (k2.shape[0], 2, 2, k2.shape[1])).copy()),
        np.asarray(f1), np.asarray(f2))


def noiseless_pair():
    # both inputs delivered intact as v = 2 w1 + w2
    k = np.zeros((2, 2, 4))
    for w1, w2 in itertools.product(range(2), range(2)):
        k[w1, w2, 2 * w1 + w2] = 1.0
    return Channel((Alphabet("W1", 2), Alphabet("W2", 2)), (Alphabet("V", 4),), k)


def xor_bsc(flip):
    k = np.zeros((2, 2, 2))
    for w1, w2, v in itertools.product(range(2), repeat=3):
        k[w1, w2, v] = 1.0 - flip if v == (w1 + w2) % 2 else flip
    return Channel((Alphabet("W1", 2), Alphabet("W2", 2)), (Alphabet("V", 2),), k)


def ortho_channel(r1, r2):
    k = np.zeros((2, 2, 4))
    b1, b2 = bsc(r1), bsc(r2)
    for w1, w2, v1, v2 in itertools.product(range(2), repeat=4):
        k[w1, w2, 2 * v1 + v2] = b1[w1, v1] * b2[w2, v2]
    return Channel((Alphabet("W1", 2), Alphabet("W2", 2)), (Alphabet("V", 4),), k)


def ortho_problem(r1, r2, flip=0.25):
    """Uniform independent sources, Y = (X1 xor X2) seen through BSC(flip),
    alternative keeps the marginals but drops the dependence; BSC(r_i) links."""
    p_x = np.full((2, 2), 0.25)
    y_cond = np.zeros((2, 2, 2))
    for x1, x2 in itertools.product(range(2), range(2)):
        y_cond[x1, x2] = bsc(flip)[(x1 + x2) % 2]
    probs_p = p_x[..., None] * y_cond
    p_y = probs_p.sum(axis=(0, 1))
    probs_q = p_x[..., None] * p_y[None, None, :]
    axes = (Alphabet("X1", 2), Alphabet("X2", 2), Alphabet("Y", 2))
    return HypothesisProblem(JointPmf(axes, probs_p), JointPmf(axes, probs_q),
                             ortho_channel(r1, r2), "MAC")


def split_problem(rng, flip=0.05):
    """(X1, X2, Z) shared across hypotheses; Yb independent of the sources
    given Z under the alternative."""
    p_xz = rng.random((2, 2, 2)) + 0.05
    p_xz /= p_xz.sum()
    p_yb = rng.random((2, 2, 2, 2)) + 0.05
    p_yb /= p_yb.sum(axis=-1, keepdims=True)
    probs_p = np.einsum("abz,abzy->abyz", p_xz, p_yb)
    q_cond = rng.random((2, 2)) + 0.05
    q_cond /= q_cond.sum(axis=-1, keepdims=True)
    probs_q = np.einsum("abz,zy->abyz", p_xz, q_cond)
    axes = (Alphabet("X1", 2), Alphabet("X2", 2), Alphabet("Yb", 2), Alphabet("Z", 2))
    return HypothesisProblem(JointPmf(axes, probs_p), JointPmf(axes, probs_q),
                             xor_bsc(flip), "MAC")


def constant_quantizer_aux():
    return aux_from_rows([[1.0], [1.0]], [[1.0], [1.0]],
                         np.zeros((1, 2), dtype=int), np.zeros((1, 2), dtype=int))


@pytest.fixture(scope="module")
def binary_reports():
    # full binary scope through both solver routes; shared by several checks
    prob, aux = build(7, (2, 2, 2, 2, 2, 2, 2, 2))
    rep = mac_exponents(prob, aux)
    rep_pen = mac_exponents(prob, aux, method="penalty")
    return prob, aux, rep, rep_pen


@pytest.fixture(scope="module")
def half_capacity():
    # per-sensor links tuned so each side carries exactly half a bit
    r = brentq(lambda t: 1.0 + t * math.log2(t) + (1 - t) * math.log2(1 - t) - 0.5,
               1e-6, 0.5 - 1e-9)
    prob = ortho_problem(r, r)
    return prob, orthogonal_optimal(prob)


def test_component_table_covers_nine():
    prob, aux = build(12, (2, 1, 2, 1, 2, 1, 1, 2))
    assert len(COMPONENT_NAMES) == 9
    assert len(set(COMPONENT_NAMES)) == 9
    law_axes = ("X1", "X2", "Y", "T1", "T2", "S1", "S2", "V")
    drop1 = ("X2", "Y", "T1", "T2", "S2", "V")
    drop2 = ("X1", "Y", "T1", "T2", "S1", "V")
    ref_axes = {"standard": law_axes, "dec1": law_axes, "dec2": law_axes,
                "dec12": law_axes, "miss1a": drop1, "miss1b": drop1,
                "miss2a": drop2, "miss2b": drop2, "miss12": ("Y", "T1", "T2", "V")}
    n_marginals = {"standard": 3, "dec1": 3, "dec2": 3, "dec12": 3,
                   "miss1a": 2, "miss1b": 2, "miss2a": 2, "miss2b": 2, "miss12": 1}
    floored = {"dec1", "dec2", "dec12", "miss1a", "miss2a"}
    for name in COMPONENT_NAMES:
        cp = component_problem(name, prob, aux)
        assert cp.reference.names == ref_axes[name]
        assert len(cp.marginals) == n_marginals[name]
        assert (cp.entropy is not None) == (name in floored)
    with pytest.raises(InputError, match="unknown component"):
        component_problem("dec3", prob, aux)


def test_joint_law_matches_direct_summation():
    prob, aux = build(3, (2, 2, 2, 2, 2, 2, 2, 2))
    law = mac_joint_law(prob, aux)
    assert law.names == ("X1", "X2", "Y", "T1", "T2", "S1", "S2", "V")
    k1 = aux.p_s1_given_x1_t.kernel
    k2 = aux.p_s2_given_x2_t.kernel
    g = prob.channel.kernel
    direct = np.zeros(law.probs.shape)
    for x1, x2, y, t1, t2, s1, s2, v in itertools.product(
            *map(range, law.probs.shape)):
        direct[x1, x2, y, t1, t2, s1, s2, v] = (
            prob.p.probs[x1, x2, y] * aux.p_t1t2.probs[t1, t2]
            * k1[x1, t1, t2, s1] * k2[x2, t1, t2, s2]
            * g[aux.f1[s1, x1], aux.f2[s2, x2], v])
    assert np.max(np.abs(law.probs - direct)) < 1e-14

    # full reference: same construction under the alternative source law
    full = component_problem("standard", prob, aux).reference
    direct_q = np.zeros(full.probs.shape)
    for x1, x2, y, t1, t2, s1, s2, v in itertools.product(
            *map(range, full.probs.shape)):
        direct_q[x1, x2, y, t1, t2, s1, s2, v] = (
            prob.q.probs[x1, x2, y] * aux.p_t1t2.probs[t1, t2]
            * k1[x1, t1, t2, s1] * k2[x2, t1, t2, s2]
            * g[aux.f1[s1, x1], aux.f2[s2, x2], v])
    assert np.max(np.abs(full.probs - direct_q)) < 1e-14

    # first sensor dropped: Q_{X2 Y}, and T1 drives the channel directly
    drop1 = component_problem("miss1a", prob, aux).reference
    q_x2y = marginalize(prob.q, keep=("X2", "Y")).probs
    direct1 = np.zeros(drop1.probs.shape)
    for x2, y, t1, t2, s2, v in itertools.product(*map(range, drop1.probs.shape)):
        direct1[x2, y, t1, t2, s2, v] = (
            q_x2y[x2, y] * aux.p_t1t2.probs[t1, t2] * k2[x2, t1, t2, s2]
            * g[t1, aux.f2[s2, x2], v])
    assert np.max(np.abs(drop1.probs - direct1)) < 1e-14

    # both dropped: Q_Y times the protected-input channel
    chan_ref = component_problem("miss12", prob, aux).reference
    directc = np.einsum("y,ab,abv->yabv", marginalize(prob.q, keep=("Y",)).probs,
                        aux.p_t1t2.probs, g)
    assert np.max(np.abs(chan_ref.probs - directc)) < 1e-14


def test_components_match_brute_force():
    # grid steps per component keep each eliminated-coordinate lattice inside
    # the point budget while still bracketing the optimum
    cases = [
        (12, (2, 1, 2, 1, 2, 1, 1, 2),
         {"standard": 1 / 8, "dec1": 1 / 4, "dec2": 1 / 8, "dec12": 1 / 4,
          "miss1a": 1 / 16, "miss1b": 1 / 16, "miss2a": 1 / 4, "miss2b": 1 / 8,
          "miss12": 1 / 16}),
        (11, (2, 2, 2, 1, 2, 1, 1, 1),
         {"standard": 1 / 8, "dec1": 0.24, "dec2": 0.24, "dec12": 0.3,
          "miss1a": 1 / 32, "miss1b": 1 / 32, "miss2a": 1 / 4, "miss2b": 1 / 8,
          "miss12": 1 / 32}),
    ]
    for seed, sizes, steps in cases:
        prob, aux = build(seed, sizes)
        rep = mac_exponents(prob, aux)
        for name in COMPONENT_NAMES:
            bf = brute_force(component_problem(name, prob, aux),
                             grid_step=steps[name])
            assert abs(rep.divergences[name] - bf.value) <= 1e-3, (seed, name)


def test_solver_routes_agree(binary_reports):
    _prob, _aux, rep, rep_pen = binary_reports
    for name in COMPONENT_NAMES:
        a, b = rep.components[name], rep_pen.components[name]
        assert abs(a - b) <= 2e-6 or (math.isinf(a) and math.isinf(b)), name


def test_minimized_divergence_orderings(binary_reports):
    reports = [binary_reports[2], binary_reports[3]]
    for seed in (21, 22, 23):
        prob, aux = build(seed, (2, 2, 2, 2, 2, 1, 1, 2))
        reports.append(mac_exponents(prob, aux))
    for rep in reports:
        dv = rep.divergences
        assert dv["miss1a"] <= dv["miss1b"] + 1e-6
        assert dv["miss2a"] <= dv["miss2b"] + 1e-6
        for name in ("dec1", "dec2", "standard"):
            assert dv["dec12"] <= dv[name] + 1e-6


def test_identical_hypotheses_noiseless_channel():
    rng = np.random.default_rng(2)
    w = rng.random((2, 2, 2)) + 0.05
    w /= w.sum()
    axes = (Alphabet("X1", 2), Alphabet("X2", 2), Alphabet("Y", 2))
    p = JointPmf(axes, w)
    prob = HypothesisProblem(p, p, noiseless_pair(), "MAC")
    rep = mac_exponents(prob, aux_from_rows(np.eye(2), np.eye(2), F_ID, F_ID))
    assert rep.feasible
    assert rep.theta == min(rep.components.values())
    assert abs(rep.components["standard"]) <= 1e-6
    assert -1e-9 <= rep.theta <= 1e-6
    for name in ("dec1", "dec2", "dec12"):
        assert rep.components[name] >= -1e-9
    # the decoder cannot be fooled into a miss when every symbol arrives
    # intact, so those references put no mass where the law does
    for name in ("miss1a", "miss1b", "miss2a", "miss2b", "miss12"):
        assert math.isinf(rep.components[name])


def test_uncoded_transmission_is_feasible():
    rng = np.random.default_rng(4)
    w = rng.random((2, 2, 2)) + 0.05
    w /= w.sum()
    u = rng.random((2, 2, 2)) + 0.05
    u /= u.sum()
    axes = (Alphabet("X1", 2), Alphabet("X2", 2), Alphabet("Y", 2))
    prob = HypothesisProblem(JointPmf(axes, w), JointPmf(axes, u),
                             noiseless_pair(), "MAC")
    # constant S with f_i(s, x) = x: raw observations on the channel
    aux = aux_from_rows([[1.0], [1.0]], [[1.0], [1.0]],
                        np.array([[0, 1]]), np.array([[0, 1]]))
    rep = mac_exponents(prob, aux)
    assert rep.feasible
    assert rep.theta > 1e-3
    assert rep.active in COMPONENT_NAMES


def test_rate_conditions_gate_theta():
    rng = np.random.default_rng(5)
    w = rng.random((2, 2, 2)) + 0.05
    w /= w.sum()
    u = rng.random((2, 2, 2)) + 0.05
    u /= u.sum()
    axes = (Alphabet("X1", 2), Alphabet("X2", 2), Alphabet("Y", 2))
    useless = Channel((Alphabet("W1", 1), Alphabet("W2", 1)),
                      (Alphabet("V", 1),), np.ones((1, 1, 1)))
    prob = HypothesisProblem(JointPmf(axes, w), JointPmf(axes, u), useless, "MAC")
    t_ax = (Alphabet("T1", 1), Alphabet("T2", 1))
    eye = np.broadcast_to(np.eye(2)[:, None, None, :], (2, 1, 1, 2)).copy()
    aux = MacAuxChoice(
        JointPmf(t_ax, np.ones((1, 1))),
        Channel((Alphabet("X1", 2),) + t_ax, (Alphabet("S1", 2),), eye),
        Channel((Alphabet("X2", 2),) + t_ax, (Alphabet("S2", 2),), eye),
        np.zeros((2, 2), dtype=int), np.zeros((2, 2), dtype=int))
    # lossless quantizers over a channel that carries nothing: every rate
    # condition fails, yet the component values themselves stay defined
    rep = mac_exponents(prob, aux)
    assert not rep.feasible
    assert math.isnan(rep.theta)
    assert rep.active == ""
    for name in COMPONENT_NAMES:
        assert math.isfinite(rep.divergences[name])
        assert rep.divergences[name] >= -1e-9


def test_standard_attains_component_minimum():
    # revealing channel (V recovers both S_i exactly) with f_i(s, x) = s:
    # no decoding-error component can then undercut the standard one
    for seed in (0, 1):
        rng = np.random.default_rng(seed)
        p_x = rng.random((2, 2)) + 0.1
        p_x /= p_x.sum()
        p_y_cond = rng.random((2, 2, 2)) + 0.05
        p_y_cond /= p_y_cond.sum(axis=-1, keepdims=True)
        probs_p = p_x[..., None] * p_y_cond
        qy = rng.random(2) + 0.2
        qy /= qy.sum()
        probs_q = p_x[..., None] * qy[None, None, :]
        axes = (Alphabet("X1", 2), Alphabet("X2", 2), Alphabet("Y", 2))
        prob = HypothesisProblem(JointPmf(axes, probs_p), JointPmf(axes, probs_q),
                                 noiseless_pair(), "MAC")
        a1, a2 = rng.uniform(0.05, 0.45, 2)
        aux = aux_from_rows(bsc(a1), bsc(a2), F_ID, F_ID)
        law = mac_joint_law(prob, aux)
        gaps = (entropy_measures(law, ("S1",), ("S2", "T1", "T2"), ("X1",))
                - entropy_measures(law, ("S1",), ("S2", "T1", "T2"), ("V",)),
                entropy_measures(law, ("S2",), ("S1", "T1", "T2"), ("X2",))
                - entropy_measures(law, ("S2",), ("S1", "T1", "T2"), ("V",)),
                entropy_measures(law, ("S1", "S2"), ("T1", "T2"), ("X1", "X2"))
                - entropy_measures(law, ("S1", "S2"), ("T1", "T2"), ("V",)))
        assert max(gaps) <= 1e-9
        rep = mac_exponents(prob, aux)
        assert rep.feasible
        for name in ("dec1", "dec2", "dec12"):
            assert rep.components["standard"] <= rep.components[name] + 1e-6


def test_split_value_matches_direct_summation():
    rng = np.random.default_rng(6)
    prob = split_problem(rng)

    def soft_aux():
        pt = rng.random((2, 2)) + 0.2
        pt /= pt.sum()
        k1 = 0.65 * 0.5 + 0.35 * rng.dirichlet(np.ones(2), size=(2, 2, 2))
        k2 = 0.65 * 0.5 + 0.35 * rng.dirichlet(np.ones(2), size=(2, 2, 2))
        return MacAuxChoice(
            JointPmf(T_AX, pt),
            Channel((Alphabet("X1", 2),) + T_AX, (Alphabet("S1", 2),), k1),
            Channel((Alphabet("X2", 2),) + T_AX, (Alphabet("S2", 2),), k2),
            F_ID, F_ID)

    for _ in range(200):
        aux = soft_aux()
        if mac_gtci_slack(prob, aux, "hybrid") <= 1e-9:
            break
    else:
        pytest.fail("no feasible hybrid auxiliary in 200 drawn")
    val = mac_gtci(prob, aux, "hybrid")

    # dense joint over (X1, X2, Yb, Z, T1, T2, S1, S2, V), built by loops
    k1 = aux.p_s1_given_x1_t.kernel
    k2 = aux.p_s2_given_x2_t.kernel
    g = prob.channel.kernel
    shape = (2, 2, 2, 2, 2, 2, 2, 2, 2)
    dense = np.zeros(shape)
    for x1, x2, yb, z, t1, t2, s1, s2, v in itertools.product(*map(range, shape)):
        dense[x1, x2, yb, z, t1, t2, s1, s2, v] = (
            prob.p.probs[x1, x2, yb, z] * aux.p_t1t2.probs[t1, t2]
            * k1[x1, t1, t2, s1] * k2[x2, t1, t2, s2]
            * g[aux.f1[s1, x1], aux.f2[s2, x2], v])
    axes9 = prob.p.axes + T_AX + (Alphabet("S1", 2), Alphabet("S2", 2),
                                  Alphabet("V", 2))
    joint = JointPmf(axes9, dense)
    q_yz = marginalize(prob.q, keep=("Yb", "Z")).probs
    qk = q_yz / q_yz.sum(axis=0, keepdims=True)
    m = marginalize(joint, keep=("Yb", "Z", "T1", "T2", "V")).probs
    term = 0.0
    for yb, z, t1, t2, v in itertools.product(*map(range, m.shape)):
        if m[yb, z, t1, t2, v] > 0:
            term += m[yb, z, t1, t2, v] * math.log2(
                m[yb, z, t1, t2, v] / m[:, z, t1, t2, v].sum() / qk[yb, z])
    term += entropy_measures(joint, ("S1", "S2"), ("Z", "T1", "T2", "V"), ("Yb",))
    assert abs(val - term) <= 1e-10

    # separate mode: the channel block never touches the source-side value
    sep = MacSeparateAux(
        Channel((Alphabet("X1", 2),), (Alphabet("S1", 2),),
                0.65 * 0.5 + 0.35 * rng.dirichlet(np.ones(2), size=2)),
        Channel((Alphabet("X2", 2),), (Alphabet("S2", 2),),
                0.65 * 0.5 + 0.35 * rng.dirichlet(np.ones(2), size=2)),
        JointPmf(T_AX, np.full((2, 2), 0.25)),
        Channel(T_AX, (Alphabet("W1", 2),),
                np.broadcast_to(np.array([0.85, 0.15]), (2, 2, 2)).copy()),
        Channel(T_AX, (Alphabet("W2", 2),),
                np.broadcast_to(np.array([0.2, 0.8]), (2, 2, 2)).copy()))
    assert mac_gtci_slack(prob, sep, "separate") <= 1e-9
    vs = mac_gtci(prob, sep, "separate")
    shape6 = (2, 2, 2, 2, 2, 2)
    src = np.zeros(shape6)
    r1 = sep.p_s1_given_x1.kernel
    r2 = sep.p_s2_given_x2.kernel
    for x1, x2, yb, z, s1, s2 in itertools.product(*map(range, shape6)):
        src[x1, x2, yb, z, s1, s2] = (prob.p.probs[x1, x2, yb, z]
                                      * r1[x1, s1] * r2[x2, s2])
    joint6 = JointPmf(prob.p.axes + (Alphabet("S1", 2), Alphabet("S2", 2)), src)
    mz = marginalize(joint6, keep=("Yb", "Z")).probs
    term2 = 0.0
    for yb, z in itertools.product(range(2), range(2)):
        if mz[yb, z] > 0:
            term2 += mz[yb, z] * math.log2(mz[yb, z] / mz[:, z].sum() / qk[yb, z])
    term2 += entropy_measures(joint6, ("S1", "S2"), ("Z",), ("Yb",))
    assert abs(vs - term2) <= 1e-10


def test_split_zero_information_channel():
    rng = np.random.default_rng(8)
    base = split_problem(rng)
    # alternative regenerates Yb from the null conditional, and the channel
    # output ignores its inputs: nothing distinguishes the hypotheses
    p_yz = marginalize(base.p, keep=("Yb", "Z")).probs
    q_cond = (p_yz / p_yz.sum(axis=0, keepdims=True)).T
    p_xz = marginalize(base.p, keep=("X1", "X2", "Z")).probs
    q0 = np.einsum("abz,zy->abyz", p_xz, q_cond)
    ch0 = Channel((Alphabet("W1", 2), Alphabet("W2", 2)), (Alphabet("V", 2),),
                  np.broadcast_to(np.array([0.6, 0.4]), (2, 2, 2)).copy())
    prob = HypothesisProblem(base.p, JointPmf(base.p.axes, q0), ch0, "MAC")
    aux = constant_quantizer_aux()
    assert abs(mac_gtci(prob, aux, "hybrid")) <= 1e-9
    sep = MacSeparateAux(
        Channel((Alphabet("X1", 2),), (Alphabet("S1", 1),), np.ones((2, 1))),
        Channel((Alphabet("X2", 2),), (Alphabet("S2", 1),), np.ones((2, 1))),
        JointPmf(T_AX, np.full((2, 2), 0.25)),
        Channel(T_AX, (Alphabet("W1", 2),), np.full((2, 2, 2), 0.5)),
        Channel(T_AX, (Alphabet("W2", 2),), np.full((2, 2, 2), 0.5)))
    assert abs(mac_gtci(prob, sep, "separate")) <= 1e-9


def test_split_structure_and_mode_checks():
    rng = np.random.default_rng(10)
    good = split_problem(rng)
    aux = constant_quantizer_aux()
    bad_dep = HypothesisProblem(good.p, good.p, good.channel, "MAC")
    with pytest.raises(InputError, match="dependent given Z"):
        mac_gtci(bad_dep, aux)
    other = split_problem(np.random.default_rng(11))
    mixed = HypothesisProblem(good.p, other.q, good.channel, "MAC")
    with pytest.raises(InputError, match="laws differ"):
        mac_gtci(mixed, aux)
    with pytest.raises(InputError, match="mode must be"):
        mac_gtci(good, aux, "joint")
    with pytest.raises(InputError, match="hybrid mode evaluates"):
        mac_gtci_slack(good, object(), "hybrid")
    with pytest.raises(InputError, match="separate mode evaluates"):
        mac_gtci(good, aux, "separate")
    flat, _ = build(1, (2, 2, 2, 2, 2, 2, 2, 2))
    with pytest.raises(InputError, match="conditional-independence form needs"):
        mac_gtci(flat, aux)
    # lossless quantizers over a zero-information channel break every rate pair
    ch0 = Channel((Alphabet("W1", 2), Alphabet("W2", 2)), (Alphabet("V", 2),),
                  np.broadcast_to(np.array([0.6, 0.4]), (2, 2, 2)).copy())
    hard = HypothesisProblem(good.p, good.q, ch0, "MAC")
    sharp = aux_from_rows(np.eye(2), np.eye(2), F_ID, F_ID)
    assert mac_gtci_slack(hard, sharp, "hybrid") > 1e-6
    with pytest.raises(InfeasibleError, match="rate conditions violated"):
        mac_gtci(hard, sharp, "hybrid")


def test_separate_search_matches_orthogonal(half_capacity):
    pr, v_opt = half_capacity
    axes4 = (Alphabet("X1", 2), Alphabet("X2", 2), Alphabet("Yb", 2),
             Alphabet("Z", 1))
    prob = HypothesisProblem(JointPmf(axes4, pr.p.probs[..., None]),
                             JointPmf(axes4, pr.q.probs[..., None]),
                             pr.channel, "MAC")
    base = kl_divergence(marginalize(prob.p, keep=("Yb", "Z")),
                         marginalize(prob.q, keep=("Yb", "Z")))
    pt = JointPmf(T_AX, np.full((2, 2), 0.25))
    pw1 = Channel(T_AX, (Alphabet("W1", 2),), np.full((2, 2, 2), 0.5))
    pw2 = Channel(T_AX, (Alphabet("W2", 2),), np.full((2, 2, 2), 0.5))

    def build_sep(k1, k2):
        return MacSeparateAux(
            Channel((Alphabet("X1", 2),), (Alphabet("S1", 3),), k1),
            Channel((Alphabet("X2", 2),), (Alphabet("S2", 3),), k2), pt, pw1, pw2)

    def objective(arrays):
        aux = build_sep(*arrays)
        viol = mac_gtci_slack(prob, aux, "separate")
        src = compose(compose(prob.p, aux.p_s1_given_x1), aux.p_s2_given_x2)
        value = base + entropy_measures(src, ("S1", "S2"), ("Z",), ("Yb",))
        return value - 1e4 * viol if viol > 1e-9 else value

    arrays, v_sep, _trace = multistart_maximize(
        objective, [(2, 3), (2, 3)],
        SearchBudget(starts=16, seed=0, polish_iters=300, rounds=2))
    best = build_sep(*arrays)
    assert mac_gtci_slack(prob, best, "separate") <= 1e-9
    assert abs(mac_gtci(prob, best, "separate") - v_sep) <= 1e-9
    assert abs(v_sep - v_opt) <= 2e-3


def test_orthogonal_capacity_limits():
    pr0 = ortho_problem(0.5, 0.5)
    base = kl_divergence(marginalize(pr0.p, keep=("Y",)),
                         marginalize(pr0.q, keep=("Y",)))
    assert abs(orthogonal_optimal(pr0) - base) <= 1e-9
    pr1 = ortho_problem(0.0, 0.0)
    ixy = entropy_measures(pr1.p, ("X1", "X2"), (), ("Y",))
    assert abs(orthogonal_optimal(pr1) - ixy) <= 1e-6


def test_orthogonal_matches_restricted_grid(half_capacity):
    prob, v_opt = half_capacity
    ch1, ch2 = split_orthogonal(prob.channel)
    c1, c2 = channel_capacity(ch1), channel_capacity(ch2)
    assert abs(c1 - 0.5) <= 1e-9
    assert abs(c2 - 0.5) <= 1e-9
    base = kl_divergence(marginalize(prob.p, keep=("Y",)),
                         marginalize(prob.q, keep=("Y",)))

    # dense sweep over the symmetric binary quantizer family
    best = -1.0
    for a1 in np.linspace(0.0, 0.5, 201):
        j1 = compose(prob.p, Channel((Alphabet("X1", 2),), (Alphabet("S1", 2),),
                                     bsc(a1)))
        for a2 in np.linspace(0.0, 0.5, 201):
            joint = compose(j1, Channel((Alphabet("X2", 2),), (Alphabet("S2", 2),),
                                        bsc(a2)))
            if entropy_measures(joint, ("S1",), ("S2",), ("X1",)) > c1 + 1e-12:
                continue
            if entropy_measures(joint, ("S2",), ("S1",), ("X2",)) > c2 + 1e-12:
                continue
            if entropy_measures(joint, ("S1", "S2"), (), ("X1", "X2")) \
                    > c1 + c2 + 1e-12:
                continue
            best = max(best, entropy_measures(joint, ("S1", "S2"), (), ("Y",)))
    assert best >= 0.0
    assert abs(v_opt - (base + best)) <= 2e-3


def test_orthogonal_monotone_in_link_quality():
    vals = [orthogonal_optimal(ortho_problem(r, 0.3)) for r in (0.5, 0.25, 0.05)]
    assert vals[0] <= vals[1] + 1e-6
    assert vals[1] <= vals[2] + 1e-6
    assert vals[2] > vals[0] + 1e-3


def test_orthogonal_input_validation():
    pr = ortho_problem(0.1, 0.2)
    axes = pr.p.axes
    rng = np.random.default_rng(13)
    w = rng.random((2, 2, 2)) + 0.05
    w /= w.sum()
    dep = HypothesisProblem(JointPmf(axes, w), pr.q, pr.channel, "MAC")
    with pytest.raises(InputError, match="sources are dependent"):
        orthogonal_optimal(dep)
    p_y = marginalize(pr.p, keep=("Y",)).probs
    skew = np.einsum("a,b,y->aby", np.array([0.3, 0.7]), np.array([0.5, 0.5]), p_y)
    with pytest.raises(InputError, match="source laws differ"):
        orthogonal_optimal(HypothesisProblem(pr.p, JointPmf(axes, skew),
                                             pr.channel, "MAC"))
    with pytest.raises(InputError, match="does not factor as a product"):
        orthogonal_optimal(HypothesisProblem(pr.p, pr.p, pr.channel, "MAC"))
    with pytest.raises(InputError, match="orthogonal per-sensor links"):
        orthogonal_optimal(HypothesisProblem(pr.p, pr.q, xor_bsc(0.1), "MAC"))
    with pytest.raises(InputError, match="tol must lie"):
        orthogonal_optimal(pr, tol=0.01)
    four = split_problem(np.random.default_rng(14))
    with pytest.raises(InputError, match="orthogonal form needs source axes"):
        orthogonal_optimal(four)


def test_split_orthogonal_roundtrip():
    ch1, ch2 = split_orthogonal(ortho_channel(0.1, 0.2))
    assert np.max(np.abs(ch1.kernel - bsc(0.1))) <= 1e-9
    assert np.max(np.abs(ch2.kernel - bsc(0.2))) <= 1e-9

    def h2(r):
        return -r * math.log2(r) - (1 - r) * math.log2(1 - r)

    assert abs(channel_capacity(ch1) - (1 - h2(0.1))) <= 1e-9
    assert abs(channel_capacity(ch2) - (1 - h2(0.2))) <= 1e-9
    with pytest.raises(InputError, match="does not factor"):
        split_orthogonal(xor_bsc(0.1))


def test_optimize_runs_and_reports_feasible():
    rng = np.random.default_rng(15)
    w = rng.random((2, 2, 2)) + 0.05
    w /= w.sum()
    axes = (Alphabet("X1", 2), Alphabet("X2", 2), Alphabet("Y", 2))
    p = JointPmf(axes, w)
    blind = Channel((Alphabet("W1", 1), Alphabet("W2", 1)), (Alphabet("V", 1),),
                    np.ones((1, 1, 1)))
    prob = HypothesisProblem(p, p, blind, "MAC")
    rep = mac_optimize(prob, SearchBudget(starts=2, seed=1, polish_iters=20,
                                          rounds=1))
    assert rep.feasible
    assert rep.aux is not None
    assert rep.trace.evaluations > 0
    assert rep.theta >= -1e-9
    # fixed maps take the same path without the enumeration
    f0 = np.zeros((3, 2), dtype=int)
    rep2 = mac_optimize(prob, SearchBudget(starts=1, seed=2, polish_iters=10,
                                           rounds=1), f1=f0, f2=f0)
    assert rep2.feasible
    with pytest.raises(InputError, match="both f1 and f2"):
        mac_optimize(prob, f1=f0)


def test_aux_and_problem_validation():
    prob, aux = build(12, (2, 1, 2, 1, 2, 1, 1, 2))
    with pytest.raises(InputError, match="integer array"):
        MacAuxChoice(aux.p_t1t2, aux.p_s1_given_x1_t, aux.p_s2_given_x2_t,
                     aux.f1.astype(float), aux.f2)
    with pytest.raises(InputError, match="values must lie"):
        MacAuxChoice(aux.p_t1t2, aux.p_s1_given_x1_t, aux.p_s2_given_x2_t,
                     aux.f1 + 5, aux.f2)
    with pytest.raises(InputError, match="pmf over axes"):
        MacAuxChoice(JointPmf((Alphabet("A", 1), Alphabet("T2", 1)),
                              np.ones((1, 1))),
                     aux.p_s1_given_x1_t, aux.p_s2_given_x2_t, aux.f1, aux.f2)
    with pytest.raises(InputError, match="must map axes"):
        MacAuxChoice(aux.p_t1t2, aux.p_s2_given_x2_t, aux.p_s2_given_x2_t,
                     aux.f1, aux.f2)
    big = JointPmf(T_AX, np.full((2, 2), 0.25))
    with pytest.raises(InputError, match="T-axis sizes"):
        MacAuxChoice(big, aux.p_s1_given_x1_t, aux.p_s2_given_x2_t,
                     aux.f1, aux.f2)
    # problem-side checks
    dmc_prob = HypothesisProblem(
        JointPmf((Alphabet("X", 2), Alphabet("Y", 2)), np.full((2, 2), 0.25)),
        JointPmf((Alphabet("X", 2), Alphabet("Y", 2)), np.full((2, 2), 0.25)),
        Channel((Alphabet("W", 2),), (Alphabet("V", 2),), bsc(0.1)), "DMC")
    with pytest.raises(InputError, match="expected MAC problem"):
        mac_exponents(dmc_prob, aux)
    four = split_problem(np.random.default_rng(16))
    sharp = aux_from_rows(np.eye(2), np.eye(2), F_ID, F_ID)
    with pytest.raises(InputError, match="component evaluation needs"):
        mac_exponents(four, sharp)
    wide, waux = build(17, (2, 2, 2, 1, 5, 1, 1, 2))
    with pytest.raises(InputError, match="exceed the cap"):
        mac_exponents(wide, waux)
    relaxed = mac_exponents(wide, waux, cap=5)
    assert set(relaxed.components) == set(COMPONENT_NAMES)
    mismatched, _ = build(18, (2, 2, 2, 2, 2, 1, 1, 2))
    with pytest.raises(InputError, match="range over the channel input"):
        mac_exponents(mismatched, aux_from_rows(np.eye(2), np.eye(2),
                                                F_ID, F_ID))
