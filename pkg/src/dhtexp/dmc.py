"""Point-to-point exponents over a noisy channel.

Three error exponents compete for a fixed auxiliary choice (quantization
kernel on the source side, protected time-sharing pair on the channel side):
the standard typicality exponent, the binning/decoding exponent, and the
miss-detection exponent of the protected zero-message. The achievable
exponent is their minimum, subject to the rate condition
I(S;X|Y) <= I(W;V|T). Outer maximization over auxiliaries is a heuristic
multi-start search; closed-form anchors keep it honest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .probability import (
    Alphabet,
    Channel,
    HypothesisProblem,
    InfeasibleError,
    InputError,
    JointPmf,
    channel_capacity,
    compose,
    entropy_measures,
    kl_divergence,
    kl_divergence_raw,
    marginalize,
    product,
)
from .projection import CouplingProblem, EntropyFloor, MarginalConstraint, solve
from .search import SearchBudget, SearchTrace, multistart_maximize

FEAS_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class DmcAuxChoice:
    """Auxiliary choice: P_{S|X}, P_T, P_{W|T}.

    The time-sharing symbol T ranges over the channel input alphabet, so the
    protected zero-message can be transmitted as a pure input sequence.
    """

    p_s_given_x: Channel
    p_t: JointPmf
    p_w_given_t: Channel

    def __post_init__(self):
        if self.p_s_given_x.input_names != ("X",) or self.p_s_given_x.output_names != ("S",):
            raise InputError("p_s_given_x must map axis X to axis S")
        if self.p_t.names != ("T",):
            raise InputError("p_t must be a pmf over axis T")
        if self.p_w_given_t.input_names != ("T",) or self.p_w_given_t.output_names != ("W",):
            raise InputError("p_w_given_t must map axis T to axis W")
        nx, ns = self.p_s_given_x.kernel.shape
        if ns > nx + 2:
            raise InputError(f"|S| = {ns} exceeds |X| + 2 = {nx + 2}")
        nt, nw = self.p_w_given_t.kernel.shape
        if self.p_t.probs.shape[0] != nt:
            raise InputError("p_t size does not match p_w_given_t input")
        if nt != nw:
            raise InputError("T must range over the channel input alphabet")


@dataclass(frozen=True, eq=False)
class ExponentReport:
    """theta: achieved exponent (min over components; nan when the rate
    condition fails); argmins: optimizing couplings per component, None for
    closed-form components."""

    theta: float
    components: dict
    active: str
    feasible: bool
    argmins: dict
    aux: DmcAuxChoice | None = None
    trace: SearchTrace | None = None


def _check_dmc(prob: HypothesisProblem, aux: DmcAuxChoice):
    if prob.variant != "DMC":
        raise InputError(f"expected DMC problem, got {prob.variant}")
    nx = prob.p.axis("X").size
    nw = prob.channel.kernel.shape[0]
    if aux.p_s_given_x.kernel.shape[0] != nx:
        raise InputError("p_s_given_x input size does not match |X|")
    if aux.p_w_given_t.kernel.shape[1] != nw:
        raise InputError("p_w_given_t output size does not match the channel input")
    if aux.p_t.probs.shape[0] != nw:
        raise InputError("T must range over the channel input alphabet")


def _law(prob: HypothesisProblem, aux: DmcAuxChoice) -> JointPmf:
    """Joint law of (X, Y, S, T, W, V) under the null hypothesis."""
    source = compose(prob.p, aux.p_s_given_x)
    channel = compose(compose(aux.p_t, aux.p_w_given_t), prob.channel)
    return product(source, channel)


def _channel_penalty(law: JointPmf, prob: HypothesisProblem) -> float:
    """sum_t P_T(t) D(P_{V|T=t} || channel row at input t)."""
    tv = marginalize(law, keep=("T", "V")).probs
    pt = tv.sum(axis=1)
    total = 0.0
    for t in range(tv.shape[0]):
        if pt[t] <= 0.0:
            continue
        total += pt[t] * kl_divergence_raw(tv[t] / pt[t], prob.channel.kernel[t])
        if math.isinf(total):
            return math.inf
    return float(total)


def dmc_exponents(prob: HypothesisProblem, aux: DmcAuxChoice,
                  tol: float = 1e-6, method: str = "ipf") -> ExponentReport:
    """Evaluate the three competing exponents for one auxiliary choice."""
    _check_dmc(prob, aux)
    law = _law(prob, aux)
    i_sx_y = entropy_measures(law, ("S",), conditioning_axes=("Y",), versus_axes=("X",))
    i_vw_t = entropy_measures(law, ("V",), conditioning_axes=("T",), versus_axes=("W",))
    feasible = i_sx_y <= i_vw_t + FEAS_SLACK

    ref = compose(prob.q, aux.p_s_given_x)
    p_sx = marginalize(law, keep=("S", "X"))
    p_sy = marginalize(law, keep=("S", "Y"))
    p_y = marginalize(law, keep=("Y",))
    q_y = marginalize(prob.q, keep=("Y",))

    std = solve(CouplingProblem(ref, (
        MarginalConstraint(("S", "X"), p_sx),
        MarginalConstraint(("S", "Y"), p_sy),
    )), tol=tol, method=method)

    h_floor = entropy_measures(law, ("S",), conditioning_axes=("Y",))
    dec = solve(CouplingProblem(ref, (
        MarginalConstraint(("S", "X"), p_sx),
        MarginalConstraint(("Y",), p_y),
    ), EntropyFloor(("S",), ("Y",), h_floor)), tol=tol, method=method)

    offset = i_vw_t - i_sx_y
    components = {
        "standard": float(std.value),
        "dec": float(dec.value + offset),
        "miss": float(kl_divergence(p_y, q_y) + offset + _channel_penalty(law, prob)),
    }
    argmins = {"standard": std.argmin, "dec": dec.argmin, "miss": None}
    if feasible:
        active = min(components, key=lambda k: (components[k], k))
        theta = components[active]
    else:
        active, theta = "", math.nan
    return ExponentReport(theta, components, active, feasible, argmins, aux=aux)


def bsc_row_divergence(r: float) -> float:
    """KL divergence between the two output rows of a binary symmetric
    channel; the best miss-detection exponent a BSC supports."""
    if not (0.0 < r < 1.0):
        raise InputError("crossover must lie in (0, 1)")
    if r == 0.5:
        return 0.0
    return (1.0 - 2.0 * r) * math.log2((1.0 - r) / r)


def _aux_from_arrays(prob, arrays) -> DmcAuxChoice:
    k_sx, p_t, k_wt = arrays
    ns = k_sx.shape[1]
    nw = k_wt.shape[1]
    return DmcAuxChoice(
        Channel((Alphabet("X", k_sx.shape[0]),), (Alphabet("S", ns),), k_sx),
        JointPmf((Alphabet("T", nw),), p_t),
        Channel((Alphabet("T", nw),), (Alphabet("W", nw),), k_wt),
    )


def _rate_gap(prob, aux) -> float:
    law = _law(prob, aux)
    i_sx_y = entropy_measures(law, ("S",), conditioning_axes=("Y",), versus_axes=("X",))
    i_vw_t = entropy_measures(law, ("V",), conditioning_axes=("T",), versus_axes=("W",))
    return i_sx_y - i_vw_t


def _anchors(prob, ns):
    """Deterministic starting points: protected-pair auxes with constant S,
    and a ladder of symmetric quantizers with a spread channel input."""
    nx = prob.p.axis("X").size
    nw = prob.channel.kernel.shape[0]
    const_s = np.zeros((nx, ns))
    const_s[:, 0] = 1.0
    uniform_w = np.full((nw, nw), 1.0 / nw)
    out = []
    for t0 in range(nw):
        for w0 in range(nw):
            if t0 == w0:
                continue
            pt = np.zeros(nw)
            pt[t0] = 1.0
            kw = np.zeros((nw, nw))
            kw[:, w0] = 1.0
            out.append((const_s, pt, kw))
    delta0 = np.zeros(nw)
    delta0[0] = 1.0
    for a in (0.02, 0.1, 0.2, 0.3, 0.45):
        k = np.full((nx, ns), 1e-6)
        for x in range(nx):
            k[x, x % ns] = 1.0 - a
            k[x, (x + 1) % ns] += a
        k /= k.sum(axis=1, keepdims=True)
        out.append((k, delta0, uniform_w))
    return out


def _optimize(prob, search, component_fn, label):
    if prob.variant != "DMC":
        raise InputError(f"expected DMC problem, got {prob.variant}")
    search = search or SearchBudget()
    nx = prob.p.axis("X").size
    nw = prob.channel.kernel.shape[0]
    ns = min(nx + 2, 8)
    shapes = [(nx, ns), (nw,), (nw, nw)]
    blocks = [(0,), (1, 2)]

    def objective(arrays):
        aux = _aux_from_arrays(prob, arrays)
        gap = _rate_gap(prob, aux)
        if gap > FEAS_SLACK:
            return -0.5 - gap
        rep = component_fn(aux)
        if not rep.feasible or math.isnan(rep.theta):
            return -0.5
        return min(rep.theta, 1e6)

    arrays, best, trace = multistart_maximize(
        objective, shapes, search, anchors=_anchors(prob, ns), blocks=blocks)
    if best < 0.0:
        raise InfeasibleError(
            f"no feasible auxiliary found across {search.starts} starts for {label}")
    rep = component_fn(_aux_from_arrays(prob, arrays))
    return ExponentReport(rep.theta, rep.components, rep.active, rep.feasible,
                          rep.argmins, aux=rep.aux, trace=trace)


def dmc_optimize(prob: HypothesisProblem,
                 search: SearchBudget | None = None) -> ExponentReport:
    """Best min{standard, dec, miss} over the executed multi-start search."""
    return _optimize(prob, search, lambda aux: dmc_exponents(prob, aux),
                     "dmc_optimize")


def _no_uep_exponents(prob, aux) -> ExponentReport:
    _check_dmc(prob, aux)
    law = _law(prob, aux)
    i_sx_y = entropy_measures(law, ("S",), conditioning_axes=("Y",), versus_axes=("X",))
    i_vw_t = entropy_measures(law, ("V",), conditioning_axes=("T",), versus_axes=("W",))
    i_vw = entropy_measures(law, ("V",), versus_axes=("W",))
    feasible = i_sx_y <= i_vw_t + FEAS_SLACK

    ref = compose(prob.q, aux.p_s_given_x)
    p_sx = marginalize(law, keep=("S", "X"))
    p_sy = marginalize(law, keep=("S", "Y"))
    std = solve(CouplingProblem(ref, (
        MarginalConstraint(("S", "X"), p_sx),
        MarginalConstraint(("S", "Y"), p_sy),
    )))
    p_y = marginalize(law, keep=("Y",))
    q_y = marginalize(prob.q, keep=("Y",))
    components = {
        "standard": float(std.value),
        "miss_no_uep": float(kl_divergence(p_y, q_y) + i_vw - i_sx_y),
    }
    argmins = {"standard": std.argmin, "miss_no_uep": None}
    if feasible:
        active = min(components, key=lambda k: (components[k], k))
        theta = components[active]
    else:
        active, theta = "", math.nan
    return ExponentReport(theta, components, active, feasible, argmins, aux=aux)


def dmc_no_uep(prob: HypothesisProblem,
               search: SearchBudget | None = None) -> ExponentReport:
    """Best min{standard, miss} when the zero-message is sent as an ordinary
    codeword instead of a protected input sequence."""
    return _optimize(prob, search, lambda aux: _no_uep_exponents(prob, aux),
                     "dmc_no_uep")


def gtci_optimal(prob: HypothesisProblem, f, tol: float = 1e-6) -> float:
    """Optimal exponent for generalized testing against conditional
    independence: the alternative factorizes as P_{XZ} Q_{Y|Z} with
    Z = f(Y) a function of the observation.

    Checks, within 1e-9: X and Y conditionally independent given Z under the
    alternative, and (X, Z) identically distributed under both hypotheses.
    Returns D(P_Y||Q_Y) + max I(S;Y|Z) over P_{S|X} with I(S;X|Z) <= C.
    """
    if prob.variant != "DMC":
        raise InputError(f"expected DMC problem, got {prob.variant}")
    ny = prob.p.axis("Y").size
    f = np.asarray(f, dtype=int)
    if f.shape != (ny,) or f.min() < 0:
        raise InputError("f must assign a nonnegative label to every Y symbol")
    nz = int(f.max()) + 1

    def with_z(pmf):
        probs = np.zeros(pmf.probs.shape + (nz,))
        for y in range(ny):
            probs[:, y, f[y]] = pmf.probs[:, y]
        return JointPmf(pmf.axes + (Alphabet("Z", nz),), probs)

    p_xyz = with_z(prob.p)
    q_xyz = with_z(prob.q)
    if entropy_measures(q_xyz, ("X",), conditioning_axes=("Z",), versus_axes=("Y",)) > 1e-9:
        raise InputError("not a generalized-TCI instance: X and Y are "
                         "dependent given f(Y) under the alternative")
    p_xz = marginalize(p_xyz, keep=("X", "Z")).probs
    q_xz = marginalize(q_xyz, keep=("X", "Z")).probs
    if np.max(np.abs(p_xz - q_xz)) > 1e-9:
        raise InputError("not a generalized-TCI instance: (X, f(Y)) laws differ")

    p_y = marginalize(prob.p, keep=("Y",))
    q_y = marginalize(prob.q, keep=("Y",))
    base = kl_divergence(p_y, q_y)
    cap = channel_capacity(prob.channel)
    nx = prob.p.axis("X").size
    same_y = kl_divergence(p_y, q_y) <= 1e-12
    ns = min(nx + 1 if same_y else nx + 2, 8)

    def objective(arrays):
        k_sx = arrays[0]
        joint = compose(p_xyz, Channel(
            (Alphabet("X", nx),), (Alphabet("S", ns),), k_sx))
        i_sxz = entropy_measures(joint, ("S",), conditioning_axes=("Z",), versus_axes=("X",))
        i_syz = entropy_measures(joint, ("S",), conditioning_axes=("Z",), versus_axes=("Y",))
        return i_syz - 1e4 * max(0.0, i_sxz - cap)

    anchors = []
    ident = np.full((nx, ns), 1e-9)
    for x in range(nx):
        ident[x, x % ns] = 1.0
    anchors.append((ident / ident.sum(axis=1, keepdims=True),))
    const = np.zeros((nx, ns))
    const[:, 0] = 1.0
    anchors.append((const,))
    for a in (0.1, 0.25, 0.4):
        k = np.full((nx, ns), 1e-9)
        for x in range(nx):
            k[x, x % ns] = 1.0 - a
            k[x, (x + 1) % ns] += a
        anchors.append((k / k.sum(axis=1, keepdims=True),))

    if not (0.0 < tol <= 1e-3):
        raise InputError(f"tol must lie in (0, 1e-3], got {tol}")
    budget = SearchBudget(starts=24, seed=0, polish_iters=500, rounds=2)
    _arrays, best, _trace = multistart_maximize(
        objective, [(nx, ns)], budget, anchors=anchors, fatol=tol * 1e-3)
    return base + max(best, 0.0)
