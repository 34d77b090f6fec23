"""Two-sensor exponents over a multiple-access channel.

For a fixed auxiliary choice (per-sensor quantizers, a protected time-sharing
pair on the channel inputs, and deterministic symbol maps), nine exponents
compete: one standard typicality exponent, three decoding exponents, and five
miss-detection exponents for the protected zero-messages (sensor 1 alone, two
variants; sensor 2 alone, two variants; both). Each is a divergence
minimization over couplings plus a mutual-information offset; the achievable
exponent is the minimum across all nine, subject to three rate conditions.

The minimizations are written once, declaratively, in _NINE below; one table
row per displayed program keeps the compilation auditable and lets the tests
count nine. The special structure of testing against conditional independence
collapses the maximization (mac_gtci), and for orthogonal channels with
independent sources the optimal exponent is a capacity-constrained search
(orthogonal_optimal).
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
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
    marginalize,
    product,
)
from .projection import CouplingProblem, EntropyFloor, MarginalConstraint, solve
from .search import SearchBudget, SearchTrace, multistart_maximize, workers

FEAS_SLACK = 1e-9
AXIS_CAP = 4
STRUCT_TOL = 1e-9

_SOURCE_AXES = ("X1", "X2", "Y")
_SPLIT_AXES = ("X1", "X2", "Yb", "Z")


def _as_map(f, ns, nx, nw, label) -> np.ndarray:
    arr = np.asarray(f)
    if arr.shape != (ns, nx) or not np.issubdtype(arr.dtype, np.integer):
        raise InputError(f"{label} must be an integer array of shape ({ns}, {nx})")
    if arr.min() < 0 or arr.max() >= nw:
        raise InputError(f"{label} values must lie in [0, {nw})")
    out = arr.astype(np.int64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class MacAuxChoice:
    """Auxiliary choice: P_{T1 T2}, P_{Si | Xi T1 T2}, and maps f_i.

    The protected pair (T1, T2) ranges over the channel input alphabets
    W1 x W2; f_i sends (S_i, X_i) to the channel input W_i.
    """

    p_t1t2: JointPmf
    p_s1_given_x1_t: Channel
    p_s2_given_x2_t: Channel
    f1: np.ndarray
    f2: np.ndarray

    def __post_init__(self):
        if self.p_t1t2.names != ("T1", "T2"):
            raise InputError("p_t1t2 must be a pmf over axes (T1, T2)")
        nw1, nw2 = (a.size for a in self.p_t1t2.axes)
        for i, ch in ((1, self.p_s1_given_x1_t), (2, self.p_s2_given_x2_t)):
            want_in, want_out = (f"X{i}", "T1", "T2"), (f"S{i}",)
            if ch.input_names != want_in or ch.output_names != want_out:
                raise InputError(
                    f"p_s{i}_given_x{i}_t must map axes {want_in} to {want_out}")
            if (ch.input_axes[1].size, ch.input_axes[2].size) != (nw1, nw2):
                raise InputError(
                    f"p_s{i}_given_x{i}_t T-axis sizes must match p_t1t2")
        ns1 = self.p_s1_given_x1_t.output_axes[0].size
        ns2 = self.p_s2_given_x2_t.output_axes[0].size
        nx1 = self.p_s1_given_x1_t.input_axes[0].size
        nx2 = self.p_s2_given_x2_t.input_axes[0].size
        object.__setattr__(self, "f1", _as_map(self.f1, ns1, nx1, nw1, "f1"))
        object.__setattr__(self, "f2", _as_map(self.f2, ns2, nx2, nw2, "f2"))


@dataclass(frozen=True, eq=False)
class MacSeparateAux:
    """Separate source-channel coding choice: quantizers P_{Si|Xi} plus an
    independent channel block (P_{T1 T2}, P_{Wi | T1 T2})."""

    p_s1_given_x1: Channel
    p_s2_given_x2: Channel
    p_t1t2: JointPmf
    p_w1_given_t: Channel
    p_w2_given_t: Channel

    def __post_init__(self):
        for i, ch in ((1, self.p_s1_given_x1), (2, self.p_s2_given_x2)):
            if ch.input_names != (f"X{i}",) or ch.output_names != (f"S{i}",):
                raise InputError(f"p_s{i}_given_x{i} must map axis X{i} to S{i}")
        if self.p_t1t2.names != ("T1", "T2"):
            raise InputError("p_t1t2 must be a pmf over axes (T1, T2)")
        nt = tuple(a.size for a in self.p_t1t2.axes)
        for i, ch in ((1, self.p_w1_given_t), (2, self.p_w2_given_t)):
            if ch.input_names != ("T1", "T2") or ch.output_names != (f"W{i}",):
                raise InputError(f"p_w{i}_given_t must map (T1, T2) to W{i}")
            if tuple(a.size for a in ch.input_axes) != nt:
                raise InputError(f"p_w{i}_given_t input sizes must match p_t1t2")
            if ch.output_axes[0].size != nt[i - 1]:
                raise InputError(
                    f"T{i} must range over the channel input alphabet W{i}")


@dataclass(frozen=True, eq=False)
class MacExponentReport:
    """theta: min over the nine components (nan when a rate condition fails);
    divergences: the minimized coupling values before offsets are added."""

    theta: float
    components: dict
    active: str
    feasible: bool
    divergences: dict
    argmins: dict
    aux: MacAuxChoice | None = None
    trace: SearchTrace | None = None


# One row per displayed minimization: name, reference measure, equality
# marginals, optional entropy floor (target, given), offset as
# I(target; versus | given) - I(target; minus | given) under the null law.
# The joint miss entry pins every axis, which turns its "minimization" into
# the plain expectation it is in closed form.
_OFF1 = (("S1",), ("Y", "V"), ("S2", "T1", "T2"), ("X1",))
_OFF2 = (("S2",), ("Y", "V"), ("S1", "T1", "T2"), ("X2",))
_OFF12 = (("S1", "S2"), ("Y", "V"), ("T1", "T2"), ("X1", "X2"))
_S1T = ("S1", "X1", "T1", "T2")
_S2T = ("S2", "X2", "T1", "T2")

_NINE = (
    ("standard", "full", (_S1T, _S2T, ("S1", "S2", "Y", "T1", "T2", "V")), None, None),
    ("dec1", "full", (_S1T, _S2T, ("S2", "Y", "T1", "T2", "V")),
     (("S1",), ("S2", "Y", "T1", "T2", "V")), _OFF1),
    ("dec2", "full", (_S1T, _S2T, ("S1", "Y", "T1", "T2", "V")),
     (("S2",), ("S1", "Y", "T1", "T2", "V")), _OFF2),
    ("dec12", "full", (_S1T, _S2T, ("Y", "T1", "T2", "V")),
     (("S1", "S2"), ("Y", "T1", "T2", "V")), _OFF12),
    ("miss1a", "drop1", (_S2T, ("Y", "T1", "T2", "V")),
     (("S2",), ("Y", "T1", "T2", "V")), _OFF12),
    ("miss1b", "drop1", (_S2T, ("S2", "Y", "T1", "T2", "V")), None, _OFF1),
    ("miss2a", "drop2", (_S1T, ("Y", "T1", "T2", "V")),
     (("S1",), ("Y", "T1", "T2", "V")), _OFF12),
    ("miss2b", "drop2", (_S1T, ("S1", "Y", "T1", "T2", "V")), None, _OFF2),
    ("miss12", "channel", (("Y", "T1", "T2", "V"),), None, _OFF12),
)

COMPONENT_NAMES = tuple(row[0] for row in _NINE)


def _check_mac(prob: HypothesisProblem, aux: MacAuxChoice, cap: int):
    if prob.variant != "MAC":
        raise InputError(f"expected MAC problem, got {prob.variant}")
    if prob.p.names != _SOURCE_AXES:
        raise InputError(
            f"component evaluation needs source axes {_SOURCE_AXES}, got {prob.p.names}")
    nx1, nx2, ny = (a.size for a in prob.p.axes)
    nw1, nw2, nv = (a.size for a in
                    prob.channel.input_axes + prob.channel.output_axes)
    ns1 = aux.p_s1_given_x1_t.output_axes[0].size
    ns2 = aux.p_s2_given_x2_t.output_axes[0].size
    sizes = {"S1": ns1, "S2": ns2, "X1": nx1, "X2": nx2, "Y": ny,
             "W1": nw1, "W2": nw2, "V": nv}
    over = {k: v for k, v in sizes.items() if v > cap}
    if over:
        raise InputError(f"alphabet sizes {over} exceed the cap {cap}")
    if aux.p_s1_given_x1_t.input_axes[0].size != nx1:
        raise InputError("p_s1_given_x1_t input size does not match |X1|")
    if aux.p_s2_given_x2_t.input_axes[0].size != nx2:
        raise InputError("p_s2_given_x2_t input size does not match |X2|")
    if tuple(a.size for a in aux.p_t1t2.axes) != (nw1, nw2):
        raise InputError("(T1, T2) must range over the channel input alphabets")


def _substituted(channel: Channel, f1, f2) -> Channel:
    """Gamma_{V | S1 S2 X1 X2}: push (s_i, x_i) through f_i, then the MAC."""
    ns1, nx1 = f1.shape
    ns2, nx2 = f2.shape
    kern = channel.kernel[f1[:, None, :, None], f2[None, :, None, :], :]
    return Channel(
        (Alphabet("S1", ns1), Alphabet("S2", ns2),
         Alphabet("X1", nx1), Alphabet("X2", nx2)),
        (channel.output_axes[0],), kern)


def _substituted_single(channel: Channel, f, keep_side: int) -> Channel:
    """Gamma^{(i)}: the other sensor is pinned to its protected symbol."""
    ns, nx = f.shape
    nw1, nw2, _nv = channel.kernel.shape
    if keep_side == 2:  # sensor 1 silent: inputs (T1, S2, X2)
        kern = channel.kernel[np.arange(nw1)[:, None, None], f[None, :, :], :]
        in_axes = (Alphabet("T1", nw1), Alphabet("S2", ns), Alphabet("X2", nx))
    else:  # sensor 2 silent: inputs (S1, X1, T2)
        kern = channel.kernel[f[:, :, None], np.arange(nw2)[None, None, :], :]
        in_axes = (Alphabet("S1", ns), Alphabet("X1", nx), Alphabet("T2", nw2))
    return Channel(in_axes, (channel.output_axes[0],), kern)


def _mac_law(source: JointPmf, prob: HypothesisProblem, aux: MacAuxChoice) -> JointPmf:
    out = product(source, aux.p_t1t2)
    out = compose(out, aux.p_s1_given_x1_t)
    out = compose(out, aux.p_s2_given_x2_t)
    return compose(out, _substituted(prob.channel, aux.f1, aux.f2))


def mac_joint_law(prob: HypothesisProblem, aux: MacAuxChoice,
                  cap: int = AXIS_CAP) -> JointPmf:
    """Null-hypothesis joint over (X1, X2, Y, T1, T2, S1, S2, V)."""
    _check_mac(prob, aux, cap)
    return _mac_law(prob.p, prob, aux)


def _references(prob: HypothesisProblem, aux: MacAuxChoice) -> dict:
    gamma12 = Channel((Alphabet("T1", prob.channel.input_axes[0].size),
                       Alphabet("T2", prob.channel.input_axes[1].size)),
                      (prob.channel.output_axes[0],), prob.channel.kernel)
    drop1 = product(marginalize(prob.q, keep=("X2", "Y")), aux.p_t1t2)
    drop1 = compose(drop1, aux.p_s2_given_x2_t)
    drop1 = compose(drop1, _substituted_single(prob.channel, aux.f2, keep_side=2))
    drop2 = product(marginalize(prob.q, keep=("X1", "Y")), aux.p_t1t2)
    drop2 = compose(drop2, aux.p_s1_given_x1_t)
    drop2 = compose(drop2, _substituted_single(prob.channel, aux.f1, keep_side=1))
    channel_only = compose(
        product(marginalize(prob.q, keep=("Y",)), aux.p_t1t2), gamma12)
    return {
        "full": _mac_law(prob.q, prob, aux),
        "drop1": drop1,
        "drop2": drop2,
        "channel": channel_only,
    }


def _offset(law: JointPmf, spec) -> float:
    if spec is None:
        return 0.0
    target, versus, given, minus = spec
    return (entropy_measures(law, target, conditioning_axes=given, versus_axes=versus)
            - entropy_measures(law, target, conditioning_axes=given, versus_axes=minus))


def _rate_conditions(law: JointPmf):
    """The three (lhs, rhs) rate pairs; achievability needs lhs <= rhs each."""
    return (
        (entropy_measures(law, ("S1",), ("T1", "T2"), ("X1",)),
         entropy_measures(law, ("S1",), ("T1", "T2"), ("S2", "Y", "V"))),
        (entropy_measures(law, ("S2",), ("T1", "T2"), ("X2",)),
         entropy_measures(law, ("S2",), ("T1", "T2"), ("S1", "Y", "V"))),
        (entropy_measures(law, ("S1", "S2"), ("T1", "T2"), ("X1", "X2")),
         entropy_measures(law, ("S1", "S2"), ("T1", "T2"), ("Y", "V"))),
    )


def _compile(name: str, law: JointPmf, references: dict) -> CouplingProblem:
    for row_name, ref_key, equalities, floor, _off in _NINE:
        if row_name == name:
            break
    else:
        raise InputError(f"unknown component {name!r}; have {COMPONENT_NAMES}")
    constraints = tuple(
        MarginalConstraint(axes, marginalize(law, keep=axes)) for axes in equalities)
    entropy = None
    if floor is not None:
        target, given = floor
        bound = entropy_measures(law, target, conditioning_axes=given)
        entropy = EntropyFloor(target, given, bound)
    return CouplingProblem(references[ref_key], constraints, entropy)


def component_problem(name: str, prob: HypothesisProblem, aux: MacAuxChoice,
                      cap: int = AXIS_CAP) -> CouplingProblem:
    """Compile one table row into a standalone coupling problem."""
    _check_mac(prob, aux, cap)
    return _compile(name, _mac_law(prob.p, prob, aux), _references(prob, aux))


def mac_exponents(prob: HypothesisProblem, aux: MacAuxChoice, tol: float = 1e-6,
                  method: str = "ipf", cap: int = AXIS_CAP) -> MacExponentReport:
    """Evaluate the nine competing exponents for one auxiliary choice.

    The nine inner minimizations are independent and run concurrently.
    """
    _check_mac(prob, aux, cap)
    law = _mac_law(prob.p, prob, aux)
    refs = _references(prob, aux)
    feasible = all(lhs <= rhs + FEAS_SLACK for lhs, rhs in _rate_conditions(law))
    offsets = {row[0]: _offset(law, row[4]) for row in _NINE}

    def run(name):
        return solve(_compile(name, law, refs), tol=tol, method=method)

    with ThreadPoolExecutor(max_workers=workers()) as pool:
        reports = dict(zip(COMPONENT_NAMES, pool.map(run, COMPONENT_NAMES)))

    divergences = {name: float(rep.value) for name, rep in reports.items()}
    components = {name: float(rep.value + offsets[name])
                  for name, rep in reports.items()}
    argmins = {name: rep.argmin for name, rep in reports.items()}
    if feasible:
        active = min(components, key=lambda k: (components[k], k))
        theta = components[active]
    else:
        active, theta = "", math.nan
    return MacExponentReport(theta, components, active, feasible,
                             divergences, argmins, aux=aux)


# ------------------------------------------------------------ outer search

def _aux_from_arrays(sizes, arrays, f1, f2) -> MacAuxChoice:
    nx1, nx2, nw1, nw2, ns1, ns2 = sizes
    k1, k2, pt = arrays
    t_axes = (Alphabet("T1", nw1), Alphabet("T2", nw2))
    return MacAuxChoice(
        JointPmf(t_axes, pt.reshape(nw1, nw2)),
        Channel((Alphabet("X1", nx1),) + t_axes, (Alphabet("S1", ns1),), k1),
        Channel((Alphabet("X2", nx2),) + t_axes, (Alphabet("S2", ns2),), k2),
        f1, f2)


def _all_maps(ns, nx, nw):
    cells = ns * nx
    for flat in itertools.product(range(nw), repeat=cells):
        yield np.asarray(flat, dtype=np.int64).reshape(ns, nx)


def mac_optimize(prob: HypothesisProblem, search: SearchBudget | None = None,
                 f1=None, f2=None, cap: int = AXIS_CAP) -> MacExponentReport:
    """Best min over the nine components across a heuristic multi-start search.

    The continuous pieces (quantizers and the protected pair) are polished per
    start; the discrete maps f1, f2 are enumerated exhaustively only when each
    sensor has at most 8 (S_i, X_i) cells and at most 64 map pairs exist in
    total, and cycled through the starts otherwise. Budgets are deliberately
    small: this is a heuristic outer search, not a certified maximum.
    """
    if prob.variant != "MAC":
        raise InputError(f"expected MAC problem, got {prob.variant}")
    if prob.p.names != _SOURCE_AXES:
        raise InputError(
            f"component evaluation needs source axes {_SOURCE_AXES}, got {prob.p.names}")
    search = search or SearchBudget(starts=6, polish_iters=80, rounds=1)
    nx1, nx2, _ny = (a.size for a in prob.p.axes)
    nw1, nw2, _nv = (a.size for a in
                     prob.channel.input_axes + prob.channel.output_axes)
    ns1 = min(nx1 + 1, cap)
    ns2 = min(nx2 + 1, cap)
    sizes = (nx1, nx2, nw1, nw2, ns1, ns2)

    def canonical(ns, nx, nw):
        s, x = np.meshgrid(np.arange(ns), np.arange(nx), indexing="ij")
        return np.asarray((s + x) % nw, dtype=np.int64)

    if f1 is not None and f2 is not None:
        pairs = [(_as_map(f1, ns1, nx1, nw1, "f1"),
                  _as_map(f2, ns2, nx2, nw2, "f2"))]
    elif f1 is not None or f2 is not None:
        raise InputError("pass both f1 and f2 or neither")
    else:
        n_pairs = nw1 ** (ns1 * nx1) * nw2 ** (ns2 * nx2)
        if ns1 * nx1 <= 8 and ns2 * nx2 <= 8 and n_pairs <= 64:
            pairs = list(itertools.product(_all_maps(ns1, nx1, nw1),
                                           _all_maps(ns2, nx2, nw2)))
        else:
            rng = np.random.default_rng(search.seed)
            pairs = [(canonical(ns1, nx1, nw1), canonical(ns2, nx2, nw2))]
            pairs += [(rng.integers(0, nw1, (ns1, nx1)),
                       rng.integers(0, nw2, (ns2, nx2)))
                      for _ in range(max(search.starts - 1, 0))]

    shapes = [(nx1, nw1, nw2, ns1), (nx2, nw1, nw2, ns2), (nw1 * nw2,)]
    per_pair = SearchBudget(
        starts=max(1, search.starts // len(pairs)) if len(pairs) > 1 else search.starts,
        seed=search.seed, polish_iters=search.polish_iters, rounds=search.rounds)

    def ladder(nx, ns, a):
        k = np.full((nx, nw1, nw2, ns), 1e-9)
        for x in range(nx):
            k[x, :, :, x % ns] = 1.0 - a
            k[x, :, :, (x + 1) % ns] += a
        return k / k.sum(axis=-1, keepdims=True)

    pt0 = np.full(nw1 * nw2, 1.0 / (nw1 * nw2))
    # near-uniform quantizers satisfy the rate conditions with slack, so the
    # search always has a feasible start
    anchors = [(np.full((nx1, nw1, nw2, ns1), 1.0 / ns1),
                np.full((nx2, nw1, nw2, ns2), 1.0 / ns2), pt0)]
    for a in (0.45, 0.2, 0.02):
        anchors.append((ladder(nx1, ns1, a), ladder(nx2, ns2, a), pt0))

    best_val, best_rep, finals, evals = -math.inf, None, [], 0
    for fa, fb in pairs:
        def objective(arrays, fa=fa, fb=fb):
            aux = _aux_from_arrays(sizes, arrays, fa, fb)
            law = _mac_law(prob.p, prob, aux)
            gap = max(lhs - rhs for lhs, rhs in _rate_conditions(law))
            if gap > FEAS_SLACK:
                return -0.5 - gap
            rep = mac_exponents(prob, aux, cap=cap)
            if not rep.feasible or math.isnan(rep.theta):
                return -0.5
            # exponents are nonnegative; stray -1e-16 noise must not trip
            # the infeasibility sentinel below
            return max(0.0, min(rep.theta, 1e6))

        arrays, val, trace = multistart_maximize(objective, shapes, per_pair,
                                                 anchors=anchors)
        finals.append(val)
        evals += trace.evaluations
        if val > best_val:
            best_val = val
            best_rep = mac_exponents(
                prob, _aux_from_arrays(sizes, arrays, fa, fb), cap=cap)
    if best_val < 0.0 or best_rep is None:
        raise InfeasibleError(
            f"no feasible auxiliary found across {len(pairs)} map pairs")
    trace = SearchTrace(tuple(finals), int(np.argmax(finals)), evals)
    return MacExponentReport(best_rep.theta, best_rep.components, best_rep.active,
                             best_rep.feasible, best_rep.divergences,
                             best_rep.argmins, aux=best_rep.aux, trace=trace)


# ----------------------------------------- conditional-independence instances

def _check_split(prob: HypothesisProblem):
    if prob.variant != "MAC":
        raise InputError(f"expected MAC problem, got {prob.variant}")
    if prob.p.names != _SPLIT_AXES:
        raise InputError(
            f"conditional-independence form needs source axes {_SPLIT_AXES}, "
            f"got {prob.p.names}")
    dep = entropy_measures(prob.q, ("X1", "X2"), conditioning_axes=("Z",),
                           versus_axes=("Yb",))
    if dep > STRUCT_TOL:
        raise InputError("not a conditional-independence instance: (X1, X2) and Yb "
                         "are dependent given Z under the alternative")
    p_xz = marginalize(prob.p, keep=("X1", "X2", "Z")).probs
    q_xz = marginalize(prob.q, keep=("X1", "X2", "Z")).probs
    if np.max(np.abs(p_xz - q_xz)) > STRUCT_TOL:
        raise InputError(
            "not a conditional-independence instance: (X1, X2, Z) laws differ")


def _cond_divergence(joint: JointPmf, q: JointPmf, given) -> float:
    """E over the given axes of D(P_{Yb | given} || Q_{Yb | Z}), in bits."""
    given = tuple(given)
    m = marginalize(joint, keep=("Yb",) + given)
    order = ("Yb",) + given
    probs = np.transpose(m.probs, [m.index(n) for n in order])
    cond_mass = probs.sum(axis=0, keepdims=True)
    q_yz = marginalize(q, keep=("Yb", "Z"))
    kern = np.transpose(q_yz.probs, [q_yz.index("Z"), q_yz.index("Yb")])
    kern = kern / np.maximum(kern.sum(axis=1, keepdims=True), 1e-300)
    # broadcast Q_{Yb|Z} over the remaining conditioning axes (Z is last in
    # both _SPLIT_AXES-derived orders used below)
    z_pos = given.index("Z")
    shape = [1] * (len(given) + 1)
    shape[0] = kern.shape[1]
    shape[1 + z_pos] = kern.shape[0]
    ref = cond_mass * kern.T.reshape(shape)
    mask = probs > 0.0
    if np.any(ref[mask] <= 0.0):
        return math.inf
    return float(np.sum(probs[mask] * np.log2(probs[mask] / ref[mask])))


def mac_gtci(prob: HypothesisProblem, aux, mode: str = "hybrid") -> float:
    """Achievable exponent for generalized testing against conditional
    independence: the observation splits as Y = (Yb, Z) and the alternative
    factorizes as P_{X1 X2 Z} Q_{Yb|Z}.

    mode="hybrid" evaluates a MacAuxChoice; mode="separate" evaluates a
    MacSeparateAux whose channel block is independent of the sources. Raises
    InfeasibleError when the auxiliary violates its rate conditions.
    """
    viol = mac_gtci_slack(prob, aux, mode)
    if viol > FEAS_SLACK:
        raise InfeasibleError(
            f"rate conditions violated by {viol:.3g} for mode {mode!r}")
    return _gtci_value(prob, aux, mode)


def mac_gtci_slack(prob: HypothesisProblem, aux, mode: str = "hybrid") -> float:
    """Largest rate-condition violation (lhs - rhs); feasible iff <= 1e-9."""
    _check_split(prob)
    if mode == "hybrid":
        if not isinstance(aux, MacAuxChoice):
            raise InputError("hybrid mode evaluates a MacAuxChoice")
        law = _split_law(prob, aux)
        pairs = (
            (entropy_measures(law, ("S1",), ("S2", "Z", "T1", "T2"), ("X1",)),
             entropy_measures(law, ("S1",), ("S2", "Z", "T1", "T2"), ("V",))),
            (entropy_measures(law, ("S2",), ("S1", "Z", "T1", "T2"), ("X2",)),
             entropy_measures(law, ("S2",), ("S1", "Z", "T1", "T2"), ("V",))),
            (entropy_measures(law, ("S1", "S2"), ("Z", "T1", "T2"), ("X1", "X2")),
             entropy_measures(law, ("S1", "S2"), ("Z", "T1", "T2"), ("V",))),
        )
    elif mode == "separate":
        if not isinstance(aux, MacSeparateAux):
            raise InputError("separate mode evaluates a MacSeparateAux")
        source, chan = _separate_laws(prob, aux)
        pairs = (
            (entropy_measures(source, ("S1",), ("S2", "Z"), ("X1",)),
             entropy_measures(chan, ("W1",), ("W2", "T1", "T2"), ("V",))),
            (entropy_measures(source, ("S2",), ("S1", "Z"), ("X2",)),
             entropy_measures(chan, ("W2",), ("W1", "T1", "T2"), ("V",))),
            (entropy_measures(source, ("S1", "S2"), ("Z",), ("X1", "X2")),
             entropy_measures(chan, ("W1", "W2"), ("T1", "T2"), ("V",))),
        )
    else:
        raise InputError(f"mode must be 'hybrid' or 'separate', got {mode!r}")
    return max(lhs - rhs for lhs, rhs in pairs)


def _split_law(prob: HypothesisProblem, aux: MacAuxChoice) -> JointPmf:
    nx1, nx2 = prob.p.axes[0].size, prob.p.axes[1].size
    nw1, nw2 = (a.size for a in prob.channel.input_axes)
    if aux.p_s1_given_x1_t.input_axes[0].size != nx1 \
            or aux.p_s2_given_x2_t.input_axes[0].size != nx2:
        raise InputError("auxiliary quantizer sizes do not match |X1|, |X2|")
    if tuple(a.size for a in aux.p_t1t2.axes) != (nw1, nw2):
        raise InputError("(T1, T2) must range over the channel input alphabets")
    out = product(prob.p, aux.p_t1t2)
    out = compose(out, aux.p_s1_given_x1_t)
    out = compose(out, aux.p_s2_given_x2_t)
    return compose(out, _substituted(prob.channel, aux.f1, aux.f2))


def _separate_laws(prob: HypothesisProblem, aux: MacSeparateAux):
    source = compose(compose(prob.p, aux.p_s1_given_x1), aux.p_s2_given_x2)
    chan = compose(compose(aux.p_t1t2, aux.p_w1_given_t), aux.p_w2_given_t)
    return source, compose(chan, prob.channel)


def _gtci_value(prob: HypothesisProblem, aux, mode: str) -> float:
    if mode == "hybrid":
        law = _split_law(prob, aux)
        return (_cond_divergence(law, prob.q, ("Z", "T1", "T2", "V"))
                + entropy_measures(law, ("S1", "S2"), ("Z", "T1", "T2", "V"), ("Yb",)))
    source, _chan = _separate_laws(prob, aux)
    return (_cond_divergence(source, prob.q, ("Z",))
            + entropy_measures(source, ("S1", "S2"), ("Z",), ("Yb",)))


# ------------------------------------------------- orthogonal-channel optimum

def split_orthogonal(channel: Channel, tol: float = STRUCT_TOL):
    """Factor the MAC into per-sensor channels, or raise.

    The output symbol is read as a row-major pair v = v1 * n2 + v2; every
    (n1, n2) grouping is tried and the first exact product factorization wins.
    """
    nw1, nw2, nv = channel.kernel.shape
    for n1 in range(1, nv + 1):
        if nv % n1:
            continue
        n2 = nv // n1
        grid = channel.kernel.reshape(nw1, nw2, n1, n2)
        k1 = grid.sum(axis=3)  # (nw1, nw2, n1)
        k2 = grid.sum(axis=2)  # (nw1, nw2, n2)
        if (np.max(np.abs(k1 - k1[:, :1, :])) > tol
                or np.max(np.abs(k2 - k2[:1, :, :])) > tol):
            continue
        prod = k1[:, :1, :, None] * k2[:1, :, None, :]
        if np.max(np.abs(grid - prod)) > tol:
            continue
        ch1 = Channel((channel.input_axes[0],), (Alphabet("V1", n1),), k1[:, 0, :])
        ch2 = Channel((channel.input_axes[1],), (Alphabet("V2", n2),), k2[0, :, :])
        return ch1, ch2
    raise InputError("channel does not factor into orthogonal per-sensor links")


def orthogonal_optimal(prob: HypothesisProblem, tol: float = 1e-6) -> float:
    """Optimal exponent for independent sources over orthogonal channels:
    D(P_Y || Q_Y) plus the largest I(S1, S2; Y) over per-sensor quantizers
    meeting the three capacity constraints. Best over the executed search."""
    if prob.variant != "MAC":
        raise InputError(f"expected MAC problem, got {prob.variant}")
    if prob.p.names != _SOURCE_AXES:
        raise InputError(
            f"orthogonal form needs source axes {_SOURCE_AXES}, got {prob.p.names}")
    if not (0.0 < tol <= 1e-3):
        raise InputError(f"tol must lie in (0, 1e-3], got {tol}")
    p_x1 = marginalize(prob.p, keep=("X1",))
    p_x2 = marginalize(prob.p, keep=("X2",))
    p_x1x2 = marginalize(prob.p, keep=("X1", "X2"))
    if np.max(np.abs(p_x1x2.probs - np.outer(p_x1.probs, p_x2.probs))) > STRUCT_TOL:
        raise InputError("sources are dependent under the null hypothesis")
    q_x1x2 = marginalize(prob.q, keep=("X1", "X2"))
    q_y = marginalize(prob.q, keep=("Y",))
    if np.max(np.abs(q_x1x2.probs - p_x1x2.probs)) > STRUCT_TOL:
        raise InputError("source laws differ across hypotheses")
    spread = np.multiply.outer(q_x1x2.probs, q_y.probs)
    if np.max(np.abs(spread - prob.q.probs)) > STRUCT_TOL:
        raise InputError(
            "alternative does not factor as a product of sources and observation")
    ch1, ch2 = split_orthogonal(prob.channel)
    c1 = channel_capacity(ch1)
    c2 = channel_capacity(ch2)

    nx1, nx2 = p_x1.probs.size, p_x2.probs.size
    ns1 = min(nx1 + 1, AXIS_CAP)
    ns2 = min(nx2 + 1, AXIS_CAP)
    p_y = marginalize(prob.p, keep=("Y",))
    base = kl_divergence(p_y, q_y)

    def objective(arrays):
        k1, k2 = arrays
        joint = compose(prob.p, Channel(
            (Alphabet("X1", nx1),), (Alphabet("S1", ns1),), k1))
        joint = compose(joint, Channel(
            (Alphabet("X2", nx2),), (Alphabet("S2", ns2),), k2))
        viol = max(
            entropy_measures(joint, ("S1",), ("S2",), ("X1",)) - c1,
            entropy_measures(joint, ("S2",), ("S1",), ("X2",)) - c2,
            entropy_measures(joint, ("S1", "S2"), (), ("X1", "X2")) - c1 - c2)
        value = entropy_measures(joint, ("S1", "S2"), (), ("Y",))
        return value - 1e4 * max(0.0, viol)

    def ladder(nx, ns, a):
        k = np.full((nx, ns), 1e-9)
        for x in range(nx):
            k[x, x % ns] = 1.0 - a
            k[x, (x + 1) % ns] += a
        return k / k.sum(axis=1, keepdims=True)

    const1 = np.zeros((nx1, ns1))
    const1[:, 0] = 1.0
    const2 = np.zeros((nx2, ns2))
    const2[:, 0] = 1.0
    anchors = [(const1, const2)]
    for a in (0.0, 0.05, 0.15, 0.3, 0.45):
        anchors.append((ladder(nx1, ns1, max(a, 1e-9)),
                        ladder(nx2, ns2, max(a, 1e-9))))

    budget = SearchBudget(starts=24, seed=0, polish_iters=400, rounds=2)
    _arrays, best, _trace = multistart_maximize(
        objective, [(nx1, ns1), (nx2, ns2)], budget, anchors=anchors,
        fatol=tol * 1e-3)
    return base + max(best, 0.0)
