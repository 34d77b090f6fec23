"""Exponent regions for one sensor reporting to two decision centers.

A single transmitter observes X and talks over a one-to-two noisy channel
W -> (V1, V2); receiver i observes its own side sequence Y_i and protects one
hypothesis, recorded as a label h_i. Relabeling per receiver reduces the setup
to a per-receiver null law (the law its typicality checks are designed for)
and alternative law (the one its exponent theta_i is measured under).

Two evaluation routes exist, selected by whether the two null X-marginals
coincide. When they do, one layered code with a shared cloud S and
per-receiver satellites U1, U2 serves both receivers at once: four exponents
per receiver compete (standard, two decoding variants, miss), and the shared
layers tie theta_1 and theta_2 together through two sum constraints carrying a
dependence penalty I(U1; U2 | S, T). When the X-marginals differ, the source
sequence itself reveals the hypothesis and each receiver gets an independent
cap as the minimum of four exponents (standard, dec, miss, plus a cross term
for mistaking the other code's transmission for one's own).

Each component is a divergence minimization over couplings (projection.solve),
a closed-form expectation, or, for the channel half of the cross term, a
transportation program with two fixed pair marginals.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .probability import (
    Alphabet,
    Channel,
    HypothesisProblem,
    InfeasibleError,
    InputError,
    JointPmf,
    compose,
    entropy_measures,
    kl_divergence,
    kl_divergence_raw,
    marginalize,
    product,
)
from .projection import CouplingProblem, EntropyFloor, MarginalConstraint, solve
from .search import SearchBudget, SearchTrace, multistart_maximize, workers
from .mac import AXIS_CAP, FEAS_SLACK

MARGINAL_TOL = 1e-9

EQUAL_COMPONENT_NAMES = ("standard", "dec_a", "dec_b", "miss")
DIFF_COMPONENT_NAMES = ("standard", "dec", "cross", "miss")


def _receiver_index(receiver: int) -> int:
    if receiver not in (1, 2):
        raise InputError(f"receiver must be 1 or 2, got {receiver!r}")
    return receiver - 1


def _as_symbol_map(f, shape, nw, label) -> np.ndarray:
    arr = np.asarray(f)
    if arr.shape != shape or not np.issubdtype(arr.dtype, np.integer):
        raise InputError(f"{label} must be an integer array of shape {shape}")
    if arr.min() < 0 or arr.max() >= nw:
        raise InputError(f"{label} values must lie in [0, {nw})")
    out = arr.astype(np.int64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class BcLabeling:
    """Which hypothesis each receiver protects.

    h_i = 0 means receiver i designs its typicality tests for the null source
    law and its exponent counts errors under the alternative; h_i = 1 swaps
    the two roles for that receiver.
    """

    h1: int
    h2: int

    def __post_init__(self):
        for label in (self.h1, self.h2):
            if label not in (0, 1):
                raise InputError(f"labels must be 0 or 1, got {label!r}")

    def _flag(self, receiver: int) -> int:
        return (self.h1, self.h2)[_receiver_index(receiver)]

    def source_null(self, prob: HypothesisProblem, receiver: int) -> JointPmf:
        """The source law receiver's tests are built for (p^i)."""
        return prob.p if self._flag(receiver) == 0 else prob.q

    def source_alt(self, prob: HypothesisProblem, receiver: int) -> JointPmf:
        """The source law the receiver's exponent is measured under (q^i)."""
        return prob.q if self._flag(receiver) == 0 else prob.p

    def marginals_equal(self, prob: HypothesisProblem, tol: float = MARGINAL_TOL) -> bool:
        m1 = marginalize(self.source_null(prob, 1), keep=("X",)).probs
        m2 = marginalize(self.source_null(prob, 2), keep=("X",)).probs
        return float(np.max(np.abs(m1 - m2))) <= tol


@dataclass(frozen=True, eq=False)
class BcEqualAux:
    """Layered-code choice: P_T, P_{S U1 U2 | X T}, and the symbol map f.

    The protected symbol T ranges over the channel input alphabet W; f sends
    (S, U1, U2, X) to the channel input.
    """

    p_t: JointPmf
    p_su_given_xt: Channel
    f: np.ndarray

    def __post_init__(self):
        if self.p_t.names != ("T",):
            raise InputError("p_t must be a pmf over the single axis T")
        ch = self.p_su_given_xt
        if ch.input_names != ("X", "T") or ch.output_names != ("S", "U1", "U2"):
            raise InputError("p_su_given_xt must map axes (X, T) to (S, U1, U2)")
        nt = self.p_t.axes[0].size
        if ch.input_axes[1].size != nt:
            raise InputError("p_su_given_xt T-axis size must match p_t")
        ns, nu1, nu2 = (a.size for a in ch.output_axes)
        nx = ch.input_axes[0].size
        object.__setattr__(
            self, "f", _as_symbol_map(self.f, (ns, nu1, nu2, nx), nt, "f"))


@dataclass(frozen=True, eq=False)
class BcDiffAux:
    """Per-receiver coding choice: quantizers P_{S|X} plus a layered channel
    chain (p_t, P_{Ti | T}, P_{W | T Ti}) for each receiver.

    T and both refinements T1, T2 range over the channel input alphabet W."""

    p_s1_given_x: Channel
    p_s2_given_x: Channel
    p_t: JointPmf
    p_t1_given_t: Channel
    p_t2_given_t: Channel
    p_w1_given_t: Channel
    p_w2_given_t: Channel

    def __post_init__(self):
        for i, ch in ((1, self.p_s1_given_x), (2, self.p_s2_given_x)):
            if ch.input_names != ("X",) or ch.output_names != ("S",):
                raise InputError(f"p_s{i}_given_x must map axis X to S")
        if (self.p_s1_given_x.output_axes[0].size
                != self.p_s2_given_x.output_axes[0].size):
            raise InputError("the two quantizers must share one codeword alphabet S")
        if (self.p_s1_given_x.input_axes[0].size
                != self.p_s2_given_x.input_axes[0].size):
            raise InputError("the two quantizers must read the same source alphabet X")
        if self.p_t.names != ("T",):
            raise InputError("p_t must be a pmf over the single axis T")
        nt = self.p_t.axes[0].size
        for i, ch in ((1, self.p_t1_given_t), (2, self.p_t2_given_t)):
            if ch.input_names != ("T",) or ch.output_names != (f"T{i}",):
                raise InputError(f"p_t{i}_given_t must map axis T to T{i}")
            if ch.input_axes[0].size != nt or ch.output_axes[0].size != nt:
                raise InputError(
                    f"p_t{i}_given_t must keep (T, T{i}) on the protected alphabet")
        for i, ch in ((1, self.p_w1_given_t), (2, self.p_w2_given_t)):
            if ch.input_names != ("T", f"T{i}") or ch.output_names != ("W",):
                raise InputError(f"p_w{i}_given_t must map (T, T{i}) to W")
            sizes = tuple(a.size for a in ch.input_axes) + (ch.output_axes[0].size,)
            if sizes != (nt, nt, nt):
                raise InputError(f"p_w{i}_given_t sizes must match p_t")


@dataclass(frozen=True, eq=False)
class BcRegion:
    """Achievable (theta_1, theta_2) pairs for one auxiliary choice.

    components: per-exponent (receiver 1, receiver 2) values; caps: right-hand
    sides of theta_i <= caps[i]; sum_caps: right-hand sides of joint
    constraints theta_1 + theta_2 <= s (empty when the region is a plain
    rectangle); penalty: the shared-layer dependence term already subtracted
    from the sum caps.
    """

    components: dict
    caps: tuple
    sum_caps: tuple = ()
    penalty: float = 0.0

    def constraints(self) -> tuple:
        """((w1, w2), bound) rows meaning w1*theta_1 + w2*theta_2 <= bound."""
        rows = [((1.0, 0.0), self.caps[0]), ((0.0, 1.0), self.caps[1])]
        rows += [((1.0, 1.0), s) for s in self.sum_caps]
        return tuple(rows)

    def contains(self, theta1: float, theta2: float, slack: float = 1e-9) -> bool:
        if theta1 < -slack or theta2 < -slack:
            return False
        return all(w1 * theta1 + w2 * theta2 <= bound + slack
                   for (w1, w2), bound in self.constraints())

    def reach(self, weight: float = 0.5) -> float:
        """Largest t with (weight*t, (1-weight)*t) inside the region.

        Negative when some constraint already excludes the origin."""
        if not 0.0 <= weight <= 1.0:
            raise InputError(f"weight must lie in [0, 1], got {weight}")
        bounds = []
        if weight > 0.0:
            bounds.append(self.caps[0] / weight)
        if weight < 1.0:
            bounds.append(self.caps[1] / (1.0 - weight))
        bounds.extend(self.sum_caps)
        return min(bounds)

    def pareto_vertices(self) -> tuple:
        """Corner points of the dominant boundary, left to right; empty when
        the region is."""
        c1, c2 = self.caps
        s = min(self.sum_caps) if self.sum_caps else math.inf
        if c1 < 0.0 or c2 < 0.0 or s < 0.0:
            return ()
        pts = [(0.0, min(c2, s))]
        if s >= c1 + c2:
            pts.append((c1, c2))
        else:
            pts.append((max(0.0, s - c2), min(c2, s)))
            pts.append((min(c1, s), max(0.0, s - c1)))
        pts.append((min(c1, s), 0.0))
        out = [pts[0]]
        for p in pts[1:]:
            if p != out[-1]:
                out.append(p)
        return tuple(out)


# ------------------------------------------------------- layered (equal) route

def _check_equal(prob: HypothesisProblem, aux: BcEqualAux, cap: int):
    if prob.variant != "BC":
        raise InputError(f"expected BC problem, got {prob.variant}")
    nx, ny1, ny2 = (a.size for a in prob.p.axes)
    nw = prob.channel.input_axes[0].size
    nv1, nv2 = (a.size for a in prob.channel.output_axes)
    ns, nu1, nu2 = (a.size for a in aux.p_su_given_xt.output_axes)
    sizes = {"S": ns, "U1": nu1, "U2": nu2, "X": nx, "Y1": ny1, "Y2": ny2,
             "W": nw, "V1": nv1, "V2": nv2}
    over = {k: v for k, v in sizes.items() if v > cap}
    if over:
        raise InputError(f"alphabet sizes {over} exceed the cap {cap}")
    if aux.p_su_given_xt.input_axes[0].size != nx:
        raise InputError("p_su_given_xt input size does not match |X|")
    if aux.p_t.axes[0].size != nw:
        raise InputError("T must range over the channel input alphabet")


def _substituted(channel: Channel, f: np.ndarray) -> Channel:
    """Gamma_{V1 V2 | S U1 U2 X}: push the tuple through f, then the channel."""
    ns, nu1, nu2, nx = f.shape
    kern = channel.kernel[f]
    return Channel(
        (Alphabet("S", ns), Alphabet("U1", nu1), Alphabet("U2", nu2),
         Alphabet("X", nx)),
        channel.output_axes, kern)


def _equal_law(source: JointPmf, prob: HypothesisProblem, aux: BcEqualAux) -> JointPmf:
    out = product(source, aux.p_t)
    out = compose(out, aux.p_su_given_xt)
    return compose(out, _substituted(prob.channel, aux.f))


def bc_equal_law(prob: HypothesisProblem, labeling: BcLabeling, aux: BcEqualAux,
                 receiver: int = 1, cap: int = AXIS_CAP) -> JointPmf:
    """Null joint law for one receiver over (X, Y1, Y2, T, S, U1, U2, V1, V2)."""
    _receiver_index(receiver)
    _check_equal(prob, aux, cap)
    return _equal_law(labeling.source_null(prob, receiver), prob, aux)


def _gamma_single(channel: Channel, receiver: int) -> np.ndarray:
    # (W, V_i) kernel: sum the unused receiver's output out of Gamma
    return channel.kernel.sum(axis=2 if receiver == 1 else 1)


def _equal_rows(receiver: int):
    """One row per displayed minimization: name, reference key, equality
    marginals, optional entropy floor (target, given), offset as
    I(target; versus | given) - I(target; minus | given) under the null law.
    The miss entry pins its whole (three-axis) space, which turns the
    minimization into the plain expectation it is in closed form."""
    u, y, v = f"U{receiver}", f"Y{receiver}", f"V{receiver}"
    su = ("S", u)
    pin = ("S", u, "X", "T")
    tail = (y, "T", v)
    off_joint = (su, (y, v), ("T",), ("X",))
    off_sat = ((u,), (y, v), ("S", "T"), ("X",))
    return (
        ("standard", "full", (pin, ("S", u, y, "T", v)), None, None),
        ("dec_a", "full", (pin, tail), (su, tail), off_joint),
        ("dec_b", "full", (pin, ("S", y, "T", v)), ((u,), ("S", y, "T", v)), off_sat),
        ("miss", "channel", (tail,), None, off_joint),
    )


def _offset(law: JointPmf, spec) -> float:
    if spec is None:
        return 0.0
    target, versus, given, minus = spec
    return (entropy_measures(law, target, conditioning_axes=given, versus_axes=versus)
            - entropy_measures(law, target, conditioning_axes=given, versus_axes=minus))


def _tail_reference(prob: HypothesisProblem, q_source: JointPmf,
                    p_t: np.ndarray, receiver: int) -> JointPmf:
    """q_{Y_i} x P_T x Gamma_{V_i | W=T}, the miss component's reference."""
    y = f"Y{receiver}"
    q_y = marginalize(q_source, keep=(y,)).probs
    g = _gamma_single(prob.channel, receiver)
    probs = q_y[:, None, None] * p_t[None, :, None] * g[None, :, :]
    axes = (q_source.axis(y), Alphabet("T", p_t.size),
            prob.channel.output_axes[receiver - 1])
    return JointPmf(axes, probs)


def _equal_references(prob: HypothesisProblem, q_law: JointPmf,
                      q_source: JointPmf, p_t: np.ndarray, receiver: int) -> dict:
    u, y, v = f"U{receiver}", f"Y{receiver}", f"V{receiver}"
    return {
        "full": marginalize(q_law, keep=("S", u, "X", y, "T", v)),
        "channel": _tail_reference(prob, q_source, p_t, receiver),
    }


def _compile_equal(name: str, law: JointPmf, references: dict, receiver: int) -> CouplingProblem:
    for row_name, ref_key, equalities, floor, _off in _equal_rows(receiver):
        if row_name == name:
            break
    else:
        raise InputError(f"unknown component {name!r}; have {EQUAL_COMPONENT_NAMES}")
    constraints = tuple(
        MarginalConstraint(axes, marginalize(law, keep=axes)) for axes in equalities)
    entropy = None
    if floor is not None:
        target, given = floor
        bound = entropy_measures(law, target, conditioning_axes=given)
        entropy = EntropyFloor(target, given, bound)
    return CouplingProblem(references[ref_key], constraints, entropy)


def equal_component_problem(name: str, prob: HypothesisProblem, labeling: BcLabeling,
                            aux: BcEqualAux, receiver: int = 1,
                            cap: int = AXIS_CAP) -> CouplingProblem:
    """Compile one table row into a standalone coupling problem."""
    _receiver_index(receiver)
    _check_equal(prob, aux, cap)
    p_src = labeling.source_null(prob, receiver)
    q_src = labeling.source_alt(prob, receiver)
    law = _equal_law(p_src, prob, aux)
    refs = _equal_references(prob, _equal_law(q_src, prob, aux), q_src,
                             aux.p_t.probs, receiver)
    return _compile_equal(name, law, refs, receiver)


def _equal_rate_gap(law1: JointPmf, law2: JointPmf) -> float:
    """Worst violation (lhs - rhs) across the eight feasibility conditions.

    Per receiver the quantization rate must stay below what the receiver can
    resolve, jointly for the cloud-plus-satellite layer and conditionally for
    the satellite alone; four mixed sums then price the satellites' dependence
    I(U1; U2 | S, T) against both receivers' slack at once."""
    laws = (law1, law2)
    a, b, c, d = {}, {}, {}, {}
    for i in (1, 2):
        law, u, y, v = laws[i - 1], f"U{i}", f"Y{i}", f"V{i}"
        a[i] = entropy_measures(law, ("S", u), ("T",), ("X",))
        b[i] = entropy_measures(law, ("S", u), ("T",), (y, v))
        c[i] = entropy_measures(law, (u,), ("S", "T"), ("X",))
        d[i] = entropy_measures(law, (u,), ("S", "T"), (y, v))
    a2x = entropy_measures(law1, ("S", "U2"), ("T",), ("X",))
    c2x = entropy_measures(law1, ("U2",), ("S", "T"), ("X",))
    j = entropy_measures(law1, ("U1",), ("S", "T"), ("U2",))
    gaps = (
        a[1] - b[1],
        a[2] - b[2],
        c[1] - d[1],
        c[2] - d[2],
        a[1] + a2x + j - (b[1] + b[2]),
        c[1] + c2x + j - (d[1] + d[2]),
        c[1] + a2x + j - (d[1] + b[2]),
        a[1] + c2x + j - (b[1] + d[2]),
    )
    return max(gaps)


def _equal_eval(prob, labeling, aux, tol, method, cap):
    _check_equal(prob, aux, cap)
    if not labeling.marginals_equal(prob):
        raise InputError("null X-marginals differ across receivers; use bc_diff_region")
    law_by_source = {0: _equal_law(prob.p, prob, aux),
                     1: _equal_law(prob.q, prob, aux)}
    flags = (labeling.h1, labeling.h2)
    p_laws = tuple(law_by_source[h] for h in flags)
    q_laws = tuple(law_by_source[1 - h] for h in flags)
    gap = _equal_rate_gap(*p_laws)
    if gap > FEAS_SLACK:
        return gap, None

    p_t = aux.p_t.probs
    jobs, offsets = {}, {}
    for i in (1, 2):
        q_src = labeling.source_alt(prob, i)
        refs = _equal_references(prob, q_laws[i - 1], q_src, p_t, i)
        for row in _equal_rows(i):
            name = row[0]
            jobs[(name, i)] = _compile_equal(name, p_laws[i - 1], refs, i)
            offsets[(name, i)] = _offset(p_laws[i - 1], row[4])

    keys = tuple(jobs)
    with ThreadPoolExecutor(max_workers=workers()) as pool:
        reports = dict(zip(keys, pool.map(
            lambda k: solve(jobs[k], tol=tol, method=method), keys)))
    values = {}
    for key, rep in reports.items():
        if math.isnan(rep.value):
            raise InfeasibleError(
                f"component {key[0]} for receiver {key[1]} reported an "
                "inconsistent coupling")
        values[key] = float(rep.value + offsets[key])

    components = {name: (values[(name, 1)], values[(name, 2)])
                  for name in EQUAL_COMPONENT_NAMES}
    caps = tuple(min(components[name][i] for name in EQUAL_COMPONENT_NAMES)
                 for i in (0, 1))
    std, da, db, miss = (components[n] for n in EQUAL_COMPONENT_NAMES)
    penalty = entropy_measures(p_laws[0], ("U1",), ("S", "T"), ("U2",))
    pair_sum = min(std[0] + std[1], std[0] + da[1], std[0] + db[1],
                   std[1] + da[0], std[1] + db[0], miss[0] + miss[1])
    sum_caps = (pair_sum - penalty,
                min(da[0], db[0]) + min(da[1], db[1]) - 2.0 * penalty)
    return gap, BcRegion(components, caps, sum_caps, penalty)


def bc_equal_region(prob: HypothesisProblem, labeling: BcLabeling, aux: BcEqualAux,
                    tol: float = 1e-6, method: str = "ipf",
                    cap: int = AXIS_CAP) -> BcRegion:
    """Evaluate the layered-code region for one auxiliary choice.

    Requires the two receivers' null X-marginals to coincide, and the
    auxiliary to satisfy the eight rate conditions within slack; the inner
    minimizations run concurrently, region assembly is deterministic.
    """
    gap, region = _equal_eval(prob, labeling, aux, tol, method, cap)
    if region is None:
        raise InfeasibleError(f"rate conditions violated by {gap:.3g}")
    return region


# -------------------------------------------------- per-receiver (diff) route

def _check_diff(prob: HypothesisProblem, aux: BcDiffAux, cap: int):
    if prob.variant != "BC":
        raise InputError(f"expected BC problem, got {prob.variant}")
    nx, ny1, ny2 = (a.size for a in prob.p.axes)
    nw = prob.channel.input_axes[0].size
    nv1, nv2 = (a.size for a in prob.channel.output_axes)
    ns = aux.p_s1_given_x.output_axes[0].size
    sizes = {"S": ns, "X": nx, "Y1": ny1, "Y2": ny2, "W": nw,
             "V1": nv1, "V2": nv2}
    over = {k: v for k, v in sizes.items() if v > cap}
    if over:
        raise InputError(f"alphabet sizes {over} exceed the cap {cap}")
    if aux.p_s1_given_x.input_axes[0].size != nx:
        raise InputError("quantizer input size does not match |X|")
    if aux.p_t.axes[0].size != nw:
        raise InputError("T must range over the channel input alphabet")


def _diff_quantizer(aux: BcDiffAux, receiver: int) -> Channel:
    return (aux.p_s1_given_x, aux.p_s2_given_x)[_receiver_index(receiver)]


def _diff_source_law(source: JointPmf, aux: BcDiffAux, receiver: int) -> JointPmf:
    y = f"Y{receiver}"
    return compose(marginalize(source, keep=("X", y)), _diff_quantizer(aux, receiver))


def _diff_channel_law(prob: HypothesisProblem, aux: BcDiffAux, receiver: int) -> JointPmf:
    idx = _receiver_index(receiver)
    out = compose(aux.p_t, (aux.p_t1_given_t, aux.p_t2_given_t)[idx])
    out = compose(out, (aux.p_w1_given_t, aux.p_w2_given_t)[idx])
    gamma = Channel((Alphabet("W", prob.channel.input_axes[0].size),),
                    (prob.channel.output_axes[idx],),
                    _gamma_single(prob.channel, receiver))
    return compose(out, gamma)


def bc_diff_laws(prob: HypothesisProblem, labeling: BcLabeling, aux: BcDiffAux,
                 receiver: int = 1, cap: int = AXIS_CAP) -> tuple:
    """One receiver's null laws: source side over (X, Y_i, S) and channel side
    over (T, T_i, W, V_i)."""
    _receiver_index(receiver)
    _check_diff(prob, aux, cap)
    return (_diff_source_law(labeling.source_null(prob, receiver), aux, receiver),
            _diff_channel_law(prob, aux, receiver))


def _compile_diff(name: str, src_law: JointPmf, ref_own: JointPmf,
                  ref_cross: JointPmf, receiver: int) -> CouplingProblem:
    y = f"Y{receiver}"
    floor = EntropyFloor(("S",), (y,),
                         entropy_measures(src_law, ("S",), conditioning_axes=(y,)))
    if name == "standard":
        pins = (MarginalConstraint(("S", "X"), marginalize(src_law, keep=("S", "X"))),
                MarginalConstraint(("S", y), marginalize(src_law, keep=("S", y))))
        return CouplingProblem(ref_own, pins)
    if name == "dec":
        pins = (MarginalConstraint(("S", "X"), marginalize(src_law, keep=("S", "X"))),
                MarginalConstraint((y,), marginalize(src_law, keep=(y,))))
        return CouplingProblem(ref_own, pins, floor)
    if name == "cross":
        # the free coupling is pinned to the *other* code's quantizer on the
        # source side but must look typical to this receiver; the pinned set
        # can be empty, in which case the component is +inf (see _diff_eval)
        pins = (MarginalConstraint(("S", "X"), marginalize(ref_cross, keep=("S", "X"))),
                MarginalConstraint((y,), marginalize(src_law, keep=(y,))))
        return CouplingProblem(ref_cross, pins, floor)
    if name == "miss":
        raise InputError("component 'miss' is a closed-form expectation; "
                         "no coupling problem exists")
    raise InputError(f"unknown component {name!r}; have {DIFF_COMPONENT_NAMES}")


def diff_component_problem(name: str, prob: HypothesisProblem, labeling: BcLabeling,
                           aux: BcDiffAux, receiver: int = 1,
                           cap: int = AXIS_CAP) -> CouplingProblem:
    """Compile one coupling-form component into a standalone problem."""
    _receiver_index(receiver)
    _check_diff(prob, aux, cap)
    p_src = labeling.source_null(prob, receiver)
    q_src = labeling.source_alt(prob, receiver)
    y = f"Y{receiver}"
    src_law = _diff_source_law(p_src, aux, receiver)
    ref_own = compose(marginalize(q_src, keep=("X", y)),
                      _diff_quantizer(aux, receiver))
    ref_cross = compose(marginalize(q_src, keep=("X", y)),
                        _diff_quantizer(aux, 3 - receiver))
    return _compile_diff(name, src_law, ref_own, ref_cross, receiver)


def _cross_source_value(report, meta, src_law: JointPmf, receiver: int) -> float:
    """Source half of the cross component, +inf when its pinned set is empty."""
    margin, ref_cross = meta
    if report is None:
        return math.inf
    if not math.isnan(report.value):
        return float(report.value)
    if margin > 1e-6:
        raise InfeasibleError(
            f"component cross for receiver {receiver} reported an "
            "inconsistent coupling")
    # the set is a thin slab around the independent coupling, which attains
    # the entropy ceiling; its divergence is the limiting value
    a = marginalize(ref_cross, keep=("X", "S")).probs
    p_y = marginalize(src_law, keep=(f"Y{receiver}",)).probs
    prod = JointPmf(ref_cross.axes, np.einsum("xs,y->xys", a, p_y))
    return kl_divergence(prod, ref_cross)


def _transport_min(cost: np.ndarray, pin_pair: np.ndarray,
                   pin_chan: np.ndarray) -> float:
    """Minimize sum(pi * cost) over pmfs pi on (T, Ti, W) with pi_{T Ti} and
    pi_{T W} pinned; +inf when the pins force mass onto infinite-cost cells."""
    nt, nti, nw = cost.shape
    flat = cost.reshape(-1)
    finite = np.isfinite(flat)
    idx = np.arange(flat.size)
    a_pair = np.kron(np.eye(nt * nti), np.ones(nw))
    a_chan = np.zeros((nt * nw, flat.size))
    a_chan[(idx // (nti * nw)) * nw + idx % nw, idx] = 1.0
    res = linprog(np.where(finite, flat, 0.0),
                  A_eq=np.vstack([a_pair, a_chan]),
                  b_eq=np.concatenate([pin_pair.reshape(-1), pin_chan.reshape(-1)]),
                  bounds=[(0.0, None) if ok else (0.0, 0.0) for ok in finite],
                  method="highs")
    if res.status == 2:
        return math.inf
    if not res.success:
        raise InfeasibleError(f"transport subproblem failed: {res.message}")
    return max(float(res.fun), 0.0)


def _cross_channel_value(ch_law: JointPmf, ch_law_other: JointPmf,
                         gamma: np.ndarray, receiver: int) -> float:
    """Channel half of the cross component: cheapest way to couple this
    receiver's protected pair with the other code's (T, W) law, priced by
    D(p_{V_i | T T_i} || Gamma_{V_i | W})."""
    m = marginalize(ch_law, keep=("T", f"T{receiver}", f"V{receiver}")).probs
    mass = m.sum(axis=2)
    nt, nti = mass.shape
    cost = np.zeros((nt, nti, gamma.shape[0]))
    for t in range(nt):
        for ti in range(nti):
            if mass[t, ti] <= 0.0:
                continue  # pinned to zero probability; price is irrelevant
            row = m[t, ti] / mass[t, ti]
            for w in range(gamma.shape[0]):
                cost[t, ti, w] = kl_divergence_raw(row, gamma[w])
    pin_chan = marginalize(ch_law_other, keep=("T", "W")).probs
    return _transport_min(cost, mass, pin_chan)


def _diff_miss(p_src: JointPmf, q_src: JointPmf, ch_law: JointPmf,
               p_t: np.ndarray, gamma: np.ndarray, receiver: int) -> float:
    y = f"Y{receiver}"
    head = kl_divergence(marginalize(p_src, keep=(y,)),
                         marginalize(q_src, keep=(y,)))
    m_tv = marginalize(ch_law, keep=("T", f"V{receiver}")).probs
    return head + kl_divergence_raw(m_tv, p_t[:, None] * gamma)


def _diff_eval(prob, labeling, aux, tol, method, cap):
    _check_diff(prob, aux, cap)
    if labeling.marginals_equal(prob):
        raise InputError("null X-marginals coincide across receivers; "
                         "use bc_equal_region")
    p_t = aux.p_t.probs
    src_laws, ch_laws, gammas, offsets = {}, {}, {}, {}
    gap = -math.inf
    for i in (1, 2):
        src_laws[i] = _diff_source_law(labeling.source_null(prob, i), aux, i)
        ch_laws[i] = _diff_channel_law(prob, aux, i)
        gammas[i] = _gamma_single(prob.channel, i)
        rate_src = entropy_measures(src_laws[i], ("S",), (f"Y{i}",), ("X",))
        rate_ch = entropy_measures(ch_laws[i], ("W",), ("T", f"T{i}"), (f"V{i}",))
        offsets[i] = rate_ch - rate_src
        gap = max(gap, rate_src - rate_ch)
    if gap > FEAS_SLACK:
        return gap, None

    jobs, cross_meta = {}, {}
    for i in (1, 2):
        q_src = labeling.source_alt(prob, i)
        base = marginalize(q_src, keep=("X", f"Y{i}"))
        ref_own = compose(base, _diff_quantizer(aux, i))
        ref_cross = compose(base, _diff_quantizer(aux, 3 - i))
        for name in ("standard", "dec"):
            jobs[(name, i)] = _compile_diff(name, src_laws[i], ref_own,
                                            ref_cross, i)
        # H(S|Y_i) <= H(S), and the cross pin fixes H(S); the floor therefore
        # empties the set exactly when the other code's S is too deterministic
        bound = entropy_measures(src_laws[i], ("S",), conditioning_axes=(f"Y{i}",))
        margin = entropy_measures(marginalize(ref_cross, keep=("S",)), ("S",)) - bound
        cross_meta[i] = (margin, ref_cross)
        if margin >= -1e-9:
            jobs[("cross", i)] = _compile_diff("cross", src_laws[i], ref_own,
                                               ref_cross, i)
    keys = tuple(jobs)
    with ThreadPoolExecutor(max_workers=workers()) as pool:
        reports = dict(zip(keys, pool.map(
            lambda k: solve(jobs[k], tol=tol, method=method), keys)))
    for key, rep in reports.items():
        if key[0] != "cross" and math.isnan(rep.value):
            raise InfeasibleError(
                f"component {key[0]} for receiver {key[1]} reported an "
                "inconsistent coupling")

    values = {}
    for i in (1, 2):
        values[("standard", i)] = float(reports[("standard", i)].value)
        values[("dec", i)] = float(reports[("dec", i)].value + offsets[i])
        src_min = _cross_source_value(reports.get(("cross", i)),
                                      cross_meta[i], src_laws[i], i)
        transport = _cross_channel_value(ch_laws[i], ch_laws[3 - i], gammas[i], i)
        values[("cross", i)] = float(src_min + transport + offsets[i])
        values[("miss", i)] = float(
            _diff_miss(labeling.source_null(prob, i), labeling.source_alt(prob, i),
                       ch_laws[i], p_t, gammas[i], i) + offsets[i])

    components = {name: (values[(name, 1)], values[(name, 2)])
                  for name in DIFF_COMPONENT_NAMES}
    caps = tuple(min(components[name][i] for name in DIFF_COMPONENT_NAMES)
                 for i in (0, 1))
    return gap, BcRegion(components, caps)


def bc_diff_region(prob: HypothesisProblem, labeling: BcLabeling, aux: BcDiffAux,
                   tol: float = 1e-6, method: str = "ipf",
                   cap: int = AXIS_CAP) -> BcRegion:
    """Evaluate the per-receiver-code region for one auxiliary choice.

    Requires the two null X-marginals to differ (the protected codebooks are
    then distinguishable from the source sequence alone) and, per receiver,
    the quantization rate to stay below the channel resolution within slack.
    The region is the rectangle of the two four-way component minima.
    """
    gap, region = _diff_eval(prob, labeling, aux, tol, method, cap)
    if region is None:
        raise InfeasibleError(f"rate condition violated by {gap:.3g}")
    return region


# ------------------------------------------------------------ outer search

@dataclass(frozen=True, eq=False)
class BcOptimizeReport:
    """value: attained reach along the chosen ray; region and aux: best found."""

    value: float
    region: BcRegion
    aux: object
    trace: SearchTrace


def _canonical_map(ns, nu1, nu2, nx, nw) -> np.ndarray:
    grids = np.meshgrid(*(np.arange(n) for n in (ns, nu1, nu2, nx)), indexing="ij")
    return np.asarray(sum(grids) % nw, dtype=np.int64)


def bc_optimize(prob: HypothesisProblem, labeling: BcLabeling,
                search: SearchBudget | None = None, weight: float = 0.5,
                f=None, cap: int = AXIS_CAP) -> BcOptimizeReport:
    """Heuristic outer search over auxiliary choices, maximizing how far the
    region reaches along the ray (weight, 1 - weight) * t.

    Evaluation at a fixed auxiliary is the primary interface; this search is a
    small convenience, not a certified maximum. The route follows the
    marginal-equality flag exactly as the two evaluators do. On the layered
    route the continuous blocks are polished per start while the symbol map f
    is enumerated only when the (S, U1, U2, X) table is tiny, and otherwise
    cycled between the canonical map and random draws.
    """
    if prob.variant != "BC":
        raise InputError(f"expected BC problem, got {prob.variant}")
    if not 0.0 <= weight <= 1.0:
        raise InputError(f"weight must lie in [0, 1], got {weight}")
    search = search or SearchBudget(starts=6, polish_iters=80, rounds=1)
    nx = prob.p.axes[0].size
    nw = prob.channel.input_axes[0].size
    ns = min(nx + 1, cap)
    equal_route = labeling.marginals_equal(prob)

    if equal_route:
        nu = min(2, cap)
        if f is not None:
            maps = [_as_symbol_map(f, (ns, nu, nu, nx), nw, "f")]
        else:
            cells = ns * nu * nu * nx
            if cells <= 8 and nw ** cells <= 64:
                maps = [np.asarray(flat, dtype=np.int64).reshape(ns, nu, nu, nx)
                        for flat in itertools.product(range(nw), repeat=cells)]
            else:
                rng = np.random.default_rng(search.seed)
                maps = [_canonical_map(ns, nu, nu, nx, nw)]
                maps += [rng.integers(0, nw, (ns, nu, nu, nx))
                         for _ in range(max(search.starts - 1, 0))]
        shapes = [(nw,), (nx, nw, ns * nu * nu)]
        t_axis = (Alphabet("T", nw),)
        out_axes = (Alphabet("S", ns), Alphabet("U1", nu), Alphabet("U2", nu))

        def build(arrays, fmap):
            pt, k = arrays
            return BcEqualAux(
                JointPmf(t_axis, pt),
                Channel((Alphabet("X", nx),) + t_axis, out_axes,
                        k.reshape(nx, nw, ns, nu, nu)),
                fmap)

        def attempt(aux):
            return _equal_eval(prob, labeling, aux, 1e-6, "ipf", cap)

        def ladder(a):
            k = np.full((nx, nw, ns, nu, nu), 1e-9)
            for x in range(nx):
                k[x, :, x % ns, :, :] = (1.0 - a) / (nu * nu)
                k[x, :, (x + 1) % ns, :, :] += a / (nu * nu)
            k /= k.sum(axis=(2, 3, 4), keepdims=True)
            return k.reshape(nx, nw, ns * nu * nu)

        pt0 = np.full(nw, 1.0 / nw)
        # a near-uniform layer satisfies the rate conditions with slack, so
        # each symbol map gets at least one feasible start
        anchors = [(pt0, np.full((nx, nw, ns * nu * nu), 1.0 / (ns * nu * nu)))]
        anchors += [(pt0, ladder(a)) for a in (0.45, 0.2, 0.02)]
    else:
        if f is not None:
            raise InputError("f applies only to the layered (equal-marginal) route")
        maps = [None]
        shapes = [(nx, ns), (nx, ns), (nw,), (nw, nw), (nw, nw),
                  (nw * nw, nw), (nw * nw, nw)]
        x_axis, s_axis = (Alphabet("X", nx),), (Alphabet("S", ns),)
        t_axis = (Alphabet("T", nw),)

        def build(arrays, fmap):
            k1, k2, pt, kt1, kt2, kw1, kw2 = arrays
            chans = []
            for i, kt, kw in ((1, kt1, kw1), (2, kt2, kw2)):
                ti = (Alphabet(f"T{i}", nw),)
                chans.append(Channel(t_axis, ti, kt))
                chans.append(Channel(t_axis + ti, (Alphabet("W", nw),),
                                     kw.reshape(nw, nw, nw)))
            return BcDiffAux(Channel(x_axis, s_axis, k1),
                             Channel(x_axis, s_axis, k2),
                             JointPmf(t_axis, pt),
                             chans[0], chans[2], chans[1], chans[3])

        def attempt(aux):
            return _diff_eval(prob, labeling, aux, 1e-6, "ipf", cap)

        def qladder(a):
            k = np.full((nx, ns), 1e-9)
            for x in range(nx):
                k[x, x % ns] = 1.0 - a
                k[x, (x + 1) % ns] += a
            return k / k.sum(axis=1, keepdims=True)

        pt0 = np.full(nw, 1.0 / nw)
        kt0 = np.full((nw, nw), 1.0 / nw)
        kw0 = np.full((nw * nw, nw), 1.0 / nw)
        # uniform channel rows keep the resolution side positive, so ladders
        # only sharpen the quantizers
        anchors = [(np.full((nx, ns), 1.0 / ns),) * 2 + (pt0, kt0, kt0, kw0, kw0)]
        anchors += [(qladder(a), qladder(a), pt0, kt0, kt0, kw0, kw0)
                    for a in (0.45, 0.2, 0.02)]

    per_map = SearchBudget(
        starts=max(1, search.starts // len(maps)) if len(maps) > 1 else search.starts,
        seed=search.seed, polish_iters=search.polish_iters, rounds=search.rounds)

    best_val, best_pick, finals, evals = -math.inf, None, [], 0
    for fmap in maps:
        def objective(arrays, fmap=fmap):
            try:
                gap, region = attempt(build(arrays, fmap))
            except InfeasibleError:
                return -0.5
            if region is None:
                return -0.5 - gap
            # reaches are nonnegative for sane auxiliaries; stray -1e-16
            # noise must not trip the infeasibility sentinel below
            return max(0.0, min(region.reach(weight), 1e6))

        arrays, val, trace = multistart_maximize(objective, shapes, per_map,
                                                 anchors=anchors)
        finals.append(val)
        evals += trace.evaluations
        if val > best_val:
            best_val, best_pick = val, (arrays, fmap)
    if best_val < 0.0 or best_pick is None:
        raise InfeasibleError(
            f"no feasible auxiliary found across {len(maps)} symbol maps"
            if equal_route else "no feasible auxiliary found")
    aux = build(*best_pick)
    _gap, region = attempt(aux)
    if region is None:
        raise InfeasibleError("best candidate lost feasibility on re-evaluation")
    trace = SearchTrace(tuple(finals), int(np.argmax(finals)), evals)
    return BcOptimizeReport(float(region.reach(weight)), region, aux, trace)
