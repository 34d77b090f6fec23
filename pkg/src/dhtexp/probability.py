"""Finite probability tensors and information measures, base 2 throughout.

Every distribution is a dense tensor over named finite alphabets. Conventions:
0*log(0) = 0 and 0*log(0/0) = 0; p > 0 against q = 0 yields math.inf (never a
large float). "log e" in closed-form expressions means log2(e).

All values are immutable after construction and safe to share across threads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

LOG2E = math.log2(math.e)

MAX_AXIS_SIZE = 8
MAX_ENTRIES = 10 ** 6
SUM_TOL = 1e-12


class InputError(ValueError):
    """A malformed distribution, kernel, document, or argument."""


class BudgetError(RuntimeError):
    """A stated resource bound (memory, search budget) would be exceeded."""


class InfeasibleError(RuntimeError):
    """No feasible point exists for the requested optimization."""


@dataclass(frozen=True)
class Alphabet:
    """A named finite alphabet; symbols are 0..size-1."""

    name: str
    size: int

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise InputError("alphabet name must be a nonempty string")
        if not isinstance(self.size, int) or self.size < 1:
            raise InputError(f"alphabet {self.name!r}: size must be a positive integer")
        if self.size > MAX_AXIS_SIZE:
            raise InputError(
                f"alphabet {self.name!r}: size {self.size} exceeds cap {MAX_AXIS_SIZE}"
            )


def _clean_tensor(arr, shape, what: str) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True, order="C")
    if out.shape != shape:
        raise InputError(f"{what}: shape {out.shape} does not match axes {shape}")
    if out.size > MAX_ENTRIES:
        raise InputError(f"{what}: {out.size} entries exceed cap {MAX_ENTRIES}")
    if np.any(out < -SUM_TOL) or not np.all(np.isfinite(out)):
        raise InputError(f"{what}: entries must be finite and nonnegative")
    np.clip(out, 0.0, None, out=out)
    return out


@dataclass(frozen=True, eq=False)
class JointPmf:
    """A joint pmf over an ordered tuple of named alphabets."""

    axes: tuple
    probs: np.ndarray

    def __post_init__(self):
        axes = tuple(self.axes)
        if not axes:
            raise InputError("pmf needs at least one axis")
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate axis names {names}")
        shape = tuple(a.size for a in axes)
        probs = _clean_tensor(self.probs, shape, "pmf")
        total = float(probs.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise InputError(f"pmf entries sum to {total!r}, not 1 within {SUM_TOL}")
        probs.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "probs", probs)

    @property
    def names(self) -> tuple:
        return tuple(a.name for a in self.axes)

    def axis(self, name: str) -> Alphabet:
        for a in self.axes:
            if a.name == name:
                return a
        raise InputError(f"axis {name!r} not in {self.names}")

    def index(self, name: str) -> int:
        for i, a in enumerate(self.axes):
            if a.name == name:
                return i
        raise InputError(f"axis {name!r} not in {self.names}")

    def to_dict(self) -> dict:
        return {
            "axes": [{"name": a.name, "size": a.size} for a in self.axes],
            "probs": [float(v) for v in self.probs.ravel(order="C")],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "JointPmf":
        try:
            axes = tuple(Alphabet(a["name"], int(a["size"])) for a in doc["axes"])
            flat = np.asarray(doc["probs"], dtype=np.float64)
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed pmf document: {exc}") from exc
        shape = tuple(a.size for a in axes)
        if flat.size != int(np.prod(shape)):
            raise InputError(
                f"pmf document: {flat.size} probs for shape {shape}"
            )
        return cls(axes, flat.reshape(shape))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "JointPmf":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class Channel:
    """A conditional law: for each input index, a pmf over the output axes."""

    input_axes: tuple
    output_axes: tuple
    kernel: np.ndarray

    def __post_init__(self):
        in_axes = tuple(self.input_axes)
        out_axes = tuple(self.output_axes)
        names = [a.name for a in in_axes + out_axes]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate axis names {names}")
        if not out_axes:
            raise InputError("channel needs at least one output axis")
        shape = tuple(a.size for a in in_axes) + tuple(a.size for a in out_axes)
        kernel = _clean_tensor(self.kernel, shape, "channel kernel")
        out_dims = tuple(range(len(in_axes), len(shape)))
        sums = kernel.sum(axis=out_dims) if out_dims else kernel
        if np.any(np.abs(sums - 1.0) > SUM_TOL):
            worst = float(np.max(np.abs(sums - 1.0)))
            raise InputError(
                f"channel rows must sum to 1 within {SUM_TOL} (worst off by {worst:.3g})"
            )
        kernel.setflags(write=False)
        object.__setattr__(self, "input_axes", in_axes)
        object.__setattr__(self, "output_axes", out_axes)
        object.__setattr__(self, "kernel", kernel)

    @property
    def input_names(self) -> tuple:
        return tuple(a.name for a in self.input_axes)

    @property
    def output_names(self) -> tuple:
        return tuple(a.name for a in self.output_axes)

    def to_dict(self) -> dict:
        return {
            "input_axes": [{"name": a.name, "size": a.size} for a in self.input_axes],
            "output_axes": [{"name": a.name, "size": a.size} for a in self.output_axes],
            "kernel": [float(v) for v in self.kernel.ravel(order="C")],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Channel":
        try:
            ins = tuple(Alphabet(a["name"], int(a["size"])) for a in doc["input_axes"])
            outs = tuple(Alphabet(a["name"], int(a["size"])) for a in doc["output_axes"])
            flat = np.asarray(doc["kernel"], dtype=np.float64)
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed channel document: {exc}") from exc
        shape = tuple(a.size for a in ins) + tuple(a.size for a in outs)
        if flat.size != int(np.prod(shape)):
            raise InputError(f"channel document: {flat.size} entries for shape {shape}")
        return cls(ins, outs, flat.reshape(shape))


# Axis-name conventions per variant: (source axes, channel inputs, channel outputs).
# MAC side information may arrive split as ("Yb", "Z") for conditional-independence
# structured problems; both forms are accepted.
_VARIANT_ROLES = {
    "DMC": ((("X", "Y"),), ("W",), ("V",)),
    "MAC": ((("X1", "X2", "Y"), ("X1", "X2", "Yb", "Z")), ("W1", "W2"), ("V",)),
    "BC": ((("X", "Y1", "Y2"),), ("W",), ("V1", "V2")),
}


@dataclass(frozen=True, eq=False)
class HypothesisProblem:
    """Joint source laws under each hypothesis plus the communication channel.

    p is the law under H=0, q under H=1; both live on identical axes whose
    names follow the variant's role conventions above.
    """

    p: JointPmf
    q: JointPmf
    channel: Channel
    variant: str

    def __post_init__(self):
        if self.variant not in _VARIANT_ROLES:
            raise InputError(f"variant must be one of {sorted(_VARIANT_ROLES)}")
        if self.p.axes != self.q.axes:
            raise InputError("p and q must share identical axes")
        source_options, ch_in, ch_out = _VARIANT_ROLES[self.variant]
        if self.p.names not in source_options:
            raise InputError(
                f"{self.variant} sources must use axes from {source_options}, got {self.p.names}"
            )
        if self.channel.input_names != ch_in or self.channel.output_names != ch_out:
            raise InputError(
                f"{self.variant} channel must map {ch_in} to {ch_out}, got "
                f"{self.channel.input_names} to {self.channel.output_names}"
            )

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "p": self.p.to_dict(),
            "q": self.q.to_dict(),
            "channel": self.channel.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "HypothesisProblem":
        try:
            variant = doc["variant"]
            p = JointPmf.from_dict(doc["p"])
            q = JointPmf.from_dict(doc["q"])
            channel = Channel.from_dict(doc["channel"])
        except KeyError as exc:
            raise InputError(f"problem document missing field {exc}") from exc
        return cls(p, q, channel, variant)


def kl_divergence(p: JointPmf, q: JointPmf) -> float:
    """D(p || q) in bits; math.inf when p puts mass where q has none."""
    if p.axes != q.axes:
        raise InputError(f"axis mismatch: {p.names} vs {q.names}")
    return kl_divergence_raw(p.probs, q.probs)


def kl_divergence_raw(p: np.ndarray, q: np.ndarray) -> float:
    # Shared kernel for plain arrays; assumes equal shapes and nonnegativity.
    mask = p > 0.0
    if np.any(q[mask] <= 0.0):
        return math.inf
    pm = p[mask]
    return float(np.sum(pm * np.log2(pm / q[mask])))


def _entropy_of_marginal(p: JointPmf, names: tuple) -> float:
    m = marginalize(p, keep=names).probs if names else None
    if m is None:
        return 0.0
    pos = m[m > 0.0]
    return float(-np.sum(pos * np.log2(pos)))


def _as_name_tuple(p: JointPmf, axes) -> tuple:
    if isinstance(axes, str):
        axes = (axes,)
    names = tuple(axes)
    for n in names:
        p.index(n)
    if len(set(names)) != len(names):
        raise InputError(f"repeated axis in {names}")
    return names


def entropy_measures(p, target_axes, conditioning_axes=(), versus_axes=None) -> float:
    """H(target | conditioning) in bits, or I(target; versus | conditioning).

    target_axes / conditioning_axes / versus_axes are axis names (a string or
    an iterable of strings). The three sets must be disjoint. With
    versus_axes=None this is a (conditional) entropy; otherwise a (conditional)
    mutual information.
    """
    tgt = _as_name_tuple(p, target_axes)
    cond = _as_name_tuple(p, conditioning_axes)
    if set(tgt) & set(cond):
        raise InputError(f"target {tgt} overlaps conditioning {cond}")
    if versus_axes is None:
        return _entropy_of_marginal(p, tgt + cond) - _entropy_of_marginal(p, cond)
    vs = _as_name_tuple(p, versus_axes)
    if set(vs) & (set(tgt) | set(cond)):
        raise InputError(f"versus {vs} overlaps target or conditioning axes")
    h_given_cond = _entropy_of_marginal(p, tgt + cond) - _entropy_of_marginal(p, cond)
    both = tgt + cond + vs
    h_given_more = _entropy_of_marginal(p, both) - _entropy_of_marginal(p, cond + vs)
    return h_given_cond - h_given_more


def marginalize(p: JointPmf, keep=None, drop=None) -> JointPmf:
    """Sum out axes; exactly one of keep/drop names the axes (order preserved
    from p)."""
    if (keep is None) == (drop is None):
        raise InputError("pass exactly one of keep= or drop=")
    if keep is not None:
        kept = set(_as_name_tuple(p, keep))
    else:
        kept = set(p.names) - set(_as_name_tuple(p, drop))
    if not kept:
        raise InputError("cannot marginalize away every axis")
    drop_dims = tuple(i for i, a in enumerate(p.axes) if a.name not in kept)
    out_axes = tuple(a for a in p.axes if a.name in kept)
    probs = p.probs.sum(axis=drop_dims) if drop_dims else p.probs
    return JointPmf(out_axes, _renormalize(probs))


def condition(p: JointPmf, assignments: dict) -> JointPmf:
    """The conditional law given {axis: symbol}; errors on zero-probability
    events."""
    if not assignments:
        raise InputError("no axes to condition on")
    index = [slice(None)] * len(p.axes)
    for name, value in assignments.items():
        a = p.axis(name)
        if not (isinstance(value, (int, np.integer)) and 0 <= value < a.size):
            raise InputError(f"symbol {value!r} outside alphabet {name!r} of size {a.size}")
        index[p.index(name)] = int(value)
    sub = p.probs[tuple(index)]
    mass = float(sub.sum())
    if mass <= 0.0:
        raise InputError(f"conditioning on zero-probability event {assignments}")
    out_axes = tuple(a for a in p.axes if a.name not in assignments)
    if not out_axes:
        raise InputError("conditioning on every axis leaves no distribution")
    return JointPmf(out_axes, sub / mass)


def conditional(p: JointPmf, target_axes, given_axes, fill: str | None = None) -> Channel:
    """Extract the kernel p(target | given) as a Channel.

    Conditioning cells with zero mass have no defined row; they error unless
    fill="uniform", which is only sound when the caller reweights such rows by
    their (zero) probability.
    """
    tgt = _as_name_tuple(p, target_axes)
    giv = _as_name_tuple(p, given_axes)
    if set(tgt) & set(giv):
        raise InputError(f"target {tgt} overlaps given {giv}")
    joint = marginalize(p, keep=giv + tgt)
    # reorder to given-first, target-second
    perm = [joint.index(n) for n in giv] + [joint.index(n) for n in tgt]
    arr = np.transpose(joint.probs, perm)
    giv_shape = arr.shape[: len(giv)]
    tgt_dims = tuple(range(len(giv), arr.ndim))
    mass = arr.sum(axis=tgt_dims)
    if np.any(mass <= 0.0):
        if fill != "uniform":
            raise InputError(
                f"zero-mass conditioning cell extracting p({tgt}|{giv}); "
                "pass fill='uniform' only when such rows carry no weight"
            )
        tgt_size = int(np.prod(arr.shape[len(giv):]))
        arr = arr.copy()
        arr[mass <= 0.0] = 1.0 / tgt_size
        mass = arr.sum(axis=tgt_dims)
    kernel = arr / mass.reshape(giv_shape + (1,) * len(tgt))
    in_axes = tuple(p.axis(n) for n in giv)
    out_axes = tuple(p.axis(n) for n in tgt)
    return Channel(in_axes, out_axes, kernel)


def compose(p: JointPmf, channel: Channel) -> JointPmf:
    """Extend p by the channel: result over p's axes plus the channel outputs."""
    for a in channel.input_axes:
        have = p.axis(a.name)
        if have.size != a.size:
            raise InputError(
                f"axis {a.name!r}: pmf size {have.size} vs channel size {a.size}"
            )
    for a in channel.output_axes:
        if a.name in p.names:
            raise InputError(f"output axis {a.name!r} already present in pmf")
    letters = {}
    for a in p.axes + channel.output_axes:
        letters[a.name] = chr(ord("a") + len(letters))
    p_sub = "".join(letters[n] for n in p.names)
    k_sub = "".join(letters[n] for n in channel.input_names + channel.output_names)
    out_names = p.names + channel.output_names
    out_sub = "".join(letters[n] for n in out_names)
    probs = np.einsum(f"{p_sub},{k_sub}->{out_sub}", p.probs, channel.kernel)
    out_axes = p.axes + channel.output_axes
    return JointPmf(out_axes, _renormalize(probs))


def product(p: JointPmf, q: JointPmf) -> JointPmf:
    """Independent product over disjoint axis names."""
    if set(p.names) & set(q.names):
        raise InputError(f"axes overlap: {p.names} vs {q.names}")
    probs = np.multiply.outer(p.probs, q.probs)
    return JointPmf(p.axes + q.axes, _renormalize(probs))


def _renormalize(probs: np.ndarray) -> np.ndarray:
    # exact division keeps the construction-time sum check honest
    total = probs.sum()
    if total <= 0.0:
        raise InputError("distribution with zero total mass")
    return probs / total


def channel_capacity(ch: Channel, tol: float = 1e-9) -> float:
    """Channel capacity in bits by alternating maximization.

    Stops when the standard upper/lower capacity bracket is tol-tight and
    returns the bracket midpoint.
    """
    if tol <= 0.0:
        raise InputError("tol must be positive")
    if len(ch.input_axes) != 1 or len(ch.output_axes) != 1:
        raise InputError("capacity is defined here for single-input single-output channels")
    w = np.asarray(ch.kernel, dtype=np.float64)  # (in, out)
    n_in = w.shape[0]
    p = np.full(n_in, 1.0 / n_in)
    # rows with mass where others have none force care with logs; mask per row
    for _ in range(100000):
        qv = p @ w
        # per-input divergence D(w_x || q) in bits
        div = np.zeros(n_in)
        for x in range(n_in):
            div[x] = kl_divergence_raw(w[x], qv)
        lower = float(np.dot(p, div))
        upper = float(np.max(div))
        if upper - lower <= tol:
            return 0.5 * (upper + lower)
        # multiplicative update; subtract max for stability
        logp = np.log2(np.where(p > 0, p, 1e-300)) + div
        logp -= logp.max()
        p = np.exp2(logp)
        p /= p.sum()
    raise BudgetError("capacity bracket failed to close; kernel may be degenerate")


def empirical_type(*seqs, alphabets=None) -> JointPmf:
    """Joint type of equal-length symbol sequences: counts divided by n."""
    if not seqs:
        raise InputError("need at least one sequence")
    arrays = [np.asarray(s, dtype=np.int64) for s in seqs]
    n = arrays[0].size
    if n == 0:
        raise InputError("empty sequences have no type")
    for arr in arrays:
        if arr.ndim != 1 or arr.size != n:
            raise InputError("sequences must be 1-D and of equal length")
    if alphabets is None:
        names = ("A", "B", "C", "D", "E", "F", "G", "H")[: len(arrays)]
        alphabets = tuple(
            Alphabet(names[i], int(arr.max()) + 1) for i, arr in enumerate(arrays)
        )
    else:
        alphabets = tuple(alphabets)
        if len(alphabets) != len(arrays):
            raise InputError("one alphabet per sequence required")
    shape = tuple(a.size for a in alphabets)
    for arr, a in zip(arrays, alphabets):
        if arr.min() < 0 or arr.max() >= a.size:
            raise InputError(f"symbols outside alphabet {a.name!r} of size {a.size}")
    flat = np.ravel_multi_index([arr for arr in arrays], shape)
    counts = np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape)
    return JointPmf(alphabets, counts / n)
