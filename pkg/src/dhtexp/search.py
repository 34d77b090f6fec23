"""Multi-start local search over tuples of stochastic arrays.

Outer maximizations in this package are non-convex; the contract everywhere
is "best over the executed search". Stochastic arrays are parameterized by
row-wise softmax over free logits, starts are seeded independently and run
concurrently, and reduction keeps the best value with a deterministic
tie-break on the start index.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .probability import InputError


@dataclass(frozen=True)
class SearchBudget:
    """starts: independent initializations (anchors count toward the total);
    polish_iters: Nelder-Mead iteration cap per coordinate block; rounds:
    alternation sweeps over coordinate blocks."""

    starts: int = 32
    seed: int = 0
    polish_iters: int = 300
    rounds: int = 2

    def __post_init__(self):
        if self.starts < 1:
            raise InputError("starts must be >= 1")
        if self.polish_iters < 1 or self.rounds < 1:
            raise InputError("polish_iters and rounds must be >= 1")


@dataclass(frozen=True, eq=False)
class SearchTrace:
    start_values: tuple
    best_start: int
    evaluations: int


def softmax_rows(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def to_logits(rows, floor=1e-9):
    return np.log(np.maximum(np.asarray(rows, dtype=float), floor))


def workers() -> int:
    env = os.environ.get("DHT_THREADS", "")
    if env.strip():
        try:
            n = int(env)
        except ValueError:
            raise InputError(f"DHT_THREADS must be an integer, got {env!r}")
        if n < 1:
            raise InputError("DHT_THREADS must be >= 1")
        return n
    return min(os.cpu_count() or 1, 8)


def multistart_maximize(objective, shapes, budget: SearchBudget,
                        anchors=(), blocks=None, fatol=1e-10):
    """Maximize objective(list of stochastic arrays).

    shapes: the array shapes; each normalizes over its last axis.
    anchors: tuples of stochastic arrays used as deterministic starting
    points before random initialization fills the remaining budget.
    blocks: optional disjoint index groups for coordinate alternation.
    Returns (best_arrays, best_value, SearchTrace).
    """
    shapes = [tuple(s) for s in shapes]
    sizes = [int(np.prod(s)) for s in shapes]
    offsets = np.cumsum([0] + sizes)
    if blocks is None:
        blocks = [tuple(range(len(shapes)))]

    def split(vec):
        return [vec[offsets[i]:offsets[i + 1]].reshape(shapes[i])
                for i in range(len(shapes))]

    def polish(vec):
        count = [0]

        def value(v):
            count[0] += 1
            return objective([softmax_rows(a) for a in split(v)])

        best = value(vec)
        for _ in range(budget.rounds):
            for block in blocks:
                idx = np.concatenate([
                    np.arange(offsets[i], offsets[i + 1]) for i in block])

                def neg(sub, vec=vec, idx=idx):
                    full = vec.copy()
                    full[idx] = sub
                    return -value(full)

                res = scipy.optimize.minimize(
                    neg, vec[idx], method="Nelder-Mead",
                    options={"maxiter": budget.polish_iters,
                             "xatol": 1e-6, "fatol": fatol})
                if -res.fun > best:
                    best = -res.fun
                    vec = vec.copy()
                    vec[idx] = res.x
        return vec, best, count[0]

    seeds = np.random.SeedSequence(budget.seed).spawn(budget.starts)
    inits = []
    for k in range(budget.starts):
        if k < len(anchors):
            vec = np.concatenate([
                to_logits(a).ravel() for a in anchors[k]])
        else:
            rng = np.random.default_rng(seeds[k])
            parts = [to_logits(rng.dirichlet(np.ones(s[-1]), size=s[:-1]))
                     for s in shapes]
            vec = np.concatenate([p.ravel() for p in parts])
        inits.append(vec)

    with ThreadPoolExecutor(max_workers=workers()) as pool:
        results = list(pool.map(polish, inits))

    finals = [v for _vec, v, _c in results]
    best_start = int(np.argmax(finals))
    best_vec, best_val, _ = results[best_start]
    best_arrays = [softmax_rows(a) for a in split(best_vec)]
    trace = SearchTrace(tuple(finals), best_start,
                        sum(c for _vec, _v, c in results))
    return best_arrays, best_val, trace
