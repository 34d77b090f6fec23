"""Inner convex programs: minimize D(pi || R) over joint pmfs pi subject to
fixed-marginal equality constraints and at most one conditional-entropy floor
H(A|B) >= c.

The objective is convex, marginal constraints are affine, and {H(A|B) >= c} is
convex because conditional entropy is concave in the joint law. Two routes are
provided: solve() (iterative proportional fitting seed, then projected gradient
with Dykstra projections and an exact penalty for the entropy floor when it is
violated) and brute_force() (exhaustive lattice search over the free
coordinates left after eliminating the equality constraints, with an explicit
continuity-modulus optimality gap).

Support handling: any pi with mass outside supp(R) has infinite divergence, so
the minimization effectively runs on supp(R). When the constraints are
satisfiable on the full simplex but not within supp(R), the value is +inf with
feasible=True; when they are satisfiable nowhere, feasible=False.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .probability import InputError, BudgetError, JointPmf, LOG2E

IPF_SWEEPS = 10 ** 4
IPF_RESIDUAL = 1e-6
SLACK = 1e-9
_FLOOR = 1e-18


@dataclass(frozen=True)
class MarginalConstraint:
    """Fix the marginal of pi on the named axes to a target pmf."""

    axes: tuple
    target: JointPmf

    def __post_init__(self):
        axes = (self.axes,) if isinstance(self.axes, str) else tuple(self.axes)
        if set(self.target.names) != set(axes):
            raise InputError(
                f"marginal target over {self.target.names}, constraint names {axes}"
            )
        object.__setattr__(self, "axes", axes)


@dataclass(frozen=True)
class EntropyFloor:
    """Require H(target | given) >= bound, in bits."""

    target_axes: tuple
    given_axes: tuple
    bound: float

    def __post_init__(self):
        tgt = (self.target_axes,) if isinstance(self.target_axes, str) else tuple(self.target_axes)
        giv = (self.given_axes,) if isinstance(self.given_axes, str) else tuple(self.given_axes)
        if set(tgt) & set(giv):
            raise InputError(f"entropy target {tgt} overlaps conditioning {giv}")
        if not tgt:
            raise InputError("entropy floor needs target axes")
        if not math.isfinite(self.bound):
            raise InputError("entropy bound must be finite")
        object.__setattr__(self, "target_axes", tgt)
        object.__setattr__(self, "given_axes", giv)


@dataclass(frozen=True, eq=False)
class CouplingProblem:
    reference: JointPmf
    marginals: tuple = ()
    entropy: EntropyFloor | None = None

    def __post_init__(self):
        marginals = tuple(self.marginals)
        names = set(self.reference.names)
        for mc in marginals:
            if not isinstance(mc, MarginalConstraint):
                raise InputError("marginals must be MarginalConstraint instances")
            missing = set(mc.axes) - names
            if missing:
                raise InputError(f"constraint axes {missing} not in reference {names}")
        if self.entropy is not None:
            used = set(self.entropy.target_axes) | set(self.entropy.given_axes)
            if used - names:
                raise InputError(f"entropy axes {used - names} not in reference")
        object.__setattr__(self, "marginals", marginals)


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Outcome of one inner minimization.

    value: optimal divergence in bits (may be math.inf); nan when infeasible.
    argmin: an optimizer (a marginal-feasible witness when value is +inf);
        None when infeasible.
    kkt_residual: diagnostic; max of constraint violations and the projected
        stationarity residual at the returned point.
    gap: brute_force only; certified |value - true optimum| bound.
    """

    value: float
    argmin: JointPmf | None
    iterations: int
    kkt_residual: float
    feasible: bool
    gap: float | None = None


# --------------------------------------------------------------- workspace

class _Workspace:
    """Reference-shaped tensors and precomputed constraint geometry."""

    def __init__(self, prob: CouplingProblem, respect_support: bool):
        ref = prob.reference
        self.axes = ref.axes
        self.names = ref.names
        self.shape = ref.probs.shape
        self.ndim = len(self.shape)
        self.ref = np.asarray(ref.probs, dtype=np.float64)
        self.mask = (self.ref > 0.0) if respect_support else np.ones_like(self.ref, bool)
        self.maskf = self.mask.astype(np.float64)
        self.size = self.ref.size
        self.constraints = []
        for mc in prob.marginals:
            dims = tuple(sorted(ref.index(n) for n in mc.axes))
            order = tuple(self.names[d] for d in dims)
            tgt = mc.target
            perm = [tgt.index(n) for n in order]
            arr = np.transpose(tgt.probs, perm).astype(np.float64)
            self.constraints.append((dims, arr))
        self.entropy = prob.entropy
        if prob.entropy is not None:
            ent = prob.entropy
            self.ent_ab = tuple(sorted(ref.index(n) for n in ent.target_axes + ent.given_axes))
            self.ent_b = tuple(sorted(ref.index(n) for n in ent.given_axes))
            self.ent_bound = float(ent.bound)
        self._counts = [self._marg(self.maskf, dims) for dims, _ in self.constraints]
        self._total_count = float(self.maskf.sum())

    def _drop(self, dims):
        return tuple(d for d in range(self.ndim) if d not in dims)

    def _marg(self, arr, dims):
        drop = self._drop(dims)
        return arr.sum(axis=drop) if drop else arr

    def _expand(self, small, dims):
        shape = [1] * self.ndim
        for d in dims:
            shape[d] = self.shape[d]
        return small.reshape(shape)

    def residual(self, pi) -> float:
        worst = abs(float(pi.sum()) - 1.0)
        for dims, tgt in self.constraints:
            worst = max(worst, float(np.max(np.abs(self._marg(pi, dims) - tgt))))
        return worst

    def ipf(self, base, sweeps=IPF_SWEEPS, stop=1e-11):
        """Multiplicative marginal fitting from base; preserves supp(base)."""
        pi = base / base.sum()
        res = self.residual(pi)
        it = 0
        for it in range(1, sweeps + 1):
            for dims, tgt in self.constraints:
                m = self._marg(pi, dims)
                ratio = np.divide(tgt, m, out=np.zeros_like(tgt), where=m > 0.0)
                pi = pi * self._expand(ratio, dims)
            total = pi.sum()
            if total <= 0.0:
                return pi, math.inf, it
            pi /= total
            res = self.residual(pi)
            if res <= stop:
                break
        return pi, res, it

    def project(self, pi, cycles=200, tol=1e-13):
        """Euclidean projection onto {marginals hold} x {sum 1} x orthant x supp.

        Dykstra's scheme; affine sets need no correction memory, the orthant
        keeps one.
        """
        pi = pi * self.maskf
        e = np.zeros_like(pi)
        for _ in range(cycles):
            prev = pi
            for (dims, tgt), cnt in zip(self.constraints, self._counts):
                m = self._marg(pi, dims)
                adj = np.divide(tgt - m, cnt, out=np.zeros_like(tgt), where=cnt > 0.0)
                pi = pi + self._expand(adj, dims) * self.maskf
            pi = pi + ((1.0 - pi.sum()) / self._total_count) * self.maskf
            y = pi + e
            pi = np.maximum(y, 0.0) * self.maskf
            e = y - pi
            if float(np.max(np.abs(pi - prev))) <= tol:
                break
        return pi

    # objective pieces -----------------------------------------------------

    def divergence(self, pi) -> float:
        on = self.mask & (pi > 0.0)
        off_mass = float(pi[~self.mask].sum()) if not self.mask.all() else 0.0
        if off_mass > 1e-12:
            return math.inf
        p = pi[on]
        return float(np.sum(p * np.log2(p / self.ref[on])))

    def grad_divergence(self, pi):
        safe = np.maximum(pi, _FLOOR)
        g = (np.log2(np.where(self.mask, safe / np.maximum(self.ref, _FLOOR), 1.0))
             + LOG2E)
        return g * self.maskf

    def cond_entropy(self, pi) -> float:
        mab = self._marg(pi, self.ent_ab)
        h = -float(np.sum(mab[mab > 0] * np.log2(mab[mab > 0])))
        if self.ent_b:
            mb = self._marg(pi, self.ent_b)
            h += float(np.sum(mb[mb > 0] * np.log2(mb[mb > 0])))
        return h

    def grad_neg_cond_entropy(self, pi):
        # d(-H(A|B))/d pi(cell) = log2 of the conditional mass at the cell's
        # (A,B) projection; independent of the remaining coordinates.
        mab = np.maximum(self._marg(pi, self.ent_ab), _FLOOR)
        if self.ent_b:
            dims_b_in_ab = tuple(i for i, d in enumerate(self.ent_ab) if d in self.ent_b)
            drop_in_ab = tuple(i for i in range(len(self.ent_ab)) if i not in dims_b_in_ab)
            mb = np.maximum(mab.sum(axis=drop_in_ab), _FLOOR)
            shape = [1] * len(self.ent_ab)
            for i, d in enumerate(self.ent_ab):
                if d in self.ent_b:
                    shape[i] = self.shape[d]
            log_ratio = np.log2(mab) - np.log2(mb.reshape(shape))
        else:
            log_ratio = np.log2(mab)
        return self._expand(log_ratio, self.ent_ab) * self.maskf

    def entropy_violation(self, pi) -> float:
        if self.entropy is None:
            return 0.0
        return max(0.0, self.ent_bound - self.cond_entropy(pi))


def _pgd(ws, pi, obj, grad, project, maxit=3000, ftol=1e-12):
    """Projected gradient with Barzilai-Borwein step and Armijo backtracking."""
    f = obj(pi)
    g = grad(pi)
    step = 1.0 / max(float(np.max(np.abs(g))), 1.0)
    it = 0
    stall = 0
    prev_pi, prev_g = None, None
    for it in range(1, maxit + 1):
        if prev_pi is not None:
            dp = (pi - prev_pi).ravel()
            dg = (g - prev_g).ravel()
            denom = float(dp @ dg)
            if denom > 1e-30:
                step = min(max(float(dp @ dp) / denom, 1e-9), 1e6)
        accepted = False
        for _ in range(40):
            cand = project(pi - step * g)
            fc = obj(cand)
            drop = float(np.sum(g * (pi - cand)))
            if fc <= f - 1e-4 * drop + 1e-15:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        move = float(np.max(np.abs(cand - pi)))
        prev_pi, prev_g = pi, g
        pi, f_new = cand, fc
        g = grad(pi)
        if abs(f - f_new) <= ftol * max(1.0, abs(f)) and move <= 1e-10:
            stall += 1
            if stall >= 5:
                f = f_new
                break
        else:
            stall = 0
        f = f_new
    return pi, f, it


def _max_entropy_point(ws, pi0, need, maxit=3000):
    """Push H(A|B) up over the feasible affine slice; stop once need is met."""
    best = pi0
    best_h = ws.cond_entropy(pi0)
    if best_h >= need:
        return best, best_h, 0

    def obj(pi):
        return -ws.cond_entropy(pi)

    def grad(pi):
        return ws.grad_neg_cond_entropy(pi)

    pi = pi0
    f = obj(pi)
    it_total = 0
    for _ in range(60):
        pi, f, it = _pgd(ws, pi, obj, grad, ws.project, maxit=200)
        it_total += it
        if -f >= need or it < 5:
            break
        if it_total >= maxit:
            break
    h = -f
    if h > best_h:
        best, best_h = pi, h
    return best, best_h, it_total


def _kkt_residual(ws, pi, lam):
    free = ws.mask & (pi > 1e-9)
    g = ws.grad_divergence(pi)
    if ws.entropy is not None and lam > 0.0:
        g = g + lam * ws.grad_neg_cond_entropy(pi)
    rows = []
    for dims, _tgt in ws.constraints:
        small_shape = tuple(ws.shape[d] for d in dims)
        for cell in np.ndindex(*small_shape):
            sel = np.zeros(ws.shape)
            idx = [slice(None)] * ws.ndim
            for d, c in zip(dims, cell):
                idx[d] = c
            sel[tuple(idx)] = 1.0
            rows.append(sel.ravel())
    rows.append(np.ones(ws.size))
    a = np.array(rows)
    af = a[:, free.ravel()]
    gf = g[free].ravel()
    if af.size == 0 or gf.size == 0:
        stat = 0.0
    else:
        nu, *_ = np.linalg.lstsq(af.T, gf, rcond=None)
        stat = float(np.max(np.abs(gf - af.T @ nu))) if gf.size else 0.0
    viol = ws.residual(pi)
    ent = ws.entropy_violation(pi)
    return max(stat, viol, ent)


def _finish(ws, pi, iterations, lam) -> SolveReport:
    pi = ws.project(pi, cycles=400)
    np.clip(pi, 0.0, None, out=pi)
    total = pi.sum()
    if total > 0:
        pi = pi / total
    value = ws.divergence(pi)
    kkt = _kkt_residual(ws, pi, lam)
    return SolveReport(
        value=value,
        argmin=JointPmf(ws.axes, pi),
        iterations=iterations,
        kkt_residual=kkt,
        feasible=True,
    )


def _feasibility(prob: CouplingProblem):
    """Classify the instance.

    Returns (status, point_on_support, iterations) with status one of
    "ok" (solvable on supp(R)), "inf" (feasible only off supp(R); value +inf),
    "infeasible".
    """
    ws_sup = _Workspace(prob, respect_support=True)
    ws_full = _Workspace(prob, respect_support=False)
    it_total = 0

    if prob.entropy is not None:
        cap = sum(math.log2(prob.reference.axis(n).size)
                  for n in prob.entropy.target_axes)
        if ws_sup.ent_bound > cap + SLACK:
            return "infeasible", None, 0, ws_sup

    pi_sup, res_sup, it = ws_sup.ipf(ws_sup.ref.copy())
    it_total += it
    sup_ok = res_sup <= IPF_RESIDUAL
    if sup_ok and prob.entropy is not None:
        pi_sup = ws_sup.project(pi_sup)
        point, h, it = _max_entropy_point(ws_sup, pi_sup, ws_sup.ent_bound - SLACK)
        it_total += it
        if h < ws_sup.ent_bound - SLACK:
            sup_ok = False
        else:
            pi_sup = point
    if sup_ok:
        return "ok", ws_sup.project(pi_sup), it_total, ws_sup

    base = np.full(ws_full.shape, 1.0 / ws_full.size)
    pi_full, res_full, it = ws_full.ipf(base)
    it_total += it
    full_ok = res_full <= IPF_RESIDUAL
    if full_ok and prob.entropy is not None:
        pi_full = ws_full.project(pi_full)
        point, h, it = _max_entropy_point(ws_full, pi_full, ws_full.ent_bound - SLACK)
        it_total += it
        if h < ws_full.ent_bound - SLACK:
            full_ok = False
        else:
            pi_full = point
    if full_ok:
        return "inf", ws_full.project(pi_full), it_total, ws_sup
    return "infeasible", None, it_total, ws_sup


def solve(prob: CouplingProblem, tol: float = 1e-6, method: str = "ipf") -> SolveReport:
    """Minimize D(pi || reference) under the problem's constraints.

    method="ipf": IPF-seeded projected gradient (default); method="penalty":
    cold-started quadratic-penalty route kept algorithmically separate for
    cross-validation. Both respect supp(reference).
    """
    if not (0.0 < tol <= 1e-3):
        raise InputError(f"tol must lie in (0, 1e-3], got {tol}")
    if method not in ("ipf", "penalty"):
        raise InputError(f"unknown method {method!r}")

    status, point, it0, ws = _feasibility(prob)
    if status == "infeasible":
        return SolveReport(math.nan, None, it0, math.inf, feasible=False)
    if status == "inf":
        return SolveReport(
            math.inf,
            JointPmf(prob.reference.axes, point / point.sum()),
            it0,
            0.0,
            feasible=True,
        )
    if method == "penalty":
        return _solve_penalty(prob, ws, tol, it0)

    # IPF limit is the I-projection onto the marginal intersection; it is
    # optimal outright whenever the entropy floor is slack there.
    pi, _res, it1 = ws.ipf(ws.ref.copy(), stop=1e-12)
    pi = ws.project(pi)
    iterations = it0 + it1
    lam = 0.0
    if ws.entropy is not None and ws.entropy_violation(pi) > SLACK:
        pi, lam, it2 = _dual_bisection(ws, pi, point, tol)
        iterations += it2
    return _finish(ws, pi, iterations, lam)


def _lagrangian_min(ws, lam, pi0, maxit=3000):
    """Minimize the smooth convex D(pi||R) - lam * H(A|B) over the slice."""

    def obj(pi):
        return ws.divergence(pi) - lam * ws.cond_entropy(pi)

    def grad(pi):
        return ws.grad_divergence(pi) + lam * ws.grad_neg_cond_entropy(pi)

    return _pgd(ws, pi0, obj, grad, ws.project, maxit=maxit, ftol=1e-14)


def _dual_bisection(ws, pi_slack, pi_feasible, tol):
    """Entropy floor active: maximize the Lagrangian dual over lam >= 0.

    H(pi_lam) is nondecreasing in lam (unique minimizers, strictly convex
    objective), so bisection brackets the multiplier. For any lam whose
    minimizer satisfies the floor, D(pi_lam) - optimum <= lam * (H - c),
    which drives the stopping rule.
    """
    c = ws.ent_bound
    iterations = 0
    best_pi = pi_feasible
    best_d = ws.divergence(pi_feasible)
    best_cert = math.inf

    lam_lo, lam_hi = 0.0, 1.0
    pi = pi_slack
    while lam_hi <= 1e9:
        pi, _f, it = _lagrangian_min(ws, lam_hi, pi)
        iterations += it
        h = ws.cond_entropy(pi)
        if h >= c - 1e-12:
            d = ws.divergence(pi)
            cert = lam_hi * max(h - c, 0.0)
            if d <= best_d or cert < best_cert:
                best_pi, best_d, best_cert = pi, d, cert
            break
        lam_lo = lam_hi
        lam_hi *= 4.0
    else:
        # floor only reachable in the limit; fall back to the witness point
        return best_pi, lam_lo, iterations

    for _ in range(80):
        if best_cert <= tol * 0.5:
            break
        mid = 0.5 * (lam_lo + lam_hi)
        pi, _f, it = _lagrangian_min(ws, mid, pi)
        iterations += it
        h = ws.cond_entropy(pi)
        if h >= c - 1e-12:
            lam_hi = mid
            d = ws.divergence(pi)
            cert = mid * max(h - c, 0.0)
            if d < best_d:
                best_pi, best_d, best_cert = pi, d, cert
            elif cert < best_cert:
                best_cert = cert
        else:
            lam_lo = mid
        if lam_hi - lam_lo <= 1e-12 * max(1.0, lam_hi):
            break
    return best_pi, lam_hi, iterations


def _simplex_project_masked(v, maskf):
    """Euclidean projection of the masked entries onto the simplex."""
    flat = v[maskf > 0.0]
    n = flat.size
    u = np.sort(flat)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, n + 1) > (css - 1.0))[0]
    k = rho[-1] + 1 if rho.size else 1
    theta = (css[k - 1] - 1.0) / k
    out = np.zeros_like(v)
    out[maskf > 0.0] = np.maximum(flat - theta, 0.0)
    return out


def _solve_penalty(prob, ws, tol, it0) -> SolveReport:
    """Augmented Lagrangian route: multiplier estimates for the marginal
    equalities and the entropy floor, simplex projection only, one exact
    Dykstra snap at the end. Kept independent of the IPF seeding path."""
    pi = (ws.maskf / ws.maskf.sum()).copy()
    iterations = it0
    nus = [np.zeros_like(tgt) for _dims, tgt in ws.constraints]
    lam_e = 0.0
    rho = 256.0
    prev_res = math.inf
    for _outer in range(60):
        def obj(x, rho=rho, lam_e=lam_e, nus=nus):
            on = (x > 0.0) & ws.mask
            d = float(np.sum(x[on] * np.log2(x[on] / np.maximum(ws.ref[on], _FLOOR))))
            for (dims, tgt), nu in zip(ws.constraints, nus):
                diff = ws._marg(x, dims) - tgt
                d += float(np.sum(nu * diff)) + 0.5 * rho * float(np.sum(diff * diff))
            if ws.entropy is not None:
                a = max(0.0, lam_e / rho + ws.ent_bound - ws.cond_entropy(x))
                d += 0.5 * rho * a * a - lam_e * lam_e / (2.0 * rho)
            return d

        def grad(x, rho=rho, lam_e=lam_e, nus=nus):
            g = ws.grad_divergence(x)
            for (dims, tgt), nu in zip(ws.constraints, nus):
                diff = ws._marg(x, dims) - tgt
                g = g + ws._expand(nu + rho * diff, dims) * ws.maskf
            if ws.entropy is not None:
                a = max(0.0, lam_e / rho + ws.ent_bound - ws.cond_entropy(x))
                if a > 0.0:
                    g = g + rho * a * ws.grad_neg_cond_entropy(x)
            return g

        pi, _f, it = _pgd(ws, pi, obj, grad,
                          lambda v: _simplex_project_masked(v, ws.maskf),
                          maxit=2500, ftol=1e-14)
        iterations += it
        res = ws.residual(pi)
        ent = ws.entropy_violation(pi)
        for (dims, tgt), nu in zip(ws.constraints, nus):
            nu += rho * (ws._marg(pi, dims) - tgt)
        if ws.entropy is not None:
            lam_e = max(0.0, lam_e + rho * (ws.ent_bound - ws.cond_entropy(pi)))
        if res <= 1e-11 and ent <= 1e-11:
            break
        if res > 0.25 * prev_res:
            rho = min(rho * 4.0, 1e9)
        prev_res = max(res, ent)
    return _finish(ws, pi, iterations, lam_e)


# -------------------------------------------------------------- brute force

def _constraint_system(ws):
    rows, rhs = [], []
    for dims, tgt in ws.constraints:
        small_shape = tuple(ws.shape[d] for d in dims)
        for cell in np.ndindex(*small_shape):
            sel = np.zeros(ws.shape)
            idx = [slice(None)] * ws.ndim
            for d, c in zip(dims, cell):
                idx[d] = c
            sel[tuple(idx)] = 1.0
            rows.append(sel.ravel())
            rhs.append(tgt[cell])
    rows.append(np.ones(ws.size))
    rhs.append(1.0)
    return np.array(rows), np.array(rhs)


def _entropy_batch(points, ws):
    """H(A|B) for a batch of flattened couplings, vectorized."""
    npts = points.shape[1]

    def agg(dims):
        full = points.T.reshape((npts,) + ws.shape)
        drop = tuple(1 + d for d in ws._drop(dims))
        return full.sum(axis=drop).reshape(npts, -1)

    mab = np.maximum(agg(ws.ent_ab), 0.0)
    h = -np.sum(np.where(mab > 0, mab * np.log2(np.maximum(mab, _FLOOR)), 0.0), axis=1)
    if ws.ent_b:
        mb = np.maximum(agg(ws.ent_b), 0.0)
        h += np.sum(np.where(mb > 0, mb * np.log2(np.maximum(mb, _FLOOR)), 0.0), axis=1)
    return h


def brute_force(prob: CouplingProblem, grid_step: float = 1.0 / 64,
                max_points: int = 6_000_000) -> SolveReport:
    """Exhaustive lattice evaluation with a certified optimality gap.

    Equality constraints are eliminated through an orthonormal null-space
    basis; the remaining free coordinates are swept on a lattice anchored at a
    feasible point. The reported gap combines the spread between the exactly
    feasible lattice minimum and a slack-admitted lower pass with an explicit
    continuity modulus of D(. || R) at the lattice resolution, so
    |value - true optimum| <= gap whenever both are finite.
    """
    ref = prob.reference
    n = ref.probs.size
    if n > 64:
        raise InputError(f"instance with {n} entries too large for exhaustive search")
    if grid_step < 1.0 / 64:
        raise InputError("grid_step below 1/64 not supported")

    status, anchor_full, _it, _ws_sup = _feasibility(prob)
    if status == "infeasible":
        return SolveReport(math.nan, None, 0, math.inf, feasible=False)

    ws = _Workspace(prob, respect_support=False)
    a, b = _constraint_system(ws)
    x0, *_ = np.linalg.lstsq(a, b, rcond=None)
    if np.max(np.abs(a @ x0 - b)) > 1e-9:
        return SolveReport(math.nan, None, 0, math.inf, feasible=False)
    basis = scipy.linalg.null_space(a)
    d = basis.shape[1]

    supp = ws.mask.ravel()
    ref_flat = ws.ref.ravel()
    has_entropy = prob.entropy is not None

    def d_of(cols):
        # divergence per column; +inf where mass sits off supp(R)
        off = cols[~supp, :].sum(axis=0) if not supp.all() else np.zeros(cols.shape[1])
        on = cols[supp, :]
        vals = np.sum(np.where(on > 0,
                               on * (np.log2(np.maximum(on, _FLOOR))
                                     - np.log2(np.maximum(ref_flat[supp, None], _FLOOR))),
                               0.0), axis=0)
        vals = np.where(off > 1e-12, math.inf, vals)
        return vals

    if d == 0:
        pt = np.maximum(x0, 0.0)
        feas = (np.min(x0) >= -1e-9
                and (not has_entropy
                     or _entropy_batch(pt[:, None], ws)[0] >= ws.ent_bound - 1e-9))
        if not feas:
            return SolveReport(math.nan, None, 0, math.inf, feasible=False)
        pt = pt / pt.sum()
        val = float(d_of(pt[:, None])[0])
        return SolveReport(val, JointPmf(ref.axes, pt.reshape(ws.shape)), 1,
                           0.0, True, gap=1e-9)

    # bounding box of the free coordinates over the orthant slice
    lows, highs = np.empty(d), np.empty(d)
    for j in range(d):
        for sign, store in ((1.0, lows), (-1.0, highs)):
            c = np.zeros(d)
            c[j] = sign
            res = scipy.optimize.linprog(
                c, A_ub=-basis, b_ub=x0, bounds=[(None, None)] * d, method="highs")
            if not res.success:
                return SolveReport(math.nan, None, 0, math.inf, feasible=False)
            store[j] = sign * res.fun

    # anchor the lattice at a feasible point so the strict pass is never empty
    anchor = anchor_full if status == "ok" else None
    if anchor is not None:
        t_anchor = basis.T @ (anchor.ravel() - x0)
    else:
        t_anchor = 0.5 * (lows + highs)
    # grid_step is the pitch relative to each free coordinate's range, so one
    # free coordinate costs at most 1/grid_step + 1 evaluations
    grids = []
    total = 1
    pitch_sq = 0.0
    for j in range(d):
        width = highs[j] - lows[j]
        if width < 1e-9:
            grids.append(np.array([np.clip(t_anchor[j], lows[j], highs[j])]))
            continue
        pitch = width * grid_step
        pitch_sq += pitch * pitch
        lo = t_anchor[j] - math.floor((t_anchor[j] - lows[j]) / pitch + 1e-12) * pitch
        g = np.arange(lo, highs[j] + pitch * 0.5, pitch)
        if g.size == 0:
            g = np.array([t_anchor[j]])
        grids.append(g)
        total *= g.size
        if total > max_points:
            raise BudgetError(
                f"lattice of {total}+ points exceeds cap {max_points}; coarsen grid_step")

    rho_cov = math.sqrt(pitch_sq) / 2.0  # L2 snap radius in pi space
    n_supp = int(supp.sum())
    n_off = n - n_supp
    # L1 budget from snapping a feasible point to the lattice and then zeroing
    # off-support mass, clipping negatives, and renormalizing (sum stays 1
    # under the snap itself because null directions are zero-sum)
    u_l1 = math.sqrt(n) * rho_cov + 2.0 * rho_cov * (n + n_off)

    def entropy_modulus(u):
        u = min(u, 0.5)
        if u <= 0.0:
            return 0.0
        return 2.0 * u * math.log2(max(n, 2) / u)

    def divergence_modulus(u):
        if u <= 0.0:
            return 0.0
        if u < 0.5:
            ent = u * math.log2(max(n_supp, 2) / u)
        else:
            ent = 2.0 * math.log2(max(n_supp, 2))
        rmax = abs(math.log2(max(float(ref_flat[supp].min()), _FLOOR)))
        return ent + min(u, 2.0) * rmax

    best_strict = math.inf
    best_strict_pt = None
    best_loose = math.inf
    evaluated = 0

    mesh_iter = np.ndindex(*(g.size for g in grids))
    chunk = max(1, int(2_000_000 / max(n, 1)))
    idx_buffer = []

    def flush(buffer):
        nonlocal best_strict, best_strict_pt, best_loose, evaluated
        if not buffer:
            return
        t = np.array([[grids[j][ix[j]] for j in range(d)] for ix in buffer]).T
        cols = x0[:, None] + basis @ t
        evaluated += cols.shape[1]
        min_entry = cols.min(axis=0)

        strict = min_entry >= -1e-12
        if strict.any():
            sc = np.maximum(cols[:, strict], 0.0)
            sc /= sc.sum(axis=0, keepdims=True)
            if has_entropy:
                keep = _entropy_batch(sc, ws) >= ws.ent_bound - 1e-9
                sc = sc[:, keep]
            if sc.shape[1]:
                vals = d_of(sc)
                k = int(np.argmin(vals))
                if vals[k] < best_strict:
                    best_strict = float(vals[k])
                    best_strict_pt = sc[:, k].copy()

        loose = min_entry >= -rho_cov - 1e-12
        if loose.any():
            lc = np.maximum(cols[:, loose], 0.0)
            lc[~supp, :] = 0.0
            sums = lc.sum(axis=0)
            ok = sums > 0.5
            if ok.any():
                lc = lc[:, ok] / sums[ok]
                if has_entropy:
                    keep = _entropy_batch(lc, ws) >= ws.ent_bound - entropy_modulus(u_l1) - 1e-9
                    lc = lc[:, keep]
                if lc.shape[1]:
                    m = float(d_of(lc).min())
                    if m < best_loose:
                        best_loose = m

    for ix in mesh_iter:
        idx_buffer.append(ix)
        if len(idx_buffer) >= chunk:
            flush(idx_buffer)
            idx_buffer = []
    flush(idx_buffer)

    if not math.isfinite(best_strict):
        value = math.inf
        return SolveReport(value, None, evaluated, math.inf, True, gap=math.inf)
    gap = (best_strict - min(best_loose, best_strict)) + divergence_modulus(u_l1) + 1e-8
    return SolveReport(
        best_strict,
        JointPmf(ref.axes, best_strict_pt.reshape(ws.shape)),
        evaluated,
        0.0,
        True,
        gap=float(gap),
    )
