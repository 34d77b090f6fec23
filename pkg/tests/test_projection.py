"""Inner minimization: solver routes against each other, a brute-force
lattice oracle, and hand-derived closed forms."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dhtexp import (
    Alphabet,
    BudgetError,
    CouplingProblem,
    EntropyFloor,
    InputError,
    JointPmf,
    MarginalConstraint,
    brute_force,
    kl_divergence,
    marginalize,
    solve,
)


def triple(p0, q0, r):
    """S = X xor Bern(r), Y = X xor Bern(q0), X ~ Bern(p0); axes (S, X, Y)."""
    px = np.array([1.0 - p0, p0])
    joint = np.zeros((2, 2, 2))
    for x in range(2):
        for y in range(2):
            for s in range(2):
                fy = q0 if y != x else 1.0 - q0
                fs = r if s != x else 1.0 - r
                joint[s, x, y] = px[x] * fy * fs
    axes = (Alphabet("S", 2), Alphabet("X", 2), Alphabet("Y", 2))
    return JointPmf(axes, joint)


def product_reference(p1, qy, r):
    """S|X kept, X ~ Bern(p1) independent of Y ~ Bern(qy); axes (S, X, Y)."""
    ref = np.zeros((2, 2, 2))
    for x in range(2):
        px = p1 if x == 1 else 1.0 - p1
        for y in range(2):
            py = qy if y == 1 else 1.0 - qy
            for s in range(2):
                fs = r if s != x else 1.0 - r
                ref[s, x, y] = px * py * fs
    return JointPmf(
        (Alphabet("S", 2), Alphabet("X", 2), Alphabet("Y", 2)), ref)


P = triple(0.2, 0.3, 0.1)
QY = 0.2 * 0.7 + 0.8 * 0.3  # marginal of Y under the null
R = product_reference(0.4, QY, 0.1)
P_SX = marginalize(P, keep=("S", "X"))
P_SY = marginalize(P, keep=("S", "Y"))
P_Y = marginalize(P, keep=("Y",))

STD = CouplingProblem(R, (
    MarginalConstraint(("S", "X"), P_SX),
    MarginalConstraint(("S", "Y"), P_SY),
))


def entropy_of(pmf, target, given):
    from dhtexp import entropy_measures
    return entropy_measures(pmf, target, conditioning_axes=given)


def divergence(pi, ref):
    a = pi.probs.ravel()
    b = ref.probs.ravel()
    m = a > 0
    if np.any(b[m] == 0):
        return math.inf
    return float(np.sum(a[m] * np.log2(a[m] / b[m])))


def project_feasible(start, prob, sweeps=4000):
    """Test-local alternating projection onto the constraint polytope; kept
    independent of the library's internals on purpose."""
    ref = prob.reference
    pi = np.array(start, dtype=float)
    names = ref.names
    for _ in range(sweeps):
        for mc in prob.marginals:
            dims = tuple(sorted(names.index(n) for n in mc.axes))
            drop = tuple(i for i in range(pi.ndim) if i not in dims)
            m = pi.sum(axis=drop) if drop else pi
            order = tuple(names[d] for d in dims)
            perm = [mc.target.names.index(n) for n in order]
            tgt = np.transpose(mc.target.probs, perm)
            cnt = np.prod([pi.shape[i] for i in drop]) if drop else 1
            shape = [1] * pi.ndim
            for d in dims:
                shape[d] = pi.shape[d]
            pi = pi + ((tgt - m) / cnt).reshape(shape)
        pi = pi + (1.0 - pi.sum()) / pi.size
        pi = np.maximum(pi, 0.0)
    return pi


# ----------------------------------------------------------------- examples

def test_reference_already_feasible_gives_zero():
    prob = CouplingProblem(P, (
        MarginalConstraint(("S", "X"), P_SX),
        MarginalConstraint(("S", "Y"), P_SY),
    ))
    rep = solve(prob)
    assert rep.feasible
    assert abs(rep.value) <= 1e-9
    assert np.max(np.abs(rep.argmin.probs - P.probs)) <= 1e-7


def test_standard_pattern_closed_form_and_brute():
    rep = solve(STD)
    px = marginalize(P, keep=("X",))
    qx = marginalize(R, keep=("X",))
    from dhtexp import entropy_measures
    closed = kl_divergence(px, qx) + entropy_measures(
        P_SY, ("S",), versus_axes=("Y",))
    assert rep.feasible
    assert abs(rep.value - closed) <= 1e-6
    bru = brute_force(STD)
    assert abs(rep.value - bru.value) <= 1e-3
    assert abs(rep.value - bru.value) <= bru.gap + 1e-6
    assert bru.value >= rep.value - 1e-6


def test_entropy_bound_above_alphabet_capacity_infeasible():
    prob = CouplingProblem(R, (MarginalConstraint(("S", "X"), P_SX),),
                           EntropyFloor(("X",), ("S",), 1.5))
    rep = solve(prob)
    assert not rep.feasible
    assert math.isnan(rep.value)
    assert rep.argmin is None
    bru = brute_force(prob)
    assert not bru.feasible


def test_fully_pinned_instance_is_direct_evaluation():
    prob = CouplingProblem(R, (MarginalConstraint(("S", "X", "Y"), P),))
    rep = solve(prob)
    expected = divergence(P, R)
    assert abs(rep.value - expected) <= 1e-9
    bru = brute_force(prob)
    assert abs(bru.value - expected) <= 1e-9
    assert bru.gap <= 1e-6


def test_one_free_coordinate_within_65_evaluations():
    axes = (Alphabet("A", 2), Alphabet("B", 2))
    ref = JointPmf(axes, np.array([[0.3, 0.2], [0.25, 0.25]]))
    pa = JointPmf((Alphabet("A", 2),), np.array([0.6, 0.4]))
    pb = JointPmf((Alphabet("B", 2),), np.array([0.45, 0.55]))
    prob = CouplingProblem(ref, (
        MarginalConstraint(("A",), pa), MarginalConstraint(("B",), pb)))
    bru = brute_force(prob)
    assert bru.feasible
    assert bru.iterations <= 65
    rep = solve(prob)
    assert abs(rep.value - bru.value) <= bru.gap + 1e-6


def test_forced_zero_region_gives_infinite_value():
    ref = P.probs.copy()
    ref[0, 0, 0] = 0.0
    holey = JointPmf(P.axes, ref / ref.sum())
    prob = CouplingProblem(holey, (
        MarginalConstraint(("S", "X"), P_SX),
        MarginalConstraint(("S", "Y"), P_SY),
    ))
    rep = solve(prob)
    assert rep.feasible
    assert math.isinf(rep.value)
    assert rep.argmin is not None


def test_contradictory_marginals_infeasible():
    lopsided = JointPmf((Alphabet("S", 2),), np.array([0.9, 0.1]))
    flat = JointPmf((Alphabet("S", 2), Alphabet("X", 2)), np.full((2, 2), 0.25))
    prob = CouplingProblem(R, (
        MarginalConstraint(("S",), lopsided),
        MarginalConstraint(("S", "X"), flat),
    ))
    assert not solve(prob).feasible
    assert not brute_force(prob).feasible


def test_binding_floor_routes_and_oracle_agree():
    prob = CouplingProblem(P, (MarginalConstraint(("S", "X"), P_SX),),
                           EntropyFloor(("Y",), ("X",), 0.9))
    tol = 1e-6
    rep = solve(prob, tol=tol)
    pen = solve(prob, tol=tol, method="penalty")
    assert rep.feasible and pen.feasible
    assert abs(rep.value - pen.value) <= 2 * tol
    assert entropy_of(rep.argmin, ("Y",), ("X",)) >= 0.9 - 1e-7
    bru = brute_force(prob, grid_step=1.0 / 16)
    assert bru.value >= rep.value - 1e-6
    assert abs(rep.value - bru.value) <= bru.gap + tol
    # SLSQP cross-check value for this exact instance
    assert abs(rep.value - 0.00087283) <= 5e-6


def test_input_validation():
    with pytest.raises(InputError):
        solve(STD, tol=0.0)
    with pytest.raises(InputError):
        solve(STD, tol=2e-3)
    with pytest.raises(InputError):
        solve(STD, method="magic")
    with pytest.raises(InputError):
        MarginalConstraint(("S", "X"), P_SY)
    with pytest.raises(InputError):
        EntropyFloor(("S",), ("S", "Y"), 0.5)
    stray = JointPmf((Alphabet("Z", 2),), np.array([0.5, 0.5]))
    with pytest.raises(InputError):
        CouplingProblem(R, (MarginalConstraint(("Z",), stray),))
    with pytest.raises(InputError):
        brute_force(STD, grid_step=1.0 / 128)
    big_axes = tuple(Alphabet(n, 3) for n in ("A", "B", "C", "D"))
    big = JointPmf(big_axes, np.full((3, 3, 3, 3), 1.0 / 81))
    with pytest.raises(InputError):
        brute_force(CouplingProblem(big, ()))


def test_lattice_budget_cap():
    prob = CouplingProblem(R, (MarginalConstraint(("S",), marginalize(P, keep=("S",))),))
    with pytest.raises(BudgetError):
        brute_force(prob, max_points=10)


# --------------------------------------------------------------- properties

def test_feasible_points_dominate_the_optimum():
    rng = np.random.default_rng(7)
    rep = solve(STD)
    checked = 0
    for _ in range(220):
        start = rng.dirichlet(np.ones(8)).reshape(2, 2, 2)
        cand = project_feasible(start, STD)
        resid = max(
            np.max(np.abs(cand.sum(axis=2) - P_SX.probs)),
            np.max(np.abs(cand.sum(axis=1) - P_SY.probs)),
        )
        if resid > 1e-9:
            continue
        checked += 1
        val = divergence(JointPmf(P.axes, cand / cand.sum()), R)
        assert val >= rep.value - 1e-7
    assert checked >= 100


def test_dropping_entropy_floor_never_increases_value():
    rng = np.random.default_rng(11)
    for _ in range(25):
        ref = JointPmf(P.axes, rng.dirichlet(np.ones(8)).reshape(2, 2, 2))
        tgt = JointPmf(P.axes, rng.dirichlet(np.ones(8)).reshape(2, 2, 2))
        base = (MarginalConstraint(("S", "X"), marginalize(tgt, keep=("S", "X"))),)
        floor = entropy_of(tgt, ("Y",), ("X",)) + 0.02
        with_floor = solve(CouplingProblem(ref, base, EntropyFloor(("Y",), ("X",), floor)))
        without = solve(CouplingProblem(ref, base))
        if not with_floor.feasible:
            continue
        lo = without.value if without.feasible else math.inf
        assert with_floor.value >= lo - 1e-6


def test_adding_marginals_never_decreases_value():
    rng = np.random.default_rng(13)
    for _ in range(25):
        ref = JointPmf(P.axes, rng.dirichlet(np.ones(8)).reshape(2, 2, 2))
        tgt = JointPmf(P.axes, rng.dirichlet(np.ones(8)).reshape(2, 2, 2))
        one = solve(CouplingProblem(ref, (
            MarginalConstraint(("S", "X"), marginalize(tgt, keep=("S", "X"))),)))
        two = solve(CouplingProblem(ref, (
            MarginalConstraint(("S", "X"), marginalize(tgt, keep=("S", "X"))),
            MarginalConstraint(("S", "Y"), marginalize(tgt, keep=("S", "Y"))),)))
        assert one.feasible and two.feasible
        assert two.value >= one.value - 1e-6


def test_argmin_meets_constraints_to_1e7():
    rng = np.random.default_rng(17)
    for _ in range(20):
        ref = JointPmf(P.axes, rng.dirichlet(np.ones(8)).reshape(2, 2, 2))
        tgt = JointPmf(P.axes, rng.dirichlet(np.ones(8)).reshape(2, 2, 2))
        floor = entropy_of(tgt, ("S",), ("Y",)) - 0.01
        prob = CouplingProblem(ref, (
            MarginalConstraint(("S", "X"), marginalize(tgt, keep=("S", "X"))),
            MarginalConstraint(("Y",), marginalize(tgt, keep=("Y",))),
        ), EntropyFloor(("S",), ("Y",), floor))
        rep = solve(prob)
        assert rep.feasible
        got_sx = marginalize(rep.argmin, keep=("S", "X")).probs
        got_y = marginalize(rep.argmin, keep=("Y",)).probs
        assert np.max(np.abs(got_sx - marginalize(tgt, keep=("S", "X")).probs)) <= 1e-7
        assert np.max(np.abs(got_y - marginalize(tgt, keep=("Y",)).probs)) <= 1e-7
        assert entropy_of(rep.argmin, ("S",), ("Y",)) >= floor - 1e-7


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_solve_within_certified_gap_of_brute(seed):
    rng = np.random.default_rng(seed)
    ref = JointPmf(P.axes, rng.dirichlet(np.ones(8) * 2.0).reshape(2, 2, 2))
    tgt = JointPmf(P.axes, rng.dirichlet(np.ones(8) * 2.0).reshape(2, 2, 2))
    constraints = (
        MarginalConstraint(("S", "X"), marginalize(tgt, keep=("S", "X"))),
        MarginalConstraint(("S", "Y"), marginalize(tgt, keep=("S", "Y"))),
    )
    floor = None
    if seed % 3 == 0:
        floor = EntropyFloor(("X",), ("S", "Y"),
                             entropy_of(tgt, ("X",), ("S", "Y")) - 0.05)
    prob = CouplingProblem(ref, constraints, floor)
    rep = solve(prob)
    bru = brute_force(prob, grid_step=1.0 / 8)
    assert rep.feasible and bru.feasible
    assert bru.value >= rep.value - 1e-6
    assert abs(rep.value - bru.value) <= bru.gap + 1e-6


def test_dual_routes_agree_on_random_instances():
    rng = np.random.default_rng(23)
    for k in range(8):
        ref = JointPmf(P.axes, rng.dirichlet(np.ones(8) * 3.0).reshape(2, 2, 2))
        tgt = JointPmf(P.axes, rng.dirichlet(np.ones(8) * 3.0).reshape(2, 2, 2))
        floor = EntropyFloor(("Y",), ("X",), entropy_of(tgt, ("Y",), ("X",)) + 0.03) \
            if k % 2 == 0 else None
        prob = CouplingProblem(ref, (
            MarginalConstraint(("S", "X"), marginalize(tgt, keep=("S", "X"))),
            MarginalConstraint(("Y",), marginalize(tgt, keep=("Y",))),
        ), floor)
        tol = 1e-6
        a = solve(prob, tol=tol)
        b = solve(prob, tol=tol, method="penalty")
        assert a.feasible == b.feasible
        if a.feasible and math.isfinite(a.value):
            assert abs(a.value - b.value) <= 2 * tol
