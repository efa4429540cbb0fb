import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_system
from oracles import nearest_point_active_set
from powerplan import (
    ConstraintSet,
    Halfspace,
    NormalizedSystem,
    balance_infeasible,
    box_constraints,
    min_power_point,
    project_halfspace,
    project_onto,
    total_budget,
)
from powerplan.errors import AlreadyFeasible, DimensionMismatch, InvalidBound, RegionEmpty


def test_box_and_budget_shapes():
    box = box_constraints([2.0, 0.5, 3.0])
    assert len(box) == 3
    assert [h.a for h in box.halfspaces] == [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)]
    np.testing.assert_array_equal(box.box_caps(), [2.0, 0.5, 3.0])
    budget = total_budget(4.0, 2)
    assert budget.halfspaces == (Halfspace((1.0, 1.0), 4.0),)
    assert budget.box_caps() is None
    both = box_constraints([1.0, 1.0]) & total_budget(4.0, 2)
    assert len(both) == 3
    assert len(total_budget(1.0, 5) & box_constraints(np.ones(5))) == 6


@pytest.mark.parametrize("bad", [[1.0, 0.0], [-1.0, 2.0], [np.inf, 1.0]])
def test_box_rejects_bad_caps(bad):
    with pytest.raises(InvalidBound):
        box_constraints(bad)


def test_budget_rejects_bad_total():
    with pytest.raises(InvalidBound):
        total_budget(0.0, 3)


def test_not_downward_closed_rejected():
    with pytest.raises(InvalidBound):
        ConstraintSet(2, (Halfspace((1.0, -1.0), 1.0),))
    with pytest.raises(InvalidBound):
        ConstraintSet(2, (Halfspace((1.0, 1.0), -1.0),))
    with pytest.raises(InvalidBound):
        Halfspace((0.0, 0.0), 1.0)


def test_project_halfspace_examples():
    h = Halfspace((1.0, 1.0), 4.0)
    np.testing.assert_array_equal(project_halfspace([0.5, 0.5], h), [0.5, 0.5])
    np.testing.assert_allclose(project_halfspace([3.0, 3.0], h), [2.0, 2.0])
    np.testing.assert_array_equal(project_halfspace([3.0, 0.5], Halfspace((1.0, 0.0), 2.0)), [2.0, 0.5])
    with pytest.raises(DimensionMismatch):
        project_halfspace([1.0, 2.0, 3.0], h)


def test_project_onto_examples():
    box = box_constraints([2.0, 2.0])
    np.testing.assert_allclose(project_onto([0.5, 1.5], box), [0.5, 1.5])
    np.testing.assert_allclose(project_onto([3.0, 3.0], box), [2.0, 2.0], atol=1e-10)
    cs = box_constraints([2.0, 10.0]) & total_budget(2.5, 2)
    oracle = nearest_point_active_set([3.0, 1.0], [h.normal for h in cs.halfspaces], [h.beta for h in cs.halfspaces])
    np.testing.assert_allclose(oracle, [2.0, 0.5], atol=1e-14)
    np.testing.assert_allclose(project_onto([3.0, 1.0], cs), [2.0, 0.5], atol=1e-9)


def test_negative_start_is_clipped():
    np.testing.assert_allclose(project_onto([-1.0, 0.5], box_constraints([1.0, 1.0])), [0.0, 0.5])


def test_dykstra_beats_plain_alternation():
    # plain alternating projection from (3, 3) onto {p1 <= 1} then {p1 + 2 p2 <= 2}
    # lands on a feasible but non-nearest point; Dykstra must match the oracle.
    cs = ConstraintSet(2, (Halfspace((1.0, 0.0), 1.0), Halfspace((1.0, 2.0), 2.0)))
    p0 = np.array([3.0, 3.0])
    x = p0
    for _ in range(200):
        for h in cs.halfspaces:
            x = project_halfspace(x, h)
        x = np.maximum(x, 0)
    oracle = nearest_point_active_set(p0, [h.normal for h in cs.halfspaces], [h.beta for h in cs.halfspaces])
    assert np.linalg.norm(x - oracle) > 1e-3
    np.testing.assert_allclose(project_onto(p0, cs), oracle, atol=1e-8)


def _random_set(rng, K):
    cs = box_constraints(rng.uniform(0.5, 2.0, K))
    if rng.uniform() < 0.7:
        cs = cs & total_budget(rng.uniform(0.5, 2.0 * K), K)
    if rng.uniform() < 0.5:
        a = rng.uniform(size=K) * (rng.uniform(size=K) < 0.8)
        if a.any():
            cs = cs & ConstraintSet(K, (Halfspace(a, rng.uniform(0.3, 2.0)),))
    return cs


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 2**31), K=st.integers(1, 3))
def test_idempotent_nonexpansive_matches_oracle(seed, K):
    rng = np.random.default_rng(seed)
    cs = _random_set(rng, K)
    x0 = rng.uniform(-1.0, 4.0, K)
    y0 = rng.uniform(-1.0, 4.0, K)
    px, py = project_onto(x0, cs), project_onto(y0, cs)
    tol = 1e-10
    assert np.linalg.norm(project_onto(px, cs) - px) <= 2 * tol + 1e-12
    assert np.linalg.norm(px - py) <= np.linalg.norm(x0 - y0) + 2 * tol
    oracle = nearest_point_active_set(x0, [h.normal for h in cs.halfspaces], [h.beta for h in cs.halfspaces])
    assert abs(np.linalg.norm(px - x0) - np.linalg.norm(oracle - x0)) <= 1e-6


def test_pure_box_equals_clamp(rng):
    for _ in range(50):
        K = rng.integers(1, 8)
        caps = rng.uniform(0.5, 2.0, K)
        p0 = rng.uniform(-1.0, 3.0, K)
        np.testing.assert_allclose(project_onto(p0, box_constraints(caps)), np.clip(p0, 0, caps), atol=1e-10)


def test_balance_guard_and_clamp():
    sys_ = NormalizedSystem(np.zeros((2, 2)), [0.5, 0.5], [1.0, 1.0])  # pi = (0.5, 0.5)
    with pytest.raises(AlreadyFeasible):
        balance_infeasible(sys_, box_constraints([1.0, 1.0]))
    sys_ = NormalizedSystem(np.zeros((2, 2)), [3.0, 3.0], [1.0, 1.0])  # pi = (3, 3)
    res = balance_infeasible(sys_, box_constraints([2.0, 2.0]))
    np.testing.assert_allclose(res.power, [2.0, 2.0], atol=1e-10)
    np.testing.assert_allclose(res.shortfall, [2 / 3, 2 / 3], rtol=1e-9)


def test_balance_region_empty():
    sys_ = NormalizedSystem([[0, 2.0], [2.0, 0]], [0.1, 0.1], [1.0, 1.0])
    with pytest.raises(RegionEmpty):
        balance_infeasible(sys_, box_constraints([1.0, 1.0]))


def test_balance_on_budget_line(worked_system):
    # harsher targets push the minimal point roughly 20x the worked one
    s = 3.9
    sys_ = worked_system.with_gamma(s * worked_system.gamma)
    pi = min_power_point(sys_).min_point
    assert pi.sum() > 2.0
    cs = total_budget(2.0, 2)
    res = balance_infeasible(sys_, cs)
    oracle = nearest_point_active_set(pi, [np.ones(2)], [2.0])
    np.testing.assert_allclose(res.power, oracle, atol=1e-9)
    assert res.power.sum() == pytest.approx(2.0, abs=1e-9)
    assert res.shortfall.min() < 1.0
