import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from powerplan import LinkModel, Scenario, build_link_model, sir
from powerplan.errors import DegenerateUser, DimensionMismatch, ValidationError


def test_scalar_case():
    scn = Scenario(gamma=[1.0], sigma2=0.5, G=[[2.0]], S=[[1.0]], C_rx=[[1.0]])
    model = build_link_model(scn)
    np.testing.assert_array_equal(model.A, [[2.0]])
    np.testing.assert_array_equal(model.Cdiag, [1.0])


def test_orthogonal_signatures_give_identity():
    S = np.eye(2)
    scn = Scenario(gamma=[1, 1], sigma2=0.1, G=np.ones((2, 2)), S=S, C_rx=S)
    model = build_link_model(scn)
    np.testing.assert_array_equal(model.A, np.eye(2))
    np.testing.assert_array_equal(model.Cdiag, [1.0, 1.0])


def test_correlated_signatures():
    S = np.array([[1.0, 0.0], [1 / math.sqrt(2), 1 / math.sqrt(2)]])
    scn = Scenario(gamma=[1, 1], sigma2=0.1, G=np.ones((2, 2)), S=S, C_rx=S)
    model = build_link_model(scn)
    # independent dot products
    cross = sum(a * b for a, b in zip(S[0], S[1])) ** 2
    np.testing.assert_allclose(model.A, [[1.0, cross], [cross, 1.0]], rtol=1e-15)
    np.testing.assert_allclose(model.A[0, 1], 0.5, rtol=1e-15)


def test_nonsymmetric_gains_allowed():
    S = np.eye(2)[[0, 0]]
    scn = Scenario(gamma=[1, 1], sigma2=1.0, G=[[1.0, 0.7], [0.1, 2.0]], S=S, C_rx=S)
    np.testing.assert_allclose(build_link_model(scn).A, [[1.0, 0.7], [0.1, 2.0]])


def test_degenerate_user():
    S = np.array([[1.0, 0.0], [0.0, 1.0]])
    C = np.array([[1.0, 0.0], [1.0, 0.0]])  # receiver 2 orthogonal to signature 2
    scn = Scenario(gamma=[1, 1], sigma2=0.1, G=np.ones((2, 2)), S=S, C_rx=C)
    with pytest.raises(DegenerateUser) as exc:
        build_link_model(scn)
    assert exc.value.user == 1


@pytest.mark.parametrize(
    "kwargs, field",
    [
        (dict(gamma=[0.0]), "gamma"),
        (dict(sigma2=0.0), "sigma2"),
        (dict(G=[[0.0]]), "G"),
        (dict(G=[[float("nan")]]), "G"),
        (dict(S=[[1.0, 2.0]]), "C_rx"),
    ],
)
def test_invalid_scenarios(kwargs, field):
    base = dict(gamma=[1.0], sigma2=0.5, G=[[2.0]], S=[[1.0]], C_rx=[[1.0]])
    base.update(kwargs)
    with pytest.raises(ValidationError) as exc:
        Scenario(**base)
    assert exc.value.field == field


def test_sir_zero_power():
    model = LinkModel([[1.0, 0.2], [0.3, 1.0]], [1.0, 1.0])
    np.testing.assert_array_equal(sir(model, 0.1, [0.0, 0.0]), [0.0, 0.0])


def test_sir_single_user():
    model = LinkModel([[2.0]], [1.0])
    assert sir(model, 0.5, [1.0])[0] == 4.0


def test_sir_at_worked_fixed_point():
    model = LinkModel([[1.0, 0.2], [0.3, 1.0]], [1.0, 1.0])
    np.testing.assert_allclose(sir(model, 0.1, [12 / 94, 13 / 94]), [1.0, 1.0], rtol=1e-14)


def test_sir_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        sir(LinkModel([[1.0]], [1.0]), 0.1, [1.0, 2.0])


def test_diagonal_model_is_linear():
    model = LinkModel(np.diag([2.0, 3.0]), [1.0, 4.0])
    p = np.array([0.3, 0.7])
    np.testing.assert_allclose(sir(model, 0.2, p), np.array([2.0, 3.0]) * p / (np.array([1.0, 4.0]) * 0.2))


def test_physical_and_direct_models_agree():
    rng = np.random.default_rng(3)
    S = rng.standard_normal((3, 4))
    scn = Scenario(gamma=[1, 1, 1], sigma2=0.3, G=rng.uniform(0.1, 1, (3, 3)), S=S, C_rx=S)
    built = build_link_model(scn)
    direct = LinkModel(built.A.copy(), built.Cdiag.copy())
    assert built == direct
    p = rng.uniform(size=3)
    np.testing.assert_array_equal(sir(built, 0.3, p), sir(direct, 0.3, p))


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    i=st.integers(0, 3),
    bump=st.floats(1e-3, 5.0),
)
def test_raising_one_power_helps_self_hurts_others(seed, i, bump):
    rng = np.random.default_rng(seed)
    A = rng.uniform(0.0, 1.0, (4, 4))
    A[rng.uniform(size=(4, 4)) < 0.3] = 0.0
    np.fill_diagonal(A, rng.uniform(0.5, 1.5, 4))
    model = LinkModel(A, rng.uniform(0.5, 2.0, 4))
    p = rng.uniform(0.0, 2.0, 4)
    q = p.copy()
    q[i] += bump
    before, after = sir(model, 0.1, p), sir(model, 0.1, q)
    assert after[i] > before[i]
    for j in range(4):
        if j == i:
            continue
        assert after[j] <= before[j]
        if A[j, i] > 0:
            assert after[j] < before[j]
