import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoform import dmd

DIAG = np.diag([0.9, 1.1])


def diag_snapshots():
    xs = [np.array([1.0, 1.0])]
    for _ in range(3):
        xs.append(DIAG @ xs[-1])
    X = np.array(xs).T
    return X[:, :-1], X[:, 1:]


def test_snapshots_match_hand_values():
    A, B = diag_snapshots()
    assert np.allclose(B, [[0.9, 0.81, 0.729], [1.1, 1.21, 1.331]], atol=1e-15)


def test_batch_identity():
    assert np.allclose(dmd.batch_fit(np.eye(2), np.eye(2)), np.eye(2), atol=0)


def test_batch_recovers_diag():
    A, B = diag_snapshots()
    assert np.max(np.abs(dmd.batch_fit(A, B) - DIAG)) < 1e-10


def test_batch_rank_deficient():
    with pytest.raises(dmd.SingularGram):
        dmd.batch_fit([[1.0, 1.0], [2.0, 2.0]], [[1.0, 1.0], [2.0, 2.0]])


def test_batch_shape_checks():
    with pytest.raises(ValueError):
        dmd.batch_fit(np.ones((2, 3)), np.ones((2, 2)))
    with pytest.raises(ValueError):
        dmd.batch_fit(np.eye(2), np.eye(2), ridge=-1)


def test_init_online_diag():
    A, B = diag_snapshots()
    st_ = dmd.init_online(A, B, ridge=0.0)
    assert np.max(np.abs(st_.T - DIAG)) < 1e-10
    assert np.allclose(st_.P, np.linalg.inv(A @ A.T), rtol=1e-10)
    assert st_.count == 3


def test_init_online_constant_velocity():
    X = np.tile([[5.0], [0.0]], (1, 4))
    st_ = dmd.init_online(X[:, :-1], X[:, 1:], ridge=1e-6)
    assert np.all(np.isfinite(st_.T))
    assert np.allclose(dmd.predict(st_, [5.0, 0.0]), [5.0, 0.0], atol=1e-3)


def test_init_online_zero_snapshots():
    st_ = dmd.init_online(np.zeros((2, 3)), np.zeros((2, 3)), ridge=1e-6)
    assert np.array_equal(st_.T, np.zeros((2, 2)))


def test_predict_examples():
    st_ = dmd.DmdState(DIAG, np.eye(2), 3)
    assert np.allclose(dmd.predict(st_, [2, 1]), [1.8, 1.1])
    ident = dmd.DmdState(np.eye(2), np.eye(2), 3)
    assert np.array_equal(dmd.predict(ident, [3.5, -2.0]), [3.5, -2.0])
    with pytest.raises(ValueError):
        dmd.predict(st_, [1.0, 2.0, 3.0])


def test_update_hand_example():
    st_ = dmd.DmdState(np.eye(2), np.eye(2), 2, ridge=0.0)
    new = dmd.update(st_, [1, 0], [2, 0])
    assert np.allclose(new.T, [[1.5, 0], [0, 1]], atol=1e-15)
    assert np.allclose(new.P, [[0.5, 0], [0, 1]], atol=1e-15)
    assert new.count == 3
    # the history A = B = I realises T = I, P = I; refit with the new column appended
    A = np.column_stack([np.eye(2), [1, 0]])
    B = np.column_stack([np.eye(2), [2, 0]])
    assert np.allclose(dmd.batch_fit(A, B), new.T, atol=1e-15)


def test_update_printed_denominator_differs():
    st_ = dmd.DmdState(np.eye(2), np.eye(2), 2, ridge=0.0)
    alt = dmd.update(st_, [1, 0], [2, 0], printed_denominator=True)
    assert alt.T[0, 0] == pytest.approx(1 + 1 / 3)
    assert np.allclose(alt.P, [[0.5, 0], [0, 1]])


def test_zero_innovation_keeps_T():
    rng = np.random.default_rng(4)
    T = rng.normal(size=(2, 2))
    st_ = dmd.DmdState(T, np.eye(2), 3)
    a = rng.normal(size=2)
    assert np.array_equal(dmd.update(st_, a, T @ a).T, T)


def run_online(rng, n_updates, ridge=0.0):
    A = rng.normal(size=(2, 3 + n_updates))
    B = rng.normal(size=(2, 3 + n_updates))
    st_ = dmd.init_online(A[:, :3], B[:, :3], ridge)
    for k in range(3, 3 + n_updates):
        st_ = dmd.update(st_, A[:, k], B[:, k])
    return st_, A, B


@pytest.mark.parametrize("n_updates", [1, 100, 200])
def test_online_equals_batch(n_updates):
    st_, A, B = run_online(np.random.default_rng(n_updates), n_updates)
    assert np.linalg.norm(st_.T - dmd.batch_fit(A, B), "fro") < 1e-9
    assert np.max(np.abs(st_.P @ (A @ A.T) - np.eye(2))) < 1e-8


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 60), st.sampled_from([0.0, 1e-6, 1e-2]))
def test_precision_consistency(seed, n_updates, ridge):
    st_, A, B = run_online(np.random.default_rng(seed), n_updates, ridge)
    gram = A @ A.T + ridge * np.eye(2)
    assert np.max(np.abs(st_.P @ gram - np.eye(2))) < 1e-8
    assert np.allclose(st_.P, st_.P.T, atol=0)
    assert np.all(np.linalg.eigvalsh(st_.P) > 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_exact_recovery_of_any_operator(seed):
    rng = np.random.default_rng(seed)
    M = rng.uniform(-1.5, 1.5, size=(2, 2))
    A = rng.normal(size=(2, 40))
    B = M @ A
    st_ = dmd.init_online(A[:, :3], B[:, :3], ridge=0.0)
    for k in range(3, 40):
        st_ = dmd.update(st_, A[:, k], B[:, k])
    assert np.max(np.abs(st_.T - M)) < 1e-9


def test_fixed_point_prediction():
    x = np.array([4.7, -0.3])
    st_ = dmd.init_online(np.tile(x[:, None], 3), np.tile(x[:, None], 3), 1e-6)
    for _ in range(20):
        st_ = dmd.update(st_, x, x)
    assert np.allclose(dmd.predict(st_, x), x, atol=1e-3)


def test_breakdown_guard():
    st_ = dmd.DmdState(np.eye(2), -np.eye(2), 3)
    with pytest.raises(dmd.BreakdownError):
        dmd.update(st_, [1.0, 0.0], [1.0, 0.0])
