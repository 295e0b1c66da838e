import numpy as np
import pytest

import unisynth as us


def test_named_operators():
    h = us.named_operator("hadamard", 2)
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose(h, [[r, r], [-r, r]])
    assert np.isclose(us.named_operator("qft", 4)[1, 1], 0.5j)


def test_haar_unitary_is_unitary_and_seeded():
    u = us.haar_random_unitary(8, seed=3)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-12)
    np.testing.assert_array_equal(u, us.haar_random_unitary(8, seed=3))


def test_learn_and_oracle_recover_target():
    x, cond, _ = us.random_state_batch(4, 4, 100.0, seed=1)
    assert cond <= 100.0
    f4 = us.named_target("F4")
    y = f4 @ x
    np.testing.assert_allclose(us.procrustes_solve(x, y), f4, atol=1e-10)
    r = us.learn(x, y, method="NM")
    assert r["status"] == "converged"
    assert 100 <= r["iterations"] <= 300
    assert us.frobenius_objective(r["u"], x, y) < 1e-15


def test_factor_round_trip():
    u = us.haar_random_unitary(4, seed=5)
    f = us.factor(u, 2)
    assert f["report"]["error"] <= 1e-9
    assert us.fidelity_error(u, us.qasm_matrix(f["qasm"])) <= 1e-9
    assert us.normalize_qasm(f["qasm"]) == f["qasm"]


def test_pipeline_grover():
    x, _, _ = us.random_state_batch(8, 8, 100.0, seed=2)
    g8 = us.named_target("G8")
    p = us.pipeline(x, g8 @ x)
    assert us.fidelity_error(g8, us.qasm_matrix(p["qasm"])) <= 1e-6
    assert p["diagram"].startswith("q0: ")


def test_matrix_text_round_trip():
    m = us.haar_random_unitary(2, seed=7)
    assert np.array_equal(us.read_matrix(us.write_matrix(m)), m)


def test_errors_are_raised():
    with pytest.raises(us.UnisynthError):
        us.named_operator("hadamard", 4)
    with pytest.raises(us.UnisynthError):
        us.factor(2 * np.eye(2), 1)
