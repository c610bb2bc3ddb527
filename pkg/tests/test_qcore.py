import numpy as np
import pytest

from spinbound.qcore import (
    EigenDecomposition,
    eig_hermitian,
    flip_operator,
    matrix_from_json,
    matrix_sqrt_psd,
    matrix_to_json,
    operator_library,
    partial_trace,
    tensor,
    validate_observable,
    validate_state,
)


def rand_state(rng, d, rank=None):
    a = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def test_validate_state_rejects_junk():
    with pytest.raises(ValueError):
        validate_state(np.array([[0.6, 0.0], [0.0, 0.3]]))  # trace != 1
    with pytest.raises(ValueError):
        validate_state(np.array([[1.5, 0.0], [0.0, -0.5]]))  # negative eigenvalue
    with pytest.raises(ValueError):
        validate_observable(np.array([[0.0, 1.0], [0.0, 0.0]]))  # not Hermitian


def test_tensor_and_partial_trace_roundtrip():
    rng = np.random.default_rng(3)
    a = rand_state(rng, 2)
    b = rand_state(rng, 3)
    ab = tensor(a, b)
    assert np.allclose(partial_trace(ab, [2, 3], [0]), a, atol=1e-12)
    assert np.allclose(partial_trace(ab, [2, 3], [1]), b, atol=1e-12)
    # keeping both sites in order is the identity
    assert np.allclose(partial_trace(ab, [2, 3], [0, 1]), ab, atol=1e-12)


def test_partial_trace_three_sites_middle():
    rng = np.random.default_rng(4)
    parts = [rand_state(rng, 2) for _ in range(3)]
    rho = tensor(*parts)
    got = partial_trace(rho, [2, 2, 2], [1])
    assert np.allclose(got, parts[1], atol=1e-12)
    got2 = partial_trace(rho, [2, 2, 2], [0, 2])
    assert np.allclose(got2, tensor(parts[0], parts[2]), atol=1e-12)


def test_eig_hermitian_sorted_and_orthonormal():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    m = (m + m.conj().T) / 2
    dec = eig_hermitian(m)
    assert isinstance(dec, EigenDecomposition)
    assert np.all(np.diff(dec.eigenvalues) >= -1e-12)
    v = dec.eigenvectors
    assert np.allclose(v.conj().T @ v, np.eye(5), atol=1e-10)
    rec = (v * dec.eigenvalues) @ v.conj().T
    assert np.allclose(rec, m, atol=1e-10)


def test_matrix_sqrt_psd():
    rng = np.random.default_rng(6)
    rho = rand_state(rng, 4)
    s = matrix_sqrt_psd(rho)
    assert np.allclose(s @ s, rho, atol=1e-10)


def test_flip_operator_swaps():
    f = flip_operator(3)
    rng = np.random.default_rng(7)
    u = rng.normal(size=3) + 1j * rng.normal(size=3)
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    assert np.allclose(f @ np.kron(u, v), np.kron(v, u), atol=1e-12)
    assert np.allclose(f @ f, np.eye(9), atol=1e-12)


def test_pauli_library_algebra():
    sx, sy, sz = operator_library("pauli")
    assert np.allclose(sx @ sy - sy @ sx, 2j * sz)
    assert np.allclose(sx @ sx, np.eye(2))
    for g in (sx, sy, sz):
        assert abs(np.trace(g)) < 1e-14


def test_spin_library_commutators():
    jx, jy, jz = operator_library("spin_j", j=1.0)
    assert np.allclose(jx @ jy - jy @ jx, 1j * jz, atol=1e-12)
    # Casimir j(j+1)
    assert np.allclose(jx @ jx + jy @ jy + jz @ jz, 2.0 * np.eye(3), atol=1e-12)


def test_gellmann_library_normalization():
    gs = operator_library("gellmann", d=3)
    assert len(gs) == 8
    for a, g in enumerate(gs):
        assert abs(np.trace(g)) < 1e-14
        assert abs(np.trace(g @ g).real - 2.0) < 1e-12
        for h in gs[a + 1:]:
            assert abs(np.trace(g @ h)) < 1e-12


def test_matrix_json_roundtrip():
    rng = np.random.default_rng(8)
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    m = (m + m.conj().T) / 2
    obj = matrix_to_json(m)
    assert obj["dim"] == 3
    back = matrix_from_json(obj)
    assert np.allclose(back, m, atol=0)


def test_matrix_json_shape_mismatch():
    with pytest.raises(ValueError):
        matrix_from_json({"dim": 2, "re": [[1.0]], "im": [[0.0]]})
