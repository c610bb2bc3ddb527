import numpy as np
import pytest

from spinbound.infomeasures import (
    RoofValue,
    any_state_corr_max_qubit,
    expect,
    fidelity,
    qfi,
    sep_corr_max,
    sep_corr_max_heisenberg,
    sym_sep_corr_min,
    variance,
    wy_skew,
)
from spinbound.qcore import operator_library

SX, SY, SZ = operator_library("pauli")
JZ = SZ / 2
JX = SX / 2


def rand_state(rng, d=2, rank=None):
    a = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def rand_obs(rng, d=2):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def mixed_x(s):
    """The Bloch-vector (s,0,0) qubit state used as the hand-computed anchor."""
    return (np.eye(2) + s * SX) / 2


# hand values for rho = (I + 0.6 sx)/2, h = jz:
#   F_Q = s^2 = 0.36
#   I_WY = 1/4 - sqrt(1-s^2)/4 = 0.05
#   sep max <h x h>  = <h^2> - F_Q/4 = 0.25 - 0.09 = 0.16
#   all-state max    = <h^2> - I_WY  = 0.25 - 0.05 = 0.20

def test_hand_values_bloch_06():
    rho = mixed_x(0.6)
    assert qfi(rho, JZ) == pytest.approx(0.36, abs=1e-12)
    assert wy_skew(rho, JZ) == pytest.approx(0.05, abs=1e-12)
    assert sep_corr_max(rho, [JZ]).value == pytest.approx(0.16, abs=1e-12)
    assert any_state_corr_max_qubit(rho, JZ) == pytest.approx(0.20, abs=1e-12)


def test_qfi_pure_state_is_four_variance():
    rng = np.random.default_rng(11)
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    v /= np.linalg.norm(v)
    rho = np.outer(v, v.conj())
    h = rand_obs(rng, 3)
    assert qfi(rho, h) == pytest.approx(4 * variance(rho, h), abs=1e-10)


def test_information_chain():
    # I_WY <= F_Q/4 <= Var for mixed states
    rng = np.random.default_rng(12)
    for _ in range(25):
        d = rng.choice([2, 3, 4])
        rho = rand_state(rng, d)
        h = rand_obs(rng, d)
        iw = wy_skew(rho, h)
        fq4 = qfi(rho, h) / 4
        var = variance(rho, h)
        assert iw <= fq4 + 1e-10
        assert fq4 <= var + 1e-10
        assert iw >= -1e-12


def test_qfi_invariant_under_eigenbasis_rephasing():
    rng = np.random.default_rng(13)
    rho = rand_state(rng, 3)
    h = rand_obs(rng, 3)
    base = qfi(rho, h)
    w, v = np.linalg.eigh(rho)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=3))
    v2 = v * phases
    rho2 = (v2 * w) @ v2.conj().T
    assert abs(qfi(rho2, h) - base) <= 1e-10


def test_fidelity_symmetry_and_unitary_invariance():
    rng = np.random.default_rng(14)
    rho = rand_state(rng, 3)
    sig = rand_state(rng, 3)
    assert abs(fidelity(rho, sig) - fidelity(sig, rho)) <= 1e-10
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    f2 = fidelity(q @ rho @ q.conj().T, q @ sig @ q.conj().T)
    assert abs(f2 - fidelity(rho, sig)) <= 1e-10


def test_fidelity_extremes():
    rho = np.diag([1.0, 0.0]).astype(complex)
    sig = np.diag([0.0, 1.0]).astype(complex)
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)
    assert fidelity(rho, sig) == pytest.approx(0.0, abs=1e-12)


def test_sep_corr_max_flags():
    rho = mixed_x(0.3)
    assert sep_corr_max(rho, [JZ]).exactness == "exact"
    two = sep_corr_max(rho, [JZ, JX])
    assert two.exactness == "upper_bound"
    # the sum of singles upper-bounds any simultaneous value; each single is
    # part of the sum, so two-op value dominates either one alone
    assert two.value >= sep_corr_max(rho, [JZ]).value - 1e-12


def test_sym_sep_corr_min_flags_and_value():
    rng = np.random.default_rng(15)
    rho = rand_state(rng, 2)
    one = sym_sep_corr_min(rho, [JZ])
    assert one.exactness == "exact"
    assert one.value == pytest.approx(expect(rho, JZ) ** 2, abs=1e-12)
    assert sym_sep_corr_min(rho, [JZ, JX]).exactness == "exact"
    three = sym_sep_corr_min(rho, [JZ, JX, SY / 2])
    assert three.exactness == "lower_bound"
    assert sym_sep_corr_min(rho, [JZ], over="sep").exactness == "upper_bound"


def test_heisenberg_closed_form_range():
    rng = np.random.default_rng(16)
    for _ in range(20):
        rho = rand_state(rng, 2)
        sig = rand_state(rng, 2)
        val = sep_corr_max_heisenberg(rho, sig)
        assert -0.25 - 1e-12 <= val <= 0.25 + 1e-12
    # equal pure states reach the ceiling
    up = np.diag([1.0, 0.0]).astype(complex)
    assert sep_corr_max_heisenberg(up, up) == pytest.approx(0.25, abs=1e-12)


def test_roof_value_rejects_bad_flag():
    with pytest.raises(ValueError):
        RoofValue(0.0, "approximate")


def test_dimension_mismatch_raises():
    rho = mixed_x(0.2)
    with pytest.raises(ValueError):
        qfi(rho, np.eye(3))
    with pytest.raises(ValueError):
        sep_corr_max(rho, [])
    with pytest.raises(ValueError):
        any_state_corr_max_qubit(rand_state(np.random.default_rng(0), 3), np.eye(3))
