import numpy as np
import pytest

from spinbound.infomeasures import (
    any_state_corr_max_qubit,
    expect,
    qfi,
    sep_corr_max_heisenberg,
)
from spinbound.models import ModelSpec, build_hamiltonian, lattice_edges
from spinbound.oracles import (
    OptimizerConfig,
    ProductEnsemble,
    any_state_opt,
    ground_state,
    roof_max,
    roof_min,
    saturating_chain_state,
    sep_couple_opt,
    symmetric_extension_value,
)
from spinbound.qcore import operator_library, partial_trace

SX, SY, SZ = operator_library("pauli")
JZ = SZ / 2
HEIS = sum(np.kron(g, g) for g in (SX / 2, SY / 2, SZ / 2))


def rand_state(rng, d=2):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def rand_obs(rng, d=2):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def test_optimizer_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ValueError):
        OptimizerConfig(seed=-1)
    with pytest.raises(ValueError):
        OptimizerConfig(feas_tol=0.0)


def test_product_ensemble_validate():
    v = np.array([1.0, 0.0], dtype=complex)
    w = np.array([0.0, 1.0], dtype=complex)
    ens = ProductEnsemble([0.5, 0.5], [(v, v), (w, w)])
    ens.validate()
    assert ens.parties == 2
    with pytest.raises(ValueError):
        ProductEnsemble([0.7, 0.7], [(v, v), (w, w)]).validate()
    with pytest.raises(ValueError):
        ProductEnsemble([1.0], [(2.0 * v, v)]).validate()


def test_product_ensemble_assemble_marginal():
    v = np.array([1.0, 0.0], dtype=complex)
    w = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
    ens = ProductEnsemble([0.25, 0.75], [(v, w), (w, v)])
    rho = ens.assemble()
    assert np.allclose(partial_trace(rho, [2, 2], [0]), ens.marginal(0), atol=1e-12)
    assert np.allclose(partial_trace(rho, [2, 2], [1]), ens.marginal(1), atol=1e-12)


def test_product_ensemble_json_roundtrip():
    rng = np.random.default_rng(31)
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    w = rng.normal(size=3) + 1j * rng.normal(size=3)
    w /= np.linalg.norm(w)
    ens = ProductEnsemble([0.4, 0.6], [(v, w), (v, w)])
    obj = ens.to_json()
    assert set(obj) == {"weights", "locals"}
    back = ProductEnsemble.from_json(obj)
    back.validate()
    assert np.allclose(back.weights, ens.weights)
    for comp_a, comp_b in zip(back.locals, ens.locals):
        for a, b in zip(comp_a, comp_b):
            assert np.allclose(a, b, atol=0)


def test_ground_state_dense_ring():
    edges, _ = lattice_edges((4,), periodic=True)
    spec = ModelSpec(n=4, d=2, terms=[(-1.0, JZ)], b=(0, 0, 0), edges=edges)
    e, vec = ground_state(build_hamiltonian(spec))
    assert e == pytest.approx(-1.0, abs=1e-12)
    assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-12)


def test_ground_state_sparse_path():
    # 11 qubits exceeds the dense cutoff of 512, exercising Lanczos
    edges, _ = lattice_edges((11,), periodic=False)
    spec = ModelSpec(n=11, d=2, terms=[(-1.0, JZ)], b=(0, 0, 0), edges=edges)
    e, vec = ground_state(build_hamiltonian(spec))
    assert e == pytest.approx(-10.0 / 4.0, abs=1e-9)
    h = build_hamiltonian(spec)
    assert np.linalg.norm(h @ vec - e * vec) <= 1e-9


def test_roof_max_matches_closed_form_qubits():
    rng = np.random.default_rng(32)
    for trial in range(4):
        rho = rand_state(rng)
        h = rand_obs(rng)
        closed = expect(rho, h @ h) - qfi(rho, h) / 4.0
        res = roof_max(rho, [h], OptimizerConfig(seed=trial))
        assert res.value <= closed + 1e-9
        assert abs(res.value - closed) <= 1e-4
        assert res.feasibility <= 1e-6
        marg = res.ensemble.validate().marginal(0)
        assert np.linalg.norm(marg - rho) <= 1e-6


def test_roof_max_qutrit():
    rng = np.random.default_rng(33)
    rho = rand_state(rng, 3)
    h = rand_obs(rng, 3)
    closed = expect(rho, h @ h) - qfi(rho, h) / 4.0
    res = roof_max(rho, [h], OptimizerConfig(seed=0))
    assert res.value <= closed + 1e-9
    assert abs(res.value - closed) <= 1e-4


def test_roof_max_deterministic_and_restart_stable():
    rng = np.random.default_rng(34)
    rho = rand_state(rng)
    h = rand_obs(rng)
    a = roof_max(rho, [h], OptimizerConfig(seed=5))
    b = roof_max(rho, [h], OptimizerConfig(seed=5))
    assert a.value == b.value
    # doubling the restart budget must not find anything meaningfully better
    wide = roof_max(rho, [h], OptimizerConfig(seed=5, restarts=32))
    assert wide.value <= a.value + 1e-9
    assert wide.value >= a.value - 1e-5


def test_roof_min_floor_and_pure_state():
    rng = np.random.default_rng(35)
    rho = rand_state(rng)
    h = rand_obs(rng)
    res = roof_min(rho, [h], OptimizerConfig(seed=2))
    assert res.value >= expect(rho, h) ** 2 - 1e-9
    # a pure state has a single decomposition, so min = max = <h>^2
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    pure = np.outer(v, v.conj())
    mn = roof_min(pure, [h], OptimizerConfig(seed=2, restarts=4))
    target = expect(pure, h) ** 2
    assert mn.value == pytest.approx(target, abs=1e-7)


def test_sep_couple_opt_heisenberg_closed_form():
    rng = np.random.default_rng(36)
    for trial in range(3):
        rho = rand_state(rng)
        sig = rand_state(rng)
        closed = sep_corr_max_heisenberg(rho, sig)
        res = sep_couple_opt(rho, sig, HEIS, "max", OptimizerConfig(seed=trial))
        assert abs(res.value - closed) <= 1e-3
        assert res.feasibility <= 1e-6
        ens = res.ensemble.validate()
        assert np.linalg.norm(ens.marginal(0) - rho) <= 1e-5
        assert np.linalg.norm(ens.marginal(1) - sig) <= 1e-5


def test_sep_couple_opt_validation():
    rng = np.random.default_rng(37)
    rho = rand_state(rng)
    with pytest.raises(ValueError):
        sep_couple_opt(rho, rho, HEIS, "sideways")
    with pytest.raises(ValueError):
        sep_couple_opt(rho, rand_state(rng, 3), HEIS, "max")
    with pytest.raises(ValueError):
        sep_couple_opt(rand_state(rng, 4), rand_state(rng, 4),
                       np.eye(16), "max")


def test_any_state_opt_equal_marginals():
    rng = np.random.default_rng(38)
    for trial in range(2):
        rho = rand_state(rng)
        h = rand_obs(rng)
        target = any_state_corr_max_qubit(rho, h)
        res = any_state_opt(rho, rho, np.kron(h, h), "max",
                            OptimizerConfig(seed=trial))
        assert abs(res.value - target) <= 1e-3
        assert res.feasibility <= 1e-6
        assert res.state is not None
        assert np.linalg.norm(partial_trace(res.state, [2, 2], [0]) - rho) <= 1e-5


def test_any_state_beats_separable():
    rng = np.random.default_rng(39)
    rho = rand_state(rng)
    h = rand_obs(rng)
    sep_val = expect(rho, h @ h) - qfi(rho, h) / 4.0
    all_val = any_state_corr_max_qubit(rho, h)
    assert all_val >= sep_val - 1e-12


def test_saturating_chain_state_requires_pairs():
    v = np.array([1.0, 0.0], dtype=complex)
    single = ProductEnsemble([1.0], [(v,)])
    edges, coloring = lattice_edges((4,), periodic=True)
    spec = ModelSpec(n=4, d=2, terms=[(-1.0, JZ)], b=(0, 0, 0), edges=edges)
    with pytest.raises(ValueError):
        saturating_chain_state(single, spec, coloring)
    with pytest.raises(ValueError):
        saturating_chain_state(ProductEnsemble([1.0], [(v, v)]), spec, None)


def test_saturating_chain_state_aligned_product():
    # all-up product on the ferromagnetic ring sits exactly at -nJ/4
    v = np.array([1.0, 0.0], dtype=complex)
    ens = ProductEnsemble([1.0], [(v, v)])
    edges, coloring = lattice_edges((6,), periodic=True)
    spec = ModelSpec(n=6, d=2, terms=[(-1.0, JZ)], b=(0, 0, 0), edges=edges)
    e = saturating_chain_state(ens, spec, coloring)
    assert e == pytest.approx(-1.5, abs=1e-12)


def test_symmetric_extension_value_identity():
    rng = np.random.default_rng(40)
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    w = rng.normal(size=2) + 1j * rng.normal(size=2)
    w /= np.linalg.norm(w)
    h_ab = np.kron(JZ, JZ)
    locs = [(0.3, v), (0.7, w)]
    val = symmetric_extension_value(locs, 5, h_ab)
    direct = 10.0 * sum(
        p * np.real(np.kron(u, u).conj() @ h_ab @ np.kron(u, u))
        for p, u in locs)
    assert val == pytest.approx(direct, abs=1e-12)
