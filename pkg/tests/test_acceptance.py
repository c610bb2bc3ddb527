"""End-to-end acceptance gate.

Each test covers one numbered criterion and prints a single summary line
on success; run `pytest tests/test_acceptance.py -v` to see one pass/fail
line per criterion.
"""

import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from spinbound.bounds import (
    e_lower_wy,
    e_sep_chain,
    fidelity_upper_bound,
    kprod_bound,
    pfeuty_energy,
    qfi_lower_bound,
    witness,
)
from spinbound.infomeasures import (
    any_state_corr_max_qubit,
    expect,
    fidelity,
    qfi,
    sep_corr_max_heisenberg,
)
from spinbound.models import (
    ModelSpec,
    build_collective,
    build_hamiltonian,
    ground_marginals,
    lattice_edges,
    reduced_from_collective,
    two_body_hamiltonian,
)
from spinbound.oracles import (
    OptimizerConfig,
    ProductEnsemble,
    any_state_opt,
    ground_state,
    roof_max,
    saturating_chain_state,
    sep_couple_opt,
    symmetric_extension_value,
)
from spinbound.qcore import operator_library, partial_trace, tensor

SX, SY, SZ = operator_library("pauli")
PAULI = operator_library("pauli")
JX, JY, JZ = SX / 2, SY / 2, SZ / 2


def _report(num, detail):
    print(f"criterion {num:02d}: PASS ({detail})")


def _random_state(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def _random_observable(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2.0


def test_criterion_01_chain_energy_sandwich():
    start = time.perf_counter()
    n, j = 10, 1.0
    edges, _ = lattice_edges((n,), periodic=True)

    def point(bx):
        b = (bx, 0.0, 0.0)
        spec = ModelSpec(n=n, d=2, terms=[(-j, JZ)], b=b, edges=edges)
        e_g, psi = ground_state(build_hamiltonian(spec))
        rho = ground_marginals(psi, n, 2)
        return (bx, e_lower_wy(rho, j, b, n, JZ, PAULI), e_g,
                e_sep_chain(rho, j, b, n, JZ, PAULI))

    with ThreadPoolExecutor(max_workers=4) as pool:
        rows = list(pool.map(point, np.linspace(0.0, 2.0, 50)))

    gap = 0.0
    for bx, lo, e_g, hi in rows:
        assert lo <= e_g + 1e-9, f"lower bound fails at bx={bx}"
        assert e_g <= hi + 1e-9, f"upper bound fails at bx={bx}"
        gap = max(gap, lo - e_g, e_g - hi)
    bx0 = rows[0]
    assert bx0[1] == pytest.approx(-2.5, abs=1e-9)
    assert bx0[2] == pytest.approx(-2.5, abs=1e-9)
    assert bx0[3] == pytest.approx(-2.5, abs=1e-9)
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    _report(1, f"50 fields, worst overshoot {max(gap, 0.0):.2e}, {elapsed:.1f}s")


def test_criterion_02_collective_fisher_bound():
    start = time.perf_counter()
    worst_frac = 0.0
    for n in (4, 10, 60):
        for bx in np.linspace(0.0, 2.0, 30):
            b = (bx, 0.0, 0.0)
            model = build_collective(n, 1.0, b)
            e_g, psi = ground_state(model.h)
            rho1, _ = reduced_from_collective(psi, n)
            bound, cap = qfi_lower_bound(e_g, rho1, n, 1.0, b, PAULI)
            delta = qfi(rho1, JZ) - bound
            assert delta >= -1e-12, f"negative gap at n={n}, bx={bx}"
            assert delta <= cap + 1e-12
            assert delta <= 0.6 / n + 1e-12
            worst_frac = max(worst_frac, delta * n)
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    _report(2, f"90 points, worst n*delta {worst_frac:.3f}, {elapsed:.1f}s")


def test_criterion_03_roof_maximum_tables():
    start = time.perf_counter()
    rng = np.random.default_rng(20260301)
    cfg = OptimizerConfig()  # 16 restarts
    worst = 0.0
    for d, count in ((2, 100), (3, 20)):
        for _ in range(count):
            rho = _random_state(rng, d)
            h = _random_observable(rng, d)
            closed = expect(rho, h @ h) - qfi(rho, h) / 4.0
            res = roof_max(rho, [h], cfg)
            err = abs(res.value - closed)
            assert err <= 1e-4, f"d={d}: roof error {err:.2e}"
            assert res.value <= closed + 1e-9
            assert res.feasibility <= 1e-6
            worst = max(worst, err)
    elapsed = time.perf_counter() - start
    assert elapsed < 180.0
    _report(3, f"120 instances, worst error {worst:.2e}, {elapsed:.1f}s")


def test_criterion_04_heisenberg_pair_optimizer():
    start = time.perf_counter()
    rng = np.random.default_rng(20260402)
    heis = sum(tensor(g, g) for g in (JX, JY, JZ))
    worst = 0.0
    for _ in range(50):
        rho = _random_state(rng, 2)
        sigma = _random_state(rng, 2)
        closed = sep_corr_max_heisenberg(rho, sigma)
        res = sep_couple_opt(rho, sigma, heis, "max")
        err = abs(res.value - closed)
        assert err <= 1e-3, f"pair error {err:.2e}"
        assert res.feasibility <= 1e-6
        worst = max(worst, err)
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0
    _report(4, f"50 pairs, worst error {worst:.2e}, {elapsed:.1f}s")


def test_criterion_05_all_state_ceiling():
    start = time.perf_counter()
    rng = np.random.default_rng(20260503)
    worst = 0.0
    for _ in range(50):
        rho = _random_state(rng, 2)
        h = _random_observable(rng, 2)
        closed = any_state_corr_max_qubit(rho, h)
        res = any_state_opt(rho, rho, tensor(h, h), "max")
        err = abs(res.value - closed)
        assert err <= 1e-3, f"all-state error {err:.2e}"
        assert res.feasibility <= 1e-6
        worst = max(worst, err)
    elapsed = time.perf_counter() - start
    _report(5, f"50 instances, worst error {worst:.2e}, {elapsed:.1f}s")


def test_criterion_06_assembled_states_saturate():
    rng = np.random.default_rng(20260604)
    b = (0.25, 0.0, 0.0)
    worst = 0.0
    for dims in ((4,), (6,), (2, 4)):
        edges, coloring = lattice_edges(dims, periodic=True)
        n = int(np.prod(dims))
        spec = ModelSpec(n=n, d=2, terms=[(-1.0, JZ)], b=b, edges=edges)
        rho = _random_state(rng, 2)
        res = roof_max(rho, [JZ], OptimizerConfig(seed=int(rng.integers(2 ** 31))))
        ens = ProductEnsemble(res.ensemble.weights,
                              [(c[0], c[0]) for c in res.ensemble.locals])
        pair_h = two_body_hamiltonian(spec)
        pair_energy = sum(
            p * expect(np.outer(np.kron(a, c), np.kron(a, c).conj()), pair_h)
            for p, (a, c) in zip(ens.weights, ens.locals))
        predicted = spec.n_pairs * pair_energy
        assembled = saturating_chain_state(ens, spec, coloring)
        err = abs(assembled - predicted)
        assert err <= 1e-12, f"lattice {dims}: mismatch {err:.2e}"
        worst = max(worst, err)
    _report(6, f"3 lattices, worst mismatch {worst:.2e}")


def test_criterion_07_symmetric_extension_energy():
    rng = np.random.default_rng(20260705)
    hzz = tensor(JZ, JZ)
    worst = 0.0
    for n_ext in (3, 4, 10):
        rho = _random_state(rng, 2)
        res = roof_max(rho, [JZ], OptimizerConfig(seed=int(rng.integers(2 ** 31))))
        pure_locals = [(p, c[0]) for p, c in zip(res.ensemble.weights,
                                                 res.ensemble.locals)]
        ext = symmetric_extension_value(pure_locals, n_ext, hzz)
        direct = n_ext * (n_ext - 1) / 2.0 * sum(
            p * expect(np.outer(np.kron(v, v), np.kron(v, v).conj()), hzz)
            for p, v in pure_locals)
        err = abs(ext - direct)
        assert err <= 1e-12, f"n={n_ext}: mismatch {err:.2e}"
        worst = max(worst, err)
    _report(7, f"n in (3, 4, 10), worst mismatch {worst:.2e}")


def test_criterion_08_fidelity_bound_bipartite():
    start = time.perf_counter()
    j = 1.0
    heis_terms = [(-j, g) for g in (JX, JY, JZ)]
    worst_slack = 0.0
    for n1 in (4, 6, 8):
        for b in ((0.0, 0.0, 0.0), (0.15, 0.0, 0.0)):
            n = n1 + 1
            assert 2 ** n <= 512
            edges = [(i, n) for i in range(1, n1 + 1)]
            spec = ModelSpec(n=n, d=2, terms=heis_terms, b=b, edges=edges)
            e_g, psi = ground_state(build_hamiltonian(spec))
            full = np.outer(psi, psi.conj())
            dims = [2] * n
            rho_a = sum(partial_trace(full, dims, [i]) for i in range(n1)) / n1
            sigma_b = partial_trace(full, dims, [n1])
            f = fidelity(rho_a, sigma_b)
            fb = fidelity_upper_bound(e_g, rho_a, sigma_b, n1, 1, j, b)
            assert f <= fb.bound + 1e-12, f"n1={n1}, b={b}: bound below fidelity"
            assert fb.bound <= f + 2.0 / n1 + 1e-9, \
                f"n1={n1}, b={b}: slack {fb.bound - f:.3e} beyond 2/N1"
            assert fb.err_cap == pytest.approx(2.0 / n1)
            worst_slack = max(worst_slack, (fb.bound - f) * n1 / 2.0)
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    _report(8, f"6 models, worst slack fraction {worst_slack:.3f}, {elapsed:.1f}s")


def test_criterion_09_grouping_hierarchy():
    start = time.perf_counter()
    n, j = 10, 1.0
    b = (0.0, 0.0, 0.0)
    checked = 0
    for s in (0.1, 0.3):
        rho = (np.eye(2) + s * SX) / 2.0
        for k in (1, 2, 5):
            single = kprod_bound(rho, k, n, j, b, JZ, PAULI,
                                 mode="single_marginal")
            product = kprod_bound(rho, k, n, j, b, JZ, PAULI,
                                  mode="product_blocks")
            assert product >= single - 1e-12, \
                f"s={s}, k={k}: product bound fell below single-marginal"
            checked += 1
    assert pfeuty_energy(1.0, 0.25) == pytest.approx(-1.0 / np.pi, abs=1e-9)
    elapsed = time.perf_counter() - start
    _report(9, f"{checked} bound pairs ordered, reference -1/pi, {elapsed:.1f}s")


def test_criterion_10_witness_battery():
    start = time.perf_counter()
    rng = np.random.default_rng(20261006)
    false_positives = 0
    for t in range(1000):
        symmetric = t % 2 == 0
        m = int(rng.integers(2, 6))
        w = rng.dirichlet(np.ones(m))
        rho_ab = np.zeros((4, 4), dtype=complex)
        for p in w:
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            v /= np.linalg.norm(v)
            if symmetric:
                u = v
            else:
                u = rng.normal(size=2) + 1j * rng.normal(size=2)
                u /= np.linalg.norm(u)
            vu = np.kron(v, u)
            rho_ab += p * np.outer(vu, vu.conj())
        reports = [witness("corr_qfi", rho_ab=rho_ab, h=JZ),
                   witness("fidelity_corr", rho_ab=rho_ab)]
        if symmetric:
            reports.append(witness("sym_two_sided", rho_ab=rho_ab, h=JZ))
            reports.append(witness("sym_two_ops", rho_ab=rho_ab, hs=[JZ, JX]))
        for rep in reports:
            if rep.violated:
                false_positives += 1
    assert false_positives == 0

    theta = np.pi / 8
    probe_vec = np.array([np.cos(theta), 0.0, 0.0, np.sin(theta)], dtype=complex)
    probe = np.outer(probe_vec, probe_vec.conj())
    rep = witness("corr_qfi", rho_ab=probe, h=JX)
    assert rep.violated
    margin = rep.lhs - rep.rhs
    assert margin >= 0.05
    elapsed = time.perf_counter() - start
    _report(10, f"1000 separable states clean, probe margin {margin:.4f}, "
               f"{elapsed:.1f}s")
