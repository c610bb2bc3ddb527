"""Command-line front end: figure-style sweeps as CSV, verification suites as JSON.

Four subcommands:

  sweep-chain   transverse-field ring sweep; ground energy vs the separable
                ceiling and the skew-information floor
  qfi-bound     fully connected model; Fisher information of the one-spin
                marginal vs its energy-based lower bound
  kprod         block-size family of energy bounds at fixed <sigma_x>
  verify        randomized self-check suites, JSON report

Every command is deterministic given its flags and seed: reruns write
byte-identical output.  Exit codes: 0 success, 2 bad usage or validation,
3 numerical non-convergence (or a failed verify suite).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .qcore import matrix_from_json, operator_library, validate_state
from .infomeasures import (
    any_state_corr_max_qubit,
    expect,
    qfi,
    sep_corr_max,
    sep_corr_max_heisenberg,
    wy_skew,
)
from .models import (
    ModelSpec,
    build_collective,
    build_hamiltonian,
    ground_marginals,
    lattice_edges,
    reduced_from_collective,
    two_body_hamiltonian,
)
from .oracles import (
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
from .bounds import (
    _kpart_hamiltonian,
    block_min_marginal,
    e_lower_wy,
    e_sep_chain,
    kprod_bound,
    pfeuty_energy,
    qfi_lower_bound,
    witness,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

VERIFY_SUITES = ("tables", "roofs", "fidelity", "saturation", "witnesses")


class UsageError(Exception):
    """Validation failure that maps to exit code 2."""


class NumericError(Exception):
    """Required solver did not converge; maps to exit code 3."""


@dataclass
class RunConfig:
    """Resolved parameters of one invocation (flags merged over config file)."""

    command: str
    n: Optional[str] = None
    j: float = 1.0
    bx_min: float = 0.0
    bx_max: float = 2.0
    steps: int = 50
    k: Optional[str] = None
    jx0: float = 0.1
    seed: int = 0
    trials: int = 50
    out: Optional[str] = None
    threads: int = 0
    state_file: Optional[str] = None
    suite: Optional[str] = None

    def __post_init__(self):
        try:
            self.j = float(self.j)
            self.bx_min = float(self.bx_min)
            self.bx_max = float(self.bx_max)
            self.jx0 = float(self.jx0)
            self.steps = int(self.steps)
            self.seed = int(self.seed)
            self.trials = int(self.trials)
            self.threads = int(self.threads)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad parameter value: {exc}") from exc
        if self.seed < 0:
            raise UsageError("seed must be non-negative")
        if self.steps < 1:
            raise UsageError("steps must be positive")
        if self.trials < 1:
            raise UsageError("trials must be positive")
        if self.threads < 0:
            raise UsageError("threads must be non-negative")


def _thread_count(requested: int) -> int:
    """Requested worker count, with the SPINBOUND_THREADS override on top."""
    env = os.environ.get("SPINBOUND_THREADS")
    if env is not None:
        try:
            requested = int(env)
        except ValueError as exc:
            raise UsageError(f"SPINBOUND_THREADS={env!r} is not an integer") from exc
    if requested <= 0:
        requested = os.cpu_count() or 1
    return max(1, requested)


def _parse_int_list(text: str, name: str) -> List[int]:
    out = []
    for piece in str(text).split(","):
        piece = piece.strip()
        if not piece:
            continue
        try:
            out.append(int(piece))
        except ValueError as exc:
            raise UsageError(f"{name} must be a comma-separated list of integers, got {text!r}") from exc
    if not out:
        raise UsageError(f"{name} must contain at least one integer")
    return out


def _load_state_file(path: str) -> np.ndarray:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read state file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"state file {path} is not valid JSON: {exc}") from exc
    try:
        return validate_state(matrix_from_json(obj), "state")
    except (KeyError, ValueError) as exc:
        raise UsageError(f"state file {path}: {exc}") from exc


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.12g" % float(x)


def _write_csv(header: Sequence[str], rows: Sequence[Sequence], out: Optional[str]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_json(report: dict, out: Optional[str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# sweep-chain
# ---------------------------------------------------------------------------

def _pair_marginal(psi: np.ndarray, n: int, i: int, k: int) -> np.ndarray:
    """Two-site reduced state of a pure qubit-ring state, sites 0-based."""
    t = psi.reshape((2,) * n)
    axes = [a for a in range(n) if a not in (i, k)]
    g = np.tensordot(t, t.conj(), axes=(axes, axes))
    if i > k:
        g = g.transpose(1, 0, 3, 2)
    return g.reshape(4, 4)


def _sweep_point(n: int, j: float, bx: float, fixed_rho: Optional[np.ndarray]):
    jz = np.diag([0.5, -0.5]).astype(complex)
    pauli = operator_library("pauli")
    edges, _ = lattice_edges((n,), periodic=True)
    spec = ModelSpec(n=n, d=2, terms=[(-j, jz)], b=(bx, 0.0, 0.0), edges=edges)
    ham = build_hamiltonian(spec)
    e_ground, psi = ground_state(ham)

    rho_g = ground_marginals(psi, n, 2)
    rho = fixed_rho if fixed_rho is not None else rho_g
    b = (bx, 0.0, 0.0)

    jx = pauli[0] / 2.0
    jx_expect = n * expect(rho_g, jx)

    corr = 0.0
    hzz = np.kron(jz, jz)
    for a, c in spec.edges:
        corr += expect(_pair_marginal(psi, n, a - 1, c - 1), hzz)
    corr_ground = corr / len(spec.edges)

    e_sep = e_sep_chain(rho, j, b, n, jz, pauli)
    e_wy = e_lower_wy(rho, j, b, n, jz, pauli)
    corr_sep = sep_corr_max(rho, [jz]).value
    corr_wy = any_state_corr_max_qubit(rho, jz)
    return (bx, jx_expect, e_ground, e_sep, e_wy, corr_ground, corr_sep, corr_wy)


def cmd_sweep_chain(cfg: RunConfig) -> int:
    n_list = _parse_int_list(cfg.n if cfg.n is not None else "10", "--n")
    if len(n_list) != 1:
        raise UsageError("sweep-chain takes a single --n")
    n = n_list[0]
    if n % 2:
        raise UsageError(f"--n must be even for the two-colored ring, got {n}")
    if not 4 <= n <= 12:
        raise UsageError(f"--n must lie in 4..12, got {n}")
    if cfg.j <= 0:
        raise UsageError("--j must be positive (ferromagnetic coupling)")
    if cfg.bx_max < cfg.bx_min:
        raise UsageError("--bx-max must not be below --bx-min")

    fixed_rho = None
    if cfg.state_file:
        fixed_rho = _load_state_file(cfg.state_file)
        if fixed_rho.shape[0] != 2:
            raise UsageError("sweep-chain expects a 2x2 state in --state-file")

    grid = np.linspace(cfg.bx_min, cfg.bx_max, cfg.steps)
    workers = _thread_count(cfg.threads)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda bx: _sweep_point(n, cfg.j, float(bx), fixed_rho), grid))

    header = ("bx", "jx_expect", "e_ground", "e_sep_qfi", "e_lower_wy",
              "corr_ground", "corr_sep", "corr_wy")
    _write_csv(header, rows, cfg.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# qfi-bound
# ---------------------------------------------------------------------------

def _qfi_point(n: int, j: float, bx: float):
    pauli = operator_library("pauli")
    jz = np.diag([0.5, -0.5]).astype(complex)
    b = (bx, 0.0, 0.0)
    model = build_collective(n, j, b)
    e_ground, psi = ground_state(model.h)
    rho1, _ = reduced_from_collective(psi, n)

    sx_expect = expect(rho1, pauli[0])
    fq_true = qfi(rho1, jz)
    fq_bound, delta_cap = qfi_lower_bound(e_ground, rho1, n, j, b, pauli)
    delta = fq_true - fq_bound
    return (n, bx, sx_expect, fq_true, fq_bound, delta, delta_cap, 0.6 / n)


def cmd_qfi_bound(cfg: RunConfig) -> int:
    if cfg.state_file:
        raise UsageError("qfi-bound derives its states from the ground problem; --state-file is not accepted")
    n_list = _parse_int_list(cfg.n if cfg.n is not None else "4,10,60", "--n")
    for n in n_list:
        if n < 2:
            raise UsageError(f"--n entries must be at least 2, got {n}")
    if cfg.j <= 0:
        raise UsageError("--j must be positive (ferromagnetic coupling)")
    if cfg.bx_max < cfg.bx_min:
        raise UsageError("--bx-max must not be below --bx-min")

    grid = [(n, float(bx)) for n in n_list
            for bx in np.linspace(cfg.bx_min, cfg.bx_max, cfg.steps)]
    workers = _thread_count(cfg.threads)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda nb: _qfi_point(nb[0], cfg.j, nb[1]), grid))

    header = ("n", "bx", "sx_expect", "fq_true", "fq_bound", "delta",
              "cap_8_over_n", "cap_0p6_over_n")
    _write_csv(header, rows, cfg.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# kprod
# ---------------------------------------------------------------------------

def pfeuty_reference(j: float, jx0: float) -> float:
    """Per-site ground energy of the infinite chain constrained to <sigma_x> = jx0.

    The unconstrained transverse-field energy e(B) is concave in B with
    slope -<sigma_x>, so the constrained value is the Legendre transform
    e(B*) + B* jx0 at the field B* solving <sigma_x>(B*) = jx0.
    """
    if not 0.0 <= jx0 < 1.0:
        raise UsageError(f"--jx0 must lie in [0, 1), got {jx0}")
    if jx0 == 0.0:
        return pfeuty_energy(j, 0.0)

    from scipy.integrate import quad

    a = j / 4.0

    def sx_of_b(bx: float) -> float:
        # Hellmann-Feynman: <sigma_x> = -de/dB
        val, _ = quad(
            lambda kk: (bx + a * np.cos(kk)) / np.sqrt(
                a * a + bx * bx + 2.0 * a * bx * np.cos(kk)),
            0.0, np.pi, epsabs=1e-12, epsrel=1e-12, limit=400)
        return val / np.pi

    hi = 1.0
    while sx_of_b(hi) < jx0:
        hi *= 2.0
        if hi > 1e6:
            raise NumericError("field bracketing for the chain reference failed")
    b_star = brentq(lambda x: sx_of_b(x) - jx0, 0.0, hi, xtol=1e-13, rtol=1e-14)
    return pfeuty_energy(j, b_star) + b_star * jx0


def cmd_kprod(cfg: RunConfig) -> int:
    n_list = _parse_int_list(cfg.n if cfg.n is not None else "10", "--n")
    if len(n_list) != 1:
        raise UsageError("kprod takes a single --n")
    n = n_list[0]
    if n < 2:
        raise UsageError(f"--n must be at least 2, got {n}")
    if cfg.j <= 0:
        raise UsageError("--j must be positive (ferromagnetic coupling)")
    k_list = _parse_int_list(cfg.k if cfg.k is not None else "1,2,5", "--k")
    for k in k_list:
        if k < 1 or n % k:
            raise UsageError(f"every --k must divide --n; {k} does not divide {n}")
        if (2 * 2) ** k > 4096:
            raise UsageError(f"--k={k} exceeds the exact block solver limit (k <= 6)")

    if cfg.state_file:
        rho = _load_state_file(cfg.state_file)
        if rho.shape[0] != 2:
            raise UsageError("kprod expects a 2x2 state in --state-file")
    else:
        pauli = operator_library("pauli")
        rho = (np.eye(2, dtype=complex) + cfg.jx0 * pauli[0]) / 2.0

    pauli = operator_library("pauli")
    jz = np.diag([0.5, -0.5]).astype(complex)
    jx0 = expect(rho, pauli[0])
    b = (0.0, 0.0, 0.0)
    j = cfg.j
    ref = pfeuty_reference(j, jx0)
    wy_cross = j * any_state_corr_max_qubit(rho, jz)
    opt = OptimizerConfig(seed=cfg.seed)

    rows = []
    for k in k_list:
        hk = _kpart_hamiltonian(k, [(-j, jz)], b, pauli, 2)
        block = block_min_marginal(hk, rho, k, opt)
        if not block.converged:
            raise NumericError(
                f"block minimization did not converge at k={k} "
                f"(feasibility {block.feasibility:.2e})")
        bound_qfi = kprod_bound(rho, k, n, j, b, jz, pauli, mode="single_marginal", cfg=opt)
        bound_product = kprod_bound(rho, k, n, j, b, jz, pauli, mode="product_blocks", cfg=opt)
        bound_wy_pp = (block.value - wy_cross) / k
        rows.append((k, bound_qfi, bound_product, bound_wy_pp, ref))

    header = ("k", "bound_qfi", "bound_product", "bound_wy_per_particle",
              "pfeuty_reference")
    _write_csv(header, rows, cfg.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _random_state(rng: np.random.Generator, d: int, rank: Optional[int] = None) -> np.ndarray:
    rank = rank or d
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def _random_observable(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2.0


def _suite_tables(rng: np.random.Generator, trials: int):
    """Roof maximum and all-state maximum against their closed forms."""
    failures = 0
    worst = 0.0
    for t in range(trials):
        d = 3 if t % 5 == 4 else 2
        rho = _random_state(rng, d)
        h = _random_observable(rng, d)
        closed = expect(rho, h @ h) - qfi(rho, h) / 4.0
        res = roof_max(rho, [h], OptimizerConfig(seed=int(rng.integers(2**31))))
        err = abs(res.value - closed)
        ok = err <= 1e-4 and res.value <= closed + 1e-9 and res.feasibility <= 1e-6
        if d == 2:
            target = expect(rho, h @ h) - wy_skew(rho, h)
            res2 = any_state_opt(rho, rho, np.kron(h, h), "max",
                                 OptimizerConfig(seed=int(rng.integers(2**31))))
            err2 = abs(res2.value - target)
            ok = ok and err2 <= 1e-3 and res2.feasibility <= 1e-6
            err = max(err, err2)
        worst = max(worst, err)
        if not ok:
            failures += 1
    return failures, worst


def _suite_roofs(rng: np.random.Generator, trials: int):
    """Decomposition-search invariants: validity, feasibility, determinism."""
    failures = 0
    worst = 0.0
    for t in range(trials):
        d = 3 if t % 4 == 3 else 2
        rho = _random_state(rng, d)
        h = _random_observable(rng, d)
        seed = int(rng.integers(2**31))
        res = roof_max(rho, [h], OptimizerConfig(seed=seed))
        closed = expect(rho, h @ h) - qfi(rho, h) / 4.0
        ok = res.value <= closed + 1e-9 and res.feasibility <= 1e-6
        err = max(0.0, res.value - closed)

        ens = res.ensemble
        if ens is None:
            ok = False
        else:
            ens.validate()
            marg = ens.marginal(0)
            feas = float(np.linalg.norm(marg - rho))
            ok = ok and feas <= 1e-6
            err = max(err, feas)

        rerun = roof_max(rho, [h], OptimizerConfig(seed=seed))
        det = abs(rerun.value - res.value)
        ok = ok and det == 0.0
        err = max(err, det)

        res_min = roof_min(rho, [h], OptimizerConfig(seed=seed))
        floor = expect(rho, h) ** 2
        ok = ok and res_min.value >= floor - 1e-9
        err = max(err, max(0.0, floor - res_min.value))

        worst = max(worst, err)
        if not ok:
            failures += 1
    return failures, worst


def _suite_fidelity(rng: np.random.Generator, trials: int):
    """Heisenberg coupling maximum against the fidelity closed form."""
    jops = [g / 2.0 for g in operator_library("pauli")]
    objective = sum(np.kron(g, g) for g in jops)
    failures = 0
    worst = 0.0
    for _ in range(trials):
        rho = _random_state(rng, 2)
        sigma = _random_state(rng, 2)
        closed = sep_corr_max_heisenberg(rho, sigma)
        res = sep_couple_opt(rho, sigma, objective, "max",
                             OptimizerConfig(seed=int(rng.integers(2**31))))
        err = abs(res.value - closed)
        worst = max(worst, err)
        if err > 1e-3 or res.feasibility > 1e-6:
            failures += 1
    return failures, worst


def _pair_ensemble(res) -> ProductEnsemble:
    locs = [(c[0], c[0]) for c in res.ensemble.locals]
    return ProductEnsemble(res.ensemble.weights, locs)


def _suite_saturation(rng: np.random.Generator, trials: int):
    """Assembled product states hit the pair-bound energy identically."""
    jz = np.diag([0.5, -0.5]).astype(complex)
    lattices = [((4,), True), ((6,), True), ((2, 4), True)]
    ext_sizes = (3, 4, 10)
    failures = 0
    worst = 0.0
    for t in range(trials):
        rho = _random_state(rng, 2)
        dims, periodic = lattices[t % len(lattices)]
        edges, coloring = lattice_edges(dims, periodic=periodic)
        n = int(np.prod(dims))
        b = (0.25, 0.0, 0.0)
        spec = ModelSpec(n=n, d=2, terms=[(-1.0, jz)], b=b, edges=edges)

        res = roof_max(rho, [jz], OptimizerConfig(seed=int(rng.integers(2**31))))
        ens = _pair_ensemble(res)
        pair_h = two_body_hamiltonian(spec)
        pair_energy = sum(
            p * expect(np.outer(np.kron(a, c), np.kron(a, c).conj()), pair_h)
            for p, (a, c) in zip(ens.weights, ens.locals))
        predicted = spec.n_pairs * pair_energy
        assembled = saturating_chain_state(ens, spec, coloring)
        err = abs(assembled - predicted)
        ok = err <= 1e-12

        n_ext = ext_sizes[t % len(ext_sizes)]
        hzz = np.kron(jz, jz)
        pure_locals = [(p, c[0]) for p, c in zip(res.ensemble.weights,
                                                 res.ensemble.locals)]
        ext = symmetric_extension_value(pure_locals, n_ext, hzz)
        direct = n_ext * (n_ext - 1) / 2.0 * sum(
            p * expect(np.outer(np.kron(v, v), np.kron(v, v).conj()), hzz)
            for p, v in pure_locals)
        err2 = abs(ext - direct)
        ok = ok and err2 <= 1e-12
        worst = max(worst, err, err2)
        if not ok:
            failures += 1
    return failures, worst


def _random_separable_pair(rng: np.random.Generator, symmetric: bool):
    """Random mixture of product pure states; symmetric ones reuse each local."""
    m = int(rng.integers(2, 6))
    w = rng.dirichlet(np.ones(m))
    locs = []
    for _ in range(m):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        if symmetric:
            locs.append((v, v))
        else:
            u = rng.normal(size=2) + 1j * rng.normal(size=2)
            u /= np.linalg.norm(u)
            locs.append((v, u))
    ens = ProductEnsemble(np.asarray(w), locs)
    return ens.assemble()


def _suite_witnesses(rng: np.random.Generator, trials: int):
    """Separable states never set off the pair criteria; a probe state does."""
    jz = np.diag([0.5, -0.5]).astype(complex)
    jx = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
    failures = 0
    worst = 0.0
    for t in range(trials):
        if t == 0:
            theta = np.pi / 8
            v = np.array([np.cos(theta), 0, 0, np.sin(theta)], dtype=complex)
            probe = np.outer(v, v.conj())
            rep = witness("corr_qfi", rho_ab=probe, h=jx)
            margin = rep.lhs - rep.rhs
            ok = rep.violated and margin >= 0.05
            worst = max(worst, abs(min(0.0, margin - 0.05)))
            if not ok:
                failures += 1
            continue
        rho_ab = _random_separable_pair(rng, symmetric=(t % 2 == 0))
        ok = True
        err = 0.0
        for crit, kw in (
            ("corr_qfi", {"h": jz}),
            ("sym_two_sided", {"h": jz}),
            ("sym_two_ops", {"hs": [jz, jx]}),
            ("fidelity_corr", {}),
        ):
            rep = witness(crit, rho_ab=rho_ab, **kw)
            if rep.applicable:
                err = max(err, max(0.0, rep.lhs - rep.rhs))
            if rep.violated:
                ok = False
        worst = max(worst, err)
        if not ok:
            failures += 1
    return failures, worst


_SUITES = {
    "tables": _suite_tables,
    "roofs": _suite_roofs,
    "fidelity": _suite_fidelity,
    "saturation": _suite_saturation,
    "witnesses": _suite_witnesses,
}


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.suite not in VERIFY_SUITES:
        raise UsageError(
            f"unknown suite {cfg.suite!r}; choose from {', '.join(VERIFY_SUITES)}")
    rng = np.random.default_rng(cfg.seed)
    failed, worst = _SUITES[cfg.suite](rng, cfg.trials)
    report = {
        "suite": cfg.suite,
        "trials": cfg.trials,
        "passed": cfg.trials - failed,
        "failed": failed,
        "worst_abs_err": worst,
        "seed": cfg.seed,
    }
    _write_json(report, cfg.out)
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

_COMMON_FLAGS = (
    ("--n", {"type": str, "help": "particle count (comma list where a list is accepted)"}),
    ("--j", {"type": float, "help": "coupling strength, default 1"}),
    ("--bx-min", {"type": float, "help": "field sweep start, default 0"}),
    ("--bx-max", {"type": float, "help": "field sweep end, default 2"}),
    ("--steps", {"type": int, "help": "sweep point count, default 50"}),
    ("--k", {"type": str, "help": "block sizes, comma list"}),
    ("--jx0", {"type": float, "help": "target <sigma_x>, default 0.1"}),
    ("--seed", {"type": int, "help": "RNG seed, default 0"}),
    ("--trials", {"type": int, "help": "verify trial count, default 50"}),
    ("--out", {"type": str, "help": "output path (stdout if omitted)"}),
    ("--threads", {"type": int, "help": "worker threads; SPINBOUND_THREADS overrides"}),
    ("--state-file", {"type": str, "help": "JSON matrix supplying the marginal state"}),
    ("--config", {"type": str, "help": "JSON file mirroring these flags (flags win)"}),
)

_DEFAULTS = {
    "j": 1.0, "bx_min": 0.0, "bx_max": 2.0, "steps": 50, "jx0": 0.1,
    "seed": 0, "trials": 50, "threads": 0,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinbound",
        description="Energy bounds for spin lattices with fixed marginals")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("sweep-chain", "transverse-field ring: ground energy vs bounds"),
        ("qfi-bound", "collective model: Fisher information lower bound"),
        ("kprod", "k-block energy bounds at fixed <sigma_x>"),
        ("verify", "randomized self-check suites"),
    ):
        p = sub.add_parser(name, help=helptext)
        if name == "verify":
            p.add_argument("suite", help="one of %s" % ", ".join(VERIFY_SUITES))
        for flag, kw in _COMMON_FLAGS:
            p.add_argument(flag, default=None, **kw)
    return parser


def _resolve(args: argparse.Namespace) -> RunConfig:
    """Merge flag values over config-file values over built-in defaults."""
    merged = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_vals = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(file_vals, dict):
            raise UsageError("config file must hold a JSON object")
        for key, val in file_vals.items():
            merged[str(key).replace("-", "_").lstrip("_")] = val

    fields = ("n", "j", "bx_min", "bx_max", "steps", "k", "jx0", "seed",
              "trials", "out", "threads", "state_file")
    values = {}
    for name in fields:
        flag_val = getattr(args, name, None)
        if flag_val is not None:
            values[name] = flag_val
        elif name in merged:
            values[name] = merged[name]
        elif name in _DEFAULTS:
            values[name] = _DEFAULTS[name]
    try:
        return RunConfig(command=args.command,
                         suite=getattr(args, "suite", None), **values)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc


_COMMANDS = {
    "sweep-chain": cmd_sweep_chain,
    "qfi-bound": cmd_qfi_bound,
    "kprod": cmd_kprod,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        return _COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
