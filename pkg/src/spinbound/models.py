"""Spin model construction.

A `ModelSpec` describes a pairwise Hamiltonian on an interaction graph,

    H = sum_edges sum_l J_l h_l ⊗ h_l (on the edge)  -  sum_l B_l G_l,

with G_l = sum_n g_l^(n) built from SU(d) generators.  The companion
two-body Hamiltonian distributes the field over the pairs,

    H_AB = sum_l J_l h_l ⊗ h_l - (N / 2 N_p) sum_l B_l (g_l ⊗ I + I ⊗ g_l),

so that summing H_AB embedded on every edge of a regular graph reproduces
H exactly.  For fully connected ferromagnets there is additionally a
collective representation in the (N+1)-dimensional maximal-spin block,
which is what makes N = 60 sweeps cheap.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .qcore import (
    matrix_from_json,
    matrix_to_json,
    operator_library,
    partial_trace,
    tensor,
    validate_observable,
)

MAX_DENSE_DIM = 4096


@dataclass
class ModelSpec:
    """Pairwise interaction model on a graph; edges are 1-based (n, n') pairs."""

    n: int
    d: int
    terms: List[Tuple[float, np.ndarray]]
    b: np.ndarray
    edges: List[Tuple[int, int]]
    generators: Optional[List[np.ndarray]] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one particle")
        if self.d < 2:
            raise ValueError("local dimension must be at least 2")
        self.terms = [(float(j), validate_observable(h, "h")) for j, h in self.terms]
        for _, h in self.terms:
            if h.shape[0] != self.d:
                raise ValueError("interaction operator dimension differs from d")
        self.b = np.asarray(self.b, dtype=float)
        if self.generators is None:
            if self.d == 2:
                self.generators = operator_library("pauli")
            else:
                self.generators = operator_library("gellmann", d=self.d)
        self.generators = [validate_observable(g, "generator") for g in self.generators]
        if len(self.b) != len(self.generators):
            raise ValueError("field vector length must match generator count")
        for g in self.generators:
            if g.shape[0] != self.d:
                raise ValueError("generator dimension differs from d")
        seen = set()
        cleaned = []
        for a, c in self.edges:
            a, c = int(a), int(c)
            if a == c:
                raise ValueError(f"self-loop on site {a}")
            if not (1 <= a <= self.n and 1 <= c <= self.n):
                raise ValueError(f"edge ({a},{c}) out of range 1..{self.n}")
            key = (min(a, c), max(a, c))
            if key not in seen:
                seen.add(key)
                cleaned.append((a, c))
        self.edges = cleaned

    @property
    def n_pairs(self) -> int:
        return len(self.edges)

    def field_operator(self) -> np.ndarray:
        """Single-site field contribution sum_l B_l g_l."""
        out = np.zeros((self.d, self.d), dtype=complex)
        for bl, g in zip(self.b, self.generators):
            out += bl * g
        return out


def _embed(op: np.ndarray, sites: Sequence[int], n: int, d: int) -> np.ndarray:
    """Embed an operator acting on `sites` (1-based, ordered) into n parties."""
    dims = op.shape[0]
    k = len(sites)
    if dims != d**k:
        raise ValueError("operator dimension does not match site count")
    full = op.reshape([d] * (2 * k))
    # start from op ⊗ I_rest, then permute parties into place
    rest = n - k
    big = np.tensordot(full, np.eye(d**rest).reshape([d] * (2 * rest)), axes=0)
    # big index order: rows(sites), cols(sites), rows(rest), cols(rest)
    row_axes = list(range(k)) + list(range(2 * k, 2 * k + rest))
    col_axes = list(range(k, 2 * k)) + list(range(2 * k + rest, 2 * (k + rest)))
    order = [s - 1 for s in sites] + [i for i in range(n) if i + 1 not in sites]
    inv = np.argsort(order)
    perm = [row_axes[i] for i in inv] + [col_axes[i] for i in inv]
    return big.transpose(perm).reshape(d**n, d**n)


def build_hamiltonian(spec: ModelSpec) -> np.ndarray:
    """Assemble the dense Hamiltonian of the model on the full Hilbert space."""
    dim = spec.d**spec.n
    if dim > MAX_DENSE_DIM:
        raise ValueError(f"dimension {dim} exceeds dense limit {MAX_DENSE_DIM}")
    h = np.zeros((dim, dim), dtype=complex)
    for a, c in spec.edges:
        for j, hop in spec.terms:
            h += j * _embed(tensor(hop, hop), (a, c), spec.n, spec.d)
    fld = spec.field_operator()
    if np.any(np.abs(fld) > 0):
        for site in range(1, spec.n + 1):
            h -= _embed(fld, (site,), spec.n, spec.d)
    return h


def two_body_hamiltonian(spec: ModelSpec) -> np.ndarray:
    """The pair Hamiltonian whose sum over edges reproduces the full model."""
    if spec.n_pairs == 0:
        raise ValueError("model has no interacting pairs")
    d = spec.d
    h = np.zeros((d * d, d * d), dtype=complex)
    for j, hop in spec.terms:
        h += j * tensor(hop, hop)
    pref = spec.n / (2.0 * spec.n_pairs)
    fld = spec.field_operator()
    eye = np.eye(d)
    h -= pref * (tensor(fld, eye) + tensor(eye, fld))
    return h


def is_regular(spec: ModelSpec) -> bool:
    deg = np.zeros(spec.n, dtype=int)
    for a, c in spec.edges:
        deg[a - 1] += 1
        deg[c - 1] += 1
    return bool(np.all(deg == deg[0]))


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------

def lattice_edges(dims: Sequence[int], periodic: bool = True):
    """Nearest-neighbor edges of a hypercubic lattice, plus a two-coloring.

    Returns (edges, coloring) with 1-based edges.  The coloring maps site ->
    0/1 and is None when the graph is not bipartite (any odd periodic side).
    Periodic sides of length 2 would produce each bond twice; duplicates are
    collapsed so the edge count reflects distinct interacting pairs.
    """
    dims = [int(s) for s in dims]
    if any(s < 1 for s in dims) or not dims:
        raise ValueError("side lengths must be positive")
    n = int(np.prod(dims))
    sites = list(np.ndindex(*dims))
    index = {pos: i + 1 for i, pos in enumerate(sites)}
    seen = set()
    edges = []
    for pos in sites:
        for axis, side in enumerate(dims):
            if side == 1:
                continue
            nxt = list(pos)
            if pos[axis] + 1 < side:
                nxt[axis] += 1
            elif periodic:
                nxt[axis] = 0
            else:
                continue
            a, c = index[pos], index[tuple(nxt)]
            key = (min(a, c), max(a, c))
            if key not in seen:
                seen.add(key)
                edges.append(key)
    bipartite = all(side % 2 == 0 for side in dims if side > 1) or not periodic
    coloring = None
    if bipartite:
        coloring = {index[pos]: sum(pos) % 2 for pos in sites}
        for a, c in edges:
            if coloring[a] == coloring[c]:  # pragma: no cover - defensive
                coloring = None
                break
    return edges, coloring


def complete_graph_edges(n: int):
    if n < 2:
        raise ValueError("complete graph needs at least two sites")
    return [(a, c) for a in range(1, n + 1) for c in range(a + 1, n + 1)]


# ---------------------------------------------------------------------------
# collective (maximal-spin block) representation
# ---------------------------------------------------------------------------

@dataclass
class CollectiveModel:
    """Fully connected ferromagnet restricted to the maximal-spin block."""

    n: int
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    h: np.ndarray


def collective_spin(n: int):
    """Collective spin components J_x, J_y, J_z in the (n+1)-dim Dicke block."""
    if n < 1:
        raise ValueError("need at least one spin")
    j = n / 2.0
    m = j - np.arange(n + 1)
    jz = np.diag(m).astype(complex)
    jp = np.zeros((n + 1, n + 1), dtype=complex)
    for k in range(1, n + 1):
        mm = m[k]
        jp[k - 1, k] = np.sqrt(j * (j + 1) - mm * (mm + 1))
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    return jx, jy, jz


def build_collective(n: int, j: float, b, h_kind: str = "jz") -> CollectiveModel:
    """Collective form of the fully connected ferromagnet with h = j_z.

    H = -J (J_z² - N/4)/2 - 2 B · (J_x, J_y, J_z), using the identity
    sum_{n<n'} j_z^(n) j_z^(n') = (J_z² - N/4)/2 on the maximal-spin block
    and the fact that the Pauli field couples to 2 J_l.
    """
    if n < 2:
        raise ValueError("need at least two spins")
    if h_kind != "jz":
        raise ValueError("collective builder supports h = j_z only")
    b = np.asarray(b, dtype=float)
    if b.shape != (3,):
        raise ValueError("field must be a 3-vector")
    jx, jy, jz = collective_spin(n)
    ham = -j * (jz @ jz - n / 4.0 * np.eye(n + 1)) / 2.0
    ham -= 2.0 * (b[0] * jx + b[1] * jy + b[2] * jz)
    return CollectiveModel(n, jx, jy, jz, ham)


def reduced_from_collective(state, n: int):
    """One- and two-spin marginals of a pure state of the maximal-spin block.

    Uses <sigma_l> = 2 <J_l> / N and the symmetrized second moments,
    <sigma_l ⊗ sigma_m> = (2 K_lm - N δ_lm) / (N (N-1)) with
    K_lm = <J_l J_m + J_m J_l>.  Anti-symmetric parts vanish by permutation
    symmetry.  Returns (rho1, rho_ab); tiny negative eigenvalues from
    rounding are clipped and the trace renormalized.
    """
    if n < 2:
        raise ValueError("need at least two spins")
    psi = np.asarray(state, dtype=complex).reshape(-1)
    if psi.shape[0] != n + 1:
        raise ValueError("state dimension must be n+1")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError("state is not normalized")
    psi = psi / nrm
    jops = collective_spin(n)
    paulis = operator_library("pauli")

    def ev(op):
        return float((psi.conj() @ op @ psi).real)

    a = np.array([2.0 * ev(jop) / n for jop in jops])
    c = np.zeros((3, 3))
    for l in range(3):
        for m in range(3):
            k_lm = ev(jops[l] @ jops[m] + jops[m] @ jops[l])
            c[l, m] = (2.0 * k_lm - n * (1.0 if l == m else 0.0)) / (n * (n - 1))

    rho1 = np.eye(2, dtype=complex) / 2
    for l in range(3):
        rho1 += 0.5 * a[l] * paulis[l]
    rho_ab = np.eye(4, dtype=complex) / 4
    for l in range(3):
        rho_ab += 0.25 * a[l] * (
            tensor(paulis[l], np.eye(2)) + tensor(np.eye(2), paulis[l])
        )
        for m in range(3):
            rho_ab += 0.25 * c[l, m] * tensor(paulis[l], paulis[m])

    rho1 = _clip_state(rho1)
    rho_ab = _clip_state(rho_ab)
    return rho1, rho_ab


def _clip_state(rho: np.ndarray) -> np.ndarray:
    rho = (rho + rho.conj().T) / 2
    w, v = np.linalg.eigh(rho)
    if w[0] < -1e-8:
        raise ValueError(f"reconstructed state has eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    rho = (v * w) @ v.conj().T
    return rho / np.trace(rho).real


def ground_marginals(psi: np.ndarray, n: int, d: int):
    """Site-averaged single-particle marginal of an n-party pure state."""
    rho = np.outer(psi, psi.conj())
    dims = [d] * n
    acc = np.zeros((d, d), dtype=complex)
    for site in range(n):
        acc += partial_trace(rho, dims, [site])
    return _clip_state(acc / n)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def spec_to_json(spec: ModelSpec) -> dict:
    return {
        "n": spec.n,
        "d": spec.d,
        "terms": [{"j": j, "h": matrix_to_json(h)} for j, h in spec.terms],
        "b": spec.b.tolist(),
        "edges": [[a, c] for a, c in spec.edges],
    }


def spec_from_json(obj: dict) -> ModelSpec:
    return ModelSpec(
        n=int(obj["n"]),
        d=int(obj["d"]),
        terms=[(float(t["j"]), matrix_from_json(t["h"])) for t in obj["terms"]],
        b=np.asarray(obj["b"], dtype=float),
        edges=[tuple(e) for e in obj["edges"]],
    )


def spec_dumps(spec: ModelSpec) -> str:
    return json.dumps(spec_to_json(spec))


def spec_loads(text: str) -> ModelSpec:
    return spec_from_json(json.loads(text))
