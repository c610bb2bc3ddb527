"""Dense complex linear algebra and quantum primitives.

Everything downstream (information measures, model builders, bound
evaluators, oracles) is built on the handful of operations in this module.
States and observables are plain complex numpy arrays; validation helpers
enforce the contracts (Hermiticity, positivity, unit trace) at the entry
points instead of wrapping arrays in classes.

Conventions
-----------
* Party 1 is the slowest-varying index in tensor products.
* Input validation tolerance is 1e-10 (Hermiticity, trace, smallest
  eigenvalue); eigenvalue clipping inside square roots uses 1e-12.
* Degenerate eigenvectors are arbitrary up to unitary mixing within the
  block; nothing here (or in callers) may depend on their particular choice.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

HERM_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
EIG_CLIP = 1e-12


class EigenDecomposition(NamedTuple):
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_square_matrix(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def validate_observable(m, name: str = "observable") -> np.ndarray:
    """Check Hermiticity within HERM_TOL and return the array."""
    a = _as_square_matrix(m, name)
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if dev > HERM_TOL:
        raise ValueError(f"{name} is not Hermitian (max deviation {dev:.3e})")
    return a


def validate_state(rho, name: str = "state") -> np.ndarray:
    """Check Hermiticity, unit trace and positivity within tolerance."""
    a = validate_observable(rho, name)
    tr = np.trace(a).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"{name} trace is {tr:.12f}, expected 1")
    lo = np.linalg.eigvalsh(a)[0]
    if lo < -PSD_TOL:
        raise ValueError(f"{name} has negative eigenvalue {lo:.3e}")
    return a


def tensor(*ops) -> np.ndarray:
    """Kronecker product; the first factor indexes the slower (first) party."""
    if not ops:
        raise ValueError("tensor needs at least one factor")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def partial_trace(rho, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out all parties not listed in `keep` (0-based indices).

    `dims` lists the local dimension of each party, slowest first, and must
    multiply to the matrix dimension.  Kept parties stay in their original
    relative order.
    """
    a = np.asarray(rho, dtype=complex)
    dims = list(dims)
    n = len(dims)
    if a.shape != (int(np.prod(dims)), int(np.prod(dims))):
        raise ValueError(
            f"dims {dims} do not match matrix dimension {a.shape[0]}"
        )
    if isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted(int(k) for k in keep)
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {n} parties")
    t = a.reshape(dims + dims)
    # Trace over discarded parties, highest index first so positions stay valid.
    for k in reversed(range(n)):
        if k not in keep:
            t = np.trace(t, axis1=k, axis2=k + t.ndim // 2)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def eig_hermitian(m) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    a = validate_observable(m)
    w, v = np.linalg.eigh(a)
    return EigenDecomposition(w, v)


def matrix_sqrt_psd(rho) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix.

    Eigenvalues below EIG_CLIP are clipped to zero before the square root.
    Raises if an eigenvalue is below -1e-8, which is too negative to be a
    rounding artifact of a state.
    """
    a = validate_observable(rho)
    w, v = np.linalg.eigh(a)
    if w[0] < -1e-8:
        raise ValueError(f"matrix is not PSD (eigenvalue {w[0]:.3e})")
    w = np.where(w < EIG_CLIP, 0.0, w)
    return (v * np.sqrt(w)) @ v.conj().T


def flip_operator(d: int) -> np.ndarray:
    """Two-party swap: F (|a> ⊗ |b>) = |b> ⊗ |a>, F² = I, F Hermitian."""
    if d < 2:
        raise ValueError("local dimension must be at least 2")
    f = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            f[i * d + j, j * d + i] = 1.0
    return f


# ---------------------------------------------------------------------------
# operator families
# ---------------------------------------------------------------------------

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _spin_matrices(j: float) -> list:
    dim = int(round(2 * j + 1))
    if abs(2 * j + 1 - dim) > 1e-12 or dim < 2:
        raise ValueError(f"2j+1 must be a positive integer >= 2, got j={j}")
    m = j - np.arange(dim)  # j, j-1, ..., -j
    jz = np.diag(m).astype(complex)
    # <j, m+1 | J+ | j, m> = sqrt(j(j+1) - m(m+1))
    jp = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim):
        mm = m[k]
        jp[k - 1, k] = np.sqrt(j * (j + 1) - mm * (mm + 1))
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    return [jx, jy, jz]


def _gellmann(d: int) -> list:
    if d < 2:
        raise ValueError("gellmann generators need d >= 2")
    gens = []
    # symmetric and antisymmetric off-diagonal families
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1.0
            gens.append(s)
            a = np.zeros((d, d), dtype=complex)
            a[j, k] = -1j
            a[k, j] = 1j
            gens.append(a)
    # diagonal family
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        gens.append(np.diag(diag).astype(complex) * np.sqrt(2.0 / (l * (l + 1))))
    return gens


def operator_library(kind: str, **params) -> list:
    """Standard Hermitian operator families.

    kind='pauli'            -> [sigma_x, sigma_y, sigma_z]
    kind='spin_j', j=...    -> [j_x, j_y, j_z] of dimension 2j+1
    kind='gellmann', d=...  -> d²-1 traceless generators, Tr(g_a g_b) = 2 δ_ab
    """
    if kind == "pauli":
        return [PAULI_X.copy(), PAULI_Y.copy(), PAULI_Z.copy()]
    if kind == "spin_j":
        return _spin_matrices(float(params["j"]))
    if kind == "gellmann":
        return _gellmann(int(params["d"]))
    raise ValueError(f"unknown operator family {kind!r}")


# ---------------------------------------------------------------------------
# JSON exchange format
# ---------------------------------------------------------------------------

def matrix_to_json(m) -> dict:
    """Encode a matrix as {"dim": n, "re": [[...]], "im": [[...]]}, row-major."""
    a = _as_square_matrix(m)
    return {
        "dim": a.shape[0],
        "re": a.real.tolist(),
        "im": a.imag.tolist(),
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    dim = int(obj["dim"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ValueError("matrix JSON shape does not match dim")
    return _as_square_matrix(re + 1j * im)
