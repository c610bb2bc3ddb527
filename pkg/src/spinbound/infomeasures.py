"""Information measures and closed-form correlation extrema.

Implements the variance, the quantum Fisher information, the Wigner-Yanase
skew information and the Uhlmann-Jozsa fidelity, plus the closed-form
extrema of two-body correlations over separable (and symmetric separable)
two-party states with fixed single-particle marginals.  The closed forms
are exact only in specific regimes; `RoofValue` carries an exactness flag
so callers can tell an equality from a one-sided bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import (
    EIG_CLIP,
    eig_hermitian,
    matrix_sqrt_psd,
    validate_observable,
    validate_state,
)


@dataclass(frozen=True)
class RoofValue:
    """A correlation extremum together with how it relates to the true optimum."""

    value: float
    exactness: str  # 'exact', 'upper_bound' or 'lower_bound'

    def __post_init__(self):
        if self.exactness not in ("exact", "upper_bound", "lower_bound"):
            raise ValueError(f"bad exactness flag {self.exactness!r}")


def _check_dims(rho: np.ndarray, h: np.ndarray):
    if rho.shape != h.shape:
        raise ValueError(
            f"dimension mismatch: state {rho.shape} vs operator {h.shape}"
        )


def expect(rho, h) -> float:
    """Real expectation value Tr(rho h) for Hermitian h."""
    return float(np.trace(np.asarray(rho) @ np.asarray(h)).real)


def variance(rho, h) -> float:
    """Var = <h²> - <h>², clipped up to 0 against rounding."""
    rho = validate_state(rho)
    h = validate_observable(h)
    _check_dims(rho, h)
    v = expect(rho, h @ h) - expect(rho, h) ** 2
    return max(v, 0.0)


def qfi(rho, h) -> float:
    """Quantum Fisher information of the state with respect to generator h.

    F_Q = 2 sum_{k,l} (λ_k - λ_l)² / (λ_k + λ_l) |<k|h|l>|², where the sum
    skips pairs with λ_k + λ_l below the clipping threshold (the summand is
    0/0 on the kernel-kernel block and is conventionally omitted).
    Satisfies 0 <= F_Q <= 4 Var, with equality on pure states.
    """
    rho = validate_state(rho)
    h = validate_observable(h)
    _check_dims(rho, h)
    lam, vecs = np.linalg.eigh(rho)
    hm = vecs.conj().T @ h @ vecs
    lsum = lam[:, None] + lam[None, :]
    ldif = lam[:, None] - lam[None, :]
    mask = lsum >= EIG_CLIP
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(mask, ldif**2 / np.where(mask, lsum, 1.0), 0.0)
    return float(2.0 * np.sum(w * np.abs(hm) ** 2))


def wy_skew(rho, h) -> float:
    """Wigner-Yanase skew information Tr(h² rho) - Tr(h sqrt(rho) h sqrt(rho))."""
    rho = validate_state(rho)
    h = validate_observable(h)
    _check_dims(rho, h)
    s = matrix_sqrt_psd(rho)
    val = expect(rho, h @ h) - float(np.trace(h @ s @ h @ s).real)
    return max(val, 0.0)


def fidelity(rho, sigma) -> float:
    """Uhlmann-Jozsa fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))²."""
    rho = validate_state(rho, "rho")
    sigma = validate_state(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise ValueError("states must have equal dimension")
    s = matrix_sqrt_psd(rho)
    inner = s @ sigma @ s
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    w = np.where(w < EIG_CLIP, 0.0, w)
    val = float(np.sum(np.sqrt(w)) ** 2)
    return min(max(val, 0.0), 1.0)


# ---------------------------------------------------------------------------
# closed-form correlation extrema
# ---------------------------------------------------------------------------

def sep_corr_max(rho, hs) -> RoofValue:
    """Maximum of sum_l <h_l ⊗ h_l> over separable pairs with both marginals rho.

    For a single operator the value <h²> - F_Q/4 is exact, and the same
    number is the maximum over the symmetric separable set.  For two or more
    operators the sum of single-operator values is only an upper bound on
    the joint maximum.
    """
    if not hs:
        raise ValueError("need at least one operator")
    rho = validate_state(rho)
    total = 0.0
    for h in hs:
        h = validate_observable(h)
        _check_dims(rho, h)
        total += expect(rho, h @ h) - qfi(rho, h) / 4.0
    return RoofValue(total, "exact" if len(hs) == 1 else "upper_bound")


def any_state_corr_max_qubit(rho, h) -> float:
    """Maximum of <h ⊗ h> over ALL two-qubit states with both marginals rho.

    Qubits only; equals <h²> - I_WY(rho, h), which dominates the separable
    maximum <h²> - F_Q/4 because I_WY <= F_Q/4.
    """
    rho = validate_state(rho)
    if rho.shape[0] != 2:
        raise ValueError("closed form only holds for qubits")
    h = validate_observable(h)
    _check_dims(rho, h)
    return expect(rho, h @ h) - wy_skew(rho, h)


def sep_corr_max_heisenberg(rho, sigma) -> float:
    """Max of sum_{l=x,y,z} <j_l ⊗ j_l> over separable pairs with marginals rho, sigma.

    Two qubits; the value is F(rho, sigma)/2 - 1/4 and lies in [-1/4, 1/4].
    """
    rho = validate_state(rho, "rho")
    sigma = validate_state(sigma, "sigma")
    if rho.shape[0] != 2 or sigma.shape[0] != 2:
        raise ValueError("closed form only holds for qubits")
    return fidelity(rho, sigma) / 2.0 - 0.25


def sym_sep_corr_min(rho, hs, over: str = "symsep") -> RoofValue:
    """Value sum_l <h_l>² as an extremum of sum_l <h_l ⊗ h_l> with fixed marginal rho.

    over='symsep': minimum over symmetric separable pairs; exact for one or
    two operators, a lower bound on the true minimum for three or more.
    over='sep': the same number is only an upper bound on the minimum over
    the (larger) plain separable set.
    """
    if not hs:
        raise ValueError("need at least one operator")
    if over not in ("symsep", "sep"):
        raise ValueError(f"unknown set selector {over!r}")
    rho = validate_state(rho)
    total = 0.0
    for h in hs:
        h = validate_observable(h)
        _check_dims(rho, h)
        total += expect(rho, h) ** 2
    if over == "sep":
        exactness = "upper_bound"
    else:
        exactness = "exact" if len(hs) <= 2 else "lower_bound"
    return RoofValue(total, exactness)
