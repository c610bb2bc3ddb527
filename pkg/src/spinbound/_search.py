"""Batched derivative-free minimization used by the oracle optimizers.

The engine runs many random restarts in lockstep: the objective receives a
(m, dim) block of parameter vectors and returns m values, so one search
iteration costs a single vectorized evaluation no matter how many restarts
are alive.  Directions are random Gaussian probes with per-restart adaptive
step sizes (expand on improvement, shrink otherwise), which behaves like
compass search but without the 2*dim axis sweep.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize


def spawn_rngs(seed, count):
    """Independent child generators from one seed, stable across runs."""
    seq = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in seq.spawn(count)]


def batched_minimize(
    f_batch: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    rng: np.random.Generator,
    iters: int = 300,
    probes: int = 8,
    step: float = 0.3,
    step_min: float = 1e-7,
    expand: float = 1.6,
    shrink: float = 0.55,
    active_coords: Optional[int] = None,
):
    """Minimize f over each row of x0 simultaneously.

    Returns (x, fx, steps) with the best point per restart and the final
    step sizes (small step = stationary).  `active_coords`
    restricts each probe direction to that many randomly chosen coordinates,
    which helps when dim is large and the objective is separable-ish.
    """
    x = np.array(x0, dtype=float)
    m, dim = x.shape
    fx = np.asarray(f_batch(x), dtype=float)
    steps = np.full(m, float(step))
    for _ in range(iters):
        alive = steps > step_min
        if not alive.any():
            break
        dirs = rng.standard_normal((m, probes, dim))
        if active_coords is not None and active_coords < dim:
            mask = np.zeros((m, probes, dim), dtype=bool)
            for i in range(m):
                for p in range(probes):
                    idx = rng.choice(dim, size=active_coords, replace=False)
                    mask[i, p, idx] = True
            dirs = np.where(mask, dirs, 0.0)
        nrm = np.linalg.norm(dirs, axis=2, keepdims=True)
        nrm[nrm == 0] = 1.0
        dirs /= nrm
        cand = x[:, None, :] + steps[:, None, None] * dirs
        fc = np.asarray(f_batch(cand.reshape(m * probes, dim))).reshape(m, probes)
        pick = fc.argmin(axis=1)
        fbest = fc[np.arange(m), pick]
        better = (fbest < fx - 1e-15) & alive
        x[better] = cand[better, pick[better]]
        fx[better] = fbest[better]
        steps[better] = np.minimum(steps[better] * expand, 2.0)
        worse = (~better) & alive
        steps[worse] *= shrink
    return x, fx, steps


def polish(f_scalar, x, method: str = "Nelder-Mead", maxiter: int = 4000,
           options: Optional[dict] = None):
    """Local refinement of a single point with a scipy simplex/pattern method."""
    if options is None:
        options = (
            {"maxiter": maxiter, "xatol": 1e-12, "fatol": 1e-14}
            if method == "Nelder-Mead"
            else {"maxiter": maxiter}
        )
    res = minimize(f_scalar, x, method=method, options=options)
    if res.fun <= f_scalar(x):
        return res.x, float(res.fun)
    return x, float(f_scalar(x))


def softmax(z: np.ndarray, axis=-1) -> np.ndarray:
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)
