"""Deterministic maximisation of pi-periodic objectives over measurement angles."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .grids import GridSpec, alpha_candidates

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_iterations(width: float, tol: float) -> int:
    if width <= tol:
        return 0
    return int(math.ceil(math.log(width / tol) / math.log(1.0 / INVPHI)))


def optimize_alpha(
    objective: Callable[[float], float],
    grid: GridSpec | None = None,
    extra_candidates: Sequence[float] = (),
) -> tuple[float, float]:
    """Maximise a pi-periodic objective over angles in [0, pi).

    Coarse scan over `n_alpha_coarse` equally spaced angles (plus any extra
    candidates), then golden-section refinement of the bracket around the best
    candidate down to `alpha_tol`.  Deterministic; exact ties resolve to the
    smallest angle, and the refined point is only used if it is strictly
    better than the best scanned candidate (so a constant objective returns
    the smallest grid angle).

    Returns
    -------
    (angle, value) : the argmax in [0, pi) and the objective there.
    """
    if grid is None:
        grid = GridSpec()
    cand = alpha_candidates(grid, tuple(extra_candidates))
    values = np.array([objective(a) for a in cand], dtype=float)
    best = int(np.argmax(values))
    best_v = float(values[best])
    n = cand.size

    a = cand[best - 1] if best > 0 else cand[n - 1] - math.pi
    b = cand[best + 1] if best < n - 1 else cand[0] + math.pi

    def f(x: float) -> float:
        return float(objective(x % math.pi))

    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(_golden_iterations(b - a, grid.alpha_tol)):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
    xm = 0.5 * (a + b)
    vm = f(xm)
    if vm > best_v:
        return xm % math.pi, vm
    return float(cand[best]), best_v


def optimize_alpha_nodes(
    objective_vec: Callable[[np.ndarray], np.ndarray],
    n_nodes: int,
    grid: GridSpec,
    extra_candidates: Sequence[float] = (),
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised `optimize_alpha` for many independent nodes at once.

    `objective_vec(alphas)` takes one candidate angle per node (shape
    (n_nodes,)) and returns the per-node objective values.  Every node runs
    the same coarse scan and then refines its own bracket; the golden-section
    iteration count is fixed from the widest initial bracket, so the whole
    procedure is a deterministic sequence of vector operations.
    """
    cand = alpha_candidates(grid, tuple(extra_candidates))
    n = cand.size
    values = np.empty((n, n_nodes))
    for idx, alpha in enumerate(cand):
        values[idx] = objective_vec(np.full(n_nodes, alpha))
    best = np.argmax(values, axis=0)
    best_v = values[best, np.arange(n_nodes)]
    best_alpha = cand[best]

    left = np.where(best > 0, cand[best - 1], cand[n - 1] - math.pi)
    right = np.where(best < n - 1, cand[np.minimum(best + 1, n - 1)], cand[0] + math.pi)

    def f(x: np.ndarray) -> np.ndarray:
        return objective_vec(np.mod(x, math.pi))

    a, b = left, right
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(_golden_iterations(float(np.max(b - a)), grid.alpha_tol)):
        take_c = fc >= fd
        b = np.where(take_c, d, b)
        a = np.where(take_c, a, c)
        d_new = np.where(take_c, c, a + INVPHI * (b - a))
        c_new = np.where(take_c, b - INVPHI * (b - a), d)
        # one fresh evaluation per node: at c for shrink-right, at d otherwise
        f_eval = f(np.where(take_c, c_new, d_new))
        fc_new = np.where(take_c, f_eval, fd)
        fd_new = np.where(take_c, fc, f_eval)
        c, d, fc, fd = c_new, d_new, fc_new, fd_new
    xm = 0.5 * (a + b)
    vm = f(xm)
    improved = vm > best_v
    alpha_star = np.where(improved, np.mod(xm, math.pi), best_alpha)
    value_star = np.where(improved, vm, best_v)
    return alpha_star, value_star


def polish_stationary_vec(
    fun_vec: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    half_width: float,
    diff_step: float = 1e-6,
    iterations: int = 60,
) -> np.ndarray:
    """Sharpen located maxima by bisecting the central-difference slope sign.

    Value-based refinement of a smooth maximum stalls near sqrt(eps) in the
    abscissa; the slope sign does not, so bisection recovers stationary
    points to ~1e-12.  Elements whose slope does not change sign across the
    bracket keep their input value.
    """

    def slope(x: np.ndarray) -> np.ndarray:
        return np.asarray(fun_vec(x + diff_step)) - np.asarray(fun_vec(x - diff_step))

    lo = x0 - half_width
    hi = x0 + half_width
    ok = (slope(lo) > 0.0) & (slope(hi) < 0.0)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        up = slope(mid) > 0.0
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    return np.where(ok, 0.5 * (lo + hi), x0)
