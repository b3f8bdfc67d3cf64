"""Backward-induction solvers for the optimal betting value function.

The primary engine is an exact one-dimensional reduction: logarithmic utility
separates as U_k(W, xi) = log2(W) + G_k(xi), so the wealth axis never needs a
grid.  A two-dimensional replica that carries the wealth axis explicitly (as
the published pseudo-code does) is kept for fidelity and cross-validation,
along with brute-force oracles that use no value-function interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import GridTooCoarse, InstanceTooLarge, OutOfRangeWealth
from .grids import GridSpec, alpha_candidates, w_nodes, xi_nodes
from .model import (
    PROB_EPS,
    GameParams,
    branch_updates,
    canonical_angle,
    one_step_growth,
)
from .optimize import optimize_alpha_nodes


@dataclass(frozen=True)
class ValueCurve:
    """Optimal excess utility G_k(xi) at one step, with its angle policy.

    g_values[i] is the optimal expected log2 final-wealth gain from step k
    onward when the current prior is xi_nodes[i].  alpha_policy is None at
    the terminal step (no decision remains).
    """

    step_index: int
    xi_nodes: np.ndarray
    g_values: np.ndarray
    alpha_policy: np.ndarray | None


@dataclass(frozen=True)
class ValueStack:
    """Solved value curves for k = 0..N, plus the instance that produced them."""

    params: GameParams
    grid: GridSpec
    curves: tuple[ValueCurve, ...]

    def __getitem__(self, k: int) -> ValueCurve:
        return self.curves[k]

    def __len__(self) -> int:
        return len(self.curves)

    def g_interp(self, k: int, xi) -> np.ndarray:
        """Linear interpolation of G_k at arbitrary priors."""
        curve = self.curves[k]
        return np.interp(xi, curve.xi_nodes, curve.g_values)


@dataclass(frozen=True)
class UtilitySurface:
    """The two-dimensional utility array U[k][w_index][xi_index] and its axes."""

    params: GameParams
    grid: GridSpec
    w_nodes: np.ndarray
    log2_w_nodes: np.ndarray
    xi_nodes: np.ndarray
    u: np.ndarray  # shape (N+1, n_w, n_xi)
    w_interp: str  # "linear" | "log2" -- interpolation used in the recursion


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


def _objective_1d(xi_vec: np.ndarray, g_next: np.ndarray, nodes: np.ndarray, delta: float):
    """Bellman objective: expected log2 growth plus interpolated continuation.

    Under the Kelly fraction the wealth multiplier on an outcome of
    probability p is exactly 2p, for either bet direction, so the expected
    one-round growth is p*log2(2p) + (1-p)*log2(2(1-p)) = one_step_growth(p).
    """

    def objective(alphas: np.ndarray) -> np.ndarray:
        p_up, p_down, xi_up, xi_down = branch_updates(xi_vec, alphas, delta)
        val = one_step_growth(p_up)
        val = val + np.where(p_up > PROB_EPS, p_up * np.interp(xi_up, nodes, g_next), 0.0)
        val = val + np.where(p_down > PROB_EPS, p_down * np.interp(xi_down, nodes, g_next), 0.0)
        return val

    return objective


MONOTONE_TOL = 1e-6


def solve_1d(params: GameParams, grid: GridSpec | None = None) -> ValueStack:
    """Solve the game by backward induction on the prior axis alone.

    Exactness of the wealth separation follows from
    log(W(1 +/- f)) = log W + log(1 +/- f).  The prior-preserving axis
    delta/2 is always among the scanned candidates, which forces the
    monotonicity G_k >= G_{k+1} structurally (freezing the prior and betting
    Kelly never has negative expected log growth).

    Returns a ValueStack whose curves satisfy: G_N == 0, G_k(0) = G_k(1) =
    N - k exactly, G_k symmetric under xi -> 1 - xi to optimiser tolerance.

    Raises
    ------
    GridTooCoarse
        If interpolation error ever makes a node value decrease by more than
        1e-6 when a round is added.
    """
    if grid is None:
        grid = GridSpec()
    nodes = xi_nodes(grid)
    n = params.n_steps
    delta = params.delta
    g_next = np.zeros_like(nodes)
    curves: list[ValueCurve] = [ValueCurve(n, _freeze(nodes), _freeze(g_next), None)]
    extras = (canonical_angle(delta / 2.0),)
    for k in range(n - 1, -1, -1):
        objective = _objective_1d(nodes, g_next, nodes, delta)
        alpha_star, g_k = optimize_alpha_nodes(objective, nodes.size, grid, extras)
        # certainty anchors are analytic: align with the known state, bet all
        g_k[0] = float(n - k)
        alpha_star[0] = canonical_angle(delta)
        g_k[-1] = float(n - k)
        alpha_star[-1] = 0.0
        worst = float(np.max(g_next - g_k))
        if worst > MONOTONE_TOL:
            raise GridTooCoarse(
                f"G_{k} drops below G_{k + 1} by {worst:.3e} (> {MONOTONE_TOL:g}); refine the grid"
            )
        curves.append(ValueCurve(k, _freeze(nodes), _freeze(g_k), _freeze(alpha_star)))
        g_next = g_k
    curves.reverse()
    return ValueStack(params, grid, tuple(curves))


def solve_2d_paper(
    params: GameParams,
    grid: GridSpec | None = None,
    w_interp: str = "linear",
    refine: str = "parabolic",
    strict_wealth: bool = False,
) -> UtilitySurface:
    """Replicate the published backward recursion on a (wealth, prior) grid.

    The terminal layer is log2 of the wealth axis; each earlier layer is the
    probability-weighted bilinear interpolation of the next layer at the
    post-bet points (W(1+f), xi_up) / (W(1-f), xi_down), maximised over the
    measurement angle at every node.

    w_interp selects the wealth coordinate of the bilinear interpolation:
    "linear" interpolates in W itself (faithful to plain grid interpolation
    on a log-spaced axis; leaves an O((grid ratio - 1)^2) separability
    residual that shrinks as n_w grows), while "log2" interpolates in
    log2 W, which represents the true utility exactly and collapses the
    residual to round-off.

    Wealth queries beyond the grid are folded back by whole octaves via the
    exact shift U(2^q W, xi) = q + U(W, xi); with `strict_wealth` any such
    fold from an interior node raises OutOfRangeWealth instead.

    refine="parabolic" refines each node's coarse-scan angle with one
    parabolic-vertex step (node values accurate to ~1e-8, far below the
    wealth-interpolation scale); refine="golden" runs full golden-section to
    alpha_tol per node and is considerably slower.
    """
    if grid is None:
        grid = GridSpec()
    if w_interp not in ("linear", "log2"):
        raise ValueError(f"w_interp must be 'linear' or 'log2', got {w_interp!r}")
    if refine not in ("parabolic", "golden"):
        raise ValueError(f"refine must be 'parabolic' or 'golden', got {refine!r}")
    n = params.n_steps
    w, lw = w_nodes(grid, n)
    nodes = xi_nodes(grid)
    cand = alpha_candidates(grid, (canonical_angle(params.delta / 2.0),))
    u = np.empty((n + 1, grid.n_w, nodes.size))
    u[n] = lw[:, None]
    linear = w_interp == "linear"
    # linear-W interpolation of a log2-shaped layer has an intrinsic sag of
    # (r-1)^2/(8 ln 2) per segment; the monotonicity check must sit above it
    seg = 2.0 ** ((lw[-1] - lw[0]) / (grid.n_w - 1)) - 1.0
    tol = max(MONOTONE_TOL, seg * seg / (2.0 * math.log(2.0))) if linear else MONOTONE_TOL
    for k in range(n - 1, -1, -1):
        folded = _kernels.solve2d_step(
            u[k + 1], w, nodes, params.delta, cand, grid.alpha_tol,
            linear, refine == "golden", u[k],
        )
        if strict_wealth and folded > 0:
            raise OutOfRangeWealth(
                f"{folded} interior wealth updates left (0, {grid.w_max}] at step {k}; "
                "extend w_octaves or rescale the instance"
            )
        worst = float(np.max(u[k + 1] - u[k]))
        if worst > tol:
            raise GridTooCoarse(
                f"U_{k} drops below U_{k + 1} by {worst:.3e} (> {tol:.3e}); refine the grid"
            )
    return UtilitySurface(params, grid, _freeze(w), _freeze(lw), _freeze(nodes), _freeze(u), w_interp)


def query_value(solved: ValueStack | UtilitySurface, k: int, w: float, xi: float) -> float:
    """Interpolated utility lookup: log2 wealth plus the prior value curve.

    One-dimensional stacks accept any positive wealth; surfaces interpolate
    bilinearly in (log2 W, xi) and raise OutOfRangeWealth outside their grid.
    Exact at grid nodes.
    """
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must lie in [0, 1], got {xi}")
    if isinstance(solved, ValueStack):
        if not w > 0.0:
            raise ValueError(f"wealth must be positive, got {w}")
        return float(math.log2(w) + solved.g_interp(k, xi))
    w_lo, w_hi = solved.w_nodes[0], solved.w_nodes[-1]
    if not w_lo <= w <= w_hi:
        raise OutOfRangeWealth(f"wealth {w} outside grid range [{w_lo:g}, {w_hi:g}]")
    lw = math.log2(w)
    i = int(np.searchsorted(solved.log2_w_nodes, lw) - 1)
    i = min(max(i, 0), solved.w_nodes.size - 2)
    t = (lw - solved.log2_w_nodes[i]) / (solved.log2_w_nodes[i + 1] - solved.log2_w_nodes[i])
    t = min(max(t, 0.0), 1.0)
    row = (1.0 - t) * solved.u[k, i, :] + t * solved.u[k, i + 1, :]
    return float(np.interp(xi, solved.xi_nodes, row))


def separability_residual(surface: UtilitySurface, stack: ValueStack) -> float:
    """max |U[k][i][j] - log2(W_i) - G_k(xi_j)| over every node of every step."""
    worst = 0.0
    for k in range(surface.params.n_steps + 1):
        expected = surface.log2_w_nodes[:, None] + stack[k].g_values[None, :]
        worst = max(worst, float(np.max(np.abs(surface.u[k] - expected))))
    return worst


BRUTE_FORCE_MAX_STEPS = 4


def brute_force_value(params: GameParams, xi0: float | None = None,
                      grid: GridSpec | None = None) -> float:
    """Exact optimal value by recursive maximisation on exact posteriors.

    No value-function interpolation is used anywhere; every continuation is
    recomputed from scratch, so the cost grows as (n_alpha * 2)^N.

    Raises
    ------
    InstanceTooLarge
        If params.n_steps > 4.
    """
    if params.n_steps > BRUTE_FORCE_MAX_STEPS:
        raise InstanceTooLarge(
            f"brute force limited to N <= {BRUTE_FORCE_MAX_STEPS}, got N={params.n_steps}"
        )
    if grid is None:
        grid = GridSpec()
    if xi0 is None:
        xi0 = params.xi0
    cand = alpha_candidates(grid, (canonical_angle(params.delta / 2.0),))
    return float(_kernels.brute_force_kernel(
        float(xi0), params.n_steps, params.delta, cand, grid.alpha_tol
    ))


POLICY_ENUM_MAX_STEPS = 12


def evaluate_policy_exact(params: GameParams, policy, xi0: float | None = None) -> float:
    """Exact expected log2 growth of a policy by outcome-tree enumeration.

    Walks the 2^N outcome sequences level by level (branches of probability
    below PROB_EPS are pruned), so the result is the exact expectation of
    log2(W_N / W_1) under the policy, up to the policy's own angle choices.

    Raises
    ------
    InstanceTooLarge
        If params.n_steps > 12.
    """
    if params.n_steps > POLICY_ENUM_MAX_STEPS:
        raise InstanceTooLarge(
            f"exact enumeration limited to N <= {POLICY_ENUM_MAX_STEPS}, got N={params.n_steps}"
        )
    if xi0 is None:
        xi0 = params.xi0
    xis = np.array([float(xi0)])
    log2w = np.zeros(1)
    probs = np.ones(1)
    for k in range(params.n_steps):
        alphas = policy.angles(k, xis)
        p_up, p_down, xi_up, xi_down = branch_updates(xis, alphas, params.delta)
        frac, bet_up = policy.fractions(p_up)
        mult_up = np.where(bet_up, 1.0 + frac, 1.0 - frac)
        mult_down = np.where(bet_up, 1.0 - frac, 1.0 + frac)
        keep_up = p_up > PROB_EPS
        keep_down = p_down > PROB_EPS
        xis = np.concatenate((xi_up[keep_up], xi_down[keep_down]))
        log2w = np.concatenate(
            (log2w[keep_up] + np.log2(mult_up[keep_up]),
             log2w[keep_down] + np.log2(mult_down[keep_down]))
        )
        probs = np.concatenate((probs[keep_up] * p_up[keep_up],
                                probs[keep_down] * p_down[keep_down]))
    return float(np.sum(probs * log2w))
