"""Grid construction for the backward-induction solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Discretisation used by the solvers and the angle optimiser.

    Parameters
    ----------
    n_xi : odd int >= 3
        Number of prior nodes.  The grid always contains 0, 1/2 and 1 exactly.
    xi_spacing : {"log", "uniform"}
        "log": geometric spacing from `xi_floor` toward 0 on [0, 1/2],
        mirrored onto [1/2, 1] (the value curve is steepest near certainty).
        "uniform": evenly spaced nodes.
    xi_floor : float
        Smallest positive prior node in "log" mode.
    n_w : int >= 3
        Number of wealth nodes (two-dimensional solver only), logarithmically
        spaced over (0, w_max].
    w_max : float
        Top wealth node; also the fixed final wealth of the contour picture.
    w_octaves : float or None
        Number of octaves the wealth grid spans below w_max.  None lets the
        solver pick n_steps + 2 so certainty anchors stay interior.
    n_alpha_coarse : int >= 8
        Size of the deterministic coarse scan over measurement angles [0, pi).
    alpha_tol : float
        Bracket width at which golden-section refinement of the angle stops.
    """

    n_xi: int = 2001
    xi_spacing: str = "log"
    xi_floor: float = 1e-6
    n_w: int = 513
    w_max: float = 2.0
    w_octaves: float | None = None
    n_alpha_coarse: int = 181
    alpha_tol: float = 1e-10

    def __post_init__(self):
        if self.n_xi < 3 or self.n_xi % 2 == 0:
            raise ValueError(f"n_xi must be an odd integer >= 3, got {self.n_xi}")
        if self.xi_spacing not in ("log", "uniform"):
            raise ValueError(f"unknown xi_spacing {self.xi_spacing!r}")
        if not 0.0 < self.xi_floor < 0.5:
            raise ValueError(f"xi_floor must lie in (0, 0.5), got {self.xi_floor}")
        if self.n_w < 3:
            raise ValueError(f"n_w must be >= 3, got {self.n_w}")
        if not self.w_max > 0.0:
            raise ValueError(f"w_max must be positive, got {self.w_max}")
        if self.w_octaves is not None and not self.w_octaves > 0.0:
            raise ValueError(f"w_octaves must be positive, got {self.w_octaves}")
        if self.n_alpha_coarse < 8:
            raise ValueError(f"n_alpha_coarse must be >= 8, got {self.n_alpha_coarse}")
        if not self.alpha_tol > 0.0:
            raise ValueError(f"alpha_tol must be positive, got {self.alpha_tol}")


def xi_nodes(grid: GridSpec) -> np.ndarray:
    """Prior grid on [0, 1] with exact nodes at 0, 1/2 and 1.

    In "log" mode the half grid is [0] + geomspace(xi_floor, 1/2); the upper
    half is its exact mirror, so xi[n-1-i] == 1 - xi[i] for every i.
    """
    half = (grid.n_xi - 1) // 2
    if grid.xi_spacing == "uniform":
        lower = np.linspace(0.0, 0.5, half + 1)
        lower[-1] = 0.5
    else:
        lower = np.concatenate(([0.0], np.geomspace(grid.xi_floor, 0.5, half)))
        lower[-1] = 0.5
    nodes = np.concatenate((lower, 1.0 - lower[-2::-1]))
    nodes[0] = 0.0
    nodes[-1] = 1.0
    return nodes


def w_nodes(grid: GridSpec, n_steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Wealth grid (nodes, log2-nodes), log-spaced with top node exactly w_max."""
    octaves = grid.w_octaves if grid.w_octaves is not None else float(n_steps + 2)
    top = np.log2(grid.w_max)
    lw = np.linspace(top - octaves, top, grid.n_w)
    lw[-1] = top
    return np.exp2(lw), lw


def alpha_candidates(grid: GridSpec, extras: tuple[float, ...] = ()) -> np.ndarray:
    """Sorted, de-duplicated coarse angle candidates over [0, pi).

    `extras` lets a solver guarantee that specific angles (e.g. the
    prior-preserving axis delta/2) are always examined.
    """
    base = np.linspace(0.0, np.pi, grid.n_alpha_coarse, endpoint=False)
    if extras:
        ex = np.mod(np.asarray(extras, dtype=float), np.pi)
        base = np.unique(np.concatenate((base, ex)))
    return base
