"""Betting strategies: each maps (step, current posterior) to a measurement angle.

Policies never see the true preparation; they read only the round index and
the bettor's posterior, mirroring the information available in the game.
Stake sizing defaults to the Kelly fraction of the mixture win probability;
ZeroBet overrides it to zero.
"""

from __future__ import annotations

import math

import numpy as np

from .dp import ValueStack, _objective_1d
from .errors import UnsolvablePolicy
from .grids import GridSpec
from .model import (
    ANGLE_EPS,
    GameParams,
    canonical_angle,
    expected_entropy_reduction,
    myopic_growth_angle_vec,
)
from .optimize import optimize_alpha_nodes, polish_stationary_vec


class Policy:
    """Base strategy interface."""

    name = "policy"

    def check_compatible(self, params: GameParams) -> None:
        """Raise UnsolvablePolicy if this policy cannot play `params`."""

    def angles(self, k: int, xis: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def fractions(self, p_up: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Kelly sizing: stake |2p-1| on the likelier outcome."""
        p_up = np.asarray(p_up, dtype=float)
        return np.abs(2.0 * p_up - 1.0), p_up >= 0.5


class OptimalPolicy(Policy):
    """Backward-induction optimum: re-optimises the angle at the exact posterior.

    Re-optimising against the solved continuation curve (rather than
    interpolating the stored angle policy) keeps the decision in the correct
    basin even where the argmax jumps, e.g. across xi = 1/2.
    """

    name = "optimal"

    def __init__(self, stack: ValueStack):
        if not isinstance(stack, ValueStack) or len(stack.curves) < 2:
            raise UnsolvablePolicy("optimal policy needs a solved value stack")
        self.stack = stack

    def check_compatible(self, params: GameParams) -> None:
        sp = self.stack.params
        if sp.delta != params.delta or sp.n_steps != params.n_steps:
            raise UnsolvablePolicy(
                f"value stack solved for delta={sp.delta}, N={sp.n_steps}; "
                f"game has delta={params.delta}, N={params.n_steps}"
            )

    def angles(self, k: int, xis: np.ndarray) -> np.ndarray:
        xis = np.asarray(xis, dtype=float)
        nxt = self.stack[k + 1]
        objective = _objective_1d(xis, nxt.g_values, nxt.xi_nodes, self.stack.params.delta)
        extras = (canonical_angle(self.stack.params.delta / 2.0),)
        alpha, _ = optimize_alpha_nodes(objective, xis.size, self.stack.grid, extras)
        return alpha


class MyopicPolicy(Policy):
    """Maximise the current round's win probability (closed form)."""

    name = "myopic"

    def __init__(self, delta: float):
        self.delta = delta

    def angles(self, k: int, xis: np.ndarray) -> np.ndarray:
        return myopic_growth_angle_vec(np.asarray(xis, dtype=float), self.delta)


class MaxInfoPolicy(Policy):
    """Maximise the expected entropy drop of the posterior each round.

    At a degenerate posterior (0 or 1) no measurement is informative, so the
    policy falls back to the myopic angle there and keeps doubling.
    """

    name = "maxinfo"

    def __init__(self, delta: float, grid: GridSpec | None = None):
        self.delta = delta
        self.grid = grid if grid is not None else GridSpec()

    def angles(self, k: int, xis: np.ndarray) -> np.ndarray:
        xis = np.asarray(xis, dtype=float)
        interior = (xis > ANGLE_EPS) & (xis < 1.0 - ANGLE_EPS)
        safe = np.where(interior, xis, 0.5)

        def objective(alphas: np.ndarray) -> np.ndarray:
            return np.asarray(expected_entropy_reduction(safe, alphas, self.delta))

        alpha, _ = optimize_alpha_nodes(objective, xis.size, self.grid, ())
        spacing = math.pi / self.grid.n_alpha_coarse
        alpha = polish_stationary_vec(objective, alpha, spacing)
        alpha = np.mod(alpha, math.pi)
        fallback = myopic_growth_angle_vec(xis, self.delta)
        return np.where(interior, alpha, fallback)


class FixedAnglePolicy(Policy):
    """Measure along one fixed canonical axis every round; bet Kelly."""

    def __init__(self, alpha: float):
        self.alpha = canonical_angle(alpha)
        self.name = f"fixed:{self.alpha:.6g}"

    def angles(self, k: int, xis: np.ndarray) -> np.ndarray:
        return np.full(np.asarray(xis).size, self.alpha)


class ZeroBetPolicy(MaxInfoPolicy):
    """Never stake anything; measure along the max-information axis.

    Wealth stays constant while the posterior keeps updating, which makes it
    the natural pure-learning baseline.
    """

    name = "zerobet"

    def fractions(self, p_up: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p_up = np.asarray(p_up, dtype=float)
        return np.zeros_like(p_up), np.ones_like(p_up, dtype=bool)


def make_policy(
    name: str,
    params: GameParams,
    grid: GridSpec | None = None,
    stack: ValueStack | None = None,
) -> Policy:
    """Build a policy by name: optimal | myopic | maxinfo | zerobet | fixed:<rad>.

    "optimal" uses the supplied solved stack, or solves one on the spot.
    """
    from .dp import solve_1d  # local import to avoid a cycle at module load

    key = name.strip().lower()
    if key == "optimal":
        if stack is None:
            stack = solve_1d(params, grid)
        policy = OptimalPolicy(stack)
        policy.check_compatible(params)
        return policy
    if key == "myopic":
        return MyopicPolicy(params.delta)
    if key == "maxinfo":
        return MaxInfoPolicy(params.delta, grid)
    if key == "zerobet":
        return ZeroBetPolicy(params.delta, grid)
    if key.startswith("fixed:"):
        return FixedAnglePolicy(float(key.split(":", 1)[1]))
    raise ValueError(f"unknown policy {name!r}")
