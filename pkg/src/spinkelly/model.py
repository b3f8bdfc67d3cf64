"""Per-round mathematics of the spin double-or-nothing betting game.

Two candidate pure spin-1/2 polarisations are separated by an angle delta;
the prior weight xi sits on the reference state at angle 0.  A projective
measurement along a freely chosen axis alpha yields spin-up with probability

    p_up(xi, alpha, delta) = xi*cos^2(alpha) + (1-xi)*cos^2(delta-alpha),

the prior is updated by Bayes' rule on the outcome, and a double-or-nothing
wager is sized by the Kelly fraction |2*p_up - 1|.  Everything in this module
is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    BankruptWealth,
    DegenerateDelta,
    DegeneratePrior,
    UndefinedFormula,
    ZeroProbabilityOutcome,
)
from .grids import GridSpec
from .optimize import optimize_alpha

PROB_EPS = 1e-15
ANGLE_EPS = 1e-12
LN2 = math.log(2.0)


def canonical_angle(alpha: float) -> float:
    """Map any finite angle into [0, pi) by mod-pi reduction.

    A projective measurement axis at alpha and alpha+pi is the same axis with
    the outcome labels swapped; bet direction is tracked separately, so the
    canonical representative is enough.
    """
    if not math.isfinite(alpha):
        raise ValueError(f"angle must be finite, got {alpha}")
    a = math.fmod(alpha, math.pi)
    if a < 0.0:
        a += math.pi
    if a >= math.pi:  # fmod rounding can land exactly on pi
        a = 0.0
    return a


class BetDirection(str, Enum):
    UP = "up"
    DOWN = "down"


class Outcome(str, Enum):
    UP = "up"
    DOWN = "down"


class TrueState(str, Enum):
    """Hidden preparation of the whole particle stream."""

    REFERENCE = "reference"  # polarisation angle 0, prior weight xi
    ALTERNATIVE = "alternative"  # polarisation angle delta, prior weight 1 - xi


@dataclass(frozen=True)
class GameParams:
    """Problem instance: separation angle, number of rounds, initial prior.

    delta = 0 is accepted as a documented degenerate case (identical states:
    posteriors never move and optimal play doubles wealth every round).
    """

    delta: float
    n_steps: int
    xi0: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and 0.0 <= self.delta <= math.pi / 2):
            raise ValueError(f"delta must lie in [0, pi/2], got {self.delta}")
        if not (isinstance(self.n_steps, int) and self.n_steps >= 1):
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")
        if not (math.isfinite(self.xi0) and 0.0 <= self.xi0 <= 1.0):
            raise ValueError(f"xi0 must lie in [0, 1], got {self.xi0}")


@dataclass(frozen=True)
class RoundDecision:
    """One round's action: measurement axis, stake fraction, bet direction."""

    alpha: float
    fraction: float
    bet_on: BetDirection

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError(f"fraction must lie in [0, 1], got {self.fraction}")


def spin_up_prob(xi, alpha, delta):
    """Probability of a spin-up outcome under the prior mixture.

    Accepts scalars or numpy arrays; the result is clamped into [0, 1] to
    guard cos^2 round-off.
    """
    p = xi * np.cos(alpha) ** 2 + (1.0 - xi) * np.cos(delta - alpha) ** 2
    return np.clip(p, 0.0, 1.0)


def branch_updates(xi, alpha, delta):
    """All per-measurement quantities at once: (p_up, p_down, xi_up, xi_down).

    Posteriors for an (essentially) impossible branch are returned as the
    current prior; callers weight them by a probability below PROB_EPS anyway.
    Vectorises over numpy array inputs.
    """
    c = np.cos(alpha) ** 2
    cd = np.cos(delta - alpha) ** 2
    up_ref = xi * c
    up_alt = (1.0 - xi) * cd
    p_up = np.clip(up_ref + up_alt, 0.0, 1.0)
    p_down = 1.0 - p_up
    s = np.sin(alpha) ** 2
    sd = np.sin(delta - alpha) ** 2
    dn_ref = xi * s
    dn_alt = (1.0 - xi) * sd
    dn_tot = dn_ref + dn_alt
    up_den = np.where(p_up > PROB_EPS, p_up, 1.0)
    dn_den = np.where(dn_tot > PROB_EPS, dn_tot, 1.0)
    xi_up = np.clip(np.where(p_up > PROB_EPS, up_ref / up_den, xi), 0.0, 1.0)
    xi_down = np.clip(np.where(dn_tot > PROB_EPS, dn_ref / dn_den, xi), 0.0, 1.0)
    return p_up, p_down, xi_up, xi_down


def posterior(xi: float, alpha: float, delta: float, outcome: Outcome) -> float:
    """Bayes posterior of the reference state after observing `outcome`.

    Satisfies the martingale identity
    p_up * posterior(up) + p_down * posterior(down) == xi.

    Raises
    ------
    ZeroProbabilityOutcome
        If the conditioning outcome has probability below PROB_EPS.
    """
    p_up, p_down, xi_up, xi_down = branch_updates(float(xi), float(alpha), float(delta))
    if outcome == Outcome.UP:
        if p_up <= PROB_EPS:
            raise ZeroProbabilityOutcome(
                f"spin-up has probability {p_up:g} at xi={xi}, alpha={alpha}, delta={delta}"
            )
        return float(xi_up)
    if p_down <= PROB_EPS:
        raise ZeroProbabilityOutcome(
            f"spin-down has probability {p_down:g} at xi={xi}, alpha={alpha}, delta={delta}"
        )
    return float(xi_down)


def kelly_decision(p_up: float) -> tuple[float, BetDirection]:
    """Kelly stake for a double-or-nothing bet with up-probability p_up.

    Bets 2*p_up - 1 on up when p_up >= 1/2; otherwise the same-size stake is
    placed on the down outcome (equivalent to rotating the axis by pi/2, but
    keeps the posterior bookkeeping single-branched).
    """
    if not 0.0 <= p_up <= 1.0:
        raise ValueError(f"p_up must lie in [0, 1], got {p_up}")
    if p_up >= 0.5:
        return 2.0 * p_up - 1.0, BetDirection.UP
    return 1.0 - 2.0 * p_up, BetDirection.DOWN


def apply_bet(w: float, decision: RoundDecision, outcome: Outcome) -> float:
    """Settle one wager: w*(1+f) when the outcome matches the bet, else w*(1-f).

    Raises
    ------
    BankruptWealth
        If the result would be zero (full stake lost) -- a policy bug, since
        Kelly only stakes everything on a certain outcome.
    """
    if not w > 0.0:
        raise ValueError(f"wealth must be positive, got {w}")
    f = decision.fraction
    won = outcome.value == decision.bet_on.value
    result = w * (1.0 + f) if won else w * (1.0 - f)
    if result <= 0.0:
        raise BankruptWealth(
            f"full-stake bet lost: w={w}, fraction={f}, bet_on={decision.bet_on.value}"
        )
    return result


def _xlog2(v):
    """v * log2(v) with the 0*log(0) = 0 convention; vectorises."""
    v = np.asarray(v, dtype=float)
    safe = np.where(v > 0.0, v, 1.0)
    return np.where(v > 0.0, v * np.log2(safe), 0.0)


def binary_entropy(x):
    """Shannon entropy of a Bernoulli(x) in bits."""
    return -(_xlog2(x) + _xlog2(1.0 - np.asarray(x, dtype=float)))


def one_step_growth(p_up):
    """Expected log2 wealth growth of one round under the Kelly fraction.

    Equals 1 - H2(p_up); symmetric in p_up <-> 1 - p_up because the losing
    direction is simply bet the other way.  Vectorises.
    """
    p = np.asarray(p_up, dtype=float)
    return 1.0 + _xlog2(p) + _xlog2(1.0 - p)


def myopic_growth_angle_roots(xi: float, delta: float) -> tuple[float, float]:
    """Both stationary angles of p_up(xi, . , delta) in closed form.

    Solves tan^2(a)*sin(d)*cos(d) + tan(a)*(xi/(1-xi) + 1 - 2 sin^2 d)
    - sin(d)*cos(d) = 0.  The two roots multiply to -1, which gives a
    cancellation-free evaluation for large |A|.

    Raises
    ------
    DegenerateDelta
        If sin(delta)*cos(delta) vanishes (delta ~ 0 or pi/2) or xi ~ 1,
        where the quadratic degenerates.
    """
    sc = math.sin(delta) * math.cos(delta)
    if abs(sc) <= ANGLE_EPS:
        raise DegenerateDelta(f"sin(delta)*cos(delta) ~ 0 at delta={delta}")
    if xi >= 1.0 - ANGLE_EPS:
        raise DegenerateDelta(f"xi/(1-xi) diverges at xi={xi}")
    a_coef = (xi / (1.0 - xi) + 1.0 - 2.0 * math.sin(delta) ** 2) / sc
    r = (abs(a_coef) + math.sqrt(a_coef * a_coef + 4.0)) / 2.0
    if a_coef >= 0.0:
        t_plus, t_minus = 1.0 / r, -r
    else:
        t_plus, t_minus = r, -1.0 / r
    return canonical_angle(math.atan(t_plus)), canonical_angle(math.atan(t_minus))


def myopic_growth_angle(xi: float, delta: float, grid: GridSpec | None = None) -> float:
    """Angle maximising the current round's win probability.

    Uses the closed-form stationary angles and returns the one with the larger
    p_up (ties break to the smaller angle).  Degenerate cases are handled
    explicitly: xi=1 -> 0, xi=0 -> delta, delta=0 -> 0, and delta=pi/2 falls
    back to the numerical maximiser because the closed form loses its
    denominator there.
    """
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must lie in [0, 1], got {xi}")
    if delta <= ANGLE_EPS:
        return 0.0
    if xi >= 1.0 - ANGLE_EPS:
        return 0.0
    if xi <= ANGLE_EPS:
        return canonical_angle(delta)
    try:
        a1, a2 = myopic_growth_angle_roots(xi, delta)
    except DegenerateDelta:
        alpha, _ = optimize_alpha(lambda a: float(spin_up_prob(xi, a, delta)), grid)
        return alpha
    p1 = float(spin_up_prob(xi, a1, delta))
    p2 = float(spin_up_prob(xi, a2, delta))
    if p1 > p2:
        return a1
    if p2 > p1:
        return a2
    return min(a1, a2)


def myopic_growth_angle_vec(xi, delta: float) -> np.ndarray:
    """Vectorised myopic angle over an array of priors (delta fixed).

    Matches `myopic_growth_angle` away from delta ~ 0 or pi/2; at those
    degenerate separations the per-prior answer is 0 / the grid tie-break,
    handled with explicit branches.
    """
    xi = np.asarray(xi, dtype=float)
    if delta <= ANGLE_EPS:
        return np.zeros_like(xi)
    sc = math.sin(delta) * math.cos(delta)
    if abs(sc) <= ANGLE_EPS:  # delta ~ pi/2: align with the likelier state
        return np.where(xi >= 0.5, 0.0, canonical_angle(delta))
    safe = np.clip(xi, ANGLE_EPS, 1.0 - ANGLE_EPS)
    a_coef = (safe / (1.0 - safe) + 1.0 - 2.0 * math.sin(delta) ** 2) / sc
    r = (np.abs(a_coef) + np.sqrt(a_coef * a_coef + 4.0)) / 2.0
    t_plus = np.where(a_coef >= 0.0, 1.0 / r, r)
    t_minus = np.where(a_coef >= 0.0, -r, -1.0 / r)
    a1 = np.mod(np.arctan(t_plus), math.pi)
    a2 = np.mod(np.arctan(t_minus), math.pi)
    p1 = spin_up_prob(xi, a1, delta)
    p2 = spin_up_prob(xi, a2, delta)
    alpha = np.where(p1 >= p2, a1, a2)
    alpha = np.where(xi >= 1.0 - ANGLE_EPS, 0.0, alpha)
    alpha = np.where(xi <= ANGLE_EPS, canonical_angle(delta), alpha)
    return alpha


def info_gain_angle_formula(xi: float, delta: float) -> float:
    """Verbatim closed-form information-gain angle, canonicalised to [0, pi).

    Transcribes atan((xi-1)*sin(delta) / (xi - (1-xi)*cos(delta))) exactly as
    printed and makes no optimality claim; compare against
    `info_gain_angle_numeric`, which maximises the expected entropy drop.

    Raises
    ------
    UndefinedFormula
        If the denominator vanishes within 1e-12 (no limit is assumed).
    """
    num = (xi - 1.0) * math.sin(delta)
    den = xi - (1.0 - xi) * math.cos(delta)
    if abs(den) <= ANGLE_EPS:
        raise UndefinedFormula(
            f"denominator xi - (1-xi)cos(delta) = {den:g} at xi={xi}, delta={delta}"
        )
    return canonical_angle(math.atan(num / den))


def expected_entropy_reduction(xi, alpha, delta):
    """Expected drop of the prior's Shannon entropy from one measurement.

    H2(xi) - [p_up H2(xi_up) + p_down H2(xi_down)]; non-negative (to round-off)
    by concavity of H2 and the martingale identity.  Vectorises.
    """
    p_up, p_down, xi_up, xi_down = branch_updates(xi, alpha, delta)
    return binary_entropy(xi) - (p_up * binary_entropy(xi_up) + p_down * binary_entropy(xi_down))


def _polish_stationary(fun, x0: float, half_width: float, diff_step: float = 1e-6) -> float:
    """Bisect the sign of a central-difference slope around a located maximum.

    Golden-section refinement of a smooth maximum stalls near sqrt(eps) in the
    abscissa because function values become indistinguishable; the slope sign
    keeps full resolution, so bisection recovers the stationary point to
    ~1e-12.  Falls back to x0 if the slope does not change sign in the
    bracket (boundary or flat objective).
    """

    def slope(x: float) -> float:
        return fun(x + diff_step) - fun(x - diff_step)

    lo, hi = x0 - half_width, x0 + half_width
    s_lo, s_hi = slope(lo), slope(hi)
    if not (s_lo > 0.0 > s_hi):
        return x0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        s_mid = slope(mid)
        if s_mid > 0.0:
            lo = mid
        elif s_mid < 0.0:
            hi = mid
        else:
            return mid
    return 0.5 * (lo + hi)


def info_gain_angle_numeric(xi: float, delta: float, grid: GridSpec | None = None) -> float:
    """Numerical argmax of the expected entropy reduction over alpha in [0, pi).

    Coarse scan plus golden-section refinement, then a slope-sign bisection
    polish that pins the stationary point well below the 1e-8 noise floor of
    value-only refinement.

    Raises
    ------
    DegeneratePrior
        If xi is 0 or 1 within 1e-12; certainty cannot be refined, so every
        angle is equally uninformative.
    """
    if xi <= ANGLE_EPS or xi >= 1.0 - ANGLE_EPS:
        raise DegeneratePrior(f"no informative measurement at xi={xi}")

    def objective(a: float) -> float:
        return float(expected_entropy_reduction(xi, a, delta))

    alpha, _ = optimize_alpha(objective, grid)
    spacing = math.pi / (grid.n_alpha_coarse if grid is not None else GridSpec().n_alpha_coarse)
    polished = _polish_stationary(lambda a: objective(a % math.pi), alpha, spacing)
    return canonical_angle(polished)


def st_petersburg_log_value(n_terms: int) -> float:
    """Partial sum of the classical log-utility coin-game value.

    sum_{i=1..n} 2^-i * log(2^i), monotone increasing toward log(4); the
    certainty equivalent of the full game is therefore exp(log 4) = 4 units.
    """
    if not (isinstance(n_terms, int) and n_terms >= 1):
        raise ValueError(f"n_terms must be a positive integer, got {n_terms}")
    i = np.arange(1, n_terms + 1, dtype=float)
    return float(np.sum(np.exp2(-i) * i) * LN2)
