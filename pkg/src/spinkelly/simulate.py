"""Seeded Monte Carlo simulation of full games under pluggable strategies.

Outcomes are drawn from the TRUE preparation's conditional probability
(cos^2 of the angle to the measurement axis); the mixture probability p_up is
the bettor's epistemic state and only drives decisions.  Run i of a batch
consumes the stream of numpy's PCG64 seeded with base_seed + i, drawing one
uniform for the preparation and one per round, so results are bit-reproducible
across platforms and identical seeds across policies share random numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dp import POLICY_ENUM_MAX_STEPS, evaluate_policy_exact
from .errors import BankruptWealth
from .model import (
    GameParams,
    BetDirection,
    Outcome,
    TrueState,
    branch_updates,
)
from .policies import Policy


@dataclass(frozen=True)
class RoundRecord:
    """One simulated round: decision, outcome, and the resulting state."""

    alpha: float
    fraction: float
    bet_on: BetDirection
    outcome: Outcome
    posterior: float
    wealth: float


@dataclass(frozen=True)
class Trajectory:
    """One full simulated game."""

    run_seed: int
    true_state: TrueState
    rounds: tuple[RoundRecord, ...]
    outcome_string: str

    @property
    def final_wealth(self) -> float:
        return self.rounds[-1].wealth

    @property
    def final_posterior(self) -> float:
        return self.rounds[-1].posterior


@dataclass(frozen=True)
class BatchStats:
    """Aggregates over a seeded batch of independent runs."""

    n_runs: int
    base_seed: int
    policy_name: str
    mean_log2_growth: float
    std_log2_growth: float
    stderr_log2_growth: float
    mean_final_xi_error: float
    run_seeds: np.ndarray
    true_states: np.ndarray  # boolean, True = reference preparation
    log2_growth: np.ndarray
    final_posterior: np.ndarray
    outcome_strings: tuple[str, ...]


@dataclass(frozen=True)
class StrategyRow:
    """One line of a strategy comparison."""

    policy_name: str
    exact_value: float | None
    mc_mean: float
    mc_stderr: float


@dataclass(frozen=True)
class ComparisonTable:
    params: GameParams
    n_runs: int
    base_seed: int
    rows: tuple[StrategyRow, ...]


def _uniforms(base_seed: int, n_runs: int, n_steps: int) -> np.ndarray:
    """Per-run uniform streams: row i comes from PCG64(base_seed + i).

    Column 0 decides the preparation (consumed even when the state is forced,
    keeping the stream alignment identical across forced and free runs);
    columns 1..N decide the outcomes.
    """
    out = np.empty((n_runs, n_steps + 1))
    for i in range(n_runs):
        out[i] = np.random.Generator(np.random.PCG64(base_seed + i)).random(n_steps + 1)
    return out


def _run_batch(
    params: GameParams,
    policy: Policy,
    uniforms: np.ndarray,
    forced_state: TrueState | None,
):
    """Vectorised core: play all runs one round at a time.

    Returns per-round record arrays so a single run and a batch row are the
    same computation (bit for bit).
    """
    policy.check_compatible(params)
    n_runs, cols = uniforms.shape
    n = params.n_steps
    assert cols == n + 1
    if forced_state is None:
        true_ref = uniforms[:, 0] < params.xi0
    else:
        true_ref = np.full(n_runs, forced_state == TrueState.REFERENCE)
    xis = np.full(n_runs, float(params.xi0))
    wealth = np.ones(n_runs)
    rec_alpha = np.empty((n_runs, n))
    rec_frac = np.empty((n_runs, n))
    rec_bet_up = np.empty((n_runs, n), dtype=bool)
    rec_out_up = np.empty((n_runs, n), dtype=bool)
    rec_post = np.empty((n_runs, n))
    rec_wealth = np.empty((n_runs, n))
    for k in range(n):
        alphas = policy.angles(k, xis)
        p_up, _, xi_up, xi_down = branch_updates(xis, alphas, params.delta)
        frac, bet_up = policy.fractions(p_up)
        p_true_up = np.where(
            true_ref,
            np.cos(alphas) ** 2,
            np.cos(params.delta - alphas) ** 2,
        )
        out_up = uniforms[:, 1 + k] < p_true_up
        won = out_up == bet_up
        mult = np.where(won, 1.0 + frac, 1.0 - frac)
        if np.any(mult <= 0.0):
            raise BankruptWealth(
                "a full-stake bet lost; the policy staked everything on an "
                "outcome the true preparation could refute"
            )
        wealth = wealth * mult
        xis = np.where(out_up, xi_up, xi_down)
        rec_alpha[:, k] = alphas
        rec_frac[:, k] = frac
        rec_bet_up[:, k] = bet_up
        rec_out_up[:, k] = out_up
        rec_post[:, k] = xis
        rec_wealth[:, k] = wealth
    return true_ref, rec_alpha, rec_frac, rec_bet_up, rec_out_up, rec_post, rec_wealth


def simulate_run(
    params: GameParams,
    policy: Policy,
    seed: int,
    forced_state: TrueState | None = None,
) -> Trajectory:
    """Simulate one full game; bit-reproducible for a fixed seed."""
    uniforms = _uniforms(seed, 1, params.n_steps)
    true_ref, a, f, bu, ou, post, w = _run_batch(params, policy, uniforms, forced_state)
    rounds = tuple(
        RoundRecord(
            alpha=float(a[0, k]),
            fraction=float(f[0, k]),
            bet_on=BetDirection.UP if bu[0, k] else BetDirection.DOWN,
            outcome=Outcome.UP if ou[0, k] else Outcome.DOWN,
            posterior=float(post[0, k]),
            wealth=float(w[0, k]),
        )
        for k in range(params.n_steps)
    )
    return Trajectory(
        run_seed=seed,
        true_state=TrueState.REFERENCE if true_ref[0] else TrueState.ALTERNATIVE,
        rounds=rounds,
        outcome_string="".join("+" if ou[0, k] else "-" for k in range(params.n_steps)),
    )


def simulate_batch(
    params: GameParams,
    policy: Policy,
    n_runs: int,
    base_seed: int,
    forced_state: TrueState | None = None,
) -> BatchStats:
    """Simulate n_runs independent games with seeds base_seed..base_seed+n_runs-1.

    mean_log2_growth is an unbiased Monte Carlo estimate of the policy's
    exact expected log2 growth; stderr uses the sample standard deviation.
    """
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")
    uniforms = _uniforms(base_seed, n_runs, params.n_steps)
    true_ref, _, _, _, ou, post, w = _run_batch(params, policy, uniforms, forced_state)
    return _stats_from_arrays(params, policy, n_runs, base_seed, true_ref, ou, post, w)


def _stats_from_arrays(params, policy, n_runs, base_seed, true_ref, out_up, post, wealth):
    growth = np.log2(wealth[:, -1])
    final_post = post[:, -1]
    xi_err = np.abs(final_post - true_ref.astype(float))
    std = float(np.std(growth, ddof=1)) if n_runs > 1 else 0.0
    strings = tuple(
        "".join("+" if u else "-" for u in row) for row in out_up
    )
    return BatchStats(
        n_runs=n_runs,
        base_seed=base_seed,
        policy_name=policy.name,
        mean_log2_growth=float(np.mean(growth)),
        std_log2_growth=std,
        stderr_log2_growth=std / float(np.sqrt(n_runs)),
        mean_final_xi_error=float(np.mean(xi_err)),
        run_seeds=np.arange(base_seed, base_seed + n_runs),
        true_states=true_ref,
        log2_growth=growth,
        final_posterior=final_post,
        outcome_strings=strings,
    )


def compare_strategies(
    params: GameParams,
    policies: list[Policy],
    n_runs: int,
    base_seed: int,
) -> ComparisonTable:
    """Compare policies under common random numbers.

    Every policy replays the same per-run uniform streams (variance
    reduction); the exact-value column is filled by outcome-tree enumeration
    whenever N <= 12.
    """
    if len(policies) < 2:
        raise ValueError("need at least two policies to compare")
    uniforms = _uniforms(base_seed, n_runs, params.n_steps)
    rows = []
    for policy in policies:
        true_ref, _, _, _, ou, post, w = _run_batch(params, policy, uniforms, None)
        stats = _stats_from_arrays(params, policy, n_runs, base_seed, true_ref, ou, post, w)
        exact = (
            evaluate_policy_exact(params, policy)
            if params.n_steps <= POLICY_ENUM_MAX_STEPS
            else None
        )
        rows.append(
            StrategyRow(
                policy_name=policy.name,
                exact_value=exact,
                mc_mean=stats.mean_log2_growth,
                mc_stderr=stats.stderr_log2_growth,
            )
        )
    return ComparisonTable(params=params, n_runs=n_runs, base_seed=base_seed, rows=tuple(rows))
