"""Placement optimization: LP initialization and successive replacement.

The binary placement problem (select N of N0 candidate positions maximizing
the closed-form expected weighted sum rate) is seeded by a linear program
whose objective is each position's marginal contribution and whose
constraints force LoS coverage of the busiest grids, then refined by a loop
that repeatedly removes the least-damaging subarray and rehomes it to the
best candidate, accepting only strict improvements. Each subarray moves at
most once, so the loop runs at most N iterations.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .lp import SimplexResult, solve_simplex
from .rate import RateModel, SupportState
from .scenario import ScenarioConfig

IMPROVEMENT_EPS = 1e-12


@dataclass
class LpProblem:
    """Relaxed placement initialization problem.

    maximize c^T chi  s.t.  coverage_rows @ chi >= 1, sum(chi) = n_select,
    0 <= chi <= 1. Coverage rows are visibility masks of the busiest grids.
    """

    c: np.ndarray
    coverage_rows: np.ndarray  # (n_rows, N0) binary
    n_select: int
    covered_grids: np.ndarray = field(default_factory=lambda: np.array([], int))


@dataclass
class LpSolution:
    chi: np.ndarray
    objective: float
    penalty_fallback: bool
    result: SimplexResult


@dataclass
class SelectionState:
    """Ordered selected candidates plus the slots already replaced."""

    n_mu: list
    replaced_slots: set
    objective: float


@dataclass
class PlacementResult:
    phi: np.ndarray
    chi: np.ndarray
    n_mu: list
    objective: float
    trace: list
    lp: LpSolution


def build_init_lp(scenario: ScenarioConfig, model: RateModel, xi: np.ndarray) -> LpProblem:
    """Marginal-contribution objective plus LoS coverage of the top-N grids."""
    c = model.marginal_objective()
    rho = scenario.distribution.rho
    n_select = scenario.n_subarrays
    order = np.lexsort((np.arange(len(rho)), -rho))
    top = [k for k in order[:n_select] if rho[k] > 0.0]
    reachable = [k for k in top if xi[k].sum() >= 1]
    coverage = xi[reachable].astype(float) if reachable else np.zeros((0, len(c)))
    return LpProblem(
        c=c,
        coverage_rows=coverage,
        n_select=n_select,
        covered_grids=np.asarray(reachable, int),
    )


def solve_lp(problem: LpProblem) -> LpSolution:
    """Solve the initialization LP; fall back to a penalty form if infeasible."""
    n = len(problem.c)
    n_rows = len(problem.coverage_rows)
    rows = [np.ones(n)]
    rels = ["="]
    rhs = [float(problem.n_select)]
    for row in problem.coverage_rows:
        rows.append(row)
        rels.append(">=")
        rhs.append(1.0)
    res = solve_simplex(problem.c, np.array(rows), rels, np.array(rhs), np.ones(n))
    if res.status == "optimal":
        _check_certificate(res)
        return LpSolution(res.x, res.objective, False, res)
    if res.status != "infeasible":
        raise ConfigurationError(f"initialization LP failed with status {res.status}")

    # Coverage jointly unsatisfiable with sum(chi) = N: penalize violations.
    warnings.warn(
        "coverage constraints infeasible with the subarray budget; "
        "re-solving with penalty objective",
        stacklevel=2,
    )
    weight = 1e3 * float(np.max(np.abs(problem.c), initial=1.0))
    n_ext = n + n_rows
    c_ext = np.concatenate([problem.c, -weight * np.ones(n_rows)])
    rows = [np.concatenate([np.ones(n), np.zeros(n_rows)])]
    rels = ["="]
    rhs = [float(problem.n_select)]
    for j, row in enumerate(problem.coverage_rows):
        ext = np.zeros(n_ext)
        ext[:n] = row
        ext[n + j] = 1.0
        rows.append(ext)
        rels.append(">=")
        rhs.append(1.0)
    res = solve_simplex(c_ext, np.array(rows), rels, np.array(rhs), np.ones(n_ext))
    if res.status != "optimal":
        raise ConfigurationError(f"penalty LP failed with status {res.status}")
    return LpSolution(res.x[:n], float(problem.c @ res.x[:n]), True, res)


def round_top_n(chi_star: np.ndarray, n_select: int) -> list:
    """Indices of the N largest entries, ties broken by lowest index."""
    chi_star = np.asarray(chi_star, float)
    order = np.lexsort((np.arange(len(chi_star)), -chi_star))
    return [int(i) for i in order[:n_select]]


def select_victim(state: SelectionState, support: SupportState) -> int:
    """Slot whose temporary removal costs least (highest remaining objective)."""
    best_slot = -1
    best_value = -np.inf
    for slot in range(len(state.n_mu)):
        if slot in state.replaced_slots:
            continue
        value = support.weighted_sum_without(state.n_mu[slot])
        if value > best_value:
            best_value = value
            best_slot = slot
    if best_slot < 0:
        raise DomainError("all slots already replaced")
    return best_slot


def best_replacement(
    model: RateModel, support: SupportState, state: SelectionState, victim_slot: int
) -> tuple[int, float]:
    """Best candidate for the vacated slot (the old position is admissible).

    Vectorized over all admissible candidates; ties resolve to the lowest
    candidate index.
    """
    old = state.n_mu[victim_slot]
    keep_mean = support.s_mean - model.sig_mean[:, old]
    keep_var = support.s_var - model.sig_var[:, old]
    keep_den = support.s_den - model.denom[:, old]
    gamma = model._sinr_from_sums(
        model.pbar[:, None],
        keep_mean[:, None] + model.sig_mean,
        keep_var[:, None] + model.sig_var,
        keep_den[:, None] + model.denom,
    )
    objectives = model.rho @ np.log2(1.0 + gamma)
    blocked = [c for c in support.support if c != old]
    objectives[blocked] = -np.inf
    best = int(np.argmax(objectives))  # first maximum = lowest index
    return best, float(objectives[best])


def successive_replacement(
    scenario: ScenarioConfig, model: RateModel, xi: np.ndarray
) -> PlacementResult:
    """LP-seeded successive replacement (at most N accepted iterations)."""
    problem = build_init_lp(scenario, model, xi)
    lp_solution = solve_lp(problem)
    n_mu = round_top_n(lp_solution.chi, scenario.n_subarrays)

    support = model.support_state(np.asarray(n_mu, int))
    objective = support.weighted_sum()
    state = SelectionState(n_mu=list(n_mu), replaced_slots=set(), objective=objective)
    trace = [
        {
            "iteration": 0,
            "victim_slot": None,
            "old_candidate": None,
            "new_candidate": None,
            "objective": objective,
            "accepted": True,
        }
    ]

    for iteration in range(1, scenario.n_subarrays + 1):
        victim = select_victim(state, support)
        candidate, cand_objective = best_replacement(model, support, state, victim)
        accepted = cand_objective > state.objective + IMPROVEMENT_EPS
        trace.append(
            {
                "iteration": iteration,
                "victim_slot": victim,
                "old_candidate": state.n_mu[victim],
                "new_candidate": candidate,
                "objective": cand_objective,
                "accepted": accepted,
            }
        )
        if not accepted:
            break
        old = state.n_mu[victim]
        support.remove(old)
        support.add(candidate)
        state.n_mu[victim] = candidate
        state.replaced_slots.add(victim)
        state.objective = cand_objective

    chi = np.zeros(model.n_cols, dtype=np.uint8)
    chi[state.n_mu] = 1
    phi = np.zeros((scenario.n_subarrays, model.n_cols), dtype=np.uint8)
    for slot, cand in enumerate(state.n_mu):
        phi[slot, cand] = 1
    return PlacementResult(
        phi=phi,
        chi=chi,
        n_mu=list(state.n_mu),
        objective=state.objective,
        trace=trace,
        lp=lp_solution,
    )


def exhaustive_search(
    model: RateModel, n_select: int, limit: int = 10_000_000
) -> tuple[np.ndarray, float]:
    """Global optimum over all N-subsets (lexicographically first among ties)."""
    n_cols = model.n_cols
    count = math.comb(n_cols, n_select)
    if count > limit:
        raise ConfigurationError(
            f"exhaustive search over {count} combinations exceeds limit {limit}"
        )
    best_support = None
    best_value = -np.inf
    for combo in itertools.combinations(range(n_cols), n_select):
        cols = np.asarray(combo, int)
        s_mean = model.sig_mean[:, cols].sum(axis=1)
        s_var = model.sig_var[:, cols].sum(axis=1)
        s_den = model.denom[:, cols].sum(axis=1)
        gamma = model._sinr_from_sums(model.pbar, s_mean, s_var, s_den)
        value = float(model.rho @ np.log2(1.0 + gamma))
        if value > best_value:
            best_value = value
            best_support = cols
    chi = np.zeros(n_cols, dtype=np.uint8)
    chi[best_support] = 1
    return chi, best_value
