"""Convenience wiring from a scenario to tables, models, and placements."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .benchmarks import fpa_layout
from .channel import ArrayLayout, GainTables, build_gain_tables, compute_layout_stats
from .errors import ConfigurationError
from .optimizer import PlacementResult, exhaustive_search, successive_replacement
from .rate import RateModel
from .scenario import ScenarioConfig, compute_los_visibility

# Above this many table entries, wave vectors are recomputed on demand for
# the active grids instead of being materialized for every (grid, candidate).
WAVE_VECTOR_BUDGET = 4_000_000


@dataclass
class ScenarioContext:
    """Scenario plus everything derived from it that evaluations share."""

    scenario: ScenarioConfig
    candidates: np.ndarray
    grids: np.ndarray
    xi: np.ndarray
    gains: GainTables
    model: RateModel

    @classmethod
    def build(cls, scenario: ScenarioConfig) -> "ScenarioContext":
        candidates = scenario.candidates()
        grids = scenario.grid_centers()
        xi = compute_los_visibility(
            candidates,
            scenario.coverage,
            scenario.obstacles,
            scenario.visibility_samples,
            scenario.rng_seed,
        )
        include_u = grids.shape[0] * candidates.shape[0] <= WAVE_VECTOR_BUDGET
        gains = build_gain_tables(
            scenario, candidates, grids, xi, include_wave_vectors=include_u
        )
        model = RateModel.from_candidate_tables(scenario, gains)
        return cls(scenario, candidates, grids, xi, gains, model)

    def plan(self) -> PlacementResult:
        return successive_replacement(self.scenario, self.model, self.xi)

    def exhaustive(self, limit: int = 10_000_000):
        return exhaustive_search(self.model, self.scenario.n_subarrays, limit)

    def placement_for_scheme(self, scheme: str):
        """Support indices (proposed/optimal) or an ArrayLayout (baselines)."""
        if scheme == "proposed":
            return np.asarray(self.plan().n_mu, int)
        if scheme == "optimal":
            chi, _ = self.exhaustive()
            return np.flatnonzero(chi)
        return fpa_layout(scheme, self.scenario)

    def approx_weighted_sum(self, placement) -> float:
        """Closed-form expected weighted sum rate for a support or layout."""
        if isinstance(placement, ArrayLayout):
            stats = compute_layout_stats(
                self.scenario, placement, grid_indices=self.model.grid_rows
            )
            layout_model = RateModel.from_layout_stats(self.scenario, stats)
            return layout_model.weighted_sum(np.arange(layout_model.n_cols))
        return self.model.weighted_sum(np.asarray(placement, int))

    def weighted_upper_bound(self, placement) -> float:
        if isinstance(placement, ArrayLayout):
            stats = compute_layout_stats(
                self.scenario, placement, grid_indices=self.model.grid_rows
            )
            layout_model = RateModel.from_layout_stats(self.scenario, stats)
            return layout_model.weighted_upper_bound(np.arange(layout_model.n_cols))
        return self.model.weighted_upper_bound(np.asarray(placement, int))


def context_from_document(doc) -> ScenarioContext:
    from .scenario import load_scenario

    scenario = load_scenario(doc)
    if scenario.distribution is None:
        raise ConfigurationError("scenario requires a user distribution")
    return ScenarioContext.build(scenario)
