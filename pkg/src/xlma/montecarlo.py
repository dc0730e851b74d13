"""Monte Carlo rate estimation under MRC/MMSE combining, plus map exports.

The weighted-sum estimator draws one full activation vector per trial and
sums the active users' instantaneous rates; its mean is unbiased for
sum_k rho_k * E[rate_k | grid k active] because each activation indicator is
independent of the channel and of the other indicators. Per-trial RNG
substreams make trial t's draw independent of execution order, and per-trial
values are aggregated through numpy's pairwise summation, so parallel or
chunked evaluation reproduces the sequential estimate bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .channel import (
    ArrayLayout,
    compute_layout_stats,
    draw_realization,
    support_layout,
)
from .errors import ConfigurationError, DomainError
from .rng import substream
from .scenario import ScenarioConfig, segments_blocked


@dataclass
class SimOptions:
    trials: int = 1000
    combiner: str = "mrc"
    rng_seed: int | None = None
    force_active_grid: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        if self.combiner not in ("mrc", "mmse"):
            raise ConfigurationError("combiner must be 'mrc' or 'mmse'")


# ---------------------------------------------------------------------------
# Instantaneous SINRs
# ---------------------------------------------------------------------------


def _sinr_all_active(h: np.ndarray, pbar: np.ndarray, combiner: str) -> np.ndarray:
    """Per-user SINRs for the active-column channel matrix h (M x J)."""
    n_ant, n_act = h.shape
    gram = h.conj().T @ h
    norms = np.real(np.diag(gram)).copy()
    if combiner == "mrc":
        cross = (np.abs(gram) ** 2) @ pbar
        interf = cross - pbar * norms**2
        with np.errstate(divide="ignore", invalid="ignore"):
            gamma = pbar * norms**2 / (interf + norms)
        return np.where(norms > 0.0, gamma, 0.0)

    gamma = np.empty(n_act)
    scaled = np.sqrt(pbar)
    for j in range(n_act):
        if norms[j] <= 0.0:
            gamma[j] = 0.0
            continue
        others = np.delete(np.arange(n_act), j)
        if len(others) == 0:
            gamma[j] = pbar[j] * norms[j]
            continue
        if len(others) <= n_ant:
            # Gram-domain Woodbury: gamma = p_j (||h_j||^2 - z^H (I + S)^-1 z).
            s = (scaled[others, None] * scaled[None, others]) * gram[
                np.ix_(others, others)
            ]
            z = scaled[others] * gram[others, j]
            core = np.eye(len(others)) + s
            sol = cho_solve(cho_factor(core, lower=True), z)
            gamma[j] = pbar[j] * max(norms[j] - float(np.real(z.conj() @ sol)), 0.0)
        else:
            a = np.eye(n_ant, dtype=complex) + (
                h[:, others] * pbar[others]
            ) @ h[:, others].conj().T
            sol = cho_solve(cho_factor(a, lower=True), h[:, j])
            gamma[j] = pbar[j] * float(np.real(h[:, j].conj() @ sol))
    return gamma


def mrc_sinr(h: np.ndarray, alpha: np.ndarray, k: int, tx_power_mw, noise_power_mw):
    """MRC SINR of grid k: Pbar_k ||h_k||^4 / (interference + ||h_k||^2)."""
    return _combiner_sinr(h, alpha, k, tx_power_mw, noise_power_mw, "mrc")


def mmse_sinr(h: np.ndarray, alpha: np.ndarray, k: int, tx_power_mw, noise_power_mw):
    """Output SINR of the interference-plus-noise-whitened matched filter."""
    return _combiner_sinr(h, alpha, k, tx_power_mw, noise_power_mw, "mmse")


def _combiner_sinr(h, alpha, k, tx_power_mw, noise_power_mw, combiner):
    alpha = np.asarray(alpha)
    if not alpha[k]:
        raise DomainError("SINR requested for an inactive grid")
    active = np.flatnonzero(alpha)
    pbar = np.broadcast_to(np.asarray(tx_power_mw, float), alpha.shape)[active] / float(
        noise_power_mw
    )
    gammas = _sinr_all_active(np.asarray(h)[:, active], pbar, combiner)
    return float(gammas[int(np.searchsorted(active, k))])


# ---------------------------------------------------------------------------
# Weighted-sum-rate estimation
# ---------------------------------------------------------------------------


def _resolve_layout(scenario: ScenarioConfig, placement) -> ArrayLayout:
    if isinstance(placement, ArrayLayout):
        return placement
    arr = np.asarray(placement)
    n0 = scenario.ma_region.n_candidates
    if arr.dtype == bool or (arr.size == n0 and n0 > 1 and np.isin(arr, (0, 1)).all()):
        support = np.flatnonzero(arr)
    else:
        support = arr.astype(int)
    if support.size == 0:
        raise DomainError("placement support must be nonempty")
    return support_layout(scenario, support)


def simulate_trials(
    scenario: ScenarioConfig, placement, opts: SimOptions
) -> np.ndarray:
    """Per-trial weighted-sum samples (or per-trial conditional rates)."""
    layout = _resolve_layout(scenario, placement)
    rho_all = scenario.distribution.rho
    rows = np.flatnonzero(rho_all > 0.0)
    forced = opts.force_active_grid
    if forced is not None and forced not in rows:
        rows = np.sort(np.append(rows, forced))
    if len(rows) == 0:
        return np.zeros(opts.trials)
    stats = compute_layout_stats(scenario, layout, grid_indices=rows)
    rho_rows = rho_all[rows]
    pbar_rows = scenario.snr_scale[rows]
    forced_row = int(np.searchsorted(rows, forced)) if forced is not None else None
    seed = scenario.rng_seed if opts.rng_seed is None else opts.rng_seed

    values = np.zeros(opts.trials)
    for t in range(opts.trials):
        rng = substream(seed, "mc", t)
        real = draw_realization(stats, rho_rows, rng, force_active_row=forced_row)
        if len(real.columns) == 0:
            continue
        gammas = _sinr_all_active(real.h, pbar_rows[real.columns], opts.combiner)
        rates = np.log2(1.0 + gammas)
        if forced_row is not None:
            values[t] = rates[int(np.searchsorted(real.columns, forced_row))]
        else:
            values[t] = rates.sum()
    return values


def simulate_weighted_sum_rate(
    scenario: ScenarioConfig, placement, opts: SimOptions
) -> tuple[float, float]:
    """(estimate, standard error) of the expected weighted sum rate."""
    values = simulate_trials(scenario, placement, opts)
    estimate = float(np.mean(values))
    if len(values) > 1:
        stderr = float(np.std(values, ddof=1) / np.sqrt(len(values)))
    else:
        stderr = 0.0
    return estimate, stderr


def result_to_json(scenario: ScenarioConfig, opts: SimOptions, estimate: float,
                   stderr: float) -> dict:
    """JSON-ready record of one simulation result."""
    return {
        "estimate": estimate,
        "stderr": stderr,
        "trials": opts.trials,
        "combiner": opts.combiner,
        "seed": scenario.rng_seed if opts.rng_seed is None else opts.rng_seed,
    }


# ---------------------------------------------------------------------------
# Maps
# ---------------------------------------------------------------------------


@dataclass
class MapRequest:
    layout: ArrayLayout
    resolution: int = 50
    probe_point: tuple | None = None
    blocked_placeholder_gain: float | None = None
    z_plane: float | None = None

    def __post_init__(self):
        if self.resolution < 2:
            raise ConfigurationError("map resolution must be >= 2")


def _map_points(scenario: ScenarioConfig, request: MapRequest):
    cov = scenario.coverage
    x = np.linspace(cov.x_min, cov.x_max, request.resolution)
    y = np.linspace(cov.y_min, cov.y_max, request.resolution)
    z = request.z_plane
    if z is None:
        z = 0.5 * (cov.z_min + cov.z_max)
    xx, yy = np.meshgrid(x, y, indexing="ij")
    points = np.stack([xx.ravel(), yy.ravel(), np.full(xx.size, z)], axis=1)
    return x, y, points


def _subarray_visibility(scenario, centers, points) -> np.ndarray:
    """(P, S) LoS indicator from each subarray center to each map point."""
    if not scenario.obstacles:
        return np.ones((len(points), len(centers)), dtype=bool)
    blocked = segments_blocked(
        points[:, None, :], centers[None, :, :], scenario.obstacles
    )
    return ~blocked


def power_gain_map(scenario: ScenarioConfig, request: MapRequest):
    """Expected channel power gain sum_s M_s * beta_total over a z-slice.

    Blocked LoS contributions are replaced by the placeholder gain (map
    rendering convention); the placeholder never enters rate computations.
    Returns (x_axis, y_axis, values[len(x), len(y)]) in linear power units.
    """
    x, y, points = _map_points(scenario, request)
    centers = request.layout.centers()
    m_col = np.array([s.n_antennas for s in request.layout.subarrays])
    dist = np.linalg.norm(points[:, None, :] - centers[None, :, :], axis=-1)
    if np.any(dist == 0.0):
        raise DomainError("map point coincides with a subarray center")
    beta_los = (scenario.wavelength / (4.0 * np.pi * dist)) ** 2
    beta_nlos = np.zeros_like(beta_los) if scenario.pure_los else beta_los / scenario.rician_kappa
    visible = _subarray_visibility(scenario, centers, points)
    placeholder = request.blocked_placeholder_gain
    los_term = np.where(visible, beta_los, 0.0 if placeholder is None else placeholder)
    values = (m_col[None, :] * (los_term + beta_nlos)).sum(axis=1)
    return x, y, values.reshape(len(x), len(y))


def _los_channel_matrix(scenario, layout, points, visible):
    """Deterministic near-field pure-LoS channel rows (one per map point)."""
    lam = scenario.wavelength
    blocks = []
    for s_idx, sub in enumerate(layout.subarrays):
        elems = sub.element_positions()
        dist = np.linalg.norm(points[:, None, :] - elems[None, :, :], axis=-1)
        if np.any(dist == 0.0):
            raise DomainError("map point coincides with an antenna element")
        amp = np.sqrt((lam / (4.0 * np.pi * dist)) ** 2)
        phase = np.exp(-2j * np.pi * dist / lam)
        blocks.append(visible[:, s_idx : s_idx + 1] * amp * phase)
    return np.concatenate(blocks, axis=1)


def correlation_map(scenario: ScenarioConfig, request: MapRequest):
    """|h_hat(p)^H h_hat(p0)|^2 between unit-normalized pure-LoS channels.

    The probe snaps to the nearest map lattice point, so the probe cell's
    value is exactly 1. Returns (x_axis, y_axis, values[len(x), len(y)]).
    """
    if request.probe_point is None:
        raise ConfigurationError("correlation map requires a probe_point")
    x, y, points = _map_points(scenario, request)
    probe = np.asarray(request.probe_point, float)
    if probe.size == 2:
        z = request.z_plane
        if z is None:
            z = 0.5 * (scenario.coverage.z_min + scenario.coverage.z_max)
        probe = np.array([probe[0], probe[1], z])
    probe_idx = int(np.argmin(np.linalg.norm(points - probe[None, :], axis=1)))

    centers = request.layout.centers()
    visible = _subarray_visibility(scenario, centers, points)
    h = _los_channel_matrix(scenario, request.layout, points, visible)
    norms = np.linalg.norm(h, axis=1)
    h_probe = h[probe_idx]
    probe_norm = norms[probe_idx]
    if probe_norm == 0.0:
        raise DomainError("probe point has zero pure-LoS channel (fully blocked)")
    inner = np.abs(h @ h_probe.conj()) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        values = inner / (norms**2 * probe_norm**2)
    values = np.where(norms > 0.0, values, 0.0)
    return x, y, values.reshape(len(x), len(y))
