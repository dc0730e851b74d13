"""Spatially non-stationary channel model.

Per-position wave vectors, planar-array steering vectors, distance-based
LoS/NLoS gains, and sampling of instantaneous channel realizations for an
arbitrary subarray layout. A user sees each individual subarray in its far
field, so plane-wave steering applies per subarray, while gains, angles and
LoS visibility vary across subarray positions (near field of the whole
aperture).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError
from .scenario import ScenarioConfig, visibility_from_points


def wave_vector(t_k: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Unit direction of arrival (t_k - r) / ||t_k - r||."""
    t_k = np.asarray(t_k, float)
    r = np.asarray(r, float)
    diff = t_k - r
    norm = np.linalg.norm(diff)
    if norm == 0.0:
        raise DomainError("wave vector undefined for coincident points")
    return diff / norm


def wave_vectors(targets: np.ndarray, sources: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise unit vectors and distances, shapes (T, S, 3) and (T, S)."""
    targets = np.atleast_2d(np.asarray(targets, float))
    sources = np.atleast_2d(np.asarray(sources, float))
    diff = targets[:, None, :] - sources[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    if np.any(dist == 0.0):
        raise DomainError("coincident target/source positions")
    return diff / dist[..., None], dist


def steering_vector(
    u: np.ndarray, m_h: int, m_v: int, d_h: float, d_v: float, wavelength: float
) -> np.ndarray:
    """UPA response: Kronecker product of vertical and horizontal responses.

    Entry (m_v_idx * m_h + m_h_idx) has phase
    -2*pi/wavelength * (m_v_idx * d_v * u_z + m_h_idx * d_h * u_y);
    every entry has unit magnitude, so ||a||^2 = m_h * m_v exactly.
    """
    if wavelength <= 0:
        raise DomainError("wavelength must be positive")
    u = np.asarray(u, float)
    k = 2.0 * np.pi / wavelength
    a_h = np.exp(-1j * k * d_h * np.arange(m_h) * u[1])
    a_v = np.exp(-1j * k * d_v * np.arange(m_v) * u[2])
    return np.kron(a_v, a_h)


def los_path_gain(distance, wavelength: float):
    """Free-space gain (wavelength / (4 pi d))^2."""
    distance = np.asarray(distance, float)
    if np.any(distance <= 0):
        raise DomainError("distance must be positive")
    return (wavelength / (4.0 * np.pi * distance)) ** 2


# ---------------------------------------------------------------------------
# Gain tables over the candidate grid
# ---------------------------------------------------------------------------


@dataclass
class GainTables:
    """Per (grid, candidate) large-scale channel statistics.

    ``beta_total = xi * beta_los + beta_nlos`` elementwise. Wave vectors are
    optional: at full scale they are recomputed on demand for the active
    grids instead of being materialized for all K x N0 pairs.
    """

    beta_los: np.ndarray
    beta_nlos: np.ndarray
    beta_total: np.ndarray
    xi: np.ndarray
    u: np.ndarray | None = None

    def validate(self, atol: float = 1e-12):
        if self.u is not None:
            norms = np.linalg.norm(self.u, axis=-1)
            if not np.allclose(norms, 1.0, atol=atol):
                raise ConfigurationError("wave vectors must be unit norm")
        recon = self.xi * self.beta_los + self.beta_nlos
        if not np.allclose(recon, self.beta_total, rtol=0, atol=0):
            raise ConfigurationError("beta_total must equal xi*beta_los + beta_nlos")
        if np.any(self.beta_los < 0) or np.any(self.beta_nlos < 0):
            raise ConfigurationError("gains must be nonnegative")


def build_gain_tables(
    scenario: ScenarioConfig,
    candidates: np.ndarray,
    grids: np.ndarray,
    xi: np.ndarray,
    include_wave_vectors: bool = True,
) -> GainTables:
    """LoS/NLoS gain tables for all (grid, candidate) pairs."""
    xi = np.asarray(xi)
    if xi.shape != (len(grids), len(candidates)):
        raise ConfigurationError("xi shape must be (K, N0)")
    u, dist = wave_vectors(grids, candidates)
    beta_los = los_path_gain(dist, scenario.wavelength)
    if scenario.pure_los:
        beta_nlos = np.zeros_like(beta_los)
    else:
        beta_nlos = beta_los / scenario.rician_kappa
    beta_total = xi * beta_los + beta_nlos
    return GainTables(
        beta_los=beta_los,
        beta_nlos=beta_nlos,
        beta_total=beta_total,
        xi=xi.astype(np.uint8),
        u=u if include_wave_vectors else None,
    )


def gains_to_csv(tables: GainTables, path) -> None:
    """Debug dump with columns k, n, xi, beta_los, beta_nlos."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "n", "xi", "beta_los", "beta_nlos"])
        n_grids, n_cand = tables.beta_los.shape
        for k in range(n_grids):
            for n in range(n_cand):
                writer.writerow(
                    [k, n, int(tables.xi[k, n]), repr(tables.beta_los[k, n]),
                     repr(tables.beta_nlos[k, n])]
                )


# ---------------------------------------------------------------------------
# Array layouts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Subarray:
    """One uniform planar subarray moved as a unit; center in meters."""

    center: tuple[float, float, float]
    m_h: int
    m_v: int
    d_h: float
    d_v: float

    @property
    def n_antennas(self) -> int:
        return self.m_h * self.m_v

    def element_positions(self) -> np.ndarray:
        """Element coordinates, grid centered on the subarray center."""
        off_h = (np.arange(self.m_h) - (self.m_h - 1) / 2.0) * self.d_h
        off_v = (np.arange(self.m_v) - (self.m_v - 1) / 2.0) * self.d_v
        pos = np.zeros((self.m_v, self.m_h, 3))
        pos[..., 1] = off_h[None, :]
        pos[..., 2] = off_v[:, None]
        return np.asarray(self.center, float) + pos.reshape(-1, 3)


@dataclass(frozen=True)
class ArrayLayout:
    """A set of subarrays; generalizes candidate placements and FPA baselines."""

    subarrays: tuple

    def __post_init__(self):
        if not self.subarrays:
            raise ConfigurationError("layout must contain at least one subarray")
        object.__setattr__(self, "subarrays", tuple(self.subarrays))

    @property
    def n_subarrays(self) -> int:
        return len(self.subarrays)

    @property
    def total_antennas(self) -> int:
        return sum(s.n_antennas for s in self.subarrays)

    def centers(self) -> np.ndarray:
        return np.array([s.center for s in self.subarrays], float)

    def element_positions(self) -> np.ndarray:
        return np.concatenate([s.element_positions() for s in self.subarrays], axis=0)

    def min_element_spacing(self) -> float:
        pos = self.element_positions()
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(dist, np.inf)
        return float(dist.min())

    def to_json_dict(self) -> dict:
        return {
            "subarrays": [
                {
                    "center": list(map(float, s.center)),
                    "m_h": s.m_h,
                    "m_v": s.m_v,
                    "d_h": s.d_h,
                    "d_v": s.d_v,
                }
                for s in self.subarrays
            ]
        }


def support_layout(scenario: ScenarioConfig, support) -> ArrayLayout:
    """Layout of scenario subarrays placed at the given candidate indices."""
    candidates = scenario.candidates()
    subs = [
        Subarray(
            center=tuple(candidates[idx]),
            m_h=scenario.m_h,
            m_v=scenario.m_v,
            d_h=scenario.d_h,
            d_v=scenario.d_v,
        )
        for idx in support
    ]
    return ArrayLayout(tuple(subs))


# ---------------------------------------------------------------------------
# Per-layout channel statistics and sampling
# ---------------------------------------------------------------------------


@dataclass
class LayoutStats:
    """Deterministic per-(grid, subarray) statistics for one layout.

    Grids are a subset of the scenario's user grids (``grid_indices``); rows
    of every array follow that subset's order. ``los_blocks`` holds the
    stacked per-element LoS response xi * sqrt(beta_los) * a(u) without the
    random phase, so channel draws only add phases and Gaussian noise.
    """

    grid_indices: np.ndarray
    m_col: np.ndarray          # antennas per subarray, shape (S,)
    xi: np.ndarray             # (G, S)
    beta_los: np.ndarray       # (G, S)
    beta_nlos: np.ndarray      # (G, S)
    beta_total: np.ndarray     # (G, S)
    u: np.ndarray              # (G, S, 3)
    geometry: tuple            # (m_h, m_v, d_h, d_v) per subarray
    los_blocks: np.ndarray     # (G, M_total) complex
    nlos_std: np.ndarray       # (G, M_total)
    slices: tuple              # per-subarray (start, stop) into the antenna axis

    @property
    def total_antennas(self) -> int:
        return int(self.m_col.sum())


def compute_layout_stats(
    scenario: ScenarioConfig, layout: ArrayLayout, grid_indices=None
) -> LayoutStats:
    """Gains, visibility and steering blocks for ``layout`` at exact centers."""
    if grid_indices is None:
        grid_indices = np.arange(scenario.coverage.n_grids)
    grid_indices = np.asarray(grid_indices, int)
    grids = scenario.grid_centers()[grid_indices]
    centers = layout.centers()
    u, dist = wave_vectors(grids, centers)
    beta_los = los_path_gain(dist, scenario.wavelength)
    if scenario.pure_los:
        beta_nlos = np.zeros_like(beta_los)
    else:
        beta_nlos = beta_los / scenario.rician_kappa
    xi = visibility_from_points(
        centers,
        scenario.coverage,
        scenario.obstacles,
        scenario.visibility_samples,
        scenario.rng_seed,
        grid_indices=grid_indices,
    )
    beta_total = xi * beta_los + beta_nlos

    m_col = np.array([s.n_antennas for s in layout.subarrays], int)
    stops = np.cumsum(m_col)
    starts = stops - m_col
    slices = tuple((int(a), int(b)) for a, b in zip(starts, stops))

    n_grids = len(grid_indices)
    total = int(m_col.sum())
    los_blocks = np.zeros((n_grids, total), complex)
    nlos_std = np.zeros((n_grids, total))
    for s_idx, sub in enumerate(layout.subarrays):
        a, b = slices[s_idx]
        for g in range(n_grids):
            steer = steering_vector(
                u[g, s_idx], sub.m_h, sub.m_v, sub.d_h, sub.d_v, scenario.wavelength
            )
            los_blocks[g, a:b] = xi[g, s_idx] * np.sqrt(beta_los[g, s_idx]) * steer
        nlos_std[:, a:b] = np.sqrt(beta_nlos[:, s_idx] / 2.0)[:, None]

    geometry = tuple((s.m_h, s.m_v, s.d_h, s.d_v) for s in layout.subarrays)
    return LayoutStats(
        grid_indices=grid_indices,
        m_col=m_col,
        xi=xi,
        beta_los=beta_los,
        beta_nlos=beta_nlos,
        beta_total=beta_total,
        u=u,
        geometry=geometry,
        los_blocks=los_blocks,
        nlos_std=nlos_std,
        slices=slices,
    )


def sample_activation(rho: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Independent Bernoulli activation indicators."""
    rho = np.asarray(rho, float)
    return (rng.random(len(rho)) < rho).astype(np.uint8)


@dataclass
class ChannelRealization:
    """One draw: activation vector and channel columns for the drawn grids.

    ``h`` holds one column per entry of ``columns`` (a subset of grid
    indices); columns for never-sampled grids are omitted.
    """

    alpha: np.ndarray
    columns: np.ndarray
    h: np.ndarray


def draw_realization(
    stats: LayoutStats,
    rho_rows: np.ndarray,
    rng: np.random.Generator,
    force_active_row: int | None = None,
) -> ChannelRealization:
    """One Monte Carlo draw: activation indicators, then channel columns.

    Only the drawn-active rows get channel columns; the draw order (alpha,
    then per-active-grid phases and noise) is fixed for reproducibility.
    """
    alpha = sample_activation(rho_rows, rng)
    if force_active_row is not None:
        alpha[force_active_row] = 1
    active = np.flatnonzero(alpha)
    h = sample_channel(stats, active, rng)
    return ChannelRealization(alpha=alpha, columns=active, h=h)


def sample_channel(
    stats: LayoutStats, rows, rng: np.random.Generator
) -> np.ndarray:
    """Channel matrix (total antennas, len(rows)) for the given stat rows.

    Per subarray and grid the LoS part gets an independent uniform phase and
    the NLoS part i.i.d. circular Gaussian entries with per-entry variance
    beta_nlos. Draw order is fixed (phases, then real, then imaginary
    normals, per grid in the order given), so results are reproducible for a
    given generator state.
    """
    rows = np.asarray(rows, int)
    total = stats.total_antennas
    n_sub = len(stats.m_col)
    h = np.empty((total, len(rows)), complex)
    for j, g in enumerate(rows):
        psi = rng.uniform(0.0, 2.0 * np.pi, n_sub)
        phase = np.repeat(np.exp(-1j * psi), stats.m_col)
        col = stats.los_blocks[g] * phase
        re = rng.standard_normal(total)
        im = rng.standard_normal(total)
        col = col + (re + 1j * im) * stats.nlos_std[g]
        h[:, j] = col
    return h
