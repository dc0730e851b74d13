"""Placement-region and user-distribution geometry.

Discretizes the 2D antenna placement region into candidate positions and the
3D coverage cuboid into user grids, assigns per-grid activation
probabilities, and computes obstacle-induced line-of-sight visibility.

Index conventions (all 0-based in code):
    candidate  idx = iy + iz * n_y          (row-major over y, then z)
    user grid  idx = ix + iy * k_x + iz * k_x * k_y
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .rng import substream

SPEED_OF_LIGHT = 299792458.0


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (np.asarray(dbm) / 10.0)


def mw_to_dbm(mw: float) -> float:
    return 10.0 * np.log10(mw)


# ---------------------------------------------------------------------------
# Region specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MaRegionSpec:
    """Rectangular antenna placement region in the x = 0 plane.

    A degenerate axis (min == max) is allowed only with count 1 and places
    the single coordinate at the common value (1D placement scenarios).
    """

    y_min: float
    y_max: float
    z_min: float
    z_max: float
    n_y: int
    n_z: int

    def __post_init__(self):
        for axis, lo, hi, count in (
            ("y", self.y_min, self.y_max, self.n_y),
            ("z", self.z_min, self.z_max, self.n_z),
        ):
            if count < 1:
                raise ConfigurationError(f"ma_region.n_{axis} must be positive")
            if lo > hi or (lo == hi and count != 1):
                raise ConfigurationError(
                    f"ma_region {axis} bounds invalid: [{lo}, {hi}] with n_{axis}={count}"
                )

    @property
    def n_candidates(self) -> int:
        return self.n_y * self.n_z

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / self.n_y

    @property
    def dz(self) -> float:
        return (self.z_max - self.z_min) / self.n_z


@dataclass(frozen=True)
class CoverageSpec:
    """Cuboid coverage region discretized into k_x * k_y * k_z user grids."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    z_min: float
    z_max: float
    k_x: int
    k_y: int
    k_z: int

    def __post_init__(self):
        if self.x_min <= 0:
            raise ConfigurationError("coverage.x_min must be > 0 (front half-space)")
        for axis, lo, hi, count in (
            ("x", self.x_min, self.x_max, self.k_x),
            ("y", self.y_min, self.y_max, self.k_y),
            ("z", self.z_min, self.z_max, self.k_z),
        ):
            if count < 1:
                raise ConfigurationError(f"coverage.k_{axis} must be positive")
            if lo > hi or (lo == hi and count != 1):
                raise ConfigurationError(
                    f"coverage {axis} bounds invalid: [{lo}, {hi}] with k_{axis}={count}"
                )

    @property
    def n_grids(self) -> int:
        return self.k_x * self.k_y * self.k_z

    @property
    def deltas(self) -> np.ndarray:
        return np.array(
            [
                (self.x_max - self.x_min) / self.k_x,
                (self.y_max - self.y_min) / self.k_y,
                (self.z_max - self.z_min) / self.k_z,
            ]
        )

    def cell_bounds(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(lower, upper) corners of grid cell ``k``; degenerate axes collapse."""
        ix, iy, iz = grid_multi_index(k, self.k_x, self.k_y)
        lo = np.array([self.x_min, self.y_min, self.z_min]) + np.array([ix, iy, iz]) * self.deltas
        return lo, lo + self.deltas


@dataclass(frozen=True)
class Obstacle:
    """Axis-aligned box blocking line-of-sight paths."""

    center: tuple[float, float, float]
    dims: tuple[float, float, float]

    def __post_init__(self):
        if any(d <= 0 for d in self.dims):
            raise ConfigurationError("obstacle dims must be strictly positive")

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.center, float) - np.asarray(self.dims, float) / 2.0

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.center, float) + np.asarray(self.dims, float) / 2.0


# ---------------------------------------------------------------------------
# Index mappings
# ---------------------------------------------------------------------------


def candidate_linear_index(iy: int, iz: int, n_y: int) -> int:
    return iy + iz * n_y


def candidate_multi_index(idx: int, n_y: int) -> tuple[int, int]:
    return idx % n_y, idx // n_y


def grid_linear_index(ix: int, iy: int, iz: int, k_x: int, k_y: int) -> int:
    return ix + iy * k_x + iz * k_x * k_y


def grid_multi_index(idx: int, k_x: int, k_y: int) -> tuple[int, int, int]:
    return idx % k_x, (idx // k_x) % k_y, idx // (k_x * k_y)


# ---------------------------------------------------------------------------
# Grid construction
# ---------------------------------------------------------------------------


def build_candidate_grid(ma: MaRegionSpec) -> np.ndarray:
    """Centers of all candidate placement positions, shape (N0, 3)."""
    iy = np.arange(ma.n_y)
    iz = np.arange(ma.n_z)
    y = ma.y_min + (iy + 0.5) * ma.dy
    z = ma.z_min + (iz + 0.5) * ma.dz
    yy, zz = np.meshgrid(y, z, indexing="xy")  # iz-major rows, iy fastest
    out = np.zeros((ma.n_candidates, 3))
    out[:, 1] = yy.ravel()
    out[:, 2] = zz.ravel()
    return out


def build_user_grid(cov: CoverageSpec) -> np.ndarray:
    """Geometric centers of all user grids, shape (K, 3)."""
    d = cov.deltas
    ix = cov.x_min + (np.arange(cov.k_x) + 0.5) * d[0]
    iy = cov.y_min + (np.arange(cov.k_y) + 0.5) * d[1]
    iz = cov.z_min + (np.arange(cov.k_z) + 0.5) * d[2]
    zz, yy, xx = np.meshgrid(iz, iy, ix, indexing="ij")  # ix fastest
    return np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=1)


# ---------------------------------------------------------------------------
# Activation probabilities
# ---------------------------------------------------------------------------


def assign_probabilities(
    expected_users: float,
    regular_ratio: float,
    k0: np.ndarray,
    k1: np.ndarray,
    k2: np.ndarray,
) -> np.ndarray:
    """Per-grid activation probabilities for regular / hotspot grid sets.

    The hotspot levels are
        rho2 = min(1, 3*Kbar*(1-zeta) / (2|K1| + 3|K2|))
        rho1 = max(2*Kbar*(1-zeta) / (2|K1| + 3|K2|), (Kbar*(1-zeta) - |K2|) / |K1|)
        rho0 = Kbar*zeta / |K0|
    which keep sum(rho) = Kbar whenever the values stay within [0, 1]; a
    configuration whose levels exceed 1 is rejected rather than renormalized.
    """
    k0, k1, k2 = (np.asarray(s, dtype=int) for s in (k0, k1, k2))
    n0, n1, n2 = len(k0), len(k1), len(k2)
    total = n0 + n1 + n2
    combined = np.concatenate([k0, k1, k2])
    if len(np.unique(combined)) != total or combined.min(initial=0) < 0 or (
        total and combined.max() != total - 1
    ):
        raise ConfigurationError("k0/k1/k2 must partition the grid index range")
    zeta = float(regular_ratio)
    if not 0.0 <= zeta <= 1.0:
        raise ConfigurationError("regular_ratio must be within [0, 1]")
    kbar = float(expected_users)
    if kbar < 0 or kbar > total:
        raise ConfigurationError("expected_users must be within [0, K]")

    hot_mass = kbar * (1.0 - zeta)
    denom = 2 * n1 + 3 * n2
    if denom == 0:
        if hot_mass > 1e-12:
            raise ConfigurationError(
                "regular_ratio < 1 requires nonempty hotspot sets (hotspot_k1/hotspot_k2)"
            )
        rho1 = rho2 = 0.0
    else:
        rho2 = min(1.0, 3.0 * hot_mass / denom)
        if n1 > 0:
            rho1 = max(2.0 * hot_mass / denom, (hot_mass - n2) / n1)
        else:
            rho1 = 0.0
            if 3.0 * hot_mass / denom > 1.0:
                raise ConfigurationError(
                    "expected_users too large for hotspot_k2 alone (rho2 clamps at 1)"
                )
    rho0 = kbar * zeta / n0 if n0 > 0 else 0.0
    if n0 == 0 and kbar * zeta > 1e-12:
        raise ConfigurationError("regular_ratio > 0 requires nonempty regular set")

    for name, value in (("rho0", rho0), ("rho1", rho1)):
        if value > 1.0 + 1e-12:
            raise ConfigurationError(
                f"expected_users too large for the grid sets ({name} = {value:.4g} > 1)"
            )

    rho = np.zeros(total)
    rho[k0] = rho0
    rho[k1] = rho1
    rho[k2] = rho2
    return rho


@dataclass(frozen=True)
class UserDistribution:
    """Activation probabilities plus the hotspot structure they came from."""

    rho: np.ndarray
    hotspot_k1: np.ndarray
    hotspot_k2: np.ndarray
    regular_ratio: float
    expected_users: float

    def __post_init__(self):
        rho = np.asarray(self.rho, float)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "hotspot_k1", np.asarray(self.hotspot_k1, int))
        object.__setattr__(self, "hotspot_k2", np.asarray(self.hotspot_k2, int))
        if rho.min(initial=0.0) < 0 or rho.max(initial=0.0) > 1:
            raise ConfigurationError("distribution.rho entries must lie in [0, 1]")
        if abs(rho.sum() - self.expected_users) > 1e-9:
            raise ConfigurationError(
                "sum(rho) != expected_users; clamped probability levels are rejected"
            )

    @classmethod
    def from_sets(
        cls,
        n_grids: int,
        expected_users: float,
        regular_ratio: float,
        hotspot_k1,
        hotspot_k2,
    ) -> "UserDistribution":
        k1 = np.asarray(hotspot_k1, int)
        k2 = np.asarray(hotspot_k2, int)
        hot = set(k1.tolist()) | set(k2.tolist())
        k0 = np.array(sorted(set(range(n_grids)) - hot), dtype=int)
        rho = assign_probabilities(expected_users, regular_ratio, k0, k1, k2)
        return cls(rho, k1, k2, regular_ratio, expected_users)


# ---------------------------------------------------------------------------
# Line-of-sight visibility
# ---------------------------------------------------------------------------


def _segment_box_hits(starts: np.ndarray, ends: np.ndarray, lo, hi) -> np.ndarray:
    """Slab test, broadcast over leading dims; boundary contact counts as a hit."""
    starts = np.asarray(starts, float)
    ends = np.asarray(ends, float)
    d = ends - starts
    shape = d.shape[:-1]
    t_lo = np.zeros(shape)
    t_hi = np.ones(shape)
    inside_all = np.ones(shape, dtype=bool)
    for a in range(3):
        da = d[..., a]
        oa = np.broadcast_to(starts[..., a], shape)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            t0 = (lo[a] - oa) / da
            t1 = (hi[a] - oa) / da
        parallel = da == 0.0
        inside = (oa >= lo[a]) & (oa <= hi[a])
        tmin = np.where(parallel, np.where(inside, -np.inf, np.inf), np.minimum(t0, t1))
        tmax = np.where(parallel, np.where(inside, np.inf, -np.inf), np.maximum(t0, t1))
        t_lo = np.maximum(t_lo, tmin)
        t_hi = np.minimum(t_hi, tmax)
        inside_all &= ~(parallel & ~inside)
    return (t_lo <= t_hi) & inside_all


def segment_intersects_box(p, q, obstacle: Obstacle) -> bool:
    """Whether segment [p, q] touches ``obstacle`` (inclusive boundaries).

    Endpoints are canonicalized (lexicographic order) so the test is exactly
    symmetric in p and q.
    """
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    if tuple(q) < tuple(p):
        p, q = q, p
    return bool(_segment_box_hits(p[None, :], q[None, :], obstacle.lo, obstacle.hi)[0])


def segments_blocked(starts: np.ndarray, ends: np.ndarray, obstacles) -> np.ndarray:
    """Boolean array (broadcast of starts/ends): any obstacle hit per segment."""
    starts = np.asarray(starts, float)
    ends = np.asarray(ends, float)
    shape = np.broadcast_shapes(starts.shape[:-1], ends.shape[:-1])
    blocked = np.zeros(shape, dtype=bool)
    for box in obstacles:
        blocked |= _segment_box_hits(starts, ends, box.lo, box.hi)
    return blocked


def grid_sample_points(
    cov: CoverageSpec, k: int, samples: int, rng_seed: int, purpose: str = "visibility"
) -> np.ndarray:
    """Uniform sample points inside grid cell ``k``, deterministic per (seed, k)."""
    lo, hi = cov.cell_bounds(k)
    rng = substream(rng_seed, purpose, k)
    return lo + rng.random((samples, 3)) * (hi - lo)


def visibility_from_points(
    points: np.ndarray,
    cov: CoverageSpec,
    obstacles,
    samples_per_grid: int,
    rng_seed: int,
    purpose: str = "visibility",
    grid_indices=None,
) -> np.ndarray:
    """LoS visibility table (len(grid_indices), len(points)).

    Entry (k, s) is 1 iff none of the ``samples_per_grid`` points drawn inside
    grid k is blocked from points[s]. Sample points use a per-grid RNG
    substream keyed by the absolute grid index, so results are independent of
    evaluation order and of which grid subset is requested.
    """
    if samples_per_grid < 1:
        raise ConfigurationError("samples_per_grid must be >= 1")
    points = np.atleast_2d(np.asarray(points, float))
    if grid_indices is None:
        grid_indices = range(cov.n_grids)
    grid_indices = list(grid_indices)
    xi = np.ones((len(grid_indices), len(points)), dtype=np.uint8)
    if not obstacles:
        return xi
    for row, k in enumerate(grid_indices):
        targets = grid_sample_points(cov, int(k), samples_per_grid, rng_seed, purpose)
        blocked = segments_blocked(points[:, None, :], targets[None, :, :], obstacles)
        xi[row] = ~blocked.any(axis=1)
    return xi


def compute_los_visibility(
    candidates: np.ndarray,
    cov: CoverageSpec,
    obstacles,
    samples_per_grid: int = 20,
    rng_seed: int = 0,
) -> np.ndarray:
    """Binary LoS table xi[K, N0] between user grids and candidate positions."""
    return visibility_from_points(candidates, cov, obstacles, samples_per_grid, rng_seed)


# ---------------------------------------------------------------------------
# Scenario configuration
# ---------------------------------------------------------------------------


@dataclass
class ScenarioConfig:
    """All physical and system parameters of one scenario.

    Powers are linear milliwatts and the Rician factor is a linear ratio
    (np.inf selects the symbolic pure-LoS mode); dB conversions happen once
    at JSON load time.
    """

    carrier_freq: float
    m_h: int
    m_v: int
    d_h: float
    d_v: float
    n_subarrays: int
    tx_power_mw: np.ndarray
    noise_power_mw: float
    rician_kappa: float
    rng_seed: int
    ma_region: MaRegionSpec
    coverage: CoverageSpec
    obstacles: list = field(default_factory=list)
    distribution: UserDistribution = None
    visibility_samples: int = 20

    def __post_init__(self):
        self.tx_power_mw = np.broadcast_to(
            np.asarray(self.tx_power_mw, float), (self.coverage.n_grids,)
        ).copy()
        self.validate()

    def validate(self):
        if self.carrier_freq <= 0:
            raise ConfigurationError("carrier_freq must be positive")
        if self.m_h < 1 or self.m_v < 1:
            raise ConfigurationError("m_h and m_v must be >= 1")
        if self.d_h <= 0 or self.d_v <= 0:
            raise ConfigurationError("d_h and d_v must be positive")
        n0 = self.ma_region.n_candidates
        if not 1 <= self.n_subarrays <= n0:
            raise ConfigurationError(
                f"n_subarrays must satisfy 1 <= N <= N0 = {n0}, got {self.n_subarrays}"
            )
        if np.any(self.tx_power_mw <= 0):
            raise ConfigurationError("tx_power_mw entries must be strictly positive")
        if self.noise_power_mw <= 0:
            raise ConfigurationError("noise_power_mw must be strictly positive")
        if not (self.rician_kappa > 0):  # rejects NaN and nonpositive
            raise ConfigurationError("rician_kappa must be > 0 or infinite (pure LoS)")
        if self.visibility_samples < 1:
            raise ConfigurationError("visibility_samples must be >= 1")
        # Adjacent placements must not overlap along any axis the subarray moves on.
        extent_y = (self.m_h - 1) * self.d_h
        extent_z = (self.m_v - 1) * self.d_v
        if self.ma_region.n_y > 1 and self.ma_region.dy <= extent_y:
            raise ConfigurationError(
                "ma_region y sampling interval must exceed the subarray horizontal extent"
            )
        if self.ma_region.n_z > 1 and self.ma_region.dz <= extent_z:
            raise ConfigurationError(
                "ma_region z sampling interval must exceed the subarray vertical extent"
            )
        if self.distribution is not None and len(self.distribution.rho) != self.coverage.n_grids:
            raise ConfigurationError("distribution.rho length must equal the grid count K")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def antennas_per_subarray(self) -> int:
        return self.m_h * self.m_v

    @property
    def pure_los(self) -> bool:
        return np.isinf(self.rician_kappa)

    @property
    def snr_scale(self) -> np.ndarray:
        """Per-grid transmit SNR P_k / sigma^2."""
        return self.tx_power_mw / self.noise_power_mw

    def candidates(self) -> np.ndarray:
        return build_candidate_grid(self.ma_region)

    def grid_centers(self) -> np.ndarray:
        return build_user_grid(self.coverage)


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ConfigurationError(f"missing required field '{context}{key}'")
    return mapping[key]


def load_scenario(source) -> ScenarioConfig:
    """Build a ScenarioConfig from a JSON document (path, JSON text, or dict).

    Powers are given in dBm (``tx_power_dbm``, ``noise_power_dbm``) and the
    Rician factor in dB (``rician_kappa_db``) or the string "infinite".
    """
    if isinstance(source, (str, Path)) and Path(source).exists():
        doc = json.loads(Path(source).read_text())
    elif isinstance(source, str):
        doc = json.loads(source)
    else:
        doc = dict(source)

    ma_doc = _require(doc, "ma_region", "")
    ma = MaRegionSpec(
        y_min=_require(ma_doc, "y_min", "ma_region."),
        y_max=_require(ma_doc, "y_max", "ma_region."),
        z_min=_require(ma_doc, "z_min", "ma_region."),
        z_max=_require(ma_doc, "z_max", "ma_region."),
        n_y=_require(ma_doc, "n_y", "ma_region."),
        n_z=_require(ma_doc, "n_z", "ma_region."),
    )
    cov_doc = _require(doc, "coverage", "")
    cov = CoverageSpec(
        x_min=_require(cov_doc, "x_min", "coverage."),
        x_max=_require(cov_doc, "x_max", "coverage."),
        y_min=_require(cov_doc, "y_min", "coverage."),
        y_max=_require(cov_doc, "y_max", "coverage."),
        z_min=_require(cov_doc, "z_min", "coverage."),
        z_max=_require(cov_doc, "z_max", "coverage."),
        k_x=_require(cov_doc, "k_x", "coverage."),
        k_y=_require(cov_doc, "k_y", "coverage."),
        k_z=_require(cov_doc, "k_z", "coverage."),
    )

    freq = float(_require(doc, "carrier_freq", ""))
    wavelength = SPEED_OF_LIGHT / freq
    d_h = float(doc.get("d_h") or wavelength / 2.0)
    d_v = float(doc.get("d_v") or wavelength / 2.0)

    kappa_db = doc.get("rician_kappa_db", "infinite")
    if isinstance(kappa_db, str):
        if kappa_db.lower() not in ("infinite", "inf"):
            raise ConfigurationError(
                f"rician_kappa_db must be a number in dB or 'infinite', got {kappa_db!r}"
            )
        kappa = np.inf
    else:
        kappa = float(10.0 ** (kappa_db / 10.0))

    dist_doc = _require(doc, "distribution", "")
    distribution = UserDistribution.from_sets(
        n_grids=cov.n_grids,
        expected_users=float(_require(dist_doc, "expected_users", "distribution.")),
        regular_ratio=float(dist_doc.get("regular_ratio", 0.0)),
        hotspot_k1=dist_doc.get("hotspot_k1", []),
        hotspot_k2=dist_doc.get("hotspot_k2", []),
    )

    obstacles = [
        Obstacle(center=tuple(o["center"]), dims=tuple(o["dims"]))
        for o in doc.get("obstacles", [])
    ]

    return ScenarioConfig(
        carrier_freq=freq,
        m_h=int(_require(doc, "m_h", "")),
        m_v=int(_require(doc, "m_v", "")),
        d_h=d_h,
        d_v=d_v,
        n_subarrays=int(_require(doc, "n_subarrays", "")),
        tx_power_mw=dbm_to_mw(np.asarray(_require(doc, "tx_power_dbm", ""), float)),
        noise_power_mw=float(dbm_to_mw(_require(doc, "noise_power_dbm", ""))),
        rician_kappa=kappa,
        rng_seed=int(doc.get("rng_seed", 0)),
        ma_region=ma,
        coverage=cov,
        obstacles=obstacles,
        distribution=distribution,
        visibility_samples=int(doc.get("visibility_samples", 20)),
    )
