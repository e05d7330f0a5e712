"""Cut-and-renormalize localization transform on 1-D probability densities.

The transform models a detection whose remaining randomness is parameterized
by eps in (0, 1]: cut the density at the constant level c chosen so the cap
above c holds mass eps, drop everything below, and divide by eps.  As
eps -> 0 the result concentrates at the density's maximum (or maxima: a
symmetric two-peak density keeps both peaks at every eps, while the
slightest height asymmetry makes the lower peak drop out below a positive
collapse threshold).

Input densities never mutate; every transform returns a new grid.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

_MASS_SOLVE_TOL = 1e-12
_RENORM_WARN = 1e-6
_MODE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Nonnegative density sampled on a uniform grid, unit mass.

    ``values[i]`` is the density at ``x0 + i*dx``; the Riemann mass
    ``dx * sum(values)`` is renormalized to 1 at construction (a warning is
    issued when the correction exceeds 1e-6).  The value array is read-only.
    """

    x0: float
    dx: float
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 3:
            raise ValueError("density needs at least 3 grid points")
        dx = float(self.dx)
        if not np.isfinite(dx) or dx <= 0.0:
            raise ValueError(f"grid spacing must be positive, got {dx!r}")
        if not np.isfinite(v).all():
            raise ValueError("density values must be finite")
        if (v < 0.0).any():
            raise ValueError("density values must be nonnegative")
        mass = float(v.sum()) * dx
        if mass <= 0.0:
            raise ValueError("density has zero mass")
        if abs(mass - 1.0) > _RENORM_WARN:
            warnings.warn(
                f"density mass {mass:.9g} renormalized to 1", stacklevel=2
            )
        v /= mass
        v.flags.writeable = False
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_wavefunction(cls, x0: float, dx: float, psi) -> "DensityGrid":
        """Build from complex amplitude samples; the density is |psi|^2."""
        psi = np.asarray(psi, dtype=complex)
        if not np.isfinite(psi).all():
            raise ValueError("wavefunction samples must be finite")
        return cls(x0, dx, np.abs(psi) ** 2)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def positions(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    def mass(self) -> float:
        return float(self.values.sum()) * self.dx


def threshold_for_mass(grid: DensityGrid, eps: float) -> float:
    """Level c >= 0 such that the cap above c has mass eps.

    The cap mass dx * sum(max(values - c, 0)) is continuous, piecewise
    linear, and strictly decreasing in c until the cap vanishes, so the
    bracketing bisection converges to |mass(c) - eps| <= 1e-12.
    """
    eps = float(eps)
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must be in (0, 1], got {eps!r}")
    total = grid.mass()
    if eps > total + _MASS_SOLVE_TOL:
        raise ValueError(f"eps {eps!r} exceeds the total mass {total!r}")
    v, dx = grid.values, grid.dx

    def cap_mass(c: float) -> float:
        return float(np.maximum(v - c, 0.0).sum()) * dx

    lo, hi = 0.0, float(v.max())
    if abs(total - eps) <= _MASS_SOLVE_TOL:
        return 0.0
    best_c, best_err = 0.0, abs(total - eps)
    for _ in range(200):
        c = 0.5 * (lo + hi)
        m = cap_mass(c)
        err = abs(m - eps)
        if err < best_err:
            best_c, best_err = c, err
        if err <= _MASS_SOLVE_TOL:
            return c
        if m > eps:
            lo = c
        else:
            hi = c
        if hi - lo <= np.finfo(float).tiny:
            break
    return best_c


@dataclass(frozen=True)
class CutReport:
    """Result of one cut-and-renormalize transform.

    ``support`` lists the inclusive index ranges where the transformed
    density is positive; ``mass_error`` is the deviation of the raw
    transformed mass from 1 before the grid's own renormalization.
    """

    epsilon: float
    threshold: float
    transformed: DensityGrid
    support: tuple[tuple[int, int], ...]
    mass_error: float

    def to_json_dict(self) -> dict:
        loc = localization(self.transformed)
        return {
            "epsilon": self.epsilon,
            "threshold": self.threshold,
            "mass_error": self.mass_error,
            "support_intervals": [list(r) for r in self.support],
            "n_clusters": len(self.support),
            "modes": list(loc.modes),
            "support_width": loc.support_width,
            "variance": loc.variance,
            "mean": loc.mean,
        }


def _support_runs(mask: np.ndarray) -> tuple[tuple[int, int], ...]:
    """Inclusive index ranges of the True runs; runs are separated by at
    least one False cell."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return ()
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [idx.size - 1]))
    return tuple((int(idx[s]), int(idx[e])) for s, e in zip(starts, ends))


def epsilon_transform(grid: DensityGrid, eps: float) -> CutReport:
    """Cut at the eps-mass level, keep the cap, renormalize by eps.

    eps = 1 cuts at level 0 and returns the density unchanged.  The input
    grid is untouched; the report carries a new grid.
    """
    c = threshold_for_mass(grid, eps)
    raw = np.maximum(grid.values - c, 0.0) / eps
    mass_error = abs(float(raw.sum()) * grid.dx - 1.0)
    transformed = DensityGrid(grid.x0, grid.dx, raw)
    return CutReport(float(eps), c, transformed, _support_runs(raw > 0.0), mass_error)


@dataclass(frozen=True)
class Localization:
    """Where a density sits and how spread out it is."""

    modes: tuple[float, ...]
    support_width: float
    variance: float
    mean: float


def localization(grid: DensityGrid) -> Localization:
    """Modes (grid positions of local maxima tied with the global maximum
    within 1e-12), total support length, variance, and mean."""
    v = grid.values
    peak = float(v.max())
    local = np.empty(v.size, dtype=bool)
    local[0] = v[0] >= v[1]
    local[-1] = v[-1] >= v[-2]
    local[1:-1] = (v[1:-1] >= v[:-2]) & (v[1:-1] >= v[2:])
    modes = grid.positions[local & (v >= peak - _MODE_TOL)]
    x = grid.positions
    mean = float((v * x).sum()) * grid.dx
    var = float((v * (x - mean) ** 2).sum()) * grid.dx
    width = float(np.count_nonzero(v > 0.0)) * grid.dx
    return Localization(tuple(float(m) for m in modes), width, var, mean)


def region_mass(grid: DensityGrid, x_lo: float, x_hi: float) -> float:
    """Mass inside [x_lo, x_hi].

    Each node owns the cell [x - dx/2, x + dx/2]; the region integrates the
    overlapped cell fractions, so masses of adjoining regions add exactly.
    """
    x_lo, x_hi = float(x_lo), float(x_hi)
    if not (np.isfinite(x_lo) and np.isfinite(x_hi)) or x_lo >= x_hi:
        raise ValueError(f"need x_lo < x_hi, got [{x_lo!r}, {x_hi!r}]")
    x = grid.positions
    half = 0.5 * grid.dx
    overlap = np.clip(
        np.minimum(x + half, x_hi) - np.maximum(x - half, x_lo), 0.0, grid.dx
    )
    return float((grid.values * overlap).sum())


# ---------------------------------------------------------------------------
# Fixtures


def gaussian_grid(
    num_points: int = 2001, sigma: float = 1.0, center: float = 0.0, half_span: float = 5.0
) -> DensityGrid:
    """Gaussian bell sampled on ``num_points`` over center +/- half_span."""
    x = np.linspace(center - half_span, center + half_span, num_points)
    v = np.exp(-0.5 * ((x - center) / sigma) ** 2)
    dx = float(x[1] - x[0])
    return DensityGrid(float(x[0]), dx, v / (v.sum() * dx))


def double_slit_grid(
    peak_ratio: float = 1.0,
    num_points: int = 4001,
    separation: float = 4.0,
    slit_half_width: float = 1.0,
) -> DensityGrid:
    """Two raised-cosine humps with exactly zero density between them.

    The left hump (slit 1) is ``peak_ratio`` times taller than the right.
    Compact supports keep the inter-peak gap identically zero, so the two
    clusters stay separable at every cut level.
    """
    if peak_ratio < 1.0:
        raise ValueError(f"peak ratio must be >= 1, got {peak_ratio!r}")
    if separation <= 2.0 * slit_half_width:
        raise ValueError("humps must not touch: separation > 2 * slit_half_width")
    span = separation / 2.0 + 2.0 * slit_half_width
    x = np.linspace(-span, span, num_points)
    v = np.zeros_like(x)
    for center, height in ((-separation / 2.0, peak_ratio), (separation / 2.0, 1.0)):
        inside = np.abs(x - center) <= slit_half_width
        v[inside] += height * np.cos(
            np.pi * (x[inside] - center) / (2.0 * slit_half_width)
        ) ** 2
    dx = float(x[1] - x[0])
    return DensityGrid(float(x[0]), dx, v / (v.sum() * dx))


@dataclass(frozen=True)
class DoubleSlitRow:
    epsilon: float
    n_clusters: int
    cluster_spans: tuple[tuple[float, float], ...]
    taller_survives: bool


@dataclass(frozen=True)
class DoubleSlitReport:
    """Cluster structure of the two-hump density across a cut sequence.

    ``collapse_threshold`` is the cap mass of the taller hump above the
    shorter peak's height: below it the cut level exceeds the shorter peak
    and only the taller cluster survives (0 for equal peaks, growing with
    the height ratio).
    """

    peak_ratio: float
    collapse_threshold: float
    rows: tuple[DoubleSlitRow, ...]

    def to_json_dict(self) -> dict:
        return {
            "peak_ratio": self.peak_ratio,
            "collapse_threshold": self.collapse_threshold,
            "rows": [
                {
                    "epsilon": r.epsilon,
                    "n_clusters": r.n_clusters,
                    "cluster_spans": [list(s) for s in r.cluster_spans],
                    "taller_survives": r.taller_survives,
                }
                for r in self.rows
            ],
        }


def double_slit_scenario(
    peak_ratio: float,
    eps_values,
    num_points: int = 4001,
    separation: float = 4.0,
    slit_half_width: float = 1.0,
) -> DoubleSlitReport:
    """Run the cut transform across ``eps_values`` on the two-hump density."""
    grid = double_slit_grid(peak_ratio, num_points, separation, slit_half_width)
    x = grid.positions
    argmax = float(x[int(grid.values.argmax())])
    shorter_peak = float(grid.values[x > 0.0].max())
    collapse = float(np.maximum(grid.values - shorter_peak, 0.0).sum()) * grid.dx
    rows = []
    for eps in eps_values:
        report = epsilon_transform(grid, float(eps))
        spans = tuple(
            (float(x[i]), float(x[j])) for i, j in report.support
        )
        survives = any(lo <= argmax <= hi for lo, hi in spans)
        rows.append(DoubleSlitRow(float(eps), len(spans), spans, survives))
    return DoubleSlitReport(float(peak_ratio), collapse, tuple(rows))


# ---------------------------------------------------------------------------
# Density file format: two-column CSV (x, value) with uniform spacing.

_SPACING_RTOL = 1e-9


def save_density_csv(grid: DensityGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "value"])
        for x, v in zip(grid.positions, grid.values):
            writer.writerow([format(x, ".17g"), format(v, ".17g")])


def load_density_csv(path) -> DensityGrid:
    """Read a two-column (x, value) CSV; a non-numeric first row is a header.

    The x column must be uniformly spaced to 1e-9 relative tolerance.
    """
    xs, vs = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                x = float(row[0])
            except ValueError:
                if xs:
                    raise ValueError(f"non-numeric row after data start: {row!r}")
                continue  # header
            if len(row) < 2:
                raise ValueError(f"expected two columns, got {row!r}")
            xs.append(x)
            vs.append(float(row[1]))
    if len(xs) < 3:
        raise ValueError("density file needs at least 3 rows")
    x = np.asarray(xs)
    steps = np.diff(x)
    dx = float(steps.mean())
    if dx <= 0.0 or np.abs(steps - dx).max() > _SPACING_RTOL * max(1.0, abs(dx)):
        raise ValueError("x column is not uniformly spaced")
    return DensityGrid(float(x[0]), dx, np.asarray(vs))
