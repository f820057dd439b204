"""Far-field computation over a (theta, phi) grid.

Both illumination models reduce to a weighted array factor: a per-cell
complex weight (state coefficient times a configuration-independent source
factor) summed against per-grid-point steering phases, then scaled by the
cell's re-radiation envelope.  The weight/steering split keeps the heavy
trigonometry independent of the configuration, so sweeping thousands of
configurations against one surface reuses the precomputed phase tables.

Only the front hemisphere (theta <= 90 deg) is ever computed; the back
hemisphere is identically zero for a reflective surface over a ground
plane.  Summation over cells is row-major (n within m) so repeated
evaluations are reproducible bit for bit within one build.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    AllZeroField,
    ConfigMismatch,
    DomainError,
    GridMissingPlane,
    IoError,
    NonPositiveParam,
    SourceBelowSurface,
)
from .surface import ConfigMatrix, SurfaceSpec, validate_config


@dataclass(frozen=True)
class SourceModel:
    """Illumination: a near-field point source or a far-field planewave."""

    kind: str  # "point" | "planewave"
    amplitude: float = 1.0
    position_m: tuple[float, float, float] | None = None
    incidence_deg: tuple[float, float] = (0.0, 0.0)  # (theta_inc, phi_inc)

    def __post_init__(self):
        if self.kind not in ("point", "planewave"):
            raise ConfigMismatch(f"unknown source kind {self.kind!r}")
        if self.amplitude <= 0:
            raise NonPositiveParam(f"source amplitude must be positive, got {self.amplitude}")
        if self.kind == "point":
            if self.position_m is None:
                raise ConfigMismatch("point source requires a position")
            if self.position_m[2] <= 0:
                raise SourceBelowSurface(
                    f"point source must sit above the surface, got z = {self.position_m[2]}"
                )

    @staticmethod
    def planewave(amplitude: float = 1.0, theta_inc_deg: float = 0.0,
                  phi_inc_deg: float = 0.0) -> "SourceModel":
        return SourceModel(kind="planewave", amplitude=amplitude,
                           incidence_deg=(theta_inc_deg, phi_inc_deg))

    @staticmethod
    def point(position_m: tuple[float, float, float], amplitude: float = 1.0) -> "SourceModel":
        return SourceModel(kind="point", amplitude=amplitude, position_m=tuple(position_m))


@dataclass(frozen=True)
class GridSpec:
    """Angular sampling: theta in [0, 180), phi in [0, 360), fixed steps."""

    theta_step_deg: float = 1.0
    phi_step_deg: float = 1.0

    def __post_init__(self):
        for span, step, name in ((180.0, self.theta_step_deg, "theta"),
                                 (360.0, self.phi_step_deg, "phi")):
            if step <= 0:
                raise NonPositiveParam(f"{name} step must be positive, got {step}")
            if abs(span / step - round(span / step)) > 1e-9:
                raise ConfigMismatch(f"{name} step {step} must divide {span} degrees")

    def theta_deg(self) -> np.ndarray:
        return np.arange(round(180.0 / self.theta_step_deg)) * self.theta_step_deg

    def phi_deg(self) -> np.ndarray:
        return np.arange(round(360.0 / self.phi_step_deg)) * self.phi_step_deg

    @property
    def n_points(self) -> int:
        return round(180.0 / self.theta_step_deg) * round(360.0 / self.phi_step_deg)


@dataclass(frozen=True)
class FieldGrid:
    """Complex E over the grid; values[i, j] at (theta_i, phi_j)."""

    values: np.ndarray
    grid: GridSpec
    wavelength_m: float = math.nan

    def __post_init__(self):
        self.values.setflags(write=False)
        if not np.all(np.isfinite(self.values)):
            raise DomainError("field contains non-finite values")

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True)
class PrincipalCut:
    """|E| along the phi = 0 / phi = 180 cut, on a signed elevation axis."""

    signed_theta_deg: np.ndarray
    magnitude: np.ndarray

    def __post_init__(self):
        self.signed_theta_deg.setflags(write=False)
        self.magnitude.setflags(write=False)


def radiation_factor(q: float, theta_rad) -> np.ndarray | float:
    """Cell envelope cos(theta)**(1/q) on the front hemisphere, 0 behind."""
    if q <= 0:
        raise NonPositiveParam(f"q must be positive, got {q}")
    c = np.cos(theta_rad)
    return np.where(c > 0.0, np.power(np.clip(c, 0.0, None), 1.0 / q), 0.0)


def state_coefficients(surface: SurfaceSpec) -> np.ndarray:
    """Complex reflection coefficient per diode state (degrees -> radians here)."""
    mags = np.array([s.gamma_mag for s in surface.cell.states])
    phases = np.radians([s.gamma_phase_deg for s in surface.cell.states])
    return mags * np.exp(1j * phases)


class FieldEvaluator:
    """Reusable far-field evaluator for one (surface, source, grid) triple.

    ``field(config)`` is a pure function of the configuration; everything
    that does not depend on the configuration (steering-phase tables, the
    source factor per cell, the theta envelope) is precomputed once.
    """

    def __init__(self, surface: SurfaceSpec, src: SourceModel, grid: GridSpec):
        self.surface = surface
        self.src = src
        self.grid = grid
        self.wavelength_m = surface.cell.wavelength_m
        k = 2.0 * math.pi / self.wavelength_m

        theta = np.radians(grid.theta_deg())
        phi = np.radians(grid.phi_deg())
        self._n_theta = theta.size
        self._n_phi = phi.size
        front = grid.theta_deg() <= 90.0
        self._n_front = int(front.sum())
        th = theta[front]

        # Direction cosines of every front-hemisphere grid point, flattened
        # theta-major to match the serialized row order.
        sin_t = np.sin(th)[:, None]
        u = (sin_t * np.cos(phi)[None, :]).ravel()
        v = (sin_t * np.sin(phi)[None, :]).ravel()

        x = surface.cell_x()
        y = surface.cell_y()
        self._steer_x = np.exp(1j * k * x[:, None] * u[None, :])  # (N, Lf)

        q = surface.cell.q_exponent
        if src.kind == "planewave":
            ti, pi_ = np.radians(src.incidence_deg)
            # Incident phase advance across the aperture; zero at normal incidence.
            inc = k * (x[None, :] * math.sin(ti) * math.cos(pi_)
                       + y[:, None] * math.sin(ti) * math.sin(pi_))
            self._cell_factor = np.exp(1j * inc)
            # Incident-side response at the incidence angle times the
            # re-radiation response toward the observer.  This is the exact
            # far-source limit of the point-source model, which the two
            # engines are required to share.
            env = src.amplitude * float(radiation_factor(q, ti)) * radiation_factor(q, th)
        else:
            px, py, pz = src.position_m
            dx = px - x[None, :]
            dy = py - y[:, None]
            r = np.sqrt(dx * dx + dy * dy + pz * pz)
            cos_inc = pz / r
            f_inc = np.power(np.clip(cos_inc, 0.0, None), 1.0 / q)
            self._cell_factor = (src.amplitude / r) * np.exp(-1j * k * r) * f_inc
            env = radiation_factor(q, th)

        env_flat = np.repeat(env, self._n_phi)
        self._steer_y_env = np.exp(1j * k * y[:, None] * v[None, :]) * env_flat[None, :]
        self._state_coeffs = state_coefficients(surface)

    def field(self, config: ConfigMatrix) -> FieldGrid:
        """Complex far-field of one configuration."""
        validate_config(self.surface, config)
        weights = self._state_coeffs[config.states] * self._cell_factor
        partial = weights @ self._steer_x          # (M, Lf), sums over n
        partial *= self._steer_y_env
        front = np.add.reduce(partial, axis=0)     # sums over m
        values = np.zeros((self._n_theta, self._n_phi), dtype=complex)
        values[: self._n_front] = front.reshape(self._n_front, self._n_phi)
        return FieldGrid(values=values, grid=self.grid, wavelength_m=self.wavelength_m)


def field_planewave(surface: SurfaceSpec, config: ConfigMatrix, src: SourceModel,
                    grid: GridSpec | None = None) -> FieldGrid:
    """Far-field under planewave illumination."""
    if src.kind != "planewave":
        raise ConfigMismatch(f"expected a planewave source, got {src.kind!r}")
    return FieldEvaluator(surface, src, grid or GridSpec()).field(config)


def field_point_source(surface: SurfaceSpec, config: ConfigMatrix, src: SourceModel,
                       grid: GridSpec | None = None) -> FieldGrid:
    """Far-field under spherical-wavefront illumination from a point source."""
    if src.kind != "point":
        raise ConfigMismatch(f"expected a point source, got {src.kind!r}")
    return FieldEvaluator(surface, src, grid or GridSpec()).field(config)


def _column_index(grid: GridSpec, phi_value: float) -> int:
    phi = grid.phi_deg()
    hits = np.nonzero(np.abs(phi - phi_value) < 1e-9)[0]
    if hits.size == 0:
        raise GridMissingPlane(f"grid has no phi = {phi_value} column")
    return int(hits[0])


def principal_cut(gridval: FieldGrid) -> PrincipalCut:
    """Signed elevation cut: +theta from phi = 0, -theta from phi = 180."""
    col0 = _column_index(gridval.grid, 0.0)
    col180 = _column_index(gridval.grid, 180.0)
    step = gridval.grid.theta_step_deg
    k_max = int(math.floor(90.0 / step + 1e-9))
    mags = gridval.magnitude()
    pos = mags[: k_max + 1, col0]
    neg = mags[k_max:0:-1, col180]
    signed = np.concatenate([-np.arange(k_max, 0, -1), np.arange(0, k_max + 1)]) * step
    return PrincipalCut(signed_theta_deg=signed.astype(float),
                        magnitude=np.concatenate([neg, pos]))


def normalize_grid(gridval: FieldGrid) -> FieldGrid:
    """Scale so the peak magnitude is exactly 1; phases are untouched."""
    peak = float(np.max(np.abs(gridval.values)))
    if peak == 0.0:
        raise AllZeroField("cannot normalize an identically zero field")
    return FieldGrid(values=gridval.values / peak, grid=gridval.grid,
                     wavelength_m=gridval.wavelength_m)


def steering_config(surface: SurfaceSpec, theta_deg: float, phi_deg: float = 0.0) -> ConfigMatrix:
    """Quantize the ideal steering phase gradient onto the cell's states.

    Each cell gets the state whose phase is circularly closest to the ideal
    continuous profile for a beam at (theta, phi).
    """
    k = 2.0 * math.pi / surface.cell.wavelength_m
    t, p = math.radians(theta_deg), math.radians(phi_deg)
    x = surface.cell_x()
    y = surface.cell_y()
    desired = -k * (x[None, :] * math.sin(t) * math.cos(p)
                    + y[:, None] * math.sin(t) * math.sin(p))
    state_ph = np.radians([s.gamma_phase_deg for s in surface.cell.states])
    diff = desired[:, :, None] - state_ph[None, None, :]
    dist = np.abs((diff + math.pi) % (2.0 * math.pi) - math.pi)
    return ConfigMatrix(states=np.argmin(dist, axis=2).astype(np.int64))


# -- CSV serialization ---------------------------------------------------------
#
# Header `theta_deg,phi_deg,re,im,mag`, one row per grid point, theta-major,
# 9 significant digits.

FIELD_CSV_HEADER = "theta_deg,phi_deg,re,im,mag"


def write_field_csv(gridval: FieldGrid, path: str | Path) -> None:
    path = Path(path)
    theta = gridval.grid.theta_deg()
    phi = gridval.grid.phi_deg()
    tt = np.repeat(theta, phi.size)
    pp = np.tile(phi, theta.size)
    flat = gridval.values.ravel()
    table = np.column_stack([tt, pp, flat.real, flat.imag, np.abs(flat)])
    try:
        np.savetxt(path, table, fmt="%.9g,%.9g,%.9g,%.9g,%.9g",
                   header=FIELD_CSV_HEADER, comments="")
    except OSError as exc:
        raise IoError(f"cannot write field CSV {path}: {exc}") from exc


def read_field_csv(path: str | Path, wavelength_m: float = math.nan) -> FieldGrid:
    path = Path(path)
    try:
        raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError as exc:
        raise IoError(f"cannot read field CSV {path}: {exc}") from exc
    except ValueError as exc:
        raise IoError(f"malformed field CSV {path}: {exc}") from exc
    if raw.shape[1] != 5:
        raise IoError(f"malformed field CSV {path}: expected 5 columns, got {raw.shape[1]}")
    theta = np.unique(raw[:, 0])
    phi = np.unique(raw[:, 1])
    if theta.size * phi.size != raw.shape[0]:
        raise IoError(f"field CSV {path} is not a complete theta x phi grid")
    t_step = float(theta[1] - theta[0]) if theta.size > 1 else 1.0
    p_step = float(phi[1] - phi[0]) if phi.size > 1 else 1.0
    grid = GridSpec(theta_step_deg=t_step, phi_step_deg=p_step)
    order = np.lexsort((raw[:, 1], raw[:, 0]))
    values = (raw[order, 2] + 1j * raw[order, 3]).reshape(theta.size, phi.size)
    return FieldGrid(values=values, grid=grid, wavelength_m=wavelength_m)
