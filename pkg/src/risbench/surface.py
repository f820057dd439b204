"""Unit cells, surfaces, lattice geometry, and grouping.

A surface is a rectangular M x N array of one tunable cell type lying in
the x-y plane, centered at the origin with normal +z.  Cell (m, n) sits at
((n - (N-1)/2) * pitch, (m - (M-1)/2) * pitch, 0).  Diode states are small
integers indexing the cell's reflection-coefficient table; groups of G
cells share one state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ConfigMismatch,
    ConfigParseError,
    GroupSizeMismatch,
    InvalidGamma,
    InvalidStateCount,
    InvalidStateIndex,
    LengthMismatch,
    NonPositiveParam,
)

SPEED_OF_LIGHT = 299_792_458.0  # m/s

BUNDLED_CELL_IDS = ("S0", "S1", "S2", "S3", "S4", "S5")


@dataclass(frozen=True)
class ReflectionState:
    """One diode state of a cell: reflection magnitude and phase (degrees)."""

    gamma_mag: float
    gamma_phase_deg: float


@dataclass(frozen=True)
class UnitCellSpec:
    """One tunable cell type.

    n_bits control bits select among 2**n_bits reflection states; the cell
    may carry more diodes than bits (n_diodes >= n_bits).  The re-radiation
    envelope is cos(theta)**(1/q_exponent).  Phases stay in degrees here and
    are converted to radians at the field-engine boundary.
    """

    id: str
    n_bits: int
    n_diodes: int
    states: tuple[ReflectionState, ...]
    q_exponent: float
    width_m: float
    height_m: float
    design_freq_hz: float

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.design_freq_hz


@dataclass(frozen=True)
class SurfaceSpec:
    """An M x N array of one cell type on a square lattice."""

    cell: UnitCellSpec
    rows_m: int
    cols_n: int
    pitch_m: float
    group_size: int

    @property
    def n_cells(self) -> int:
        return self.rows_m * self.cols_n

    @property
    def n_groups(self) -> int:
        return self.n_cells // self.group_size

    def cell_x(self) -> np.ndarray:
        """x coordinate per column index n, meters."""
        n = np.arange(self.cols_n, dtype=float)
        return (n - (self.cols_n - 1) / 2.0) * self.pitch_m

    def cell_y(self) -> np.ndarray:
        """y coordinate per row index m, meters."""
        m = np.arange(self.rows_m, dtype=float)
        return (m - (self.rows_m - 1) / 2.0) * self.pitch_m

    def cell_positions(self) -> np.ndarray:
        """(M, N, 3) array of cell centers, z identically 0."""
        x = self.cell_x()
        y = self.cell_y()
        pos = np.zeros((self.rows_m, self.cols_n, 3))
        pos[:, :, 0] = x[None, :]
        pos[:, :, 1] = y[:, None]
        return pos


@dataclass(frozen=True)
class GroupLayout:
    """M x N grid of group ids; each id appears exactly G times."""

    assignment: np.ndarray
    group_size: int

    def __post_init__(self):
        self.assignment.setflags(write=False)

    @property
    def n_groups(self) -> int:
        return self.assignment.size // self.group_size


@dataclass(frozen=True)
class ConfigMatrix:
    """M x N grid of diode-state indices (one index per cell)."""

    states: np.ndarray

    def __post_init__(self):
        self.states.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.states.shape


def validate_unit_cell(spec: UnitCellSpec) -> UnitCellSpec:
    """Check every cell invariant; return the spec unchanged if valid."""
    if spec.n_bits <= 0:
        raise NonPositiveParam(f"{spec.id}: n_bits must be positive, got {spec.n_bits}")
    if spec.n_diodes <= 0:
        raise NonPositiveParam(f"{spec.id}: n_diodes must be positive, got {spec.n_diodes}")
    if spec.n_diodes < spec.n_bits:
        raise NonPositiveParam(
            f"{spec.id}: n_diodes ({spec.n_diodes}) must be >= n_bits ({spec.n_bits})"
        )
    if spec.q_exponent <= 0:
        raise NonPositiveParam(f"{spec.id}: q_exponent must be positive")
    if spec.design_freq_hz <= 0:
        raise NonPositiveParam(f"{spec.id}: design_freq_hz must be positive")
    expected = 2 ** spec.n_bits
    if len(spec.states) != expected:
        raise InvalidStateCount(
            f"{spec.id}: expected {expected} states for {spec.n_bits} bits, "
            f"got {len(spec.states)}"
        )
    for i, st in enumerate(spec.states):
        if not 0.0 < st.gamma_mag <= 1.0:
            raise InvalidGamma(f"{spec.id} state {i}: magnitude {st.gamma_mag} outside (0, 1]")
        if not 0.0 <= st.gamma_phase_deg < 360.0:
            raise InvalidGamma(
                f"{spec.id} state {i}: phase {st.gamma_phase_deg} deg outside [0, 360)"
            )
    return spec


def default_pitch(cell: UnitCellSpec) -> float:
    """Half-wavelength lattice spacing at the cell's design frequency."""
    return SPEED_OF_LIGHT / (2.0 * cell.design_freq_hz)


def group_layout(rows_m: int, cols_n: int, group_size: int) -> GroupLayout:
    """Row-major contiguous runs of ``group_size`` cells share a group id."""
    n_cells = rows_m * cols_n
    if group_size <= 0:
        raise NonPositiveParam(f"group_size must be positive, got {group_size}")
    if n_cells % group_size != 0:
        raise GroupSizeMismatch(
            f"group size {group_size} does not divide {rows_m}x{cols_n} = {n_cells} cells"
        )
    ids = np.arange(n_cells, dtype=np.int64) // group_size
    return GroupLayout(assignment=ids.reshape(rows_m, cols_n), group_size=group_size)


def build_surface(
    cell: UnitCellSpec,
    rows_m: int,
    cols_n: int,
    group_size: int = 1,
    pitch_m: float | None = None,
) -> tuple[SurfaceSpec, GroupLayout]:
    """Assemble a surface and its group layout from a validated cell."""
    validate_unit_cell(cell)
    if rows_m <= 0 or cols_n <= 0:
        raise NonPositiveParam(f"surface dimensions must be positive, got {rows_m}x{cols_n}")
    if pitch_m is None:
        pitch_m = default_pitch(cell)
    if pitch_m <= 0:
        raise NonPositiveParam(f"pitch must be positive, got {pitch_m}")
    layout = group_layout(rows_m, cols_n, group_size)
    surf = SurfaceSpec(
        cell=cell, rows_m=rows_m, cols_n=cols_n, pitch_m=pitch_m, group_size=group_size
    )
    return surf, layout


def expand_groups(
    group_states: Sequence[int] | np.ndarray,
    layout: GroupLayout,
    n_states: int,
) -> ConfigMatrix:
    """Broadcast one state per group to every cell of that group."""
    gs = np.asarray(group_states, dtype=np.int64)
    if gs.ndim != 1 or gs.size != layout.n_groups:
        raise LengthMismatch(
            f"expected {layout.n_groups} group states, got {gs.size}"
        )
    if gs.size and (gs.min() < 0 or gs.max() >= n_states):
        bad = gs[(gs < 0) | (gs >= n_states)][0]
        raise InvalidStateIndex(f"state index {bad} outside [0, {n_states - 1}]")
    return ConfigMatrix(states=gs[layout.assignment])


def validate_config(surface: SurfaceSpec, config: ConfigMatrix) -> ConfigMatrix:
    """Check a configuration against its surface (shape and index range)."""
    expected = (surface.rows_m, surface.cols_n)
    if config.states.shape != expected:
        raise ConfigMismatch(
            f"config shape {config.states.shape} does not match surface {expected}"
        )
    if not np.issubdtype(config.states.dtype, np.integer):
        raise ConfigMismatch("config entries must be integers")
    if config.states.size and (
        config.states.min() < 0 or config.states.max() >= surface.cell.n_states
    ):
        raise InvalidStateIndex(
            f"config holds indices outside [0, {surface.cell.n_states - 1}]"
        )
    return config


def uniform_config(surface: SurfaceSpec, state: int = 0) -> ConfigMatrix:
    """Every cell in the same state."""
    if not 0 <= state < surface.cell.n_states:
        raise InvalidStateIndex(f"state {state} outside [0, {surface.cell.n_states - 1}]")
    return ConfigMatrix(
        states=np.full((surface.rows_m, surface.cols_n), state, dtype=np.int64)
    )


def near_field_boundary(aperture_diameter_m: float, wavelength_m: float) -> float:
    """Far-field onset distance 2 D**2 / lambda for an aperture of diameter D."""
    if aperture_diameter_m <= 0:
        raise NonPositiveParam(f"aperture diameter must be positive, got {aperture_diameter_m}")
    if wavelength_m <= 0:
        raise NonPositiveParam(f"wavelength must be positive, got {wavelength_m}")
    return 2.0 * aperture_diameter_m ** 2 / wavelength_m


# -- JSON ingest --------------------------------------------------------------
#
# Cell document:    {id, n_bits, n_diodes, states: [{mag, phase_deg}], q,
#                    width_mm, height_mm, freq_ghz}
# Surface document: {cell_id, M, N, G, pitch_mm?}

def _cell_from_dict(doc: dict, origin: str) -> UnitCellSpec:
    try:
        states = tuple(
            ReflectionState(gamma_mag=float(s["mag"]), gamma_phase_deg=float(s["phase_deg"]))
            for s in doc["states"]
        )
        cell = UnitCellSpec(
            id=str(doc["id"]),
            n_bits=int(doc["n_bits"]),
            n_diodes=int(doc["n_diodes"]),
            states=states,
            q_exponent=float(doc["q"]),
            width_m=float(doc["width_mm"]) * 1e-3,
            height_m=float(doc["height_mm"]) * 1e-3,
            design_freq_hz=float(doc["freq_ghz"]) * 1e9,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigParseError(f"malformed cell document {origin}: {exc}") from exc
    return validate_unit_cell(cell)


def _bundled_cell_text(cell_id: str) -> str:
    name = f"{cell_id.lower()}.json"
    return resources.files("risbench").joinpath("data", "cells", name).read_text()


def load_unit_cell(ref: str | Path) -> UnitCellSpec:
    """Load a cell by bundled id (S0..S5) or from a JSON file."""
    ref_str = str(ref)
    if ref_str.upper() in BUNDLED_CELL_IDS:
        return _cell_from_dict(json.loads(_bundled_cell_text(ref_str.upper())), ref_str)
    path = Path(ref)
    if not path.is_file():
        raise ConfigParseError(f"cell spec not found: {path}")
    return _cell_from_dict(json.loads(path.read_text()), str(path))


def load_surface(path: str | Path) -> tuple[SurfaceSpec, GroupLayout]:
    """Load a surface document; its cell_id may be bundled or a sibling path."""
    path = Path(path)
    if not path.is_file():
        raise ConfigParseError(f"surface spec not found: {path}")
    try:
        doc = json.loads(path.read_text())
        cell_ref = str(doc["cell_id"])
        rows, cols = int(doc["M"]), int(doc["N"])
        group = int(doc.get("G", 1))
        pitch = doc.get("pitch_mm")
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigParseError(f"malformed surface document {path}: {exc}") from exc
    if cell_ref.upper() not in BUNDLED_CELL_IDS and not Path(cell_ref).is_absolute():
        candidate = path.parent / cell_ref
        if candidate.is_file():
            cell_ref = str(candidate)
    cell = load_unit_cell(cell_ref)
    pitch_m = None if pitch is None else float(pitch) * 1e-3
    return build_surface(cell, rows, cols, group, pitch_m)
