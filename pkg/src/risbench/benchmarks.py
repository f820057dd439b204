"""Benchmark radiation patterns and the reference-surface machinery.

Eight bundled patterns exercise single-beam steering (B1, B2), equal-power
multi-beam forming (B3 to B7), and unequal-power multi-beam forming (B8).
Targets are ideal: raised-cosine lobes on the signed principal-cut axis and
zero everywhere else.  Synthesis quality is scored not against these ideals
but against what the idealized reference surface achieves on the same
target, so the reference patterns produced here are cached on disk.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigParseError, OverlappingLobes, UnknownBenchmark
from .field import (
    FieldGrid,
    GridSpec,
    SourceModel,
    read_field_csv,
    write_field_csv,
)
from .surface import (
    ConfigMatrix,
    UnitCellSpec,
    build_surface,
    load_unit_cell,
)

BUNDLED_BENCHMARK_IDS = ("B1", "B2", "B3", "B4", "B5", "B6", "B7", "B8")

REFERENCE_SIZE = 40  # reference surface is always 40 x 40, individually controlled


@dataclass(frozen=True)
class BeamSpec:
    """One intended beam: signed elevation, relative amplitude, lobe bounds."""

    signed_theta_deg: float
    rel_amplitude: float
    lobe_start_deg: float
    lobe_end_deg: float

    def __post_init__(self):
        if not self.lobe_start_deg < self.signed_theta_deg < self.lobe_end_deg:
            raise ConfigParseError(
                f"beam at {self.signed_theta_deg} deg outside its lobe bounds "
                f"[{self.lobe_start_deg}, {self.lobe_end_deg}]"
            )
        if not 0.0 < self.rel_amplitude <= 1.0:
            raise ConfigParseError(f"beam amplitude {self.rel_amplitude} outside (0, 1]")
        if self.lobe_start_deg < -90.0 or self.lobe_end_deg > 90.0:
            raise ConfigParseError("lobe bounds must stay within [-90, 90] degrees")


@dataclass(frozen=True)
class BenchmarkPattern:
    """A named list of intended beams with pairwise disjoint lobe regions."""

    id: str
    beams: tuple[BeamSpec, ...]

    def __post_init__(self):
        if not self.beams:
            raise ConfigParseError(f"benchmark {self.id} has no beams")
        spans = sorted((b.lobe_start_deg, b.lobe_end_deg) for b in self.beams)
        for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
            if s2 < e1:
                raise OverlappingLobes(
                    f"benchmark {self.id}: lobes [{s1}, {e1}] and [{s2}, {e2}] overlap"
                )


def _pattern_from_dict(doc: dict, origin: str) -> BenchmarkPattern:
    try:
        beams = tuple(
            BeamSpec(
                signed_theta_deg=float(b["theta_deg"]),
                rel_amplitude=float(b["amplitude"]),
                lobe_start_deg=float(b["start_deg"]),
                lobe_end_deg=float(b["end_deg"]),
            )
            for b in doc["beams"]
        )
        return BenchmarkPattern(id=str(doc["id"]), beams=beams)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigParseError(f"malformed benchmark document {origin}: {exc}") from exc


def load_benchmark(id_or_path: str | Path) -> BenchmarkPattern:
    """Load a bundled pattern (B1..B8) or a custom JSON file."""
    ref = str(id_or_path)
    if ref.upper() in BUNDLED_BENCHMARK_IDS:
        text = resources.files("risbench").joinpath(
            "data", "benchmarks", f"{ref.lower()}.json").read_text()
        return _pattern_from_dict(json.loads(text), ref)
    path = Path(id_or_path)
    if not path.is_file():
        raise UnknownBenchmark(f"{ref!r} is not a bundled benchmark id or a readable file")
    return _pattern_from_dict(json.loads(path.read_text()), str(path))


DEFAULT_TARGET_PHI_BAND_DEG = 5.0


def ideal_target_field(bm: BenchmarkPattern, grid: GridSpec | None = None,
                       phi_band_deg: float = DEFAULT_TARGET_PHI_BAND_DEG) -> FieldGrid:
    """Ideal magnitude grid: one raised-cosine lobe per beam, zero elsewhere.

    Each beam contributes rel_amplitude * cos(pi * (s - theta_c) / w)**2 over
    its [start, end] span on the signed axis, centered on the phi = 0 column
    for s >= 0 and the phi = 180 column for s < 0, with a matching raised
    cosine tapering to zero across ``phi_band_deg`` of azimuth on either side
    of the beam's half-plane.  A one-column target is too sparse to steer an
    optimizer on a 1-degree grid (22 of 64 800 samples), the same reason the
    metric integrals use a phi band.  The result is normalized to a peak of
    exactly 1.
    """
    grid = grid or GridSpec()
    theta = grid.theta_deg()
    phi = grid.phi_deg()
    values = np.zeros((theta.size, phi.size))

    front = theta[theta <= 90.0]
    wrap = np.minimum(np.abs(phi % 360.0), 360.0 - (phi % 360.0))
    phi_off = {0.0: wrap, 180.0: np.abs(phi - 180.0)}
    for beam in bm.beams:
        width = beam.lobe_end_deg - beam.lobe_start_deg
        for signed, plane, row_off in ((front, 0.0, 0), (-front[1:], 180.0, 1)):
            inside = (signed >= beam.lobe_start_deg) & (signed <= beam.lobe_end_deg)
            if not inside.any():
                continue
            s = signed[inside]
            lobe = beam.rel_amplitude * np.cos(
                math.pi * (s - beam.signed_theta_deg) / width) ** 2
            if phi_band_deg > 0.0:
                cols = np.nonzero(phi_off[plane] <= phi_band_deg)[0]
                taper = np.cos(math.pi * phi_off[plane][cols] / (2.0 * phi_band_deg)) ** 2
            else:
                cols = np.nonzero(phi_off[plane] == 0.0)[0]
                taper = np.ones(cols.size)
            rows = np.nonzero(inside)[0] + row_off
            values[np.ix_(rows, cols)] = lobe[:, None] * taper[None, :]
    peak = values.max()
    if peak > 0.0:
        values = values / peak
    return FieldGrid(values=values.astype(complex), grid=grid)


def reference_unit_cell() -> UnitCellSpec:
    """The idealized 2-bit reference cell: lossless, 90-degree-spaced states."""
    return load_unit_cell("S0")


def _source_token(src: SourceModel) -> str:
    return src.kind


def _cache_hash(src: SourceModel, grid: GridSpec, ga_params) -> str:
    doc = {
        "src": [src.kind, src.amplitude, src.position_m, src.incidence_deg],
        "grid": [grid.theta_step_deg, grid.phi_step_deg],
        "ga": [
            ga_params.population, ga_params.generations, ga_params.crossover_prob,
            ga_params.mutation_prob_per_gene, ga_params.elitism,
            ga_params.tournament_size,
        ],
    }
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:12]


def default_cache_dir() -> Path:
    env = os.environ.get("RISBENCH_CACHE_DIR")
    return Path(env) if env else Path("cache")


def reference_pattern(
    bm: BenchmarkPattern,
    src: SourceModel,
    seed: int,
    ga_params=None,
    grid: GridSpec | None = None,
    cache_dir: str | Path | None = None,
) -> tuple[FieldGrid, ConfigMatrix]:
    """Synthesize (or load) the reference surface's pattern for a benchmark.

    Runs the genetic optimizer on the 40 x 40 reference surface, one control
    line per cell, against the benchmark's ideal target.  Results are cached
    under ``cache/ref`` keyed by (benchmark, source kind, seed, parameter
    hash); identical requests return byte-identical data because the first
    call also round-trips through its own cache files.
    """
    from .ga import GAParams, run_ga  # deferred: optimizer depends on metrics

    grid = grid or GridSpec()
    if ga_params is None:
        ga_params = GAParams(seed=seed)
    elif ga_params.seed != seed:
        raise ConfigParseError("seed argument disagrees with ga_params.seed")

    root = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    ref_dir = root / "ref"
    stem = f"{bm.id}_{_source_token(src)}_{seed}_{_cache_hash(src, grid, ga_params)}"
    field_path = ref_dir / f"{stem}.csv"
    config_path = ref_dir / f"{stem}.config.csv"

    if not (field_path.is_file() and config_path.is_file()):
        surface, _ = build_surface(reference_unit_cell(), REFERENCE_SIZE, REFERENCE_SIZE, 1)
        target = ideal_target_field(bm, grid)
        result = run_ga(surface, src, target, ga_params)
        from .field import FieldEvaluator

        achieved = FieldEvaluator(surface, src, grid).field(result.best_config)
        ref_dir.mkdir(parents=True, exist_ok=True)
        _atomic_write_field(achieved, field_path)
        _atomic_write_config(result.best_config, config_path)

    wavelength = reference_unit_cell().wavelength_m
    gridval = read_field_csv(field_path, wavelength_m=wavelength)
    config = ConfigMatrix(states=np.loadtxt(config_path, delimiter=",",
                                            dtype=np.int64, ndmin=2))
    return gridval, config


def _atomic_write_field(gridval: FieldGrid, path: Path) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    write_field_csv(gridval, tmp)
    os.replace(tmp, path)


def _atomic_write_config(config: ConfigMatrix, path: Path) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    np.savetxt(tmp, config.states, fmt="%d", delimiter=",")
    os.replace(tmp, path)
