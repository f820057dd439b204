"""Genetic search over group-level diode states, plus a tiny-instance oracle.

The chromosome holds one state index per control group (length M*N/G), so
grouping shrinks the search space and models shared control lines with the
same mechanism.  Fitness is the negated NMSE between the achieved field and
the target; DE and SLR stay evaluation-only.  All randomness comes from one
seeded generator consumed in a fixed order, so a seed pins the entire run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllZeroField, NonPositiveParam, SearchSpaceTooLarge
from .field import FieldEvaluator, FieldGrid, SourceModel
from .metrics import nmse
from .surface import ConfigMatrix, SurfaceSpec, expand_groups, group_layout


@dataclass(frozen=True)
class GAParams:
    """Search knobs; the stopping rule is a fixed generation budget."""

    population: int = 100
    generations: int = 350
    crossover_prob: float = 0.9
    mutation_prob_per_gene: float | None = None  # default 1 / chromosome length
    elitism: int = 2
    tournament_size: int = 2
    seed: int = 42

    def __post_init__(self):
        if self.population < 2:
            raise NonPositiveParam(f"population must be >= 2, got {self.population}")
        if self.generations < 1:
            raise NonPositiveParam(f"generations must be >= 1, got {self.generations}")
        if not 0 <= self.elitism < self.population:
            raise NonPositiveParam(
                f"elitism must lie in [0, population), got {self.elitism}"
            )
        if self.tournament_size < 1:
            raise NonPositiveParam("tournament size must be >= 1")
        for name, p in (("crossover_prob", self.crossover_prob),
                        ("mutation_prob_per_gene", self.mutation_prob_per_gene)):
            if p is not None and not 0.0 <= p <= 1.0:
                raise NonPositiveParam(f"{name} must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class GAResult:
    best_config: ConfigMatrix
    best_fitness: float
    history: tuple[float, ...]  # best fitness after each generation, non-decreasing
    evaluations: int            # distinct field evaluations performed


class _Objective:
    """Fitness of a group-state chromosome, memoized by chromosome bytes.

    The hot path reproduces ``-nmse(target, evaluator.field(config))`` bit for
    bit while skipping per-call FieldGrid construction: the back hemisphere of
    both fields is identically zero, so its difference terms are written once
    as zeros and the mean runs over the same full-length array in the same
    order as the public metric.
    """

    def __init__(self, surface: SurfaceSpec, src: SourceModel, target: FieldGrid):
        self.surface = surface
        self.layout = group_layout(surface.rows_m, surface.cols_n, surface.group_size)
        self.n_states = surface.cell.n_states
        self.evaluator = FieldEvaluator(surface, src, target.grid)
        self.target = target
        self.evaluations = 0
        self._memo: dict[bytes, float] = {}

        ev = self.evaluator
        t_mags = target.magnitude()
        t_peak = float(t_mags.max())
        if t_peak == 0.0:
            raise NonPositiveParam("target field is identically zero")
        self._flat_assignment = self.layout.assignment.ravel()
        self._n_front_flat = ev._n_front * ev._n_phi
        self._t_norm_flat = (t_mags / t_peak).ravel()
        if np.any(self._t_norm_flat[self._n_front_flat:] != 0.0):
            raise NonPositiveParam("target carries power in the back hemisphere")
        self._diff = self._t_norm_flat.copy()  # back entries stay t_norm - 0 = 0
        # scratch buffers; a fresh 21 MB allocation per call costs more than
        # the reduction itself
        self._partial = np.empty((surface.rows_m, self._n_front_flat), dtype=complex)
        self._front = np.empty(self._n_front_flat, dtype=complex)
        self._weights = np.empty((surface.rows_m, surface.cols_n), dtype=complex)

    @property
    def n_genes(self) -> int:
        return self.layout.n_groups

    def config_of(self, chromosome: np.ndarray) -> ConfigMatrix:
        return expand_groups(chromosome, self.layout, self.n_states)

    def __call__(self, chromosome: np.ndarray) -> float:
        key = chromosome.tobytes()
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        ev = self.evaluator
        states = chromosome[self._flat_assignment].reshape(self.surface.rows_m,
                                                           self.surface.cols_n)
        np.multiply(ev._state_coeffs[states], ev._cell_factor, out=self._weights)
        np.matmul(self._weights, ev._steer_x, out=self._partial)
        np.multiply(self._partial, ev._steer_y_env, out=self._partial)
        front = np.add.reduce(self._partial, axis=0, out=self._front)
        mags = np.abs(front)
        peak = float(mags.max())
        if peak == 0.0:
            raise AllZeroField("achieved field is identically zero")
        n = self._n_front_flat
        np.subtract(self._t_norm_flat[:n], mags / peak, out=self._diff[:n])
        value = -float(np.mean(self._diff * self._diff))
        self.evaluations += 1
        self._memo[key] = value
        return value


def fitness(config: ConfigMatrix, target: FieldGrid, surface: SurfaceSpec,
            src: SourceModel) -> float:
    """Negated NMSE of the configured surface's field against the target."""
    achieved = FieldEvaluator(surface, src, target.grid).field(config)
    return -nmse(target, achieved)


def run_ga(surface: SurfaceSpec, src: SourceModel, target: FieldGrid,
           params: GAParams | None = None) -> GAResult:
    """Tournament-selection GA with uniform crossover and elitism."""
    params = params or GAParams()
    objective = _Objective(surface, src, target)
    n_genes = objective.n_genes
    n_states = objective.n_states
    p_mut = (params.mutation_prob_per_gene
             if params.mutation_prob_per_gene is not None else 1.0 / n_genes)

    rng = np.random.default_rng(params.seed)
    pop = rng.integers(0, n_states, size=(params.population, n_genes), dtype=np.int64)
    fits = np.array([objective(ind) for ind in pop])

    def tournament() -> np.ndarray:
        idx = rng.integers(0, params.population, size=params.tournament_size)
        return pop[idx[np.argmax(fits[idx])]]

    history = []
    for _ in range(params.generations):
        order = np.argsort(-fits, kind="stable")
        elites = pop[order[: params.elitism]].copy()
        elite_fits = fits[order[: params.elitism]].copy()

        children = np.empty((params.population - params.elitism, n_genes), dtype=np.int64)
        for i in range(children.shape[0]):
            pa = tournament()
            pb = tournament()
            if rng.random() < params.crossover_prob:
                mask = rng.random(n_genes) < 0.5
                child = np.where(mask, pa, pb)
            else:
                child = pa.copy()
            mut = rng.random(n_genes) < p_mut
            if mut.any():
                child[mut] = rng.integers(0, n_states, size=int(mut.sum()))
            children[i] = child

        child_fits = np.array([objective(ind) for ind in children])
        pop = np.vstack([elites, children])
        fits = np.concatenate([elite_fits, child_fits])
        history.append(float(fits.max()))

    best = int(np.argmax(fits))
    return GAResult(
        best_config=objective.config_of(pop[best]),
        best_fitness=float(fits[best]),
        history=tuple(history),
        evaluations=objective.evaluations,
    )


EXHAUSTIVE_GUARD = 2 ** 20


def exhaustive_search(surface: SurfaceSpec, src: SourceModel,
                      target: FieldGrid) -> tuple[ConfigMatrix, float]:
    """Enumerate every group-state assignment; ties keep the lexicographically
    lowest chromosome."""
    layout = group_layout(surface.rows_m, surface.cols_n, surface.group_size)
    n_states = surface.cell.n_states
    total = n_states ** layout.n_groups
    if total > EXHAUSTIVE_GUARD:
        raise SearchSpaceTooLarge(
            f"{n_states}^{layout.n_groups} = {total} configurations exceed "
            f"the {EXHAUSTIVE_GUARD} guard"
        )
    objective = _Objective(surface, src, target)
    best_chromo = None
    best_fit = -np.inf
    chromo = np.zeros(layout.n_groups, dtype=np.int64)
    for flat in range(total):
        value = flat
        for g in range(layout.n_groups - 1, -1, -1):
            chromo[g] = value % n_states
            value //= n_states
        fit = objective(chromo)
        if fit > best_fit:
            best_fit = fit
            best_chromo = chromo.copy()
    return objective.config_of(best_chromo), float(best_fit)
