"""Iterative Reduced Random Search and the minimizing-set diameter.

Each iteration samples a batch of L configurations, keeps the gamma*L with
the lowest misfit, polishes them with :func:`lmm`, pools the results with the
previous iteration's minimizers and minimizing set, and measures how far
apart the nu*gamma*L best of the pool are. A small normalised diameter D
means every good fit describes the same potential.
"""
from __future__ import annotations

import asyncio
import logging
import math
import os
from concurrent.futures import Executor, ProcessPoolExecutor
from enum import StrEnum
from functools import partial
from itertools import combinations
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveFloat, PositiveInt, model_validator

from potential_identification.errors import ConfigurationError, DegeneratePoolError, UnsupportedRegimeError
from potential_identification.harness.run_recorder import RunRecorder
from potential_identification.local_search import LocalParams, SearchPoint, lmm
from potential_identification.objective import InverseProblem
from potential_identification.potential import PotentialConfig, distance, l2_norm, sample_uniform

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

_MAX_RESAMPLES = 1000


def _count(fraction_of_batch: float) -> int:
    return math.ceil(round(fraction_of_batch, 9))


class IrrsParams(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True, ser_json_inf_nan="constants")

    batch_size: PositiveInt = Field(default=5000, alias="L")
    gamma: float = Field(default=0.01, gt=0.0, lt=1.0)
    nu: float = Field(default=0.1, gt=0.0, lt=1.0)
    beta: float = Field(default=0.95, gt=0.0, lt=1.0)
    epsilon: PositiveFloat = 0.01
    j_max: PositiveInt = 6
    seed: NonNegativeInt = 0
    workers: NonNegativeInt = 1

    @model_validator(mode="after")
    def _check_counts(self) -> "IrrsParams":
        if round(self.gamma * self.batch_size, 9) < 1:
            raise ValueError(f"gamma*L = {self.gamma * self.batch_size} must be at least 1")
        if round(self.nu * self.gamma * self.batch_size, 9) < 1:
            raise ValueError(f"nu*gamma*L = {self.nu * self.gamma * self.batch_size} must be at least 1")
        return self

    @property
    def reduced_count(self) -> int:
        return _count(self.gamma * self.batch_size)

    @property
    def minimizing_count(self) -> int:
        return _count(self.nu * self.gamma * self.batch_size)


class Verdict(StrEnum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    ITERATION_CAPPED = "iteration-capped"


class Minimizer(BaseModel):
    model_config = ConfigDict(frozen=True)

    potential: PotentialConfig
    phi: float


class MinimizingSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    members: tuple[Minimizer, ...]
    diameter: float
    d_av: float

    @property
    def best(self) -> Minimizer:
        return self.members[0]


class IterationRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    iteration: int
    minimizing_set: MinimizingSet

    @property
    def diameter(self) -> float:
        return self.minimizing_set.diameter


class StabilityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    best: Minimizer
    iterations: tuple[IterationRecord, ...]
    verdict: Verdict
    planted_phi: float | None = None

    @property
    def diameters(self) -> list[float]:
        return [record.diameter for record in self.iterations]


def reduced_sample(batch: Sequence[SearchPoint], gamma: float) -> list[SearchPoint]:
    """The ceil(gamma * len(batch)) lowest-valued points, ties by batch order."""
    count = min(max(_count(gamma * len(batch)), 1), len(batch))
    ranked = sorted(range(len(batch)), key=lambda i: (batch[i].value, i))
    return [batch[i] for i in ranked[:count]]


def diameter(
    candidates: Sequence[tuple[PotentialConfig, float]],
    nu_gamma_L: int,
    norm_pool_size: int | None = None,
) -> MinimizingSet:
    """The nu_gamma_L lowest-misfit candidates and their normalised diameter.

    The normalising d_av is the mean norm of the ``norm_pool_size`` lowest
    candidates, or of all candidates when it is None.
    """
    if not 1 <= nu_gamma_L <= len(candidates):
        raise ValueError(f"cannot keep {nu_gamma_L} of {len(candidates)} candidates")
    ranked = sorted(range(len(candidates)), key=lambda i: (candidates[i][1], i))
    members = tuple(
        Minimizer(potential=candidates[i][0], phi=float(candidates[i][1])) for i in ranked[:nu_gamma_L]
    )
    pool = ranked if norm_pool_size is None else ranked[:norm_pool_size]
    d_av = float(np.mean([l2_norm(candidates[i][0]) for i in pool]))
    if d_av == 0.0:
        raise DegeneratePoolError("every pooled minimizer is the zero potential; D is undefined")
    spread = max(
        (distance(a.potential, b.potential) for a, b in combinations(members, 2)), default=0.0
    )
    return MinimizingSet(members=members, diameter=spread / d_av, d_av=d_av)


def decide(
    current: float, previous: float, iteration: int, epsilon: float, beta: float, j_max: int
) -> Verdict | None:
    """Stopping rule for one iteration; None means run another batch."""
    if current <= epsilon:
        return Verdict.STABLE
    if current <= beta * previous:
        return Verdict.ITERATION_CAPPED if iteration >= j_max else None
    return Verdict.UNSTABLE


def verdict_for(diameters: Iterable[float], epsilon: float, beta: float, j_max: int) -> Verdict:
    """Replay the stopping rule over a recorded diameter sequence."""
    previous = math.inf
    for iteration, current in enumerate(diameters, start=1):
        verdict = decide(current, previous, iteration, epsilon, beta, j_max)
        if verdict is not None:
            return verdict
        previous = current
    raise ValueError("diameter history ends before the stopping rule fires")


def resolve_workers(requested: int) -> int:
    return requested if requested > 0 else (os.cpu_count() or 1)


def _evaluate_chunk(problem: InverseProblem, chunk: list[NDArray[np.float64]]) -> list[float | None]:
    values: list[float | None] = []
    for coords in chunk:
        try:
            values.append(problem(coords))
        except UnsupportedRegimeError:
            values.append(None)
    return values


def _local_search(problem: InverseProblem, local: LocalParams, start: SearchPoint) -> SearchPoint:
    return lmm(problem, start, problem.adm, local)


async def _fan_out(executor: Executor | None, fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """fn over items, results in item order."""
    if executor is None:
        return [fn(item) for item in items]
    loop = asyncio.get_running_loop()
    return list(await asyncio.gather(*(loop.run_in_executor(executor, fn, item) for item in items)))


def _chunks(items: list[T], parts: int) -> list[list[T]]:
    size = max(1, math.ceil(len(items) / parts))
    return [items[i : i + size] for i in range(0, len(items), size)]


def _resample(problem: InverseProblem, rng: np.random.Generator) -> SearchPoint:
    for _ in range(_MAX_RESAMPLES):
        coords = sample_uniform(problem.adm, rng).coords()
        try:
            return SearchPoint(coords, problem(coords))
        except UnsupportedRegimeError:
            continue
    raise ConfigurationError(
        f"no admissible sample after {_MAX_RESAMPLES} draws; lower q_high below k^2={problem.k ** 2}"
    )


async def _sample_batch(
    problem: InverseProblem, params: IrrsParams, rng: np.random.Generator, executor: Executor | None, workers: int
) -> list[SearchPoint]:
    coords = [sample_uniform(problem.adm, rng).coords() for _ in range(params.batch_size)]
    chunked = await _fan_out(executor, partial(_evaluate_chunk, problem), _chunks(coords, 4 * workers))
    values = [value for chunk in chunked for value in chunk]
    batch = []
    for vec, value in zip(coords, values):
        batch.append(_resample(problem, rng) if value is None else SearchPoint(vec, value))
    return batch


async def _iteration_minimizers(
    problem: InverseProblem,
    params: IrrsParams,
    local: LocalParams,
    rng: np.random.Generator,
    executor: Executor | None,
    workers: int,
) -> list[SearchPoint]:
    batch = await _sample_batch(problem, params, rng, executor, workers)
    starts = reduced_sample(batch, params.gamma)
    return await _fan_out(executor, partial(_local_search, problem, local), starts)


def _candidates(points: Sequence[SearchPoint]) -> list[tuple[PotentialConfig, float]]:
    return [(point.potential(), point.value) for point in points]


def _carried(pool: list[SearchPoint], fresh: int, keep: int) -> list[SearchPoint]:
    """H^j_min plus the members of S^j_min that came from earlier iterations."""
    ranked = sorted(range(len(pool)), key=lambda i: (pool[i].value, i))[:keep]
    return pool[:fresh] + [pool[i] for i in sorted(ranked) if i >= fresh]


async def run_irrs(
    problem: InverseProblem,
    params: IrrsParams,
    local: LocalParams | None = None,
    *,
    recorder: RunRecorder | None = None,
) -> StabilityReport:
    local = local or LocalParams()
    workers = resolve_workers(params.workers)
    streams = np.random.SeedSequence(params.seed).spawn(params.j_max)
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None

    records: list[IterationRecord] = []
    previous: list[SearchPoint] = []
    d_previous = math.inf
    verdict: Verdict | None = None
    try:
        for j in range(1, params.j_max + 1):
            rng = np.random.default_rng(streams[j - 1])
            minimizers = await _iteration_minimizers(problem, params, local, rng, executor, workers)
            pool = minimizers + previous
            mset = diameter(_candidates(pool), params.minimizing_count, norm_pool_size=params.reduced_count)
            records.append(IterationRecord(iteration=j, minimizing_set=mset))

            logger.info(
                "iteration %d: D=%.6g best phi=%.6g pool=%d", j, mset.diameter, mset.best.phi, len(pool)
            )
            if recorder:
                recorder.record(
                    f"k={problem.k} iteration={j} D={mset.diameter!r} best_phi={mset.best.phi!r} "
                    f"layers={mset.best.potential.layer_count}"
                )

            verdict = decide(mset.diameter, d_previous, j, params.epsilon, params.beta, params.j_max)
            if verdict is not None:
                break
            previous, d_previous = _carried(pool, len(minimizers), params.minimizing_count), mset.diameter
    finally:
        if executor is not None:
            executor.shutdown()

    best = min(
        (member for record in records for member in record.minimizing_set.members),
        key=lambda member: member.phi,
    )
    if recorder:
        recorder.record(f"verdict={verdict} best_phi={best.phi!r}")
    return StabilityReport(best=best, iterations=tuple(records), verdict=verdict)


def irrs(
    problem: InverseProblem,
    params: IrrsParams,
    local: LocalParams | None = None,
    *,
    recorder: RunRecorder | None = None,
) -> StabilityReport:
    return asyncio.run(run_irrs(problem, params, local, recorder=recorder))


async def run_reduced_random_search(
    problem: InverseProblem, params: IrrsParams, local: LocalParams | None = None
) -> MinimizingSet:
    """One pass of sampling, selection and local search, without iteration."""
    local = local or LocalParams()
    workers = resolve_workers(params.workers)
    rng = np.random.default_rng(np.random.SeedSequence(params.seed).spawn(1)[0])
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        minimizers = await _iteration_minimizers(problem, params, local, rng, executor, workers)
    finally:
        if executor is not None:
            executor.shutdown()
    return diameter(_candidates(minimizers), params.minimizing_count)


def reduced_random_search(
    problem: InverseProblem, params: IrrsParams, local: LocalParams | None = None
) -> MinimizingSet:
    return asyncio.run(run_reduced_random_search(problem, params, local))
