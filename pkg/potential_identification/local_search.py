"""Derivative-free local phase: golden-section line search, a Powell variant
with axis directions reset every outer iteration, the layer-merging
reduction, and their composition.

All searches work on flat vectors (r_1..r_m, q_1..q_m) inside a box, with
radii kept sorted after every accepted move.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt

from potential_identification.potential import AdmissibleSet, PotentialConfig, merge_layers, split_coords

logger = logging.getLogger(__name__)

Objective = Callable[[NDArray[np.float64]], float]

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class LocalParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    eps_r: PositiveFloat = 0.1
    line_tol: PositiveFloat = 1e-6
    powell_ftol: PositiveFloat = 1e-8
    max_powell_iters: PositiveInt = 200
    line_grid: int = Field(default=8, ge=2)


@dataclass(frozen=True)
class SearchBox:
    lower: NDArray[np.float64]
    upper: NDArray[np.float64]
    sort_radii: bool = True

    @classmethod
    def for_layers(cls, adm: AdmissibleSet, layers: int) -> "SearchBox":
        return cls(adm.lower_bounds(layers), adm.upper_bounds(layers))

    def clip(self, coords: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.clip(coords, self.lower, self.upper)

    def settle(self, coords: NDArray[np.float64]) -> NDArray[np.float64]:
        """Clip into the box and restore radius order."""
        inside = self.clip(coords)
        return canonical(inside) if self.sort_radii else inside


@dataclass(frozen=True)
class SearchPoint:
    coords: NDArray[np.float64]
    value: float

    @property
    def layer_count(self) -> int:
        return self.coords.size // 2

    def potential(self) -> PotentialConfig:
        return PotentialConfig.from_coords(self.coords)


def canonical(coords: ArrayLike) -> NDArray[np.float64]:
    radii, values = split_coords(coords)
    return np.concatenate((radii, values))


def evaluate(f: Objective, coords: ArrayLike) -> SearchPoint:
    vec = canonical(coords)
    return SearchPoint(vec, f(vec))


def _feasible_interval(
    origin: NDArray[np.float64], direction: NDArray[np.float64], box: SearchBox
) -> tuple[float, float]:
    t_lo, t_hi = -math.inf, math.inf
    for x, d, lo, hi in zip(origin, direction, box.lower, box.upper):
        if d > 0:
            t_lo, t_hi = max(t_lo, (lo - x) / d), min(t_hi, (hi - x) / d)
        elif d < 0:
            t_lo, t_hi = max(t_lo, (hi - x) / d), min(t_hi, (lo - x) / d)
    return min(t_lo, 0.0), max(t_hi, 0.0)


def _golden_section(
    func: Callable[[float], float], a: float, b: float, tol: float
) -> tuple[float, float]:
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = func(c), func(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = func(d)
    return (c, fc) if fc < fd else (d, fd)


def line_minimize(
    f: Objective,
    origin: SearchPoint,
    direction: ArrayLike,
    box: SearchBox,
    *,
    tol: float = 1e-6,
    grid: int = 8,
) -> SearchPoint:
    """Minimise f on the box-feasible part of the line through ``origin``.

    A coarse scan of ``grid`` points (endpoints included) picks a bracket that
    golden-section search narrows to ``tol``. The origin is returned unless a
    strictly lower value is found.
    """
    d = np.asarray(direction, dtype=float)
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        return origin
    d = d / norm
    t_lo, t_hi = _feasible_interval(origin.coords, d, box)
    if t_hi - t_lo <= tol:
        return origin

    def along(t: float) -> float:
        return f(box.clip(origin.coords + t * d))

    ts = np.linspace(t_lo, t_hi, grid)
    fs = [along(float(t)) for t in ts]
    best = int(np.argmin(fs))
    t_star, f_star = _golden_section(
        along, float(ts[max(best - 1, 0)]), float(ts[min(best + 1, grid - 1)]), tol
    )
    if fs[best] <= f_star:
        t_star, f_star = float(ts[best]), fs[best]
    if not f_star < origin.value:
        return origin
    return SearchPoint(box.settle(origin.coords + t_star * d), f_star)


def basic_powell(f: Objective, start: SearchPoint, box: SearchBox, params: LocalParams) -> SearchPoint:
    """Powell-style descent over the coordinate axes plus one composite direction.

    Each outer iteration orders the axes by the value a trial minimisation
    along them reaches from the current point, minimises along them in that
    order, then along the net displacement. Stops on a fractional decrease
    below ``powell_ftol`` or after ``max_powell_iters`` iterations.
    """
    line = {"tol": params.line_tol, "grid": params.line_grid}
    current = start
    axes = np.eye(current.coords.size)
    for iteration in range(1, params.max_powell_iters + 1):
        trials = [line_minimize(f, current, axis, box, **line) for axis in axes]
        order = sorted(range(len(axes)), key=lambda i: (trials[i].value, i))
        point = current
        for i in order:
            point = line_minimize(f, point, axes[i], box, **line)
        displacement = point.coords - current.coords
        if np.any(displacement):
            composite = line_minimize(f, current, displacement, box, **line)
            if composite.value < point.value:
                point = composite

        before, after = current.value, point.value
        current = point
        logger.debug("powell iteration %d: %.6e -> %.6e", iteration, before, after)
        if 2.0 * abs(before - after) <= params.powell_ftol * (abs(before) + abs(after) + 1e-25):
            break
    return current


def _merge_candidates(p: PotentialConfig):
    m = p.layer_count
    for i in range(2, m + 2):
        yield i, "down"
    for i in range(1, m + 1):
        yield i, "up"


def reduce(f: Objective, start: SearchPoint, eps_r: float) -> SearchPoint:
    """Greedily fuse neighbouring layers while the misfit barely changes.

    Every pass tries all down- and up-merges of the current configuration and
    applies the cheapest one if its change c satisfies c < eps_r * f(current)
    or c == 0.
    """
    current = start
    while current.layer_count > 1:
        p = current.potential()
        best: tuple[float, SearchPoint, int, str] | None = None
        for i, direction in _merge_candidates(p):
            merged = merge_layers(p, i, direction)
            trial = evaluate(f, merged.coords())
            change = abs(trial.value - current.value)
            if best is None or change < best[0]:
                best = (change, trial, i, direction)
        change, trial, i, direction = best
        if not (change < eps_r * current.value or change == 0.0):
            break
        logger.debug(
            "merged layer %d %s: %d -> %d layers, misfit %.6e -> %.6e",
            i, direction, current.layer_count, trial.layer_count, current.value, trial.value,
        )
        current = trial
    return current


def lmm(f: Objective, start: SearchPoint, adm: AdmissibleSet, params: LocalParams) -> SearchPoint:
    """Reduce, polish with basic_powell in the reduced space, reduce again.

    Returns the final reduced point unless its misfit exceeds the start's,
    otherwise the lower of the polished and starting points.
    """
    reduced = reduce(f, start, params.eps_r)
    polished = basic_powell(f, reduced, SearchBox.for_layers(adm, reduced.layer_count), params)
    final = reduce(f, polished, params.eps_r)
    if final.value <= start.value:
        return final
    return min((polished, start), key=lambda point: point.value)

