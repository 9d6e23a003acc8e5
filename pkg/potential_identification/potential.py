"""Piecewise-constant spherically symmetric potentials and their search box.

A configuration with radii r_1 <= ... <= r_M and values q_1..q_M describes
q(r) = q_m on [r_{m-1}, r_m) with r_0 = 0 and q = 0 beyond r_M.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator

from potential_identification.errors import LayerIndexError

_SHELL = 4.0 * math.pi / 3.0


class PotentialConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    radii: tuple[float, ...]
    values: tuple[float, ...]

    @model_validator(mode="after")
    def _check_layers(self) -> "PotentialConfig":
        if len(self.radii) != len(self.values):
            raise ValueError(
                f"radii and values differ in length ({len(self.radii)} != {len(self.values)})"
            )
        if not self.radii:
            raise ValueError("a potential needs at least one layer")
        if any(not math.isfinite(r) or r < 0 for r in self.radii):
            raise ValueError(f"radii must be finite and nonnegative, got {self.radii}")
        if any(not math.isfinite(v) for v in self.values):
            raise ValueError(f"values must be finite, got {self.values}")
        if any(b < a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError(f"radii must be nondecreasing, got {self.radii}")
        return self

    @property
    def layer_count(self) -> int:
        return len(self.radii)

    def values_at(self, r: ArrayLike) -> NDArray[np.float64]:
        """q(r) for an array of radii."""
        idx = np.searchsorted(np.asarray(self.radii), np.asarray(r, dtype=float), side="right")
        return np.append(np.asarray(self.values), 0.0)[idx]

    def value_at(self, r: float) -> float:
        return float(self.values_at([r])[0])

    def coords(self) -> NDArray[np.float64]:
        """The flat search vector (r_1..r_M, q_1..q_M)."""
        return np.concatenate((self.radii, self.values)).astype(float)

    @classmethod
    def from_coords(cls, coords: ArrayLike) -> "PotentialConfig":
        """Decode a search vector, sorting radii and carrying values along."""
        radii, values = split_coords(coords)
        return cls(radii=tuple(radii.tolist()), values=tuple(values.tolist()))


class AdmissibleSet(BaseModel):
    """Box bounds of the search: radii in [0, R], at most M layers, values in [q_low, q_high]."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    radius: PositiveFloat = Field(alias="R")
    max_layers: PositiveInt = Field(alias="M")
    q_low: float
    q_high: float

    @model_validator(mode="after")
    def _check_bounds(self) -> "AdmissibleSet":
        if not (math.isfinite(self.q_low) and math.isfinite(self.q_high)):
            raise ValueError("value bounds must be finite")
        if self.q_low > self.q_high:
            raise ValueError(f"q_low={self.q_low} exceeds q_high={self.q_high}")
        return self

    def lower_bounds(self, layers: int) -> NDArray[np.float64]:
        return np.concatenate((np.zeros(layers), np.full(layers, self.q_low)))

    def upper_bounds(self, layers: int) -> NDArray[np.float64]:
        return np.concatenate((np.full(layers, self.radius), np.full(layers, self.q_high)))

    def contains(self, p: PotentialConfig) -> bool:
        return (
            p.layer_count <= self.max_layers
            and all(0.0 <= r <= self.radius for r in p.radii)
            and all(self.q_low <= v <= self.q_high for v in p.values)
        )


def split_coords(coords: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Radii and values of a search vector, radii sorted with values carried along."""
    vec = np.asarray(coords, dtype=float)
    m = vec.size // 2
    radii, values = vec[:m], vec[m:]
    order = np.argsort(radii, kind="stable")
    return radii[order], values[order]


def make_potential(
    radii: Sequence[float], values: Sequence[float], *, sort: bool = False
) -> PotentialConfig:
    if sort and len(radii) == len(values):
        order = sorted(range(len(radii)), key=lambda i: radii[i])
        radii = [radii[i] for i in order]
        values = [values[i] for i in order]
    return PotentialConfig(radii=tuple(radii), values=tuple(values))


def zero_potential(support: float = 0.0) -> PotentialConfig:
    return PotentialConfig(radii=(support,), values=(0.0,))


def scale_potential(p: PotentialConfig, factor: float) -> PotentialConfig:
    return PotentialConfig(radii=p.radii, values=tuple(factor * v for v in p.values))


def sample_uniform(adm: AdmissibleSet, rng: np.random.Generator) -> PotentialConfig:
    """M sorted radii uniform on [0, R], then M values uniform on [q_low, q_high]."""
    radii = np.sort(rng.uniform(0.0, adm.radius, adm.max_layers))
    values = rng.uniform(adm.q_low, adm.q_high, adm.max_layers)
    return PotentialConfig(radii=tuple(radii.tolist()), values=tuple(values.tolist()))


def distance(p: PotentialConfig, q: PotentialConfig) -> float:
    """L2 distance in R^3 between two radial potentials, by exact shell integrals."""
    edges = np.union1d(np.asarray(p.radii), np.asarray(q.radii))
    edges = np.union1d(edges, [0.0])
    lo, hi = edges[:-1], edges[1:]
    if lo.size == 0:
        return 0.0
    mid = 0.5 * (lo + hi)
    diff = p.values_at(mid) - q.values_at(mid)
    total = _SHELL * float(np.sum(diff * diff * (hi**3 - lo**3)))
    return math.sqrt(total)


def l2_norm(p: PotentialConfig) -> float:
    return distance(p, zero_potential())


def merge_layers(
    p: PotentialConfig, i: int, direction: Literal["down", "up"]
) -> PotentialConfig:
    """Fuse layer i with its neighbour; layer M+1 is the virtual zero layer beyond r_M.

    ``down`` gives layer i-1 the value of layer i (2 <= i <= M+1); ``up`` gives
    layer i+1 the value of layer i (1 <= i <= M). Indices are 1-based.
    """
    m = p.layer_count
    radii, values = list(p.radii), list(p.values)
    if direction == "down":
        if not 2 <= i <= m + 1:
            raise LayerIndexError(f"down-merge index {i} outside 2..{m + 1}")
        del radii[i - 2]
        del values[i - 2]
    elif direction == "up":
        if not 1 <= i <= m:
            raise LayerIndexError(f"up-merge index {i} outside 1..{m}")
        if i == m:
            del radii[m - 1]
            del values[m - 1]
        else:
            del radii[i - 1]
            del values[i]
    else:
        raise ValueError(f"unknown merge direction {direction!r}")
    if not radii:
        return zero_potential()
    return PotentialConfig(radii=tuple(radii), values=tuple(values))


@dataclass(frozen=True)
class ReferenceCase:
    potential: PotentialConfig
    q_low: float
    q_high: float
    radius: float = 3.0

    def admissible(self, max_layers: int = 8) -> AdmissibleSet:
        return AdmissibleSet(R=self.radius, M=max_layers, q_low=self.q_low, q_high=self.q_high)


Q1 = make_potential((0.3, 1.0, 1.9, 2.2, 2.4), (4.0, 1.0, -2.0, 3.5, 1.0))
Q2 = make_potential((0.5, 1.0, 1.5, 2.0), (2.0, 1.0, 2.0, 1.0))

REFERENCE_POTENTIALS: dict[str, ReferenceCase] = {
    "q1": ReferenceCase(Q1, -5.0, 5.0),
    "q2": ReferenceCase(Q2, -5.0, 5.0),
    "q3": ReferenceCase(scale_potential(Q2, 0.1), -0.5, 0.5),
    "q4": ReferenceCase(scale_potential(Q2, 0.01), -0.05, 0.05),
}


def reference_case(name: str) -> ReferenceCase:
    try:
        return REFERENCE_POTENTIALS[name]
    except KeyError:
        known = ", ".join(sorted(REFERENCE_POTENTIALS))
        raise KeyError(f"unknown reference potential {name!r} (known: {known})") from None
