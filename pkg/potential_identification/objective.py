"""Best-fit functional between candidate and target phase shifts, and target noise."""
from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, NonNegativeFloat, PositiveFloat, PrivateAttr, model_validator

from potential_identification.forward_solver import PhaseShiftSet, sweep_shifts
from potential_identification.potential import AdmissibleSet, PotentialConfig, split_coords


class NoiseSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    h: NonNegativeFloat = 0.0
    seed: int = 0


class InverseProblem(BaseModel):
    """Targets delta~(k, l) at one wave number plus the box searched for a fit.

    The misfit sums over l = 0..N, or l = 1..N with ``include_l0=False``.
    """

    model_config = ConfigDict(frozen=True)

    k: PositiveFloat
    targets: PhaseShiftSet
    adm: AdmissibleSet
    include_l0: bool = True

    _target: NDArray[np.float64] = PrivateAttr()
    _first: int = PrivateAttr()
    _denominator: float = PrivateAttr()

    @model_validator(mode="after")
    def _check_targets(self) -> "InverseProblem":
        if self.targets.k != self.k:
            raise ValueError(f"targets were computed at k={self.targets.k}, problem has k={self.k}")
        first = 0 if self.include_l0 else 1
        tail = self.targets.as_array()[first:]
        if not float(tail @ tail) > 0.0:
            raise ValueError("target shifts on the summation range are all zero; the misfit is undefined")
        return self

    def model_post_init(self, __context) -> None:
        self._target = self.targets.as_array()
        self._first = 0 if self.include_l0 else 1
        tail = self._target[self._first :]
        self._denominator = float(tail @ tail)

    @property
    def cutoff(self) -> int:
        return self.targets.cutoff

    def misfit(self, radii: ArrayLike, values: ArrayLike) -> float:
        """Normalised squared misfit of the potential with sorted ``radii``."""
        shifts = sweep_shifts(radii, values, self.k, self.cutoff)
        diff = shifts[self._first :] - self._target[self._first :]
        return float(diff @ diff) / self._denominator

    def __call__(self, coords: ArrayLike) -> float:
        """Misfit of a search vector (r_1..r_m, q_1..q_m)."""
        radii, values = split_coords(coords)
        return self.misfit(radii.tolist(), values.tolist())


def phi(p: PotentialConfig, prob: InverseProblem) -> float:
    return prob.misfit(p.radii, p.values)


def shift_amplitude(targets: PhaseShiftSet) -> float:
    return float(np.max(np.abs(targets.as_array())))


def add_noise(targets: PhaseShiftSet, spec: NoiseSpec) -> PhaseShiftSet:
    """delta_h = delta + (0.5 - z) h delta_max with z uniform on [0, 1] per order."""
    if spec.h == 0.0:
        return targets
    clean = targets.as_array()
    z = np.random.default_rng(spec.seed).uniform(0.0, 1.0, clean.size)
    noisy = clean + (0.5 - z) * spec.h * shift_amplitude(targets)
    return PhaseShiftSet(k=targets.k, shifts=tuple(noisy.tolist()), cutoff=targets.cutoff)
