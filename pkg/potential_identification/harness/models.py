from __future__ import annotations

import copy
import hashlib
import json
import tomllib
from enum import StrEnum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, NonNegativeFloat, NonNegativeInt, PositiveFloat, PositiveInt, model_validator

from potential_identification.errors import ConfigurationError
from potential_identification.global_search import IrrsParams
from potential_identification.local_search import LocalParams
from potential_identification.objective import NoiseSpec
from potential_identification.potential import (
    REFERENCE_POTENTIALS,
    AdmissibleSet,
    PotentialConfig,
    reference_case,
)

DEFAULT_RADIUS = 3.0
DEFAULT_LAYERS = 8
DEFAULT_BOUND = 5.0

PRESETS: dict[str, dict[str, Any]] = {
    "paper": {
        "irrs": {"L": 5000, "gamma": 0.01, "nu": 0.1, "beta": 0.95, "epsilon": 0.01, "j_max": 6},
        "local": {"eps_r": 0.1},
        "max_layers": 8,
    },
    "desk": {
        "irrs": {"L": 500, "gamma": 0.05, "nu": 0.1, "j_max": 3},
        "workers": 0,
    },
}


class Mode(StrEnum):
    FORWARD = "forward"
    IDENTIFY = "identify"
    SWEEP = "sweep"
    NOISE = "noise"


class RunConfig(BaseModel):
    """One run of the command line, as read from a config document plus flags."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    mode: Mode
    potential: PotentialConfig | str | None = None
    targets: Path | None = None
    k: PositiveFloat | None = None
    k_list: tuple[PositiveFloat, ...] = ()
    h_list: tuple[NonNegativeFloat, ...] = (0.0,)
    l_max: NonNegativeInt | None = None
    adm: AdmissibleSet | None = None
    max_layers: PositiveInt = DEFAULT_LAYERS
    irrs: IrrsParams = IrrsParams()
    local: LocalParams = LocalParams()
    noise: NoiseSpec = NoiseSpec()
    include_l0: bool = True
    plant: bool = False
    seed: NonNegativeInt = 0
    workers: NonNegativeInt | None = None
    out: Path | None = None

    @model_validator(mode="after")
    def _check_mode(self) -> "RunConfig":
        if isinstance(self.potential, str) and self.potential not in REFERENCE_POTENTIALS:
            known = ", ".join(sorted(REFERENCE_POTENTIALS))
            raise ValueError(f"unknown reference potential {self.potential!r} (known: {known})")
        if self.mode is Mode.FORWARD and (self.potential is None or self.k is None):
            raise ValueError("forward needs a potential and k")
        if self.mode is Mode.IDENTIFY and self.targets is None and (self.potential is None or self.k is None):
            raise ValueError("identify needs a targets file, or a potential and k to generate them")
        if self.mode is Mode.IDENTIFY and self.plant and self.potential is None:
            raise ValueError("plant needs the true potential")
        if self.mode is Mode.SWEEP and (self.potential is None or not self.k_list or not self.h_list):
            raise ValueError("sweep needs a reference potential, a k list and an h list")
        if self.mode is Mode.NOISE and self.targets is None:
            raise ValueError("noise needs a targets file")
        if self.mode in (Mode.IDENTIFY, Mode.SWEEP):
            wave_numbers = self.k_list if self.mode is Mode.SWEEP else ((self.k,) if self.k else ())
            if wave_numbers:
                check_regime_bound(self.admissible(), min(wave_numbers))
        return self

    def resolved_potential(self) -> PotentialConfig | None:
        if isinstance(self.potential, str):
            return reference_case(self.potential).potential
        return self.potential

    def admissible(self) -> AdmissibleSet:
        """The configured box, else one fitted to the reference potential's bounds."""
        if self.adm is not None:
            return self.adm
        if isinstance(self.potential, str):
            return reference_case(self.potential).admissible(self.max_layers)
        return AdmissibleSet(R=DEFAULT_RADIUS, M=self.max_layers, q_low=-DEFAULT_BOUND, q_high=DEFAULT_BOUND)

    def irrs_params(self) -> IrrsParams:
        update: dict[str, Any] = {"seed": self.seed}
        if self.workers is not None:
            update["workers"] = self.workers
        return self.irrs.model_copy(update=update)

    def fingerprint(self) -> str:
        """SHA-256 over everything that determines the results."""
        payload = self.model_dump(mode="json", exclude={"out": True, "workers": True, "irrs": {"workers"}})
        return fingerprint(payload)


def check_regime_bound(adm: AdmissibleSet, k: float) -> None:
    if not adm.q_high < k * k:
        raise ConfigurationError(
            f"q_high={adm.q_high} must be below k^2={k * k} (k={k}); larger values leave the supported regime"
        )


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def fingerprint(payload: Any) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def load_document(path: str | Path) -> dict[str, Any]:
    """A run configuration document, TOML or JSON by suffix."""
    source = Path(path)
    try:
        if source.suffix == ".toml":
            with source.open("rb") as handle:
                document = tomllib.load(handle)
        else:
            document = json.loads(source.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read config {source}: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigurationError(f"config {source} must hold a table/object at top level")
    return document


def _merge(base: dict[str, Any], update: dict[str, Any]) -> dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def build_run_config(
    document: dict[str, Any] | None = None,
    *,
    preset: str | None = None,
    overrides: dict[str, Any] | None = None,
) -> RunConfig:
    """Preset, then document, then command-line overrides, later ones winning."""
    document = dict(document or {})
    preset = preset or document.pop("preset", None)
    document.pop("preset", None)
    layered: dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {preset!r} (known: {', '.join(PRESETS)})")
        layered = _merge(layered, PRESETS[preset])
    layered = _merge(layered, document)
    layered = _merge(layered, overrides or {})
    return RunConfig.model_validate(layered)
