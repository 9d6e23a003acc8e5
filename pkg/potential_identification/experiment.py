"""The four run modes: forward shifts, noise, identification and (k, h) sweeps."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Callable

from potential_identification.errors import ConfigurationError
from potential_identification.forward_solver import PhaseShiftSet, check_regime, phase_shifts
from potential_identification.global_search import StabilityReport, irrs
from potential_identification.harness.models import Mode, RunConfig, check_regime_bound
from potential_identification.harness.run_recorder import RunRecorder
from potential_identification.harness.shift_io import (
    read_shifts,
    write_history_csv,
    write_matrix_csv,
    write_report,
    write_shifts,
)
from potential_identification.objective import InverseProblem, NoiseSpec, add_noise, phi, shift_amplitude

logger = logging.getLogger(__name__)


def _out(config: RunConfig, default: str) -> Path:
    return config.out if config.out is not None else Path(default)


def _provenance(config: RunConfig) -> dict[str, object]:
    return {"fingerprint": config.fingerprint(), "mode": str(config.mode), "seed": config.seed}


def cmd_forward(config: RunConfig) -> Path:
    potential = config.resolved_potential()
    check_regime(potential.values, config.k)
    shifts = phase_shifts(potential, config.k, config.l_max)
    return write_shifts(_out(config, "shifts.csv"), shifts, _provenance(config))


def cmd_noise(config: RunConfig) -> Path:
    clean = read_shifts(config.targets, config.k)
    noisy = add_noise(clean, config.noise)
    header = {
        **_provenance(config),
        "source": str(config.targets),
        "h": repr(config.noise.h),
        "noise_seed": config.noise.seed,
        "delta_max": repr(shift_amplitude(clean)),
    }
    default = config.targets.with_name(f"{config.targets.stem}_noisy{config.targets.suffix}")
    return write_shifts(config.out or default, noisy, header)


def _targets(config: RunConfig) -> PhaseShiftSet:
    if config.targets is not None:
        targets = read_shifts(config.targets, config.k)
        if config.k is not None and targets.k != config.k:
            raise ConfigurationError(f"{config.targets} holds shifts at k={targets.k}, config asks for k={config.k}")
        return targets
    return phase_shifts(config.resolved_potential(), config.k, config.l_max)


def _identify(
    config: RunConfig, targets: PhaseShiftSet, noise: NoiseSpec, recorder: RunRecorder | None
) -> tuple[InverseProblem, StabilityReport]:
    adm = config.admissible()
    check_regime_bound(adm, targets.k)
    problem = InverseProblem(
        k=targets.k, targets=add_noise(targets, noise), adm=adm, include_l0=config.include_l0
    )
    report = irrs(problem, config.irrs_params(), config.local, recorder=recorder)
    return problem, report


def cmd_identify(config: RunConfig) -> Path:
    targets = _targets(config)
    problem, report = _identify(config, targets, config.noise, RunRecorder.from_env())
    if config.plant:
        planted = phi(config.resolved_potential(), problem)
        logger.info("planted start has phi=%.6e", planted)
        report = report.model_copy(update={"planted_phi": planted})
    header = {**_provenance(config), "k": repr(problem.k), "h": repr(config.noise.h)}
    report_path, _ = write_report(_out(config, "report.json"), report, header)
    write_history_csv(report_path.with_suffix(".csv"), [(problem.k, config.noise.h, report.diameters)], header)
    return report_path


def cmd_sweep(config: RunConfig) -> Path:
    """Diameter of the final minimizing set for every (k, h) cell."""
    out = _out(config, "sweep.csv")
    cells_dir = out.parent / f"{out.stem}_cells"
    potential = config.resolved_potential()
    recorder = RunRecorder.from_env()
    matrix: list[list[float]] = []
    history: list[tuple[float, float, list[float]]] = []
    for k in config.k_list:
        targets = phase_shifts(potential, k)
        row = []
        for h in config.h_list:
            noise = NoiseSpec(h=h, seed=config.noise.seed)
            _, report = _identify(config, targets, noise, recorder)
            final = report.diameters[-1]
            row.append(final)
            history.append((k, h, report.diameters))
            logger.info("cell k=%s h=%s: D=%.6g (%s)", k, h, final, report.verdict)
            header = {**_provenance(config), "k": repr(k), "h": repr(h)}
            write_report(cells_dir / f"k={k!r}_h={h!r}.json", report, header)
        matrix.append(row)
    write_history_csv(out.with_name(f"{out.stem}_history.csv"), history, _provenance(config))
    return write_matrix_csv(out, config.k_list, config.h_list, matrix, _provenance(config))


COMMANDS: dict[Mode, Callable[[RunConfig], Path]] = {
    Mode.FORWARD: cmd_forward,
    Mode.IDENTIFY: cmd_identify,
    Mode.SWEEP: cmd_sweep,
    Mode.NOISE: cmd_noise,
}
