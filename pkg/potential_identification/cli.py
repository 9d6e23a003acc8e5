import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any

from dotenv import load_dotenv
from pydantic import ValidationError

from potential_identification.errors import IdentificationError
from potential_identification.experiment import COMMANDS
from potential_identification.harness.models import PRESETS, build_run_config, load_document

logger = logging.getLogger(__name__)

_TRUE = {"1", "true", "yes", "on"}


def _float_list(text: str) -> list[float]:
    return [float(item) for item in text.split(",") if item.strip()]


def _potential(text: str) -> Any:
    """A reference name such as q1, or inline JSON {"radii": [...], "values": [...]}."""
    return json.loads(text) if text.lstrip().startswith("{") else text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON or TOML run configuration")
    common.add_argument("--seed", type=int, help="Root seed of the random search")
    common.add_argument("--out", type=Path, help="Output file")
    common.add_argument("--preset", choices=sorted(PRESETS), help="Named parameter preset")
    common.add_argument("--workers", type=int, help="Worker processes (0 = one per CPU)")
    common.add_argument("--debug", action="store_true", help="Enable debug logging")

    parser = argparse.ArgumentParser(
        prog="potential-identification",
        description="Phase shifts of layered potentials and their identification from phase shifts",
    )
    commands = parser.add_subparsers(dest="mode", required=True)

    forward = commands.add_parser("forward", parents=[common], help="Compute a phase-shift table")
    forward.add_argument("--potential", type=_potential, help="Reference name (q1..q4) or inline JSON")
    forward.add_argument("-k", "--k", type=float, help="Wave number")
    forward.add_argument("--l-max", type=int, help="Last order (default: decay cutoff)")

    identify = commands.add_parser("identify", parents=[common], help="Recover a potential from shifts")
    identify.add_argument("--targets", "--input", type=Path, help="Shift table (CSV or JSON)")
    identify.add_argument("--potential", type=_potential, help="True potential, to generate targets or plant")
    identify.add_argument("-k", "--k", type=float, help="Wave number")
    identify.add_argument("--noise-h", type=float, help="Relative noise level h")
    identify.add_argument("--noise-seed", type=int, help="Seed of the noise draw")
    identify.add_argument("--plant", action="store_true", default=None, help="Report phi at the true potential")

    sweep = commands.add_parser("sweep", parents=[common], help="Diameter table over k and h")
    sweep.add_argument("--potential", type=_potential, help="Reference potential")
    sweep.add_argument("--k-list", type=_float_list, help="Comma-separated wave numbers")
    sweep.add_argument("--h-list", type=_float_list, help="Comma-separated noise levels")
    sweep.add_argument("--noise-seed", type=int, help="Seed of the noise draw")

    noise = commands.add_parser("noise", parents=[common], help="Perturb a shift table")
    noise.add_argument("--targets", "--input", type=Path, help="Clean shift table")
    noise.add_argument("-k", "--k", type=float, help="Wave number when the table records none")
    noise.add_argument("--noise-h", type=float, help="Relative noise level h")
    noise.add_argument("--noise-seed", type=int, help="Seed of the noise draw")
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {"mode": args.mode}
    for flag in ("seed", "out", "workers", "potential", "k", "l_max", "targets", "k_list", "h_list", "plant"):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[flag] = str(value) if isinstance(value, Path) else value
    noise = {
        field: value
        for field, value in (("h", getattr(args, "noise_h", None)), ("seed", getattr(args, "noise_seed", None)))
        if value is not None
    }
    if noise:
        overrides["noise"] = noise
    if "workers" not in overrides and os.getenv("PHASE_WORKERS", "").strip():
        overrides["workers"] = int(os.environ["PHASE_WORKERS"])
    return overrides


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)

    debug_env = os.getenv("PHASE_DEBUG", "").strip().lower() in _TRUE
    debug = args.debug or debug_env
    logging.basicConfig(level=logging.INFO if debug else logging.WARNING)

    try:
        document = load_document(args.config) if args.config else None
        config = build_run_config(document, preset=args.preset, overrides=_overrides(args))
        logger.info("running %s with fingerprint %s", config.mode, config.fingerprint())
        written = COMMANDS[config.mode](config)
    except (IdentificationError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(written)
    return 0


if __name__ == "__main__":
    sys.exit(main())
