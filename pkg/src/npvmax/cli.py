"""Command-line entry points: figure1, region, converge, allocate.

Each subcommand accepts ``--config FILE`` with a flat ``key = value``
format mirroring the flag names; explicit flags override file values, and
all defaults reproduce the reference experiment. Exit codes: 0 success,
2 config error, 3 no root found, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from typing import Callable

from .errors import ConfigError, ConvergenceError, InternalCheckError, NoRootError
from .experiments import (
    AllocateConfig,
    ConvergeConfig,
    ExperimentTable,
    Figure1Config,
    RegionConfig,
    allocation_report,
    convergence_study,
    internal_rate_curves,
    region_map,
    render_csv,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_ROOT = 3
EXIT_INTERNAL = 4


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from None


# Per-command flag tables: flag name -> (value parser, help text). The
# argparse surface and the config-file key set both derive from these.
_DIST_FLAGS = {
    "alpha": (float, "beta shape parameter for coupon rates"),
    "beta": (float, "beta shape parameter for coupon rates"),
    "gamma": (float, "mean of the exponential attenuation rates"),
    "v": (float, "cash-flow noise variance per project"),
}

_COMMAND_FLAGS: dict[str, dict[str, tuple[Callable, str]]] = {
    "figure1": {
        "t-max": (int, "largest maturity on the curve"),
        **_DIST_FLAGS,
        "tau-norm": (float, "concentration cap normalized by m**2"),
        "workers": (int, "parallel worker count"),
    },
    "region": {
        "r-min": (float, "lowest interest rate on the grid"),
        "r-max": (float, "highest interest rate on the grid"),
        "r-step": (float, "interest-rate grid step"),
        "t-max": (int, "largest maturity on the grid"),
        **_DIST_FLAGS,
        "tau-norm": (float, "concentration cap normalized by m**2"),
        "workers": (int, "parallel worker count"),
    },
    "converge": {
        "n-list": (_parse_int_list, "comma-separated portfolio sizes"),
        "seeds": (int, "number of seeds per portfolio size"),
        "base-seed": (int, "first seed"),
        "r": (float, "interest rate"),
        "t-mat": (int, "maturity in periods"),
        "m": (float, "budget per project"),
        "tau-norm": (float, "concentration cap normalized by m**2"),
        **_DIST_FLAGS,
        "noise-family": (str, "gaussian, uniform, or rademacher"),
        "workers": (int, "parallel worker count"),
    },
    "allocate": {
        "ensemble": (str, "ensemble CSV path (header c,lambda,v)"),
        "n": (int, "number of projects to sample"),
        **_DIST_FLAGS,
        "seed": (int, "seed for the sampled ensemble and its noise"),
        "r": (float, "interest rate"),
        "t-mat": (int, "maturity in periods"),
        "m": (float, "budget per project"),
        "tau-norm": (float, "concentration cap normalized by m**2"),
        "noise-family": (str, "gaussian, uniform, or rademacher"),
        "verify": (_parse_bool, "cross-check the closed form against the iterative oracle"),
    },
}

_COMMAND_HELP = {
    "figure1": "internal-rate curves of both limit values versus maturity",
    "region": "sign region (a, b, or c) over an (r, T) grid",
    "converge": "self-averaging study of the finite-N optimum",
    "allocate": "optimal allocation report for one ensemble",
}

_CONFIG_TYPES = {
    "figure1": Figure1Config,
    "region": RegionConfig,
    "converge": ConvergeConfig,
    "allocate": AllocateConfig,
}

_BUILDERS: dict[str, Callable] = {
    "figure1": internal_rate_curves,
    "region": region_map,
    "converge": convergence_study,
    "allocate": allocation_report,
}

# Flags whose sampled-ensemble meaning conflicts with --ensemble.
_SAMPLING_FLAGS = {"alpha", "beta", "gamma", "n"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="npvmax",
        description="Optimal project-portfolio NPV experiments (CSV on stdout or --out).",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, flags in _COMMAND_FLAGS.items():
        sub = subparsers.add_parser(command, help=_COMMAND_HELP[command])
        for flag, (caster, help_text) in flags.items():
            if caster is _parse_bool:
                sub.add_argument(f"--{flag}", action="store_true", default=None, help=help_text)
            else:
                sub.add_argument(f"--{flag}", type=caster, default=None, help=help_text)
        sub.add_argument("--config", default=None, help="key = value file mirroring the flags")
        sub.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    return parser


def _read_config_file(path: str, casters: dict[str, tuple[Callable, str]]) -> dict[str, object]:
    try:
        with open(path, "r") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values: dict[str, object] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', found {raw!r}")
        key = key.strip()
        value = value.strip()
        if key not in casters:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        caster = casters[key][0]
        try:
            values[key] = caster(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return values


def _resolve_config(command: str, args: argparse.Namespace):
    flags = _COMMAND_FLAGS[command]
    resolved: dict[str, object] = {}
    explicit: set[str] = set()
    if args.config is not None:
        file_values = _read_config_file(args.config, flags)
        resolved.update(file_values)
        explicit.update(file_values)
    for flag in flags:
        value = getattr(args, flag.replace("-", "_"))
        if value is not None:
            resolved[flag] = value
            explicit.add(flag)
    if command == "allocate" and "ensemble" in explicit:
        clash = sorted(explicit & _SAMPLING_FLAGS)
        if clash:
            raise ConfigError(
                "--ensemble is incompatible with sampling flags: "
                + ", ".join(f"--{name}" for name in clash)
            )
    kwargs = {key.replace("-", "_"): value for key, value in resolved.items()}
    try:
        return _CONFIG_TYPES[command](**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _emit(table: ExperimentTable, out: str | None) -> None:
    text = render_csv(table)
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        cfg = _resolve_config(args.command, args)
        table = _BUILDERS[args.command](cfg)
        _emit(table, args.out)
        return EXIT_OK
    except ConfigError as exc:
        print(f"npvmax: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"npvmax: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoRootError as exc:
        print(f"npvmax: no root: {exc}", file=sys.stderr)
        return EXIT_NO_ROOT
    except (InternalCheckError, ConvergenceError) as exc:
        print(f"npvmax: internal check failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
