"""Command-line entry point.

Exit codes: 0 success (``check``: every claim passed), 1 usage error,
2 validation error, 3 numerical failure, 4 I/O error.  ``check`` exits 5
when it ran cleanly but at least one claim failed.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from .errors import NumericalFailure, PostSelectionExtinct, ValidationError
from .io import FORMATS, RunConfig, load_config, write_table
from .model import build_hamiltonian
from .scenarios import (
    PT_RELATIVE_TOLERANCE, SCENARIO_NAMES, SWEEPABLE, ScenarioSpec, SweepResult, check_claims,
    named_scenario, run_scenario, time_grid,
)
from .evolution import spectrum

log = logging.getLogger("nhentangle")

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO, EXIT_CLAIMS_FAILED = range(6)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _physics_options() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("system (rates in units of J; flags override --config)")
    g.add_argument("--config", metavar="FILE", help="JSON run configuration")
    g.add_argument("--qubits", type=int, help="number of qubits")
    g.add_argument("--omega", type=_float_list, help="drive Ω (one value, or one per qubit)")
    g.add_argument("--gamma", type=_float_list, help="decay γ (one value, or one per qubit)")
    g.add_argument("--delta", type=_float_list, help="detuning Δ (one value, or one per qubit)")
    g.add_argument("--coupling", type=float, help="uniform all-to-all coupling J_jk")
    g.add_argument("--tmax", type=float, help="final time Jt")
    g.add_argument("--steps", type=int, help="number of time points")
    g.add_argument("--init", help="all-f | all-e | ghz | spin-coherent:PHI (e.g. 0.288pi)")
    return p


def _output_options() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--format", choices=FORMATS, help="table format (default: csv)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nhentangle", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    phys, out = _physics_options(), _output_options()

    sub.add_parser("simulate", parents=[phys, out], help="time series for one configuration")

    sw = sub.add_parser("sweep", parents=[phys, out], help="sweep one parameter over a time grid")
    sw.add_argument("--param", required=True, choices=SWEEPABLE)
    values = sw.add_mutually_exclusive_group(required=True)
    values.add_argument("--values", type=_float_list, help="comma-separated values")
    values.add_argument("--range", type=_float_list, metavar="START,STOP,NUM",
                        help="NUM evenly spaced values from START to STOP")

    sc = sub.add_parser("scenario", parents=[out], help="reproduce a named figure panel")
    sc.add_argument("name", choices=SCENARIO_NAMES)
    sc.add_argument("--steps", type=int, default=None, help="time points (time-resolved panels)")
    sc.add_argument("--points", type=int, default=None, help="γ points (γ-sweep panels)")
    sc.add_argument("--workers", type=int, default=None, help="evaluate parameter tuples in parallel")

    sp = sub.add_parser("spectrum", parents=[phys, out], help="eigenvalues and PT classification")
    sp.add_argument("--rel-tol", type=float, default=PT_RELATIVE_TOLERANCE,
                    help="tolerance relative to the spectral radius")

    sub.add_parser("check", parents=[out], help="evaluate the quantitative claims")
    return parser


def _run_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    changes = {}
    if args.qubits is not None:
        changes["n_qubits"] = args.qubits
    for name in ("omega", "gamma", "delta"):
        value = getattr(args, name)
        if value is not None:
            changes[name] = value[0] if len(value) == 1 else tuple(value)
    if args.coupling is not None:
        changes["coupling"] = args.coupling
    for name in ("tmax", "steps", "init", "out", "format"):
        value = getattr(args, name, None)
        if value is not None:
            changes[name] = value
    return replace(cfg, **changes).validated()


def _spec_from_config(cfg: RunConfig, name: str, parameters=()) -> ScenarioSpec:
    return ScenarioSpec(
        name=name,
        config=cfg.system(),
        parameters=tuple(parameters),
        times=time_grid(cfg.tmax, cfg.steps),
        initial_state=cfg.init,
        observables=cfg.observables,
    )


def _cmd_simulate(args):
    cfg = _run_config(args)
    result = run_scenario(_spec_from_config(cfg, "custom"))
    result.metadata["config"] = _config_metadata(cfg)
    return result, cfg.format, cfg.out


def _cmd_sweep(args):
    cfg = _run_config(args)
    if args.values is not None:
        values = args.values
    else:
        if len(args.range) != 3 or args.range[2] < 1 or args.range[2] != int(args.range[2]):
            raise UsageError("--range expects START,STOP,NUM with integer NUM ≥ 1")
        values = list(np.linspace(args.range[0], args.range[1], int(args.range[2])))
    result = run_scenario(_spec_from_config(cfg, "custom", [(args.param, values)]))
    result.metadata["config"] = _config_metadata(cfg)
    return result, cfg.format, cfg.out


def _cmd_scenario(args):
    kwargs = {}
    if args.steps is not None:
        kwargs["steps"] = args.steps
    if args.points is not None:
        kwargs["gamma_points"] = args.points
    result = run_scenario(named_scenario(args.name, **kwargs), max_workers=args.workers)
    return result, args.format or "csv", args.out


def _cmd_spectrum(args):
    cfg = _run_config(args)
    H = build_hamiltonian(cfg.system())
    radius = float(np.abs(np.linalg.eigvals(H)).max())
    rep = spectrum(H, args.rel_tol * radius if radius > 0 else args.rel_tol)
    rows = [{"index": k, "re": float(z.real), "im": float(z.imag)}
            for k, z in enumerate(rep.eigenvalues)]
    metadata = {
        "is_pt_symmetric_phase": rep.is_pt_symmetric_phase,
        "imag_spread": rep.imag_spread,
        "residual_imag": rep.residual_imag,
        "tolerance": rep.tolerance,
        "eigenvalues": [complex(z) for z in rep.eigenvalues],
        "config": _config_metadata(cfg),
    }
    label = "PT-symmetric (unbroken)" if rep.is_pt_symmetric_phase else "PT-broken"
    print(f"{label}: residual imag {rep.residual_imag:.3e} vs tolerance {rep.tolerance:.3e}",
          file=sys.stderr)
    return SweepResult(["index", "re", "im"], rows, metadata), cfg.format, cfg.out


def _cmd_check(args):
    claims = check_claims()
    width = max(len(c.id) for c in claims)
    for c in claims:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.id:<{width}}  measured={c.measured:.6g}  expected {c.expected}",
              file=sys.stderr if args.out is None and args.format else sys.stdout)
    if args.format or args.out:
        rows = [{"id": c.id, "passed": c.passed, "measured": c.measured, "expected": c.expected}
                for c in claims]
        result = SweepResult(["id", "passed", "measured", "expected"], rows,
                             {"all_passed": all(c.passed for c in claims)})
        write_table(result, args.format or "csv", args.out)
    return EXIT_OK if all(c.passed for c in claims) else EXIT_CLAIMS_FAILED


def _config_metadata(cfg: RunConfig) -> dict:
    return {k: getattr(cfg, k) for k in ("n_qubits", "delta", "gamma", "omega", "coupling",
                                         "init", "tmax", "steps")}


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "scenario": _cmd_scenario,
    "spectrum": _cmd_spectrum,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        if args.command == "check":
            return _cmd_check(args)
        result, fmt, out = _COMMANDS[args.command](args)
        write_table(result, fmt, out)
        if out:
            log.info("wrote %d rows to %s", len(result.rows), out)
        return EXIT_OK
    except UsageError as exc:
        print(exc, file=sys.stderr)
        print(parser.format_usage(), end="", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalFailure, PostSelectionExtinct) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
