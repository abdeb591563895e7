"""
CloakBench - Main entry point for the regularized near-cloak benchmark.

Subcommands compute the layer decay exponents, run a single scattering
solve, sweep the regularization parameter and fit the far-field decay
rate, or export the physical material tensors of a cloak.
"""

import argparse
import json
import sys
import time
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from fractions import Fraction
from typing import Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from src.cloakmap import exponents, predicted_rates
from src.config import SolverConfig
from src.exceptions import CloakBenchError, ConfigurationError
from src.experiment_manager import ExperimentManager
from src.farnorms import l2_norm, pattern_frame, sup_norm
from src.schemas import Diagnostics, ExperimentConfig, SweepReport
from src.utils.logging_handler import DataLogger, SolveTracker, progress

# Load environment variables
load_dotenv()

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_EXPONENTS = 2
EXIT_SOLVER = 3
EXIT_SWEEP_FAIL = 4
EXIT_INTERRUPTED = 130


def _number(value):
    """Exact rationals print as ints when integral, floats otherwise."""
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else float(value)
    return value


def _parse_exponent(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigurationError(f"cannot read exponent '{text}': {exc}") from exc


def load_config(path: str) -> ExperimentConfig:
    """
    Read and validate a TOML experiment config.

    Raises:
        ConfigurationError: unreadable file or invalid TOML
        pydantic.ValidationError: schema violations, naming the offending key
    """
    try:
        with open(path, "rb") as file:
            raw = tomllib.load(file)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config '{path}': {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"config '{path}' is not valid TOML: {exc}") from exc
    return ExperimentConfig.model_validate(raw)


class CloakBench:
    """
    Orchestrates one CLI invocation.

    Owns the solve tracker and the data logger of the output directory and
    maps each subcommand to an exit code.
    """

    def __init__(self, out_dir: Optional[str] = None, threads: Optional[int] = None,
                 tolerance: Optional[float] = None):
        """
        Initialize CloakBench.

        Args:
            out_dir: Output directory; overrides the config's [output] dir
            threads: Worker processes; overrides config and environment
            tolerance: Slope allowance; overrides config and experiment default
        """
        self.out_dir = out_dir
        self.threads = threads
        self.tolerance = tolerance
        self.solve_tracker = SolveTracker()

    def _logger(self, config: Optional[ExperimentConfig] = None) -> DataLogger:
        if self.out_dir is not None:
            return DataLogger(self.out_dir)
        return DataLogger(config.output.dir if config is not None else "out")

    def _solver(self, config: Optional[ExperimentConfig] = None) -> SolverConfig:
        threads = self.threads
        if threads is None and config is not None:
            threads = config.sweep.threads
        return SolverConfig.from_env(threads=threads)

    def _tolerance(self, config: Optional[ExperimentConfig] = None) -> Optional[float]:
        if self.tolerance is not None:
            return self.tolerance
        return config.sweep.tolerance if config is not None else None

    def cmd_exponents(self, r: str, s: str, t: str) -> int:
        """Print {zeta1, zeta2, valid, rates} as JSON; exit 2 when zeta1 <= 0."""
        exps = exponents(_parse_exponent(r), _parse_exponent(s), _parse_exponent(t))
        rates = predicted_rates(exps)
        payload = {
            "zeta1": _number(exps.zeta1),
            "zeta2": _number(exps.zeta2),
            "valid": exps.valid,
            "rates": {
                "passive": _number(rates.passive),
                "active_core": _number(rates.active_core),
                "active_shell": _number(rates.active_shell),
            },
        }
        print(json.dumps(payload))
        return EXIT_OK if exps.valid else EXIT_EXPONENTS

    def cmd_solve(self, config: ExperimentConfig) -> int:
        """Write farfield.csv, coefficients.json and diagnostics.json for one solve."""
        logger = self._logger(config)
        outcome = ExperimentManager.solve(config, self._solver(config), self.solve_tracker)
        coeffs, pattern, energy = outcome.coeffs, outcome.pattern, outcome.energy

        diagnostics = Diagnostics(
            kind=coeffs.kind,
            omega=config.cloak.omega,
            cutoff=coeffs.N,
            tail_ratio=coeffs.tail_ratio(),
            energy_residual=None if energy is None else energy.residual,
            energy_lossless=None if energy is None else energy.lossless,
            absorbed=None if energy is None else energy.absorbed,
            flux_rhs=None if energy is None else energy.flux_rhs,
            cross_sections=None if outcome.sections is None else {
                "sca": outcome.sections.sca,
                "ext": outcome.sections.ext,
                "abs": outcome.sections.abs,
            },
            far_field_sup=sup_norm(pattern),
            far_field_l2=l2_norm(pattern),
            tracker=self.solve_tracker.get_summary(include_time=False),
        )
        logger.write_farfield_csv(pattern_frame(pattern))
        logger.write_json(coeffs.to_dict(), "coefficients.json")
        logger.write_json(diagnostics.model_dump(mode="json"), "diagnostics.json")

        line = f"N={coeffs.N} sup={diagnostics.far_field_sup!r}"
        if energy is not None:
            line += f" energy_residual={energy.residual!r}"
        print(line)
        return EXIT_OK

    def cmd_sweep(self, config: ExperimentConfig) -> int:
        """Write sweep.json and sweep.csv; print the slope summary line."""
        if config.cloak is not None and config.kind in ("sweep", "cloak-bust") and not config.cloak.exponents.valid:
            exps = config.cloak.exponents
            print(f"Error: invalid exponents (r, s, t) = ({config.cloak.r}, {config.cloak.s}, {config.cloak.t}), "
                  f"zeta1 = {_number(exps.zeta1)} <= 0", file=sys.stderr)
            return EXIT_EXPONENTS
        solver = self._solver(config)
        result = ExperimentManager.run_sweep(config, solver, solver.resolved_threads(),
                                             self._tolerance(config), self.solve_tracker)
        self._write_sweep(self._logger(config), result, config.model_dump(mode="json"))
        return EXIT_OK if result.passed else EXIT_SWEEP_FAIL

    def cmd_selftest(self, spec: str) -> int:
        """Run the synthetic power-law sweep given as 'powerlaw:<p>'."""
        name, _, value = spec.partition(":")
        if name != "powerlaw" or not value:
            raise ConfigurationError(f"unknown selftest '{spec}', expected 'powerlaw:<p>'")
        try:
            power = float(value)
        except ValueError as exc:
            raise ConfigurationError(f"selftest power '{value}' is not a number") from exc
        solver = self._solver()
        result = ExperimentManager.selftest(power, None, solver.resolved_threads(),
                                            self._tolerance(), self.solve_tracker)
        self._write_sweep(self._logger(), result, {"selftest": spec})
        return EXIT_OK if result.passed else EXIT_SWEEP_FAIL

    def _write_sweep(self, logger: DataLogger, result, config_echo: dict) -> None:
        report = SweepReport.from_result(result, config_echo)
        logger.write_json(report.model_dump(mode="json"), "sweep.json")
        logger.write_sweep_csv(result.rho_values, result.norms)
        print(result.summary_line())

    def cmd_export_tensors(self, config: ExperimentConfig) -> int:
        """Write tensors.csv for the [export] grid."""
        logger = self._logger(config)
        frame = ExperimentManager.export_tensors(config)
        path = logger.write_tensor_csv(frame)
        print(f"wrote {len(frame)} rows to {path}")
        return EXIT_OK

    def run(self, args: argparse.Namespace) -> int:
        """Dispatch parsed arguments and translate module errors to exit codes."""
        config = None
        start = time.perf_counter()
        try:
            if args.selftest is not None and args.command is None:
                code = self.cmd_selftest(args.selftest)
            elif args.command == "exponents":
                code = self.cmd_exponents(args.r, args.s, args.t)
            elif args.command is None:
                raise ConfigurationError("no subcommand given")
            else:
                config = load_config(args.config)
                handler = {
                    "solve": self.cmd_solve,
                    "sweep": self.cmd_sweep,
                    "export-tensors": self.cmd_export_tensors,
                }[args.command]
                code = handler(config)
        except ValidationError as exc:
            print(f"Error: ConfigurationError: {exc}", file=sys.stderr)
            code = EXIT_CONFIG
        except ConfigurationError as exc:
            print(f"Error: {type(exc).__name__}: {exc}", file=sys.stderr)
            code = EXIT_CONFIG
        except CloakBenchError as exc:
            print(f"Error: {type(exc).__name__}: {exc}", file=sys.stderr)
            code = EXIT_SOLVER

        progress(f"done in {time.perf_counter() - start:.2f}s, exit {code}")
        if args.command not in (None, "exponents") or self.out_dir is not None:
            self._logger(config).log_run(
                command=args.command or f"selftest {args.selftest}",
                config=getattr(args, "config", "") or "",
                exit_code=code,
                summary=json.dumps(self.solve_tracker.get_summary(include_time=False)),
            )
        return code


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors (exit 1), not argparse's exit 2."""

    def error(self, message):
        raise ConfigurationError(message)


def _add_global_flags(parser: argparse.ArgumentParser, default) -> None:
    parser.add_argument("--out", default=default, help="Output directory")
    parser.add_argument("--threads", type=int, default=default, help="Worker processes, 0 = all cores")
    parser.add_argument("--tolerance", type=float, default=default, help="Slope allowance below the prediction")
    parser.add_argument("--selftest", default=default, metavar="powerlaw:P",
                        help="Synthetic sweep with norms 7 rho^P")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cloakbench", description=__doc__.strip().splitlines()[0])
    _add_global_flags(parser, None)
    flags = _Parser(add_help=False)
    _add_global_flags(flags, argparse.SUPPRESS)

    commands = parser.add_subparsers(dest="command", parser_class=_Parser)
    exps = commands.add_parser("exponents", parents=[flags], help="Layer decay exponents and predicted rates")
    exps.add_argument("-r", required=True, help="eps layer exponent (int, decimal or p/q)")
    exps.add_argument("-s", required=True, help="sigma layer exponent")
    exps.add_argument("-t", required=True, help="mu layer exponent")
    for name, text in (
        ("solve", "Single solve with far field and diagnostics"),
        ("sweep", "Rate sweep, small-inclusion sweep or cloak-bust"),
        ("export-tensors", "Physical eps, mu, sigma on a grid"),
    ):
        sub = commands.add_parser(name, parents=[flags], help=text)
        sub.add_argument("--config", required=True, help="TOML experiment config")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """Entry point for the application."""
    try:
        args = build_parser().parse_args(argv)
    except ConfigurationError as exc:
        print(f"Error: ConfigurationError: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    bench = CloakBench(out_dir=args.out, threads=args.threads, tolerance=args.tolerance)
    try:
        return bench.run(args)
    except KeyboardInterrupt:
        print("\nProgram interrupted by user.", file=sys.stderr)
        return EXIT_INTERRUPTED


if __name__ == "__main__":
    sys.exit(main())
