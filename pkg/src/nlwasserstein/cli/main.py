"""Command line entry point

Subcommands: distance, geodesic, certify, converge, hj-lower, nonlocalize and kernel-info. Each
reads a JSON run configuration, writes its outputs and the resolved configuration to the output
directory and returns an exit code: 0 on success, 1 on configuration, resolution or other
precondition errors, 2 when the solver hits its iteration limit, 3 on an infinite cost and 4
when a certificate or an envelope fails.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys

from pathlib import Path
from typing import Callable, Optional

import pandas as pd

from nlwasserstein import __version__
from nlwasserstein.certify.certificates import (
    CertifyContext,
    assembled_constants,
    available_batteries,
    run_battery,
)
from nlwasserstein.certify.experiments import converge_experiment
from nlwasserstein.cli.config import RunConfig, load_config
from nlwasserstein.cli.outputs import (
    output_dir,
    path_frame,
    plot_convergence,
    plot_geodesic,
    write_certificates,
    write_document,
    write_table,
)
from nlwasserstein.dynamics.nonlocalize import refinement_study
from nlwasserstein.reference.hamilton_jacobi import hj_lower_bound
from nlwasserstein.solver.solve import SolveReport, solve, solve_smoothed
from nlwasserstein.space.discrete_space import DiscreteSpace
from nlwasserstein.utils.errors import ConfigError, DivergenceError, NlwError
from nlwasserstein.utils.types import SolveStatus


log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MAX_ITERS = 2
EXIT_INFINITE = 3
EXIT_FAILED = 4

RATE_BAND = (1.4, 2.6)

STATUS_CODES = {
    SolveStatus.converged: EXIT_OK,
    SolveStatus.max_iters: EXIT_MAX_ITERS,
    SolveStatus.infinite_cost: EXIT_INFINITE,
    SolveStatus.infeasible: EXIT_ERROR,
}


def _set_thread_env(n: int) -> None:

    for name in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "VECLIB_MAXIMUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(name, str(n))


def _summary(report: SolveReport) -> str:
    return f"distance={report.distance:.6f} status={report.status.value}"


def _solve(config: RunConfig, out: Path) -> tuple[SolveReport, DiscreteSpace]:

    space = config.build_space()
    mu0, mu1 = config.build_measures(space)
    report = solve(space, config.build_theta(), mu0, mu1, config.solver)
    write_document(report.to_dict(), out / "report.json")
    report.trace_to_csv(out / "trace.csv")
    print(_summary(report))

    return report, space


def cmd_distance(config: RunConfig, args: argparse.Namespace) -> int:

    out = output_dir(args.out)
    report, space = _solve(config, out)
    if report.path is not None:
        write_table(path_frame(space, report.path), out / "geodesic.csv")

    return STATUS_CODES[report.status]


def cmd_geodesic(config: RunConfig, args: argparse.Namespace) -> int:

    out = output_dir(args.out)
    report, space = _solve(config, out)
    if not report.converged or report.path is None:
        print(f"No geodesic: {report.message}", file=sys.stderr)
        return STATUS_CODES[report.status]
    write_table(path_frame(space, report.path), out / "geodesic.csv")
    write_table(report.to_dataframe(), out / "geodesic_actions.csv")
    plot_geodesic(space, report.path, out / "geodesic.svg")

    return EXIT_OK


def cmd_certify(config: RunConfig, args: argparse.Namespace) -> int:

    which = config.which if args.which is None else args.which
    if which == "":
        print("\n".join(available_batteries()))
        return EXIT_OK
    if which not in available_batteries():
        raise ConfigError(f"Unknown certificate selector '{which}'")

    out = output_dir(args.out)
    space = config.build_space()
    mu0, mu1 = config.build_measures(space)
    context = CertifyContext(space, config.build_theta(), mu0.values, mu1.values, config.solver)
    certificates = run_battery(context, which, threads=args.threads)
    frame = write_certificates(certificates, out)
    print(frame[["name", "lhs", "rhs", "margin", "pass"]].to_string(index=False))

    failed = frame[~frame["pass"].astype(bool)]
    if not failed.empty:
        print(failed.to_string(index=False), file=sys.stderr)
        return EXIT_FAILED

    return EXIT_OK


def cmd_converge(config: RunConfig, args: argparse.Namespace) -> int:

    if not config.eps_list:
        raise ConfigError("The converge command needs a non-empty 'eps_list'")
    kernel = config.build_kernel()
    if kernel is None or config.space["kind"] != "grid":
        raise ConfigError("The converge command needs a grid space and a kernel")

    out = output_dir(args.out)
    table = converge_experiment(
        config.build_theta(),
        kernel,
        config.mu0,
        config.mu1,
        config.eps_list,
        extent=float(config.space["extent"]),
        spacing=config.spacing,
        config=config.solver,
    )
    write_table(table.frame, out / "converge.csv")
    write_document(
        {k: v for k, v in table.to_dict().items() if k != "rows"}, out / "converge.json"
    )
    plot_convergence(table, out / "converge.svg")
    columns = ["eps", "scaled", "w2", "error", "upper_ok", "lower_ok"]
    print(table.frame[columns].to_string(index=False))

    if not table.holds:
        print("Envelope violated:", file=sys.stderr)
        print(table.frame.to_string(index=False), file=sys.stderr)
        return EXIT_FAILED

    return EXIT_OK


def cmd_hj_lower(config: RunConfig, args: argparse.Namespace) -> int:

    out = output_dir(args.out)
    space = config.build_space()
    if space.kernel is None:
        raise ConfigError("The hj-lower command needs a space built from a kernel")
    theta = config.build_theta()
    mu0, mu1 = config.build_measures(space)

    report = solve(space, theta, mu0, mu1, config.solver)
    if report.status != SolveStatus.converged:
        print(_summary(report), file=sys.stderr)
        return STATUS_CODES[report.status]
    s = math.sqrt(space.kernel.scale)
    smoothed = solve_smoothed(space, theta, mu0, mu1, s, config.solver)
    result = hj_lower_bound(
        space,
        theta,
        mu0,
        mu1,
        report.distance,
        smoothed.distance,
        n_times=int(config.hj["n_times"]),
        n_samples=int(config.hj["n_samples"]),
        seed=config.seed,
    )
    write_document(result.to_dict(), out / "hj_lower.json")
    write_table(result.to_dataframe(), out / "hj_lower.csv")
    write_table(result.subsolution.lhs, out / "hj_subsolution.csv")
    print(f"lower_bound={result.lower_bound:.6f} headline_margin={result.headline_margin:.6f}")

    return EXIT_OK if result.holds else EXIT_FAILED


def cmd_nonlocalize(config: RunConfig, args: argparse.Namespace) -> int:
    """Grid refinement of the nonlocal residual for a translating bump on a periodic ring."""

    kernel = config.build_kernel()
    if kernel is None or kernel.dim != 1:
        raise ConfigError("The nonlocalize command needs a one-dimensional kernel")
    opts = config.nonlocalize

    frame = refinement_study(
        kernel,
        opts["n_list"],
        float(config.space.get("extent", 1.0)),
        float(opts["start"]),
        float(opts["velocity"]),
        float(opts["width"]),
        int(opts["time_steps"]),
    )
    out = output_dir(args.out)
    write_table(frame, out / "nonlocalize.csv")
    print(frame.to_string(index=False))

    ratios = frame["ratio"].iloc[1:]
    rate_ok = bool(ratios.between(*RATE_BAND).all())
    control_ok = bool(frame["control_residual"].min() > frame["residual"].max())
    print(f"first_order={rate_ok} control_floor={control_ok}")

    return EXIT_OK if rate_ok and control_ok else EXIT_FAILED


def cmd_kernel_info(config: RunConfig, args: argparse.Namespace) -> int:

    kernel = config.build_kernel()
    if kernel is None:
        raise ConfigError("The kernel-info command needs a kernel specification")
    theta = config.build_theta()

    moments = {}
    for p in range(6):
        try:
            moments[f"M{p}"] = kernel.unscaled().moment(p)
        except DivergenceError:
            moments[f"M{p}"] = math.inf
    frame = pd.concat(
        [
            pd.DataFrame({"constant": list(moments), "value": list(moments.values())}),
            assembled_constants(theta, kernel, diameter=float(config.space.get("extent", 1.0))),
        ],
        ignore_index=True,
    )
    out = output_dir(args.out)
    write_table(frame, out / "kernel_info.csv")
    print(frame.to_string(index=False))

    return EXIT_OK


COMMANDS: dict[str, Callable[[RunConfig, argparse.Namespace], int]] = {
    "distance": cmd_distance,
    "geodesic": cmd_geodesic,
    "certify": cmd_certify,
    "converge": cmd_converge,
    "hj-lower": cmd_hj_lower,
    "nonlocalize": cmd_nonlocalize,
    "kernel-info": cmd_kernel_info,
}


def build_parser() -> argparse.ArgumentParser:

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, required=True, help="JSON run configuration.")
    common.add_argument("--out", type=str, default="out", help="Output directory.")
    common.add_argument("--threads", type=int, default=1, help="Maximum number of workers.")
    common.add_argument("--seed", type=int, default=None, help="Overrides the configured seed.")
    common.add_argument(
        "--which", type=str, default=None, help="Certificate selector, empty to list them."
    )
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true")
    verbosity.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(
        prog="nlwasserstein",
        description="Nonlocal Wasserstein distances and certificates of their estimates.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])

    return parser


def main(argv: Optional[list[str]] = None) -> int:

    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("--threads must be at least 1", file=sys.stderr)
        return EXIT_ERROR
    _set_thread_env(args.threads)

    try:
        config = load_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
        config.echo(output_dir(args.out))
        return COMMANDS[args.command](config, args)
    except NlwError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
