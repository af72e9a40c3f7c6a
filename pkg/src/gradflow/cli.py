"""Command-line front end: ``gradflow {spatial,temporal,solve}``.

Exit codes: 0 success, 2 argument error, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .stepper import StepError
from .study import (
    headline_rate,
    solve_manufactured,
    spatial_study,
    temporal_study,
    write_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3

log = logging.getLogger("gradflow")


def _number(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _number_list(text: str) -> list[float]:
    return [_number(t) for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradflow",
        description="Linearized backward Euler FEM for u_t - div(sigma(|grad u|^2) grad u) = g "
                    "on the unit square, with manufactured-solution convergence studies.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, lists):
        p.add_argument("--r", type=int, default=2, choices=(1, 2, 3), help="element degree")
        p.add_argument("--lambda", dest="lam", type=_number, default=1.0,
                       help="regularization parameter (> 0)")
        p.add_argument("--t-end", type=_number, default=1.0, help="final time T")
        if lists:
            p.add_argument("--out", type=Path, help="CSV output file (default stdout)")

    sp = sub.add_parser("spatial", help="error vs mesh size at fixed tau")
    common(sp, True)
    sp.add_argument("--tau", type=_number, default=2.0**-12, help="time step (e.g. 1/4096)")
    sp.add_argument("--m-list", type=_int_list, default=[8, 16, 32],
                    help="comma-separated subdivisions per side")

    tp = sub.add_parser("temporal", help="error over a (tau, M) grid")
    common(tp, True)
    tp.add_argument("--tau-list", type=_number_list, default=[1 / 8, 1 / 16, 1 / 32, 1 / 64],
                    help="comma-separated time steps (fractions allowed)")
    tp.add_argument("--m-list", type=_int_list, default=[8, 16, 32],
                    help="comma-separated subdivisions per side")

    so = sub.add_parser("solve", help="single run; prints one CSV record")
    common(so, False)
    so.add_argument("--m", type=int, required=True, help="subdivisions per side")
    so.add_argument("--tau", type=_number, required=True, help="time step")
    so.add_argument("--dump-solution", type=Path,
                    help="write 'x y value' per degree of freedom at the final time")
    so.add_argument("--dump-mesh", type=Path, help="write the mesh as 'v x y' / 't i j k' lines")
    return parser


def _emit(records, out: Path | None) -> None:
    if out is None:
        write_csv(records, sys.stdout)
    else:
        with open(out, "w", newline="\n") as fh:
            write_csv(records, fh)


def _dump_solution(field, path: Path) -> None:
    with open(path, "w", newline="\n") as fh:
        for (x, y), v in zip(field.space.dof_coords.tolist(), field.coeffs.tolist()):
            fh.write(f"{x!r} {y!r} {v!r}\n")


def run_command(args) -> int:
    if args.command == "spatial":
        records = spatial_study(args.r, args.lam, args.tau, args.m_list, args.t_end)
        _emit(records, args.out)
        rate = headline_rate(records)
        if rate is not None:
            log.info("finest-pair rate: %.3f", rate)
    elif args.command == "temporal":
        records = temporal_study(args.r, args.lam, args.tau_list, args.m_list, args.t_end)
        _emit(records, args.out)
    else:
        record, traj = solve_manufactured(args.m, args.r, args.lam, args.tau, args.t_end)
        write_csv([record], sys.stdout)
        log.info("%d steps, %d CG iterations", len(traj.reports), traj.total_iterations)
        if args.dump_solution:
            _dump_solution(traj.final, args.dump_solution)
        if args.dump_mesh:
            traj.final.space.mesh.dump(args.dump_mesh)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad usage
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return run_command(args)
    except StepError as exc:
        step = f" at step {exc.step_index}" if exc.step_index is not None else ""
        print(f"gradflow: solver did not converge{step}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"gradflow: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
