"""Convergence studies on the manufactured problem and their CSV records."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .assembly import l2_error
from .coeff import DiffusionParams
from .felib import build_space, default_rules
from .mesh import build_mesh
from .mms import ManufacturedProblem
from .stepper import StepperConfig, Trajectory, run

CSV_FIELDS = ("m", "h", "tau", "r", "lambda", "l2_error", "rate")


@dataclass(frozen=True)
class StudyRecord:
    m: int
    h: float
    tau: float
    r: int
    lam: float
    l2_error: float
    rate: float | None = None


def solve_manufactured(m: int, r: int, lam: float, tau: float, t_end: float = 1.0,
                       **config) -> tuple[StudyRecord, Trajectory]:
    """Run the scheme on the manufactured problem and measure the final L2 error."""
    mesh = build_mesh(m)
    space = build_space(mesh, r)
    rule, err_rule = default_rules(r)
    problem = ManufacturedProblem(DiffusionParams(lam))
    cfg = StepperConfig(tau=tau, t_end=t_end, params=problem.params, **config)
    traj = run(space, rule, cfg, problem.u0, problem.g)
    t_final = cfg.n_steps * tau
    err = l2_error(traj.final, lambda x, y: problem.u(x, y, t_final), err_rule)
    return StudyRecord(m, mesh.h, tau, r, problem.params.lam, err), traj


def _is_dyadic(values: Sequence[float], increasing: bool) -> bool:
    for prev, this in zip(values, values[1:]):
        ratio = this / prev if increasing else prev / this
        if not math.isclose(ratio, 2.0, rel_tol=1e-12):
            return False
    return True


def compute_rates(records: Sequence[StudyRecord], axis: str) -> list[StudyRecord]:
    """Fill ``rate = log2(e_prev / e_this)`` along one refinement chain.

    ``axis="mesh"`` requires ``m`` doubling between rows, ``axis="time"``
    requires ``tau`` halving. The first row gets no rate.
    """
    if axis == "mesh":
        ok = _is_dyadic([rec.m for rec in records], increasing=True)
    elif axis == "time":
        ok = _is_dyadic([rec.tau for rec in records], increasing=False)
    else:
        raise ValueError(f"axis must be 'mesh' or 'time', got {axis!r}")
    if not ok:
        raise ValueError(f"records are not a dyadic refinement chain along {axis!r}")
    out = []
    for k, rec in enumerate(records):
        rate = None
        if k > 0:
            prev = records[k - 1].l2_error
            rate = math.log2(prev / rec.l2_error) if rec.l2_error > 0 and prev > 0 else math.nan
        out.append(replace(rec, rate=rate))
    return out


def headline_rate(records: Sequence[StudyRecord]) -> float | None:
    """Rate of the finest pair, i.e. the last record's rate."""
    return records[-1].rate if records else None


def spatial_study(r: int, lam: float, tau: float, m_list: Sequence[int], t_end: float = 1.0,
                  **config) -> list[StudyRecord]:
    m_list = list(m_list)
    if not m_list or any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ValueError("m_list must be nonempty and strictly increasing")
    records = [solve_manufactured(m, r, lam, tau, t_end, **config)[0] for m in m_list]
    if len(records) > 1 and _is_dyadic(m_list, increasing=True):
        records = compute_rates(records, "mesh")
    return records


def temporal_study(r: int, lam: float, tau_list: Sequence[float], m_list: Sequence[int],
                   t_end: float = 1.0, **config) -> list[StudyRecord]:
    """Full (M, tau) grid, M-major; rates along tau when ``tau_list`` halves each time."""
    tau_list, m_list = list(tau_list), list(m_list)
    if not tau_list or not m_list:
        raise ValueError("tau_list and m_list must be nonempty")
    dyadic = len(tau_list) > 1 and _is_dyadic(tau_list, increasing=False)
    records = []
    for m in m_list:
        chain = [solve_manufactured(m, r, lam, tau, t_end, **config)[0] for tau in tau_list]
        records += compute_rates(chain, "time") if dyadic else chain
    return records


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return format(value, ".17g")


def write_csv(records: Iterable[StudyRecord], stream) -> None:
    stream.write(",".join(CSV_FIELDS) + "\n")
    for rec in records:
        row = (rec.m, rec.h, rec.tau, rec.r, rec.lam, rec.l2_error, rec.rate)
        stream.write(",".join(_fmt(v) for v in row) + "\n")


def records_to_csv(records: Iterable[StudyRecord]) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


def read_csv(stream) -> list[StudyRecord]:
    reader = csv.DictReader(stream)
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [
        StudyRecord(
            m=int(row["m"]),
            h=float(row["h"]),
            tau=float(row["tau"]),
            r=int(row["r"]),
            lam=float(row["lambda"]),
            l2_error=float(row["l2_error"]),
            rate=float(row["rate"]) if row["rate"] else None,
        )
        for row in reader
    ]
