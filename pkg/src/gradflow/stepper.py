"""Linearized backward Euler time stepping.

Each step solves ``(M/tau + K(U^n)) U^{n+1} = (M/tau) U^n + b(g^{n+1})`` where
``K(U^n)`` carries the coefficient frozen at the previous level, so there is
exactly one linear solve per step and no inner iteration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .assembly import assemble_load, assemble_mass, assemble_stiffness
from .coeff import DiffusionParams
from .felib import FeField, FeSpace, interpolate
from .quadrature import QuadratureRule
from .sparsela import SolveReport, cg_solve

log = logging.getLogger(__name__)

DEFAULT_REL_TOL = 1e-12


class StepError(RuntimeError):
    """The linear solve of a time step did not converge."""

    def __init__(self, message, report: SolveReport, step_index: int | None = None):
        super().__init__(message)
        self.report = report
        self.step_index = step_index


@dataclass(frozen=True)
class StepperConfig:
    tau: float
    t_end: float
    params: DiffusionParams
    rel_tol: float = DEFAULT_REL_TOL
    max_iter: int | None = None   # None -> 10 * ndof
    store_every: int = 0          # 0 keeps only the final field

    def __post_init__(self):
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau!r}")
        if not self.t_end > 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end!r}")
        n = self.t_end / self.tau
        if round(n) < 1 or abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError(f"t_end/tau = {n} is not a positive integer")
        if self.store_every < 0:
            raise ValueError("store_every must be nonnegative")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.tau))


@dataclass
class Trajectory:
    times: np.ndarray
    final: FeField
    reports: list[SolveReport]
    stored: dict[int, FeField] = field(default_factory=dict)

    @property
    def total_iterations(self) -> int:
        return sum(r.iterations for r in self.reports)


def initial_field(space: FeSpace, u0) -> FeField:
    return interpolate(space, u0)


def _mass(space, rule):
    key = ("mass", id(rule))
    hit = space.cached(key, lambda: (rule, assemble_mass(space, rule)))
    if hit[0] is not rule:
        space._cache.pop(key)
        return _mass(space, rule)
    return hit[1]


def step(space: FeSpace, rule: QuadratureRule, params: DiffusionParams, u_prev: FeField, g_next,
         tau: float, rel_tol: float = DEFAULT_REL_TOL, max_iter: int | None = None, guess=None):
    """Advance one step; ``g_next(x, y)`` is the forcing at the new time level.

    ``guess`` seeds CG (default ``u_prev``); it affects the iteration count only.
    """
    if not tau > 0.0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    mass = _mass(space, rule)
    stiff = assemble_stiffness(space, rule, u_prev, params)
    system = mass.combine(1.0 / tau, stiff, 1.0)
    rhs = mass.matvec(u_prev.coeffs) / tau + assemble_load(space, rule, g_next)
    x0 = u_prev.coeffs if guess is None else guess
    x, report = cg_solve(system, rhs, x0, rel_tol=rel_tol, max_iter=max_iter)
    if not report.converged:
        raise StepError(
            f"CG stopped after {report.iterations} iterations at relative residual "
            f"{report.final_relative_residual:.3e}", report)
    return FeField(space, x), report


def _extrapolate(current, history):
    # polynomial extrapolation in time of the last levels as CG starting point
    if len(history) >= 2:
        return 3.0 * (current - history[0]) + history[1]
    if history:
        return 2.0 * current - history[0]
    return current


def run(space: FeSpace, rule: QuadratureRule, config: StepperConfig, u0, g) -> Trajectory:
    """March from ``U^0 = interpolant of u0`` to ``t_end``; ``g(x, y, t)`` is sampled at ``t^{n+1}``."""
    n_steps = config.n_steps
    tau = config.tau
    u = initial_field(space, u0)
    stored = {0: u} if config.store_every else {}
    reports = []
    history = []  # up to two levels before the current one
    for n in range(n_steps):
        t_next = (n + 1) * tau
        try:
            u_next, report = step(space, rule, config.params, u,
                                  lambda x, y: g(x, y, t_next), tau,
                                  rel_tol=config.rel_tol, max_iter=config.max_iter,
                                  guess=_extrapolate(u.coeffs, history))
        except StepError as exc:
            exc.step_index = n + 1
            raise
        history = [u.coeffs] + history[:1]
        u = u_next
        reports.append(report)
        if config.store_every and (n + 1) % config.store_every == 0:
            stored[n + 1] = u
    log.debug("ran %d steps, %d CG iterations", n_steps, sum(r.iterations for r in reports))
    return Trajectory(np.arange(n_steps + 1) * tau, u, reports, stored)
