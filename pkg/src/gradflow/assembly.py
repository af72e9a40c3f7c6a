"""Mass, frozen-coefficient stiffness and load assembly; error norms.

Neumann conditions are natural, so no boundary terms appear anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeff import DiffusionParams, sigma
from .felib import FeField, FeSpace, _tabulate
from .quadrature import QuadratureRule
from .sparsela import CsrMatrix, SparsityPattern


@dataclass(frozen=True, eq=False)
class QuadData:
    """Quadrature-point tables for one (space, rule) pair."""

    phi: np.ndarray        # (q, n) basis values
    wdet: np.ndarray       # (nt, q) weight * |det J|
    x: np.ndarray          # (nt, q) physical quadrature points, read-only
    y: np.ndarray
    grad_products: np.ndarray  # (q*3, n*n): symmetrised d_i[a] d_j[b] for ab in (00, 01, 11)
    metric: np.ndarray     # (nt, 3): entries (00, 01, 11) of J^{-1} J^{-T}


def quad_data(space: FeSpace, rule: QuadratureRule) -> QuadData:
    key = ("quad", id(rule))
    hit = space.cached(key, lambda: (rule, _build_quad_data(space, rule)))
    if hit[0] is not rule:
        space._cache.pop(key)
        return quad_data(space, rule)
    return hit[1]


def _build_quad_data(space, rule):
    phi, dphi = _tabulate(space.element, rule)
    q, n = phi.shape
    wdet = rule.weights[None, :] * space.det_jac[:, None]
    prod = np.einsum("qia,qjb->qabij", dphi, dphi).reshape(q, 4, n * n)
    # the metric is symmetric, so the (0,1) and (1,0) terms fold together
    prod = np.stack([prod[:, 0], prod[:, 1] + prod[:, 2], prod[:, 3]], axis=1).reshape(3 * q, n * n)
    inv = space.inv_jac
    metric = np.einsum("tai,tbi->tab", inv, inv).reshape(-1, 4)[:, [0, 1, 3]]
    pts = space.map_points(rule.points)
    x = np.ascontiguousarray(pts[..., 0])
    y = np.ascontiguousarray(pts[..., 1])
    for a in (wdet, x, y, prod, metric):
        a.flags.writeable = False
    return QuadData(phi, wdet, x, y, prod, metric)


def pattern(space: FeSpace) -> SparsityPattern:
    """Sparsity pattern of all element matrices, shared by mass and stiffness."""

    def build():
        dofs = space.cell_to_dof
        n = dofs.shape[1]
        rows = np.repeat(dofs, n, axis=1)
        cols = np.tile(dofs, (1, n))
        return SparsityPattern.from_indices(space.ndof, rows, cols)

    return space.cached("pattern", build)


def _eval(f, x, y):
    return np.broadcast_to(np.asarray(f(x, y), dtype=float), x.shape)


def local_stiffness(space: FeSpace, rule: QuadratureRule, coeff_at_quad=None) -> np.ndarray:
    """Element matrices ``int c grad(phi_i).grad(phi_j)``, shape ``(nt, n, n)``.

    ``coeff_at_quad`` has shape ``(nt, q)``; ``None`` means unit coefficient.
    """
    qd = quad_data(space, rule)
    c = qd.wdet if coeff_at_quad is None else qd.wdet * coeff_at_quad
    nt = len(c)
    n = qd.phi.shape[1]
    weights = (c[:, :, None] * qd.metric[:, None, :]).reshape(nt, -1)
    return (weights @ qd.grad_products).reshape(nt, n, n)


def assemble_mass(space: FeSpace, rule: QuadratureRule) -> CsrMatrix:
    qd = quad_data(space, rule)
    n = qd.phi.shape[1]
    pp = np.einsum("qi,qj->qij", qd.phi, qd.phi).reshape(len(rule), n * n)
    return pattern(space).matrix(qd.wdet @ pp)


def assemble_stiffness(space: FeSpace, rule: QuadratureRule, frozen: FeField | None = None,
                       params: DiffusionParams | None = None) -> CsrMatrix:
    """Stiffness with coefficient ``sigma(|grad frozen|^2)`` at each quadrature point.

    With ``frozen=None`` the unit-coefficient (Laplacian) matrix is returned.
    """
    if frozen is None:
        return pattern(space).matrix(local_stiffness(space, rule))
    if frozen.space is not space:
        raise ValueError("frozen field belongs to a different space")
    if params is None:
        raise ValueError("params are required with a frozen field")
    _, grads = frozen.eval_all(rule)
    coef = sigma(params, np.einsum("tqd,tqd->tq", grads, grads))
    return pattern(space).matrix(local_stiffness(space, rule, coef))


def assemble_load(space: FeSpace, rule: QuadratureRule, g) -> np.ndarray:
    """Vector ``int g phi_i`` for a vectorised ``g(x, y)``."""
    qd = quad_data(space, rule)
    gq = _eval(g, qd.x, qd.y)
    local = (gq * qd.wdet) @ qd.phi
    return np.bincount(space.cell_to_dof.ravel(), weights=local.ravel(), minlength=space.ndof)


def l2_error(field: FeField, exact, rule: QuadratureRule) -> float:
    qd = quad_data(field.space, rule)
    values, _ = field.eval_all(rule)
    diff = values - _eval(exact, qd.x, qd.y)
    return float(np.sqrt(np.sum(qd.wdet * diff**2)))


def h1_seminorm_error(field: FeField, exact_grad, rule: QuadratureRule) -> float:
    """L2 norm of ``grad field - exact_grad``; ``exact_grad(x, y)`` returns ``(gx, gy)``."""
    qd = quad_data(field.space, rule)
    _, grads = field.eval_all(rule)
    x, y = qd.x, qd.y
    gx, gy = exact_grad(x, y)
    dx = grads[..., 0] - np.broadcast_to(np.asarray(gx, dtype=float), x.shape)
    dy = grads[..., 1] - np.broadcast_to(np.asarray(gy, dtype=float), x.shape)
    return float(np.sqrt(np.sum(qd.wdet * (dx**2 + dy**2))))
