"""Manufactured solution ``u = exp(0.01 t) cos(2 pi x) cos(2 pi y) / 4`` and its forcing."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coeff import DiffusionParams, sigma, sigma_prime

TWO_PI = 2.0 * np.pi
GROWTH = 0.01
AMPLITUDE = 0.25


def _amp(t):
    return AMPLITUDE * np.exp(GROWTH * np.asarray(t, dtype=float))


def exact_u(x, y, t):
    return _amp(t) * np.cos(TWO_PI * np.asarray(x)) * np.cos(TWO_PI * np.asarray(y))


def exact_u_t(x, y, t):
    return GROWTH * exact_u(x, y, t)


def exact_grad_u(x, y, t):
    """``(u_x, u_y)``; both vanish on the matching sides of the unit square."""
    a = _amp(t)
    cx, sx = np.cos(TWO_PI * np.asarray(x)), np.sin(TWO_PI * np.asarray(x))
    cy, sy = np.cos(TWO_PI * np.asarray(y)), np.sin(TWO_PI * np.asarray(y))
    return -TWO_PI * a * sx * cy, -TWO_PI * a * cx * sy


def exact_hessian_u(x, y, t):
    """``(u_xx, u_xy, u_yy)``."""
    a = _amp(t)
    cx, sx = np.cos(TWO_PI * np.asarray(x)), np.sin(TWO_PI * np.asarray(x))
    cy, sy = np.cos(TWO_PI * np.asarray(y)), np.sin(TWO_PI * np.asarray(y))
    k2 = TWO_PI**2
    return -k2 * a * cx * cy, k2 * a * sx * sy, -k2 * a * cx * cy


def exact_laplacian_u(x, y, t):
    uxx, _, uyy = exact_hessian_u(x, y, t)
    return uxx + uyy


def _spatial_factors(x, y):
    # time-independent pieces of the forcing at amplitude one
    cx, sx = np.cos(TWO_PI * np.asarray(x)), np.sin(TWO_PI * np.asarray(x))
    cy, sy = np.cos(TWO_PI * np.asarray(y)), np.sin(TWO_PI * np.asarray(y))
    phi = cx * cy
    px, py = -TWO_PI * sx * cy, -TWO_PI * cx * sy
    k2 = TWO_PI**2
    s2 = px * px + py * py
    quad_form = -k2 * phi * s2 + 2.0 * k2 * sx * sy * px * py
    return phi, s2, quad_form


def _combine(params, a, phi, s2, quad_form):
    s2 = (a * a) * s2
    return (a * phi * (GROWTH + 2.0 * TWO_PI**2 * sigma(params, s2))
            - 2.0 * sigma_prime(params, s2) * a**3 * quad_form)


def forcing_g(params: DiffusionParams, x, y, t):
    """``u_t - div(sigma(|grad u|^2) grad u)``.

    Expanded by the chain rule as
    ``u_t - sigma lap(u) - 2 sigma' (H grad u) . grad u`` with ``H`` the Hessian.
    """
    return _combine(params, _amp(t), *_spatial_factors(x, y))


@dataclass(frozen=True)
class ManufacturedProblem:
    """Bundles the closed forms above for one value of lambda."""

    params: DiffusionParams
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    def u(self, x, y, t):
        return exact_u(x, y, t)

    def u0(self, x, y):
        return exact_u(x, y, 0.0)

    def u_t(self, x, y, t):
        return exact_u_t(x, y, t)

    def grad_u(self, x, y, t):
        return exact_grad_u(x, y, t)

    def hessian_u(self, x, y, t):
        return exact_hessian_u(x, y, t)

    def laplacian_u(self, x, y, t):
        return exact_laplacian_u(x, y, t)

    def g(self, x, y, t):
        """Same as :func:`forcing_g`; spatial factors are reused for read-only point arrays."""
        frozen = (isinstance(x, np.ndarray) and isinstance(y, np.ndarray)
                  and not x.flags.writeable and not y.flags.writeable)
        if not frozen:
            return forcing_g(self.params, x, y, t)
        key = (id(x), id(y))
        hit = self._memo.get(key)
        if hit is None or hit[0] is not x or hit[1] is not y:
            if len(self._memo) >= 8:
                self._memo.clear()
            hit = self._memo[key] = (x, y, _spatial_factors(x, y))
        return _combine(self.params, _amp(t), *hit[2])
