"""Gradient-dependent diffusion coefficient and its linearization.

All functions take the squared gradient magnitude ``s2 = |grad u|^2`` and
accept scalars or numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DiffusionParams:
    """Regularization parameter of ``sigma(s2) = 1/sqrt(lambda^2 + s2)``."""

    lam: float

    def __post_init__(self):
        lam = float(self.lam)
        if not np.isfinite(lam) or lam <= 0.0:
            raise ValueError(f"lambda must be positive and finite, got {self.lam!r}")
        object.__setattr__(self, "lam", lam)


def _check_s2(s2):
    s2 = np.asarray(s2, dtype=float)
    if np.any(s2 < 0.0):
        raise ValueError("squared gradient magnitude must be nonnegative")
    return s2


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def sigma(params: DiffusionParams, s2):
    """Diffusion coefficient ``1/sqrt(lambda^2 + s2)``, in ``(0, 1/lambda]``."""
    s2 = _check_s2(s2)
    return _out(1.0 / np.sqrt(params.lam**2 + s2))


def sigma_prime(params: DiffusionParams, s2):
    """Derivative with respect to ``s2``; equals ``-sigma^3 / 2``."""
    s2 = _check_s2(s2)
    return _out(-0.5 * (params.lam**2 + s2) ** -1.5)


def gamma(params: DiffusionParams, s2):
    """Diffusivity gap ``2 |sigma'(s2)| s2``.

    For this coefficient it coincides with ``sigma - lambda^2 sigma^3``.
    """
    s2 = _check_s2(s2)
    return _out(2.0 * np.abs(sigma_prime(params, s2)) * s2)


def a_matrix(params: DiffusionParams, grad) -> np.ndarray:
    """Linearization matrix ``sigma I + 2 sigma' grad grad^T``.

    The eigenvalues are ``sigma`` (across ``grad``) and
    ``lambda^2 sigma^3`` (along ``grad``).
    """
    g = np.asarray(grad, dtype=float)
    if g.shape != (2,) or not np.all(np.isfinite(g)):
        raise ValueError("grad must be a finite 2-vector")
    s2 = float(g @ g)
    return sigma(params, s2) * np.eye(2) + 2.0 * sigma_prime(params, s2) * np.outer(g, g)
