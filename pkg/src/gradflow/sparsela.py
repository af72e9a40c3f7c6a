"""Triplet accumulation, CSR storage and Jacobi-preconditioned CG."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps


class PreconditionerError(ArithmeticError):
    """Jacobi preconditioner cannot be formed (zero diagonal entry)."""


class NumericalError(ArithmeticError):
    """Non-finite values met during a solve."""


class TripletBuffer:
    """Accumulates ``(row, col, value)`` entries of an ``n x n`` matrix."""

    def __init__(self, n: int):
        if n < 0:
            raise ValueError("dimension must be nonnegative")
        self.n = int(n)
        self._rows: list[np.ndarray] = []
        self._cols: list[np.ndarray] = []
        self._vals: list[np.ndarray] = []

    def add(self, rows, cols, values) -> None:
        """Append entries; arrays are broadcast against each other."""
        rows, cols, values = np.broadcast_arrays(
            np.asarray(rows, dtype=np.int64),
            np.asarray(cols, dtype=np.int64),
            np.asarray(values, dtype=float),
        )
        self._rows.append(rows.ravel())
        self._cols.append(cols.ravel())
        self._vals.append(values.ravel())

    def add_local(self, dofs, local_matrices) -> None:
        """Append dense element blocks ``local_matrices[e]`` at ``dofs[e] x dofs[e]``."""
        dofs = np.asarray(dofs)
        self.add(dofs[:, :, None], dofs[:, None, :], local_matrices)

    @property
    def entries(self):
        if not self._rows:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty, np.zeros(0)
        return (np.concatenate(self._rows), np.concatenate(self._cols), np.concatenate(self._vals))

    def __len__(self) -> int:
        return sum(len(r) for r in self._rows)


@dataclass(frozen=True, eq=False)
class SparsityPattern:
    """Sorted unique ``(row, col)`` pattern plus the scatter map of the source triplets."""

    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    scatter: np.ndarray  # source triplet k lands in values[scatter[k]]

    @classmethod
    def from_indices(cls, n: int, rows, cols) -> "SparsityPattern":
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        if rows.size and (rows.min() < 0 or cols.min() < 0 or rows.max() >= n or cols.max() >= n):
            raise ValueError(f"triplet index out of range for dimension {n}")
        keys = rows * n + cols
        # np.unique sorts, so the result is independent of insertion order
        unique, scatter = np.unique(keys, return_inverse=True)
        urows = unique // n
        counts = np.bincount(urows, minlength=n)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return cls(n, offsets, unique % n, scatter.ravel())

    @property
    def nnz(self) -> int:
        return len(self.col_indices)

    def matrix(self, triplet_values) -> "CsrMatrix":
        vals = np.bincount(self.scatter, weights=np.ravel(triplet_values), minlength=self.nnz)
        return CsrMatrix(self.n, self.row_offsets, self.col_indices, vals)


@dataclass(frozen=True, eq=False)
class CsrMatrix:
    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray
    _scipy: list = field(default_factory=list, repr=False)

    @property
    def nnz(self) -> int:
        return len(self.values)

    def _as_scipy(self) -> sps.csr_matrix:
        if not self._scipy:
            self._scipy.append(
                sps.csr_matrix((self.values, self.col_indices, self.row_offsets), shape=(self.n, self.n))
            )
        return self._scipy[0]

    def matvec(self, x) -> np.ndarray:
        return self._as_scipy() @ np.asarray(x, dtype=float)

    __matmul__ = matvec

    def abs_matvec(self, x) -> np.ndarray:
        """``|A| x`` with entrywise absolute values; sizes the rounding error of ``A x``."""
        return abs(self._as_scipy()) @ np.asarray(x, dtype=float)

    def row_indices(self) -> np.ndarray:
        return np.repeat(np.arange(self.n), np.diff(self.row_offsets))

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.n)
        rows = self.row_indices()
        on_diag = rows == self.col_indices
        d[rows[on_diag]] = self.values[on_diag]
        return d

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        np.add.at(a, (self.row_indices(), self.col_indices), self.values)
        return a

    def same_pattern(self, other: "CsrMatrix") -> bool:
        return self.n == other.n and (
            (self.col_indices is other.col_indices and self.row_offsets is other.row_offsets)
            or (np.array_equal(self.row_offsets, other.row_offsets)
                and np.array_equal(self.col_indices, other.col_indices))
        )

    def combine(self, alpha: float, other: "CsrMatrix", beta: float) -> "CsrMatrix":
        """``alpha * self + beta * other`` for matrices sharing one pattern."""
        if not self.same_pattern(other):
            raise ValueError("matrices do not share a sparsity pattern")
        return CsrMatrix(self.n, self.row_offsets, self.col_indices,
                         alpha * self.values + beta * other.values)

    def is_structurally_symmetric(self) -> bool:
        rows = self.row_indices()
        fwd = np.sort(rows * self.n + self.col_indices)
        bwd = np.sort(self.col_indices * self.n + rows)
        return bool(np.array_equal(fwd, bwd))

    def asymmetry(self) -> float:
        """``max |a_ij - a_ji|``."""
        a = self._as_scipy()
        d = a - a.T
        return float(abs(d).max()) if d.nnz else 0.0


def to_csr(buf: TripletBuffer) -> CsrMatrix:
    """Sum duplicates and sort; output does not depend on insertion order."""
    rows, cols, vals = buf.entries
    pattern = SparsityPattern.from_indices(buf.n, rows, cols)
    return pattern.matrix(vals)


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    final_relative_residual: float
    converged: bool


ROUNDOFF_FACTOR = 16.0
_EPS = np.finfo(float).eps


def cg_solve(a: CsrMatrix, b, x0=None, rel_tol: float = 1e-12, max_iter: int | None = None):
    """Jacobi-preconditioned conjugate gradients for SPD ``a``.

    Stops once ``||b - a x|| <= rel_tol * ||b||``. When ``||A|| ||x||`` dwarfs
    ``||b||`` that target can sit below what rounding in ``a x`` allows, so a
    true residual within ``ROUNDOFF_FACTOR * eps * (|| |A||x| || + ||b||)`` is
    also accepted. Returns ``(x, SolveReport)``.
    """
    b = np.asarray(b, dtype=float)
    n = a.n
    if b.shape != (n,):
        raise ValueError(f"right-hand side has shape {b.shape}, expected ({n},)")
    if max_iter is None:
        max_iter = 10 * n
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"initial guess has shape {x.shape}, expected ({n},)")
    if not (np.all(np.isfinite(b)) and np.all(np.isfinite(x)) and np.all(np.isfinite(a.values))):
        raise NumericalError("non-finite values in matrix, right-hand side or initial guess")

    diag = a.diagonal()
    if np.any(diag == 0.0):
        raise PreconditionerError("zero diagonal entry; Jacobi preconditioner undefined")
    inv_diag = 1.0 / diag

    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True)
    target = rel_tol * bnorm

    def roundoff_floor(xx):
        return ROUNDOFF_FACTOR * _EPS * (np.linalg.norm(a.abs_matvec(np.abs(xx))) + bnorm)

    r = b - a.matvec(x)
    rnorm = np.linalg.norm(r)
    accept = max(target, roundoff_floor(x))
    it = 0
    if rnorm > accept:
        z = inv_diag * r
        p = z.copy()
        rz = r @ z
        while it < max_iter:
            ap = a.matvec(p)
            pap = p @ ap
            if not np.isfinite(pap) or pap <= 0.0:
                if not np.isfinite(pap):
                    raise NumericalError("non-finite curvature in CG")
                break  # matrix not positive definite along p
            alpha = rz / pap
            x += alpha * p
            r -= alpha * ap
            it += 1
            rnorm = np.linalg.norm(r)
            if rnorm <= accept:
                # guard against drift of the recursive residual
                r = b - a.matvec(x)
                rnorm = np.linalg.norm(r)
                accept = max(target, roundoff_floor(x))
                if rnorm <= accept:
                    break
            z = inv_diag * r
            rz_new = r @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
    if not np.isfinite(rnorm):
        raise NumericalError("CG residual became non-finite")
    rel = float(rnorm / bnorm)
    return x, SolveReport(it, rel, bool(rnorm <= max(target, roundoff_floor(x))))
