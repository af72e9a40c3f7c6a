"""Structured triangulation of the unit square."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class Mesh:
    """Uniform triangulation with ``m`` subdivisions per side.

    Attributes
    ----------
    vertices : (nv, 2) float array, row-major ``j*(m+1) + i`` numbering.
    triangles : (nt, 3) int array, counterclockwise.
    edges : (ne, 2) int array of ``(low, high)`` vertex pairs.
    tri_edges : (nt, 3) int array; local edge ``k`` is opposite local vertex ``k``.
    h : longest edge length.
    """

    m: int
    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    tri_edges: np.ndarray
    h: float

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edge_triangle_counts(self) -> np.ndarray:
        """Number of triangles sharing each edge (1 on the boundary, 2 inside)."""
        return np.bincount(self.tri_edges.ravel(), minlength=self.n_edges)

    def dump(self, path) -> None:
        """Write ``v x y`` and ``t i j k`` lines (0-based indices)."""
        lines = [f"v {x!r} {y!r}" for x, y in self.vertices.tolist()]
        lines += [f"t {i} {j} {k}" for i, j, k in self.triangles.tolist()]
        Path(path).write_text("\n".join(lines) + "\n")


def build_mesh(m: int) -> Mesh:
    """Triangulate [0,1]^2 on an (m+1) x (m+1) grid.

    Every cell is cut along its lower-left to upper-right diagonal, so all
    triangles are congruent with area ``1/(2 m^2)`` and ``h = sqrt(2)/m``.
    """
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    m = int(m)

    ticks = np.arange(m + 1) / m
    xx, yy = np.meshgrid(ticks, ticks)
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    j, i = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    v00 = (j * (m + 1) + i).ravel()
    v10 = v00 + 1
    v01 = v00 + m + 1
    v11 = v01 + 1
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    # interleave so both triangles of a cell are adjacent
    triangles = np.stack([lower, upper], axis=1).reshape(-1, 3)

    local = triangles[:, [[1, 2], [2, 0], [0, 1]]]
    pairs = np.sort(local.reshape(-1, 2), axis=1)
    edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
    tri_edges = inverse.reshape(-1, 3)

    lengths = np.linalg.norm(vertices[edges[:, 1]] - vertices[edges[:, 0]], axis=1)
    return Mesh(
        m=m,
        vertices=vertices,
        triangles=triangles,
        edges=edges,
        tri_edges=tri_edges,
        h=float(lengths.max()),
    )
