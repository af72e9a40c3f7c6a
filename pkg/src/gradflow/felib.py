"""Lagrange P1-P3 elements on triangles, DOF numbering and field evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .mesh import Mesh
from .quadrature import QuadratureRule, quadrature_rule

SUPPORTED_DEGREES = (1, 2, 3)

# d(L0, L1, L2)/d(x, y) for L0 = 1 - x - y, L1 = x, L2 = y
_DBARY = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


def _check_degree(r):
    if r not in SUPPORTED_DEGREES:
        raise ValueError(f"unsupported element degree {r!r}; expected one of {SUPPORTED_DEGREES}")


def _node_indices(r):
    """Barycentric multi-indices of the local nodes, in local DOF order.

    Vertices first, then ``r - 1`` nodes on each edge ``k`` (opposite vertex
    ``k``, walked from vertex ``k+1`` to ``k+2``), then interior nodes.
    """
    idx = [(r, 0, 0), (0, r, 0), (0, 0, r)]
    for k in range(3):
        a, b = (k + 1) % 3, (k + 2) % 3
        for s in range(1, r):
            alpha = [0, 0, 0]
            alpha[a] = r - s
            alpha[b] = s
            idx.append(tuple(alpha))
    idx += [
        (i, j, r - i - j)
        for i in range(1, r)
        for j in range(1, r - i)
        if r - i - j >= 1
    ]
    return np.array(idx, dtype=int)


@dataclass(frozen=True, eq=False)
class ReferenceElement:
    degree: int
    node_indices: np.ndarray  # (n, 3) barycentric multi-indices

    @property
    def n_local(self) -> int:
        return len(self.node_indices)

    @property
    def n_edge_interior(self) -> int:
        return self.degree - 1

    @property
    def n_cell_interior(self) -> int:
        return (self.degree - 1) * (self.degree - 2) // 2

    @property
    def node_coords(self) -> np.ndarray:
        """Reference ``(x, y)`` coordinates of the local nodes."""
        return self.node_indices[:, 1:] / self.degree

    def _factors(self, points):
        # p_k(L) = prod_{m<k} (r L - m)/(m + 1) and its derivative, for k = 0..r
        r = self.degree
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        bary = np.column_stack([1.0 - pts[:, 0] - pts[:, 1], pts[:, 0], pts[:, 1]])
        npt = len(bary)
        p = np.ones((r + 1, npt, 3))
        dp = np.zeros((r + 1, npt, 3))
        for k in range(1, r + 1):
            lin = (r * bary - (k - 1)) / k
            p[k] = p[k - 1] * lin
            dp[k] = dp[k - 1] * lin + p[k - 1] * (r / k)
        return p, dp

    def basis(self, points) -> np.ndarray:
        """Basis values, shape ``(npoints, n_local)``."""
        p, _ = self._factors(points)
        a = self.node_indices
        return p[a[:, 0], :, 0].T * p[a[:, 1], :, 1].T * p[a[:, 2], :, 2].T

    def basis_gradients(self, points) -> np.ndarray:
        """Reference gradients, shape ``(npoints, n_local, 2)``."""
        p, dp = self._factors(points)
        a = self.node_indices
        f = [p[a[:, t], :, t].T for t in range(3)]
        df = [dp[a[:, t], :, t].T for t in range(3)]
        # derivative of each basis function with respect to each barycentric coordinate
        dbary = np.stack([df[0] * f[1] * f[2], f[0] * df[1] * f[2], f[0] * f[1] * df[2]], axis=-1)
        return dbary @ _DBARY


@lru_cache(maxsize=None)
def reference_element(r: int) -> ReferenceElement:
    _check_degree(r)
    return ReferenceElement(degree=r, node_indices=_node_indices(r))


@dataclass(eq=False)
class FeSpace:
    """Continuous P_r space on a triangulation.

    Global numbering: vertices, then ``r - 1`` nodes per edge ordered from
    the lower to the higher vertex index, then cell-interior nodes.
    """

    mesh: Mesh
    element: ReferenceElement
    cell_to_dof: np.ndarray  # (nt, n_local)
    dof_coords: np.ndarray   # (ndof, 2)
    jac: np.ndarray          # (nt, 2, 2) affine map Jacobians
    inv_jac: np.ndarray      # (nt, 2, 2)
    det_jac: np.ndarray      # (nt,)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def degree(self) -> int:
        return self.element.degree

    @property
    def ndof(self) -> int:
        return len(self.dof_coords)

    def map_points(self, ref_points) -> np.ndarray:
        """Physical images of reference points, shape ``(nt, npoints, 2)``."""
        origin = self.mesh.vertices[self.mesh.triangles[:, 0]]
        return origin[:, None, :] + np.einsum("tij,qj->tqi", self.jac, np.asarray(ref_points))

    def cached(self, key, build):
        """Per-space memo for quadrature-dependent precomputations."""
        try:
            return self._cache[key]
        except KeyError:
            value = self._cache[key] = build()
            return value


def build_space(mesh: Mesh, r: int) -> FeSpace:
    _check_degree(r)
    elem = reference_element(r)
    tris = mesh.triangles
    nt, nv, ne = mesh.n_triangles, mesh.n_vertices, mesh.n_edges
    ke, ki = elem.n_edge_interior, elem.n_cell_interior

    cols = [tris]
    for k in range(3):
        a, b = tris[:, (k + 1) % 3], tris[:, (k + 2) % 3]
        base = nv + mesh.tri_edges[:, k] * ke
        s = np.arange(ke)
        forward = base[:, None] + s[None, :]
        backward = base[:, None] + (ke - 1 - s)[None, :]
        cols.append(np.where((a < b)[:, None], forward, backward))
    cols.append(nv + ne * ke + np.arange(nt)[:, None] * ki + np.arange(ki)[None, :])
    cell_to_dof = np.concatenate(cols, axis=1)

    p = mesh.vertices[tris]
    jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    if np.any(det <= 0.0):
        raise ValueError("mesh contains degenerate or clockwise triangles")
    inv = np.empty_like(jac)
    inv[:, 0, 0] = jac[:, 1, 1]
    inv[:, 1, 1] = jac[:, 0, 0]
    inv[:, 0, 1] = -jac[:, 0, 1]
    inv[:, 1, 0] = -jac[:, 1, 0]
    inv /= det[:, None, None]

    ndof = nv + ne * ke + nt * ki
    coords = np.empty((ndof, 2))
    phys = p[:, 0:1, :] + np.einsum("tij,qj->tqi", jac, elem.node_coords)
    coords[cell_to_dof.ravel()] = phys.reshape(-1, 2)

    return FeSpace(mesh, elem, cell_to_dof, coords, jac, inv, det)


def _as_array(values, shape):
    return np.broadcast_to(np.asarray(values, dtype=float), shape).copy()


@dataclass(eq=False)
class FeField:
    space: FeSpace
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.space.ndof,):
            raise ValueError(
                f"expected {self.space.ndof} coefficients, got shape {self.coeffs.shape}"
            )

    def eval_at_quad(self, tri: int, rule: QuadratureRule):
        """Values ``(q,)`` and physical gradients ``(q, 2)`` on one triangle."""
        return eval_at_quad(self, tri, rule)

    def eval_all(self, rule: QuadratureRule):
        """Values ``(nt, q)`` and physical gradients ``(nt, q, 2)`` on every triangle."""
        sp = self.space
        phi, dphi = _tabulate(sp.element, rule)
        q, n, _ = dphi.shape
        local = self.coeffs[sp.cell_to_dof]
        values = local @ phi.T
        ref = (local @ dphi.transpose(1, 2, 0).reshape(n, 2 * q)).reshape(-1, 2, q)
        inv = sp.inv_jac
        # physical gradient = J^{-T} reference gradient
        grads = np.empty((len(local), q, 2))
        grads[..., 0] = inv[:, 0, 0, None] * ref[:, 0] + inv[:, 1, 0, None] * ref[:, 1]
        grads[..., 1] = inv[:, 0, 1, None] * ref[:, 0] + inv[:, 1, 1, None] * ref[:, 1]
        return values, grads


def _tabulate(elem: ReferenceElement, rule: QuadratureRule):
    key = ("tab", elem.degree, id(rule))
    cache = _tabulate.cache
    hit = cache.get(key)
    if hit is None or hit[0] is not rule:
        hit = cache[key] = (rule, elem.basis(rule.points), elem.basis_gradients(rule.points))
    return hit[1], hit[2]


_tabulate.cache = {}


def eval_at_quad(field: FeField, tri: int, rule: QuadratureRule):
    sp = field.space
    if not 0 <= tri < sp.mesh.n_triangles:
        raise IndexError(f"triangle index {tri} out of range")
    phi, dphi = _tabulate(sp.element, rule)
    local = field.coeffs[sp.cell_to_dof[tri]]
    values = phi @ local
    grads = np.einsum("qnd,n->qd", dphi, local) @ sp.inv_jac[tri]
    return values, grads


def interpolate(space: FeSpace, f) -> FeField:
    """Nodal (Lagrange) interpolant of a vectorised ``f(x, y)``."""
    x, y = space.dof_coords[:, 0], space.dof_coords[:, 1]
    return FeField(space, _as_array(f(x, y), x.shape))


def default_rules(r: int):
    """Assembly rule (degree 2r+2) and error-norm rule (degree 2r+4)."""
    return quadrature_rule(2 * r + 2), quadrature_rule(2 * r + 4)
