"""Simplicial triangulations of one space-time slab ``[t_lo, t_hi] x [x_L, x_R]``.

Coordinates are ordered ``(t, x)``.  Elements are stored counter-clockwise in
that plane, so the outward normal of the edge ``p0 -> p1`` is
``(dx, -dt) / |e|``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .polynomials import AffineMap, segment_rule


class Pattern(str, enum.Enum):
    CRISS_CROSS = "crisscross"
    UNIFORM_DIAGONAL = "diagonal"


class FacetKind(enum.IntEnum):
    INTERNAL = 0
    TEMPORAL_INTERFACE = 1
    SPATIAL_BOUNDARY = 2


class Side(enum.Enum):
    OWNER = "owner"
    NEIGHBOR = "neighbor"


@dataclass(frozen=True)
class SpaceTimePoint:
    t: float
    x: float


@dataclass(frozen=True)
class TriElement:
    vertex_ids: tuple
    slab_index: int
    diameter: float
    area: float
    perimeter: float


@dataclass(frozen=True)
class Facet:
    index: int
    endpoints: tuple
    owner: int
    neighbor: int | None
    normal: np.ndarray
    kind: FacetKind
    length: float


class SlabMesh:
    """Conforming triangulation of a single time slab.

    Geometry is kept in flat arrays for vectorized assembly; :meth:`element`
    and :meth:`facet` return small record views.
    """

    def __init__(self, points, elements, t_lo, t_hi, x_left, x_right,
                 slab_index=0, x_nodes=None):
        self.points = np.asarray(points, dtype=float)
        elements = np.asarray(elements, dtype=np.int64)
        self.t_lo, self.t_hi = float(t_lo), float(t_hi)
        self.x_left, self.x_right = float(x_left), float(x_right)
        self.slab_index = slab_index
        self.x_nodes = None if x_nodes is None else np.asarray(x_nodes, dtype=float)

        v = self.points[elements]
        signed = 0.5 * ((v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
                        - (v[:, 2, 0] - v[:, 0, 0]) * (v[:, 1, 1] - v[:, 0, 1]))
        flip = signed < 0
        elements[flip] = elements[flip][:, [0, 2, 1]]
        self.elements = elements
        self._compute_geometry()
        self._build_facets()

    # -- geometry -----------------------------------------------------------

    def _compute_geometry(self):
        v = self.points[self.elements]
        self.origin = v[:, 0, :].copy()
        self.jac = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]], axis=-1)
        self.det = np.linalg.det(self.jac)
        if np.any(self.det <= 0.0):
            raise ValueError("degenerate element in slab mesh")
        self.inv_jac = np.linalg.inv(self.jac)
        self.area = 0.5 * self.det
        edges = np.linalg.norm(v[:, [1, 2, 0]] - v, axis=-1)
        self.diameter = edges.max(axis=1)
        self.perimeter = edges.sum(axis=1)
        self.h = float(self.diameter.max())

    def _build_facets(self):
        shared = {}
        for k, tri in enumerate(self.elements):
            for le in range(3):
                a, b = int(tri[le]), int(tri[(le + 1) % 3])
                shared.setdefault((min(a, b), max(a, b)), []).append((k, a, b))

        ends, owner, nbr, kind = [], [], [], []
        for key in sorted(shared):
            refs = shared[key]
            if len(refs) > 2:
                raise ValueError("nonconforming mesh: edge shared by >2 elements")
            k, a, b = refs[0]
            ends.append((a, b))
            owner.append(k)
            if len(refs) == 2:
                nbr.append(refs[1][0])
                kind.append(FacetKind.INTERNAL)
            else:
                nbr.append(-1)
                pa, pb = self.points[a], self.points[b]
                horizontal = abs(pa[0] - pb[0]) <= 1e-12 * max(1.0, abs(pa[0]))
                kind.append(FacetKind.TEMPORAL_INTERFACE if horizontal
                            else FacetKind.SPATIAL_BOUNDARY)

        self.facet_ends = np.array(ends, dtype=np.int64)
        self.facet_owner = np.array(owner, dtype=np.int64)
        self.facet_neighbor = np.array(nbr, dtype=np.int64)
        self.facet_kind = np.array(kind, dtype=np.int64)
        p0 = self.points[self.facet_ends[:, 0]]
        p1 = self.points[self.facet_ends[:, 1]]
        d = p1 - p0
        self.facet_length = np.linalg.norm(d, axis=1)
        # endpoints are stored in the owner's counter-clockwise order
        self.facet_normal = np.column_stack([d[:, 1], -d[:, 0]]) / self.facet_length[:, None]
        temporal = self.facet_kind == FacetKind.TEMPORAL_INTERFACE
        self.facet_normal[temporal] = np.column_stack(
            [np.sign(self.facet_normal[temporal, 0]), np.zeros(temporal.sum())])

    # -- record views ---------------------------------------------------------

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def n_facets(self):
        return len(self.facet_ends)

    def element(self, k) -> TriElement:
        return TriElement(tuple(int(i) for i in self.elements[k]), self.slab_index,
                          float(self.diameter[k]), float(self.area[k]),
                          float(self.perimeter[k]))

    def facet(self, f) -> Facet:
        nb = int(self.facet_neighbor[f])
        return Facet(f, tuple(int(i) for i in self.facet_ends[f]),
                     int(self.facet_owner[f]), None if nb < 0 else nb,
                     self.facet_normal[f].copy(), FacetKind(self.facet_kind[f]),
                     float(self.facet_length[f]))

    def affine_map(self, k) -> AffineMap:
        return AffineMap(self.origin[k], self.jac[k])

    def to_reference(self, k, pts):
        return np.einsum("ij,...j->...i", self.inv_jac[k], np.asarray(pts) - self.origin[k])

    def facets_of_kind(self, kind):
        return np.flatnonzero(self.facet_kind == kind)

    def bottom_facets(self):
        idx = self.facets_of_kind(FacetKind.TEMPORAL_INTERFACE)
        return idx[self.facet_normal[idx, 0] < 0]

    def top_facets(self):
        idx = self.facets_of_kind(FacetKind.TEMPORAL_INTERFACE)
        return idx[self.facet_normal[idx, 0] > 0]

    def facet_points(self, facets, rule):
        """Physical quadrature points ``(F, nq, 2)`` and weights ``(F, nq)``."""
        facets = np.asarray(facets, dtype=np.int64)
        p0 = self.points[self.facet_ends[facets, 0]]
        p1 = self.points[self.facet_ends[facets, 1]]
        s = rule.points
        pts = p0[:, None, :] + s[None, :, None] * (p1 - p0)[:, None, :]
        wts = rule.weights[None, :] * self.facet_length[facets, None]
        return pts, wts

    def write(self, path):
        """Plain-text dump: ``point <id> <t> <x>`` and ``tri <id> <v0> <v1> <v2>``."""
        with open(path, "w") as fh:
            for i, (t, x) in enumerate(self.points):
                fh.write(f"point {i} {t!r} {x!r}\n")
            for k, (a, b, c) in enumerate(self.elements):
                fh.write(f"tri {k} {a} {b} {c}\n")


def build_slab_mesh(x_left, x_right, t_lo, t_hi, n_x,
                    pattern=Pattern.CRISS_CROSS, slab_index=0) -> SlabMesh:
    """Triangulate ``[t_lo, t_hi] x [x_left, x_right]`` with ``n_x`` columns.

    ``diagonal`` cuts each rectangle into two triangles, ``crisscross`` into
    four around the rectangle centroid.
    """
    if not x_left < x_right:
        raise ValueError("x_left must be smaller than x_right")
    if not t_lo < t_hi:
        raise ValueError("t_lo must be smaller than t_hi")
    if int(n_x) < 1:
        raise ValueError("n_x must be at least 1")
    n_x = int(n_x)
    pattern = Pattern(pattern)

    xs = np.linspace(x_left, x_right, n_x + 1)
    bottom = np.column_stack([np.full(n_x + 1, t_lo), xs])
    top = np.column_stack([np.full(n_x + 1, t_hi), xs])
    points = [bottom, top]
    tris = []
    if pattern is Pattern.UNIFORM_DIAGONAL:
        for j in range(n_x):
            b0, b1, t0, t1 = j, j + 1, n_x + 1 + j, n_x + 2 + j
            tris.append((b0, b1, t1))
            tris.append((b0, t1, t0))
    else:
        centres = np.column_stack([np.full(n_x, 0.5 * (t_lo + t_hi)),
                                   0.5 * (xs[:-1] + xs[1:])])
        points.append(centres)
        base = 2 * (n_x + 1)
        for j in range(n_x):
            b0, b1, t0, t1, c = j, j + 1, n_x + 1 + j, n_x + 2 + j, base + j
            tris.extend([(b0, b1, c), (b1, t1, c), (t1, t0, c), (t0, b0, c)])
    return SlabMesh(np.vstack(points), tris, t_lo, t_hi, x_left, x_right,
                    slab_index=slab_index, x_nodes=xs)


def shape_regularity(mesh: SlabMesh):
    """Return ``(min, max)`` over elements of ``h_k |dk| / |k|``."""
    ratio = mesh.diameter * mesh.perimeter / mesh.area
    return float(ratio.min()), float(ratio.max())


def facet_quadrature_trace(mesh: SlabMesh, facet: int, side=Side.OWNER, order=4):
    """Element-local reference points and physical weights on one facet.

    Owner and neighbor points map to identical physical points, so the two
    returned point sets evaluate the two one-sided traces.
    """
    side = Side(side)
    if side is Side.NEIGHBOR:
        elem = int(mesh.facet_neighbor[facet])
        if elem < 0:
            raise ValueError(f"facet {facet} has no neighbor (kind "
                             f"{FacetKind(mesh.facet_kind[facet]).name})")
    else:
        elem = int(mesh.facet_owner[facet])
    pts, wts = mesh.facet_points([facet], segment_rule(order))
    return mesh.to_reference(elem, pts[0]), wts[0]
