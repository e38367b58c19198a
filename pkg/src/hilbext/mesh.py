"""Finite simplicial models of closed disks, annuli and annulus towers.

All spaces are complexes of dimension at most two.  A space carries a set of
boundary vertices modelling the closed set on which ideal sections vanish;
the boundary subcomplex consists of those vertices together with the edges
joining them that are not interior to the 2-skeleton.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ValidationError

MAX_VERTICES = 10_000


@dataclass(frozen=True)
class SimplicialSpace:
    """A finite simplicial complex with marked boundary vertices.

    Parameters
    ----------
    n_vertices : int
        Number of vertices, indexed ``0 .. n_vertices - 1``.
    edges, triangles : sequences of index tuples
        Normalized on construction to sorted tuples.
    boundary : iterable of int
        Vertices lying on the modelled boundary.
    coords : sequence of (x, y) or None
        Optional planar coordinates.
    allow_disconnected : bool
        Skip the connectivity check on the 1-skeleton.
    """

    n_vertices: int
    edges: tuple = ()
    triangles: tuple = ()
    boundary: frozenset = frozenset()
    coords: tuple | None = None
    allow_disconnected: bool = field(default=False)

    def __post_init__(self):
        n = int(self.n_vertices)
        if n < 0:
            raise ValidationError("negative vertex count")
        if n > MAX_VERTICES:
            raise ValidationError(f"{n} vertices exceeds the cap of {MAX_VERTICES}")
        edges = tuple(sorted({_edge(e, n) for e in self.edges}))
        if len(edges) != len(tuple(self.edges)):
            raise ValidationError("duplicate edges")
        triangles = tuple(sorted({_triangle(t, n) for t in self.triangles}))
        if len(triangles) != len(tuple(self.triangles)):
            raise ValidationError("duplicate triangles")
        edge_set = set(edges)
        for a, b, c in triangles:
            for e in ((a, b), (a, c), (b, c)):
                if e not in edge_set:
                    raise ValidationError(f"triangle {(a, b, c)} is missing edge {e}")
        boundary = frozenset(int(v) for v in self.boundary)
        if any(v < 0 or v >= n for v in boundary):
            raise ValidationError("boundary vertex out of range")
        coords = self.coords
        if coords is not None:
            coords = tuple((float(x), float(y)) for x, y in coords)
            if len(coords) != n:
                raise ValidationError("coordinate count does not match vertex count")
        object.__setattr__(self, "n_vertices", n)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "triangles", triangles)
        object.__setattr__(self, "boundary", boundary)
        object.__setattr__(self, "coords", coords)
        if not self.allow_disconnected and n > 0 and self.n_components != 1:
            raise ValidationError("1-skeleton is disconnected")

    # -- derived views -------------------------------------------------
    @cached_property
    def coordinates(self) -> np.ndarray | None:
        if self.coords is None:
            return None
        return np.array(self.coords, dtype=float).reshape(self.n_vertices, 2)

    @cached_property
    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=int).reshape(-1, 2)

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[list(self.boundary)] = True
        return mask

    @cached_property
    def _labels(self):
        n = self.n_vertices
        e = self.edge_array
        adj = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
        return connected_components(adj, directed=False)

    @property
    def n_components(self) -> int:
        return int(self._labels[0]) if self.n_vertices else 0

    @property
    def component_labels(self) -> np.ndarray:
        return self._labels[1]

    @cached_property
    def neighbors(self) -> tuple:
        nbrs = [set() for _ in range(self.n_vertices)]
        for a, b in self.edges:
            nbrs[a].add(b)
            nbrs[b].add(a)
        return tuple(frozenset(s) for s in nbrs)

    @cached_property
    def boundary_edges(self) -> tuple:
        """Edges with both endpoints on the boundary lying in at most one triangle."""
        count = {}
        for a, b, c in self.triangles:
            for e in ((a, b), (a, c), (b, c)):
                count[e] = count.get(e, 0) + 1
        return tuple(
            e for e in self.edges
            if e[0] in self.boundary and e[1] in self.boundary and count.get(e, 0) <= 1
        )

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbors[u]

    def with_boundary(self, vertices) -> SimplicialSpace:
        """Same complex with a different boundary marking."""
        return SimplicialSpace(
            self.n_vertices, self.edges, self.triangles, frozenset(vertices),
            self.coords, self.allow_disconnected,
        )

    def induced(self, vertices) -> SimplicialSpace:
        """Induced subcomplex on ``vertices`` (reindexed in the given order)."""
        vertices = [int(v) for v in vertices]
        index = {v: i for i, v in enumerate(vertices)}
        edges = [(index[a], index[b]) for a, b in self.edges if a in index and b in index]
        tris = [
            tuple(index[x] for x in t) for t in self.triangles if all(x in index for x in t)
        ]
        coords = None if self.coords is None else [self.coords[v] for v in vertices]
        return SimplicialSpace(
            len(vertices), edges, tris,
            frozenset(index[v] for v in vertices if v in self.boundary),
            coords, allow_disconnected=True,
        )


def _edge(e, n):
    a, b = (int(x) for x in e)
    if a == b:
        raise ValidationError(f"self-loop at vertex {a}")
    if not (0 <= a < n and 0 <= b < n):
        raise ValidationError(f"edge {(a, b)} references a missing vertex")
    return (a, b) if a < b else (b, a)


def _triangle(t, n):
    verts = tuple(sorted(int(x) for x in t))
    if len(verts) != 3 or len(set(verts)) != 3:
        raise ValidationError(f"degenerate triangle {t}")
    if not all(0 <= v < n for v in verts):
        raise ValidationError(f"triangle {t} references a missing vertex")
    return verts


def _check_positive_int(name, value, minimum):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < minimum:
        raise ValidationError(f"{name} must be an integer >= {minimum}, got {value!r}")


def _ring_mesh(radii, n_angular, center=False, boundary_rings=()):
    """Concentric rings of ``n_angular`` aligned vertices, quads split diagonally."""
    n_rings = len(radii)
    offset = 1 if center else 0
    n = offset + n_rings * n_angular
    if n > MAX_VERTICES:
        raise ValidationError(f"{n} vertices exceeds the cap of {MAX_VERTICES}")
    theta = 2 * np.pi * np.arange(n_angular) / n_angular
    coords = [(0.0, 0.0)] if center else []
    for r in radii:
        coords.extend(zip(r * np.cos(theta), r * np.sin(theta)))

    def vid(ring, j):
        return offset + ring * n_angular + (j % n_angular)

    edges, tris = [], []
    for ring in range(n_rings):
        for j in range(n_angular):
            edges.append((vid(ring, j), vid(ring, j + 1)))
    if center:
        for j in range(n_angular):
            edges.append((0, vid(0, j)))
            tris.append((0, vid(0, j), vid(0, j + 1)))
    for ring in range(n_rings - 1):
        for j in range(n_angular):
            a0, a1 = vid(ring, j), vid(ring, j + 1)
            b0, b1 = vid(ring + 1, j), vid(ring + 1, j + 1)
            edges += [(a0, b0), (a0, b1)]
            tris += [(a0, a1, b1), (a0, b0, b1)]
    boundary = [vid(ring, j) for ring in boundary_rings for j in range(n_angular)]
    return SimplicialSpace(n, edges, tris, frozenset(boundary), coords)


def build_disk_mesh(n_radial: int, n_angular: int) -> SimplicialSpace:
    """Triangulated closed unit disk; the outermost ring is the boundary."""
    _check_positive_int("n_radial", n_radial, 1)
    _check_positive_int("n_angular", n_angular, 3)
    radii = np.arange(1, n_radial + 1) / n_radial
    return _ring_mesh(radii, n_angular, center=True, boundary_rings=(n_radial - 1,))


def build_annulus_mesh(r_inner: float, n_radial: int, n_angular: int) -> SimplicialSpace:
    """Triangulated closed annulus ``r_inner <= |z| <= 1``; both rings are boundary."""
    if not (0.0 < float(r_inner) < 1.0):
        raise ValidationError(f"r_inner must lie in (0, 1), got {r_inner!r}")
    _check_positive_int("n_radial", n_radial, 1)
    _check_positive_int("n_angular", n_angular, 3)
    radii = r_inner + (1.0 - r_inner) * np.arange(n_radial + 1) / n_radial
    return _ring_mesh(radii, n_angular, boundary_rings=(0, n_radial))


def outer_cycle(space: SimplicialSpace) -> tuple:
    """Boundary vertices of maximal radius, ordered counterclockwise from angle 0."""
    xy = space.coordinates
    if xy is None:
        raise ValidationError("outer_cycle needs vertex coordinates")
    bverts = np.array(sorted(space.boundary), dtype=int)
    if bverts.size == 0:
        raise ValidationError("space has no boundary vertices")
    radius = np.hypot(*xy[bverts].T)
    ring = bverts[np.abs(radius - radius.max()) <= 1e-9]
    angle = np.mod(np.arctan2(xy[ring, 1], xy[ring, 0]), 2 * np.pi)
    cycle = tuple(int(v) for v in ring[np.argsort(angle, kind="stable")])
    check_cycle(space, cycle)
    return cycle


def check_cycle(space: SimplicialSpace, cycle) -> None:
    """Raise unless ``cycle`` is a simple closed cycle in the 1-skeleton."""
    if len(cycle) < 3 or len(set(cycle)) != len(cycle):
        raise ValidationError("a cycle needs at least three distinct vertices")
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        if not space.has_edge(a, b):
            raise ValidationError(f"cycle step {(a, b)} is not an edge")


def cycle_space(n: int, coords=None) -> SimplicialSpace:
    """The cycle graph on ``n`` vertices, edges ``(i, i+1 mod n)``."""
    _check_positive_int("n", n, 3)
    edges = [(i, (i + 1) % n) for i in range(n)]
    return SimplicialSpace(n, edges, (), frozenset(), coords)


def point_space() -> SimplicialSpace:
    return SimplicialSpace(1, (), (), frozenset(), ((0.0, 0.0),))


def boundary_subcomplex(space: SimplicialSpace) -> SimplicialSpace:
    """The boundary subcomplex, reindexed by increasing original vertex index.

    An unmarked space yields the empty complex.
    """
    verts = sorted(space.boundary)
    index = {v: i for i, v in enumerate(verts)}
    edges = [(index[a], index[b]) for a, b in space.boundary_edges]
    coords = None if space.coords is None else [space.coords[v] for v in verts]
    return SimplicialSpace(
        len(verts), edges, (), frozenset(range(len(verts))), coords,
        allow_disconnected=True,
    )


@dataclass(frozen=True)
class AnnulusTower:
    """Nested annuli ``r_t <= |z| <= 1`` standing in for the corona.

    ``inclusions[t][v]`` is the index in ``levels[t]`` of vertex ``v`` of
    ``levels[t + 1]``.  Every level shares the outer ring, listed in
    ``corona_cycles[t]`` in counterclockwise order.
    """

    levels: tuple
    radii: tuple
    corona_cycles: tuple
    inclusions: tuple

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if len(radii) != len(self.levels) or len(self.corona_cycles) != len(self.levels):
            raise ValidationError("levels, radii and corona cycles must align")
        if len(self.inclusions) != len(self.levels) - 1:
            raise ValidationError("need one inclusion per consecutive pair of levels")
        if any(not 0.0 < r < 1.0 for r in radii) or any(
            b <= a for a, b in zip(radii, radii[1:])
        ):
            raise ValidationError("radii must increase strictly inside (0, 1)")
        object.__setattr__(self, "radii", radii)
        for level, cycle in zip(self.levels, self.corona_cycles):
            check_cycle(level, tuple(cycle))
        if len({len(c) for c in self.corona_cycles}) != 1:
            raise ValidationError("corona cycles differ in length")
        for t, inc in enumerate(self.inclusions):
            if not is_subcomplex(self.levels[t + 1], self.levels[t], inc):
                raise ValidationError(f"level {t + 1} is not a subcomplex of level {t}")

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def corona_length(self) -> int:
        return len(self.corona_cycles[-1])

    @cached_property
    def corona_space(self) -> SimplicialSpace:
        """The outer cycle as a standalone cycle graph, vertex ``i`` at cycle position ``i``."""
        last = self.levels[-1]
        coords = None
        if last.coords is not None:
            coords = [last.coords[v] for v in self.corona_cycles[-1]]
        return cycle_space(self.corona_length, coords)


def is_subcomplex(small: SimplicialSpace, big: SimplicialSpace, vertex_map) -> bool:
    """Whether ``vertex_map`` embeds ``small`` injectively as a subcomplex of ``big``."""
    vmap = [int(v) for v in vertex_map]
    if len(vmap) != small.n_vertices or len(set(vmap)) != len(vmap):
        return False
    if any(v < 0 or v >= big.n_vertices for v in vmap):
        return False
    big_edges = set(big.edges)
    big_tris = set(big.triangles)
    for a, b in small.edges:
        if tuple(sorted((vmap[a], vmap[b]))) not in big_edges:
            return False
    for t in small.triangles:
        if tuple(sorted(vmap[x] for x in t)) not in big_tris:
            return False
    return True


def annulus_tower(n_levels: int, n_angular: int) -> AnnulusTower:
    """Tower of annuli with radii ``t / (n_levels + 1)``, ``t = 1 .. n_levels``."""
    _check_positive_int("n_levels", n_levels, 2)
    _check_positive_int("n_angular", n_angular, 3)
    radii = [t / (n_levels + 1) for t in range(1, n_levels + 1)]
    master = radii + [1.0]
    levels, cycles = [], []
    for t in range(n_levels):
        rings = master[t:]
        level = _ring_mesh(rings, n_angular, boundary_rings=(0, len(rings) - 1))
        levels.append(level)
        last = (len(rings) - 1) * n_angular
        cycles.append(tuple(range(last, last + n_angular)))
    inclusions = [
        tuple(range(n_angular, levels[t].n_vertices)) for t in range(n_levels - 1)
    ]
    return AnnulusTower(tuple(levels), tuple(radii), tuple(cycles), tuple(inclusions))
