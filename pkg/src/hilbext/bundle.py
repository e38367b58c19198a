"""Vector bundles as fields of orthogonal projections on a simplicial space."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from ._config import get_tol
from .errors import NonStabilizing, ValidationError
from .mesh import AnnulusTower, SimplicialSpace

RANK_THRESHOLD = 0.5
DEFAULT_CORONA_EPS = 1e-6


def opnorm(a: np.ndarray) -> np.ndarray:
    """Operator 2-norm over the last two axes."""
    a = np.asarray(a)
    if a.shape[-1] == 0 or a.shape[-2] == 0:
        return np.zeros(a.shape[:-2])
    return np.linalg.norm(a, ord=2, axis=(-2, -1))


def projection_ranks(values: np.ndarray) -> np.ndarray:
    herm = 0.5 * (values + np.conj(np.swapaxes(values, -1, -2)))
    return (np.linalg.eigvalsh(herm) > RANK_THRESHOLD).sum(axis=-1)


def fiber_basis(p: np.ndarray) -> np.ndarray:
    """Orthonormal basis (as columns) of the range of a projection."""
    w, v = np.linalg.eigh(0.5 * (p + p.conj().T))
    return v[:, w > RANK_THRESHOLD]


def check_pointwise_projections(values: np.ndarray, tol: float) -> None:
    if len(values) == 0:
        return
    idem = opnorm(values @ values - values)
    adj = opnorm(np.conj(np.swapaxes(values, -1, -2)) - values)
    for name, err in (("idempotent", idem), ("self-adjoint", adj)):
        bad = np.flatnonzero(err > tol)
        if bad.size:
            v = int(bad[0])
            raise ValidationError(f"P is not {name} at vertex {v} (error {err[v]:.3g})")


@dataclass(frozen=True, eq=False)
class ProjectionField:
    """A projection ``P(v)`` in ``C^{m x m}`` at every vertex; the bundle is ``Im P``.

    Construction validates idempotence and self-adjointness (within the
    algebraic tolerance), constant rank on each connected component and
    ``||P(u) - P(v)|| < 1`` across every edge.
    """

    space: SimplicialSpace
    values: np.ndarray
    tol: float | None = field(default=None, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        n = self.space.n_vertices
        if values.ndim != 3 or values.shape[0] != n or values.shape[1] != values.shape[2]:
            raise ValidationError(
                f"expected values of shape ({n}, m, m), got {values.shape}"
            )
        if values.shape[1] < 1:
            raise ValidationError("ambient dimension must be positive")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        tol = get_tol(self.tol)
        check_pointwise_projections(values, tol)
        ranks = self.ranks
        labels = self.space.component_labels if n else np.zeros(0, dtype=int)
        for c in range(self.space.n_components):
            rs = np.unique(ranks[labels == c])
            if rs.size > 1:
                raise ValidationError(f"rank jumps on component {c}: ranks {rs.tolist()}")
        e = self.space.edge_array
        if len(e):
            jump = opnorm(values[e[:, 0]] - values[e[:, 1]])
            bad = np.flatnonzero(jump >= 1.0)
            if bad.size:
                u, v = e[bad[0]]
                raise ValidationError(
                    f"edge discontinuity across {(int(u), int(v))}: "
                    f"||P(u) - P(v)|| = {jump[bad[0]]:.3g}"
                )

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @cached_property
    def ranks(self) -> np.ndarray:
        return projection_ranks(self.values)

    def restrict(self, vertices) -> ProjectionField:
        """The sub-field on the induced subcomplex over ``vertices``."""
        vertices = list(vertices)
        return ProjectionField(self.space.induced(vertices), self.values[vertices], self.tol)


def projection_field_from_map(space: SimplicialSpace, m: int, generator) -> ProjectionField:
    """Evaluate ``generator(v)`` at every vertex and validate the result."""
    values = np.zeros((space.n_vertices, m, m), dtype=complex)
    for v in range(space.n_vertices):
        p = np.asarray(generator(v), dtype=complex)
        if p.shape != (m, m):
            raise ValidationError(f"generator returned shape {p.shape} at vertex {v}")
        values[v] = p
    return ProjectionField(space, values)


def constant_field(space: SimplicialSpace, p) -> ProjectionField:
    p = np.asarray(p, dtype=complex)
    return ProjectionField(space, np.broadcast_to(p, (space.n_vertices,) + p.shape))


def trivial_bundle(space: SimplicialSpace, m: int, rank: int | None = None) -> ProjectionField:
    """Constant ``diag(1, .., 1, 0, .., 0)`` with ``rank`` ones (default ``m``)."""
    rank = m if rank is None else rank
    return constant_field(space, np.diag([1.0] * rank + [0.0] * (m - rank)))


def bundle_rank(P: ProjectionField, component: int = 0) -> int:
    """The common fiber rank of ``P`` on a connected component."""
    if not 0 <= component < P.space.n_components:
        raise ValidationError(f"no component {component}")
    v = int(np.flatnonzero(P.space.component_labels == component)[0])
    return int(P.ranks[v])


def same_bundle(a: ProjectionField, b: ProjectionField) -> bool:
    if a is b:
        return True
    return (
        a.space == b.space
        and a.values.shape == b.values.shape
        and np.array_equal(a.values, b.values)
    )


def nearest_vertex_map(source: SimplicialSpace, target: SimplicialSpace) -> np.ndarray:
    """For each vertex of ``target`` the nearest vertex of ``source`` by coordinates."""
    if source.coordinates is None or target.coordinates is None:
        raise ValidationError("transfer between spaces needs vertex coordinates")
    _, idx = cKDTree(source.coordinates).query(target.coordinates)
    return np.asarray(idx, dtype=int)


def transfer_field(P: ProjectionField, target: SimplicialSpace) -> ProjectionField:
    """Sample ``P`` onto another mesh of the same region by nearest vertex."""
    if P.space is target or P.space == target:
        return P
    return ProjectionField(target, P.values[nearest_vertex_map(P.space, target)], P.tol)


@dataclass(frozen=True, eq=False)
class CoronaProjection:
    """Projection field on the outer cycle of a tower, obtained as a stable limit.

    ``deviation`` is the sup-distance between the last two levels and is at
    most ``eps``; ``level_deviations`` lists all consecutive distances.
    """

    tower: AnnulusTower
    values: np.ndarray
    eps: float
    deviation: float
    level_deviations: tuple = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.shape[0] != self.tower.corona_length:
            raise ValidationError("corona values do not match the corona cycle")
        check_pointwise_projections(values, get_tol())
        if self.deviation > self.eps:
            raise ValidationError("recorded deviation exceeds the stabilization tolerance")

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @cached_property
    def field(self) -> ProjectionField:
        """The limit as a :class:`ProjectionField` over ``tower.corona_space``."""
        return ProjectionField(self.tower.corona_space, self.values)


def corona_limit(fields, tower: AnnulusTower, eps: float = DEFAULT_CORONA_EPS) -> CoronaProjection:
    """Restrict per-level fields to the corona cycle and test stabilization.

    Raises
    ------
    NonStabilizing
        If the last two levels differ by more than ``eps`` somewhere on the cycle.
    """
    fields = list(fields)
    if len(fields) != tower.depth:
        raise ValidationError(f"need {tower.depth} level fields, got {len(fields)}")
    ms = {f.m for f in fields}
    if len(ms) != 1:
        raise ValidationError("level fields differ in ambient dimension")
    restricted = []
    for t, (f, level, cycle) in enumerate(zip(fields, tower.levels, tower.corona_cycles)):
        if f.space.n_vertices != level.n_vertices:
            raise ValidationError(f"field {t} is not defined on tower level {t}")
        restricted.append(f.values[list(cycle)])
    devs = tuple(
        float(opnorm(b - a).max()) for a, b in zip(restricted, restricted[1:])
    )
    last = devs[-1] if devs else 0.0
    if last > eps:
        raise NonStabilizing(
            f"corona restriction moved by {last:.3g} > {eps:.3g} between the last two levels"
        )
    return CoronaProjection(tower, restricted[-1], float(eps), last, devs)
