"""Extensions ``0 -> V -> W -> Z -> 0`` of section modules and their Busby invariants.

An extension is stored as gluing data on the boundary cycle of a closed
space ``X``: ``V`` is the module of sections of ``eta`` over ``X`` vanishing on
the cycle, ``Z`` is the module of sections of ``xi`` over a space ``Y``, and

    W = {alpha in Gamma(eta) : alpha(c) = D(c) z(f(c)) on the cycle, for some z}

with ``Pi(alpha) = z``.  The winding family ``W_k`` takes ``X`` the closed disk,
``Y`` a point and ``D = omega`` of winding number ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._config import CORONA_AGREEMENT_TOL, get_tol
from .bundle import (
    DEFAULT_CORONA_EPS,
    ProjectionField,
    corona_limit,
    opnorm,
    same_bundle,
    transfer_field,
    trivial_bundle,
)
from .errors import LiftFailure, ValidationError
from .hilbmod import (
    FunctionField,
    SectionField,
    apply_morphism,
    identity_morphism,
    inner_product,
    is_full,
    is_ideal_section,
    line_section,
)
from .invariants.winding import winding_number
from .isometry import IsometryField, polar_isometry
from .mesh import (
    AnnulusTower,
    SimplicialSpace,
    boundary_subcomplex,
    check_cycle,
    cycle_space,
    outer_cycle,
    point_space,
)


@dataclass(frozen=True, eq=False)
class WindingDatum:
    """Unit-complex samples ``omega`` on a boundary cycle with declared winding ``k``."""

    omega: np.ndarray
    k: int

    def __post_init__(self):
        omega = np.array(self.omega, dtype=complex).reshape(-1)
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "k", int(self.k))
        computed = winding_number(omega)
        if computed != self.k:
            raise LiftFailure(
                f"samples wind {computed} times but winding {self.k} was declared; "
                "the cycle is too coarse"
            )


@dataclass(frozen=True, eq=False)
class ExtensionTriple:
    """Gluing description of an extension; see the module docstring.

    Parameters
    ----------
    V_bundle : ProjectionField
        ``eta`` over ``X``.  The boundary vertices of ``X`` must be exactly
        the vertices of ``cycle``.
    Z_bundle : ProjectionField
        ``xi`` over ``Y``.
    cycle : sequence of int
        Boundary cycle of ``X`` in order.
    vertex_map : array of int
        ``f``: cycle position -> vertex of ``Y``.
    gluing : array, shape (len(cycle), eta.m, xi.m)
        Fiberwise isometries ``D(c): xi_{f(c)} -> eta_c``.
    level_gluing : tuple of arrays, optional
        Per-tower-level corona values of the multiplier lift, when they are
        known to vary with the level; defaults to ``gluing`` at every level.
    """

    V_bundle: ProjectionField
    Z_bundle: ProjectionField
    cycle: tuple
    vertex_map: np.ndarray
    gluing: np.ndarray
    winding: WindingDatum | None = None
    level_gluing: tuple | None = None
    kind: str = "custom"

    def __post_init__(self):
        cycle = tuple(int(c) for c in self.cycle)
        object.__setattr__(self, "cycle", cycle)
        check_cycle(self.space, cycle)
        if set(cycle) != set(self.space.boundary):
            raise ValidationError("the boundary of X must be exactly the gluing cycle")
        # validates shapes and the isometry conditions
        gf = self.gluing_field
        object.__setattr__(self, "vertex_map", gf.vertex_map)
        object.__setattr__(self, "gluing", gf.values)
        if self.level_gluing is not None:
            levels = tuple(gf.with_values(g).values for g in self.level_gluing)
            object.__setattr__(self, "level_gluing", levels)
        if self.winding is not None and self.winding.omega.shape != (len(cycle),):
            raise ValidationError("winding datum does not match the cycle")

    @property
    def space(self) -> SimplicialSpace:
        return self.V_bundle.space

    @property
    def algebra(self) -> str:
        """``"one-point"`` when ``Y`` is a point (boundary collapsed), else ``"closure"``."""
        return "one-point" if self.Z_bundle.space.n_vertices == 1 else "closure"

    @cached_property
    def boundary_field(self) -> ProjectionField:
        """``eta`` restricted to the cycle, as a field over the cycle graph."""
        coords = None
        if self.space.coords is not None:
            coords = [self.space.coords[c] for c in self.cycle]
        return ProjectionField(cycle_space(len(self.cycle), coords), self.V_bundle.values[list(self.cycle)])

    @cached_property
    def gluing_field(self) -> IsometryField:
        return IsometryField(self.Z_bundle, self.vertex_map, self.boundary_field, self.gluing)

    @cached_property
    def inclusion(self):
        """``Phi``: the identity on sections of ``eta``."""
        return identity_morphism(self.V_bundle)

    def as_section(self, alpha) -> SectionField:
        if isinstance(alpha, FunctionField):
            return line_section(self.V_bundle, alpha)
        if not same_bundle(alpha.bundle, self.V_bundle):
            raise ValidationError("section does not live on V's bundle")
        return alpha

    def membership(self, alpha, tol=None):
        """``(True, Pi(alpha))`` when ``alpha`` lies in ``W``, else ``(False, None)``."""
        tol = get_tol(tol)
        s = self.as_section(alpha)
        vals = s.values[list(self.cycle)]
        pulled = np.einsum("cji,cj->ci", np.conj(self.gluing), vals)
        nY = self.Z_bundle.space.n_vertices
        z = np.zeros((nY, self.Z_bundle.m), dtype=complex)
        counts = np.bincount(self.vertex_map, minlength=nY)
        np.add.at(z, self.vertex_map, pulled)
        z[counts > 0] /= counts[counts > 0, None]
        back = np.einsum("cij,cj->ci", self.gluing, z[self.vertex_map])
        resid = np.linalg.norm(vals - back, axis=1)
        if np.any(resid > tol * np.maximum(1.0, np.linalg.norm(vals, axis=1))):
            return False, None
        return True, SectionField(self.Z_bundle, z)

    def quotient(self, alpha) -> SectionField:
        """``Pi``: the ``Z``-section glued in by ``alpha``."""
        ok, z = self.membership(alpha)
        if not ok:
            raise ValidationError("element is not in W")
        return z

    def lift(self, z: SectionField) -> SectionField:
        """An element of ``W`` with ``Pi = z``: the glued boundary values spread radially."""
        if not same_bundle(z.bundle, self.Z_bundle):
            raise ValidationError("section does not live on Z's bundle")
        xy = self.space.coordinates
        if xy is None:
            raise ValidationError("lifting needs vertex coordinates")
        cyc = list(self.cycle)
        on_cycle = np.einsum("cij,cj->ci", self.gluing, z.values[self.vertex_map])
        ang = np.arctan2(xy[:, 1], xy[:, 0])
        gap = np.abs(np.angle(np.exp(1j * (ang[:, None] - ang[cyc][None, :]))))
        nearest = np.argmin(gap, axis=1)
        radius = np.hypot(xy[:, 0], xy[:, 1]) / np.hypot(*xy[cyc].T).max()
        weight = np.clip(radius, 0.0, 1.0)
        weight[cyc] = 1.0
        vals = weight[:, None] * np.einsum("vij,vj->vi", self.V_bundle.values, on_cycle[nearest])
        vals[cyc] = on_cycle
        return SectionField(self.V_bundle, vals)

    def cutoff(self) -> FunctionField:
        """A function vanishing exactly on the cycle."""
        xy = self.space.coordinates
        if xy is None:
            vals = np.ones(self.space.n_vertices)
        else:
            r2 = (xy ** 2).sum(axis=1) / (xy[list(self.cycle)] ** 2).sum(axis=1).max()
            vals = np.where(r2 < 1.0 - 1e-12, 1.0 - r2, 1.0)
        vals[list(self.cycle)] = 0.0
        return FunctionField(self.space, vals)


def build_Wk_extension(k: int, disk: SimplicialSpace) -> ExtensionTriple:
    """The extension ``W_k`` of ``C`` by ``C_0(U)`` over the closed disk.

    ``omega(theta) = exp(i k theta)`` is sampled on the outer ring.

    Raises
    ------
    LiftFailure
        If some boundary step carries an argument change of ``pi`` or more.
    """
    k = int(k)
    cycle = outer_cycle(disk)
    xy = disk.coordinates[list(cycle)]
    theta = np.mod(np.arctan2(xy[:, 1], xy[:, 0]), 2 * np.pi)
    steps = np.diff(np.append(theta, theta[0] + 2 * np.pi))
    if np.any(abs(k) * steps >= np.pi):
        raise LiftFailure(
            f"boundary cycle of {len(cycle)} vertices is too coarse for winding {k}; refine the mesh"
        )
    omega = np.exp(1j * k * theta)
    datum = WindingDatum(omega, k)
    point = point_space()
    return ExtensionTriple(
        V_bundle=trivial_bundle(disk, 1),
        Z_bundle=trivial_bundle(point, 1),
        cycle=cycle,
        vertex_map=np.zeros(len(cycle), dtype=int),
        gluing=omega[:, None, None],
        winding=datum,
        kind="disk-wk",
    )


def build_split_extension(disk: SimplicialSpace) -> ExtensionTriple:
    """``W = C(X)``: functions on the disk, quotient by restriction to the boundary."""
    cycle = outer_cycle(disk)
    bdry = boundary_subcomplex(disk)
    index = {v: i for i, v in enumerate(sorted(disk.boundary))}
    return ExtensionTriple(
        V_bundle=trivial_bundle(disk, 1),
        Z_bundle=trivial_bundle(bdry, 1),
        cycle=cycle,
        vertex_map=np.array([index[c] for c in cycle]),
        gluing=np.ones((len(cycle), 1, 1)),
        kind="split",
    )


def membership_Wk(ext: ExtensionTriple, alpha: FunctionField):
    """``(True, lambda)`` iff ``alpha = lambda * omega`` on the boundary."""
    if ext.Z_bundle.space.n_vertices != 1 or ext.Z_bundle.m != 1:
        raise ValidationError("membership_Wk needs an extension of C (one-point Z)")
    ok, z = ext.membership(alpha)
    if not ok:
        return False, None
    return True, complex(z.values[0, 0])


def _corona_transport(ext: ExtensionTriple, tower: AnnulusTower) -> np.ndarray:
    """For each tower corona position, the nearest-angle position on the extension cycle."""
    n_t, n_e = tower.corona_length, len(ext.cycle)
    xy_e = ext.space.coordinates
    xy_t = tower.corona_space.coordinates
    if xy_e is None or xy_t is None:
        if n_t != n_e:
            raise ValidationError("without coordinates the tower corona must match the cycle length")
        return np.arange(n_e)
    a_e = np.arctan2(*xy_e[list(ext.cycle)].T[::-1])
    a_t = np.arctan2(*xy_t.T[::-1])
    gap = np.abs(np.angle(np.exp(1j * (a_t[:, None] - a_e[None, :]))))
    g = np.argmin(gap, axis=1)
    step = np.mod(np.roll(g, -1) - g, n_e)
    if np.any((step != 0) & (step != 1) & (step != n_e - 1)):
        raise ValidationError("tower corona is coarser than the extension boundary cycle")
    return g


def busby_fields(ext: ExtensionTriple, tower: AnnulusTower, eps: float = DEFAULT_CORONA_EPS) -> list:
    """The Busby isometry field on the corona cycle at every tower level.

    ``V``'s bundle is sampled onto each level and must stabilize on the outer
    cycle (``corona_limit``); the gluing is transported to the corona by
    nearest angle and re-orthonormalized into the level's fibers.
    """
    if ext.level_gluing is not None and len(ext.level_gluing) != tower.depth:
        raise ValidationError(
            f"extension carries {len(ext.level_gluing)} level gluings for a tower of depth {tower.depth}"
        )
    fields = [transfer_field(ext.V_bundle, level) for level in tower.levels]
    corona_limit(fields, tower, eps)
    g = _corona_transport(ext, tower)
    base = tower.corona_space
    f = ext.vertex_map[g]
    Ps = ext.Z_bundle.values[f]
    out = []
    for t in range(tower.depth):
        zeta = fields[t].values[list(tower.corona_cycles[t])]
        target = ProjectionField(base, zeta)
        G = (ext.level_gluing[t] if ext.level_gluing is not None else ext.gluing)[g]
        vals = np.stack([polar_isometry(zeta[c] @ G[c], Ps[c]) for c in range(len(g))])
        out.append(IsometryField(ext.Z_bundle, f, target, vals))
    return out


def busby_invariant(ext: ExtensionTriple, tower: AnnulusTower, eps: float = DEFAULT_CORONA_EPS) -> IsometryField:
    """The Busby invariant as an isometry field over the stabilized corona cycle.

    Raises
    ------
    NonStabilizing
        If ``V``'s bundle has no detectable corona limit on this tower.
    """
    return busby_fields(ext, tower, eps)[-1]


def extension_from_busby(
    delta: IsometryField,
    V_bundle: ProjectionField,
    Z_bundle: ProjectionField,
    tower: AnnulusTower,
    eps: float = DEFAULT_CORONA_EPS,
) -> ExtensionTriple:
    """The pullback extension realizing ``delta`` as its Busby invariant.

    ``X`` is the outermost annulus of the tower with only the corona cycle
    marked as boundary; ``W`` consists of bounded sections of ``V``'s bundle
    over it whose corona values agree with ``delta`` applied to a ``Z``-section.
    """
    if delta.source.m != Z_bundle.m or delta.target.m != V_bundle.m:
        raise ValidationError("incompatible bundle dimensions")
    if delta.source.space.n_vertices != Z_bundle.space.n_vertices or not np.allclose(
        delta.source.values, Z_bundle.values, atol=get_tol()
    ):
        raise ValidationError("delta's source bundle differs from Z's bundle")
    if delta.base.n_vertices != tower.corona_length:
        raise ValidationError("delta is not defined on the tower's corona cycle")
    corona = corona_limit([transfer_field(V_bundle, level) for level in tower.levels], tower, eps)
    if opnorm(delta.target.values - corona.values).max(initial=0.0) > CORONA_AGREEMENT_TOL:
        raise ValidationError("delta does not land in the corona bundle of V")
    level0 = tower.levels[0]
    cycle = tuple(tower.corona_cycles[0])
    space = level0.with_boundary(cycle)
    V = ProjectionField(space, transfer_field(V_bundle, level0).values)
    return ExtensionTriple(V, Z_bundle, cycle, delta.vertex_map, delta.values, kind="pullback")


def check_quotient_morphism(ext: ExtensionTriple, samples, tol=None) -> bool:
    """``<Pi a, Pi b>(f(c)) = <a, b>(c)`` on the cycle for every sample pair."""
    tol = get_tol(tol)
    cyc = list(ext.cycle)
    for a, b in samples:
        a, b = ext.as_section(a), ext.as_section(b)
        lhs = inner_product(a, b).values[cyc]
        rhs = inner_product(ext.quotient(a), ext.quotient(b)).values[ext.vertex_map]
        if np.max(np.abs(lhs - rhs)) > tol:
            return False
    return True


def check_exactness(ext: ExtensionTriple, samples, tol=None) -> bool:
    """``Pi(s) = 0`` exactly for the ideal samples, and ``Phi`` lands in ``ker Pi``.

    Every sample must lie in ``W``.
    """
    tol = get_tol(tol)
    cut = ext.cutoff()
    for alpha in samples:
        s = ext.as_section(alpha)
        ok, z = ext.membership(s, tol)
        if not ok:
            raise ValidationError("sample is not an element of W")
        pi_zero = bool(np.all(np.abs(inner_product(z, z).values) <= tol))
        if pi_zero != is_ideal_section(s, tol):
            return False
        image = apply_morphism(ext.inclusion, s.scale(cut))
        ok, z_img = ext.membership(image, tol)
        if not ok or np.any(np.abs(inner_product(z_img, z_img).values) > tol):
            return False
    return True


def check_fullness(ext: ExtensionTriple, samples, tol=None) -> bool:
    """Inner products of the samples have no common zero and lie in the base algebra.

    For the one-point algebra the inner products must be constant on the cycle.
    """
    tol = get_tol(tol)
    sections = [ext.as_section(a) for a in samples]
    if not is_full(sections, tol):
        return False
    if ext.algebra == "one-point":
        cyc = list(ext.cycle)
        for i, a in enumerate(sections):
            for b in sections[i:]:
                vals = inner_product(a, b).values[cyc]
                if np.max(np.abs(vals - vals[0])) > tol:
                    return False
    return True
