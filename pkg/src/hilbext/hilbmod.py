"""Hilbert module structure on section fields.

Sections of a projection field form a Hilbert module over the functions on
the underlying space, with the pointwise Hermitian pairing as inner product.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._config import get_tol
from .bundle import ProjectionField, same_bundle
from .errors import ValidationError
from .mesh import SimplicialSpace

# fixed coefficient for the linearity probe in check_morphism
_LINEARITY_COEFF = 0.7 - 0.3j


@dataclass(frozen=True, eq=False)
class FunctionField:
    """A complex value at every vertex of ``space``."""

    space: SimplicialSpace
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex).reshape(-1)
        if values.shape[0] != self.space.n_vertices:
            raise ValidationError("one value per vertex required")
        if not np.all(np.isfinite(values)):
            raise ValidationError("function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __mul__(self, other):
        if isinstance(other, FunctionField):
            return FunctionField(self.space, self.values * other.values)
        return FunctionField(self.space, self.values * other)

    __rmul__ = __mul__

    def conj(self) -> FunctionField:
        return FunctionField(self.space, np.conj(self.values))

    def vanishes_on_boundary(self, tol=None) -> bool:
        b = self.space.boundary_mask
        return bool(np.all(np.abs(self.values[b]) <= get_tol(tol)))


@dataclass(frozen=True, eq=False)
class SectionField:
    """A vector ``s(v)`` in the fiber ``Im P(v)`` at every vertex."""

    bundle: ProjectionField
    values: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        n, m = self.bundle.space.n_vertices, self.bundle.m
        if values.shape != (n, m):
            raise ValidationError(f"expected section values of shape {(n, m)}, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.check and n:
            tol = get_tol()
            resid = np.linalg.norm(
                np.einsum("vij,vj->vi", self.bundle.values, values) - values, axis=1
            )
            scale = np.maximum(1.0, np.linalg.norm(values, axis=1))
            bad = np.flatnonzero(resid > tol * scale)
            if bad.size:
                raise ValidationError(f"section leaves the fiber at vertex {int(bad[0])}")

    @property
    def space(self) -> SimplicialSpace:
        return self.bundle.space

    def _other(self, other):
        if not same_bundle(self.bundle, other.bundle):
            raise ValidationError("sections live on different bundles")
        return other.values

    def __add__(self, other):
        return SectionField(self.bundle, self.values + self._other(other))

    def __sub__(self, other):
        return SectionField(self.bundle, self.values - self._other(other))

    def __neg__(self):
        return SectionField(self.bundle, -self.values)

    def __mul__(self, c):
        """Scalar multiple, or the module action of a :class:`FunctionField`."""
        if isinstance(c, FunctionField):
            return self.scale(c)
        return SectionField(self.bundle, self.values * complex(c))

    __rmul__ = __mul__

    def scale(self, g: FunctionField) -> SectionField:
        if g.space.n_vertices != self.space.n_vertices:
            raise ValidationError("function lives on a different space")
        return SectionField(self.bundle, self.values * g.values[:, None])


def zero_section(bundle: ProjectionField) -> SectionField:
    return SectionField(bundle, np.zeros((bundle.space.n_vertices, bundle.m)))


def constant_section(bundle: ProjectionField, vector) -> SectionField:
    """``v -> P(v) u`` for a fixed ambient vector ``u``."""
    u = np.asarray(vector, dtype=complex)
    return SectionField(bundle, bundle.values @ u)


def line_section(bundle: ProjectionField, alpha: FunctionField) -> SectionField:
    """Regard a function as a section of a line bundle in ambient ``C^1``."""
    if bundle.m != 1:
        raise ValidationError("functions are sections only of bundles in C^1")
    return SectionField(bundle, alpha.values[:, None])


def inner_product(s: SectionField, t: SectionField) -> FunctionField:
    """Pointwise pairing ``<s(v), t(v)>``, conjugate-linear in ``s``."""
    tv = s._other(t)
    return FunctionField(s.space, np.einsum("vi,vi->v", np.conj(s.values), tv))


def sup_norm(s: SectionField) -> float:
    """Module norm ``||<s, s>||^(1/2)``, i.e. the largest fiber norm."""
    if s.values.shape[0] == 0:
        return 0.0
    return float(np.linalg.norm(s.values, axis=1).max())


def is_ideal_section(s: SectionField, tol=None) -> bool:
    """Whether ``<s, s>`` vanishes on every boundary vertex."""
    b = s.space.boundary_mask
    return bool(np.all(np.abs(inner_product(s, s).values[b]) <= get_tol(tol)))


def fiber_quotient_norm(s: SectionField, z: int) -> float:
    """Norm of ``s`` in the quotient by sections vanishing at ``z``.

    The infimum over sections agreeing with ``s`` at ``z`` is attained by the
    fiber value itself, so this is ``|<s, s>(z)|^(1/2)``.
    """
    if not 0 <= z < s.space.n_vertices:
        raise ValidationError(f"no vertex {z}")
    return float(np.sqrt(abs(inner_product(s, s).values[z])))


def is_full(sections, tol=None) -> bool:
    """Inner products of ``sections`` have no common zero on the space."""
    sections = list(sections)
    if not sections:
        return False
    tol = get_tol(tol)
    norms = np.max([np.abs(inner_product(s, s).values) for s in sections], axis=0)
    return bool(np.all(norms > tol))


@dataclass(frozen=True, eq=False)
class ModuleMorphism:
    """Section map ``s -> (z -> T(z) s(f(z)))`` over a vertex map ``f``.

    ``vertex_map`` sends target-space vertices to source-space vertices and is
    the dual datum of the algebra map ``alpha -> alpha o f``.
    ``fiber_transform[z]`` has shape ``(target.m, source.m)`` and must carry
    the source fiber at ``f(z)`` into the target fiber at ``z``.
    """

    source: ProjectionField
    target: ProjectionField
    vertex_map: np.ndarray
    fiber_transform: np.ndarray

    def __post_init__(self):
        f = np.array(self.vertex_map, dtype=int).reshape(-1)
        T = np.array(self.fiber_transform, dtype=complex)
        nt, ns = self.target.space.n_vertices, self.source.space.n_vertices
        if f.shape != (nt,) or np.any(f < 0) or np.any(f >= ns):
            raise ValidationError("vertex map must send every target vertex to a source vertex")
        if T.shape != (nt, self.target.m, self.source.m):
            raise ValidationError(
                f"fiber transforms must have shape {(nt, self.target.m, self.source.m)}"
            )
        f.setflags(write=False)
        T.setflags(write=False)
        object.__setattr__(self, "vertex_map", f)
        object.__setattr__(self, "fiber_transform", T)
        if nt:
            TP = T @ self.source.values[f]
            leak = np.linalg.norm(self.target.values @ TP - TP, axis=(1, 2))
            bad = np.flatnonzero(leak > get_tol() * np.maximum(1.0, np.linalg.norm(TP, axis=(1, 2))))
            if bad.size:
                raise ValidationError(
                    f"fiber transform leaves the target fiber at vertex {int(bad[0])}"
                )


def identity_morphism(bundle: ProjectionField) -> ModuleMorphism:
    n, m = bundle.space.n_vertices, bundle.m
    return ModuleMorphism(bundle, bundle, np.arange(n), np.broadcast_to(np.eye(m), (n, m, m)))


def apply_morphism(phi: ModuleMorphism, s: SectionField) -> SectionField:
    if not same_bundle(phi.source, s.bundle):
        raise ValidationError("section does not live on the morphism's source bundle")
    values = np.einsum("zij,zj->zi", phi.fiber_transform, s.values[phi.vertex_map])
    return SectionField(phi.target, values)


def morphism_defects(phi: ModuleMorphism, samples, tol=None) -> list:
    """Failures of ``<Phi v, Phi w>(z) = <v, w>(f(z))`` and of linearity.

    Returns a list of dicts ``{"pair", "vertex", "kind", "error"}``; empty
    when every sample pair passes.
    """
    tol = get_tol(tol)
    defects = []
    for k, (v, w) in enumerate(samples):
        pv, pw = apply_morphism(phi, v), apply_morphism(phi, w)
        lhs = inner_product(pv, pw).values
        rhs = inner_product(v, w).values[phi.vertex_map]
        err = np.abs(lhs - rhs)
        for z in np.flatnonzero(err > tol)[:1]:
            defects.append({"pair": k, "vertex": int(z), "kind": "inner-product", "error": float(err[z])})
        combo = apply_morphism(phi, v + w * _LINEARITY_COEFF).values
        lin = np.linalg.norm(combo - pv.values - _LINEARITY_COEFF * pw.values, axis=1)
        for z in np.flatnonzero(lin > tol)[:1]:
            defects.append({"pair": k, "vertex": int(z), "kind": "linearity", "error": float(lin[z])})
    return defects


def check_morphism(phi: ModuleMorphism, samples, tol=None) -> bool:
    """Verdict of the morphism axiom on the sample pairs."""
    return not morphism_defects(phi, samples, tol)
