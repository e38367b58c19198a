"""Fiberwise isometries and the Hilbert-module morphisms they induce.

A fiberwise isometry ``D`` from the pullback ``f*(xi)`` to ``zeta`` gives the
morphism ``s -> D o s o f``; conversely a morphism is read back fiber by fiber
by evaluating it on probe sections that span each source fiber.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._config import get_tol
from .bundle import ProjectionField, fiber_basis
from .errors import ValidationError
from .hilbmod import (
    ModuleMorphism,
    apply_morphism,
    check_morphism,
    constant_section,
)
from .mesh import SimplicialSpace


@dataclass(frozen=True, eq=False)
class PullbackBundle(ProjectionField):
    """``f*(xi)``: the fiber at ``z`` is the stored fiber of ``xi`` at ``f(z)``."""

    source: ProjectionField | None = None
    vertex_map: np.ndarray | None = None


def pullback_bundle(xi: ProjectionField, base: SimplicialSpace, vertex_map) -> PullbackBundle:
    """Pull ``xi`` back along a vertex map ``base -> xi.space``.

    Every edge of ``base`` must map to an edge or collapse to a vertex.
    """
    f = np.asarray(vertex_map, dtype=int).reshape(-1)
    if f.shape != (base.n_vertices,) or np.any(f < 0) or np.any(f >= xi.space.n_vertices):
        raise ValidationError("vertex map must send every base vertex to a vertex of xi's space")
    for a, b in base.edges:
        if f[a] != f[b] and not xi.space.has_edge(int(f[a]), int(f[b])):
            raise ValidationError(
                f"edge {(a, b)} maps to non-adjacent vertices {(int(f[a]), int(f[b]))}"
            )
    return PullbackBundle(base, xi.values[f], xi.tol, source=xi, vertex_map=f)


@dataclass(frozen=True, eq=False)
class IsometryField:
    """Per-vertex matrices ``D(z): xi_{f(z)} -> zeta_z`` over ``base = target.space``.

    ``values[z]`` has shape ``(target.m, source.m)``.  With ``check=True``
    (default) the constructor requires ``D P_xi(f(z)) = D``,
    ``P_zeta(z) D = D`` and ``D* D = P_xi(f(z))``.
    """

    source: ProjectionField
    vertex_map: np.ndarray
    target: ProjectionField
    values: np.ndarray
    check: bool = field(default=True, repr=False)
    tol: float | None = field(default=None, repr=False)

    def __post_init__(self):
        f = np.array(self.vertex_map, dtype=int).reshape(-1)
        D = np.array(self.values, dtype=complex)
        n = self.target.space.n_vertices
        if f.shape != (n,) or np.any(f < 0) or np.any(f >= self.source.space.n_vertices):
            raise ValidationError("vertex map must send every base vertex to a source vertex")
        if D.shape != (n, self.target.m, self.source.m):
            raise ValidationError(
                f"expected values of shape {(n, self.target.m, self.source.m)}, got {D.shape}"
            )
        f.setflags(write=False)
        D.setflags(write=False)
        object.__setattr__(self, "vertex_map", f)
        object.__setattr__(self, "values", D)
        if self.check:
            self.validate(self.tol)

    @property
    def base(self) -> SimplicialSpace:
        return self.target.space

    @property
    def source_projections(self) -> np.ndarray:
        """``P_xi(f(z))`` for every base vertex ``z``."""
        return self.source.values[self.vertex_map]

    def defects(self, tol=None) -> list:
        """Invariant violations as ``(vertex, kind, error)`` triples."""
        tol = get_tol(tol)
        D, Ps, Pt = self.values, self.source_projections, self.target.values
        Dh = np.conj(np.swapaxes(D, 1, 2))
        checks = (
            ("source-fiber", D @ Ps - D),
            ("target-fiber", Pt @ D - D),
            ("isometry", Dh @ D - Ps),
        )
        out = []
        for kind, resid in checks:
            err = np.linalg.norm(resid, axis=(1, 2)) if len(resid) else np.zeros(0)
            out += [(int(z), kind, float(err[z])) for z in np.flatnonzero(err > tol)]
        return sorted(out)

    def validate(self, tol=None) -> None:
        bad = self.defects(tol)
        if bad:
            z, kind, err = bad[0]
            raise ValidationError(f"not a fiberwise isometry: {kind} error {err:.3g} at vertex {z}")

    def with_values(self, values, check: bool = True) -> IsometryField:
        return IsometryField(self.source, self.vertex_map, self.target, values, check, self.tol)


def standard_probes(xi: ProjectionField) -> list:
    """Sections ``v -> P(v) e_i``; together they span every fiber."""
    return [constant_section(xi, np.eye(xi.m)[i]) for i in range(xi.m)]


def isometry_to_delta(D: IsometryField) -> ModuleMorphism:
    """The morphism ``s -> D o s o f``."""
    return ModuleMorphism(D.source, D.target, D.vertex_map, D.values)


def delta_to_isometry(delta: ModuleMorphism, probe_basis=None, tol=None) -> IsometryField:
    """Recover ``D`` from a morphism by evaluating it on probe sections.

    ``delta`` is used only through :func:`apply_morphism`.  At every base
    vertex ``z`` the probe values at ``f(z)``, written in an orthonormal fiber
    basis, must have a nonsingular Gram matrix; ``D(z)`` is the unique linear
    map on the fiber sending each probe value to the probe image at ``z``.
    """
    tol = get_tol(tol)
    xi = delta.source
    probes = standard_probes(xi) if probe_basis is None else list(probe_basis)
    if not probes:
        raise ValidationError("empty probe basis")
    pairs = [(a, b) for i, a in enumerate(probes) for b in probes[i:]]
    if not check_morphism(delta, pairs, tol):
        raise ValidationError("delta fails the morphism axiom on the probe sections")
    f = delta.vertex_map
    S = np.stack([p.values for p in probes], axis=-1)  # (n_Y, m_xi, p)
    E = np.stack([apply_morphism(delta, p).values for p in probes], axis=-1)  # (n_Z, m_zeta, p)
    n = delta.target.space.n_vertices
    out = np.zeros((n, delta.target.m, xi.m), dtype=complex)
    bases = {}
    for z in range(n):
        y = int(f[z])
        if y not in bases:
            B = fiber_basis(xi.values[y])
            C = B.conj().T @ S[y]
            G = C @ C.conj().T
            if B.shape[1] and np.linalg.eigvalsh(G).min() <= tol:
                raise ValidationError(f"probe basis does not span the fiber at vertex {y}")
            bases[y] = (B, C, G)
        B, C, G = bases[y]
        if B.shape[1] == 0:
            continue
        out[z] = E[z] @ C.conj().T @ np.linalg.solve(G, B.conj().T)
    return IsometryField(xi, f, delta.target, out, tol=tol)


def _morphisms_agree(a: ModuleMorphism, b: ModuleMorphism, probes, tol) -> bool:
    return all(
        np.max(np.abs(apply_morphism(a, p).values - apply_morphism(b, p).values), initial=0.0) <= tol
        for p in probes
    )


def roundtrip_check(x, probe_basis=None, tol=None) -> bool:
    """Both composites ``D -> Delta -> D`` and ``Delta -> D -> Delta`` are identities.

    Accepts an :class:`IsometryField` or a :class:`ModuleMorphism`.  Fields
    are compared entrywise, morphisms on the probe sections.  Invalid input
    yields ``False``.
    """
    tol = get_tol(tol)
    try:
        if isinstance(x, IsometryField):
            x.validate(tol)
            D = x
            delta = isometry_to_delta(D)
        elif isinstance(x, ModuleMorphism):
            delta = x
            D = delta_to_isometry(delta, probe_basis, tol)
        else:
            raise TypeError(f"expected IsometryField or ModuleMorphism, got {type(x).__name__}")
        probes = standard_probes(delta.source) if probe_basis is None else list(probe_basis)
        D_back = delta_to_isometry(isometry_to_delta(D), probes, tol)
        delta_back = isometry_to_delta(delta_to_isometry(delta, probes, tol))
    except ValidationError:
        return False
    fields_ok = np.max(np.abs(D_back.values - D.values), initial=0.0) <= tol
    return bool(fields_ok and _morphisms_agree(delta, delta_back, probes, tol))


def polar_isometry(A: np.ndarray, source_projection: np.ndarray, rank: int | None = None) -> np.ndarray:
    """Closest partial isometry to ``A`` with initial space ``Im source_projection``."""
    P = source_projection
    r = int(round(np.real(np.trace(P)))) if rank is None else rank
    if r == 0:
        return np.zeros_like(A)
    W, sv, Vh = np.linalg.svd(A @ P)
    if sv[r - 1] <= 1e-8:
        raise ValidationError("cannot orthonormalize a rank-deficient fiber map")
    return W[:, :r] @ Vh[:r, :]
