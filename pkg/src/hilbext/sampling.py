"""Seeded random generators for fields, sections and isometries."""
from __future__ import annotations

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

from .bundle import ProjectionField, fiber_basis
from .hilbmod import FunctionField, SectionField
from .isometry import IsometryField
from .mesh import SimplicialSpace


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    if n == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(n, random_state=rng)


def random_isometry(rng: np.random.Generator, m: int, k: int) -> np.ndarray:
    """An ``m x k`` matrix with orthonormal columns."""
    if k == 0:
        return np.zeros((m, 0), dtype=complex)
    return random_unitary(rng, m)[:, :k]


def random_hermitian(rng: np.random.Generator, m: int) -> np.ndarray:
    a = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    return 0.5 * (a + a.conj().T)


def random_projection(rng: np.random.Generator, m: int, rank: int) -> np.ndarray:
    U = random_isometry(rng, m, rank)
    return U @ U.conj().T


def smooth_projection_field(
    space: SimplicialSpace, m: int, rank: int, rng: np.random.Generator, scale: float = 0.5
) -> ProjectionField:
    """``P(x) = U(x) P0 U(x)*`` with ``U(x) = exp(i scale (x H1 + y H2))``."""
    xy = space.coordinates
    if xy is None:
        raise ValueError("smooth fields need vertex coordinates")
    P0 = random_projection(rng, m, rank)
    H1, H2 = random_hermitian(rng, m), random_hermitian(rng, m)
    vals = np.empty((space.n_vertices, m, m), dtype=complex)
    for v, (x, y) in enumerate(xy):
        U = scipy.linalg.expm(1j * scale * (x * H1 + y * H2))
        vals[v] = U @ P0 @ U.conj().T
    return ProjectionField(space, vals)


def random_section(bundle: ProjectionField, rng: np.random.Generator, scale: float = 1.0) -> SectionField:
    n, m = bundle.space.n_vertices, bundle.m
    raw = scale * (rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m)))
    return SectionField(bundle, np.einsum("vij,vj->vi", bundle.values, raw))


def random_function(space: SimplicialSpace, rng: np.random.Generator) -> FunctionField:
    n = space.n_vertices
    return FunctionField(space, rng.normal(size=n) + 1j * rng.normal(size=n))


def random_probes(bundle: ProjectionField, rng: np.random.Generator, extra: int = 1) -> list:
    """``rank + extra`` random sections; generically they span every fiber."""
    r = int(bundle.ranks.max(initial=0))
    return [random_section(bundle, rng) for _ in range(r + extra)]


def random_isometry_field(
    source: ProjectionField,
    vertex_map,
    target: ProjectionField,
    rng: np.random.Generator,
) -> IsometryField:
    """Independent random fiber isometries ``xi_{f(z)} -> zeta_z`` at every base vertex."""
    f = np.asarray(vertex_map, dtype=int)
    n = target.space.n_vertices
    vals = np.zeros((n, target.m, source.m), dtype=complex)
    for z in range(n):
        Bs = fiber_basis(source.values[f[z]])
        Bt = fiber_basis(target.values[z])
        Q = random_isometry(rng, Bt.shape[1], Bs.shape[1])
        vals[z] = Bt @ Q @ Bs.conj().T
    return IsometryField(source, f, target, vals)
