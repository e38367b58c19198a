"""Homotopy decisions with explicit discrete homotopy certificates."""
from __future__ import annotations

import math
from collections import deque

import numpy as np

from ..bundle import fiber_basis, opnorm
from ..errors import ValidationError
from ..isometry import IsometryField
from .fredholm import StructuredOperator, fredholm_index
from .stiefel import fiber_ranks, stiefel_class, unitary_exp, unitary_log

CERTIFICATE_TOL = 1e-6
MAX_STEP = 0.5
# aim below MAX_STEP so rounding never pushes a step over
_TARGET_STEP = 0.25


def _check_same_shape(a: IsometryField, b: IsometryField) -> None:
    if (
        a.base != b.base
        or a.values.shape != b.values.shape
        or not np.array_equal(a.vertex_map, b.vertex_map)
        or a.source.values.shape != b.source.values.shape
        or not np.allclose(a.source.values, b.source.values)
        or not np.allclose(a.target.values, b.target.values)
    ):
        raise ValidationError("isometry fields do not share base, bundles and vertex map")


def homotopy_equivalent(a, b, return_certificate: bool = False):
    """Decide whether two Busby data are homotopic.

    Isometry fields over a graph are compared by :func:`stiefel_class`,
    structured operators by :func:`fredholm_index`.  With
    ``return_certificate=True`` a pair ``(verdict, path)`` is returned, where
    ``path`` is a list of isometry fields from ``a`` to ``b`` when the verdict
    is true for isometry fields, else ``None``.
    """
    if isinstance(a, StructuredOperator) and isinstance(b, StructuredOperator):
        verdict = fredholm_index(a) == fredholm_index(b)
        return (verdict, None) if return_certificate else verdict
    if not (isinstance(a, IsometryField) and isinstance(b, IsometryField)):
        raise ValidationError("homotopy_equivalent compares two fields or two operators")
    _check_same_shape(a, b)
    verdict = stiefel_class(a) == stiefel_class(b)
    if not return_certificate:
        return verdict
    return verdict, (homotopy_certificate(a, b) if verdict else None)


def _tree_phase(space, dets: np.ndarray) -> np.ndarray:
    """Continuous argument of ``dets`` along a BFS spanning forest."""
    phase = np.zeros(space.n_vertices)
    seen = np.zeros(space.n_vertices, dtype=bool)
    for root in range(space.n_vertices):
        if seen[root]:
            continue
        seen[root] = True
        phase[root] = np.angle(dets[root])
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in sorted(space.neighbors[u]):
                if not seen[v]:
                    seen[v] = True
                    phase[v] = phase[u] + np.angle(dets[v] * np.conj(dets[u]))
                    queue.append(v)
    return phase


def _complete_unitary(A: np.ndarray) -> np.ndarray:
    """Unitary whose first columns are the orthonormal columns of ``A``."""
    m, k = A.shape
    if k == m:
        return A.copy()
    u, _, _ = np.linalg.svd(np.eye(m) - A @ A.conj().T)
    return np.hstack([A, u[:, : m - k]])


def homotopy_certificate(a: IsometryField, b: IsometryField) -> list:
    """A discrete path of isometry fields from ``a`` to ``b``.

    Each step is a valid isometry field and consecutive steps are closer than
    ``MAX_STEP`` in sup operator norm.  For equal ranks the relative unitary
    ``a* b`` has its determinant phase removed along a spanning forest and is
    joined to the identity by the principal-logarithm geodesic; for smaller
    source rank the frames are completed to unitaries of determinant ratio 1
    and joined the same way.
    """
    _check_same_shape(a, b)
    rs, rt = fiber_ranks(a)
    n = a.base.n_vertices
    Ps, Pt = a.source_projections, a.target.values
    # per vertex (left, L, right, rate): D_t = left @ exp(tL) @ right * exp(i t rate),
    # keeping only the first rs columns of exp(tL) when rs < rt
    gens = []
    if rs == rt:
        dets = np.ones(n, dtype=complex)
        rel = []
        for z in range(n):
            B = fiber_basis(Ps[z])
            R = B.conj().T @ a.values[z].conj().T @ b.values[z] @ B
            rel.append((B, R))
            if rs:
                dets[z] = np.linalg.det(R)
        phase = _tree_phase(a.base, dets)
        for z, (B, R) in enumerate(rel):
            if rs == 0:
                gens.append(None)
                continue
            Rp = R * np.exp(-1j * phase[z] / rs)
            gens.append((a.values[z] @ B, unitary_log(Rp), B.conj().T, phase[z] / rs))
    else:
        for z in range(n):
            Bs, Bt = fiber_basis(Ps[z]), fiber_basis(Pt[z])
            UA = _complete_unitary(Bt.conj().T @ a.values[z] @ Bs)
            UB = _complete_unitary(Bt.conj().T @ b.values[z] @ Bs)
            rel = UA.conj().T @ UB
            UB[:, -1] *= np.conj(np.linalg.det(rel))
            L = unitary_log(UA.conj().T @ UB)
            gens.append((Bt @ UA, L, Bs.conj().T, 0.0))
    speed = 0.0
    for g in gens:
        if g is not None:
            _, L, _, rate = g
            speed = max(speed, float(opnorm(L)) + abs(rate))
    steps = max(1, math.ceil(speed / _TARGET_STEP))
    path = []
    for i in range(steps + 1):
        t = i / steps
        if i == 0:
            path.append(a)
            continue
        if i == steps:
            path.append(b)
            continue
        vals = np.zeros_like(a.values)
        for z, g in enumerate(gens):
            if g is None:
                continue
            left, L, right, rate = g
            U = unitary_exp(L, t)
            if rs < rt:
                U = U[:, :rs]
            vals[z] = left @ U @ right * np.exp(1j * t * rate)
        path.append(a.with_values(vals))
    return path


def validate_certificate(path, a: IsometryField, b: IsometryField, tol: float = CERTIFICATE_TOL) -> bool:
    """Every step is an isometry field within ``tol``, steps are short, endpoints match."""
    if not path:
        return False
    if np.abs(path[0].values - a.values).max(initial=0.0) > tol:
        return False
    if np.abs(path[-1].values - b.values).max(initial=0.0) > tol:
        return False
    for step in path:
        if step.defects(tol):
            return False
    for p, q in zip(path, path[1:]):
        if opnorm(q.values - p.values).max(initial=0.0) >= MAX_STEP:
            return False
    return True
