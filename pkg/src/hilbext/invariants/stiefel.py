"""Homotopy invariants of fiberwise isometries over graphs.

Over a 1-complex, fields of ``k``-frames in ``C^m`` are classified by the
winding of the determinant around a cycle basis when ``k = m`` and are all
homotopic when ``k < m``.  Fibers of non-constant bundles are written in
frames transported along each cycle, with the holonomy spread evenly so the
frames close up.
"""
from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np
import scipy.linalg

from ..bundle import fiber_basis, projection_ranks
from ..errors import ValidationError
from ..isometry import IsometryField
from ..mesh import SimplicialSpace
from .winding import winding_number


@dataclass(frozen=True)
class InvariantRecord:
    """Classification record: ``kind`` is ``"finite"`` or ``"infinite"``."""

    kind: str
    windings: tuple = ()

    def to_dict(self) -> dict:
        if self.kind == "infinite":
            return {"kind": "infinite"}
        return {"kind": "finite", "windings": [int(w) for w in self.windings]}

    @classmethod
    def from_dict(cls, d: dict) -> InvariantRecord:
        if d["kind"] == "infinite":
            return cls("infinite")
        if d["kind"] != "finite":
            raise ValidationError(f"unknown record kind {d['kind']!r}")
        return cls("finite", tuple(int(w) for w in d.get("windings", ())))


def unitary_log(U: np.ndarray) -> np.ndarray:
    """Principal logarithm of a unitary matrix (skew-Hermitian)."""
    T, Z = scipy.linalg.schur(U, output="complex")
    phases = np.angle(np.diag(T))
    return (Z * (1j * phases)) @ Z.conj().T


def unitary_exp(L: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``exp(t L)`` for skew-Hermitian ``L``, exactly unitary up to rounding."""
    w, V = np.linalg.eigh(-1j * L)
    return (V * np.exp(1j * t * w)) @ V.conj().T


def transported_frames(projections: np.ndarray) -> np.ndarray:
    """Orthonormal frames of ``Im P_i`` along a closed loop of projections.

    Frames are moved by polar projection from one vertex to the next; the
    holonomy ``H`` found on return is removed by the factor
    ``exp(-(i/n) log H)``, giving a closed, continuous trivialization.
    """
    n = len(projections)
    B0 = fiber_basis(projections[0])
    r = B0.shape[1]
    frames = np.zeros((n,) + B0.shape, dtype=complex)
    frames[0] = B0
    if r == 0:
        return frames
    for i in range(1, n):
        frames[i] = _transport(projections[i], frames[i - 1])
    holonomy = B0.conj().T @ _transport(projections[0], frames[n - 1])
    L = unitary_log(holonomy)
    for i in range(n):
        frames[i] = frames[i] @ unitary_exp(L, -i / n)
    return frames


def _transport(P, B):
    W, _, Vh = np.linalg.svd(P @ B, full_matrices=False)
    return W @ Vh


def oriented_cycles(space: SimplicialSpace) -> list:
    """A cycle basis of the 1-skeleton, each cycle as an ordered vertex list.

    Cycles are oriented counterclockwise when coordinates are available (and
    the cycle encloses area); otherwise they start at their smallest vertex
    and continue to its smaller cycle neighbour.  Cycles are sorted by their
    sorted vertex tuples.
    """
    g = nx.Graph()
    g.add_nodes_from(range(space.n_vertices))
    g.add_edges_from(space.edges)
    out = []
    xy = space.coordinates
    for cyc in nx.cycle_basis(g):
        cyc = [int(v) for v in cyc]
        area = 0.0
        if xy is not None:
            p = xy[cyc]
            area = 0.5 * float(np.sum(p[:, 0] * np.roll(p[:, 1], -1) - np.roll(p[:, 0], -1) * p[:, 1]))
        if abs(area) > 1e-12:
            if area < 0:
                cyc = cyc[::-1]
            i = cyc.index(min(cyc))
            cyc = cyc[i:] + cyc[:i]
        else:
            i = cyc.index(min(cyc))
            cyc = cyc[i:] + cyc[:i]
            if cyc[-1] < cyc[1]:
                cyc = [cyc[0]] + cyc[1:][::-1]
        out.append(cyc)
    return sorted(out, key=lambda c: tuple(sorted(c)))


def _is_single_cycle(space: SimplicialSpace) -> bool:
    return (
        space.n_vertices >= 3
        and not space.triangles
        and space.n_components == 1
        and len(space.edges) == space.n_vertices
        and all(len(nb) == 2 for nb in space.neighbors)
    )


def fiber_ranks(D: IsometryField) -> tuple:
    rs = np.unique(projection_ranks(D.source_projections))
    rt = np.unique(projection_ranks(D.target.values))
    if rs.size > 1 or rt.size > 1:
        raise ValidationError("fiber ranks vary over the base")
    return int(rs[0]) if rs.size else 0, int(rt[0]) if rt.size else 0


def frame_matrices(D: IsometryField, cycle) -> np.ndarray:
    """``D`` along ``cycle`` in transported frames: ``B_zeta* D B_xi``."""
    cycle = list(cycle)
    Bs = transported_frames(D.source_projections[cycle])
    Bt = transported_frames(D.target.values[cycle])
    return np.conj(np.swapaxes(Bt, 1, 2)) @ D.values[cycle] @ Bs


def _det_winding_along(D: IsometryField, cycle) -> int:
    M = frame_matrices(D, cycle)
    dets = np.linalg.det(M) if M.shape[1] else np.ones(len(cycle))
    return winding_number(dets)


def det_winding(D: IsometryField) -> int:
    """Winding of ``det D`` around a base that is a single cycle.

    Raises
    ------
    ValidationError
        If the base is not a cycle or the fiber ranks differ.
    LiftFailure
        If the determinant loop is undersampled.
    """
    if not _is_single_cycle(D.base):
        raise ValidationError("det_winding needs a base that is a single cycle")
    rs, rt = fiber_ranks(D)
    if rs != rt:
        raise ValidationError(f"rank mismatch: source rank {rs}, target rank {rt}")
    (cycle,) = oriented_cycles(D.base)
    return _det_winding_along(D, cycle)


def stiefel_class(D: IsometryField) -> InvariantRecord:
    """Homotopy class of ``D`` over a graph.

    Equal fiber ranks give the vector of determinant windings over the cycle
    basis of :func:`oriented_cycles`; a smaller source rank gives the empty
    (trivial) record.
    """
    if D.base.triangles:
        raise ValidationError("stiefel_class needs a base without triangles")
    rs, rt = fiber_ranks(D)
    if rs > rt:
        raise ValidationError("source rank exceeds target rank; not an isometry field")
    if rs < rt:
        return InvariantRecord("finite", ())
    windings = tuple(_det_winding_along(D, c) for c in oriented_cycles(D.base))
    return InvariantRecord("finite", windings)
