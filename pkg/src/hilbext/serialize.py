"""JSON interchange formats.

Complex numbers are ``[re, im]`` pairs, matrices are row-major nested lists,
and per-vertex tables are objects keyed by the decimal vertex index.
"""
from __future__ import annotations

import json

import numpy as np

from .bundle import ProjectionField
from .errors import ValidationError
from .extension import ExtensionTriple, WindingDatum
from .hilbmod import SectionField
from .invariants.fredholm import StructuredOperator
from .isometry import IsometryField
from .mesh import SimplicialSpace


def complex_to_json(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [complex_to_json(x) for x in a]


def complex_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1:] != (2,):
        raise ValidationError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _table_to_json(values) -> dict:
    return {str(i): complex_to_json(v) for i, v in enumerate(values)}


def _table_from_json(table: dict, n: int, shape: tuple) -> np.ndarray:
    out = np.zeros((n,) + shape, dtype=complex)
    seen = set()
    for key, val in table.items():
        i = int(key)
        if not 0 <= i < n:
            raise ValidationError(f"vertex {key} out of range")
        entry = complex_from_json(val) if np.size(val) else np.zeros(shape, dtype=complex)
        out[i] = entry.reshape(shape)
        seen.add(i)
    if len(seen) != n:
        raise ValidationError("per-vertex table is missing vertices")
    return out


def mesh_to_json(space: SimplicialSpace) -> dict:
    d = {
        "vertices": [list(c) for c in space.coords] if space.coords is not None
        else [None] * space.n_vertices,
        "edges": [list(e) for e in space.edges],
        "triangles": [list(t) for t in space.triangles],
        "boundary": sorted(space.boundary),
    }
    if space.allow_disconnected:
        d["disconnected"] = True
    return d


def mesh_from_json(d: dict) -> SimplicialSpace:
    verts = d["vertices"]
    coords = None
    if verts and all(v is not None and len(v) == 2 for v in verts):
        coords = [tuple(v) for v in verts]
    return SimplicialSpace(
        len(verts), [tuple(e) for e in d.get("edges", [])],
        [tuple(t) for t in d.get("triangles", [])],
        frozenset(d.get("boundary", [])), coords,
        allow_disconnected=bool(d.get("disconnected", False)),
    )


def bundle_to_json(P: ProjectionField) -> dict:
    return {"m": P.m, "values": _table_to_json(P.values)}


def bundle_from_json(d: dict, space: SimplicialSpace) -> ProjectionField:
    m = int(d["m"])
    return ProjectionField(space, _table_from_json(d["values"], space.n_vertices, (m, m)))


def section_to_json(s: SectionField, bundle_ref: str) -> dict:
    return {"bundle": bundle_ref, "values": _table_to_json(s.values)}


def section_from_json(d: dict, bundles: dict) -> SectionField:
    bundle = bundles[d["bundle"]]
    return SectionField(bundle, _table_from_json(d["values"], bundle.space.n_vertices, (bundle.m,)))


def isometry_to_json(D: IsometryField) -> dict:
    return {
        "source_mesh": mesh_to_json(D.source.space),
        "source": bundle_to_json(D.source),
        "base_mesh": mesh_to_json(D.base),
        "target": bundle_to_json(D.target),
        "vertex_map": [int(v) for v in D.vertex_map],
        "values": _table_to_json(D.values),
    }


def isometry_from_json(d: dict, check: bool = True) -> IsometryField:
    """Load an isometry field; ``check=False`` keeps invalid values for diagnosis."""
    source = bundle_from_json(d["source"], mesh_from_json(d["source_mesh"]))
    target = bundle_from_json(d["target"], mesh_from_json(d["base_mesh"]))
    values = _table_from_json(d["values"], target.space.n_vertices, (target.m, source.m))
    return IsometryField(source, d["vertex_map"], target, values, check=check)


def operator_to_json(F: StructuredOperator) -> dict:
    return {
        "type": "operator",
        "symbol": complex_to_json(F.symbol),
        "perturbation": complex_to_json(F.perturbation),
        "infinite_defect": bool(F.infinite_defect),
    }


def operator_from_json(d: dict) -> StructuredOperator:
    K = d.get("perturbation") or []
    K = complex_from_json(K) if np.size(K) else np.zeros((0, 0))
    return StructuredOperator(complex_from_json(d["symbol"]), K, bool(d.get("infinite_defect", False)))


def extension_to_json(ext: ExtensionTriple) -> dict:
    d = {
        "type": "extension",
        "kind": ext.kind,
        "mesh": mesh_to_json(ext.space),
        "V_bundle": bundle_to_json(ext.V_bundle),
        "Z_mesh": mesh_to_json(ext.Z_bundle.space),
        "Z_bundle": bundle_to_json(ext.Z_bundle),
        "cycle": list(ext.cycle),
        "vertex_map": [int(v) for v in ext.vertex_map],
        "gluing": _table_to_json(ext.gluing),
        "k": None if ext.winding is None else ext.winding.k,
        "omega": None if ext.winding is None else complex_to_json(ext.winding.omega),
    }
    if ext.level_gluing is not None:
        d["level_gluing"] = [_table_to_json(g) for g in ext.level_gluing]
    return d


def extension_from_json(d: dict) -> ExtensionTriple:
    space = mesh_from_json(d["mesh"])
    V = bundle_from_json(d["V_bundle"], space)
    Z = bundle_from_json(d["Z_bundle"], mesh_from_json(d["Z_mesh"]))
    n_c = len(d["cycle"])
    shape = (V.m, Z.m)
    winding = None
    if d.get("k") is not None:
        winding = WindingDatum(complex_from_json(d["omega"]), int(d["k"]))
    levels = None
    if d.get("level_gluing") is not None:
        levels = tuple(_table_from_json(g, n_c, shape) for g in d["level_gluing"])
    return ExtensionTriple(
        V, Z, tuple(d["cycle"]), np.asarray(d["vertex_map"], dtype=int),
        _table_from_json(d["gluing"], n_c, shape),
        winding=winding, level_gluing=levels, kind=d.get("kind", "custom"),
    )


def dumps(obj, pretty: bool = False) -> str:
    return json.dumps(obj, sort_keys=True, indent=2 if pretty else None)
