import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hilbext.errors import ValidationError
from hilbext.extension import build_split_extension, build_Wk_extension, busby_invariant
from hilbext.invariants import InvariantRecord, StructuredOperator
from hilbext.mesh import annulus_tower, build_annulus_mesh, build_disk_mesh
from hilbext.sampling import random_section, smooth_projection_field
from hilbext.serialize import (
    bundle_from_json,
    bundle_to_json,
    complex_from_json,
    complex_to_json,
    extension_from_json,
    extension_to_json,
    isometry_from_json,
    isometry_to_json,
    mesh_from_json,
    mesh_to_json,
    operator_from_json,
    operator_to_json,
    section_from_json,
    section_to_json,
)


def _through_text(d):
    return json.loads(json.dumps(d))


def test_complex_pairs():
    assert complex_to_json(1 + 2j) == [1.0, 2.0]
    np.testing.assert_array_equal(complex_from_json([[1, 2], [3, -4]]), [1 + 2j, 3 - 4j])
    with pytest.raises(ValidationError):
        complex_from_json([1, 2, 3])


@pytest.mark.parametrize("space", [build_disk_mesh(2, 6), build_annulus_mesh(0.5, 1, 5)])
def test_mesh_roundtrip(space):
    assert mesh_from_json(_through_text(mesh_to_json(space))) == space


def test_bundle_and_section_roundtrip(rng):
    d = build_disk_mesh(2, 6)
    P = smooth_projection_field(d, 2, 1, rng)
    Q = bundle_from_json(_through_text(bundle_to_json(P)), d)
    assert np.array_equal(Q.values, P.values)
    s = random_section(P, rng)
    t = section_from_json(_through_text(section_to_json(s, "eta")), {"eta": P})
    assert np.array_equal(t.values, s.values)


def test_missing_vertex_rejected(rng):
    d = build_disk_mesh(1, 4)
    data = bundle_to_json(smooth_projection_field(d, 2, 1, rng))
    del data["values"]["3"]
    with pytest.raises(ValidationError, match="missing"):
        bundle_from_json(data, d)


def test_isometry_roundtrip_and_unchecked_load():
    ext = build_Wk_extension(2, build_disk_mesh(2, 16))
    D = busby_invariant(ext, annulus_tower(2, 16))
    data = _through_text(isometry_to_json(D))
    assert np.array_equal(isometry_from_json(data).values, D.values)
    data["values"]["4"] = [[[3.0, 0.0]]]
    with pytest.raises(ValidationError):
        isometry_from_json(data)
    bad = isometry_from_json(data, check=False)
    assert bad.defects()[0][0] == 4


@pytest.mark.parametrize("make", [lambda d: build_Wk_extension(3, d), build_split_extension])
def test_extension_roundtrip(make):
    d = build_disk_mesh(2, 16)
    ext = make(d)
    back = extension_from_json(_through_text(extension_to_json(ext)))
    assert back.kind == ext.kind
    assert back.cycle == ext.cycle
    assert np.array_equal(back.gluing, ext.gluing)
    assert (back.winding is None) == (ext.winding is None)


def test_invariant_record_json():
    for rec in (InvariantRecord("finite", (1, -2)), InvariantRecord("infinite"), InvariantRecord("finite")):
        assert InvariantRecord.from_dict(_through_text(rec.to_dict())) == rec
    with pytest.raises(ValidationError):
        InvariantRecord.from_dict({"kind": "other"})


@settings(max_examples=20, deadline=None)
@given(st.integers(-5, 5), st.integers(0, 4), st.booleans(), st.integers(0, 2**32 - 1))
def test_operator_roundtrip(k, d, infinite, seed):
    rng = np.random.default_rng(seed)
    theta = 2 * np.pi * np.arange(32) / 32
    K = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) if d else np.zeros((0, 0))
    F = StructuredOperator(np.exp(1j * k * theta), K, infinite)
    G = operator_from_json(_through_text(operator_to_json(F)))
    assert np.array_equal(G.symbol, F.symbol)
    assert np.array_equal(G.perturbation, F.perturbation)
    assert G.infinite_defect == infinite
