import numpy as np
import pytest
from conftest import omega
from hypothesis import given, settings
from hypothesis import strategies as st

from hilbext.bundle import trivial_bundle
from hilbext.errors import LiftFailure, Unstable, ValidationError
from hilbext.extension import (
    ExtensionTriple,
    WindingDatum,
    build_split_extension,
    build_Wk_extension,
    busby_invariant,
    check_exactness,
    check_fullness,
    check_quotient_morphism,
    extension_from_busby,
    membership_Wk,
)
from hilbext.hilbmod import (
    FunctionField,
    apply_morphism,
    inner_product,
    is_ideal_section,
    zero_section,
)
from hilbext.invariants import (
    InvariantRecord,
    det_winding,
    level_invariants,
    stabilized_invariant,
    stiefel_class,
)
from hilbext.isometry import IsometryField
from hilbext.mesh import annulus_tower, build_disk_mesh, outer_cycle
from hilbext.sampling import random_function, random_section

DISK16 = build_disk_mesh(3, 16)


def boundary_function(space, cycle, values, interior=0.0):
    v = np.full(space.n_vertices, interior, dtype=complex)
    v[list(cycle)] = values
    return FunctionField(space, v)


def w_samples(ext, rng, n):
    cut = ext.cutoff()
    out = []
    for i in range(n):
        ideal = random_section(ext.V_bundle, rng).scale(cut)
        out.append(ideal if i % 3 == 0 else ext.lift(random_section(ext.Z_bundle, rng)) + ideal)
    return out


def test_w0_boundary_constants():
    ext = build_Wk_extension(0, DISK16)
    one = FunctionField(DISK16, np.ones(DISK16.n_vertices))
    assert membership_Wk(ext, one) == (True, 1.0)


def test_w1_datum():
    ext = build_Wk_extension(1, DISK16)
    assert ext.winding.k == 1
    assert len(ext.cycle) == 16
    np.testing.assert_allclose(ext.winding.omega, omega(1, 16), atol=1e-12)


def test_w7_on_eight_vertices_fails():
    with pytest.raises(LiftFailure):
        build_Wk_extension(7, build_disk_mesh(2, 8))


def test_declared_winding_mismatch():
    with pytest.raises(LiftFailure, match="declared"):
        WindingDatum(omega(7, 8), 7)


def test_membership_examples():
    ext = build_Wk_extension(2, DISK16)
    w = ext.winding.omega
    zero = FunctionField(DISK16, np.zeros(DISK16.n_vertices))
    assert membership_Wk(ext, zero) == (True, 0.0)
    ok, lam = membership_Wk(ext, boundary_function(DISK16, ext.cycle, 2 * w, interior=5.0))
    assert ok and abs(lam - 2) < 1e-12
    mixed = np.where(np.arange(16) < 8, 1.0, 2.0) * w
    assert membership_Wk(ext, boundary_function(DISK16, ext.cycle, mixed)) == (False, None)


def test_membership_needs_point_quotient():
    with pytest.raises(ValidationError):
        membership_Wk(build_split_extension(DISK16), FunctionField(DISK16, np.zeros(DISK16.n_vertices)))


def test_w0_busby_is_one(disk64, tower64):
    D = busby_invariant(build_Wk_extension(0, disk64), tower64)
    np.testing.assert_allclose(D.values, 1.0, atol=1e-12)


def test_split_busby_is_one(disk64, tower64):
    D = busby_invariant(build_split_extension(disk64), tower64)
    # from the splitting s -> (s, s|boundary) the gluing is the identity
    np.testing.assert_allclose(D.values, 1.0, atol=1e-12)
    assert stiefel_class(D).windings == (0,)


@pytest.mark.parametrize("k", [-2, 1, 3])
def test_wk_busby_winding(k, disk64, tower64):
    assert det_winding(busby_invariant(build_Wk_extension(k, disk64), tower64)) == k


def test_split_from_constant_busby(rng):
    tower = annulus_tower(3, 24)
    corona = tower.corona_space
    L = trivial_bundle(corona, 1)
    delta = IsometryField(L, np.arange(24), L, np.ones((24, 1, 1)))
    V = trivial_bundle(build_disk_mesh(2, 24), 1)
    ext = extension_from_busby(delta, V, L, tower)
    alpha = random_function(ext.space, rng)
    ok, z = ext.membership(alpha)
    assert ok
    np.testing.assert_allclose(z.values[:, 0], alpha.values[list(ext.cycle)])


@pytest.mark.parametrize("k", [-3, 0, 2])
def test_busby_roundtrip(k, disk64, tower64):
    ext = build_Wk_extension(k, disk64)
    delta = busby_invariant(ext, tower64)
    back = busby_invariant(extension_from_busby(delta, ext.V_bundle, ext.Z_bundle, tower64), tower64)
    assert np.abs(back.values - delta.values).max() <= 1e-6


def test_non_isometric_busby_rejected():
    corona = annulus_tower(2, 8).corona_space
    L = trivial_bundle(corona, 1)
    vals = np.ones((8, 1, 1))
    vals[3] = 1.5
    with pytest.raises(ValidationError):
        IsometryField(L, np.arange(8), L, vals)


def test_busby_on_wrong_cycle_rejected(disk64):
    ext = build_Wk_extension(1, disk64)
    delta = busby_invariant(ext, annulus_tower(2, 64))
    with pytest.raises(ValidationError):
        extension_from_busby(delta, ext.V_bundle, ext.Z_bundle, annulus_tower(2, 32))


def test_exactness_examples():
    ext = build_Wk_extension(1, DISK16)
    cut = ext.cutoff()
    ideal = FunctionField(DISK16, cut.values * np.arange(DISK16.n_vertices))
    assert check_exactness(ext, [ideal])
    glued = boundary_function(DISK16, ext.cycle, ext.winding.omega)
    assert not is_ideal_section(ext.as_section(glued))
    assert check_exactness(ext, [glued])


class _CollapsedQuotient(ExtensionTriple):
    """A corrupted triple whose quotient map is identically zero."""

    def membership(self, alpha, tol=None):
        return True, zero_section(self.Z_bundle)


def test_exactness_detects_zero_quotient():
    ext = build_Wk_extension(1, DISK16)
    bad = _CollapsedQuotient(ext.V_bundle, ext.Z_bundle, ext.cycle, ext.vertex_map, ext.gluing)
    glued = boundary_function(DISK16, ext.cycle, ext.winding.omega)
    assert not check_exactness(bad, [glued])


def test_exactness_rejects_non_members():
    ext = build_Wk_extension(1, DISK16)
    with pytest.raises(ValidationError):
        check_exactness(ext, [FunctionField(DISK16, np.ones(DISK16.n_vertices))])


def test_gluing_must_cover_boundary():
    ext = build_Wk_extension(1, DISK16)
    with pytest.raises(ValidationError):
        ExtensionTriple(ext.V_bundle, ext.Z_bundle, ext.cycle[:-1], ext.vertex_map[:-1], ext.gluing[:-1])


@pytest.mark.parametrize("k", [0, 1, 2])
def test_exactness_and_fullness(k, rng):
    ext = build_Wk_extension(k, DISK16)
    samples = w_samples(ext, rng, 20)
    assert check_exactness(ext, samples)
    assert check_fullness(ext, samples)
    assert check_quotient_morphism(ext, list(zip(samples, samples[1:])))


def test_fullness_needs_common_nonzero(rng):
    ext = build_Wk_extension(1, DISK16)
    cut = ext.cutoff()
    ideal = [random_section(ext.V_bundle, rng).scale(cut) for _ in range(4)]
    assert not check_fullness(ext, ideal)


def test_one_point_fullness_rejects_nonconstant_pairings():
    ramp = FunctionField(DISK16, 1.0 + np.arange(DISK16.n_vertices))
    # full in C(closure U), but its pairing is not constant on the boundary ring
    assert check_fullness(build_split_extension(DISK16), [ramp])
    wk = build_Wk_extension(0, DISK16)
    assert wk.algebra == "one-point"
    assert not check_fullness(wk, [ramp])


def test_stabilized_w0(tower64, disk64):
    records = level_invariants(build_Wk_extension(0, disk64), tower64)
    assert records == [InvariantRecord("finite", (0,))] * 3


def test_unstable_hand_built(tower64, disk64):
    ext = build_Wk_extension(1, disk64)
    w1, w2 = ext.gluing, omega(2, 64)[:, None, None]
    hand = ExtensionTriple(
        ext.V_bundle, ext.Z_bundle, ext.cycle, ext.vertex_map, ext.gluing, level_gluing=(w1, w1, w2)
    )
    with pytest.raises(Unstable, match="level 2: \\[2\\]"):
        stabilized_invariant(hand, tower64)
    with pytest.raises(ValidationError):
        stabilized_invariant(hand, annulus_tower(2, 64))


@settings(max_examples=12, deadline=None)
@given(st.integers(-4, 4), st.integers(2, 5))
def test_stabilized_wk_any_depth(k, depth):
    disk = build_disk_mesh(3, 48)
    assert stabilized_invariant(build_Wk_extension(k, disk), annulus_tower(depth, 48)).windings == (k,)


@settings(max_examples=15, deadline=None)
@given(st.integers(-3, 3), st.integers(0, 2**32 - 1))
def test_inclusion_then_quotient_vanishes(k, seed):
    rng = np.random.default_rng(seed)
    ext = build_Wk_extension(k, DISK16)
    cut = ext.cutoff()
    s = random_section(ext.V_bundle, rng).scale(cut)
    ok, z = ext.membership(apply_morphism(ext.inclusion, s))
    assert ok
    assert np.abs(inner_product(z, z).values).max() <= 1e-18


@settings(max_examples=15, deadline=None)
@given(st.integers(-3, 3), st.integers(0, 2**32 - 1))
def test_lift_is_a_section_over_z(k, seed):
    rng = np.random.default_rng(seed)
    ext = build_Wk_extension(k, DISK16)
    z = random_section(ext.Z_bundle, rng)
    ok, back = ext.membership(ext.lift(z))
    assert ok
    np.testing.assert_allclose(back.values, z.values, atol=1e-12)


def test_outer_cycle_used_for_gluing():
    ext = build_Wk_extension(1, DISK16)
    assert ext.cycle == outer_cycle(DISK16)
