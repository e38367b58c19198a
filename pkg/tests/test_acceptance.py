"""Acceptance criteria, each run at its stated scale and tolerance.

A pass/fail line per criterion is printed in the terminal summary.
"""
import itertools

import numpy as np
import pytest
from conftest import brute_force_quotient_norm, omega

from hilbext.bundle import ProjectionField
from hilbext.errors import LiftFailure, ValidationError
from hilbext.extension import (
    build_Wk_extension,
    busby_invariant,
    check_exactness,
    check_fullness,
)
from hilbext.hilbmod import (
    ModuleMorphism,
    apply_morphism,
    check_morphism,
    fiber_quotient_norm,
)
from hilbext.invariants import (
    FiniteIndex,
    InfiniteDefect,
    StructuredOperator,
    fredholm_index,
    homotopy_equivalent,
    stabilized_invariant,
    winding_number,
)
from hilbext.invariants.fredholm import (
    TRUNCATION_CAP,
    kernel_dimensions,
    operator_equivalent,
)
from hilbext.isometry import (
    IsometryField,
    delta_to_isometry,
    isometry_to_delta,
    roundtrip_check,
    standard_probes,
)
from hilbext.mesh import annulus_tower, build_disk_mesh, point_space
from hilbext.sampling import (
    random_isometry_field,
    random_section,
    smooth_projection_field,
)

SEED = 1234


def _random_field(rng, corona):
    """A valid isometry field over the corona cycle with ``m <= 4``, ``k <= m``."""
    m = int(rng.integers(1, 5))
    k = int(rng.integers(0, m + 1))
    n = corona.n_vertices
    if rng.random() < 0.5:
        xi = smooth_projection_field(corona, m, k, rng)
        f = np.arange(n)
    else:
        xi = ProjectionField(point_space(), [smooth_projection_field(corona, m, k, rng).values[0]])
        f = np.zeros(n, dtype=int)
    zeta = smooth_projection_field(corona, m, m, rng)
    return random_isometry_field(xi, f, zeta, rng)


def test_criterion_1_roundtrip_bijection(criterion):
    with criterion(1, "roundtrip bijection, 100 fields, cycle length 32, tol 1e-9", budget=30) as c:
        rng = np.random.default_rng(SEED)
        corona = annulus_tower(3, 32).corona_space
        worst_d, worst_delta, passed = 0.0, 0.0, 0
        for _ in range(100):
            D = _random_field(rng, corona)
            delta = isometry_to_delta(D)
            probes = standard_probes(D.source)
            D_back = delta_to_isometry(delta)
            delta_back = isometry_to_delta(D_back)
            worst_d = max(worst_d, float(np.abs(D_back.values - D.values).max()))
            for p in probes:
                err = np.abs(apply_morphism(delta_back, p).values - apply_morphism(delta, p).values)
                worst_delta = max(worst_delta, float(err.max(initial=0.0)))
            passed += roundtrip_check(D) and roundtrip_check(delta)
        c.note(f"{passed}/100 roundtrips, max |D'-D| = {worst_d:.2e}, max |Delta'-Delta| = {worst_delta:.2e}")
        c.check(passed == 100, "every roundtrip passes")
        c.check(worst_d <= 1e-9 and worst_delta <= 1e-9, "composites within 1e-9")


def test_criterion_2_wk_separation(criterion):
    with criterion(2, "W_k separation, k in -3..3, 64-vertex boundary, 3-level tower", budget=10) as c:
        disk = build_disk_mesh(4, 64)
        tower = annulus_tower(3, 64)
        ks = range(-3, 4)
        exts = {k: build_Wk_extension(k, disk) for k in ks}
        records_ok = sum(stabilized_invariant(exts[k], tower).windings == (k,) for k in ks)
        deltas = {k: busby_invariant(exts[k], tower) for k in ks}
        verdicts = sum(
            homotopy_equivalent(deltas[j], deltas[k]) == (j == k) for j, k in itertools.product(ks, ks)
        )
        c.note(f"records {records_ok}/7, verdicts {verdicts}/49")
        c.check(records_ok == 7, "stabilized_invariant == [k]")
        c.check(verdicts == 49, "49/49 pairwise verdicts")


def test_criterion_3_index_classification(criterion):
    with criterion(3, "Z u {inf} classification, 50 perturbations per symbol, N <= 512", budget=60) as c:
        rng = np.random.default_rng(SEED)
        theta = 2 * np.pi * np.arange(64) / 64
        ops = {k: StructuredOperator(np.exp(1j * k * theta)) for k in range(6)}
        base_ok = sum(fredholm_index(ops[k]) == FiniteIndex(-k) for k in range(6))
        stable, max_n = 0, 0
        for k in range(6):
            for _ in range(50):
                d = int(rng.integers(1, 9))
                rank = int(rng.integers(1, d + 1))
                K = (rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))) @ (
                    rng.normal(size=(rank, d)) + 1j * rng.normal(size=(rank, d))
                ) * rng.uniform(0.05, 2.0)
                F = StructuredOperator(ops[k].symbol, K)
                max_n = max(max_n, kernel_dimensions(F)[2])
                stable += fredholm_index(F) == FiniteIndex(-k)
        inf = [StructuredOperator(np.exp(1j * k * theta), infinite_defect=True) for k in (0, 2, 5)]
        inf_ok = all(operator_equivalent(a, b) for a, b in itertools.product(inf, inf))
        inf_ok &= all(fredholm_index(a) is InfiniteDefect for a in inf)
        pair_ok = sum(
            operator_equivalent(ops[j], ops[k]) == (j == k) for j, k in itertools.product(range(6), range(6))
        )
        c.note(f"base {base_ok}/6, perturbed {stable}/300, pairs {pair_ok}/36, max truncation {max_n}")
        c.check(base_ok == 6, "z^k gives FiniteIndex(-k)")
        c.check(stable == 300, "index unchanged under perturbations")
        c.check(inf_ok, "infinite-defect operators are equivalent")
        c.check(pair_ok == 36, "FiniteIndex(j) ~ FiniteIndex(k) iff j = k")
        c.check(max_n <= TRUNCATION_CAP, "kernel stabilization at N <= 512")


def test_criterion_4_morphism_axiom(criterion):
    with criterion(4, "morphism axiom on 50 section pairs, invalid fields rejected") as c:
        rng = np.random.default_rng(SEED)
        corona = annulus_tower(2, 32).corona_space
        good = 0
        for _ in range(50):
            D = _random_field(rng, corona)
            pairs = [(random_section(D.source, rng), random_section(D.source, rng)) for _ in range(50)]
            good += check_morphism(isometry_to_delta(D), pairs, tol=1e-9)
        rejected = 0
        for trial in range(20):
            D = _random_field(rng, corona)
            vals = D.values.copy()
            z = int(rng.integers(corona.n_vertices))
            vals[z] *= 1.0 + rng.uniform(0.05, 0.5) * (1 if trial % 2 else -1)
            if not np.any(vals[z]):
                vals[z] = D.values[z] + 0.1
            try:
                IsometryField(D.source, D.vertex_map, D.target, vals)
            except ValidationError:
                bad = ModuleMorphism(D.source, D.target, D.vertex_map, vals)
                pairs = [(random_section(D.source, rng), random_section(D.source, rng)) for _ in range(50)]
                zero_rank = not np.any(D.source_projections[z])
                rejected += (not roundtrip_check(D.with_values(vals, check=False))) and (
                    zero_rank or not check_morphism(bad, pairs)
                )
        c.note(f"valid passing {good}/50, invalid rejected {rejected}/20")
        c.check(good == 50, "every isometry_to_delta morphism passes")
        c.check(rejected == 20, "every invalid field rejected")


def test_criterion_5_quotient_norm(criterion):
    with criterion(5, "quotient norm vs brute-force inf (1000 perturbations), 20 sections, tol 1e-3") as c:
        rng = np.random.default_rng(SEED)
        disk = build_disk_mesh(3, 16)
        worst, agree = 0.0, 0
        for _ in range(20):
            m = int(rng.integers(1, 4))
            P = smooth_projection_field(disk, m, int(rng.integers(1, m + 1)), rng)
            s = random_section(P, rng)
            z = int(rng.integers(disk.n_vertices))
            err = abs(brute_force_quotient_norm(s, z, rng) - fiber_quotient_norm(s, z))
            worst = max(worst, err)
            agree += err <= 1e-3
        c.note(f"{agree}/20 within 1e-3, worst gap {worst:.2e}")
        c.check(agree == 20, "all sections agree")


@pytest.mark.parametrize("k", [0, 1, 2])
def test_criterion_6_exactness_fullness(criterion, k):
    with criterion(6, f"exactness on 50 W_k samples and fullness, k = {k}") as c:
        rng = np.random.default_rng(SEED + k)
        ext = build_Wk_extension(k, build_disk_mesh(4, 32))
        cut = ext.cutoff()
        samples = []
        for i in range(50):
            ideal = random_section(ext.V_bundle, rng).scale(cut)
            samples.append(ideal if i % 5 == 0 else ext.lift(random_section(ext.Z_bundle, rng)) + ideal)
        exact = check_exactness(ext, samples)
        full = check_fullness(ext, samples)
        c.note(f"exactness {exact}, fullness {full}")
        c.check(exact, "exactness")
        c.check(full, "fullness")


def test_criterion_7_winding_algebra(criterion):
    with criterion(7, "winding additivity, rotation invariance, LiftFailure for k=7 over 8") as c:
        n = 64
        ks = range(-6, 7)
        additive = all(
            winding_number(omega(j, n) * omega(k, n)) == winding_number(omega(j, n)) + winding_number(omega(k, n))
            for j, k in itertools.product(ks, ks)
        )
        rotation = all(winding_number(np.roll(omega(k, n), s)) == k for k in ks for s in range(0, n, 7))
        try:
            winding_number(lambda t: np.exp(7j * t), 8)
            lift = False
        except LiftFailure:
            lift = True
        try:
            build_Wk_extension(7, build_disk_mesh(2, 8))
            lift_ext = False
        except LiftFailure:
            lift_ext = True
        c.note(f"additivity {additive}, rotation {rotation}, LiftFailure {lift and lift_ext}")
        c.check(additive, "additivity")
        c.check(rotation, "rotation invariance")
        c.check(lift and lift_ext, "LiftFailure on undersampled k=7")
