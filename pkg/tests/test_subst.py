import json
from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

import config
from conftest import catalog_rule, vec
from services.errors import NoSeedFound, OverlapError, ResourceLimit, SchemaError
from services.exactnum import Vec, mat_vec, vec_zero
from services.subst import (
    ApproximantBuilder,
    expanding_check,
    find_seed,
    grow,
    incidence_matrix,
    primitivity_check,
    rule_flc_probe,
    substitute,
    substitute_power,
    support_bound,
    support_bound_check,
)
from services.tiling import PlacedTile, patch_build


# === SEEDS ===

def test_square_seed(square):
    seed = find_seed(square, 4)
    assert (seed.proto, seed.n) == (0, 1)
    assert seed.x == vec_zero(square.field, 2)


def test_square_expanding_seed(square):
    seed = find_seed(square, 4, expanding=True)
    assert seed.n == 2
    assert seed.x == vec(square.field, Fraction(-1, 3), Fraction(-1, 3))


def test_chair_seed(chair):
    seed = find_seed(chair, 4)
    assert (seed.proto, seed.n) == (0, 1)
    assert seed.x == vec_zero(chair.field, 2)


def test_fibonacci_seeds(fibonacci):
    plain = find_seed(fibonacci, 4)
    assert (plain.proto, plain.n) == (0, 1)
    assert plain.x == vec_zero(fibonacci.field, 1)

    expanding = find_seed(fibonacci, 6, expanding=True)
    assert (expanding.proto, expanding.n) == (0, 3)
    tau = fibonacci.field.gen()
    assert expanding.x[0] == -tau / 2


def test_seed_is_a_fixed_point(chair):
    seed = find_seed(chair, 4, expanding=True)
    start = chair.single(seed.proto, seed.x)
    assert PlacedTile(seed.proto, seed.x) in substitute_power(start, chair, seed.n)
    assert chair.prototiles[seed.proto].interior_contains(-seed.x)


def test_seed_not_found(fibonacci):
    with pytest.raises(NoSeedFound) as info:
        find_seed(fibonacci, 2, expanding=True)
    assert info.value.details["max_n"] == 2


# === SUBSTITUTION ===

def test_substitution_commutes_with_translation(chair):
    """ω(P + x) = ω(P) + φx"""
    x = vec(chair.field, "3/2", "-5")
    for p in range(chair.size):
        moved = substitute(chair.single(p, x), chair)
        expected = substitute(chair.single(p), chair).translate(mat_vec(chair.phi, x))
        assert moved == expected


TILING_RULES = sorted(
    path.stem for path in config.CATALOG_DIR.glob("*.json")
    if json.loads(path.read_text(encoding="utf-8"))["kind"] != "word"
)


@lru_cache(maxsize=None)
def tiling_rule(name: str):
    return catalog_rule(name)


@st.composite
def placed_patches(draw, rule):
    """Супертайл ω^k(P) прототайла P, сдвинутый на рациональный вектор."""
    proto = draw(st.integers(0, rule.size - 1))
    depth = draw(st.integers(0, 1))
    coords = draw(st.lists(st.fractions(-5, 5, max_denominator=12), min_size=rule.dim, max_size=rule.dim))
    shift = Vec(rule.field.scalar(c) for c in coords)
    return substitute_power(rule.single(proto), rule, depth).translate(shift)


@pytest.mark.parametrize("name", TILING_RULES)
@given(data=st.data())
@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_substitution_algebra(name, data):
    rule = tiling_rule(name)
    patch = data.draw(placed_patches(rule))
    coords = data.draw(st.lists(st.fractions(-3, 3, max_denominator=8), min_size=rule.dim, max_size=rule.dim))
    x = Vec(rule.field.scalar(c) for c in coords)
    # ω(P + x) = ω(P) + φx
    assert substitute(patch.translate(x), rule) == substitute(patch, rule).translate(mat_vec(rule.phi, x))
    a = data.draw(st.integers(0, 1))
    b = data.draw(st.integers(0, 1))
    # ω^{a+b} = ω^b ∘ ω^a
    assert substitute_power(patch, rule, a + b) == substitute_power(substitute_power(patch, rule, a), rule, b)


def test_substitution_preserves_area(chair):
    patch = substitute_power(chair.single(0), chair, 2)
    assert len(patch) == 16
    total = sum((patch.polygon(t).area() for t in patch.tiles), chair.field.zero())
    assert total == chair.prototiles[0].area() * 16


def test_incidence_and_primitivity(fibonacci, chair):
    m = incidence_matrix(fibonacci)
    assert m.tolist() == [[1, 1], [1, 0]]
    report = primitivity_check(fibonacci)
    assert report.primitive and report.exponent == 2

    chair_report = primitivity_check(chair)
    assert chair_report.primitive
    assert chair_report.exponent == 2


def test_ammann_beenker_incidence():
    rule = catalog_rule("ammann_beenker")
    m = incidence_matrix(rule)
    assert m.shape == (16, 16)
    assert int(m.sum()) == 8 * (5 + 7)
    assert primitivity_check(rule).primitive
    assert support_bound(rule).is_zero()


def test_approximant_levels(square_builder):
    level1 = square_builder.approximant(1)
    level2 = square_builder.approximant(2)
    assert len(level1.patch) == 16
    assert len(level2.patch) == 256
    assert level1.coverage_radius2 == square_builder.rule.field.scalar(Fraction(16, 9))
    assert level2.coverage_radius2 == square_builder.rule.field.scalar(Fraction(256, 9))
    assert level1.evidence()["tiles"] == 16


def test_grow_rejects_level_zero(square):
    with pytest.raises(SchemaError):
        grow(square, find_seed(square, 4), 0)


def test_tile_cap(square):
    seed = find_seed(square, 4, expanding=True)
    with pytest.raises(ResourceLimit) as info:
        grow(square, seed, 3, tile_cap=1000)
    assert info.value.details["predicted_tiles"] == 4096


def test_expanding_check(fibonacci):
    seed = find_seed(fibonacci, 6, expanding=True)
    report = expanding_check(fibonacci, seed, 3)
    assert report.strictly_increasing
    tau = fibonacci.field.gen()
    # r_m = τ^{3m}·τ/2
    assert report.radii2[0] == (tau ** 4 / 2) ** 2


def test_flc_probe_square(square):
    probes = rule_flc_probe(square, [square.field.scalar(1)], depth=3)
    counts = probes[0].counts
    assert counts[-1] == counts[-2]
    assert probes[0].stabilized_at is not None


# === PSEUDO-SUBSTITUTIONS ===

def test_shear_rule_is_pseudo(shear):
    assert shear.kind == "pseudo"
    assert not shear.support_bound2.is_zero()


def test_support_bound_is_zero_for_true_substitutions(square, chair, shear):
    assert support_bound(square).is_zero()
    assert support_bound(chair).is_zero()
    assert support_bound(shear) == shear.support_bound2


def test_support_bound_holds(shear):
    for n in (1, 2):
        report = support_bound_check(shear, n)
        assert report["holds"], report


def test_overlap_detected_during_iteration(shear):
    patch = patch_build([shear.tile(0)], shear.prototiles)
    # две итерации проходят, ошибки перекрытия нет
    substitute_power(patch, shear, 2)
    overlapping = patch_build(
        [shear.tile(0), shear.tile(0, vec(shear.field, "1/2", "0"))], shear.prototiles, check=False
    )
    with pytest.raises(OverlapError):
        substitute(overlapping, shear)
