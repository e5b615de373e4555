import pytest

from conftest import vec
from services.errors import EmptyPatch, InsufficientCoverage
from services.exactnum import Vec
from services.language import (
    displacement_set,
    is_legal,
    language_at,
    language_restriction,
    occurrences,
    period_probe,
    repetitivity_gaps,
    return_vectors,
)
from services.subst import substitute_power
from services.tiling import PlacedTile, canonicalize, patch_build


def test_square_language_has_one_window(square_builder):
    approx = square_builder.approximant(2)
    language = language_at(approx, approx.rule.field.scalar(4), previous=square_builder.approximant(1))
    assert len(language) == 1
    assert len(language.entries[0]) == 4
    assert language.to_dict()["count"] == 1


def test_language_needs_coverage(square_builder):
    approx = square_builder.approximant(1)
    with pytest.raises(InsufficientCoverage) as info:
        language_at(approx, approx.rule.field.scalar(4))
    assert info.value.details["level"] == 1


def test_language_restriction_matches_direct_language(fibonacci_builder):
    approx = fibonacci_builder.approximant(3)
    field = approx.rule.field
    big = language_at(approx, field.scalar(25))
    small = language_at(approx, field.scalar(4))
    assert language_restriction(big, field.scalar(4)) == frozenset(small.entries)


def test_fibonacci_language_is_not_trivial(fibonacci_builder):
    approx = fibonacci_builder.approximant(3)
    language = language_at(approx, approx.rule.field.scalar(4))
    assert len(language) >= 2
    assert language.to_dict()["count"] == len(language.entries)


def test_occurrences_match_naive_scan(fibonacci_builder):
    approx = fibonacci_builder.approximant(3)
    rule = approx.rule
    # патч "ab": a в нуле, b в τ
    ab = patch_build([rule.tile(0), rule.tile(1, vec(rule.field, [0, 1]))], rule.prototiles)
    window2 = rule.field.scalar(100)
    found = occurrences(approx, ab, window2)

    naive = set()
    for t in approx.patch.tiles:
        if t.proto != 0:
            continue
        if PlacedTile(1, t.shift + vec(rule.field, [0, 1])) not in approx.patch.tiles:
            continue
        if ((t.shift - approx.center).norm2() - window2).sign() < 0:
            naive.add(t.shift)
    assert found == frozenset(naive)
    assert found


def test_occurrences_of_empty_patch(square_builder, square):
    with pytest.raises(EmptyPatch):
        occurrences(square_builder.approximant(2), square.empty(), square.field.scalar(1))


def test_square_displacements(square_builder, square):
    approx = square_builder.approximant(2)
    single = square.single(0)
    result = displacement_set(approx, single, single, square.field.scalar(2), verify=True)
    # векторы решетки Z² с нормой² < 2: 0, (±1, 0), (0, ±1)
    assert len(result.shifts) == 5
    assert vec(square.field, "0", "0") in result.shifts
    assert vec(square.field, "1", "0") in result.shifts


def test_is_legal(chair_builder, chair):
    legal = is_legal(chair_builder, canonicalize(substitute_power(chair.single(0), chair, 1)), 2)
    assert legal.status == "legal"
    assert legal.level == 1
    assert legal.witness is not None


def test_is_legal_reports_search_depth(chair_builder, chair):
    # ω³(L) из 64 плиток не помещается в уровень 1 из 16 плиток
    big = substitute_power(chair.single(0), chair, 3)
    verdict = is_legal(chair_builder, big, 1)
    assert verdict.status == "not-found"
    assert verdict.to_dict()["witness"] is None
    assert is_legal(chair_builder, big, 2).status == "legal"


def test_square_return_vectors(square_builder, square):
    approx = square_builder.approximant(2)
    zs = return_vectors(approx, square.field.scalar(2))
    expected = {vec(square.field, *v) for v in (("1", "0"), ("-1", "0"), ("0", "1"), ("0", "-1"))}
    assert set(zs) == expected


def test_return_vectors_need_coverage(square_builder, square):
    with pytest.raises(InsufficientCoverage):
        return_vectors(square_builder.approximant(1), square.field.scalar(4))


def test_period_probe(square_builder, fibonacci_builder):
    square_approx = square_builder.approximant(2)
    field = square_approx.rule.field
    assert period_probe(square_approx, vec(field, "1", "0"), field.scalar(4))
    assert not period_probe(square_approx, vec(field, "1/2", "0"), field.scalar(4))

    fib = fibonacci_builder.approximant(3)
    tau = fib.rule.field.gen()
    assert not period_probe(fib, Vec((tau,)), fib.rule.field.scalar(200))


def test_repetitivity_gaps(square_builder, square):
    approx = square_builder.approximant(2)
    report = repetitivity_gaps(approx, square.single(0), square.field.scalar(9))
    assert report.occurrences > 0
    # каждая пробная точка сама является вхождением
    assert report.max_gap2 == square.field.zero()
    assert report.to_dict()["evidence"] == "observed"
