import itertools
import math
from fractions import Fraction
from types import SimpleNamespace

import pytest
from hypothesis import assume, given, settings, strategies as st

import config
from conftest import vec
from services.errors import NoMatch, PreconditionFailed
from services.exactnum import NumberField, Vec, matrix_of
from services.language import language_at
from services.parsers import load_path
from services.spectra import (
    band_condition,
    band_membership,
    base_eigenvalues,
    basis_candidates,
    basis_forbidden_verify,
    dual_generators,
    eigen_candidates,
    eigen_verify,
    eps_close,
    forbidden_patch_search,
    forbidden_verify,
    is_expansive,
    phase_anchor,
    phase_diameter,
    phase_spread,
    spectrum_analyze,
)


Q = NumberField.rational()
TOL = Fraction(1, 2 ** 20)
SQUARE_BASE = (("1", "0"), ("0", "1"))


def q2(x, y) -> Vec:
    return Vec((Q.scalar(Fraction(x)), Q.scalar(Fraction(y))))


# === EXPANSION AND SPECTRUM ===

@pytest.mark.parametrize("rows, expected", [
    ([["2", "0"], ["0", "2"]], True),
    ([["1", "-1"], ["1", "1"]], True),
    ([["1", "0"], ["0", "2"]], False),
    ([["0", "1"], ["1", "1"]], False),
    ([["-3", "0"], ["0", "2"]], True),
])
def test_is_expansive(rows, expected):
    assert is_expansive(matrix_of(Q, rows)) is expected


def test_square_spectrum(square):
    report = spectrum_analyze(square)
    assert report.char_poly == (4, -4, 1)
    assert not report.squarefree
    assert report.diagonalizable
    assert report.algebraic_integers
    assert report.pisot_family
    assert report.same_multiplicity


def test_fibonacci_spectrum(fibonacci):
    report = spectrum_analyze(fibonacci)
    assert report.char_poly == (-1, -1, 1)
    assert report.pisot_family
    roots = report.factors[0].roots
    assert sum(r.in_spectrum for r in roots) == 1


def test_non_pisot_spectrum(non_pisot):
    report = spectrum_analyze(non_pisot)
    assert report.char_poly == (-3, -1, 1)
    assert report.algebraic_integers
    assert not report.pisot_family
    assert report.to_dict()["pisot_family"] is False


def test_chair_spectrum(chair):
    assert spectrum_analyze(chair).pisot_family


def test_golden_scalar_matrix():
    golden = NumberField((-1, -1, 1), (1, 2))
    tau = golden.parse([0, 1])
    report = spectrum_analyze(((tau, golden.zero()), (golden.zero(), tau)))
    # (x² - x - 1)²
    assert report.char_poly == (1, 2, -1, -2, 1)
    assert not report.squarefree
    assert report.diagonalizable
    assert report.pisot_family


# === EIGENVALUES ===

@pytest.mark.parametrize("a", [("1", "0"), ("0", "1"), ("2", "3")])
def test_square_integer_eigenvalue(square_builder, square, a):
    approx = square_builder.approximant(2)
    report = eigen_verify(approx, vec(square.field, *a), square.field.scalar(4), 20, TOL)
    assert report.verdict == "exact"
    assert report.n0 == 0
    assert report.positive


def test_square_half_is_rejected_by_period(square_builder, square):
    approx = square_builder.approximant(2)
    report = eigen_verify(approx, vec(square.field, "1/2", "0"), square.field.scalar(4), 20, TOL)
    assert report.verdict == "rejected"
    assert report.witness["reason"] == "period"


def test_square_third_is_rejected_by_tail(square_builder, square):
    approx = square_builder.approximant(2)
    report = eigen_verify(
        approx, vec(square.field, "1/3", "0"), square.field.scalar(4), 20, TOL, probe_periods=False
    )
    assert report.verdict == "rejected"
    assert "z" in report.witness
    assert report.to_dict()["verdict"] == "rejected"


def test_zero_candidate(square_builder, square):
    with pytest.raises(PreconditionFailed):
        eigen_verify(square_builder.approximant(2), vec(square.field, "0", "0"), square.field.scalar(4), 20, TOL)


@pytest.mark.slow
def test_chair_dyadic_eigenvalue(chair_builder, chair):
    approx = chair_builder.approximant(3)
    half = eigen_verify(approx, vec(chair.field, "1/2", "0"), chair.field.scalar(16), 20, TOL)
    assert half.verdict == "exact"
    third = eigen_verify(approx, vec(chair.field, "1/3", "0"), chair.field.scalar(16), 20, TOL)
    assert third.verdict == "rejected"


@pytest.mark.slow
@pytest.mark.parametrize("a, n0", [
    (("0", "1/2"), 1),
    # у всех векторов возврата z₁ + z₂ четно
    (("1/4", "1/4"), 1),
    (("1/16", "0"), 4),
])
def test_chair_dyadic_eigenvalues_exact(chair_builder, chair, a, n0):
    approx = chair_builder.approximant(3)
    report = eigen_verify(approx, vec(chair.field, *a), chair.field.scalar(16), 20, TOL)
    assert report.verdict == "exact"
    assert report.n0 == n0


@pytest.mark.slow
def test_chair_fifth_is_rejected(chair_builder, chair):
    approx = chair_builder.approximant(3)
    report = eigen_verify(approx, vec(chair.field, "1/5", "1/5"), chair.field.scalar(16), 20, TOL)
    assert report.verdict == "rejected"
    assert "z" in report.witness
    assert report.n0 is None


@pytest.mark.slow
def test_chair_dyadic_family_shrinks_to_zero(chair_builder, chair):
    approx = chair_builder.approximant(3)
    field = chair.field
    base = [vec(field, *b) for b in SQUARE_BASE]
    targets = [vec(field, Fraction(1, 2 ** (k + 1)), Fraction(1, 2 ** (k + 1))) for k in range(1, 7)]
    matches = eigen_candidates(
        approx, targets, Fraction(1, 1000), 7, base=base, return_norm2=field.scalar(16), horizon=20,
    )
    for k, target, match in zip(range(1, 7), targets, matches):
        assert match.a == target
        assert (match.k, match.coeffs) == (k + 1, (1, 1))
        assert match.verdict == "exact"
        assert (match.a.norm2() - field.scalar(Fraction(1, 4 ** k))).sign() < 0


def test_fibonacci_eigenvalue_by_tail(fibonacci_builder, fibonacci):
    approx = fibonacci_builder.approximant(3)
    field = fibonacci.field
    # 1/√5 = (2τ - 1)/5
    a = Vec((field.element([Fraction(-1, 5), Fraction(2, 5)]),))
    report = eigen_verify(approx, a, field.scalar(16), 80, TOL)
    assert report.verdict == "verified"
    assert report.n0 is None
    # φ = τ не целочисленная матрица
    assert not report.recurrence

    wrong = eigen_verify(approx, Vec((field.scalar(Fraction(1, 3)),)), field.scalar(16), 80, TOL)
    assert wrong.verdict == "rejected"


def test_dual_generators_and_base(square_builder, square):
    approx = square_builder.approximant(2)
    dual = dual_generators(approx, square.field.scalar(4))
    assert set(dual) == {vec(square.field, "-1", "0"), vec(square.field, "0", "-1")}
    base = base_eigenvalues(approx, square.field.scalar(4), 20, TOL, height=2)
    assert base == [vec(square.field, "1", "0"), vec(square.field, "0", "1")]


def test_candidates_dyadic_approximation(square_builder, square):
    approx = square_builder.approximant(2)
    field = square.field
    base = [vec(field, *b) for b in SQUARE_BASE]
    [match] = eigen_candidates(approx, [vec(field, "1/5", "0")], Fraction(1, 8), 4, base=base, verify=False)
    # |1/5 - 3/16| = 1/80
    assert match.a == vec(field, "3/16", "0")
    assert match.k == 4
    assert match.coeffs == (3, 0)


def test_candidates_exact_member(square_builder, square):
    approx = square_builder.approximant(2)
    field = square.field
    base = [vec(field, *b) for b in SQUARE_BASE]
    [match] = eigen_candidates(
        approx, [vec(field, "5/8", "-3/4")], Fraction(1, 100), 5,
        base=base, return_norm2=field.scalar(4), horizon=20,
    )
    assert match.a == vec(field, "5/8", "-3/4")
    assert (match.k, match.coeffs) == (3, (5, -6))
    assert match.verdict == "rejected"


def test_candidates_no_match(square_builder, square):
    approx = square_builder.approximant(2)
    field = square.field
    base = [vec(field, *b) for b in SQUARE_BASE]
    with pytest.raises(NoMatch):
        eigen_candidates(approx, [vec(field, "1/3", "0")], Fraction(0), 6, base=base, verify=False)


def test_candidates_rank_eight_module():
    rule = load_path(config.CATALOG_DIR / "robinson_triangles.json")
    field = rule.field
    base = []
    for i in range(2):
        for j in range(4):
            entries = [field.zero(), field.zero()]
            entries[i] = field.element([1 if n == j else 0 for n in range(4)])
            base.append(Vec(entries))
    target = vec(field, ["3", "-2"], ["0", "0", "0", "1"])
    # нужен только rule: без проверки аппроксимант не строится
    matches = eigen_candidates(SimpleNamespace(rule=rule), [target], Fraction(1, 10), 2, base=base, verify=False)
    assert matches[0].a == target
    assert matches[0].k == 0
    assert matches[0].coeffs == (3, -2, 0, 0, 0, 0, 0, 1)


# === ε-CLOSENESS ===

def test_eps_close_examples():
    first = [q2(0, 0), q2(1, 0)]
    second = [q2(Fraction(1, 100), 0), q2(1, Fraction(1, 100))]
    assert eps_close(first, second, Fraction(1, 10))
    assert not eps_close(first, second, Fraction(1, 1000))
    assert not eps_close(first, second, 2)


points = st.lists(
    st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=1, max_size=6, unique=True
).map(lambda pts: [q2(x, y) for x, y in pts])


@given(points, points)
@settings(max_examples=50, deadline=None)
def test_eps_close_is_symmetric(first, second):
    assert eps_close(first, second, Fraction(1, 2)) == eps_close(second, first, Fraction(1, 2))


@given(points)
@settings(max_examples=50, deadline=None)
def test_separated_set_is_close_to_itself(first):
    assert eps_close(first, first, Fraction(1, 2))


def matched_by_permutation(first, second, eps) -> bool:
    """Перебор паросочетаний: ребра ‖x - y‖ < ε должны образовать ровно одну биекцию."""
    if len(first) != len(second):
        return False
    edges = {
        (i, j)
        for i, (x1, y1) in enumerate(first)
        for j, (x2, y2) in enumerate(second)
        if (x1 - x2) ** 2 + (y1 - y2) ** 2 < eps * eps
    }
    return any(edges == set(enumerate(perm)) for perm in itertools.permutations(range(len(second))))


def as_vectors(pts):
    return [q2(x, y) for x, y in pts]


quarter_points = st.lists(
    st.tuples(st.integers(-6, 6), st.integers(-6, 6)), max_size=5, unique=True
).map(lambda pts: [(Fraction(x, 4), Fraction(y, 4)) for x, y in pts])


radii = st.sampled_from([Fraction(1, 8), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), 1])


@given(quarter_points, quarter_points, radii)
@settings(max_examples=1000, deadline=None)
def test_eps_close_matches_permutation_search(first, second, eps):
    assert eps_close(as_vectors(first), as_vectors(second), eps) == matched_by_permutation(first, second, eps)


# === PHASES AND BANDS ===

def test_phase_spread_wraps_around_zero():
    phases = [Q.scalar(0), Q.scalar(Fraction(1, 10)), Q.scalar(Fraction(9, 10))]
    report = phase_spread(phases)
    assert report.diameter == Q.scalar(Fraction(1, 5))
    assert report.arc_start == Q.scalar(Fraction(9, 10))
    assert report.midpoint == Q.zero()


def test_phase_spread_unresolved_antipodes():
    # сдвиги δ = 10^-30 неразличимы во float: кластеры у 1/4 и 3/4
    delta = Fraction(1, 10 ** 30)
    first = [Fraction(1, 4) + k * delta for k in range(10)]
    second = [Fraction(3, 4) + k * delta for k in (-20, -19, 5, 30, 31)]
    report = phase_spread([Q.scalar(x) for x in first + second])
    assert report.arc_length == Q.scalar(Fraction(1, 2) + 29 * delta)
    # пара 1/4 + 5δ, 3/4 + 5δ
    assert report.diameter == Q.scalar(Fraction(1, 2))


def test_phase_spread_single():
    report = phase_spread([Q.scalar(Fraction(1, 3))])
    assert report.diameter == Q.zero()
    assert report.count == 1


@given(
    st.fractions(min_value=-3, max_value=3, max_denominator=20),
    st.fractions(min_value=-3, max_value=3, max_denominator=20),
    st.integers(-5, 5),
    st.fractions(min_value=-10, max_value=10, max_denominator=7),
)
@settings(max_examples=80, deadline=None)
def test_band_membership_is_kernel_invariant(x, y, k, t):
    a = q2(Fraction(1, 4), 0)
    anchor = q2(Fraction(1, 3), Fraction(1, 5))
    r0_2 = Q.scalar(Fraction(1, 2))
    v = q2(x, y)
    # w = (4k, t) лежит в Ker χ_a
    w = q2(4 * k, t)
    assert band_membership(v, a, r0_2, anchor) == band_membership(v + w, a, r0_2, anchor)


def distance2_to_band_lines(v, a, anchor) -> Fraction:
    """Квадрат расстояния от v до ближайшей прямой {w : ⟨a, w - anchor⟩ = k}."""
    norm2 = a[0] ** 2 + a[1] ** 2
    s = a[0] * (v[0] - anchor[0]) + a[1] * (v[1] - anchor[1])
    best = None
    for k in (math.floor(s), math.floor(s) + 1):
        # ортогональная проекция v на прямую k
        foot = (v[0] - (s - k) / norm2 * a[0], v[1] - (s - k) / norm2 * a[1])
        d2 = (v[0] - foot[0]) ** 2 + (v[1] - foot[1]) ** 2
        best = d2 if best is None else min(best, d2)
    return best


small = st.fractions(min_value=-4, max_value=4, max_denominator=12)


@given(small, small, small, small, small, small, st.fractions(min_value=0, max_value=1, max_denominator=50))
@settings(max_examples=1000, deadline=None)
def test_band_membership_matches_direct_distance(vx, vy, ax, ay, px, py, r0_2):
    assume(ax != 0 or ay != 0)
    expected = distance2_to_band_lines((vx, vy), (ax, ay), (px, py)) < r0_2
    assert band_membership(q2(vx, vy), q2(ax, ay), Q.scalar(r0_2), q2(px, py)) == expected


def test_band_membership_center_and_edge():
    a = q2(1, 0)
    anchor = q2(Fraction(1, 2), 0)
    r0_2 = Q.scalar(Fraction(1, 100))
    assert band_condition(a, r0_2)
    assert band_membership(anchor, a, r0_2, anchor)
    assert band_membership(q2(Fraction(1, 2) + 3, 7), a, r0_2, anchor)
    assert not band_membership(q2(0, 0), a, r0_2, anchor)
    # ρ = 1/10 совпадает с R₀‖a‖: открытая полоса
    assert not band_membership(q2(Fraction(6, 10), 0), a, r0_2, anchor)


def test_phase_anchor_square(square_builder, square):
    approx = square_builder.approximant(2)
    a = vec(square.field, "1", "0")
    diameter = phase_diameter(approx, a, square.single(0), square.field.scalar(9))
    assert diameter.diameter == square.field.zero()
    assert diameter.count > 1
    anchor = phase_anchor(approx, a, square.single(0), square.field.scalar(9))
    # затравка в (-1/3, -1/3): все фазы 2/3
    assert anchor.theta == square.field.scalar(Fraction(2, 3))
    assert anchor.x == vec(square.field, "-2/3", "0")
    assert (anchor.theta + anchor.x.dot(a)).frac().is_zero()


def test_phase_anchor_quarter(square_builder, square):
    approx = square_builder.approximant(2)
    field = square.field
    a = vec(field, "1", "0")
    # вхождения t - v имеют фазу 2/3 - 5/12 = 1/4
    p = square.single(0).translate(vec(field, "5/12", "0"))
    anchor = phase_anchor(approx, a, p, field.scalar(9))
    assert anchor.theta == field.scalar(Fraction(1, 4))
    assert anchor.x.dot(a).frac() == field.scalar(Fraction(3, 4))


@pytest.mark.parametrize("v", [("1/5", "0"), ("3/7", "2/9"), ("-1/4", "1/8")])
def test_phase_anchor_follows_translation(square_builder, square, v):
    approx = square_builder.approximant(2)
    field = square.field
    a = vec(field, "1", "0")
    shift = vec(field, *v)
    base = phase_anchor(approx, a, square.single(0), field.scalar(9)).x
    moved = phase_anchor(approx, a, square.single(0).translate(shift), field.scalar(9)).x
    assert ((moved - shift).dot(a) - base.dot(a)).frac().is_zero()


# === FORBIDDEN REGIONS ===

def test_square_forbidden_band_passes(square_builder, square):
    approx = square_builder.approximant(2)
    field = square.field
    a = vec(field, "1", "0")
    eigen = eigen_verify(approx, a, field.scalar(4), 20, TOL)
    verdict = forbidden_verify(
        approx, a, square.single(0), square.single(0), field.scalar(Fraction(1, 100)), field.scalar(9), eigen=eigen
    )
    assert verdict.status == "pass"
    assert verdict.displacements > 0
    assert verdict.anchors[0] == verdict.anchors[1]


def test_square_forbidden_band_scaled(square_builder, square):
    approx = square_builder.approximant(2)
    field = square.field
    verdict = forbidden_verify(
        approx, vec(field, "1", "0"), square.single(0), square.single(0),
        field.scalar(Fraction(1, 100)), field.scalar(9), scale_m=1,
    )
    assert verdict.status == "pass"
    assert verdict.to_dict()["scale_m"] == 1


def test_spread_phases_are_insufficient(square_builder, square):
    approx = square_builder.approximant(2)
    field = square.field
    verdict = forbidden_verify(
        approx, vec(field, "1/2", "0"), square.single(0), square.single(0),
        field.scalar(Fraction(1, 100)), field.scalar(9),
    )
    assert verdict.status == "insufficient"
    assert verdict.reason == "phase-too-spread"


def test_forbidden_requires_eigenvalue(square_builder, square):
    approx = square_builder.approximant(2)
    field = square.field
    a = vec(field, "1/2", "0")
    eigen = eigen_verify(approx, a, field.scalar(4), 20, TOL)
    with pytest.raises(PreconditionFailed):
        forbidden_verify(approx, a, square.single(0), square.single(0), field.scalar(Fraction(1, 100)),
                         field.scalar(9), eigen=eigen)


def test_band_condition_enforced(square_builder, square):
    with pytest.raises(PreconditionFailed):
        forbidden_verify(
            square_builder.approximant(2), vec(square.field, "1", "0"), square.single(0), square.single(0),
            square.field.scalar(Fraction(1, 16)), square.field.scalar(9),
        )


def test_basis_grid(square_builder, square):
    approx = square_builder.approximant(2)
    field = square.field
    basis = [vec(field, "1", "0"), vec(field, "0", "1")]
    result = basis_forbidden_verify(
        approx, basis, square.single(0), square.single(0), field.scalar(Fraction(1, 100)), field.scalar(9),
        eps=Fraction(3),
    )
    assert result.status == "pass"
    assert result.spacing2 == (field.one(), field.one())
    assert result.band_width2 == field.scalar(Fraction(1, 25))
    # 1/‖a‖ = 1 < (8 + 3)/10
    assert result.upper_bound == (True, True)


def test_forbidden_patch_search(square_builder, square):
    approx = square_builder.approximant(2)
    field = square.field
    a = vec(field, "1", "0")
    x = vec(field, "1/2", "0")
    with pytest.raises(PreconditionFailed):
        forbidden_patch_search(approx, square.single(0), x, field.one(), a, field.scalar(4), field.scalar(4))
    found = forbidden_patch_search(
        approx, square.single(0), x, field.scalar(Fraction(1, 100)), a, field.scalar(4), field.scalar(4),
        check_cover=False,
    )
    assert found is not None
    assert len(found) == 4


# Сдвиги плиток chair лежат в одном смежном классе {z : z₁ + z₂ четно},
# поэтому у a = (1/2, 1/2) фазы всех вхождений любого патча совпадают.
CHAIR_A = ("1/2", "1/2")


@pytest.mark.slow
def test_chair_forbidden_bands_pass(chair_builder, chair):
    field = chair.field
    a = vec(field, *CHAIR_A)
    eigen = eigen_verify(chair_builder.approximant(3), a, field.scalar(16), 20, TOL)
    assert eigen.verdict == "exact"
    # уровень 4 = ω^8, покрытие шире окна радиуса 32
    approx = chair_builder.approximant(4)
    entries = language_at(approx, field.scalar(4)).entries
    assert len(entries) >= 5
    r0_2 = field.scalar(Fraction(1, 64))
    assert band_condition(a, r0_2)
    window2 = field.scalar(1024)
    verdicts = [
        forbidden_verify(approx, a, p1, p2, r0_2, window2, eigen=eigen)
        for p1, p2 in itertools.product(entries[:5], repeat=2)
    ]
    assert len(verdicts) >= 20
    assert all(v.status == "pass" for v in verdicts), [v.to_dict() for v in verdicts if v.status != "pass"]
    assert all(v.anchors[0] == v.anchors[1] for v in verdicts)
    assert sum(v.displacements for v in verdicts) > 0


@pytest.mark.slow
@pytest.mark.parametrize("x", [("1/2", "0"), ("0", "1/2"), ("1/4", "1/4"), ("3/2", "0"), ("-1/8", "-1/8")])
def test_chair_forbidden_patch_found_for_every_entry(chair_builder, chair, x):
    field = chair.field
    approx = chair_builder.approximant(3)
    a = vec(field, *CHAIR_A)
    lang_r2 = field.scalar(4)
    entries = language_at(approx, lang_r2).entries
    for p in entries:
        found = forbidden_patch_search(
            approx, p, vec(field, *x), field.scalar(Fraction(1, 100)), a, lang_r2, field.scalar(64),
            check_cover=False,
        )
        # все смещения имеют фазу 0, а фаза x не меньше 1/8: подходит первый же патч
        assert found == entries[0]


def test_basis_candidates_pick_scale(square_builder, square):
    approx = square_builder.approximant(2)
    field = square.field
    base = [vec(field, "1", "0"), vec(field, "0", "1")]
    # 8/10 < 1 < 11/10 уже при k = 0
    chosen = basis_candidates(approx, base, field.scalar(Fraction(1, 100)), Fraction(3), 4)
    assert chosen == base
    # 8R₀ = 8/5 < 1/‖a‖ = 2^k впервые при k = 1, и 2 < 11/5
    chosen = basis_candidates(approx, base, field.scalar(Fraction(1, 25)), Fraction(3), 4)
    assert chosen == [vec(field, "1/2", "0"), vec(field, "0", "1/2")]


def test_basis_candidates_without_scale(square_builder, square):
    approx = square_builder.approximant(2)
    field = square.field
    with pytest.raises(PreconditionFailed) as info:
        basis_candidates(approx, [vec(field, "1", "0")], field.scalar(Fraction(1, 10000)), Fraction(3), 4)
    assert info.value.details["k_max"] == 4
