"""
Спектральный анализ и проверка запрещенных областей

- spectrum_analyze - характеристический многочлен φ, семейство Пизо, кратности
- eigen_verify / eigen_candidates / eps_close - собственные значения по векторам возврата
- phase_diameter / phase_anchor - фазовая когерентность вхождений патча
- band_membership / forbidden_verify / forbidden_patch_search - сетки полос
  anchor + B(0, R₀) + Ker χ_a и их масштабированные варианты

Все сравнения точные; числа с плавающей точкой служат только для выбора
кандидатов и для сопоставления корней с собственными числами φ.
"""
from __future__ import annotations

import bisect
import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cmp_to_key
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import sympy
from mpmath import mpf, sqrt as mp_sqrt, workdps

from .errors import (
    InsufficientCoverage,
    InsufficientOccurrences,
    NoBaseEigenvalues,
    NoMatch,
    PhaseTooSpread,
    PreconditionFailed,
)
from .exactnum import (
    CirclePoint,
    FieldElement,
    Matrix,
    NumberField,
    Vec,
    circle_dist,
    embed,
    mat_det,
    mat_inv,
    mat_pow,
    mat_trace,
    mat_transpose,
    mat_vec,
    rational_sqrt_upper,
    vec_zero,
)
from .language import (
    PatchLike,
    displacement_set,
    language_at,
    occurrences,
    period_probe,
    return_vectors,
)
from .subst import Approximant, SubstitutionRule
from .tiling import CanonicalPatch, canonicalize


logger = logging.getLogger(__name__)

_X = sympy.Symbol("x")
_Y = sympy.Symbol("y")

QUARTER = Fraction(1, 4)
HALF = Fraction(1, 2)
# заведомо больше погрешности approx()
SLACK = 2.0 ** -30


def _sympy_rational(q: Fraction) -> sympy.Rational:
    return sympy.Rational(q.numerator, q.denominator)


def _fraction(value) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


def _cmp(a: FieldElement, b: FieldElement) -> int:
    return (a - b).sign()


def rational_sqrt_lower(q: Fraction, bits: int = 40) -> Fraction:
    """Рациональная нижняя оценка √q."""
    if q <= 0:
        return Fraction(0)
    scale = 2 ** bits
    return Fraction(math.isqrt(q.numerator * scale * scale // q.denominator), scale)


# === EXPANSION ===

def is_expansive(phi: Matrix) -> bool:
    """
    Все собственные числа φ по модулю больше 1 (d ≤ 2, точно)

    Для d = 2 с p(x) = x² - tx + D: либо p(1) < 0 и p(-1) < 0 (корни по разные
    стороны от [-1, 1]), либо p(±1) > 0 и D > 1.
    """
    if len(phi) == 1:
        return (phi[0][0] * phi[0][0] - 1).sign() > 0
    t = mat_trace(phi)
    det = mat_det(phi)
    at_one = (1 - t + det).sign()
    at_minus_one = (1 + t + det).sign()
    if at_one < 0 and at_minus_one < 0:
        return True
    return at_one > 0 and at_minus_one > 0 and (det - 1).sign() > 0


# === SPECTRUM ===

@dataclass(frozen=True)
class RootInfo:
    """Корень рационального множителя с сертифицированным модулем."""

    re: Tuple[Fraction, Fraction]
    im: Tuple[Fraction, Fraction]
    modulus: Tuple[Fraction, Fraction]
    in_spectrum: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "re": [str(self.re[0]), str(self.re[1])],
            "im": [str(self.im[0]), str(self.im[1])],
            "modulus": [str(self.modulus[0]), str(self.modulus[1])],
            "in_spectrum": self.in_spectrum,
        }


@dataclass(frozen=True)
class FactorInfo:
    coeffs: Tuple[int, ...]
    multiplicity: int
    roots: Tuple[RootInfo, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "poly": [c if isinstance(c, int) else str(c) for c in self.coeffs],
            "multiplicity": self.multiplicity,
            "roots": [r.to_dict() for r in self.roots],
        }


@dataclass(frozen=True)
class SpectrumReport:
    """
    Attributes:
        char_poly: Норма характеристического многочлена φ, целые коэффициенты (свободный член первым)
        factors: Неприводимые множители с корнями
        squarefree: Характеристический многочлен φ над полем без кратных корней
        diagonalizable: True/False, для d ≤ 2 решается точно
        algebraic_integers: Собственные числа - целые алгебраические
        pisot_family: Все сопряженные вне spec(φ) по модулю < 1
        same_multiplicity: Собственные числа сопряжены и одной кратности
    """

    char_poly: Tuple[int, ...]
    factors: Tuple[FactorInfo, ...]
    squarefree: bool
    diagonalizable: bool
    algebraic_integers: bool
    pisot_family: bool
    same_multiplicity: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "char_poly": list(self.char_poly),
            "factors": [f.to_dict() for f in self.factors],
            "squarefree": self.squarefree,
            "diagonalizable": self.diagonalizable,
            "algebraic_integers": self.algebraic_integers,
            "pisot_family": self.pisot_family,
            "same_multiplicity": self.same_multiplicity,
        }


def _element_poly(x: FieldElement) -> sympy.Expr:
    return sum((_sympy_rational(c) * _Y ** i for i, c in enumerate(x.coeffs)), sympy.Integer(0))


def _char_poly_over_field(phi: Matrix) -> List[FieldElement]:
    """Коэффициенты x^d - ... над полем, старший первым."""
    field_one = phi[0][0].field.one()
    if len(phi) == 1:
        return [field_one, -phi[0][0]]
    return [field_one, -mat_trace(phi), mat_det(phi)]


def _eigen_approx(phi: Matrix, dps: int = 60) -> List[Any]:
    """Собственные числа φ при выбранном вложении поля (mpmath)."""
    with workdps(dps):
        def value(x: FieldElement):
            lo, hi = embed(x, 4 * dps)
            mid = (lo + hi) / 2
            return mpf(mid.numerator) / mpf(mid.denominator)

        if len(phi) == 1:
            return [value(phi[0][0])]
        t = value(mat_trace(phi))
        det = value(mat_det(phi))
        root = mp_sqrt(t * t - 4 * det)
        return [(t + root) / 2, (t - root) / 2]


def _root_regions(poly: sympy.Poly, eps: Fraction) -> List[Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]]:
    """Изолирующие прямоугольники всех комплексных корней (re-интервал, im-интервал)."""
    real_part, complex_part = poly.intervals(all=True, eps=_sympy_rational(eps))
    regions = []
    for item in real_part:
        interval = item[0] if isinstance(item[0], tuple) else item
        a, b = _fraction(interval[0]), _fraction(interval[1])
        regions.append(((a, b), (Fraction(0), Fraction(0))))
    for item in complex_part:
        rect = item[0] if isinstance(item[0][0], tuple) else item
        (ax, ay), (bx, by) = rect
        regions.append(((_fraction(ax), _fraction(bx)), (_fraction(ay), _fraction(by))))
    if len(regions) < poly.degree():
        # симметричные сопряженные
        for (re, im) in list(regions):
            if im[1] > 0 and len(regions) < poly.degree():
                regions.append((re, (-im[1], -im[0])))
    return regions


def _modulus(re: Tuple[Fraction, Fraction], im: Tuple[Fraction, Fraction]) -> Tuple[Fraction, Fraction]:
    def square_range(lo: Fraction, hi: Fraction) -> Tuple[Fraction, Fraction]:
        if lo <= 0 <= hi:
            return Fraction(0), max(lo * lo, hi * hi)
        return min(lo * lo, hi * hi), max(lo * lo, hi * hi)

    rlo, rhi = square_range(*re)
    ilo, ihi = square_range(*im)
    return rational_sqrt_lower(rlo + ilo), rational_sqrt_upper(rhi + ihi)


def spectrum_analyze(rule_or_phi, eps_bits: int = 26) -> SpectrumReport:
    """
    Анализ спектра φ

    Норма характеристического многочлена над полем считается как
    результант по образующей; корни неприводимых множителей изолируются
    сертифицированными прямоугольниками ширины ≤ 2^-eps_bits.

    Args:
        rule_or_phi: Правило или матрица φ
        eps_bits: Точность изоляции корней
    """
    phi: Matrix = rule_or_phi.phi if isinstance(rule_or_phi, SubstitutionRule) else rule_or_phi
    number_field: NumberField = phi[0][0].field
    d = len(phi)

    coeffs = _char_poly_over_field(phi)
    f_xy = sum((_element_poly(c) * _X ** (d - i) for i, c in enumerate(coeffs)), sympy.Integer(0))
    m_y = sum((sympy.Integer(c) * _Y ** i for i, c in enumerate(number_field.min_poly)), sympy.Integer(0))
    norm = sympy.Poly(sympy.resultant(f_xy, m_y, _Y), _X, domain=sympy.QQ)
    norm = norm.monic()
    _, factor_list = norm.factor_list()

    denominators = [_fraction(c).denominator for c in norm.all_coeffs()]
    scale = 1
    for den in denominators:
        scale = scale * den // math.gcd(scale, den)
    char_poly = tuple(int(_fraction(c) * scale) for c in reversed(norm.all_coeffs()))

    if d == 1:
        squarefree = True
        diagonalizable = True
        multiplicity = [1]
    else:
        disc = mat_trace(phi) * mat_trace(phi) - mat_det(phi) * 4
        squarefree = not disc.is_zero()
        scalar = phi[0][1].is_zero() and phi[1][0].is_zero() and phi[0][0] == phi[1][1]
        diagonalizable = squarefree or scalar
        multiplicity = [1, 1] if squarefree else [2]

    eigen = _eigen_approx(phi)
    if d == 2 and not squarefree:
        eigen = eigen[:1]

    eps = Fraction(1, 2 ** eps_bits)
    factors: List[FactorInfo] = []
    owners: List[Tuple[int, int]] = []
    for poly, mult in factor_list:
        poly = sympy.Poly(poly, _X, domain=sympy.QQ).monic()
        regions = _root_regions(poly, eps)
        factors.append(
            FactorInfo(
                tuple(_fraction(c) for c in reversed(poly.all_coeffs())),
                int(mult),
                tuple(RootInfo(re, im, _modulus(re, im), False) for re, im in regions),
            )
        )

    # сопоставление собственных чисел φ с изолированными корнями
    with workdps(60):
        for lam in eigen:
            lam_re = float(lam.real) if hasattr(lam, "real") else float(lam)
            lam_im = float(lam.imag) if hasattr(lam, "imag") else 0.0
            best = None
            for fi, factor in enumerate(factors):
                for ri, root in enumerate(factor.roots):
                    cx = float((root.re[0] + root.re[1]) / 2)
                    cy = float((root.im[0] + root.im[1]) / 2)
                    dist = (cx - lam_re) ** 2 + (cy - lam_im) ** 2
                    if best is None or dist < best[0]:
                        best = (dist, fi, ri)
            owners.append((best[1], best[2]))

    marked = []
    for fi, factor in enumerate(factors):
        roots = tuple(
            RootInfo(r.re, r.im, r.modulus, (fi, ri) in owners) for ri, r in enumerate(factor.roots)
        )
        marked.append(FactorInfo(factor.coeffs, factor.multiplicity, roots))
    factors = marked

    owner_factors = {fi for fi, _ in owners}
    algebraic_integers = all(
        all(Fraction(c).denominator == 1 for c in factors[fi].coeffs) for fi in owner_factors
    )
    outside_small = all(
        r.modulus[1] < 1 for fi in owner_factors for r in factors[fi].roots if not r.in_spectrum
    )
    pisot_family = algebraic_integers and outside_small
    same_multiplicity = len(owner_factors) == 1 and len(set(multiplicity)) == 1

    report = SpectrumReport(
        char_poly=char_poly,
        factors=tuple(
            FactorInfo(tuple(int(c) if Fraction(c).denominator == 1 else c for c in f.coeffs), f.multiplicity, f.roots)
            for f in factors
        ),
        squarefree=squarefree,
        diagonalizable=diagonalizable,
        algebraic_integers=algebraic_integers,
        pisot_family=pisot_family,
        same_multiplicity=same_multiplicity,
    )
    logger.info(f"🔬 Спектр: pisot_family={pisot_family}, same_multiplicity={same_multiplicity}")
    return report


# === EIGENVALUES ===

Verdict = Literal["exact", "verified", "rejected"]


@dataclass(frozen=True)
class ReturnTrace:
    """Последовательность ρ_T(χ_a(φ^n z), 1) для одного вектора возврата."""

    z: Vec
    terms: Tuple[FieldElement, ...]
    exact_from: Optional[int]

    def to_dict(self) -> Dict[str, Any]:
        tail = self.terms[len(self.terms) // 2:]
        worst = max(tail, key=cmp_to_key(_cmp)) if tail else None
        return {
            "z": self.z.to_strings(),
            "exact_from": self.exact_from,
            "tail_max": worst.to_strings() if worst is not None else None,
        }


@dataclass(frozen=True)
class EigenReport:
    """
    Attributes:
        verdict: exact - с n₀ все члены точно 0; verified - хвост ≤ tol; rejected - есть свидетель
        n0: Для exact - наибольший по z номер начала нулей
        witness: Для rejected - (z, n, значение) или причина period
        recurrence: Нули продолжаются по рекуррентности (характеристический многочлен φ целый)
    """

    a: Vec
    return_norm2: FieldElement
    horizon: int
    tol: Fraction
    level: int
    verdict: Verdict
    n0: Optional[int]
    witness: Optional[Dict[str, Any]]
    recurrence: bool
    traces: Tuple[ReturnTrace, ...] = field(repr=False)

    @property
    def positive(self) -> bool:
        return self.verdict in ("exact", "verified")

    def to_dict(self, full: bool = False) -> Dict[str, Any]:
        result = {
            "a": self.a.to_strings(),
            "verdict": self.verdict,
            "n0": self.n0,
            "witness": self.witness,
            "evidence": {
                "return_norm2": self.return_norm2.to_strings(),
                "N": self.horizon,
                "tol": str(self.tol),
                "level": self.level,
                "return_vectors": len(self.traces),
                "recurrence": self.recurrence,
            },
        }
        if full:
            result["traces"] = [t.to_dict() for t in self.traces]
        return result


def _phase_dist(value: FieldElement) -> FieldElement:
    return circle_dist(CirclePoint.of(value), CirclePoint.of(value.field.zero()))


def _integral_char_poly(phi: Matrix) -> bool:
    return all(c.is_rational() and c.coeffs[0].denominator == 1 for c in _char_poly_over_field(phi))


def eigen_verify(
    approx: Approximant,
    a: Vec,
    return_norm2: FieldElement,
    horizon: int,
    tol: Fraction,
    probe_periods: bool = True,
) -> EigenReport:
    """
    Критерий по векторам возврата: lim ⟨φ^n z, a⟩ ≡ 0 (mod 1)

    Args:
        approx: Аппроксимант
        a: Кандидат в собственные значения
        return_norm2: Квадрат радиуса для векторов возврата
        horizon: N - число итераций
        tol: Допуск хвоста n ∈ [N/2, N]
        probe_periods: Проверять χ_a(z) = 1 для периодов окна

    Raises:
        PreconditionFailed: a = 0
        InsufficientCoverage: Векторы возврата не помещаются в покрытие
    """
    if a.is_zero():
        raise PreconditionFailed("Кандидат a должен быть ненулевым")
    phi = approx.rule.phi
    zs = sorted(return_vectors(approx, return_norm2), key=lambda v: v.key())
    recurrence = _integral_char_poly(phi)
    traces: List[ReturnTrace] = []
    n0 = 0
    all_exact = True
    for z in zs:
        v = z
        terms: List[FieldElement] = []
        exact_from: Optional[int] = None
        for n in range(horizon + 1):
            value = v.dot(a)
            term = _phase_dist(value)
            terms.append(term)
            if n >= 1 and term.is_zero() and terms[n - 1].is_zero() and exact_from is None:
                exact_from = n - 1
            elif exact_from is not None and not term.is_zero():
                exact_from = None
            v = mat_vec(phi, v)
        if exact_from is None:
            all_exact = False
        else:
            n0 = max(n0, exact_from)
        traces.append(ReturnTrace(z, tuple(terms), exact_from))

    level = approx.level
    verdict: Verdict
    witness = None
    if zs and all_exact:
        verdict = "exact"
    else:
        verdict = "verified"
        for trace in traces:
            for n in range(horizon // 2, horizon + 1):
                if (trace.terms[n] - tol).sign() > 0:
                    verdict = "rejected"
                    witness = {"z": trace.z.to_strings(), "n": n, "value": trace.terms[n].to_strings()}
            if verdict == "rejected":
                break
        n0 = None if verdict != "exact" else n0
    if not zs:
        verdict, witness = "rejected", {"reason": "no-return-vectors"}

    if verdict != "rejected" and probe_periods:
        window2 = approx.coverage_radius2 / 16
        for z in zs:
            try:
                periodic = period_probe(approx, z, window2)
            except InsufficientCoverage:
                continue
            if periodic and not CirclePoint.of(z.dot(a)).is_identity():
                verdict = "rejected"
                witness = {"reason": "period", "z": z.to_strings()}
                n0 = None
                break

    logger.info(f"🎯 eigen_verify a={a.to_strings()}: {verdict}")
    return EigenReport(
        a, return_norm2, horizon, tol, level, verdict, n0 if verdict == "exact" else None, witness,
        recurrence, tuple(traces),
    )


def eps_close(first: Sequence[Vec], second: Sequence[Vec], eps) -> bool:
    """
    F и F′ ε-близки: у каждого x ∈ F ровно один y ∈ F′ с ‖x - y‖ < ε, и наоборот
    """
    eps2 = eps * eps

    def unique_match(xs: Sequence[Vec], ys: Sequence[Vec]) -> bool:
        for x in xs:
            close = sum(1 for y in ys if ((x - y).norm2() - eps2).sign() < 0)
            if close != 1:
                return False
        return True

    return unique_match(first, second) and unique_match(second, first)


# --- базис собственных значений ---

def _coordinates(v: Vec) -> List[Fraction]:
    return [c for entry in v for c in entry.coeffs]


def _unit_vectors(number_field: NumberField, dim: int) -> List[Vec]:
    units = []
    for i in range(dim):
        for k in range(number_field.degree):
            coeffs = [Fraction(0)] * number_field.degree
            coeffs[k] = Fraction(1)
            units.append(Vec(number_field.element(coeffs) if j == i else number_field.zero() for j in range(dim)))
    return units


def _independent_subset(vectors: Sequence[Vec], rank: int) -> List[Vec]:
    chosen: List[Vec] = []
    for v in vectors:
        trial = chosen + [v]
        if sympy.Matrix([[_sympy_rational(c) for c in _coordinates(w)] for w in trial]).rank() == len(trial):
            chosen = trial
        if len(chosen) == rank:
            break
    return chosen


def dual_generators(approx: Approximant, return_norm2: FieldElement) -> List[Vec]:
    """
    Двойственный базис к векторам возврата по форме следа

    Берутся d·[K:Q] линейно независимых векторов возврата наименьшей нормы;
    решается Tr⟨z_i, a_j⟩ = δ_ij.
    """
    number_field = approx.rule.field
    dim = approx.rule.dim
    rank = dim * number_field.degree
    zs = sorted(return_vectors(approx, return_norm2), key=lambda v: (v.norm2().approx(), v.key()))
    basis = _independent_subset(zs, rank)
    if len(basis) < rank:
        raise NoBaseEigenvalues(
            "Векторы возврата не порождают решетку полного ранга",
            {"rank": len(basis), "required": rank},
        )
    units = _unit_vectors(number_field, dim)
    gram = sympy.Matrix([[_sympy_rational(z.dot(e).trace()) for e in units] for z in basis])
    solution = gram.inv().T
    dual = []
    for j in range(rank):
        entries = [number_field.zero() for _ in range(dim)]
        for k, e in enumerate(units):
            coef = _fraction(solution[j, k])
            if coef:
                entries = [x + y * coef for x, y in zip(entries, e)]
        dual.append(Vec(entries))
    return dual


def _combinations(generators: Sequence[Vec], height: int):
    """Целые комбинации по возрастанию высоты max|c|, затем суммы |c|."""
    rank = len(generators)
    for h in range(1, height + 1):
        for total in range(h, rank * h + 1):
            yield from _combine(generators, _shell(rank, h, total))


def _shell(rank: int, h: int, total: int, prefix: Tuple[int, ...] = ()):
    """Лексикографически: c ∈ [-h, h]^rank с max|c| = h и ∑|c| = total."""
    left = rank - len(prefix)
    if left == 0:
        if total == 0 and h in map(abs, prefix):
            yield prefix
        return
    for x in range(-h, h + 1):
        rest = total - abs(x)
        if 0 <= rest <= (left - 1) * h:
            yield from _shell(rank, h, rest, prefix + (x,))


def _combine(generators: Sequence[Vec], shell: Sequence[Tuple[int, ...]]):
    for c in shell:
        total = None
        for k, g in zip(c, generators):
            if k:
                term = g.scale(k)
                total = term if total is None else total + term
        yield c, total


def base_eigenvalues(
    approx: Approximant,
    return_norm2: FieldElement,
    horizon: int,
    tol: Fraction,
    height: int = 8,
) -> List[Vec]:
    """
    Базовые собственные значения: перебор малых векторов двойственного модуля

    Raises:
        NoBaseEigenvalues: Ни один кандидат высоты ≤ height не прошел проверку
    """
    generators = dual_generators(approx, return_norm2)
    rank = len(generators)
    found: List[Vec] = []
    for coeffs, candidate in _combinations(generators, height):
        if found and len(_independent_subset(found + [candidate], rank)) == len(found):
            continue
        report = eigen_verify(approx, candidate, return_norm2, horizon, tol)
        if report.positive:
            found.append(candidate)
            logger.info(f"✅ Базовое собственное значение {candidate.to_strings()}")
            if len(found) == rank:
                break
    if not found:
        raise NoBaseEigenvalues("Перебор двойственного модуля не дал собственных значений", {"height": height})
    return found


def lattice_generators(rule: SubstitutionRule, base: Sequence[Vec], k: int) -> List[Vec]:
    """(φ*)^{-k} b для b из базы."""
    inverse = mat_pow(mat_inv(mat_transpose(rule.phi)), k)
    return [mat_vec(inverse, b) for b in base]


def _module_coordinates(generators: Sequence[Vec], x: Vec) -> List[Fraction]:
    """
    Рациональные координаты проекции x на Q-оболочку образующих

    Если образующие - Q-базис Q(θ)^d, это точные координаты x.

    Raises:
        NoMatch: Образующие линейно зависимы над Q
    """
    g = sympy.Matrix([[_sympy_rational(c) for c in _coordinates(v)] for v in generators]).T
    target = sympy.Matrix([_sympy_rational(c) for c in _coordinates(x)])
    normal = g.T * g
    if normal.det() == 0:
        raise NoMatch("База собственных значений линейно зависима", {"size": len(generators)})
    solution = normal.inv() * g.T * target
    return [_fraction(solution[j]) for j in range(len(generators))]


def _nearest_in_module(generators: Sequence[Vec], x: Vec) -> Tuple[FieldElement, Tuple[int, ...], Vec]:
    """
    Ближайший к x элемент ∑ Z g среди округлений координат вниз и вверх

    Перебирается не больше 2^r комбинаций, где r - число нецелых координат.
    """
    coords = _module_coordinates(generators, x)
    choices = [(math.floor(c),) if c.denominator == 1 else (math.floor(c), math.ceil(c)) for c in coords]
    best: Optional[Tuple[FieldElement, Tuple[int, ...], Vec]] = None
    for coeffs in itertools.product(*choices):
        y = vec_zero(x[0].field, len(x))
        for c, g in zip(coeffs, generators):
            if c:
                y = y + g.scale(c)
        d2 = (x - y).norm2()
        if best is None or (d2 - best[0]).sign() < 0:
            best = (d2, coeffs, y)
    return best


@dataclass(frozen=True)
class CandidateMatch:
    a: Vec
    matched_to: Vec
    k: int
    coeffs: Tuple[int, ...]
    verdict: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a": self.a.to_strings(),
            "matched_to": self.matched_to.to_strings(),
            "k": self.k,
            "coeffs": list(self.coeffs),
            "verdict": self.verdict,
        }


def eigen_candidates(
    approx: Approximant,
    targets: Sequence[Vec],
    eps,
    k_max: int,
    base: Optional[Sequence[Vec]] = None,
    return_norm2: Optional[FieldElement] = None,
    horizon: int = 40,
    tol: Fraction = Fraction(1, 2 ** 20),
    height: int = 8,
    verify: bool = True,
) -> List[CandidateMatch]:
    """
    Для каждого x ∈ F ближайший элемент модуля ∑ Z (φ*)^{-k} b, k ≤ k_max

    Ближайший ищется округлением координат x в образующих, а не перебором.

    Args:
        approx: Аппроксимант для проверки и поиска базы
        targets: F
        eps: ε (точное сравнение ‖x - y‖² < ε²)
        k_max: Наибольшая степень
        base: Проверенные собственные значения; без них ищутся base_eigenvalues
        height: Высота перебора для base_eigenvalues
        return_norm2: Радиус векторов возврата для проверок
        verify: Прогонять найденные a через eigen_verify

    Raises:
        NoBaseEigenvalues, NoMatch
    """
    rule = approx.rule
    if return_norm2 is None:
        return_norm2 = rule.field.scalar(16)
    if base is None:
        base = base_eigenvalues(approx, return_norm2, horizon, tol, height)
    eps2 = eps * eps
    matches: List[CandidateMatch] = []
    for x in targets:
        best: Optional[Tuple[FieldElement, int, Tuple[int, ...], Vec]] = None
        for k in range(k_max + 1):
            d2, coeffs, y = _nearest_in_module(lattice_generators(rule, base, k), x)
            if best is None or (d2 - best[0]).sign() < 0:
                best = (d2, k, coeffs, y)
        if best is None or (best[0] - eps2).sign() >= 0:
            raise NoMatch(f"Нет кандидата в ε-окрестности {x.to_strings()}", {"x": x.to_strings(), "eps": str(eps)})
        verdict = None
        if verify:
            verdict = eigen_verify(approx, best[3], return_norm2, horizon, tol).verdict
        matches.append(CandidateMatch(best[3], x, best[1], best[2], verdict))
    chosen = [m.a for m in matches]
    if not eps_close(list(targets), chosen, eps):
        raise NoMatch("Сопоставление не единственно", {"eps": str(eps)})
    return matches


# === PHASES ===

@dataclass(frozen=True)
class PhaseReport:
    """
    Attributes:
        diameter: Наибольшее попарное расстояние фаз χ_a(t) в метрике окружности
        arc_start: Начало кратчайшей дуги, содержащей все фазы
        arc_length: Длина этой дуги
        count: Число вхождений
    """

    diameter: FieldElement
    arc_start: FieldElement
    arc_length: FieldElement
    count: int

    @property
    def midpoint(self) -> FieldElement:
        return (self.arc_start + self.arc_length / 2).frac()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "diameter": self.diameter.to_strings(),
            "arc_start": self.arc_start.to_strings(),
            "arc_length": self.arc_length.to_strings(),
            "occurrences": self.count,
        }


def phase_spread(phases: Sequence[FieldElement]) -> PhaseReport:
    """Кратчайшая покрывающая дуга и диаметр отсортированных фаз из [0, 1)."""
    count = len(phases)
    zero = phases[0].field.zero()
    if count == 1:
        return PhaseReport(zero, phases[0], zero, 1)
    gaps = [phases[i + 1] - phases[i] for i in range(count - 1)]
    gaps.append(phases[0] + 1 - phases[-1])
    widest = max(range(count), key=cmp_to_key(lambda i, j: _cmp(gaps[i], gaps[j]) or (j - i)))
    start = phases[(widest + 1) % count]
    length = 1 - gaps[widest]
    if (length - HALF).sign() <= 0:
        return PhaseReport(length, start, length, count)
    # дуга длиннее 1/2: диаметр - максимум попарных расстояний
    floats = [p.approx() for p in phases]
    best = zero
    for i, p in enumerate(phases):
        for k in _near_antipode(floats, (floats[i] + 0.5) % 1.0):
            dist = circle_dist(CirclePoint(p), CirclePoint(phases[k]))
            if (dist - best).sign() > 0:
                best = dist
    return PhaseReport(best, start, length, count)


def _near_antipode(floats: Sequence[float], target: float) -> set:
    """
    Индексы фаз, среди которых лежит ближайшая к target

    Берутся все фазы в пределах SLACK от target (с переходом через 0) и по
    одной соседней с каждой стороны; порядок внутри окна решает точное сравнение.
    """
    count = len(floats)
    lo = bisect.bisect_left(floats, target - SLACK)
    hi = bisect.bisect_right(floats, target + SLACK)
    found = {k % count for k in range(lo - 1, hi + 1)}
    for t in (target - 1.0, target + 1.0):
        found.update(range(bisect.bisect_left(floats, t - SLACK), bisect.bisect_right(floats, t + SLACK)))
    return found


def phase_diameter(approx: Approximant, a: Vec, p: PatchLike, window2: FieldElement) -> PhaseReport:
    """
    Диаметр фаз {χ_a(t) : t - вхождение p в окне}

    Raises:
        InsufficientOccurrences: Меньше двух вхождений
    """
    occ = occurrences(approx, p, window2)
    if len(occ) < 2:
        raise InsufficientOccurrences(
            f"Нужно ≥ 2 вхождений, найдено {len(occ)}",
            {"occurrences": len(occ), "window2": window2.to_strings(), "level": approx.level},
        )
    phases = sorted({t.dot(a).frac() for t in occ}, key=cmp_to_key(_cmp))
    return replace(phase_spread(phases), count=len(occ))


@dataclass(frozen=True)
class AnchorReport:
    x: Vec
    theta: FieldElement
    phases: PhaseReport

    def to_dict(self) -> Dict[str, Any]:
        return {"x": self.x.to_strings(), "theta": self.theta.to_strings(), "phases": self.phases.to_dict()}


def phase_anchor(approx: Approximant, a: Vec, p: PatchLike, window2: FieldElement) -> AnchorReport:
    """
    x(p) = -(θ*/‖a‖²)·a, где θ* - середина кратчайшей дуги фаз

    Тогда ⟨a, x(p)⟩ = -θ*, фазы χ_a(t + x(p)) собираются у 1. Вхождения p + v
    равны t - v, поэтому χ_a(x(p + v) - v) = χ_a(x(p)).

    Raises:
        PhaseTooSpread: Диаметр ≥ 1/4
    """
    report = phase_diameter(approx, a, p, window2)
    if (report.diameter - QUARTER).sign() >= 0:
        raise PhaseTooSpread(
            "Фазы вхождений разбросаны на ≥ 1/4, нужен больший радиус окон",
            {"diameter": report.diameter.to_strings(), "occurrences": report.count},
        )
    theta = report.midpoint
    return AnchorReport(a.scale(-theta / a.norm2()), theta, report)


def band_membership(v: Vec, a: Vec, r0_2: FieldElement, anchor: Vec) -> bool:
    """
    v ∈ anchor + B(0, R₀) + Ker χ_a

    Расстояние до Ker χ_a равно ρ_T(⟨a, v - anchor⟩, 0)/‖a‖, поэтому
    сравнивается ρ_T² с R₀²‖a‖².
    """
    rho = _phase_dist((v - anchor).dot(a))
    return (rho * rho - r0_2 * a.norm2()).sign() < 0


# === FORBIDDEN REGIONS ===

ForbiddenStatus = Literal["pass", "violation", "insufficient"]


@dataclass(frozen=True)
class ForbiddenVerdict:
    a: Vec
    r0_2: FieldElement
    p1: CanonicalPatch
    p2: CanonicalPatch
    anchors: Optional[Tuple[Vec, Vec]]
    scale_m: int
    window2: FieldElement
    level: int
    status: ForbiddenStatus
    witness: Optional[Vec] = None
    reason: Optional[str] = None
    displacements: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a": self.a.to_strings(),
            "R0_2": self.r0_2.to_strings(),
            "scale_m": self.scale_m,
            "status": self.status,
            "witness": self.witness.to_strings() if self.witness is not None else None,
            "reason": self.reason,
            "anchors": [x.to_strings() for x in self.anchors] if self.anchors else None,
            "p1": [[t.proto, t.shift.to_strings()] for t in self.p1.patch.sorted_tiles()],
            "p2": [[t.proto, t.shift.to_strings()] for t in self.p2.patch.sorted_tiles()],
            "evidence": {"window2": self.window2.to_strings(), "level": self.level, "displacements": self.displacements},
        }


def band_condition(a: Vec, r0_2: FieldElement) -> bool:
    """8R₀ < 1/‖a‖, то есть 64·R₀²·‖a‖² < 1."""
    return (r0_2 * a.norm2() * 64 - 1).sign() < 0


def forbidden_verify(
    approx: Approximant,
    a: Vec,
    p1: PatchLike,
    p2: PatchLike,
    r0_2: FieldElement,
    window2: FieldElement,
    scale_m: int = 0,
    eigen: Optional[EigenReport] = None,
) -> ForbiddenVerdict:
    """
    Проверяет, что D(p1, p2) не заходит в anchor₀ + φ^{-m}(a/(2‖a‖²) + B(0, R₀) + Ker χ_a)

    anchor₀ = x(p1) - x(p2), так что ⟨a, anchor₀⟩ = θ₂ - θ₁ совпадает с фазой
    совместных смещений t₂ - t₁; для m > 0 фазовые якоря считаются по (φ*)^m a,
    и проверяется φ^m(d - anchor₀) против немасштабированной полосы.

    Raises:
        PreconditionFailed: a не прошел eigen_verify или 64R₀²‖a‖² ≥ 1
    """
    if eigen is not None and not eigen.positive:
        raise PreconditionFailed("a не является проверенным собственным значением", {"verdict": eigen.verdict})
    if not band_condition(a, r0_2):
        raise PreconditionFailed("Нарушено 8R₀ < 1/‖a‖", {"a": a.to_strings(), "R0_2": r0_2.to_strings()})
    c1 = p1 if isinstance(p1, CanonicalPatch) else canonicalize(p1)
    c2 = p2 if isinstance(p2, CanonicalPatch) else canonicalize(p2)
    phi_m = mat_pow(approx.rule.phi, scale_m)
    a_m = mat_vec(mat_transpose(phi_m), a)

    def insufficient(reason: str) -> ForbiddenVerdict:
        return ForbiddenVerdict(a, r0_2, c1, c2, None, scale_m, window2, approx.level, "insufficient", reason=reason)

    try:
        x1 = phase_anchor(approx, a_m, c1, window2).x
        x2 = phase_anchor(approx, a_m, c2, window2).x
    except PhaseTooSpread:
        return insufficient("phase-too-spread")
    except InsufficientOccurrences:
        return insufficient("occurrences")
    except InsufficientCoverage:
        return insufficient("coverage")
    try:
        shifts = displacement_set(approx, c1, c2, window2).sorted_shifts()
    except InsufficientCoverage:
        return insufficient("coverage")

    anchor0 = x1 - x2
    half = a.scale(Fraction(1, 2) / a.norm2())
    for d in shifts:
        if scale_m == 0:
            hit = band_membership(d, a, r0_2, anchor0 + half)
        else:
            hit = band_membership(mat_vec(phi_m, d - anchor0), a, r0_2, half)
        if hit:
            logger.error(f"❌ Смещение {d.to_strings()} попало в запрещенную полосу")
            return ForbiddenVerdict(
                a, r0_2, c1, c2, (x1, x2), scale_m, window2, approx.level, "violation", d, None, len(shifts)
            )
    return ForbiddenVerdict(a, r0_2, c1, c2, (x1, x2), scale_m, window2, approx.level, "pass", None, None, len(shifts))


@dataclass(frozen=True)
class BasisVerdict:
    """Пересечение полос по базису собственных значений."""

    verdicts: Tuple[ForbiddenVerdict, ...]
    status: ForbiddenStatus
    band_width2: FieldElement
    spacing2: Tuple[FieldElement, ...]
    upper_bound: Optional[Tuple[bool, ...]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status,
            "band_width2": self.band_width2.to_strings(),
            "spacing2": [s.to_strings() for s in self.spacing2],
            "upper_bound": list(self.upper_bound) if self.upper_bound is not None else None,
            "verdicts": [v.to_dict() for v in self.verdicts],
        }


def basis_forbidden_verify(
    approx: Approximant,
    basis: Sequence[Vec],
    p1: PatchLike,
    p2: PatchLike,
    r0_2: FieldElement,
    window2: FieldElement,
    eps: Optional[Fraction] = None,
    eigen: Optional[Sequence[EigenReport]] = None,
) -> BasisVerdict:
    """
    forbidden_verify для каждого a из базиса; сетка проходит, если проходят все

    Ширина полосы 2R₀ и шаг 1/‖a‖ возвращаются квадратами; при заданном ε
    проверяется и верхняя граница 1/‖a‖ < (8 + ε)R₀.

    Raises:
        PreconditionFailed: Базис вырожден или нарушено 8R₀ < 1/‖a‖
    """
    dim = approx.rule.dim
    if len(basis) != dim:
        raise PreconditionFailed(f"Нужно {dim} векторов базиса", {"given": len(basis)})
    det = basis[0][0] if dim == 1 else basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0]
    if det.is_zero():
        raise PreconditionFailed("Векторы базиса линейно зависимы")
    for a in basis:
        if not band_condition(a, r0_2):
            raise PreconditionFailed("Нарушено 8R₀ < 1/‖a‖", {"a": a.to_strings()})
    verdicts = tuple(
        forbidden_verify(approx, a, p1, p2, r0_2, window2, eigen=eigen[i] if eigen else None)
        for i, a in enumerate(basis)
    )
    if all(v.status == "pass" for v in verdicts):
        status: ForbiddenStatus = "pass"
    elif any(v.status == "violation" for v in verdicts):
        status = "violation"
    else:
        status = "insufficient"
    upper = None
    if eps is not None:
        upper = tuple(((r0_2 * a.norm2() * (8 + eps) ** 2) - 1).sign() > 0 for a in basis)
    return BasisVerdict(verdicts, status, r0_2 * 4, tuple(a.norm2().inverse() for a in basis), upper)


def basis_candidates(
    approx: Approximant,
    base: Sequence[Vec],
    r0_2: FieldElement,
    eps: Fraction,
    k_max: int,
) -> List[Vec]:
    """
    По одному (φ*)^{-k} b на каждый b из базы с 8R₀ < 1/‖a‖ < (8 + ε)R₀

    Raises:
        PreconditionFailed: Для некоторого b подходящего k ≤ k_max нет
    """
    chosen = []
    for b in base:
        for k in range(k_max + 1):
            a = lattice_generators(approx.rule, [b], k)[0]
            upper_ok = ((r0_2 * a.norm2() * (8 + eps) ** 2) - 1).sign() > 0
            if band_condition(a, r0_2) and upper_ok:
                chosen.append(a)
                break
        else:
            raise PreconditionFailed(
                "Нет масштаба с 8R₀ < 1/‖a‖ < (8 + ε)R₀",
                {"b": b.to_strings(), "k_max": k_max},
            )
    return chosen


def forbidden_patch_search(
    approx: Approximant,
    p: PatchLike,
    x: Vec,
    u_radius2: FieldElement,
    a: Vec,
    lang_r2: FieldElement,
    window2: FieldElement,
    check_cover: bool = True,
    eigen: Optional[EigenReport] = None,
) -> Optional[CanonicalPatch]:
    """
    Первый p′ ∈ Π_{T,R,A}, ни одно смещение которого относительно p
    не попадает в x + B(0, U) + Ker χ_a

    Args:
        check_cover: Требовать U ⊇ -P̄ для всех прототайлов

    Raises:
        PreconditionFailed: U мал или a не собственное значение
        InsufficientCoverage
    """
    if eigen is not None and not eigen.positive:
        raise PreconditionFailed("a не является проверенным собственным значением", {"verdict": eigen.verdict})
    if check_cover:
        reach2 = approx.rule.field.zero()
        for polygon in approx.rule.prototiles:
            for v in polygon.vertices:
                if (v.norm2() - reach2).sign() > 0:
                    reach2 = v.norm2()
        if (u_radius2 - reach2).sign() <= 0:
            raise PreconditionFailed(
                "U должен содержать -P̄ для всех прототайлов",
                {"U_radius2": u_radius2.to_strings(), "required_above": reach2.to_strings()},
            )
    language = language_at(approx, lang_r2)
    for candidate in language.entries:
        shifts = displacement_set(approx, p, candidate, window2).sorted_shifts()
        if not any(band_membership(d, a, u_radius2, x) for d in shifts):
            logger.info(f"✅ Найден патч вне области: {len(candidate)} плиток")
            return candidate
    return None
