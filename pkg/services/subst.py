"""
Правила подстановки и псевдоподстановки

Содержит:
- SubstitutionRule - прототайлы, отображение растяжения φ и образы ω(P)
- substitute - продолжение ω(P+x) = ω(P) + φ(x) на патчи
- primitivity_check, find_seed, grow, expanding_check, rule_flc_probe
- support_bound_check - оценка supp ω^n(P) через φ^n(P̄) и L
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np
import psutil

import config
from .errors import DivisionByZero, NoSeedFound, ResourceLimit, SchemaError
from .exactnum import (
    FieldElement,
    Matrix,
    NumberField,
    Vec,
    embed,
    identity,
    mat_inv,
    mat_pow,
    mat_sub,
    mat_vec,
    rational_sqrt_upper,
    vec_zero,
)
from .geometry import Polygon, boundary_distance2
from .tiling import Patch, PlacedTile, canonicalize, patch_build, restrict


logger = logging.getLogger(__name__)

RuleKind = Literal["substitution", "pseudo"]


@dataclass(frozen=True)
class SubstitutionRule:
    """
    Правило (A, φ, ω)

    Attributes:
        name: Имя правила
        field: Поле координат
        dim: Размерность d ∈ {1, 2}
        kind: substitution - supp ω(P) = φ(P̄); pseudo - только оценка через L
        proto_names: Имена прототайлов
        prototiles: Многоугольники прототайлов (каждый содержит начало координат)
        phi: Матрица растяжения
        images: Для каждого прототайла плитки ω(P)
        support_bound2: L² из оценки supp ω(P) ⊂ φ(P̄) + B(0, L); ноль для подстановок
        metadata: Объявленные свойства (non_periodic и т.п.)
        digest: Хеш документа правила
    """

    name: str
    field: NumberField
    dim: int
    kind: RuleKind
    proto_names: Tuple[str, ...]
    prototiles: Tuple[Polygon, ...]
    phi: Matrix
    images: Tuple[Tuple[PlacedTile, ...], ...]
    support_bound2: FieldElement
    metadata: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)
    digest: str = ""

    @property
    def size(self) -> int:
        return len(self.prototiles)

    def tile(self, proto: int, shift: Optional[Vec] = None) -> PlacedTile:
        return PlacedTile(proto, shift if shift is not None else vec_zero(self.field, self.dim))

    def single(self, proto: int, shift: Optional[Vec] = None) -> Patch:
        return Patch(frozenset([self.tile(proto, shift)]), self.prototiles)

    def empty(self) -> Patch:
        return Patch(frozenset(), self.prototiles)

    def summary(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "digest": self.digest,
            "kind": self.kind,
            "dim": self.dim,
            "field": self.field.to_dict(),
            "prototiles": list(self.proto_names),
            "support_bound2": self.support_bound2.to_strings(),
            "metadata": dict(self.metadata),
        }


def rule_parse(document: str, name: str = "rule") -> SubstitutionRule:
    """
    Разбирает и валидирует файл правила

    Args:
        document: Текст JSON-документа правила
        name: Имя для отчетов

    Raises:
        SchemaError, FieldError, DimensionError, OverlapError
    """
    from .parsers import load_document

    rule = load_document(document, name=name)
    if not isinstance(rule, SubstitutionRule):
        raise SchemaError("Ожидалось правило тайлинга, а не подстановка на словах", {"kind": "word"})
    return rule


# === ITERATION ===

def substitute(patch: Patch, rule: SubstitutionRule, check: bool = True) -> Patch:
    """
    Применяет ω к патчу: ω(P) = ⋃ ω(T), ω(P_i + x) = ω(P_i) + φ(x)

    Args:
        patch: Патч из сдвигов прототайлов правила
        rule: Правило
        check: Проверять непересечение результата

    Raises:
        OverlapError: Псевдоподстановка не итерируема на этом патче
    """
    tiles: List[PlacedTile] = []
    for t in patch.tiles:
        offset = mat_vec(rule.phi, t.shift)
        tiles.extend(child.translate(offset) for child in rule.images[t.proto])
    return patch_build(tiles, rule.prototiles, check=check)


def substitute_power(patch: Patch, rule: SubstitutionRule, n: int, check: bool = True) -> Patch:
    for _ in range(n):
        patch = substitute(patch, rule, check=check)
    return patch


def incidence_matrix(rule: SubstitutionRule) -> np.ndarray:
    """M[q][p] - число плиток типа q в ω(P_p)."""
    m = np.zeros((rule.size, rule.size), dtype=np.int64)
    for p, children in enumerate(rule.images):
        for child in children:
            m[child.proto, p] += 1
    return m


@dataclass(frozen=True)
class PrimitivityReport:
    primitive: bool
    exponent: Optional[int]
    matrix: Tuple[Tuple[int, ...], ...]

    def to_dict(self) -> Dict[str, Any]:
        return {"primitive": self.primitive, "exponent": self.exponent, "matrix": [list(r) for r in self.matrix]}


def primitive_exponent(m: np.ndarray) -> Optional[int]:
    """Наименьшее K ≤ (k-1)² + 1 с M^K > 0 поэлементно, иначе None."""
    k = m.shape[0]
    support = (m > 0).astype(np.int64)
    power = support.copy()
    for exponent in range(1, (k - 1) ** 2 + 2):
        if np.all(power > 0):
            return exponent
        power = ((power @ support) > 0).astype(np.int64)
    return None


def primitivity_check(rule: SubstitutionRule) -> PrimitivityReport:
    m = incidence_matrix(rule)
    exponent = primitive_exponent(m)
    return PrimitivityReport(exponent is not None, exponent, tuple(tuple(int(v) for v in row) for row in m))


# === SEEDS ===

@dataclass(frozen=True)
class Seed:
    """Затравка P + x ∈ ω^n(P + x)."""

    proto: int
    x: Vec
    n: int

    def to_dict(self) -> Dict[str, Any]:
        return {"proto": self.proto, "x": self.x.to_strings(), "n": self.n}


def _check_cap(rule: SubstitutionRule, counts: np.ndarray, steps: int, cap: int) -> None:
    m = incidence_matrix(rule).astype(object)
    v = counts.astype(object)
    for _ in range(steps):
        v = m.dot(v)
    total = int(sum(v))
    if total > cap:
        raise ResourceLimit(
            f"Аппроксимант превысит лимит плиток: {total} > {cap}",
            {"predicted_tiles": total, "cap": cap},
        )


def find_seed(rule: SubstitutionRule, max_n: int, expanding: bool = False, tile_cap: Optional[int] = None) -> Seed:
    """
    Ищет затравку неподвижной точки

    Порядок перебора: n = 1..max_n, затем номер прототайла, затем плитки ω^n(P)
    в порядке точного ключа. Для плитки P + y ∈ ω^n(P) того же типа решается
    x = (I - φ^n)^{-1} y и проверяется P + x ∈ ω^n(P + x).

    Args:
        rule: Правило
        max_n: Наибольший период
        expanding: Требовать, чтобы начало координат лежало внутри P̄ + x
            (тогда носители φ^{nm}(P̄ + x) исчерпывают плоскость)
        tile_cap: Лимит плиток

    Raises:
        NoSeedFound: Затравка не найдена до max_n
    """
    cap = tile_cap or config.TILE_CAP
    eye = identity(rule.field, rule.dim)
    images: Dict[int, Patch] = {p: rule.single(p) for p in range(rule.size)}
    for n in range(1, max_n + 1):
        phin = mat_pow(rule.phi, n)
        for p in range(rule.size):
            counts = np.zeros(rule.size, dtype=np.int64)
            for t in images[p].tiles:
                counts[t.proto] += 1
            _check_cap(rule, counts, 1, cap)
            images[p] = substitute(images[p], rule, check=rule.kind == "pseudo")
        try:
            solver = mat_inv(mat_sub(eye, phin))
        except DivisionByZero:
            logger.warning(f"⚠️ I - φ^{n} вырождена, пропускаем n={n}")
            continue
        for p in range(rule.size):
            for child in images[p].sorted_tiles():
                if child.proto != p:
                    continue
                x = mat_vec(solver, child.shift)
                if expanding and not rule.prototiles[p].interior_contains(-x):
                    continue
                grown = images[p].translate(mat_vec(phin, x))
                if PlacedTile(p, x) in grown:
                    logger.info(f"🌱 Затравка найдена: proto={rule.proto_names[p]}, n={n}")
                    return Seed(p, x, n)
    raise NoSeedFound(f"Затравка не найдена до n={max_n}", {"max_n": max_n, "expanding": expanding})


# === APPROXIMANTS ===

@dataclass(frozen=True)
class Approximant:
    """
    ω^{nm}(P + x) вместе с радиусом покрытия

    Attributes:
        coverage_radius2: Наибольшее r² с B(center, r) ⊂ supp патча
        center: Неподвижная точка растяжения (начало координат)
    """

    rule: SubstitutionRule
    seed: Seed
    level: int
    patch: Patch
    coverage_radius2: FieldElement
    center: Vec

    def evidence(self) -> Dict[str, Any]:
        return {
            "level": self.level,
            "seed": self.seed.to_dict(),
            "tiles": len(self.patch),
            "coverage_radius2": self.coverage_radius2.to_strings(),
        }


def coverage_radius2(patch: Patch, center: Vec) -> FieldElement:
    dist2 = boundary_distance2(patch.polygons(), center)
    if dist2 is None:
        return center[0].field.zero()
    return dist2


class ApproximantBuilder:
    """
    Инкрементальное построение уровней ω^{nm}(P + x)

    Уровни кэшируются; уровень m + 1 строится из уровня m.
    """

    def __init__(self, rule: SubstitutionRule, seed: Seed, tile_cap: Optional[int] = None):
        self.rule = rule
        self.seed = seed
        self.tile_cap = tile_cap or config.TILE_CAP
        self.center = vec_zero(rule.field, rule.dim)
        self._levels: Dict[int, Patch] = {0: rule.single(seed.proto, seed.x)}
        self._approx: Dict[int, Approximant] = {}

    def patch(self, m: int) -> Patch:
        top = max(self._levels)
        while top < m:
            current = self._levels[top]
            counts = np.zeros(self.rule.size, dtype=np.int64)
            for t in current.tiles:
                counts[t.proto] += 1
            _check_cap(self.rule, counts, self.seed.n, self.tile_cap)
            self._levels[top + 1] = substitute_power(
                current, self.rule, self.seed.n, check=self.rule.kind == "pseudo"
            )
            top += 1
            rss = psutil.Process().memory_info().rss / 1024 / 1024
            logger.info(f"📈 Уровень {top}: {len(self._levels[top])} плиток, RSS {rss:.1f} MB")
        return self._levels[m]

    def approximant(self, m: int) -> Approximant:
        if m not in self._approx:
            patch = self.patch(m)
            self._approx[m] = Approximant(
                self.rule, self.seed, m, patch, coverage_radius2(patch, self.center), self.center
            )
        return self._approx[m]


def grow(rule: SubstitutionRule, seed: Seed, m: int, tile_cap: Optional[int] = None) -> Approximant:
    """
    Строит аппроксимант уровня m

    Raises:
        OverlapError: Псевдоподстановка перестала быть итерируемой
        ResourceLimit: Число плиток превысит лимит
    """
    if m < 1:
        raise SchemaError("Уровень аппроксиманта должен быть ≥ 1", {"level": m})
    return ApproximantBuilder(rule, seed, tile_cap).approximant(m)


@dataclass(frozen=True)
class ExpandingReport:
    radii2: Tuple[FieldElement, ...]
    strictly_increasing: bool
    levels: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "levels": self.levels,
            "radii2": [r.to_strings() for r in self.radii2],
            "strictly_increasing": self.strictly_increasing,
            "evidence": "not-expanding-evidence" if not self.strictly_increasing else "expanding-evidence",
        }


def expanding_check(rule: SubstitutionRule, seed: Seed, levels: int, tile_cap: Optional[int] = None) -> ExpandingReport:
    """
    Радиусы покрытия r_m² для m = 1..levels

    r_m² считается точно как квадрат расстояния от центра до границы носителя,
    то есть это наибольшее r² с contains_ball.
    """
    builder = ApproximantBuilder(rule, seed, tile_cap)
    radii = tuple(builder.approximant(m).coverage_radius2 for m in range(1, levels + 1))
    increasing = all((b - a).sign() > 0 for a, b in zip(radii, radii[1:]))
    return ExpandingReport(radii, increasing, levels)


@dataclass(frozen=True)
class FlcProbe:
    r2: FieldElement
    counts: Tuple[int, ...]
    stabilized_at: Optional[int]

    def to_dict(self) -> Dict[str, Any]:
        return {"R2": self.r2.to_strings(), "counts": list(self.counts), "stabilized_at": self.stabilized_at}


def rule_flc_probe(rule: SubstitutionRule, r2_list: Sequence[FieldElement], depth: int) -> List[FlcProbe]:
    """
    Число классов окон ω^n(P) ⊓ B(x, R) для n ≤ depth

    Окна центрируются в опорных точках плиток. Накопленное число классов
    по n = 1..depth; стабилизация - первый n, на котором число повторилось.
    """
    levels: Dict[int, List[Patch]] = {}
    current = [rule.single(p) for p in range(rule.size)]
    for n in range(1, depth + 1):
        current = [substitute(patch, rule, check=rule.kind == "pseudo") for patch in current]
        levels[n] = current
    reports = []
    for r2 in r2_list:
        seen: set = set()
        counts: List[int] = []
        for n in range(1, depth + 1):
            for patch in levels[n]:
                for t in patch.tiles:
                    seen.add(canonicalize(restrict(patch, t.shift, r2, "sqcap")))
            counts.append(len(seen))
        stabilized = next((n + 1 for n in range(1, len(counts)) if counts[n] == counts[n - 1]), None)
        reports.append(FlcProbe(r2, tuple(counts), stabilized))
        logger.info(f"🔍 FLC R²={r2}: {counts}")
    return reports


# === SUPPORT BOUND ===

def support_bound(rule: SubstitutionRule) -> FieldElement:
    """L² из оценки supp ω(P) ⊂ φ(P̄) + B(0, L), посчитанное при разборе."""
    return rule.support_bound2


def phi_norm_upper(rule: SubstitutionRule) -> Fraction:
    """Рациональная верхняя оценка ‖φ‖ через норму Фробениуса."""
    total = Fraction(0)
    for row in rule.phi:
        for x in row:
            total += embed(x * x, 40)[1]
    return rational_sqrt_upper(total)


def support_bound_check(rule: SubstitutionRule, n: int) -> Dict[str, Any]:
    """
    Проверяет supp ω^n(P) ⊂ φ^n(P̄) + B(0, Σ_{k<n} ‖φ‖^k L) для всех прототайлов

    Returns:
        Словарь с оценкой и флагом holds
    """
    norm = phi_norm_upper(rule)
    length = rational_sqrt_upper(embed(rule.support_bound2, 40)[1])
    bound = sum((norm ** k for k in range(n)), Fraction(0)) * length
    phin = mat_pow(rule.phi, n)
    worst = rule.field.zero()
    for p in range(rule.size):
        target = rule.prototiles[p].linear_image(phin)
        image = substitute_power(rule.single(p), rule, n, check=False)
        for t in image.tiles:
            for v in image.polygon(t).vertices:
                d2 = target.dist2_to_point(v)
                if (d2 - worst).sign() > 0:
                    worst = d2
    holds = (worst - bound * bound).sign() <= 0
    return {
        "n": n,
        "phi_norm_upper": str(norm),
        "L_upper": str(length),
        "bound": str(bound),
        "max_excess2": worst.to_strings(),
        "holds": holds,
    }
