"""
Языки патчей и отношения между вхождениями

Все запросы идут по аппроксиманту ω^{nm}(P + x) с центром покрытия в
неподвижной точке растяжения. Окно B(c, R) считается полным, только если оно
лежит в шаре покрытия с запасом в два раза; положительные ответы точные,
отрицательные - свидетельства с указанием уровня и окна.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Literal, Optional, Sequence, Tuple, Union

from .errors import EmptyPatch, InsufficientCoverage
from .exactnum import FieldElement, Vec, embed, rational_sqrt_upper, vec_zero
from .subst import Approximant, ApproximantBuilder
from .tiling import CanonicalPatch, Patch, PlacedTile, canonicalize, patch_build, restrict


logger = logging.getLogger(__name__)

PatchLike = Union[CanonicalPatch, Patch]


def sqrt_upper(x: FieldElement) -> Fraction:
    """Рациональная верхняя оценка √x для x ≥ 0."""
    return rational_sqrt_upper(embed(x, 48)[1])


def _as_patch(p: PatchLike) -> Patch:
    return p.patch if isinstance(p, CanonicalPatch) else p


def _anchor(patch: Patch) -> PlacedTile:
    if not patch.tiles:
        raise EmptyPatch("Пустой патч не имеет вхождений")
    canon = canonicalize(patch)
    return canon.anchor.translate(canon.anchor_shift)


def patch_radius(patch: Patch, anchor: PlacedTile) -> Fraction:
    """Верхняя оценка расстояния от опорной точки якоря до вершин патча."""
    best = Fraction(0)
    for t in patch.tiles:
        for v in patch.polygon(t).vertices:
            best = max(best, sqrt_upper((v - anchor.shift).norm2()))
    return best


def require_cover(approx: Approximant, radius: Fraction, what: str) -> None:
    """
    Проверяет B(center, radius) ⊂ шара покрытия

    Raises:
        InsufficientCoverage: Аппроксимант слишком мал
    """
    if (approx.coverage_radius2 - radius * radius).sign() < 0:
        raise InsufficientCoverage(
            f"Покрытия уровня {approx.level} не хватает для {what}",
            {
                "level": approx.level,
                "coverage_radius2": approx.coverage_radius2.to_strings(),
                "required_radius": str(radius),
            },
        )


# === LANGUAGE ===

@dataclass(frozen=True)
class LanguageAtRadius:
    """
    Π_{T,R,A} по окнам аппроксиманта

    Attributes:
        r2: R²
        entries: Классы окон с точностью до сдвига в детерминированном порядке
        level: Уровень аппроксиманта
        stabilized: Совпадает ли множество с уровнем level - 1
        windows: Окна (T - c) ∩ B(0, R), сдвинутые так, что центральная плитка в нуле
    """

    r2: FieldElement
    entries: Tuple[CanonicalPatch, ...]
    level: int
    stabilized: bool
    windows: Tuple[Patch, ...] = field(default=(), compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.entries)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "R2": self.r2.to_strings(),
            "level": self.level,
            "count": len(self.entries),
            "stabilized": self.stabilized,
            "entries": [[[t.proto, t.shift.to_strings()] for t in e.patch.sorted_tiles()] for e in self.entries],
        }


def window_anchors(approx: Approximant, r2: FieldElement) -> List[PlacedTile]:
    """
    Плитки, чьи окна B(shift, R) полные

    Условие 4‖c - x‖² ≤ r² и 4R² < r² (запас в два раза).
    """
    cover2 = approx.coverage_radius2
    if (r2 * 4 - cover2).sign() >= 0:
        raise InsufficientCoverage(
            f"Нужно r² > 4R² на уровне {approx.level}",
            {"level": approx.level, "R2": r2.to_strings(), "coverage_radius2": cover2.to_strings()},
        )
    radius = sqrt_upper(cover2) / 2
    candidates = approx.patch.index.near(approx.center.approx(), float(radius))
    keep = [t for t in candidates if ((t.shift - approx.center).norm2() * 4 - cover2).sign() <= 0]
    return sorted(keep, key=PlacedTile.key)


def _windows(approx: Approximant, r2: FieldElement) -> FrozenSet[Patch]:
    found = set()
    for t in window_anchors(approx, r2):
        window = restrict(approx.patch, t.shift, r2, "cap")
        if window.tiles:
            found.add(window.translate(-t.shift))
    return frozenset(found)


def _classes(windows: Iterable[Patch]) -> FrozenSet[CanonicalPatch]:
    return frozenset(canonicalize(w) for w in windows)


def language_at(approx: Approximant, r2: FieldElement, previous: Optional[Approximant] = None) -> LanguageAtRadius:
    """
    Язык радиуса R по полным окнам аппроксиманта

    Args:
        approx: Аппроксимант
        r2: R²
        previous: Аппроксимант уровня на единицу меньше для флага стабилизации

    Raises:
        InsufficientCoverage: r² ≤ 4R²
    """
    windows = _windows(approx, r2)
    entries = _classes(windows)
    stabilized = False
    if previous is not None:
        try:
            stabilized = _classes(_windows(previous, r2)) == entries
        except InsufficientCoverage:
            stabilized = False
    ordered = tuple(sorted(entries, key=CanonicalPatch.key))
    logger.info(f"📚 Язык R²={r2}: {len(ordered)} окон на уровне {approx.level}")
    centered = tuple(sorted(windows, key=lambda w: tuple(t.key() for t in w.sorted_tiles())))
    return LanguageAtRadius(r2, ordered, approx.level, stabilized, centered)


# === OCCURRENCES ===

def _window_center(approx: Approximant, center: Optional[Vec]) -> Vec:
    return approx.center if center is None else center


def occurrences(
    approx: Approximant,
    p: PatchLike,
    window2: FieldElement,
    center: Optional[Vec] = None,
) -> FrozenSet[Vec]:
    """
    Сдвиги t с p + t ⊆ аппроксиманта и ‖t - c‖² < window²

    Сдвиг t переводит якорную плитку p в плитку аппроксиманта.

    Raises:
        InsufficientCoverage: Окно вместе с радиусом патча выходит за покрытие
    """
    patch = _as_patch(p)
    anchor = _anchor(patch)
    c = _window_center(approx, center)
    reach = (
        sqrt_upper((c - approx.center).norm2())
        + sqrt_upper(window2)
        + sqrt_upper(anchor.shift.norm2())
        + patch_radius(patch, anchor)
    )
    require_cover(approx, reach, "окна вхождений")
    others = [q for q in patch.sorted_tiles() if q != anchor]
    found = set()
    for s in approx.patch.index.near((c + anchor.shift).approx(), float(sqrt_upper(window2))):
        if s.proto != anchor.proto:
            continue
        t = s.shift - anchor.shift
        if ((t - c).norm2() - window2).sign() >= 0:
            continue
        if all(q.translate(t) in approx.patch.tiles for q in others):
            found.add(t)
    return frozenset(found)


@dataclass(frozen=True)
class DisplacementSet:
    """
    D(p1, p2) - взаимные положения совместных вхождений

    Attributes:
        shifts: Разности t₂ - t₁ с ‖t₂ - t₁‖² < window²
        witnesses: Для каждого сдвига первая пара (t₁, t₂) в точном порядке
    """

    p1: CanonicalPatch
    p2: CanonicalPatch
    window2: FieldElement
    level: int
    shifts: FrozenSet[Vec]
    witnesses: Dict[Vec, Tuple[Vec, Vec]] = field(compare=False, hash=False, repr=False)

    def sorted_shifts(self) -> List[Vec]:
        return sorted(self.shifts, key=Vec.key)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "window2": self.window2.to_strings(),
            "level": self.level,
            "count": len(self.shifts),
            "shifts": [v.to_strings() for v in self.sorted_shifts()],
        }

    def to_rows(self) -> List[List[str]]:
        return [[" ".join(c) for c in v.to_strings()] for v in self.sorted_shifts()]


def displacement_set(
    approx: Approximant,
    p1: PatchLike,
    p2: PatchLike,
    window2: FieldElement,
    verify: bool = False,
) -> DisplacementSet:
    """
    Множество разностей t₂ - t₁ вхождений p1 и p2 в одном окне

    Args:
        approx: Аппроксимант
        p1, p2: Патчи
        window2: Квадрат радиуса окна (и ограничение на ‖t₂ - t₁‖²)
        verify: Пересобирать объединение p1 + t₁ ∪ p2 + t₂ с проверкой пересечений

    Raises:
        InsufficientCoverage
    """
    c1 = p1 if isinstance(p1, CanonicalPatch) else canonicalize(p1)
    c2 = p2 if isinstance(p2, CanonicalPatch) else canonicalize(p2)
    occ1 = sorted(occurrences(approx, c1, window2), key=Vec.key)
    occ2 = sorted(occurrences(approx, c2, window2), key=Vec.key)
    radius = float(sqrt_upper(window2))
    witnesses: Dict[Vec, Tuple[Vec, Vec]] = {}
    for t1 in occ1:
        f1 = t1.approx()
        for t2 in occ2:
            f2 = t2.approx()
            if sum((a - b) ** 2 for a, b in zip(f1, f2)) > radius * radius * (1 + 1e-9) + 1e-9:
                continue
            d = t2 - t1
            if d in witnesses or (d.norm2() - window2).sign() >= 0:
                continue
            witnesses[d] = (t1, t2)
    if verify:
        for d, (t1, t2) in witnesses.items():
            combined = set(c1.patch.translate(t1).tiles) | set(c2.patch.translate(t2).tiles)
            patch_build(sorted(combined, key=PlacedTile.key), approx.patch.prototiles)
    logger.info(f"↔️ Смещения: {len(witnesses)} на уровне {approx.level}")
    return DisplacementSet(c1, c2, window2, approx.level, frozenset(witnesses), witnesses)


# === LEGALITY ===

LegalStatus = Literal["legal", "not-found"]


@dataclass(frozen=True)
class LegalityVerdict:
    """
    Attributes:
        status: legal - найден сдвиг; not-found - не найден до уровня level
        witness: Сдвиг t с p + t ⊆ аппроксиманта
        searched_window2: Квадрат радиуса покрытия последнего просмотренного уровня
    """

    status: LegalStatus
    level: int
    witness: Optional[Vec]
    searched_window2: FieldElement

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status,
            "level": self.level,
            "witness": self.witness.to_strings() if self.witness is not None else None,
            "searched_window2": self.searched_window2.to_strings(),
        }


def find_translate(patch: Patch, target: Patch) -> Optional[Vec]:
    """Первый в точном порядке сдвиг t с patch + t ⊆ target."""
    anchor = _anchor(patch)
    others = [q for q in patch.sorted_tiles() if q != anchor]
    for s in target.sorted_tiles():
        if s.proto != anchor.proto:
            continue
        t = s.shift - anchor.shift
        if all(q.translate(t) in target.tiles for q in others):
            return t
    return None


def is_legal(
    builder: ApproximantBuilder,
    p: Union[PatchLike, Sequence[PlacedTile]],
    max_level: int,
) -> LegalityVerdict:
    """
    Ищет сдвиг p в аппроксимантах уровней 1..max_level

    Raises:
        OverlapError: p не является патчем
        ResourceLimit: Аппроксимант превысил лимит плиток
    """
    if isinstance(p, CanonicalPatch):
        p = p.patch
    elif not isinstance(p, Patch):
        p = patch_build(list(p), builder.rule.prototiles)
    approx = None
    for m in range(1, max_level + 1):
        approx = builder.approximant(m)
        witness = find_translate(p, approx.patch)
        if witness is not None:
            return LegalityVerdict("legal", m, witness, approx.coverage_radius2)
    searched = approx.coverage_radius2 if approx is not None else builder.rule.field.zero()
    return LegalityVerdict("not-found", max_level, None, searched)


# === RETURN VECTORS AND PERIODS ===

def return_vectors(approx: Approximant, max_norm2: FieldElement) -> FrozenSet[Vec]:
    """
    Векторы z ≠ 0, ‖z‖² < max_norm², с плитками t и t + z одного типа

    Пары ищутся среди плиток внутреннего полукруга покрытия.

    Raises:
        InsufficientCoverage: max_norm² ≥ r²/4
    """
    anchors = window_anchors(approx, max_norm2)
    radius = float(sqrt_upper(max_norm2))
    found = set()
    for s in anchors:
        for t in approx.patch.index.near(s.shift.approx(), radius):
            if t.proto != s.proto or t == s:
                continue
            z = t.shift - s.shift
            if z in found:
                continue
            if (z.norm2() - max_norm2).sign() < 0:
                found.add(z)
    logger.info(f"🔁 Векторы возврата: {len(found)} с ‖z‖² < {max_norm2}")
    return frozenset(found)


def period_probe(approx: Approximant, z: Vec, window2: FieldElement) -> bool:
    """
    Совпадают ли (P ∩ B(x, R)) + z и P ∩ B(x + z, R)

    Raises:
        InsufficientCoverage: Окна выходят за покрытие
    """
    require_cover(approx, sqrt_upper(z.norm2()) + sqrt_upper(window2), "проверки периода")
    here = restrict(approx.patch, approx.center, window2, "cap")
    there = restrict(approx.patch, approx.center + z, window2, "cap")
    return here.translate(z).tiles == there.tiles


@dataclass(frozen=True)
class RepetitivityReport:
    """Наибольший пустой от вхождений шар вокруг опорных точек окна."""

    window2: FieldElement
    occurrences: int
    probes: int
    max_gap2: Optional[FieldElement]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "window2": self.window2.to_strings(),
            "occurrences": self.occurrences,
            "probes": self.probes,
            "max_gap2": self.max_gap2.to_strings() if self.max_gap2 is not None else None,
            "evidence": "observed",
        }


def _nearest2(point: Vec, points: Sequence[Vec], approx_points: Sequence[Tuple[float, ...]]) -> FieldElement:
    fp = point.approx()
    dists = [sum((a - b) ** 2 for a, b in zip(fp, q)) for q in approx_points]
    best = min(dists)
    slack = best * 1e-6 + 1e-9
    close = [points[i] for i, d in enumerate(dists) if d <= best + slack]
    result = None
    for q in close:
        d2 = (q - point).norm2()
        if result is None or (d2 - result).sign() < 0:
            result = d2
    return result


def repetitivity_gaps(approx: Approximant, p: PatchLike, window2: FieldElement) -> RepetitivityReport:
    """
    Оценка относительной плотности вхождений p

    Пробные точки - опорные точки плиток в B(x, W/2); для каждой берется
    квадрат расстояния до ближайшего вхождения в B(x, W).
    """
    occ = sorted(occurrences(approx, p, window2), key=Vec.key)
    probes = [
        t.shift
        for t in approx.patch.sorted_tiles()
        if ((t.shift - approx.center).norm2() * 4 - window2).sign() < 0
    ]
    if not occ:
        return RepetitivityReport(window2, 0, len(probes), None)
    approx_occ = [t.approx() for t in occ]
    worst: Optional[FieldElement] = None
    for q in probes:
        d2 = _nearest2(q, occ, approx_occ)
        if worst is None or (d2 - worst).sign() > 0:
            worst = d2
    return RepetitivityReport(window2, len(occ), len(probes), worst)


def language_restriction(language: LanguageAtRadius, r2: FieldElement) -> FrozenSet[CanonicalPatch]:
    """Классы окон радиуса R′ < R, полученные ограничением центрированных окон радиуса R."""
    result = set()
    for w in language.windows:
        window = restrict(w, vec_zero(language.r2.field, len(next(iter(w.tiles)).shift)), r2, "cap")
        if window.tiles:
            result.add(canonicalize(window))
    return frozenset(result)
