"""
Плитки, патчи и канонические формы

PlacedTile - номер прототайла и точный сдвиг. Patch - конечное множество
плиток с попарно непересекающимися внутренностями. CanonicalPatch -
представитель класса патчей с точностью до сдвига (якорная плитка в нуле).
"""
from __future__ import annotations

import csv
import io
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property, cmp_to_key, lru_cache
from typing import Dict, FrozenSet, Iterable, Iterator, List, Literal, Optional, Sequence, Tuple

from .errors import EmptyPatch, OverlapError
from .exactnum import FieldElement, Vec, lex_compare
from .geometry import Polygon, ball_relation, find_overlap


logger = logging.getLogger(__name__)

RestrictMode = Literal["cap", "sqcap"]


@dataclass(frozen=True)
class PlacedTile:
    """Прототайл proto, сдвинутый на shift."""

    proto: int
    shift: Vec

    def translate(self, v: Vec) -> PlacedTile:
        return PlacedTile(self.proto, self.shift + v)

    def key(self) -> Tuple:
        return (self.proto, self.shift.key())


@lru_cache(maxsize=200_000)
def realize(proto_polygon: Polygon, shift: Vec) -> Polygon:
    return proto_polygon.translate(shift)


def _tile_compare(s: PlacedTile, t: PlacedTile) -> int:
    if s.proto != t.proto:
        return -1 if s.proto < t.proto else 1
    return lex_compare(s.shift, t.shift)


class TileIndex:
    """
    Сеточный индекс плиток по float-приближениям сдвигов

    Используется только для отбора кандидатов; все решения точные.
    """

    def __init__(self, tiles: Iterable[PlacedTile], reach: float):
        self.reach = max(reach, 1e-9)
        self.cell = self.reach
        self.cells: Dict[Tuple[int, ...], List[PlacedTile]] = defaultdict(list)
        self.approx: Dict[PlacedTile, Tuple[float, ...]] = {}
        for t in tiles:
            point = t.shift.approx()
            self.approx[t] = point
            self.cells[self._cell_of(point)].append(t)

    def _cell_of(self, point: Sequence[float]) -> Tuple[int, ...]:
        return tuple(math.floor(x / self.cell) for x in point)

    def near(self, center: Sequence[float], radius: float) -> List[PlacedTile]:
        """Плитки, чьи сдвиги могут лежать ближе radius + reach к центру."""
        r = radius + self.reach
        r = r * (1 + 1e-9) + 1e-9
        lo = self._cell_of([c - r for c in center])
        hi = self._cell_of([c + r for c in center])
        found: List[PlacedTile] = []
        if len(center) == 1:
            for i in range(lo[0], hi[0] + 1):
                found.extend(self.cells.get((i,), ()))
        else:
            for i in range(lo[0], hi[0] + 1):
                for j in range(lo[1], hi[1] + 1):
                    found.extend(self.cells.get((i, j), ()))
        r2 = r * r
        return [t for t in found if sum((a - b) ** 2 for a, b in zip(self.approx[t], center)) <= r2]


@dataclass(frozen=True)
class Patch:
    """
    Конечный патч

    Attributes:
        tiles: Множество размещенных плиток
        prototiles: Таблица прототайлов правила (в сравнении не участвует)
    """

    tiles: FrozenSet[PlacedTile]
    prototiles: Tuple[Polygon, ...] = field(compare=False, hash=False, repr=False)

    def __len__(self) -> int:
        return len(self.tiles)

    def __iter__(self) -> Iterator[PlacedTile]:
        return iter(self.tiles)

    def __contains__(self, tile: PlacedTile) -> bool:
        return tile in self.tiles

    def polygon(self, tile: PlacedTile) -> Polygon:
        return realize(self.prototiles[tile.proto], tile.shift)

    def polygons(self) -> List[Polygon]:
        return [self.polygon(t) for t in self.sorted_tiles()]

    def sorted_tiles(self) -> List[PlacedTile]:
        """Детерминированный порядок по точному ключу."""
        return sorted(self.tiles, key=PlacedTile.key)

    def translate(self, v: Vec) -> Patch:
        return Patch(frozenset(t.translate(v) for t in self.tiles), self.prototiles)

    def issubset(self, other: Patch) -> bool:
        return self.tiles <= other.tiles

    def union(self, other: Patch) -> Patch:
        return Patch(self.tiles | other.tiles, self.prototiles)

    @cached_property
    def reach(self) -> float:
        """Максимальная float-норма вершины прототайла."""
        return max(
            (math.sqrt(sum(x * x for x in v)) for p in self.prototiles for v in p.float_vertices),
            default=0.0,
        )

    @cached_property
    def index(self) -> TileIndex:
        return TileIndex(self.tiles, self.reach)


def patch_build(tiles: Sequence[PlacedTile], prototiles: Sequence[Polygon], check: bool = True) -> Patch:
    """
    Собирает патч с проверкой непересечения

    Args:
        tiles: Плитки в любом порядке
        prototiles: Таблица прототайлов
        check: Проверять попарное непересечение внутренностей

    Raises:
        OverlapError: Первая пересекающаяся пара (или повтор плитки)
    """
    protos = tuple(prototiles)
    tile_set = frozenset(tiles)
    if len(tile_set) != len(tiles):
        seen = set()
        for t in tiles:
            if t in seen:
                raise OverlapError("Повторяющаяся плитка в патче", {"tile": tile_to_dict(t)})
            seen.add(t)
    patch = Patch(tile_set, protos)
    if check and len(tile_set) > 1:
        ordered = patch.sorted_tiles()
        pair = find_overlap([patch.polygon(t) for t in ordered])
        if pair is not None:
            a, b = ordered[pair[0]], ordered[pair[1]]
            raise OverlapError(
                "Внутренности плиток пересекаются",
                {"first": tile_to_dict(a), "second": tile_to_dict(b)},
            )
    return patch


def restrict(patch: Patch, center: Vec, r2: FieldElement, mode: RestrictMode = "cap") -> Patch:
    """
    Ограничение патча на шар: P∩B (mode=cap) или P⊓B (mode=sqcap)

    Args:
        patch: Патч
        center: Центр шара
        r2: Квадрат радиуса
        mode: cap - плитки внутри открытого шара, sqcap - замыкание касается шара
    """
    if not patch.tiles:
        return patch
    radius = math.sqrt(max(r2.approx(), 0.0))
    candidates = patch.index.near(center.approx(), radius)
    keep = []
    for t in candidates:
        rel = ball_relation(patch.polygon(t), center, r2)
        if rel == "inside" or (mode == "sqcap" and rel == "touches"):
            keep.append(t)
    return Patch(frozenset(keep), patch.prototiles)


@dataclass(frozen=True)
class CanonicalPatch:
    """
    Патч, сдвинутый так, что якорная плитка стоит в нуле

    Attributes:
        patch: Канонический представитель
        anchor_shift: Снятый сдвиг якорной плитки
    """

    patch: Patch
    anchor_shift: Vec = field(compare=False, hash=False)

    @cached_property
    def anchor(self) -> PlacedTile:
        return min(self.patch.tiles, key=cmp_to_key(_tile_compare))

    def key(self) -> Tuple:
        return tuple(sorted(t.key() for t in self.patch.tiles))

    def __len__(self) -> int:
        return len(self.patch)


def canonicalize(patch: Patch) -> CanonicalPatch:
    """
    Каноническая форма класса сдвигов

    Якорь - плитка с наименьшим номером прототайла, среди них -
    лексикографически наименьшая по вещественным координатам сдвига.

    Raises:
        EmptyPatch: Патч пуст
    """
    if not patch.tiles:
        raise EmptyPatch("Нельзя канонизировать пустой патч")
    anchor = min(patch.tiles, key=cmp_to_key(_tile_compare))
    return CanonicalPatch(patch.translate(-anchor.shift), anchor.shift)


# === SERIALIZATION ===

def tile_to_dict(tile: PlacedTile) -> Dict:
    return {"proto": tile.proto, "shift": tile.shift.to_strings()}


def patch_to_rows(patch: Patch) -> List[List[str]]:
    """Строки CSV: proto_index и координаты сдвига (коэффициенты через пробел)."""
    return [[str(t.proto)] + [" ".join(c) for c in t.shift.to_strings()] for t in patch.sorted_tiles()]


def patch_to_csv(patch: Patch) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    dim = len(next(iter(patch.tiles)).shift) if patch.tiles else 0
    writer.writerow(["proto_index"] + [f"shift_{k}" for k in range(dim)])
    writer.writerows(patch_to_rows(patch))
    return buffer.getvalue()
