"""
Точные предикаты для многоугольников над полем

- interiors_overlap - пересечение открытых внутренностей
- ball_relation - положение плитки относительно шара (для ∩ и ⊓)
- contains_ball - лежит ли шар в объединении носителей патча

d = 1 поддерживается как частный случай: многоугольник - отрезок [lo, hi].
Все решения на границе принимаются точно через sign(); быстрые проверки
на float используются только как фильтр с запасом.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, cmp_to_key
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

from .errors import FieldError, InvalidUnion
from .exactnum import FieldElement, Matrix, Vec, mat_det, mat_vec


logger = logging.getLogger(__name__)

BallRelation = Literal["inside", "touches", "outside"]

# относительный запас float-фильтра
_FILTER_EPS = 1e-9


def cross(u: Vec, v: Vec) -> FieldElement:
    return u[0] * v[1] - u[1] * v[0]


def orient(a: Vec, b: Vec, c: Vec) -> int:
    """Знак ориентации тройки точек: 1 - против часовой, -1 - по часовой, 0 - коллинеарны."""
    return cross(b - a, c - a).sign()


def _cmp(a: FieldElement, b: FieldElement) -> int:
    return (a - b).sign()


def point_segment_dist2(c: Vec, a: Vec, b: Vec) -> FieldElement:
    """Квадрат расстояния от точки c до отрезка [a, b]."""
    ab = b - a
    length2 = ab.norm2()
    if length2.is_zero():
        return (c - a).norm2()
    t = (c - a).dot(ab)
    if t.sign() <= 0:
        return (c - a).norm2()
    if (t - length2).sign() >= 0:
        return (c - b).norm2()
    foot = a + ab.scale(t / length2)
    return (c - foot).norm2()


def on_segment(p: Vec, a: Vec, b: Vec) -> bool:
    if len(p) == 1:
        lo, hi = (a[0], b[0]) if a[0] <= b[0] else (b[0], a[0])
        return lo <= p[0] <= hi
    if orient(a, b, p) != 0:
        return False
    return (p - a).dot(p - b).sign() <= 0


def segments_intersect(a: Vec, b: Vec, c: Vec, d: Vec) -> bool:
    """Пересекаются ли замкнутые отрезки [a,b] и [c,d]."""
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return (
        (o1 == 0 and on_segment(c, a, b))
        or (o2 == 0 and on_segment(d, a, b))
        or (o3 == 0 and on_segment(a, c, d))
        or (o4 == 0 and on_segment(b, c, d))
    )


@dataclass(frozen=True)
class Polygon:
    """
    Открытый многоугольник (d = 2) или интервал (d = 1)

    Attributes:
        vertices: Вершины против часовой стрелки; для d = 1 - (lo, hi)
    """

    vertices: Tuple[Vec, ...]

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    # --- построение ---

    def validate(self) -> None:
        """Проверяет простоту, ориентацию и непустую внутренность."""
        if self.dim == 1:
            if len(self.vertices) != 2 or not self.vertices[0][0] < self.vertices[1][0]:
                raise FieldError("Интервал должен быть задан как lo < hi")
            return
        n = len(self.vertices)
        if n < 3:
            raise FieldError("Многоугольник должен иметь ≥ 3 вершин")
        if self.area().sign() <= 0:
            raise FieldError("Вершины многоугольника должны идти против часовой стрелки")
        edges = self.edges()
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if segments_intersect(*edges[i], *edges[j]):
                    raise FieldError("Многоугольник не простой", {"edges": [i, j]})

    def translate(self, v: Vec) -> Polygon:
        return Polygon(tuple(p + v for p in self.vertices))

    def linear_image(self, m: Matrix) -> Polygon:
        """Образ под линейным отображением; ориентация восстанавливается."""
        mapped = [mat_vec(m, p) for p in self.vertices]
        if mat_det(m).sign() < 0:
            mapped.reverse()
        return Polygon(tuple(mapped))

    # --- мера и ребра ---

    def area(self) -> FieldElement:
        if self.dim == 1:
            return self.vertices[1][0] - self.vertices[0][0]
        total = None
        n = len(self.vertices)
        for i in range(n):
            term = cross(self.vertices[i], self.vertices[(i + 1) % n])
            total = term if total is None else total + term
        return total / 2

    def edges(self) -> List[Tuple[Vec, Vec]]:
        if self.dim == 1:
            return [(self.vertices[0], self.vertices[1])]
        n = len(self.vertices)
        return [(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n)]

    @cached_property
    def float_vertices(self) -> Tuple[Tuple[float, ...], ...]:
        return tuple(v.approx() for v in self.vertices)

    @cached_property
    def float_bbox(self) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
        pts = self.float_vertices
        lo = tuple(min(p[k] for p in pts) for k in range(self.dim))
        hi = tuple(max(p[k] for p in pts) for k in range(self.dim))
        return lo, hi

    @cached_property
    def triangles(self) -> Tuple[Tuple[Vec, Vec, Vec], ...]:
        return tuple(_ear_clip(list(self.vertices)))

    def contains_point(self, p: Vec) -> bool:
        """Принадлежность точки замыканию многоугольника."""
        if self.dim == 1:
            return self.vertices[0][0] <= p[0] <= self.vertices[1][0]
        winding = 0
        for a, b in self.edges():
            if on_segment(p, a, b):
                return True
            if (a[1] - p[1]).sign() <= 0:
                if (b[1] - p[1]).sign() > 0 and orient(a, b, p) > 0:
                    winding += 1
            elif (b[1] - p[1]).sign() <= 0 and orient(a, b, p) < 0:
                winding -= 1
        return winding != 0

    def interior_contains(self, p: Vec) -> bool:
        """Принадлежность точки открытой внутренности."""
        if not self.contains_point(p):
            return False
        if self.dim == 1:
            return self.vertices[0][0] < p[0] < self.vertices[1][0]
        return not any(on_segment(p, a, b) for a, b in self.edges())

    def dist2_to_point(self, c: Vec) -> FieldElement:
        if self.contains_point(c):
            return c[0].field.zero()
        return min((point_segment_dist2(c, a, b) for a, b in self.edges()), key=cmp_to_key(_cmp))


def _ear_clip(vertices: List[Vec]) -> List[Tuple[Vec, Vec, Vec]]:
    """Триангуляция простого многоугольника (против часовой) отсечением ушей."""
    pts = list(vertices)
    triangles: List[Tuple[Vec, Vec, Vec]] = []
    guard = 0
    while len(pts) > 3:
        n = len(pts)
        clipped = False
        for i in range(n):
            a, b, c = pts[i - 1], pts[i], pts[(i + 1) % n]
            turn = orient(a, b, c)
            if turn == 0:
                # вершина на прямой: ее удаление не меняет фигуру
                pts.pop(i)
                clipped = True
                break
            if turn < 0:
                continue
            blocked = False
            for q in pts:
                if q is a or q is b or q is c or q == a or q == b or q == c:
                    continue
                if orient(a, b, q) >= 0 and orient(b, c, q) >= 0 and orient(c, a, q) >= 0:
                    blocked = True
                    break
            if not blocked:
                triangles.append((a, b, c))
                pts.pop(i)
                clipped = True
                break
        guard += 1
        if not clipped or guard > 10_000:
            raise FieldError("Не удалось триангулировать многоугольник")
    if orient(pts[0], pts[1], pts[2]) > 0:
        triangles.append((pts[0], pts[1], pts[2]))
    return triangles


def _bbox_apart(p: Polygon, q: Polygon) -> bool:
    (plo, phi), (qlo, qhi) = p.float_bbox, q.float_bbox
    for k in range(p.dim):
        scale = _FILTER_EPS * (1.0 + abs(plo[k]) + abs(phi[k]) + abs(qlo[k]) + abs(qhi[k]))
        if phi[k] < qlo[k] - scale or qhi[k] < plo[k] - scale:
            return True
    return False


def _convex_interiors_overlap(t1: Sequence[Vec], t2: Sequence[Vec]) -> bool:
    for poly, other in ((t1, t2), (t2, t1)):
        n = len(poly)
        for i in range(n):
            a, b = poly[i], poly[(i + 1) % n]
            if all(orient(a, b, v) <= 0 for v in other):
                return False
    return True


def interiors_overlap(p: Polygon, q: Polygon) -> bool:
    """
    Пересекаются ли открытые внутренности

    Касание по ребру или вершине пересечением не считается.
    """
    if p.dim == 1:
        return p.vertices[0][0] < q.vertices[1][0] and q.vertices[0][0] < p.vertices[1][0]
    if _bbox_apart(p, q):
        return False
    return any(_convex_interiors_overlap(t1, t2) for t1 in p.triangles for t2 in q.triangles)


def _float_dist2(a: Sequence[float], b: Sequence[float]) -> float:
    return sum((x - y) ** 2 for x, y in zip(a, b))


def ball_relation(p: Polygon, center: Vec, r2: FieldElement) -> BallRelation:
    """
    Положение замыкания многоугольника относительно шара B(center, R)

    Args:
        p: Многоугольник
        center: Центр шара
        r2: Квадрат радиуса R² > 0

    Returns:
        inside - замыкание внутри открытого шара,
        touches - замыкание пересекает замкнутый шар, но не внутри,
        outside - иначе
    """
    fc = center.approx()
    fr2 = r2.approx()
    dists = [_float_dist2(v, fc) for v in p.float_vertices]
    margin = _FILTER_EPS * (1.0 + fr2 + max(dists))
    if max(dists) < fr2 - margin:
        return "inside"
    (lo, hi) = p.float_bbox
    box_d2 = sum(max(lo[k] - fc[k], 0.0, fc[k] - hi[k]) ** 2 for k in range(p.dim))
    if box_d2 > fr2 + margin:
        return "outside"
    # точная проверка
    if all(((v - center).norm2() - r2).sign() < 0 for v in p.vertices):
        return "inside"
    if (p.dist2_to_point(center) - r2).sign() <= 0:
        return "touches"
    return "outside"


def find_overlap(polygons: Sequence[Polygon]) -> Optional[Tuple[int, int]]:
    """
    Ищет первую пару многоугольников с пересекающимися внутренностями

    Перебор кандидатов идет заметающей прямой по float-габаритам.

    Returns:
        Пара индексов (i, j), i < j, или None
    """
    order = sorted(range(len(polygons)), key=lambda i: (polygons[i].float_bbox[0][0], i))
    active: List[int] = []
    found: List[Tuple[int, int]] = []
    for i in order:
        lo_i = polygons[i].float_bbox[0][0]
        eps = _FILTER_EPS * (1.0 + abs(lo_i))
        active = [j for j in active if polygons[j].float_bbox[1][0] >= lo_i - eps]
        for j in active:
            if interiors_overlap(polygons[i], polygons[j]):
                found.append((min(i, j), max(i, j)))
        active.append(i)
    return min(found) if found else None


# === UNION BOUNDARY ===

def _line_key(a: Vec, b: Vec) -> Tuple:
    d = b - a
    if not d[0].is_zero():
        slope = d[1] / d[0]
        return ("x", slope, a[1] - slope * a[0])
    return ("y", a[0])


def _param(key: Tuple, p: Vec) -> FieldElement:
    return p[0] if key[0] == "x" else p[1]


def _point_on(key: Tuple, s: FieldElement) -> Vec:
    if key[0] == "x":
        return Vec((s, key[1] * s + key[2]))
    return Vec((key[1], s))


def union_boundary(polygons: Sequence[Polygon]) -> List[Tuple[Vec, Vec]]:
    """
    Граница объединения попарно непересекающихся многоугольников

    Ребро (или его часть) внутреннее, если его покрывает встречное ребро
    соседней плитки; остальные куски образуют границу.

    Returns:
        Список отрезков границы; для d = 1 - вырожденные отрезки-точки
    """
    if not polygons:
        return []
    if polygons[0].dim == 1:
        counts: Dict[FieldElement, int] = defaultdict(int)
        for p in polygons:
            counts[p.vertices[0][0]] += 1
            counts[p.vertices[1][0]] += 1
        return [(Vec((x,)), Vec((x,))) for x, k in counts.items() if k == 1]

    groups: Dict[Tuple, List[Tuple[FieldElement, int]]] = defaultdict(list)
    for poly in polygons:
        for a, b in poly.edges():
            key = _line_key(a, b)
            sa, sb = _param(key, a), _param(key, b)
            if (sb - sa).sign() > 0:
                groups[key].append((sa, +2))
                groups[key].append((sb, -2))
            else:
                groups[key].append((sb, +1))
                groups[key].append((sa, -1))

    pieces: List[Tuple[Vec, Vec]] = []
    for key in sorted(groups, key=lambda k: repr(k)):
        events = groups[key]
        points = sorted({s for s, _ in events}, key=cmp_to_key(_cmp))
        delta: Dict[FieldElement, Tuple[int, int]] = defaultdict(lambda: (0, 0))
        for s, kind in events:
            fwd, back = delta[s]
            if abs(kind) == 2:
                fwd += 1 if kind > 0 else -1
            else:
                back += 1 if kind > 0 else -1
            delta[s] = (fwd, back)
        fwd = back = 0
        start: Optional[FieldElement] = None
        for s in points:
            was_boundary = (fwd > 0) != (back > 0)
            df, db = delta[s]
            fwd += df
            back += db
            is_boundary = (fwd > 0) != (back > 0)
            if is_boundary and not was_boundary:
                start = s
            elif was_boundary and not is_boundary:
                pieces.append((_point_on(key, start), _point_on(key, s)))
                start = None
            elif was_boundary and is_boundary:
                continue
    return pieces


def boundary_distance2(polygons: Sequence[Polygon], center: Vec) -> Optional[FieldElement]:
    """
    Квадрат расстояния от центра до границы объединения

    Returns:
        None, если центр вне замкнутого объединения
    """
    if not any(p.contains_point(center) for p in polygons):
        return None
    pieces = union_boundary(polygons)
    if not pieces:
        return None
    return min((point_segment_dist2(center, a, b) for a, b in pieces), key=cmp_to_key(_cmp))


def contains_ball(polygons: Sequence[Polygon], center: Vec, r2: FieldElement, check_union: bool = True) -> bool:
    """
    Лежит ли шар B(center, r) в замкнутом объединении многоугольников

    Args:
        polygons: Носители плиток патча
        center: Центр шара
        r2: Квадрат радиуса
        check_union: Проверять попарную непересекаемость внутренностей

    Raises:
        InvalidUnion: Многоугольники пересекаются
    """
    if check_union:
        pair = find_overlap(polygons)
        if pair is not None:
            raise InvalidUnion("Многоугольники пересекаются внутренностями", {"pair": list(pair)})
    dist2 = boundary_distance2(polygons, center)
    if dist2 is None:
        return False
    return (dist2 - r2).sign() >= 0
