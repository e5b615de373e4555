"""
Точная арифметика в вещественном алгебраическом поле

Элемент поля хранится коэффициентами Fraction в степенном базисе корня
θ минимального многочлена. Сравнения с нулем сертифицируются интервалами:
корень уточняется через sympy, значение элемента считается интервальной
схемой Горнера над рациональными числами.

Содержимое:
- NumberField / FieldElement - поле и его элементы
- Vec и матричные помощники размерности d
- CirclePoint, circle_dist, character - окружность R/Z и характер χ_a
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple, Union

import sympy

from .errors import DivisionByZero, FieldError


logger = logging.getLogger(__name__)

Sign = Literal[-1, 0, 1]
Interval = Tuple[Fraction, Fraction]
RawScalar = Union[str, int, Fraction, Sequence[Union[str, int]]]

_X = sympy.Symbol("x")


def parse_rational(raw: Union[str, int, Fraction]) -> Fraction:
    """Разбирает рациональное число вида "p/q", "3" или "-0.25"."""
    try:
        return Fraction(str(raw).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise FieldError(f"Некорректное рациональное число: {raw!r}", {"value": str(raw)}) from e


def _to_fraction(value: sympy.Rational) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


@lru_cache(maxsize=512)
def _refine_root(min_poly: Tuple[int, ...], lo: Fraction, hi: Fraction, bits: int) -> Interval:
    poly = sympy.Poly(list(reversed(min_poly)), _X)
    s, t = poly.refine_root(
        sympy.Rational(lo.numerator, lo.denominator),
        sympy.Rational(hi.numerator, hi.denominator),
        eps=sympy.Rational(1, 2 ** bits),
    )
    return _to_fraction(s), _to_fraction(t)


def _imul(a: Interval, b: Interval) -> Interval:
    products = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(products), max(products)


@dataclass(frozen=True)
class NumberField:
    """
    Вещественное поле Q(θ)

    Attributes:
        min_poly: Целые коэффициенты унитарного минимального многочлена, свободный член первым
        root_interval: Рациональный интервал, изолирующий выбранный вещественный корень θ
    """

    min_poly: Tuple[int, ...]
    root_interval: Tuple[Fraction, Fraction]

    def __post_init__(self):
        if len(self.min_poly) < 2:
            raise FieldError("Минимальный многочлен должен иметь степень ≥ 1")
        if self.min_poly[-1] != 1:
            raise FieldError("Минимальный многочлен должен быть унитарным", {"min_poly": list(self.min_poly)})
        lo, hi = self.root_interval
        if not lo < hi:
            raise FieldError("Пустой интервал корня", {"root_interval": [str(lo), str(hi)]})
        if self.degree == 1:
            root = Fraction(-self.min_poly[0])
            if not lo <= root <= hi:
                raise FieldError("Интервал не содержит корень", {"root_interval": [str(lo), str(hi)]})
            return
        poly = sympy.Poly(list(reversed(self.min_poly)), _X)
        if not poly.is_irreducible:
            raise FieldError("Минимальный многочлен приводим над Q", {"min_poly": list(self.min_poly)})
        count = poly.count_roots(sympy.Rational(lo.numerator, lo.denominator), sympy.Rational(hi.numerator, hi.denominator))
        if count != 1:
            raise FieldError(
                "Интервал должен изолировать ровно один вещественный корень",
                {"root_interval": [str(lo), str(hi)], "roots": int(count)},
            )

    @classmethod
    def rational(cls) -> NumberField:
        """Поле Q, представленное как Q(θ) с θ = 0."""
        return cls((0, 1), (Fraction(-1), Fraction(1)))

    @property
    def degree(self) -> int:
        return len(self.min_poly) - 1

    @property
    def is_rational(self) -> bool:
        return self.degree == 1

    def root_bounds(self, bits: int) -> Interval:
        """
        Интервал ширины ≤ 2^-bits, содержащий θ

        Args:
            bits: Требуемая точность в битах
        """
        if self.degree == 1:
            root = Fraction(-self.min_poly[0])
            return root, root
        # кратность 32 улучшает попадания в кэш
        bits = ((max(bits, 1) + 31) // 32) * 32
        return _refine_root(self.min_poly, self.root_interval[0], self.root_interval[1], bits)

    # === ELEMENTS ===

    def element(self, coeffs: Iterable[Union[Fraction, int]]) -> FieldElement:
        values = [Fraction(c) for c in coeffs]
        if len(values) > self.degree:
            raise FieldError("Слишком много коэффициентов для поля", {"degree": self.degree, "given": len(values)})
        values += [Fraction(0)] * (self.degree - len(values))
        return FieldElement(self, tuple(values))

    def scalar(self, value: Union[int, Fraction]) -> FieldElement:
        return self.element([Fraction(value)])

    def zero(self) -> FieldElement:
        return self.scalar(0)

    def one(self) -> FieldElement:
        return self.scalar(1)

    def gen(self) -> FieldElement:
        """Образующая θ (для Q это число 0)."""
        if self.degree == 1:
            return self.scalar(-self.min_poly[0])
        return self.element([0, 1])

    def parse(self, raw: RawScalar) -> FieldElement:
        """
        Разбирает координату из файла правила

        Args:
            raw: Рациональная строка ("1/2") или список рациональных коэффициентов в базисе θ
        """
        if isinstance(raw, (str, int, Fraction)):
            return self.scalar(parse_rational(raw))
        if isinstance(raw, (list, tuple)):
            if not raw:
                raise FieldError("Пустой список коэффициентов")
            return self.element(parse_rational(c) for c in raw)
        raise FieldError(f"Неподдерживаемая координата: {raw!r}")

    def to_dict(self) -> Dict[str, list]:
        return {
            "min_poly": list(self.min_poly),
            "root_interval": [str(self.root_interval[0]), str(self.root_interval[1])],
        }


class FieldElement:
    """Элемент Q(θ) = Q[x]/(min_poly), неизменяемый."""

    __slots__ = ("field", "coeffs", "_hash")

    def __init__(self, field: NumberField, coeffs: Tuple[Fraction, ...]):
        self.field = field
        self.coeffs = coeffs
        self._hash = hash(coeffs)

    # --- приведение типов ---

    def _coerce(self, other) -> FieldElement:
        if isinstance(other, FieldElement):
            if other.field is not self.field and other.field != self.field:
                raise FieldError("Смешивание элементов разных полей")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.scalar(other)
        return NotImplemented

    # --- кольцевые операции ---

    def __add__(self, other) -> FieldElement:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> FieldElement:
        return FieldElement(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other) -> FieldElement:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rsub__(self, other) -> FieldElement:
        return (-self) + other

    def __mul__(self, other) -> FieldElement:
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.field, tuple(a * other for a in self.coeffs))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = self.field.degree
        if n == 1:
            return FieldElement(self.field, (self.coeffs[0] * other.coeffs[0],))
        product = [Fraction(0)] * (2 * n - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        product[i + j] += a * b
        # редукция по унитарному min_poly
        mp = self.field.min_poly
        for i in range(2 * n - 2, n - 1, -1):
            c = product[i]
            if c:
                for k in range(n):
                    product[i - n + k] -= c * mp[k]
        return FieldElement(self.field, tuple(product[:n]))

    __rmul__ = __mul__

    def inverse(self) -> FieldElement:
        if self.is_zero():
            raise DivisionByZero("Обращение нуля в поле")
        n = self.field.degree
        if n == 1:
            return FieldElement(self.field, (1 / self.coeffs[0],))
        if n == 2:
            # (a + bθ)(a + bθ') = a² - ab·c1 + b²·c0
            c0, c1 = self.field.min_poly[0], self.field.min_poly[1]
            a, b = self.coeffs
            norm = a * a - a * b * c1 + b * b * c0
            return FieldElement(self.field, ((a - b * c1) / norm, -b / norm))
        elem = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(self.coeffs)], _X, domain=sympy.QQ)
        modulus = sympy.Poly(list(reversed(self.field.min_poly)), _X, domain=sympy.QQ)
        inv = elem.invert(modulus)
        return self.field.element(_to_fraction(c) for c in reversed(inv.all_coeffs()))

    def __truediv__(self, other) -> FieldElement:
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise DivisionByZero("Деление на ноль")
            return FieldElement(self.field, tuple(a / other for a in self.coeffs))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other) -> FieldElement:
        return self.inverse() * other

    def __pow__(self, exponent: int) -> FieldElement:
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = self.field.one()
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    # --- равенство и порядок ---

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.coeffs == other.coeffs and self.field == other.field

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other) -> bool:
        return (self - other).sign() < 0

    def __le__(self, other) -> bool:
        return (self - other).sign() <= 0

    def __gt__(self, other) -> bool:
        return (self - other).sign() > 0

    def __ge__(self, other) -> bool:
        return (self - other).sign() >= 0

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    # --- вещественное вложение ---

    def embed(self, precision: int) -> Interval:
        """
        Сертифицированный интервал вещественного значения элемента

        Args:
            precision: Точность в битах (≥ 1)

        Returns:
            Интервал (lo, hi) ширины ≤ 2^-precision; ноль возвращается точкой
        """
        if self.is_rational():
            value = self.coeffs[0]
            return value, value
        target = Fraction(1, 2 ** max(precision, 1))
        extra = 8 + max(abs(c).numerator.bit_length() for c in self.coeffs)
        while True:
            root = self.field.root_bounds(precision + extra)
            acc = (self.coeffs[-1], self.coeffs[-1])
            for c in reversed(self.coeffs[:-1]):
                acc = _imul(acc, root)
                acc = (acc[0] + c, acc[1] + c)
            if acc[1] - acc[0] <= target:
                return acc
            extra += 32

    def approx(self) -> float:
        lo, hi = self.embed(60)
        return float((lo + hi) / 2)

    def sign(self) -> Sign:
        """Точный знак: ноль решается по коэффициентам, иначе уточнением интервала."""
        if self.is_zero():
            return 0
        if self.is_rational():
            return 1 if self.coeffs[0] > 0 else -1
        bits = 32
        while True:
            lo, hi = self.embed(bits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2

    def floor(self) -> int:
        if self.is_rational():
            return math.floor(self.coeffs[0])
        # иррациональный элемент не бывает целым, цикл конечен
        bits = 32
        while True:
            lo, hi = self.embed(bits)
            if math.floor(lo) == math.floor(hi):
                return math.floor(lo)
            bits *= 2

    def frac(self) -> FieldElement:
        """Представитель по модулю 1 в [0, 1)."""
        return self - self.floor()

    def trace(self) -> Fraction:
        """След Tr_{K/Q} как след матрицы умножения на элемент."""
        total = Fraction(0)
        power = self.field.one()
        theta = self.field.element([0, 1]) if self.field.degree > 1 else None
        for j in range(self.field.degree):
            total += (self * power).coeffs[j]
            if theta is not None:
                power = power * theta
        return total

    def to_strings(self) -> List[str]:
        return [str(c) for c in self.coeffs]

    def __repr__(self) -> str:
        if self.is_rational():
            return f"FieldElement({self.coeffs[0]})"
        terms = " + ".join(f"{c}·θ^{i}" for i, c in enumerate(self.coeffs) if c)
        return f"FieldElement({terms})"


def sign(x: FieldElement) -> Sign:
    return x.sign()


def embed(x: FieldElement, precision: int) -> Interval:
    return x.embed(precision)


def field_eval(field: NumberField, expr: str, env: Optional[Mapping[str, FieldElement]] = None) -> FieldElement:
    """
    Вычисляет кольцевое выражение в поле

    Поддерживаются +, -, *, целые степени (в том числе отрицательные) и
    рациональные константы. Имя theta обозначает образующую θ.

    Args:
        field: Поле
        expr: Выражение, например "theta**2 - theta"
        env: Дополнительные именованные элементы поля

    Returns:
        Точный результат
    """
    names: Dict[str, FieldElement] = {"theta": field.gen()}
    names.update(env or {})
    try:
        tree = sympy.sympify(expr, locals={k: sympy.Symbol(k) for k in names}, evaluate=False)
    except (sympy.SympifyError, SyntaxError, TypeError) as e:
        raise FieldError(f"Не удалось разобрать выражение: {expr!r}") from e

    def walk(node) -> FieldElement:
        if node.is_Symbol:
            if node.name not in names:
                raise FieldError(f"Неизвестное имя в выражении: {node.name}")
            return names[node.name]
        if node.is_Rational:
            return field.scalar(_to_fraction(node))
        if node.is_Add:
            result = field.zero()
            for arg in node.args:
                result = result + walk(arg)
            return result
        if node.is_Mul:
            result = field.one()
            for arg in node.args:
                result = result * walk(arg)
            return result
        if node.is_Pow and node.exp.is_Integer:
            return walk(node.base) ** int(node.exp)
        raise FieldError(f"Операция вне кольца поля: {node}")

    return walk(tree)


# === VECTORS AND MATRICES ===

class Vec(tuple):
    """Вектор из d элементов поля; хешируется и сравнивается как кортеж."""

    __slots__ = ()

    def __new__(cls, entries: Iterable[FieldElement]):
        return super().__new__(cls, tuple(entries))

    def __add__(self, other: Vec) -> Vec:
        return Vec(a + b for a, b in zip(self, other))

    def __sub__(self, other: Vec) -> Vec:
        return Vec(a - b for a, b in zip(self, other))

    def __neg__(self) -> Vec:
        return Vec(-a for a in self)

    def scale(self, k) -> Vec:
        return Vec(a * k for a in self)

    def dot(self, other: Vec) -> FieldElement:
        total = self[0] * other[0]
        for a, b in zip(self[1:], other[1:]):
            total = total + a * b
        return total

    def norm2(self) -> FieldElement:
        return self.dot(self)

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self)

    @property
    def field(self) -> NumberField:
        return self[0].field

    def approx(self) -> Tuple[float, ...]:
        return tuple(a.approx() for a in self)

    def key(self) -> Tuple[Tuple[Fraction, ...], ...]:
        """Точный ключ для детерминированной сортировки."""
        return tuple(a.coeffs for a in self)

    def to_strings(self) -> List[List[str]]:
        return [a.to_strings() for a in self]

    def __repr__(self) -> str:
        return f"Vec({', '.join(repr(a) for a in self)})"


def vec_zero(field: NumberField, dim: int) -> Vec:
    return Vec(field.zero() for _ in range(dim))


def vec_of(field: NumberField, values: Iterable[RawScalar]) -> Vec:
    return Vec(field.parse(v) for v in values)


def lex_compare(u: Vec, v: Vec) -> int:
    """Лексикографическое сравнение по вещественным значениям координат."""
    for a, b in zip(u, v):
        s = (a - b).sign()
        if s:
            return s
    return 0


Matrix = Tuple[Tuple[FieldElement, ...], ...]


def identity(field: NumberField, dim: int) -> Matrix:
    return tuple(
        tuple(field.one() if i == j else field.zero() for j in range(dim))
        for i in range(dim)
    )


def mat_vec(m: Matrix, v: Vec) -> Vec:
    return Vec(Vec(row).dot(v) for row in m)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(Vec(row).dot(Vec(col)) for col in cols) for row in a)


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_transpose(m: Matrix) -> Matrix:
    return tuple(tuple(col) for col in zip(*m))


def mat_pow(m: Matrix, n: int) -> Matrix:
    field = m[0][0].field
    if n < 0:
        return mat_pow(mat_inv(m), -n)
    result = identity(field, len(m))
    base = m
    while n:
        if n & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base)
        n >>= 1
    return result


def mat_det(m: Matrix) -> FieldElement:
    if len(m) == 1:
        return m[0][0]
    if len(m) == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    raise FieldError("Определитель поддержан только для d ≤ 2")


def mat_trace(m: Matrix) -> FieldElement:
    total = m[0][0]
    for i in range(1, len(m)):
        total = total + m[i][i]
    return total


def mat_inv(m: Matrix) -> Matrix:
    det = mat_det(m)
    if det.is_zero():
        raise DivisionByZero("Вырожденная матрица")
    if len(m) == 1:
        return ((det.inverse(),),)
    inv = det.inverse()
    return (
        (m[1][1] * inv, -m[0][1] * inv),
        (-m[1][0] * inv, m[0][0] * inv),
    )


def matrix_of(field: NumberField, rows: Sequence[Sequence[RawScalar]]) -> Matrix:
    return tuple(tuple(field.parse(v) for v in row) for row in rows)


def matrix_to_strings(m: Matrix) -> List[List[List[str]]]:
    return [[x.to_strings() for x in row] for row in m]


# === CIRCLE R/Z ===

@dataclass(frozen=True)
class CirclePoint:
    """Точка e^{2πiθ}; frac - представитель θ в [0, 1)."""

    frac: FieldElement

    @classmethod
    def of(cls, value: FieldElement) -> CirclePoint:
        return cls(value.frac())

    def __add__(self, other: CirclePoint) -> CirclePoint:
        return CirclePoint.of(self.frac + other.frac)

    def __neg__(self) -> CirclePoint:
        return CirclePoint.of(-self.frac)

    def is_identity(self) -> bool:
        return self.frac.is_zero()


def circle_dist(p: CirclePoint, q: CirclePoint) -> FieldElement:
    """
    Метрика окружности ρ_T: min по целым n от |θ_p - θ_q + n|

    Returns:
        Точный элемент поля в [0, 1/2]
    """
    d = (p.frac - q.frac).frac()
    if (d - Fraction(1, 2)).sign() <= 0:
        return d
    return 1 - d


def character(a: Vec, x: Vec) -> CirclePoint:
    """χ_a(x) = e^{2πi⟨a,x⟩} как точка окружности."""
    return CirclePoint.of(a.dot(x))


def rational_sqrt_upper(q: Fraction, bits: int = 40) -> Fraction:
    """Рациональная верхняя оценка √q с погрешностью ≤ 2^-bits."""
    if q <= 0:
        return Fraction(0)
    scale = 2 ** bits
    root = math.isqrt(q.numerator * scale * scale // q.denominator)
    return Fraction(root + 1, scale)
