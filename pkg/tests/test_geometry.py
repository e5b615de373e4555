from fractions import Fraction

import pytest

from services.errors import FieldError, InvalidUnion
from services.exactnum import NumberField, Vec
from services.geometry import (
    Polygon,
    ball_relation,
    boundary_distance2,
    contains_ball,
    find_overlap,
    interiors_overlap,
    union_boundary,
)


Q = NumberField.rational()


def pt(x, y) -> Vec:
    return Vec((Q.scalar(Fraction(x)), Q.scalar(Fraction(y))))


def square(x=0, y=0, size=1) -> Polygon:
    return Polygon((pt(x, y), pt(x + size, y), pt(x + size, y + size), pt(x, y + size)))


def chair() -> Polygon:
    return Polygon((pt(0, 0), pt(2, 0), pt(2, 1), pt(1, 1), pt(1, 2), pt(0, 2)))


def test_validate_orientation():
    square().validate()
    clockwise = Polygon((pt(0, 0), pt(0, 1), pt(1, 1), pt(1, 0)))
    with pytest.raises(FieldError):
        clockwise.validate()


def test_validate_self_intersection():
    bowtie = Polygon((pt(0, 0), pt(2, 2), pt(2, 0), pt(0, 2)))
    with pytest.raises(FieldError):
        bowtie.validate()


def test_area():
    assert square(size=2).area() == Q.scalar(4)
    assert chair().area() == Q.scalar(3)


def test_point_membership():
    p = chair()
    assert p.contains_point(pt(0, 0))
    assert not p.interior_contains(pt(0, 0))
    assert p.interior_contains(pt(Fraction(1, 2), Fraction(3, 2)))
    # вырез chair
    assert not p.contains_point(pt(Fraction(3, 2), Fraction(3, 2)))
    assert p.contains_point(pt(1, 1))


def test_interiors_overlap():
    assert interiors_overlap(square(), square(Fraction(1, 2), Fraction(1, 2)))
    # общее ребро
    assert not interiors_overlap(square(), square(1, 0))
    # общая вершина
    assert not interiors_overlap(square(), square(1, 1))
    # квадрат в вырезе chair
    assert not interiors_overlap(chair(), square(1, 1))


def test_find_overlap():
    assert find_overlap([square(), square(1, 0), square(0, 1)]) is None
    assert find_overlap([square(), square(3, 3), square(Fraction(1, 2), 0)]) == (0, 2)


def test_ball_relation():
    unit = square()
    assert ball_relation(unit, pt(0, 0), Q.scalar(3)) == "inside"
    # дальняя вершина на расстоянии √2 - граница открытого шара
    assert ball_relation(unit, pt(0, 0), Q.scalar(2)) == "touches"
    assert ball_relation(unit, pt(3, 0), Q.scalar(4)) == "touches"
    assert ball_relation(unit, pt(5, 5), Q.scalar(1)) == "outside"


def test_union_boundary_of_two_squares():
    pieces = union_boundary([square(), square(1, 0)])
    # общее ребро x = 1 не входит в границу
    assert all(not (a[0] == Q.scalar(1) and b[0] == Q.scalar(1)) for a, b in pieces)
    total = sum(((b - a).norm2() for a, b in pieces), Q.zero())
    # 2 + 2 (низ и верх как сплошные отрезки) + 1 + 1
    assert total == Q.scalar(10)


def test_boundary_distance():
    block = [square(x, y) for x in range(-2, 2) for y in range(-2, 2)]
    assert boundary_distance2(block, pt(0, 0)) == Q.scalar(4)
    assert boundary_distance2(block, pt(Fraction(1, 2), 1)) == Q.scalar(1)
    assert boundary_distance2(block, pt(5, 5)) is None


def test_contains_ball():
    block = [square(x, y) for x in range(-2, 2) for y in range(-2, 2)]
    assert contains_ball(block, pt(0, 0), Q.scalar(4))
    assert not contains_ball(block, pt(0, 0), Q.scalar(5))
    with pytest.raises(InvalidUnion):
        contains_ball(block + [square(Fraction(1, 2), 0)], pt(0, 0), Q.scalar(1))


def test_interval_polygons():
    a = Polygon((Vec((Q.scalar(0),)), Vec((Q.scalar(2),))))
    b = Polygon((Vec((Q.scalar(2),)), Vec((Q.scalar(3),))))
    c = Polygon((Vec((Q.scalar(1),)), Vec((Q.scalar(3),))))
    assert not interiors_overlap(a, b)
    assert interiors_overlap(a, c)
    assert boundary_distance2([a, b], Vec((Q.scalar(1),))) == Q.scalar(1)
