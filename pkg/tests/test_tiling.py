from fractions import Fraction

import pytest

from services.errors import EmptyPatch, OverlapError
from services.exactnum import NumberField, Vec
from services.geometry import Polygon
from services.tiling import PlacedTile, canonicalize, patch_build, patch_to_csv, restrict


Q = NumberField.rational()


def pt(x, y) -> Vec:
    return Vec((Q.scalar(Fraction(x)), Q.scalar(Fraction(y))))


UNIT = (Polygon((pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1))),)


def grid(n: int, offset=(0, 0)):
    tiles = [PlacedTile(0, pt(i + offset[0], j + offset[1])) for i in range(n) for j in range(n)]
    return patch_build(tiles, UNIT)


def test_patch_build_rejects_overlap():
    with pytest.raises(OverlapError) as info:
        patch_build([PlacedTile(0, pt(0, 0)), PlacedTile(0, pt(Fraction(1, 2), 0))], UNIT)
    assert info.value.to_dict()["error"] == "OverlapError"
    assert "first" in info.value.details


def test_patch_build_rejects_duplicates():
    with pytest.raises(OverlapError):
        patch_build([PlacedTile(0, pt(0, 0)), PlacedTile(0, pt(0, 0))], UNIT)


def test_canonical_form_is_translation_invariant():
    a = canonicalize(grid(3))
    b = canonicalize(grid(3, offset=(Fraction(7, 3), -5)))
    assert a == b
    assert hash(a) == hash(b)
    assert a.anchor.shift == pt(0, 0)
    assert b.anchor_shift == pt(Fraction(7, 3), -5)
    assert len(a) == 9


def test_canonicalize_empty_patch():
    with pytest.raises(EmptyPatch):
        canonicalize(patch_build([], UNIT))


def test_restrict_modes():
    patch = grid(4, offset=(-2, -2))
    center = pt(0, 0)
    inside = restrict(patch, center, Q.scalar(4), "cap")
    touching = restrict(patch, center, Q.scalar(4), "sqcap")
    # внутри открытого шара радиуса 2 лежат только четыре квадрата у центра
    assert len(inside) == 4
    assert inside.issubset(touching)
    assert len(touching) == 16


def test_patch_to_csv_is_sorted():
    patch = patch_build([PlacedTile(0, pt(1, 0)), PlacedTile(0, pt(0, Fraction(1, 2)))], UNIT)
    lines = patch_to_csv(patch).splitlines()
    assert lines[0] == "proto_index,shift_0,shift_1"
    assert lines[1:] == ["0,0,1/2", "0,1,0"]
