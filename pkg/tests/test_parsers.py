import json

import pytest

import config
from services.errors import DimensionError, FieldError, OverlapError, SchemaError
from services.parsers import load_document, load_path
from services.parsers.parser_factory import ParserFactory
from services.seqdyn import WordSubstitution
from services.subst import SubstitutionRule


SQUARE = {
    "name": "square",
    "kind": "substitution",
    "dim": 2,
    "prototiles": [{"name": "S", "vertices": [["0", "0"], ["1", "0"], ["1", "1"], ["0", "1"]]}],
    "phi": [["2", "0"], ["0", "2"]],
    "images": {
        "S": [
            {"proto": "S", "shift": ["0", "0"]},
            {"proto": "S", "shift": ["1", "0"]},
            {"proto": "S", "shift": ["0", "1"]},
            {"proto": "S", "shift": ["1", "1"]},
        ]
    },
}


def document(**changes) -> str:
    data = json.loads(json.dumps(SQUARE))
    data.update(changes)
    return json.dumps(data)


def test_square_parses():
    rule = load_document(document())
    assert isinstance(rule, SubstitutionRule)
    assert rule.size == 1
    assert rule.support_bound2.is_zero()
    assert len(rule.digest) == 16


def test_digest_depends_on_content():
    assert load_document(document()).digest == load_document(document()).digest
    assert load_document(document()).digest != load_document(document(name="other")).digest


def test_not_json():
    with pytest.raises(SchemaError):
        load_document("{not json")


def test_unknown_kind():
    with pytest.raises(SchemaError) as info:
        load_document(document(kind="mystery"))
    assert info.value.details["kind"] == "mystery"


def test_missing_key():
    data = json.loads(document())
    del data["phi"]
    with pytest.raises(SchemaError) as info:
        load_document(json.dumps(data))
    assert info.value.details["key"] == "phi"


def test_all_missing_keys_reported_at_once():
    data = json.loads(document())
    del data["phi"]
    del data["images"]
    with pytest.raises(SchemaError) as info:
        load_document(json.dumps(data))
    assert info.value.details["missing"] == ["phi", "images"]
    assert info.value.details["kind"] == "substitution"


def test_word_rule_without_images():
    with pytest.raises(SchemaError) as info:
        load_document(json.dumps({"kind": "word", "name": "empty"}))
    assert info.value.details["missing"] == ["images"]


def test_dimension_three_rejected():
    with pytest.raises(DimensionError):
        load_document(document(dim=3))


def test_non_expansive_phi():
    with pytest.raises(SchemaError):
        load_document(document(phi=[["1", "0"], ["0", "2"]]))


def test_origin_outside_prototile():
    shifted = [{"name": "S", "vertices": [["1", "1"], ["2", "1"], ["2", "2"], ["1", "2"]]}]
    with pytest.raises(SchemaError):
        load_document(document(prototiles=shifted))


def test_overlapping_image():
    images = {"S": [{"proto": "S", "shift": ["0", "0"]}, {"proto": "S", "shift": ["1/2", "0"]}]}
    with pytest.raises(OverlapError) as info:
        load_document(document(images=images))
    assert info.value.details["prototile"] == "S"


def test_image_outside_support():
    images = {"S": [
        {"proto": "S", "shift": ["0", "0"]},
        {"proto": "S", "shift": ["1", "0"]},
        {"proto": "S", "shift": ["0", "1"]},
        {"proto": "S", "shift": ["2", "1"]},
    ]}
    with pytest.raises(SchemaError):
        load_document(document(images=images))
    # та же геометрия допустима как псевдоподстановка
    rule = load_document(document(images=images, kind="pseudo"))
    assert rule.kind == "pseudo"
    assert rule.support_bound2 == rule.field.scalar(1)


def test_area_mismatch():
    images = {"S": [{"proto": "S", "shift": ["0", "0"]}, {"proto": "S", "shift": ["1", "1"]}]}
    with pytest.raises(SchemaError):
        load_document(document(images=images))


def test_coordinate_outside_field():
    with pytest.raises(FieldError):
        load_document(document(prototiles=[{"name": "S", "vertices": [["0", "0"], ["x", "0"], ["1", "1"]]}]))


def test_field_requires_isolating_interval():
    with pytest.raises(FieldError):
        load_document(document(field={"min_poly": [-2, 0, 1], "root_interval": ["-2", "2"]}))


def test_symmetry_expands_prototiles(chair):
    assert chair.size == 4
    assert chair.proto_names == ("L_r0", "L_r1", "L_r2", "L_r3")
    areas = {chair.prototiles[p].area() for p in range(4)}
    assert areas == {chair.field.scalar(3)}


def test_symmetry_must_commute_with_phi():
    data = json.loads(document())
    data["phi"] = [["3", "0"], ["0", "2"]]
    data["symmetry"] = {"order": 4, "rotation": [["0", "-1"], ["1", "0"]]}
    with pytest.raises(SchemaError):
        load_document(json.dumps(data))


def test_word_rule():
    zeta = load_document(json.dumps({"kind": "word", "name": "tm", "images": {"a": "ab", "b": "ba"}}))
    assert isinstance(zeta, WordSubstitution)
    assert zeta.apply("ab") == "abba"


def test_word_rule_symbol_outside_alphabet():
    with pytest.raises(SchemaError):
        load_document(json.dumps({"kind": "word", "images": {"a": "ac"}}))


def test_parser_factory():
    names = {p["name"] for p in ParserFactory.list_available_parsers()}
    assert {"substitution", "pseudo", "word"} <= names
    assert ParserFactory.create_parser("nothing") is None


@pytest.mark.parametrize("path", sorted(config.CATALOG_DIR.glob("*.json")), ids=lambda p: p.stem)
def test_catalog_rules_parse(path):
    rule = load_path(path)
    assert rule.name == json.loads(path.read_text(encoding="utf-8"))["name"]


def test_robinson_triangles_expand_to_twenty_prototiles():
    rule = load_path(config.CATALOG_DIR / "robinson_triangles.json")
    assert rule.size == 20
    assert rule.proto_names[0] == "B_r0"


def test_ammann_beenker_expands_to_sixteen_prototiles():
    rule = load_path(config.CATALOG_DIR / "ammann_beenker.json")
    assert rule.size == 16
    assert rule.proto_names[:2] == ("T_r0", "Rh_r0")
    assert [len(rule.images[p]) for p in range(2)] == [5, 7]
    half = rule.field.parse("1/2")
    assert rule.prototiles[0].area() == half
    assert rule.prototiles[1].area() == rule.field.parse(["0", "1/2"])
