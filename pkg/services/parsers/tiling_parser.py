"""
Парсеры правил подстановки и псевдоподстановки

Формат документа:
    {
        "name": "chair", "dim": 2, "kind": "substitution",
        "field": {"min_poly": [-1, -1, 1], "root_interval": ["1", "2"]},
        "prototiles": [{"name": "L", "vertices": [[x, y], ...]}],
        "symmetry": {"order": 4, "rotation": [[c, -s], [s, c]]},
        "phi": [[...], [...]],
        "images": {"L": [{"proto": "L", "shift": [x, y], "rot": 1}, ...]},
        "metadata": {"non_periodic": true}
    }

Координата - рациональная строка или список коэффициентов в базисе θ.
С ключом symmetry каждый прототайл P порождает R^j P, j < order,
а образ ω(R^j P) = R^j ω(P); в образах ключ rot задает поворот ребенка.
"""
import logging
from typing import Any, Dict, List, Mapping, Sequence, Tuple

from ..errors import FieldError, OverlapError, SchemaError
from ..exactnum import (
    FieldElement,
    Matrix,
    NumberField,
    Vec,
    identity,
    mat_det,
    mat_mul,
    mat_pow,
    mat_vec,
    matrix_of,
    vec_of,
    vec_zero,
)
from ..geometry import Polygon
from ..subst import SubstitutionRule
from ..tiling import PlacedTile, patch_build
from .base_parser import BaseRuleParser


logger = logging.getLogger(__name__)


class TilingRuleParser(BaseRuleParser):
    """
    Общий разбор прототайлов, φ и образов

    Дочерние классы задают проверку носителя ω(P).
    """

    NAME = "tiling"
    DESCRIPTION = "Общий парсер правил тайлингов"
    SUPPORTED_OPERATIONS = ["validate", "seed", "grow"]
    REQUIRED_KEYS = ("kind", "dim", "prototiles", "phi", "images")

    def parse(self, data: Mapping[str, Any], name: str = "rule") -> SubstitutionRule:
        from ..spectra import is_expansive

        self.check_required(data)
        dim = self.parse_dim(data)
        number_field = self.parse_field(data)
        base_names, base_polygons = self._parse_prototiles(data, number_field, dim)
        phi = self._parse_matrix(self.require(data, "phi"), number_field, dim, "phi")
        if not is_expansive(phi):
            raise SchemaError("Отображение φ не растягивающее", {"phi": self.require(data, "phi")})

        rotation, order = self._parse_symmetry(data, number_field, dim, phi)
        base_images = self._parse_images(data, number_field, dim, base_names, order)

        names: List[str] = []
        polygons: List[Polygon] = []
        for j in range(order):
            rj = mat_pow(rotation, j)
            for base, polygon in zip(base_names, base_polygons):
                names.append(base if order == 1 else f"{base}_r{j}")
                polygons.append(polygon.linear_image(rj))

        nbase = len(base_names)
        images: List[Tuple[PlacedTile, ...]] = []
        for j in range(order):
            rj = mat_pow(rotation, j)
            for p in range(nbase):
                children = []
                for child_base, rot, shift in base_images[p]:
                    proto = ((j + rot) % order) * nbase + child_base
                    children.append(PlacedTile(proto, mat_vec(rj, shift)))
                images.append(tuple(children))

        support2 = self._check_images(names, polygons, phi, images, number_field, dim)
        metadata = data.get("metadata", {})
        if not isinstance(metadata, Mapping):
            raise SchemaError("metadata должен быть объектом")

        rule = SubstitutionRule(
            name=str(data.get("name", name)),
            field=number_field,
            dim=dim,
            kind=self.NAME,
            proto_names=tuple(names),
            prototiles=tuple(polygons),
            phi=phi,
            images=tuple(images),
            support_bound2=support2,
            metadata=dict(metadata),
            digest=self.digest(data),
        )
        logger.info(f"✅ Правило {rule.name}: {rule.size} прототайлов, вид {rule.kind}")
        return rule

    # --- разбор частей документа ---

    def _parse_vec(self, raw: Any, number_field: NumberField, dim: int, where: str) -> Vec:
        if not isinstance(raw, list) or len(raw) != dim:
            raise SchemaError(f"{where}: ожидался вектор длины {dim}", {"value": raw})
        try:
            return vec_of(number_field, raw)
        except FieldError as e:
            raise FieldError(f"{where}: {e.message}", {"value": raw}) from e

    def _parse_matrix(self, raw: Any, number_field: NumberField, dim: int, where: str) -> Matrix:
        if not isinstance(raw, list) or len(raw) != dim or any(not isinstance(r, list) or len(r) != dim for r in raw):
            raise SchemaError(f"{where}: ожидалась матрица {dim}×{dim}", {"value": raw})
        return matrix_of(number_field, raw)

    def _parse_prototiles(
        self, data: Mapping[str, Any], number_field: NumberField, dim: int
    ) -> Tuple[List[str], List[Polygon]]:
        raw = self.require(data, "prototiles")
        if not isinstance(raw, list) or not raw:
            raise SchemaError("prototiles должен быть непустым списком")
        names: List[str] = []
        polygons: List[Polygon] = []
        origin = vec_zero(number_field, dim)
        for entry in raw:
            if not isinstance(entry, Mapping):
                raise SchemaError("Прототайл должен быть объектом", {"value": entry})
            tile_name = str(self.require(entry, "name"))
            if tile_name in names:
                raise SchemaError(f"Повторяющееся имя прототайла: {tile_name}")
            vertices = self.require(entry, "vertices")
            if not isinstance(vertices, list):
                raise SchemaError(f"{tile_name}: vertices должен быть списком")
            polygon = Polygon(tuple(self._parse_vec(v, number_field, dim, tile_name) for v in vertices))
            polygon.validate()
            if not polygon.contains_point(origin):
                raise SchemaError(f"Прототайл {tile_name} не содержит начало координат", {"prototile": tile_name})
            names.append(tile_name)
            polygons.append(polygon)
        return names, polygons

    def _parse_symmetry(
        self, data: Mapping[str, Any], number_field: NumberField, dim: int, phi: Matrix
    ) -> Tuple[Matrix, int]:
        raw = data.get("symmetry")
        if raw is None:
            return identity(number_field, dim), 1
        if not isinstance(raw, Mapping):
            raise SchemaError("symmetry должен быть объектом")
        order = self.require(raw, "order")
        if not isinstance(order, int) or order < 1:
            raise SchemaError("symmetry.order должен быть положительным целым", {"order": order})
        rotation = self._parse_matrix(self.require(raw, "rotation"), number_field, dim, "symmetry.rotation")
        if mat_pow(rotation, order) != identity(number_field, dim):
            raise SchemaError("R^order ≠ I для symmetry.rotation", {"order": order})
        if mat_mul(rotation, phi) != mat_mul(phi, rotation):
            raise SchemaError("symmetry.rotation должна коммутировать с φ")
        if mat_det(rotation) != 1:
            raise SchemaError("symmetry.rotation должна быть поворотом (det = 1)")
        return rotation, order

    def _parse_images(
        self,
        data: Mapping[str, Any],
        number_field: NumberField,
        dim: int,
        names: Sequence[str],
        order: int,
    ) -> List[List[Tuple[int, int, Vec]]]:
        raw = self.require(data, "images")
        if isinstance(raw, Mapping):
            missing = [n for n in names if n not in raw]
            if missing:
                raise SchemaError("Нет образов для прототайлов", {"missing": missing})
            ordered = [raw[n] for n in names]
        elif isinstance(raw, list) and len(raw) == len(names):
            ordered = raw
        else:
            raise SchemaError("images: ожидался объект по именам прототайлов или список той же длины")
        result = []
        for parent, children in zip(names, ordered):
            if not isinstance(children, list) or not children:
                raise SchemaError(f"Образ {parent} должен быть непустым списком")
            parsed = []
            for child in children:
                if not isinstance(child, Mapping):
                    raise SchemaError(f"Плитка образа {parent} должна быть объектом", {"value": child})
                proto = self.require(child, "proto")
                if proto not in names:
                    raise SchemaError(f"Неизвестный прототайл в образе {parent}: {proto!r}")
                rot = child.get("rot", 0)
                if not isinstance(rot, int) or not 0 <= rot < order:
                    raise SchemaError(f"rot вне диапазона 0..{order - 1}", {"rot": rot})
                shift = self._parse_vec(self.require(child, "shift"), number_field, dim, f"{parent}.shift")
                parsed.append((names.index(proto), rot, shift))
            result.append(parsed)
        return result

    # --- проверка образов ---

    def _check_images(
        self,
        names: Sequence[str],
        polygons: Sequence[Polygon],
        phi: Matrix,
        images: Sequence[Tuple[PlacedTile, ...]],
        number_field: NumberField,
        dim: int,
    ) -> FieldElement:
        """
        Проверяет непересечение ω(P) и условие на носитель

        Returns:
            L² - максимум квадрата расстояния вершин ω(P) до φ(P̄)
        """
        support2 = number_field.zero()
        for p, children in enumerate(images):
            try:
                patch = patch_build(children, polygons)
            except OverlapError as e:
                raise OverlapError(f"Плитки ω({names[p]}) пересекаются", {"prototile": names[p], **e.details}) from e
            target = polygons[p].linear_image(phi)
            for t in children:
                for v in patch.polygon(t).vertices:
                    d2 = target.dist2_to_point(v)
                    if (d2 - support2).sign() > 0:
                        support2 = d2
            self.check_support(names[p], polygons[p], phi, patch, target, support2)
        return support2

    def check_support(self, name: str, polygon: Polygon, phi: Matrix, patch, target: Polygon, support2: FieldElement) -> None:
        """Для псевдоподстановки условие на носитель - только оценка через L."""


class SubstitutionParser(TilingRuleParser):
    """Правило подстановки: supp ω(P) = φ(P̄)"""

    NAME = "substitution"
    DESCRIPTION = "Подстановка с точным равенством носителя"

    def check_support(self, name: str, polygon: Polygon, phi: Matrix, patch, target: Polygon, support2: FieldElement) -> None:
        if not support2.is_zero():
            raise SchemaError(f"Плитки ω({name}) выходят за φ({name})", {"prototile": name})
        expected = polygon.area() * _field_abs(mat_det(phi))
        total = None
        for t in patch.tiles:
            area = patch.polygon(t).area()
            total = area if total is None else total + area
        if total != expected:
            raise SchemaError(
                f"Площадь ω({name}) не равна |det φ|·площадь({name})",
                {"prototile": name, "area": total.to_strings(), "expected": expected.to_strings()},
            )


class PseudoSubstitutionParser(TilingRuleParser):
    """Псевдоподстановка: supp ω(P) ⊂ φ(P̄) + B(0, L)"""

    NAME = "pseudo"
    DESCRIPTION = "Псевдоподстановка с оценкой носителя"
    SUPPORTED_OPERATIONS = ["validate", "seed", "grow", "support-bound"]


def _field_abs(x: FieldElement) -> FieldElement:
    return -x if x.sign() < 0 else x
