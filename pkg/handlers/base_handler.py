"""
Общие части обработчиков команд: загрузка правил, разбор аргументов, конверт отчета
"""
import logging
import re
from argparse import Namespace
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import config
from services.errors import FieldError, SchemaError
from services.exactnum import FieldElement, NumberField, Vec, field_eval, parse_rational
from services.parsers import load_path
from services.parsers.parser_factory import AnyRule
from services.seqdyn import WordSubstitution
from services.subst import Approximant, ApproximantBuilder, SubstitutionRule, find_seed
from services.tiling import PlacedTile, Patch, patch_build


logger = logging.getLogger(__name__)

TOL_RE = re.compile(r"^\s*2\s*\^\s*-\s*(\d+)\s*$")


class CommandResult:
    """
    Результат команды: отчет плюс необязательные байты для --out

    Attributes:
        report: JSON-совместимый словарь
        exit_code: 0 - успех
        csv: Табличное представление для --format csv
        svg: Документ для --format svg
    """

    def __init__(
        self,
        report: Dict[str, Any],
        exit_code: int = 0,
        csv: Optional[str] = None,
        svg: Optional[bytes] = None,
        rule: Optional[AnyRule] = None,
    ):
        self.report = report
        self.exit_code = exit_code
        self.csv = csv
        self.svg = svg
        self.rule = rule


def resolve_rule_path(raw: str) -> Path:
    """Путь к файлу правила: как есть, относительно проекта или по имени в каталоге."""
    candidates = [Path(raw), config.BASE_DIR / raw, config.CATALOG_DIR / raw]
    for path in candidates:
        if path.exists() or path.with_suffix(".json").exists():
            return path
    return Path(raw)


def load_rule(raw: str) -> AnyRule:
    rule = load_path(resolve_rule_path(raw))
    logger.info(f"📄 Правило {rule.name} загружено")
    return rule


def require_tiling(rule: AnyRule) -> SubstitutionRule:
    if not isinstance(rule, SubstitutionRule):
        raise SchemaError("Команда работает только с правилами тайлингов", {"rule": rule.name})
    return rule


def require_word(rule: AnyRule) -> WordSubstitution:
    if not isinstance(rule, WordSubstitution):
        raise SchemaError("Команда работает только с подстановками на словах", {"rule": rule.name})
    return rule


# === ARGUMENTS ===

def parse_tol(raw: Optional[str]) -> Fraction:
    """Допуск в виде "2^-k" или рационального числа."""
    if raw is None:
        return Fraction(1, 2 ** config.DEFAULT_TOL_EXP)
    match = TOL_RE.match(raw)
    if match:
        return Fraction(1, 2 ** int(match.group(1)))
    value = parse_rational(raw)
    if value <= 0:
        raise SchemaError("Допуск должен быть положительным", {"tol": raw})
    return value


def parse_scalar(field: NumberField, raw: str) -> FieldElement:
    """Рациональное число или выражение от theta."""
    try:
        return field.scalar(parse_rational(raw))
    except FieldError:
        return field_eval(field, raw)


def parse_vec(field: NumberField, raw: str, dim: int) -> Vec:
    """Вектор через запятую: "1/2,0" или "theta/2,1"."""
    parts = [p for p in raw.split(",")]
    if len(parts) != dim:
        raise SchemaError(f"Ожидалось {dim} координат, получено {len(parts)}", {"value": raw})
    return Vec(parse_scalar(field, p.strip()) for p in parts)


def parse_vec_list(field: NumberField, raw: str, dim: int) -> List[Vec]:
    """Несколько векторов через ';'."""
    return [parse_vec(field, part, dim) for part in raw.split(";") if part.strip()]


def radius2(field: NumberField, raw: Optional[str], default: Optional[str] = None) -> Optional[FieldElement]:
    """Квадрат радиуса по строке радиуса."""
    raw = raw if raw is not None else default
    if raw is None:
        return None
    r = parse_scalar(field, raw)
    if r.sign() < 0:
        raise SchemaError("Радиус должен быть неотрицательным", {"value": raw})
    return r * r


def proto_index(rule: SubstitutionRule, raw: str) -> int:
    if raw in rule.proto_names:
        return rule.proto_names.index(raw)
    if raw.isdigit() and int(raw) < rule.size:
        return int(raw)
    raise SchemaError(f"Неизвестный прототайл: {raw}", {"known": list(rule.proto_names)})


def parse_patch(rule: SubstitutionRule, raw: Optional[str]) -> Patch:
    """
    Патч вида "name@x,y;name@x,y"; без сдвига плитка стоит в начале координат

    Без аргумента - одна плитка прототайла 0.
    """
    if not raw:
        return rule.single(0)
    tiles: List[PlacedTile] = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        name, _, shift = chunk.partition("@")
        p = proto_index(rule, name.strip())
        tiles.append(rule.tile(p, parse_vec(rule.field, shift, rule.dim) if shift else None))
    return patch_build(tiles, rule.prototiles)


# === APPROXIMANTS ===

class ApproximantCache:
    """Один builder на правило за запуск."""

    def __init__(self):
        self._builders: Dict[str, ApproximantBuilder] = {}

    def builder(self, rule: SubstitutionRule, max_seed_n: Optional[int] = None) -> ApproximantBuilder:
        if rule.digest not in self._builders:
            seed = find_seed(rule, max_seed_n or config.MAX_SEED_N, expanding=True)
            self._builders[rule.digest] = ApproximantBuilder(rule, seed, config.TILE_CAP)
        return self._builders[rule.digest]

    def approximant(self, rule: SubstitutionRule, level: int) -> Approximant:
        if level < 1:
            raise SchemaError("Уровень аппроксиманта должен быть ≥ 1", {"level": level})
        return self.builder(rule).approximant(level)


def envelope(command: str, rule: Optional[AnyRule], result: Dict[str, Any],
             approx: Optional[Approximant] = None, evidence: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Конверт отчета: схема, правило, уровень, параметры доказательности."""
    report: Dict[str, Any] = {"schema": config.REPORT_SCHEMA, "command": command}
    if rule is not None:
        report["rule"] = {"name": rule.name, "digest": rule.digest}
    report["level"] = approx.level if approx is not None else None
    merged = dict(approx.evidence()) if approx is not None else {}
    merged.update(evidence or {})
    report["evidence"] = merged
    report["result"] = result
    return report


class BaseHandler:
    """Базовый обработчик группы команд."""

    def __init__(self, cache: ApproximantCache):
        self.cache = cache

    def approximant(self, rule: SubstitutionRule, args: Namespace) -> Approximant:
        return self.cache.approximant(rule, args.level)

    @staticmethod
    def strings(values: Sequence[Union[Vec, FieldElement]]) -> List[Any]:
        return [v.to_strings() for v in values]
