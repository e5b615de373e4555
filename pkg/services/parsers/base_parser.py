"""
Базовый класс для всех парсеров файлов правил

Определяет общий интерфейс и базовую функциональность
"""
import hashlib
import json
import logging
from abc import ABC, abstractmethod
from typing import Any, List, Mapping, Sequence

from ..errors import DimensionError, SchemaError
from ..exactnum import NumberField, parse_rational


logger = logging.getLogger(__name__)


class BaseRuleParser(ABC):
    """
    Базовый класс для парсера правила

    Все конкретные парсеры должны наследоваться от этого класса
    и реализовать parse()
    """

    # Метаданные парсера (переопределяются в дочерних классах)
    NAME: str = "base"
    DESCRIPTION: str = "Базовый парсер правил"
    VERSION: str = "1.0.0"
    SUPPORTED_OPERATIONS: List[str] = []

    REQUIRED_KEYS: Sequence[str] = ("kind",)

    def __init__(self):
        logger.debug(f"🔧 {self.NAME} parser initialized")

    @abstractmethod
    def parse(self, data: Mapping[str, Any], name: str = "rule") -> Any:
        """
        Разбирает документ правила

        Args:
            data: Декодированный JSON-документ
            name: Имя правила, если в документе нет ключа name

        Returns:
            Провалидированный объект правила
        """

    # --- общие помощники ---

    def check_required(self, data: Mapping[str, Any]) -> None:
        """
        Проверяет REQUIRED_KEYS до разбора

        Raises:
            SchemaError: details["key"] - первый отсутствующий ключ, details["missing"] - все
        """
        missing = [key for key in self.REQUIRED_KEYS if key not in data]
        if missing:
            raise SchemaError(
                f"В файле правила нет ключей: {', '.join(missing)}",
                {"key": missing[0], "missing": missing, "kind": self.NAME},
            )

    def require(self, data: Mapping[str, Any], key: str) -> Any:
        if key not in data:
            raise SchemaError(f"В файле правила нет ключа {key!r}", {"key": key, "kind": self.NAME})
        return data[key]

    def parse_dim(self, data: Mapping[str, Any]) -> int:
        dim = self.require(data, "dim")
        if not isinstance(dim, int) or isinstance(dim, bool):
            raise SchemaError("dim должен быть целым числом", {"dim": dim})
        if dim not in (1, 2):
            raise DimensionError(f"Поддерживаются только d ∈ {{1, 2}}, получено d = {dim}", {"dim": dim})
        return dim

    def parse_field(self, data: Mapping[str, Any]) -> NumberField:
        """Поле из ключа field; без ключа - поле рациональных чисел."""
        raw = data.get("field")
        if raw is None:
            return NumberField.rational()
        if not isinstance(raw, Mapping):
            raise SchemaError("field должен быть объектом")
        min_poly = self.require(raw, "min_poly")
        interval = self.require(raw, "root_interval")
        if not isinstance(min_poly, list) or not all(isinstance(c, int) and not isinstance(c, bool) for c in min_poly):
            raise SchemaError("min_poly должен быть списком целых коэффициентов", {"min_poly": min_poly})
        if not isinstance(interval, list) or len(interval) != 2:
            raise SchemaError("root_interval должен быть парой рациональных чисел", {"root_interval": interval})
        return NumberField(tuple(min_poly), (parse_rational(interval[0]), parse_rational(interval[1])))

    @staticmethod
    def digest(data: Mapping[str, Any]) -> str:
        """Хеш канонической JSON-формы документа."""
        canonical = json.dumps(data, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
