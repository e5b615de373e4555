"""
Ошибки движка тайлингов

Все доменные ошибки наследуются от TilingError и умеют сериализоваться
в машиночитаемый JSON (его печатает CLI при коде выхода 1).
"""
from typing import Any, Dict, Optional


class TilingError(Exception):
    """
    Базовая доменная ошибка

    Attributes:
        code: Короткий код ошибки
        details: Дополнительные данные для отчета
    """

    code: str = "TilingError"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": self.code,
            "message": self.message,
            "details": self.details,
        }


# === ARITHMETIC ===

class DivisionByZero(TilingError):
    """Обращение нулевого элемента поля"""
    code = "DivisionByZero"


class FieldError(TilingError):
    """Координата не лежит в объявленном поле или поле задано неверно"""
    code = "FieldError"


# === RULE FILES ===

class SchemaError(TilingError):
    """Файл правила не соответствует схеме"""
    code = "SchemaError"


class DimensionError(TilingError):
    """Размерность вне {1, 2}"""
    code = "DimensionError"


# === GEOMETRY / PATCHES ===

class OverlapError(TilingError):
    """Внутренности двух плиток пересекаются"""
    code = "OverlapError"


class InvalidUnion(TilingError):
    code = "InvalidUnion"


class EmptyPatch(TilingError):
    code = "EmptyPatch"


# === SUBSTITUTIONS ===

class NoSeedFound(TilingError):
    """Не найдено затравки неподвижной точки до max_n"""
    code = "NoSeedFound"


class ResourceLimit(TilingError):
    """Превышен лимит числа плиток (AL_TILE_CAP)"""
    code = "ResourceLimit"


# === LANGUAGE / SPECTRA ===

class InsufficientCoverage(TilingError):
    """Окно выходит за покрытую аппроксимантом область"""
    code = "InsufficientCoverage"


class InsufficientOccurrences(TilingError):
    code = "InsufficientOccurrences"


class PhaseTooSpread(TilingError):
    """Фазы вхождений занимают дугу не короче 1/4"""
    code = "PhaseTooSpread"


class PreconditionFailed(TilingError):
    code = "PreconditionFailed"


class NoBaseEigenvalues(TilingError):
    code = "NoBaseEigenvalues"


class NoMatch(TilingError):
    """Для точки нет ε-близкого кандидата"""
    code = "NoMatch"


# === WORDS ===

class NotStabilized(TilingError):
    code = "NotStabilized"


class WordNotInLanguage(TilingError):
    code = "WordNotInLanguage"
