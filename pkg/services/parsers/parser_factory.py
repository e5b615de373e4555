"""
Фабрика и реестр парсеров правил

Управляет созданием и регистрацией парсеров по виду правила (ключ kind)
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Type, Union

from ..errors import SchemaError
from ..seqdyn import WordSubstitution
from ..subst import SubstitutionRule
from .base_parser import BaseRuleParser
from .tiling_parser import PseudoSubstitutionParser, SubstitutionParser
from .word_parser import WordRuleParser


logger = logging.getLogger(__name__)

AnyRule = Union[SubstitutionRule, WordSubstitution]


class ParserRegistry:
    """
    Реестр доступных парсеров
    """

    _parsers: Dict[str, Type[BaseRuleParser]] = {}

    @classmethod
    def register(cls, parser_class: Type[BaseRuleParser]):
        """
        Регистрирует парсер

        Args:
            parser_class: Класс парсера
        """
        name = parser_class.NAME
        cls._parsers[name] = parser_class
        logger.debug(f"✅ Parser registered: {name}")

    @classmethod
    def get_parser_class(cls, name: str) -> Optional[Type[BaseRuleParser]]:
        return cls._parsers.get(name)

    @classmethod
    def list_parsers(cls) -> List[Dict[str, Any]]:
        """
        Возвращает список доступных парсеров

        Returns:
            Список словарей с информацией о парсерах
        """
        return [
            {
                "name": parser_class.NAME,
                "description": parser_class.DESCRIPTION,
                "version": parser_class.VERSION,
                "operations": parser_class.SUPPORTED_OPERATIONS,
            }
            for parser_class in cls._parsers.values()
        ]


class ParserFactory:
    """
    Фабрика для создания парсеров
    """

    @staticmethod
    def create_parser(name: Any) -> Optional[BaseRuleParser]:
        """
        Создает парсер

        Args:
            name: Вид правила (substitution, pseudo, word)

        Returns:
            Экземпляр парсера или None
        """
        parser_class = ParserRegistry.get_parser_class(name) if isinstance(name, str) else None

        if not parser_class:
            logger.error(f"❌ Parser not found: {name}")
            return None

        return parser_class()

    @staticmethod
    def list_available_parsers() -> List[Dict[str, Any]]:
        return ParserRegistry.list_parsers()


def load_document(document: str, name: str = "rule") -> AnyRule:
    """
    Разбирает текст файла правила любым зарегистрированным парсером

    Raises:
        SchemaError: Не JSON, не объект или неизвестный kind
    """
    try:
        data = json.loads(document)
    except json.JSONDecodeError as e:
        raise SchemaError(f"Файл правила не является JSON: {e}") from e
    if not isinstance(data, dict):
        raise SchemaError("Корень файла правила должен быть объектом")
    kind = data.get("kind")
    parser = ParserFactory.create_parser(kind)
    if parser is None:
        raise SchemaError(f"Неизвестный вид правила: {kind!r}", {"kind": kind})
    return parser.parse(data, name=name)


def load_path(path: Union[str, Path]) -> AnyRule:
    """Читает файл правила; каталожное имя без расширения дополняется .json."""
    path = Path(path)
    if not path.exists() and path.suffix != ".json":
        path = path.with_suffix(".json")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SchemaError(f"Не удалось прочитать файл правила: {path}", {"path": str(path)}) from e
    return load_document(text, name=path.stem)


# Регистрация встроенных парсеров
ParserRegistry.register(SubstitutionParser)
ParserRegistry.register(PseudoSubstitutionParser)
ParserRegistry.register(WordRuleParser)
