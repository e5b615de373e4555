"""
Парсеры файлов правил

Архитектура:
- BaseRuleParser - базовый класс для всех парсеров
- SubstitutionParser / PseudoSubstitutionParser - правила тайлингов
- WordRuleParser - подстановки на словах
- ParserFactory - фабрика для создания парсеров
- ParserRegistry - реестр доступных парсеров (ключ - kind)
"""
from .base_parser import BaseRuleParser
from .parser_factory import ParserFactory, ParserRegistry, load_document, load_path
from .tiling_parser import PseudoSubstitutionParser, SubstitutionParser
from .word_parser import WordRuleParser

__all__ = [
    "BaseRuleParser",
    "SubstitutionParser",
    "PseudoSubstitutionParser",
    "WordRuleParser",
    "ParserFactory",
    "ParserRegistry",
    "load_document",
    "load_path",
]
