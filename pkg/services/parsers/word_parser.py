"""
Парсер подстановок на словах

    {"kind": "word", "name": "fibonacci_word", "images": {"a": "ab", "b": "a"}}
"""
import logging
from typing import Any, Mapping

from ..errors import SchemaError
from ..seqdyn import WordSubstitution
from .base_parser import BaseRuleParser


logger = logging.getLogger(__name__)


class WordRuleParser(BaseRuleParser):
    """Подстановка ζ: A → A⁺"""

    NAME = "word"
    DESCRIPTION = "Подстановка на словах для последовательностей"
    SUPPORTED_OPERATIONS = ["seq lang", "seq corr", "seq density", "seq union"]
    REQUIRED_KEYS = ("kind", "images")

    def parse(self, data: Mapping[str, Any], name: str = "rule") -> WordSubstitution:
        self.check_required(data)
        images = self.require(data, "images")
        if not isinstance(images, Mapping) or not images:
            raise SchemaError("images должен быть непустым объектом символ → слово")
        if not all(isinstance(v, str) for v in images.values()):
            raise SchemaError("Образы символов должны быть строками")
        zeta = WordSubstitution(
            tuple(images),
            tuple(images.values()),
            str(data.get("name", name)),
            self.digest(data),
        )
        logger.info(f"✅ Подстановка {zeta.name}: алфавит {''.join(zeta.alphabet)}")
        return zeta
