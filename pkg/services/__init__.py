"""
Сервисы движка тайлингов

- exactnum - точная арифметика в Q(θ), векторы, матрицы, окружность R/Z
- geometry - точные предикаты для многоугольников и интервалов
- tiling - плитки, патчи, ограничения на шары, канонизация
- subst - правила (псевдо)подстановок, затравки, аппроксиманты
- language - язык окон, вхождения, смещения, векторы возврата
- spectra - спектр φ, собственные значения, запрещенные полосы
- seqdyn - подстановки на словах и корреляционные множества
- render_service - SVG
"""
from .errors import TilingError
from .exactnum import FieldElement, NumberField, Vec
from .subst import Approximant, ApproximantBuilder, SubstitutionRule, find_seed, grow
from .seqdyn import WordSubstitution

__all__ = [
    "TilingError",
    "FieldElement",
    "NumberField",
    "Vec",
    "SubstitutionRule",
    "Approximant",
    "ApproximantBuilder",
    "find_seed",
    "grow",
    "WordSubstitution",
]
