"""
Модуль управления базой данных
"""
from .db import Database

__all__ = ["Database"]

