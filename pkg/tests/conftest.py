"""
Общие фикстуры: правила каталога и небольшие аппроксиманты
"""
from fractions import Fraction
from pathlib import Path

import pytest

import config
from services.exactnum import NumberField, Vec
from services.parsers import load_path
from services.subst import ApproximantBuilder, find_seed


FIXTURES = Path(__file__).parent / "fixtures"


def catalog_rule(name: str):
    return load_path(config.CATALOG_DIR / f"{name}.json")


def vec(field: NumberField, *values) -> Vec:
    """Вектор из рациональных значений или списков коэффициентов."""
    return Vec(field.parse(v) if not isinstance(v, Fraction) else field.scalar(v) for v in values)


@pytest.fixture(scope="session")
def square():
    return catalog_rule("square")


@pytest.fixture(scope="session")
def chair():
    return catalog_rule("chair")


@pytest.fixture(scope="session")
def fibonacci():
    return catalog_rule("fibonacci")


@pytest.fixture(scope="session")
def non_pisot():
    return catalog_rule("non_pisot_1d")


@pytest.fixture(scope="session")
def fibonacci_word():
    return catalog_rule("fibonacci_word")


@pytest.fixture(scope="session")
def periodic_word():
    return catalog_rule("periodic_word")


@pytest.fixture(scope="session")
def shear():
    return load_path(FIXTURES / "shear_nonflc.json")


@pytest.fixture(scope="session")
def square_builder(square):
    return ApproximantBuilder(square, find_seed(square, 4, expanding=True))


@pytest.fixture(scope="session")
def chair_builder(chair):
    return ApproximantBuilder(chair, find_seed(chair, 4, expanding=True))


@pytest.fixture(scope="session")
def fibonacci_builder(fibonacci):
    return ApproximantBuilder(fibonacci, find_seed(fibonacci, 6, expanding=True))
