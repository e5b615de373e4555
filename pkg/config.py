"""
Конфигурация движка тайлингов
"""
import logging
import os
from pathlib import Path
from dotenv import load_dotenv

# Загружаем переменные окружения
load_dotenv()

# Базовые пути
BASE_DIR = Path(__file__).parent
DATA_DIR = Path(os.getenv("AL_DATA_DIR", str(BASE_DIR / "data")))
CATALOG_DIR = BASE_DIR / "catalog"

# Лимиты
TILE_CAP = int(os.getenv("AL_TILE_CAP", "5000000"))
MAX_SEED_N = int(os.getenv("AL_MAX_SEED_N", "6"))

# Проверка собственных значений
DEFAULT_N = int(os.getenv("AL_DEFAULT_N", "40"))
DEFAULT_TOL_EXP = int(os.getenv("AL_DEFAULT_TOL_EXP", "20"))  # tol = 2^-20
DEFAULT_RETURN_NORM2 = os.getenv("AL_DEFAULT_RETURN_NORM2", "64")

# Рендеринг
RENDER_BITS = int(os.getenv("AL_RENDER_BITS", "24"))
RENDER_SCALE = os.getenv("AL_RENDER_SCALE", "20")

# Логи и история отчетов
LOG_LEVEL = os.getenv("AL_LOG_LEVEL", "WARNING").upper()
HISTORY_ENABLED = os.getenv("AL_HISTORY", "0") == "1"
DATABASE_PATH = Path(os.getenv("AL_DB_PATH", str(DATA_DIR / "reports.db")))

REPORT_SCHEMA = 1


# Валидация конфига
def validate_config():
    """Проверяет значения параметров"""
    errors = []
    warnings = []

    if TILE_CAP <= 0:
        errors.append("AL_TILE_CAP должен быть положительным")

    if MAX_SEED_N <= 0:
        errors.append("AL_MAX_SEED_N должен быть положительным")

    if DEFAULT_N <= 0:
        errors.append("AL_DEFAULT_N должен быть положительным")

    if DEFAULT_TOL_EXP <= 0:
        errors.append("AL_DEFAULT_TOL_EXP должен быть положительным")

    if RENDER_BITS < 8:
        errors.append("AL_RENDER_BITS должен быть не меньше 8")

    if LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        errors.append(f"Неизвестный AL_LOG_LEVEL: {LOG_LEVEL}")

    # Рекомендации
    if TILE_CAP > 50_000_000:
        warnings.append("⚠️ AL_TILE_CAP очень большой - аппроксиманты могут не поместиться в память")

    if not CATALOG_DIR.exists():
        warnings.append(f"⚠️ Каталог правил не найден: {CATALOG_DIR}")

    # Показываем предупреждения
    if warnings:
        logging.getLogger(__name__).warning("\n".join(warnings))

    if errors:
        raise ValueError("Ошибки конфигурации:\n" + "\n".join(f"- {e}" for e in errors))


if __name__ == "__main__":
    validate_config()
    print("✅ Конфигурация валидна!")
