"""
Главный файл CLI движка подстановочных тайлингов
"""
import argparse
import asyncio
import inspect
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

# Фикс кодировки для Windows
if sys.platform == "win32":
    try:
        import codecs
        sys.stdout = codecs.getwriter("utf-8")(sys.stdout.detach())
        sys.stderr = codecs.getwriter("utf-8")(sys.stderr.detach())
    except (AttributeError, OSError):
        pass

import config
from database import Database
from handlers import (
    ApproximantCache,
    CommandResult,
    ForbiddenHandler,
    HistoryHandler,
    LanguageHandler,
    RenderHandler,
    RuleHandler,
    SeqHandler,
    SpectraHandler,
)
from services.errors import TilingError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Ошибка разбора командной строки."""


class CliParser(argparse.ArgumentParser):
    """ArgumentParser, который не завершает процесс при ошибке разбора."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common_arguments() -> argparse.ArgumentParser:
    """Общие флаги всех команд."""
    common = CliParser(add_help=False)
    common.add_argument("--level", type=int, default=2, help="Уровень аппроксиманта m")
    common.add_argument("--out", help="Файл для --format")
    common.add_argument("--format", choices=("json", "csv", "svg"), default="json")

    window = common.add_argument_group("окна и радиусы")
    window.add_argument("--window", help="Радиус окна W")
    window.add_argument("--R", help="Радиус языка или векторов возврата")
    window.add_argument("--R0", help="Полуширина полосы R₀")
    window.add_argument("--U", help="Радиус области для forbidden search")
    window.add_argument("--lang-R", dest="lang_R", help="Радиус языка для forbidden search")

    spectral = common.add_argument_group("спектр")
    spectral.add_argument("--a", help="Кандидат: \"1/2,0\"; несколько через ';'")
    spectral.add_argument("--N", type=int, help="Число итераций")
    spectral.add_argument("--tol", help="Допуск вида 2^-k")
    spectral.add_argument("--height", type=int, default=4, help="Высота перебора коэффициентов")
    spectral.add_argument("--k-max", dest="k_max", type=int, default=3)
    spectral.add_argument("--targets", help="Множество F для eigen scan")
    spectral.add_argument("--eps", help="ε")
    spectral.add_argument("--basis", help="Базис для forbidden grid")
    spectral.add_argument("--scale-m", dest="scale_m", type=int, default=0)
    spectral.add_argument("--skip-eigen", dest="skip_eigen", action="store_true")
    spectral.add_argument("--full", action="store_true", help="Выводить последовательности по z")

    patches = common.add_argument_group("патчи")
    patches.add_argument("--patch", help="Патч \"name@x,y;name@x,y\"")
    patches.add_argument("--p1")
    patches.add_argument("--p2")
    patches.add_argument("--x", help="Сдвиг области для forbidden search")
    patches.add_argument("--no-cover-check", dest="no_cover_check", action="store_true")
    patches.add_argument("--verify", action="store_true", help="Пересобирать объединения смещений")
    patches.add_argument("--gaps", action="store_true", help="Отчет о повторяемости")
    patches.add_argument("--period", help="Проверить вектор как период окна")
    patches.add_argument("--compare", action="store_true", help="Сравнить язык с уровнем m - 1")

    rules = common.add_argument_group("правила")
    rules.add_argument("--depth", type=int, default=2)
    rules.add_argument("--flc", help="Радиусы для FLC-пробы через запятую")
    rules.add_argument("--max-n", dest="max_n", type=int)
    rules.add_argument("--expanding", action="store_true", help="Требовать начало координат внутри затравки")
    rules.add_argument("--check-levels", dest="check_levels", type=int, default=0)
    rules.add_argument("--scale", help="Пикселей на единицу для render")

    seq = common.add_argument_group("последовательности")
    seq.add_argument("--m", type=int, default=2)
    seq.add_argument("--w1")
    seq.add_argument("--w2")

    history = common.add_argument_group("история")
    history.add_argument("--digest")
    history.add_argument("--filter")
    history.add_argument("--limit", type=int, default=20)
    history.add_argument("--stats", action="store_true")
    return common


class TilingApp:
    """Главный класс CLI"""

    def __init__(self):
        self.db = Database(config.DATABASE_PATH)
        self.cache = ApproximantCache()

        # Инициализируем обработчики
        self.rule_handler = RuleHandler(self.cache)
        self.language_handler = LanguageHandler(self.cache)
        self.spectra_handler = SpectraHandler(self.cache)
        self.forbidden_handler = ForbiddenHandler(self.cache)
        self.seq_handler = SeqHandler(self.cache)
        self.render_handler = RenderHandler(self.cache)
        self.history_handler = HistoryHandler(self.db)

        self.routes: Dict[Tuple[str, ...], Callable] = {}
        self.parser = self._build_parser()

    def _register(self, sub, path: Tuple[str, ...], handler: Callable, common, help_text: str, with_rule: bool = True):
        leaf = sub.add_parser(path[-1], parents=[common], help=help_text)
        if with_rule:
            leaf.add_argument("rule", help="Файл правила или имя в каталоге")
        leaf.set_defaults(route=path)
        self.routes[path] = handler

    def _build_parser(self) -> CliParser:
        """Регистрирует все команды"""
        common = _common_arguments()
        parser = CliParser(prog="tiling", description="Точные вычисления для подстановочных тайлингов")
        verbs = parser.add_subparsers(dest="verb", parser_class=CliParser)
        verbs.required = True

        rule = verbs.add_parser("rule", help="Правила").add_subparsers(dest="action", parser_class=CliParser)
        rule.required = True
        self._register(rule, ("rule", "validate"), self.rule_handler.validate_command, common, "Проверка правила")
        self._register(rule, ("rule", "seed"), self.rule_handler.seed_command, common, "Затравка неподвижной точки")
        self._register(rule, ("rule", "grow"), self.rule_handler.grow_command, common, "Аппроксимант")

        catalog = verbs.add_parser("catalog", help="Каталог").add_subparsers(dest="action", parser_class=CliParser)
        catalog.required = True
        self._register(catalog, ("catalog", "list"), self.rule_handler.catalog_command, common, "Список правил",
                       with_rule=False)

        # Язык
        for name, handler, text in (
            ("lang", self.language_handler.lang_command, "Язык окон"),
            ("occ", self.language_handler.occ_command, "Вхождения патча"),
            ("disp", self.language_handler.disp_command, "Множество смещений"),
            ("legal", self.language_handler.legal_command, "Проверка легальности"),
            ("returns", self.language_handler.returns_command, "Векторы возврата"),
            ("render", self.render_handler.render_command, "SVG"),
        ):
            self._register(verbs, (name,), handler, common, text)

        spec = verbs.add_parser("spec", help="Спектр φ").add_subparsers(dest="action", parser_class=CliParser)
        spec.required = True
        self._register(spec, ("spec", "analyze"), self.spectra_handler.analyze_command, common, "Анализ спектра")

        eigen = verbs.add_parser("eigen", help="Собственные значения").add_subparsers(dest="action", parser_class=CliParser)
        eigen.required = True
        self._register(eigen, ("eigen", "verify"), self.spectra_handler.verify_command, common, "Проверка a")
        self._register(eigen, ("eigen", "scan"), self.spectra_handler.scan_command, common, "Поиск собственных значений")

        forbidden = verbs.add_parser("forbidden", help="Запрещенные полосы").add_subparsers(
            dest="action", parser_class=CliParser
        )
        forbidden.required = True
        self._register(forbidden, ("forbidden", "verify"), self.forbidden_handler.verify_command, common, "Одна полоса")
        self._register(forbidden, ("forbidden", "search"), self.forbidden_handler.search_command, common, "Поиск патча")
        self._register(forbidden, ("forbidden", "grid"), self.forbidden_handler.grid_command, common, "Сетка по базису")

        seq = verbs.add_parser("seq", help="Последовательности").add_subparsers(dest="action", parser_class=CliParser)
        seq.required = True
        self._register(seq, ("seq", "lang"), self.seq_handler.lang_command, common, "Язык L_{ζ,m}")
        self._register(seq, ("seq", "corr"), self.seq_handler.corr_command, common, "Корреляционное множество")
        self._register(seq, ("seq", "density"), self.seq_handler.density_command, common, "Плотность пропусков")
        self._register(seq, ("seq", "union"), self.seq_handler.union_command, common, "Объединение по партнерам")

        self._register(verbs, ("history",), self.history_handler.history_command, common, "История отчетов",
                       with_rule=False)
        return parser

    def _dispatch(self, args: argparse.Namespace) -> CommandResult:
        handler = self.routes[args.route]
        result = handler(args)
        if inspect.iscoroutine(result):
            result = asyncio.run(result)
        return result

    def _emit(self, args: argparse.Namespace, result: CommandResult) -> None:
        """JSON в stdout; --format csv|svg пишется в --out или в stdout вместо JSON."""
        report_text = json.dumps(result.report, ensure_ascii=False, indent=2) + "\n"
        payload: Optional[bytes] = None
        if args.format == "csv":
            if result.csv is None:
                raise UsageError(f"Команда {' '.join(args.route)} не поддерживает --format csv")
            payload = result.csv.encode("utf-8")
        elif args.format == "svg":
            if result.svg is None:
                raise UsageError(f"Команда {' '.join(args.route)} не поддерживает --format svg")
            payload = result.svg

        if args.out:
            Path(args.out).write_bytes(payload if payload is not None else report_text.encode("utf-8"))
            if payload is not None:
                sys.stdout.write(report_text)
        elif payload is not None:
            if hasattr(sys.stdout, "buffer"):
                sys.stdout.flush()
                sys.stdout.buffer.write(payload)
            else:
                sys.stdout.write(payload.decode("utf-8"))
        else:
            sys.stdout.write(report_text)

    def _store(self, args: argparse.Namespace, result: CommandResult) -> None:
        if not config.HISTORY_ENABLED or args.route == ("history",):
            return

        async def save():
            await self.db.init_db()
            digest = None
            if result.rule is not None:
                digest = result.rule.digest
                await self.db.ensure_rule(digest, result.rule.name, getattr(result.rule, "kind", "word"),
                                          result.rule.summary())
            params = {k: v for k, v in vars(args).items() if k != "route" and v not in (None, False)}
            await self.db.add_report(" ".join(args.route), result.report, result.exit_code, digest, params)

        try:
            asyncio.run(save())
        except Exception as e:
            logger.error(f"❌ Не удалось сохранить отчет в историю: {e}")

    def run(self, argv: Optional[List[str]] = None) -> int:
        """
        Разбирает аргументы и выполняет команду

        Returns:
            0 - успех, 1 - ошибка предметной области (JSON в stdout), 2 - ошибка использования
        """
        try:
            args = self.parser.parse_args(argv)
        except UsageError as e:
            sys.stderr.write(f"{self.parser.prog}: error: {e}\n")
            return EXIT_USAGE
        except SystemExit as e:
            return int(e.code or 0)

        try:
            result = self._dispatch(args)
            self._emit(args, result)
        except TilingError as e:
            logger.error(f"❌ {e.code}: {e.message}")
            error = {"schema": config.REPORT_SCHEMA, "command": " ".join(args.route), **e.to_dict()}
            sys.stdout.write(json.dumps(error, ensure_ascii=False, indent=2) + "\n")
            self._store(args, CommandResult(error, EXIT_DOMAIN))
            return EXIT_DOMAIN
        except UsageError as e:
            sys.stderr.write(f"{self.parser.prog}: error: {e}\n")
            return EXIT_USAGE

        self._store(args, result)
        return result.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    """Точка входа"""
    logging.basicConfig(
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        level=getattr(logging, config.LOG_LEVEL, logging.WARNING),
        stream=sys.stderr,
    )
    try:
        config.validate_config()
    except ValueError as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE
    return TilingApp().run(argv)


if __name__ == "__main__":
    sys.exit(main())
