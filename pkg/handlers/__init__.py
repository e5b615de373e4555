"""
Обработчики команд CLI
"""
from .base_handler import ApproximantCache, CommandResult
from .forbidden_handler import ForbiddenHandler
from .history_handler import HistoryHandler
from .language_handler import LanguageHandler
from .render_handler import RenderHandler
from .rule_handler import RuleHandler
from .seq_handler import SeqHandler
from .spectra_handler import SpectraHandler

__all__ = [
    "ApproximantCache",
    "CommandResult",
    "RuleHandler",
    "LanguageHandler",
    "SpectraHandler",
    "ForbiddenHandler",
    "SeqHandler",
    "RenderHandler",
    "HistoryHandler",
]
