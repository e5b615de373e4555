"""
Команды последовательностей: seq lang|corr|density|union
"""
import logging
from argparse import Namespace
from typing import Optional

import config
from services.errors import SchemaError
from services.seqdyn import (
    correlation_set,
    gap_density,
    seq_language,
    seq_primitive,
    union_gap_set,
)

from .base_handler import BaseHandler, CommandResult, envelope, load_rule, require_word


logger = logging.getLogger(__name__)


def _word(raw: Optional[str], flag: str) -> str:
    if not raw:
        raise SchemaError(f"Нужен аргумент {flag}", {"flag": flag})
    return raw


def _horizon(args: Namespace) -> int:
    return args.N if args.N is not None else config.DEFAULT_N


class SeqHandler(BaseHandler):
    """Язык и корреляционные множества подстановочных подсдвигов."""

    def lang_command(self, args: Namespace) -> CommandResult:
        """seq lang RULE --m m"""
        zeta = require_word(load_rule(args.rule))
        words = sorted(seq_language(zeta, args.m))
        result = {"m": args.m, "count": len(words), "words": words, "primitive": seq_primitive(zeta)}
        csv = "word\n" + "".join(f"{w}\n" for w in words)
        return CommandResult(envelope("seq lang", zeta, result), csv=csv, rule=zeta)

    def corr_command(self, args: Namespace) -> CommandResult:
        """seq corr RULE --w1 u --w2 v --N n"""
        zeta = require_word(load_rule(args.rule))
        horizon = _horizon(args)
        c = correlation_set(zeta, _word(args.w1, "--w1"), _word(args.w2, "--w2"), horizon)
        return CommandResult(
            envelope("seq corr", zeta, c.to_dict(), evidence={"N": horizon}), csv=c.to_csv(), rule=zeta
        )

    def density_command(self, args: Namespace) -> CommandResult:
        """seq density RULE --w1 u --w2 v --N n - плотность дополнения J(W₁, W₂)"""
        zeta = require_word(load_rule(args.rule))
        horizon = _horizon(args)
        c = correlation_set(zeta, _word(args.w1, "--w1"), _word(args.w2, "--w2"), horizon)
        result = {"w1": c.w1, "w2": c.w2, "N": c.horizon, **gap_density(c).to_dict()}
        return CommandResult(envelope("seq density", zeta, result, evidence={"N": horizon}), rule=zeta)

    def union_command(self, args: Namespace) -> CommandResult:
        """seq union RULE --w1 u --N n - J(W) по всем партнерам той же длины"""
        zeta = require_word(load_rule(args.rule))
        horizon = _horizon(args)
        union = union_gap_set(zeta, _word(args.w1, "--w1"), horizon)
        result = {**union.to_dict(), **gap_density(union.as_correlation()).to_dict()}
        return CommandResult(
            envelope("seq union", zeta, result, evidence={"N": horizon}),
            csv=union.as_correlation().to_csv(),
            rule=zeta,
        )
