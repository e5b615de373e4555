"""
Команды правил: rule validate|seed|grow, catalog list
"""
import json
import logging
from argparse import Namespace

import config
from services.errors import SchemaError
from services.render_service import RenderSpec, render_svg
from services.seqdyn import seq_primitive
from services.subst import (
    SubstitutionRule,
    expanding_check,
    find_seed,
    primitivity_check,
    rule_flc_probe,
    support_bound_check,
)
from services.tiling import patch_to_csv

from .base_handler import (
    BaseHandler,
    CommandResult,
    envelope,
    load_rule,
    parse_scalar,
    require_tiling,
)


logger = logging.getLogger(__name__)


class RuleHandler(BaseHandler):
    """Проверка, затравки и рост аппроксимантов."""

    def validate_command(self, args: Namespace) -> CommandResult:
        """
        rule validate RULE - разбор, примитивность, оценка носителя
        """
        rule = load_rule(args.rule)
        if not isinstance(rule, SubstitutionRule):
            result = {"summary": rule.summary(), "primitive": seq_primitive(rule)}
            return CommandResult(envelope("rule validate", rule, result), rule=rule)

        result = {
            "summary": rule.summary(),
            "primitivity": primitivity_check(rule).to_dict(),
            "support_bound": support_bound_check(rule, args.depth),
        }
        if args.flc:
            r2_list = [parse_scalar(rule.field, r) ** 2 for r in args.flc.split(",")]
            result["flc"] = [probe.to_dict() for probe in rule_flc_probe(rule, r2_list, args.depth)]
        logger.info(f"✅ Правило {rule.name} валидно")
        return CommandResult(envelope("rule validate", rule, result, evidence={"depth": args.depth}), rule=rule)

    def seed_command(self, args: Namespace) -> CommandResult:
        """rule seed RULE [--max-n] [--expanding]"""
        rule = require_tiling(load_rule(args.rule))
        max_n = args.max_n or config.MAX_SEED_N
        seed = find_seed(rule, max_n, expanding=args.expanding)
        result = {"seed": seed.to_dict(), "proto_name": rule.proto_names[seed.proto]}
        if args.check_levels:
            result["expanding"] = expanding_check(rule, seed, args.check_levels).to_dict()
        evidence = {"max_n": max_n, "expanding_filter": args.expanding}
        return CommandResult(envelope("rule seed", rule, result, evidence=evidence), rule=rule)

    def grow_command(self, args: Namespace) -> CommandResult:
        """rule grow RULE --level m - аппроксимант ω^{nm}(P + x)"""
        rule = require_tiling(load_rule(args.rule))
        if args.level < 1:
            raise SchemaError("Уровень аппроксиманта должен быть ≥ 1", {"level": args.level})
        approx = self.approximant(rule, args)
        counts = [0] * rule.size
        for t in approx.patch.tiles:
            counts[t.proto] += 1
        result = {
            "tiles": len(approx.patch),
            "counts": {rule.proto_names[p]: c for p, c in enumerate(counts) if c},
        }
        svg = render_svg(approx.patch, RenderSpec()) if args.format == "svg" else None
        return CommandResult(
            envelope("rule grow", rule, result, approx),
            csv=patch_to_csv(approx.patch),
            svg=svg,
            rule=rule,
        )

    def catalog_command(self, args: Namespace) -> CommandResult:
        """catalog list - правила каталога с видом и объявленными свойствами"""
        entries = []
        for path in sorted(config.CATALOG_DIR.glob("*.json")):
            try:
                data = json.loads(path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as e:
                logger.error(f"❌ Не удалось прочитать {path.name}: {e}")
                continue
            entries.append({
                "file": path.stem,
                "name": data.get("name", path.stem),
                "kind": data.get("kind"),
                "dim": data.get("dim"),
                "metadata": data.get("metadata", {}),
            })
        return CommandResult(envelope("catalog list", None, {"rules": entries}))
