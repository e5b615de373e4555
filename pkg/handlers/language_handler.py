"""
Команды языка тайлинга: lang, occ, disp, legal, returns
"""
import csv
import io
import logging
from argparse import Namespace

from services.exactnum import Vec
from services.language import (
    displacement_set,
    is_legal,
    language_at,
    occurrences,
    period_probe,
    repetitivity_gaps,
    return_vectors,
)
from services.tiling import canonicalize

from .base_handler import (
    BaseHandler,
    CommandResult,
    envelope,
    load_rule,
    parse_patch,
    parse_vec,
    radius2,
    require_tiling,
)


logger = logging.getLogger(__name__)


def _vec_csv(vectors) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    dim = len(vectors[0]) if vectors else 0
    writer.writerow([f"x_{k}" for k in range(dim)])
    for v in vectors:
        writer.writerow([" ".join(c) for c in v.to_strings()])
    return buffer.getvalue()


class LanguageHandler(BaseHandler):
    """Окна, вхождения, смещения и векторы возврата."""

    def lang_command(self, args: Namespace) -> CommandResult:
        """lang RULE --R r --level m [--compare] - Π_{T,R,A}"""
        rule = require_tiling(load_rule(args.rule))
        r2 = radius2(rule.field, args.R, "1")
        approx = self.approximant(rule, args)
        previous = self.cache.approximant(rule, args.level - 1) if args.compare and args.level > 1 else None
        language = language_at(approx, r2, previous)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["entry", "proto_index", "shift"])
        for i, entry in enumerate(language.entries):
            for t in entry.patch.sorted_tiles():
                writer.writerow([i, t.proto, ";".join(" ".join(c) for c in t.shift.to_strings())])
        return CommandResult(
            envelope("lang", rule, language.to_dict(), approx, {"R2": r2.to_strings()}),
            csv=buffer.getvalue(),
            rule=rule,
        )

    def occ_command(self, args: Namespace) -> CommandResult:
        """occ RULE --patch P --window W [--gaps] - сдвиги вхождений"""
        rule = require_tiling(load_rule(args.rule))
        approx = self.approximant(rule, args)
        window2 = radius2(rule.field, args.window, "4")
        patch = parse_patch(rule, args.patch)
        found = sorted(occurrences(approx, patch, window2), key=Vec.key)
        result = {"count": len(found), "shifts": self.strings(found)}
        if args.gaps:
            result["repetitivity"] = repetitivity_gaps(approx, patch, window2).to_dict()
        return CommandResult(
            envelope("occ", rule, result, approx, {"window2": window2.to_strings()}),
            csv=_vec_csv(found),
            rule=rule,
        )

    def disp_command(self, args: Namespace) -> CommandResult:
        """disp RULE --p1 P --p2 Q --window W - D(p1, p2)"""
        rule = require_tiling(load_rule(args.rule))
        approx = self.approximant(rule, args)
        window2 = radius2(rule.field, args.window, "4")
        p1 = canonicalize(parse_patch(rule, args.p1))
        p2 = canonicalize(parse_patch(rule, args.p2))
        shifts = displacement_set(approx, p1, p2, window2, verify=args.verify)
        return CommandResult(
            envelope("disp", rule, shifts.to_dict(), approx, {"window2": window2.to_strings()}),
            csv=_vec_csv(shifts.sorted_shifts()),
            rule=rule,
        )

    def legal_command(self, args: Namespace) -> CommandResult:
        """legal RULE --patch P --level m - поиск сдвига до уровня m"""
        rule = require_tiling(load_rule(args.rule))
        patch = parse_patch(rule, args.patch)
        verdict = is_legal(self.cache.builder(rule), patch, args.level)
        report = envelope("legal", rule, verdict.to_dict(), evidence={"max_level": args.level})
        report["level"] = verdict.level
        return CommandResult(report, rule=rule)

    def returns_command(self, args: Namespace) -> CommandResult:
        """returns RULE --R r --level m [--period z] - векторы возврата"""
        rule = require_tiling(load_rule(args.rule))
        approx = self.approximant(rule, args)
        r2 = radius2(rule.field, args.R, "8")
        found = sorted(return_vectors(approx, r2), key=Vec.key)
        result = {"count": len(found), "vectors": self.strings(found)}
        if args.period:
            z = parse_vec(rule.field, args.period, rule.dim)
            window2 = radius2(rule.field, args.window, "4")
            result["period_probe"] = {"z": z.to_strings(), "periodic": period_probe(approx, z, window2)}
        return CommandResult(
            envelope("returns", rule, result, approx, {"return_norm2": r2.to_strings()}),
            csv=_vec_csv(found),
            rule=rule,
        )
