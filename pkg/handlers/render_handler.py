"""
Команда render: патчи, супертайлы и сетки полос в SVG
"""
import logging
from argparse import Namespace

import config
from services.exactnum import parse_rational
from services.render_service import RenderSpec, overlays_from_verdicts, render_svg
from services.spectra import forbidden_verify

from .base_handler import (
    BaseHandler,
    CommandResult,
    envelope,
    load_rule,
    parse_patch,
    parse_vec_list,
    radius2,
    require_tiling,
)


logger = logging.getLogger(__name__)


class RenderHandler(BaseHandler):
    """SVG-рендеринг аппроксимантов."""

    def render_command(self, args: Namespace) -> CommandResult:
        """
        render RULE --level m [--a "a;b" --R0 r --p1 P --p2 Q] [--scale s]

        С --a и --R0 поверх патча рисуются сетки полос, прошедшие forbidden_verify.
        """
        rule = require_tiling(load_rule(args.rule))
        approx = self.approximant(rule, args)
        overlays = ()
        verdicts = []
        if args.a and args.R0:
            r0_2 = radius2(rule.field, args.R0)
            window2 = radius2(rule.field, args.window, "32")
            p1, p2 = parse_patch(rule, args.p1), parse_patch(rule, args.p2)
            for a in parse_vec_list(rule.field, args.a, rule.dim):
                verdicts.append(forbidden_verify(approx, a, p1, p2, r0_2, window2))
            overlays = overlays_from_verdicts(verdicts)
        spec = RenderSpec(scale=parse_rational(args.scale or config.RENDER_SCALE), overlays=overlays)
        svg = render_svg(approx.patch, spec)
        result = {
            "tiles": len(approx.patch),
            "overlays": len(overlays),
            "verdicts": [v.status for v in verdicts],
            "bits": config.RENDER_BITS,
        }
        return CommandResult(envelope("render", rule, result, approx), svg=svg, rule=rule)
