"""
Спектральные команды: spec analyze, eigen verify|scan
"""
import logging
from argparse import Namespace

import config
from services.errors import SchemaError
from services.spectra import (
    base_eigenvalues,
    eigen_candidates,
    eigen_verify,
    lattice_generators,
    spectrum_analyze,
)

from .base_handler import (
    BaseHandler,
    CommandResult,
    envelope,
    load_rule,
    parse_scalar,
    parse_tol,
    parse_vec,
    parse_vec_list,
    radius2,
    require_tiling,
)


logger = logging.getLogger(__name__)


class SpectraHandler(BaseHandler):
    """Спектр φ и собственные значения по векторам возврата."""

    def analyze_command(self, args: Namespace) -> CommandResult:
        """spec analyze RULE"""
        rule = require_tiling(load_rule(args.rule))
        report = spectrum_analyze(rule)
        return CommandResult(envelope("spec analyze", rule, report.to_dict(), evidence={"eps_bits": 26}), rule=rule)

    def verify_command(self, args: Namespace) -> CommandResult:
        """eigen verify RULE --a v [--R r] [--N n] [--tol 2^-k] [--level m]"""
        rule = require_tiling(load_rule(args.rule))
        if not args.a:
            raise SchemaError("Нужен кандидат --a")
        a = parse_vec(rule.field, args.a, rule.dim)
        approx = self.approximant(rule, args)
        r2 = radius2(rule.field, args.R, None) or parse_scalar(rule.field, config.DEFAULT_RETURN_NORM2)
        report = eigen_verify(approx, a, r2, args.N or config.DEFAULT_N, parse_tol(args.tol))
        return CommandResult(envelope("eigen verify", rule, report.to_dict(full=args.full), approx), rule=rule)

    def scan_command(self, args: Namespace) -> CommandResult:
        """
        eigen scan RULE - базовые собственные значения и их (φ*)^{-k}-образы

        С --targets и --eps вместо этого ищется ε-близкое множество кандидатов.
        """
        rule = require_tiling(load_rule(args.rule))
        approx = self.approximant(rule, args)
        r2 = radius2(rule.field, args.R, None) or parse_scalar(rule.field, config.DEFAULT_RETURN_NORM2)
        horizon = args.N or config.DEFAULT_N
        tol = parse_tol(args.tol)
        evidence = {"return_norm2": r2.to_strings(), "N": horizon, "tol": str(tol), "height": args.height}
        base = base_eigenvalues(approx, r2, horizon, tol, args.height)

        if args.targets:
            if not args.eps:
                raise SchemaError("Для --targets нужен --eps")
            targets = parse_vec_list(rule.field, args.targets, rule.dim)
            eps = parse_scalar(rule.field, args.eps)
            matches = eigen_candidates(
                approx, targets, eps, args.k_max, base=base, return_norm2=r2,
                horizon=horizon, tol=tol, height=args.height,
            )
            result = {"base": self.strings(base), "matches": [m.to_dict() for m in matches]}
            return CommandResult(envelope("eigen scan", rule, result, approx, evidence), rule=rule)

        family = []
        for k in range(args.k_max + 1):
            for b, a in zip(base, lattice_generators(rule, base, k)):
                verdict = eigen_verify(approx, a, r2, horizon, tol)
                family.append({"k": k, "b": b.to_strings(), **verdict.to_dict()})
        result = {"base": self.strings(base), "family": family}
        return CommandResult(envelope("eigen scan", rule, result, approx, evidence), rule=rule)
