"""
Команды запрещенных полос: forbidden verify|search|grid
"""
import logging
from argparse import Namespace
from typing import Optional

import config
from services.errors import SchemaError
from services.exactnum import Vec, parse_rational
from services.spectra import (
    EigenReport,
    basis_candidates,
    basis_forbidden_verify,
    base_eigenvalues,
    eigen_verify,
    forbidden_patch_search,
    forbidden_verify,
)
from services.subst import Approximant

from .base_handler import (
    BaseHandler,
    CommandResult,
    envelope,
    load_rule,
    parse_patch,
    parse_scalar,
    parse_tol,
    parse_vec,
    parse_vec_list,
    radius2,
    require_tiling,
)


logger = logging.getLogger(__name__)


class ForbiddenHandler(BaseHandler):
    """Проверка сеток полос anchor + B(0, R₀) + Ker χ_a."""

    def _eigen(self, approx: Approximant, a: Vec, args: Namespace) -> Optional[EigenReport]:
        if args.skip_eigen:
            return None
        rule = approx.rule
        r2 = radius2(rule.field, args.R, None) or parse_scalar(rule.field, config.DEFAULT_RETURN_NORM2)
        return eigen_verify(approx, a, r2, args.N or config.DEFAULT_N, parse_tol(args.tol))

    def verify_command(self, args: Namespace) -> CommandResult:
        """forbidden verify RULE --a v --R0 r --p1 P --p2 Q --window W [--scale-m m]"""
        rule = require_tiling(load_rule(args.rule))
        if not args.a or not args.R0:
            raise SchemaError("Нужны --a и --R0")
        approx = self.approximant(rule, args)
        a = parse_vec(rule.field, args.a, rule.dim)
        r0_2 = radius2(rule.field, args.R0)
        window2 = radius2(rule.field, args.window, "32")
        eigen = self._eigen(approx, a, args)
        verdict = forbidden_verify(
            approx, a, parse_patch(rule, args.p1), parse_patch(rule, args.p2), r0_2, window2,
            scale_m=args.scale_m, eigen=eigen,
        )
        evidence = {"window2": window2.to_strings(), "eigen": eigen.verdict if eigen else "skipped"}
        return CommandResult(envelope("forbidden verify", rule, verdict.to_dict(), approx, evidence), rule=rule)

    def search_command(self, args: Namespace) -> CommandResult:
        """forbidden search RULE --patch P --x v --U u --a v --R r --window W"""
        rule = require_tiling(load_rule(args.rule))
        if not args.a or not args.U:
            raise SchemaError("Нужны --a и --U")
        approx = self.approximant(rule, args)
        a = parse_vec(rule.field, args.a, rule.dim)
        x = parse_vec(rule.field, args.x, rule.dim) if args.x else Vec(rule.field.zero() for _ in range(rule.dim))
        u2 = radius2(rule.field, args.U)
        lang_r2 = radius2(rule.field, args.lang_R, "1")
        window2 = radius2(rule.field, args.window, "32")
        eigen = self._eigen(approx, a, args)
        found = forbidden_patch_search(
            approx, parse_patch(rule, args.patch), x, u2, a, lang_r2, window2,
            check_cover=not args.no_cover_check, eigen=eigen,
        )
        result = {
            "status": "found" if found is not None else "not-found",
            "patch": [[t.proto, t.shift.to_strings()] for t in found.patch.sorted_tiles()] if found else None,
        }
        evidence = {"window2": window2.to_strings(), "lang_R2": lang_r2.to_strings(), "U2": u2.to_strings()}
        return CommandResult(envelope("forbidden search", rule, result, approx, evidence), rule=rule)

    def grid_command(self, args: Namespace) -> CommandResult:
        """
        forbidden grid RULE --R0 r --p1 P --p2 Q [--basis "a;b" | --eps e --k-max k]

        Без --basis базис подбирается из базовых собственных значений так,
        чтобы 8R₀ < 1/‖a‖ < (8 + ε)R₀.
        """
        rule = require_tiling(load_rule(args.rule))
        if not args.R0:
            raise SchemaError("Нужен --R0")
        approx = self.approximant(rule, args)
        r0_2 = radius2(rule.field, args.R0)
        window2 = radius2(rule.field, args.window, "32")
        eps = parse_rational(args.eps) if args.eps else None
        if args.basis:
            basis = parse_vec_list(rule.field, args.basis, rule.dim)
        else:
            if eps is None:
                raise SchemaError("Без --basis нужен рациональный --eps")
            r2 = radius2(rule.field, args.R, None) or parse_scalar(rule.field, config.DEFAULT_RETURN_NORM2)
            base = base_eigenvalues(approx, r2, args.N or config.DEFAULT_N, parse_tol(args.tol))
            basis = basis_candidates(approx, base, r0_2, eps, args.k_max)
        eigen = None if args.skip_eigen else [self._eigen(approx, a, args) for a in basis]
        verdict = basis_forbidden_verify(
            approx, basis, parse_patch(rule, args.p1), parse_patch(rule, args.p2), r0_2, window2,
            eps=eps, eigen=eigen,
        )
        result = {"basis": self.strings(basis), **verdict.to_dict()}
        return CommandResult(
            envelope("forbidden grid", rule, result, approx, {"window2": window2.to_strings()}), rule=rule
        )
