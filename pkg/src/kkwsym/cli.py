"""Command line: ``kkwsym verify``, ``kkwsym trace-eval``, ``kkwsym gen-data``."""

from __future__ import annotations

import argparse
import sys

from . import boundary as bdm
from . import lichnerowicz as lich
from .clifford import CliffordOperator
from .datafile import DataError, generate, load_file
from .dsl import DslError, Env, evaluate
from .report import Report
from .scalar import Poly, parse_poly
from .symbols import SphereMode

PHI_TARGETS = [f"phi:{c}:{p}" for c in bdm.CASES for p in bdm.PAIRS]
TARGETS = ["thm11", "thm12", "thm13", "lichnerowicz", "inverse", "all"] + PHI_TARGETS


class UsageError(Exception):
    pass


def _boundary_data(args, n):
    if args.data:
        data = load_file(args.data)
        if not isinstance(data, bdm.BoundaryData):
            raise UsageError("this target needs boundary data (kind = boundary)")
        if data.n != n:
            raise UsageError(f"this target needs n = {n}, data has n = {data.n}")
        return data
    return bdm.random_boundary_data(args.seed, n)


def _check_dim(args, n):
    if args.dim is not None and args.dim != n:
        raise UsageError(f"target {args.target} runs in dimension {n}, not {args.dim}")


def _symbol_text(s) -> str:
    return "0" if s.is_zero() else f"nonzero symbol ({len(s.terms)} pole orders)"


# -- targets --------------------------------------------------------------


def _boundary_report(args, target) -> Report:
    _check_dim(args, 4)
    pair = "star" if target == "thm11" else "square"
    mode = SphereMode(args.mode)
    bd = _boundary_data(args, 4)
    rep = Report(args.target, mode.value, args.seed)
    phi = bdm.compute_boundary_total(pair, bd, mode, args.sigma2)
    for case in bdm.CASES:
        rep.add(bdm.PHI_LABELS[case], phi.values[case], phi.targets[case])
    if pair == "square":
        other = bdm.compute_boundary_total("star", bd, mode, args.sigma2)
        for case in bdm.CASES:
            rep.add(f"{bdm.PHI_LABELS[case]}_pairing_agreement", phi.values[case], other.values[case])
    pt, ps = phi.printed_total, phi.printed_parts_sum
    rep.add("printed_total", pt)
    rep.add("printed_parts_sum", ps)
    if mode is SphereMode.PAPER:
        expected = pt if args.strict == "total" else ps
        basis = "printed total" if args.strict == "total" else "sum of printed parts"
        rep.add("recomputed_total", phi.total, expected, f"judged against the {basis}")
    else:
        rep.add("recomputed_total", phi.total)
    if not phi.printed_total_consistent:
        diff = pt - ps
        rep.notes.append(f"printed total differs from the sum of printed parts by {diff.text()}")
    coeff = bdm.compute_interior("T11" if pair == "star" else "T12")
    want = parse_poly("(-4/3)*K") if pair == "star" else parse_poly("(-4/3)*K + (-8)*gradV2")
    rep.add("interior_coefficient_32pi2", coeff, want)
    return rep


def _psi3d(args) -> Report:
    _check_dim(args, 3)
    bd = _boundary_data(args, 3)
    rep = Report(args.target, args.mode, args.seed)
    want = parse_poly("(4*i)*pi^2")
    rep.add("Psi", bdm.compute_psi_3d(bd, SphereMode(args.mode)), want)
    rep.add("Psi_axis_vector", bdm.compute_psi_3d(bdm.axis_data(3), SphereMode(args.mode)), want)
    return rep


def _phi(args) -> Report:
    _, case, pair = args.target.split(":")
    _check_dim(args, 4)
    mode = SphereMode(args.mode)
    bd = _boundary_data(args, 4)
    rep = Report(args.target, mode.value, args.seed)
    v = bdm.compute_phi(case, pair, bd, mode, args.sigma2)
    rep.add(bdm.PHI_LABELS[case], v, bdm.printed_part(case) if mode is SphereMode.PAPER else None)
    return rep


def _lichnerowicz(args) -> Report:
    n = args.dim or 4
    if args.data:
        g = load_file(args.data)
        if not isinstance(g, lich.GeometryData):
            raise UsageError("lichnerowicz needs geometry data (kind = geometry)")
        if args.dim is not None and g.n != args.dim:
            raise UsageError(f"data has n = {g.n}, not {args.dim}")
        n = g.n
    else:
        if n < 3:
            raise UsageError("lichnerowicz needs n >= 3")
        g = lich.gen_geometry(args.seed, n)
    rep = Report(args.target, args.mode, args.seed)
    zero = Poly.const(0)
    for ident, diff in lich.check_all(g).items():
        rep.add(ident.value, diff, zero)
    if n % 2 == 0:
        for kind in ("star", "square"):
            got = lich.wres_interior(kind, n)
            rep.add(f"wres_{kind}", got, _wres_closed_form(kind, n))
    return rep


def _wres_closed_form(kind, n):
    # (n-2)(4π)^(n/2)/((n/2-1)!) · 2^n · (-K/12 - (n-2)/4 gradV2)
    from fractions import Fraction

    body = parse_poly("(-1/12)*K")
    if kind == "square":
        body = body - Poly.sym("gradV2") * Fraction(n - 2, 4)
    return lich.interior_prefactor(n) * body * (1 << n)


def _inverse(args) -> Report:
    n = args.dim or 4
    bd = _boundary_data(args, n)
    rep = Report(args.target, args.mode, args.seed)
    zero = Poly.const(0)
    for which in ("DV", "DVstar"):
        res = bdm.verify_symbol_inverse(bd, which)
        rep.add(f"{which}_leading_residual", _symbol_text(res.leading) if not res.leading.is_zero() else zero, zero)
        rep.add(f"{which}_order0_residual", _symbol_text(res.order0) if not res.order0.is_zero() else zero, zero)
        rep.add(f"{which}_order0_corrupted", _symbol_text(res.order0_corrupted), note="negative control, must be nonzero")
        if res.order0_corrupted.is_zero():
            rep.notes.append(f"{which}: corrupted second symbol went undetected")
            rep.add(f"{which}_negative_control", "undetected", zero)
    return rep


def _all(args) -> Report:
    rep = Report("all", args.mode, args.seed)
    for t in ("thm11", "thm12", "thm13", "lichnerowicz", "inverse"):
        sub = argparse.Namespace(**{**vars(args), "target": t, "dim": None, "data": None})
        rep.extend(run_target(sub), t)
    return rep


def run_target(args) -> Report:
    t = args.target
    if t in ("thm11", "thm12"):
        return _boundary_report(args, t)
    if t == "thm13":
        return _psi3d(args)
    if t == "lichnerowicz":
        return _lichnerowicz(args)
    if t == "inverse":
        return _inverse(args)
    if t == "all":
        return _all(args)
    if t in PHI_TARGETS:
        return _phi(args)
    raise UsageError(f"unknown target {t!r}; choose from {', '.join(TARGETS)}")


def run_verify(target: str, **flags) -> tuple[Report, int]:
    """Programmatic ``verify``: flags as in the command line, with underscores."""
    defaults = dict(mode="paper", dim=None, data=None, seed=0, strict="parts", sigma2="closed", expand=None)
    unknown = set(flags) - set(defaults)
    if unknown:
        raise UsageError(f"unknown flags {sorted(unknown)}")
    args = argparse.Namespace(target=target, **{**defaults, **flags})
    rep = run_target(args)
    return rep, rep.exit_code


# -- commands -------------------------------------------------------------


def cmd_verify(args) -> int:
    rep = run_target(args)
    out = rep.render(args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
        print(f"{rep.status}: report written to {args.output}")
    else:
        sys.stdout.write(out)
    return rep.exit_code


def _show_operator(op: CliffordOperator) -> str:
    s = op.is_scalar()
    if s is not None:
        return f"({s.text()}) * id"
    lines = [f"operator on 2^{op.n} dimensions, {op.nnz()} nonzero entries"]
    for r in sorted(op.rows):
        for c in sorted(op.rows[r]):
            lines.append(f"  [{r},{c}] {op.rows[r][c].text()}")
    return "\n".join(lines)


def cmd_trace_eval(args) -> int:
    data = load_file(args.data) if args.data else None
    if data is None and args.dim is None:
        args.dim = 4
    try:
        env = Env.from_data(data, args.dim)
    except ValueError as e:
        raise UsageError(str(e)) from None
    val = evaluate(args.expr, env, args.expand)
    if isinstance(val, CliffordOperator):
        print(_show_operator(val))
    else:
        print(val.latex() if args.latex else val.text())
    return 0


def cmd_gen_data(args) -> int:
    if args.dim < (3 if args.kind == "geometry" else 2):
        raise UsageError("dimension too small")
    sys.stdout.write(generate(args.seed, args.dim, args.kind))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kkwsym", description="Exact boundary residue verifier.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="recompute a target and compare with reference values")
    v.add_argument("target", help=", ".join(TARGETS))
    v.add_argument("--mode", choices=[m.value for m in SphereMode], default="paper", help="sphere integration convention")
    v.add_argument("--dim", type=int)
    v.add_argument("--data")
    v.add_argument("--seed", type=int, default=0, help="seed for generated data")
    v.add_argument("--format", choices=["text", "json", "latex"], default="text")
    v.add_argument("--output", help="write the report here instead of stdout")
    g = v.add_mutually_exclusive_group()
    g.add_argument("--strict-parts", dest="strict", action="store_const", const="parts", help="judge the total against the sum of printed parts (default)")
    g.add_argument("--strict-total", dest="strict", action="store_const", const="total", help="judge the total against the printed total")
    v.add_argument("--sigma2", choices=bdm.SYMBOL_SOURCES, default="closed", help="source of the order -2 symbol")
    v.add_argument("--expand", type=int, help="accepted for symmetry with trace-eval")
    v.set_defaults(func=cmd_verify, strict="parts")

    t = sub.add_parser("trace-eval", help="evaluate a Clifford expression")
    t.add_argument("expr")
    t.add_argument("--dim", type=int)
    t.add_argument("--data")
    t.add_argument("--expand", type=int, help="expand sum[j](...) macros up to this index")
    t.add_argument("--latex", action="store_true")
    t.set_defaults(func=cmd_trace_eval)

    d = sub.add_parser("gen-data", help="emit a random admissible data document")
    d.add_argument("--seed", type=int, required=True)
    d.add_argument("--dim", type=int, required=True)
    d.add_argument("--kind", choices=["boundary", "geometry"], default="boundary")
    d.set_defaults(func=cmd_gen_data)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        return args.func(args)
    except (UsageError, DataError, DslError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
