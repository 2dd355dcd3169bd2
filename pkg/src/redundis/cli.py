"""Command-line front end.

Exit codes: 0 success/verified, 1 verification failure (counterexample in
the report), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import netlist as nl
from .faults import find_counterexample, replay, tightness_patterns, verify_guarantee
from .library import module_by_name
from .metrics import INTERCONNECT_NOTE, UNIT_DELAY, DelayModel, compare, render_table, system_report
from .redundancy import RedundancyScheme, build, tolerance
from .reliability import ReliabilityCurve, analytic_reliability, curve, monte_carlo_reliability
from .table1 import FixtureError, load_table1, render_summary, table1_reductions

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def load_module(selector: str) -> nl.Netlist:
    if selector.endswith(".json") or os.path.exists(selector):
        try:
            with open(selector) as f:
                mod = nl.from_json(f.read())
        except OSError as e:
            raise UsageError(f"cannot read module netlist: {e}") from None
        issues = nl.validate(mod)
        if issues:
            raise UsageError(f"module netlist {selector} is invalid: {issues[0]}")
        return mod
    return module_by_name(selector)


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _system(args):
    return build(load_module(args.module), RedundancyScheme.parse(args.scheme))


def _delay_model(args) -> DelayModel:
    return DelayModel.from_file(args.delay_model) if getattr(args, "delay_model", None) else UNIT_DELAY


def cmd_gen(args) -> int:
    system = _system(args)
    summary = (f"{system.scheme.label}: {system.scheme.replicas} replicas of {system.golden_module.name}, "
               f"{len(system.golden_module.outputs)} voters ({system.voter_construction}), "
               f"{len(system.netlist.gates)} gates")
    _emit(nl.to_json(system.netlist), args.output)
    # keep stdout pure JSON when the netlist goes there
    print(summary, file=sys.stdout if args.output else sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    system = _system(args)
    if args.netlist:
        with open(args.netlist) as f:
            system = system.with_netlist(nl.from_json(f.read()))
    tol = tolerance(system.scheme)
    t0 = time.perf_counter()
    verdict = verify_guarantee(system, workers=args.workers)
    card, pats = tightness_patterns(system.scheme)
    witness = find_counterexample(system, card, pats)
    elapsed = time.perf_counter() - t0
    report = {
        "scheme": str(system.scheme),
        "module": system.golden_module.name,
        "conditional_total": tol.conditional_total,
        "total_guaranteed": tol.total_guaranteed,
        "guarantee": verdict.to_dict(),
        "tightness": {
            "cardinality": card,
            "witness": None if witness is None else witness.to_dict(),
            "replays": None if witness is None else list(replay(system, witness)),
        },
        "seconds": round(elapsed, 3),
    }
    if verdict.counterexample is not None:
        report["guarantee"]["replay"] = list(replay(system, verdict.counterexample))
    if args.format == "json":
        _emit(json.dumps(report, indent=1), args.output)
    else:
        lines = [
            f"{system.scheme.label} around {system.golden_module.name}",
            f"  guarantee (conditional tolerance {tol.conditional_total}): "
            f"{'VERIFIED' if verdict.verified else 'VIOLATED'} over {verdict.patterns_checked} patterns "
            f"x {verdict.inputs_per_pattern} inputs ({verdict.mode})",
        ]
        if verdict.counterexample:
            lines.append(f"  counterexample: {verdict.counterexample.to_json()}")
        lines.append(f"  tightness at {card} faults: " + ("witness " + witness.to_json() if witness else "NO WITNESS"))
        _emit("\n".join(lines), args.output)
    if not verdict.verified:
        return EXIT_FAIL
    return EXIT_OK if witness is not None else EXIT_FAIL


def _reports_out(rows: list[dict], args, columns):
    if args.format == "json":
        _emit(json.dumps(rows, indent=1), args.output)
    else:
        _emit(f"# {INTERCONNECT_NOTE}\n" + render_table(rows, columns), args.output)


METRIC_COLUMNS = ["name", "modules", "gate_count", "weighted_area", "critical_path_delay", "adp", "voter_construction", "normalization"]


def cmd_metrics(args) -> int:
    system = _system(args)
    rep = system_report(system, _delay_model(args), normalization=args.normalization)
    _reports_out([rep.to_dict()], args, METRIC_COLUMNS)
    return EXIT_OK


def cmd_compare(args) -> int:
    mod = load_module(args.module)
    model = _delay_model(args)
    base = system_report(build(mod, RedundancyScheme.parse(args.baseline)), model, normalization=args.normalization)
    cand = system_report(build(mod, RedundancyScheme.parse(args.candidate)), model, normalization=args.normalization)
    row = compare(base, cand)
    if args.format == "json":
        _emit(json.dumps({"baseline": base.to_dict(), "candidate": cand.to_dict(), "comparison": row.to_dict()}, indent=1), args.output)
    else:
        text = render_table([base.to_dict(), cand.to_dict()], METRIC_COLUMNS) + "\n\n" + render_table([row.to_dict()], floatfmt="{:.2f}")
        _emit(f"# {INTERCONNECT_NOTE}\n" + text, args.output)
    return EXIT_OK


def _parse_r(spec: str) -> tuple[float, float, int] | float:
    try:
        parts = spec.split(":")
        if len(parts) == 1:
            return float(parts[0])
        if len(parts) == 3:
            return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        pass
    raise UsageError(f"--r must be <r> or <min>:<max>:<steps>, got {spec!r}")


def cmd_reliability(args) -> int:
    scheme = RedundancyScheme.parse(args.scheme)
    target = build(load_module(args.module), scheme) if args.mode == "circuit" else scheme
    rs = _parse_r(args.r)
    if isinstance(rs, float):
        if args.mode == "analytic":
            c = ReliabilityCurve(str(scheme), "analytic", [(rs, analytic_reliability(scheme, rs))], [0.0])
        else:
            res = monte_carlo_reliability(target, rs, args.trials, args.mode, args.seed, behavior=args.behavior)
            c = ReliabilityCurve(str(scheme), args.mode, [(rs, res.estimate)], [res.half_width], args.seed, args.trials,
                                 res.behavior)
    else:
        c = curve(target, *rs, mode=args.mode, trials=args.trials, seed=args.seed, behavior=args.behavior)
    _emit(c.to_json() if args.format == "json" else c.to_csv(), args.output)
    return EXIT_OK


def cmd_paper_table(args) -> int:
    text = None
    if args.fixture:
        with open(args.fixture) as f:
            text = f.read()
    try:
        summary = table1_reductions(load_table1(text))
    except FixtureError as e:
        raise UsageError(f"malformed fixture: {e}") from None
    _emit(json.dumps(summary.to_dict(), indent=1) if args.format == "json" else render_summary(summary), args.output)
    return EXIT_OK


def cmd_export_verilog(args) -> int:
    target = _system(args).netlist if args.scheme else load_module(args.module)
    exp = nl.export_structural_verilog(target)
    _emit(exp.text, args.output)
    for old, new in exp.renamed:
        print(f"renamed {old!r} -> {new!r}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="redundis", description="NMR / DMMR fault-tolerance workbench")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scheme=True):
        if scheme:
            sp.add_argument("--scheme", required=True, help="nmr:<odd n> or dmmr:3of<m>")
        sp.add_argument("--module", default="braun4", help="braun4, braun:<w>, fulladder or a netlist JSON path")
        sp.add_argument("-o", "--output", help="write to this file instead of stdout")

    sp = sub.add_parser("gen", help="build a redundant system netlist")
    common(sp)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("verify", help="exhaustively verify the masking guarantee and its tightness")
    common(sp)
    sp.add_argument("--netlist", help="system netlist JSON replacing the generated one")
    sp.add_argument("--format", choices=["json", "table"], default="table")
    sp.add_argument("--workers", type=int, default=None, help="worker processes (default: $REDUNDIS_THREADS or 1)")
    sp.set_defaults(func=cmd_verify)

    for name, fn in (("metrics", cmd_metrics), ("compare", cmd_compare)):
        sp = sub.add_parser(name, help="area / delay / ADP" if name == "metrics" else "compare two schemes")
        common(sp, scheme=name == "metrics")
        if name == "compare":
            sp.add_argument("--baseline", required=True)
            sp.add_argument("--candidate", required=True)
        sp.add_argument("--delay-model", help="JSON file with per-kind delays")
        sp.add_argument("--normalization", choices=["two-input", "wide-gates"], default="two-input")
        sp.add_argument("--format", choices=["json", "table"], default="table")
        sp.set_defaults(func=fn)

    sp = sub.add_parser("reliability", help="system reliability vs module reliability")
    common(sp)
    sp.add_argument("--mode", choices=["analytic", "guarantee", "circuit"], default="analytic")
    sp.add_argument("--r", default="0:1:101", help="<r> or <min>:<max>:<steps>")
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--behavior", choices=["inverted", "stuck0", "stuck1"], default="inverted")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.set_defaults(func=cmd_reliability)

    sp = sub.add_parser("paper-table", help="ADP reductions from the bundled published figures")
    sp.add_argument("--fixture", help="alternative fixture CSV")
    sp.add_argument("--format", choices=["json", "table"], default="table")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_paper_table)

    sp = sub.add_parser("export-verilog", help="structural Verilog for a module or system")
    sp.add_argument("--scheme", help="export the redundant system instead of the bare module")
    sp.add_argument("--module", default="braun4")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_export_verilog)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
