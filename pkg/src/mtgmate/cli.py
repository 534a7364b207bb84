"""Command line: mtgmate {simulate,compile,run,solve,verify,report}."""
from __future__ import annotations

import argparse
import json
import sys

from . import compiler as C
from . import engine as E
from . import harness as H
from . import tm as T


def _print(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def _machine(arg):
    return H.load_reference_machine(arg)


def cmd_simulate(args):
    tm, cfg = _machine(args.machine)
    state = C.compile_machine(tm, cfg)
    trace = H.GameTrace(digests=args.digests)
    state.sink = trace.sink
    stats = H.RunStats()

    def refuse(st, dec, acts):
        raise H.ForcednessError(f"unforced point on turn {st.turn_number}: {[a.to_dict() for a in acts]}")

    target = cfg.steps_taken + args.steps
    H._play(state, refuse, lambda st: C.at_cycle_boundary(st) and st.meta["machine_steps"] >= target,
            args.step_budget, stats, trace)
    state.sink = None
    if args.trace:
        trace.write(args.trace)
    final = C.decode_board_tape(state)
    _print({"machine": tm.name, "cycles": final.steps_taken - cfg.steps_taken, "final": final.to_dict(),
            "game_over": state.game_over, "winner": state.winner, "turn": state.turn_number,
            "histogram": {str(k): v for k, v in sorted(stats.hist_post.items())}})
    return 0


def cmd_compile(args):
    if args.sentence:
        state = C.compile_mate_in_n(args.sentence, life=args.life)
    else:
        tm, cfg = _machine(args.machine)
        state = C.compile_machine(tm, cfg, life=args.life)
    report = C.audit(state)
    C.save_state(state, args.out)
    report_path = args.report or f"{args.out}.report.json"
    with open(report_path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    _print({"board": args.out, "report": report_path, "permanents": report.total_permanents,
            "watchers": report.watcher_count, "countdown": report.countdown, "passed": report.passed})
    return 0


def cmd_run(args):
    state = C.load_state(args.state)
    script = H.InputScript.parse(args.inputs)
    v = H.run_forced(state, script, max_turns=args.max_turns, step_budget=args.step_budget,
                     trace=bool(args.trace), digests=args.digests, mirror=args.mirror, x_bound=args.x_bound)
    if args.trace:
        v.trace.write(args.trace)
    out = v.to_dict()
    out["stats"].pop("turns")
    if state.meta.get("tag_symbols"):
        try:
            out["final"] = C.decode_board_tape(v.final).to_dict()
        except C.DecodeError as exc:
            out["final"] = str(exc)
    _print(out)
    return 0


def cmd_solve(args):
    state = C.load_state(args.state)
    if "sentence" not in state.meta:
        print("solve needs a board compiled from a sentence", file=sys.stderr)
        return 2
    r = H.solve_game(state, args.bound, explore_decline=args.explore_decline)
    out = r.to_dict()
    out["stats"].pop("turns")
    if not args.tree:
        out.pop("strategy")
    _print(out)
    return 0 if r.agreement and r.control_ok() else 1


def cmd_verify(args):
    tm, cfg = _machine(args.machine)
    r = H.verify_bisimulation(tm, cfg, args.cycles)
    _print(r.to_dict())
    return 0 if r.passed else 1


def cmd_report(args):
    from .report import write_report
    res = write_report(args.out, max_n=args.max_n, cycles=args.cycles)
    _print({"out": args.out, "fit": res["fit"], "files": res["files"]})
    return 0 if res["fit"]["r_squared"] > 0.99 else 1


def build_parser():
    p = argparse.ArgumentParser(prog="mtgmate", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a machine's zero-player board for K cycles")
    s.add_argument("--machine", required=True, help="machine file or bundled machine name")
    s.add_argument("--steps", type=int, required=True, help="machine cycles to play")
    s.add_argument("--trace", help="write the event trace here (JSON lines)")
    s.add_argument("--digests", action="store_true", help="add a state digest to every decision record")
    s.add_argument("--step-budget", type=int, default=5_000_000)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("compile", help="compile a sentence or machine into a board file")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--sentence", help='e.g. "E y1 A y2 : (y1*y2 - y2 = 0)"')
    g.add_argument("--machine", help="machine file or bundled machine name")
    s.add_argument("--out", required=True, help="board file to write")
    s.add_argument("--report", help="compilation report path (default OUT.report.json)")
    s.add_argument("--life", type=int, default=None, help="starting life for both players")
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("run", help="forced play of a board with scripted inputs")
    s.add_argument("--state", required=True)
    s.add_argument("--inputs", default="", help="comma-separated naturals, one per round")
    s.add_argument("--max-turns", type=int, default=2000)
    s.add_argument("--x-bound", type=int, default=None, help="stop once the search would try x > bound")
    s.add_argument("--mirror", choices=("cast", "decline"), default="cast")
    s.add_argument("--trace")
    s.add_argument("--digests", action="store_true")
    s.add_argument("--step-budget", type=int, default=5_000_000)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("solve", help="bounded minimax on a compiled sentence board")
    s.add_argument("--state", required=True)
    s.add_argument("--bound", type=int, required=True)
    s.add_argument("--explore-decline", action="store_true", help="also search Bob's Mirror decline")
    s.add_argument("--tree", action="store_true", help="print the strategy tree")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("verify", help="bisimulation against the reference interpreter")
    s.add_argument("--machine", required=True)
    s.add_argument("--cycles", type=int, required=True)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("report", help="figures and CSV tables")
    s.add_argument("--out", default="report")
    s.add_argument("--max-n", type=int, default=16)
    s.add_argument("--cycles", type=int, default=200)
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "life", 0) is None:
        args.life = C.DEFAULT_LIFE_BUFFER if args.sentence else 20
    try:
        return args.func(args)
    except (E.RulesError, C.DecodeError, C.CapacityError, C.AuditError, T.SentenceError,
            H.VerificationFailure, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
