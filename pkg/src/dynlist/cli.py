"""Command-line entry point.

Subcommands: ``run`` a scenario file, ``fuzz`` seeded scenarios,
``bench`` a workload matrix, ``corpus`` the adversarial suite.  Exit
codes: 0 all verdicts pass, 1 a verdict failed, 2 the input could not be
parsed or validated.  Diagnostics go to stderr; reports go to stdout or
to ``--out``, and report paths also render a figure next to the output
file.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from .engine import SimParams, run_scenario
from .graph import RoundValidationError
from .messages import EncodingParams
from .oracle import check_round
from .protocols import PROTOCOLS, ProtocolError
from .scenario_io import Scenario, ScenarioFormatError, dumps_scenario, dumps_trace, load_scenario
from .workload import GenParams, GenerationError, adversarial_corpus, gen_scenario, run_fuzz

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_INPUT = 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dynlist",
        description="simulate and verify one-round subgraph-listing protocols on dynamic graphs",
    )
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario file and write its trace")
    run_p.add_argument("scenario", help="path to a scenario JSON file")
    run_p.add_argument("--out", help="trace output path (default: stdout)")
    run_p.add_argument("--plot", action="store_true",
                       help="also render a bandwidth figure next to --out")

    fuzz_p = sub.add_parser("fuzz", help="run many seeded scenarios and summarize verdicts")
    fuzz_p.add_argument("--proto", default="clique", choices=sorted(PROTOCOLS))
    fuzz_p.add_argument("--seeds", type=int, default=50)
    fuzz_p.add_argument("--rounds", type=int, default=50)
    fuzz_p.add_argument("--n0", type=int, default=None,
                        help="initial node count (default: drawn per seed from 5..20)")
    fuzz_p.add_argument("--density", type=float, default=0.35)
    fuzz_p.add_argument("--c", type=int, default=4, help="per-node incidence bound for batched rounds")
    fuzz_p.add_argument("--s", type=int, default=4, help="clique size for derived listings")
    fuzz_p.add_argument("--id-bits", type=int, default=32, dest="id_bits")
    fuzz_p.add_argument("--count-bits", type=int, default=8, dest="count_bits")
    fuzz_p.add_argument("--seed", type=int, default=0, help="base seed; seed i runs scenario base+i")
    fuzz_p.add_argument("--json", action="store_true")
    fuzz_p.add_argument("--out", help="write the summary to this path instead of stdout")

    bench_p = sub.add_parser("bench", help="time a workload matrix (no correctness gating)")
    bench_p.add_argument("--protos", default=",".join(sorted(PROTOCOLS)),
                         help="comma-separated protocols; empty for an empty matrix")
    bench_p.add_argument("--n0-list", default="10,20", dest="n0_list",
                         help="comma-separated initial node counts")
    bench_p.add_argument("--rounds", type=int, default=40)
    bench_p.add_argument("--json", action="store_true")
    bench_p.add_argument("--out", help="CSV output path; also renders a throughput figure")

    corpus_p = sub.add_parser("corpus", help="replay the adversarial suite")
    corpus_p.add_argument("--out", help="directory to write one trace file per case")
    corpus_p.add_argument("--json", action="store_true")
    return p


def _scenario_sim_params(sc: Scenario) -> SimParams:
    return sc.params


def cmd_run(args) -> int:
    try:
        sc = load_scenario(args.scenario)
    except OSError as e:
        print(f"error: cannot read {args.scenario}: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ScenarioFormatError as e:
        print(f"error: {args.scenario}: {e}", file=sys.stderr)
        return EXIT_INPUT
    try:
        trace = run_scenario(sc.initial, sc.rounds, sc.protocol, sc.params)
    except (RoundValidationError, ProtocolError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    text = dumps_trace(trace)
    if args.out:
        out = Path(args.out)
        out.write_text(text, encoding="utf-8")
        if args.plot:
            from . import plotting

            plotting.save_bandwidth_figure(trace, out.with_suffix(".png"))
    else:
        sys.stdout.write(text)
    if not trace.all_pass:
        bad = [r.round_index for r in trace.reports if r.verdict is None or not r.verdict.passed]
        print(f"verdict failure in round(s) {bad}", file=sys.stderr)
        return EXIT_VERDICT
    return EXIT_OK


def cmd_fuzz(args) -> int:
    sim = SimParams(s=args.s, c=args.c,
                    encoding=EncodingParams(id_bits=args.id_bits, count_bits=args.count_bits))
    try:
        summary = run_fuzz(args.proto, seeds=args.seeds, rounds=args.rounds,
                           n0=args.n0, density=args.density, c=args.c, s=args.s,
                           base_seed=args.seed, sim=sim)
    except (GenerationError, RoundValidationError, ProtocolError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    if args.json:
        text = json.dumps(summary.to_dict(), sort_keys=True, indent=1) + "\n"
    else:
        d = summary.to_dict()
        text = (f"proto={d['protocol']} seeds={d['seeds']} passed={d['passed']} "
                f"failed={d['failed']} max_message_bits={d['max_message_bits']} "
                f"rounds={d['rounds_total']} elapsed={d['elapsed_sec']}s\n")
        if summary.failures:
            f = summary.failures[0]
            text += f"first failure: seed={f.seed} round={f.round_index} {f.detail}\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK if summary.ok else EXIT_VERDICT


def _bench_rows(protos: list[str], n0s: list[int], rounds: int) -> list[dict]:
    rows = []
    for proto in protos:
        for n0 in n0s:
            p = GenParams(seed=1, protocol=proto, n0=n0, rounds=rounds, density=0.3)
            g0, rnds = gen_scenario(p)
            sim = SimParams(c=p.c)
            t0 = time.perf_counter()
            trace = run_scenario(g0, rnds, proto, sim, verify=False)
            t_engine = time.perf_counter() - t0
            t0 = time.perf_counter()
            # verification timed separately so the oracle share is visible
            g = g0.copy()
            from .graph import apply_round

            for rep, r in zip(trace.reports[1:], rnds):
                g = apply_round(g, r)
                check_round(rep, g, proto, sim)
            t_oracle = time.perf_counter() - t0
            total = t_engine + t_oracle
            rows.append({
                "protocol": proto,
                "n0": n0,
                "rounds": len(trace.reports),
                "rounds_per_sec": round(len(trace.reports) / total, 1) if total > 0 else float("inf"),
                "oracle_share": round(t_oracle / total, 3) if total > 0 else 0.0,
            })
    return rows


def cmd_bench(args) -> int:
    protos = [x for x in args.protos.split(",") if x]
    for x in protos:
        if x not in PROTOCOLS:
            print(f"error: unknown protocol {x!r}", file=sys.stderr)
            return EXIT_INPUT
    n0s = [int(x) for x in args.n0_list.split(",") if x] if protos else []
    rows = _bench_rows(protos, n0s, args.rounds)
    if args.json:
        text = json.dumps(rows, sort_keys=True, indent=1) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["protocol", "n0", "rounds", "rounds_per_sec", "oracle_share"])
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    if args.out:
        out = Path(args.out)
        out.write_text(text, encoding="utf-8")
        if rows:
            from . import plotting

            plotting.save_bench_figure(rows, out.with_suffix(".png"))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_corpus(args) -> int:
    failures = 0
    results = []
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    for case in adversarial_corpus():
        sc = case.scenario
        trace = run_scenario(sc.initial, sc.rounds, sc.protocol, sc.params)
        ok = trace.all_pass
        results.append({"name": case.name, "protocol": sc.protocol, "pass": ok})
        if out_dir:
            (out_dir / f"{case.name}.trace.json").write_text(dumps_trace(trace), encoding="utf-8")
            (out_dir / f"{case.name}.scenario.json").write_text(dumps_scenario(sc), encoding="utf-8")
        if not ok:
            failures += 1
    if args.json:
        print(json.dumps(results, sort_keys=True, indent=1))
    else:
        for r in results:
            print(f"{'PASS' if r['pass'] else 'FAIL'}  {r['name']} ({r['protocol']})")
    return EXIT_OK if failures == 0 else EXIT_VERDICT


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "run": cmd_run,
        "fuzz": cmd_fuzz,
        "bench": cmd_bench,
        "corpus": cmd_corpus,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
