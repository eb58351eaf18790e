"""Command-line interface: generate inputs, run simulations, solve, validate.

Exit codes are a stable scripting contract: 0 success or valid negative
answer, 1 usage/input error, 2 validation failure, 3 budget-exhausted
incumbent (a solution was found but optimality was not proven).
"""

from __future__ import annotations

import argparse
import logging
import os
import random
import sys
from dataclasses import replace
from fractions import Fraction

from . import metrics as metrics_mod
from .batch_solver import SolveBudget, build_mip, solve_exact
from .errors import VdcembedError
from .paths import enumerate_paths
from .scheduler import RUN_MODES, parse_policy_config, run_simulation
from .state import EmbeddingState
from .topology import (
    ResourceVector,
    build_fat_tree,
    dump_requests,
    dump_substrate,
    generate_vdc_request,
    load_requests,
    load_substrate,
    parse_workload_config,
    validate_request,
    validate_substrate,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_INCUMBENT = 3

OUT_DIR_ENV = "VDCEMBED_OUT"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    try:
        with open(path) as fp:
            return fp.read()
    except OSError as err:
        raise VdcembedError(f"cannot read {path}: {err}") from err


def _write(path: str, text: str):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w") as fp:
        fp.write(text)


def cmd_gen_topology(args) -> int:
    net = build_fat_tree(
        args.k,
        server_capacity=ResourceVector(cpu_cores=args.cpu_cores, memory_mb=args.memory_mb),
        switch_memory=args.switch_memory,
        bandwidth_profile=(args.bw_core_agg, args.bw_agg_edge, args.bw_edge_server),
        delay_profile=(args.delay_core_agg, args.delay_agg_edge, args.delay_edge_server),
    )
    _write(args.out, dump_substrate(net))
    print(f"wrote {args.out}: {len(net.servers)} servers, {len(net.switches)} switches")
    return EXIT_OK


def cmd_gen_workload(args) -> int:
    cfg = parse_workload_config(_read(args.config))
    seed = args.seed if args.seed is not None else cfg.seed
    requests = []
    if cfg.arrival_rate > 0:
        rng = random.Random(f"{seed}/arrivals")
        t = 0.0
        i = 0
        while True:
            t += rng.expovariate(cfg.arrival_rate / 100.0)
            if t > cfg.horizon:
                break
            req = replace(generate_vdc_request(cfg, t, f"{seed}/req/{i}"), id=f"r{i}")
            requests.append(req)
            i += 1
    _write(args.out, dump_requests(requests))
    print(f"wrote {args.out}: {len(requests)} requests over horizon {cfg.horizon:g}")
    return EXIT_OK


def _parse_lambdas(text: str) -> list[float]:
    if ":" in text:
        lo, hi = text.split(":")
        return [float(v) for v in range(int(lo), int(hi) + 1)]
    return [float(tok) for tok in text.split(",") if tok]


def cmd_run(args) -> int:
    # parse every referenced file before any work starts
    net = load_substrate(_read(args.substrate))
    workload = parse_workload_config(_read(args.workload))
    policy = parse_policy_config(_read(args.policy)) if args.policy else None
    if policy is None:
        from .scheduler import PolicyConfig

        policy = PolicyConfig()
    out_dir = os.environ.get(OUT_DIR_ENV, args.out)
    seed = args.seed if args.seed is not None else workload.seed
    lambdas = _parse_lambdas(args.lambdas) if args.lambdas else [workload.arrival_rate]

    table = enumerate_paths(net)
    records = []
    for lam in lambdas:
        records.extend(
            run_simulation(
                net,
                workload,
                policy,
                run_mode=args.mode,
                lam=lam,
                seed=seed,
                table=table,
                audit_every=args.audit_every,
            )
        )
    records = metrics_mod.resequence(records)
    report = metrics_mod.aggregate(records)
    paths = metrics_mod.write_csv(report, out_dir)
    _write(os.path.join(out_dir, "trace.log"), metrics_mod.serialize_trace(records))
    for row in report.rows:
        rate = "n/a" if row.rate is None else f"{row.rate:.4f}"
        print(f"lambda={row.lam:g} arrivals={row.arrivals} accepted={row.accepted} rate={rate}")
    print(f"wrote {', '.join(paths)} and trace.log under {out_dir}")
    return EXIT_OK


def cmd_solve(args) -> int:
    net = load_substrate(_read(args.substrate))
    requests = load_requests(_read(args.requests))
    if not requests:
        print("0 embedded (empty request set)")
        return EXIT_OK
    table = enumerate_paths(net)
    state = EmbeddingState(net, table)
    model = build_mip(
        state, requests, switch_penalty_divisor=Fraction(args.f), table=table
    )
    sol = solve_exact(model, SolveBudget(args.node_limit, args.wall_ms))
    if args.verbose:
        for line in sol.stats_lines():
            print(line, file=sys.stderr)
    if sol.status == "no-solution":
        print("no solution found within budget")
        return EXIT_INCUMBENT
    embedded = [rid for rid, a in sol.embedded.items() if a is not None]
    print(f"objective {float(sol.objective):.4f}")
    print(f"{len(embedded)} embedded of {len(requests)}")
    if args.out:
        lines = ["assignments 1"]
        for req in requests:
            a = sol.embedded.get(req.id)
            lines.append(f"embedded {req.id} {1 if a is not None else 0}")
        for req in requests:
            a = sol.embedded.get(req.id)
            if a is None:
                continue
            for vm_id, pm in a.vm_map.items():
                lines.append(f"assign vm {req.id} {vm_id} {pm}")
            for vs_id, ps in a.vswitch_map.items():
                lines.append(f"assign vswitch {req.id} {vs_id} {ps}")
            for vl_id, (pa, pb, n) in a.vlink_map.items():
                lines.append(f"assign vlink {req.id} {vl_id} {pa} {pb} {n}")
        _write(args.out, "\n".join(lines) + "\n")
        print(f"wrote {args.out}")
    return EXIT_OK if sol.optimal else EXIT_INCUMBENT


def _parse_assignment_file(text: str):
    from .state import Assignment

    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split() != ["assignments", "1"]:
        raise VdcembedError("bad assignment file header")
    embedded: dict[str, bool] = {}
    slots: dict[str, dict] = {}
    for raw in lines[1:]:
        parts = raw.split()
        if parts[0] == "embedded":
            embedded[parts[1]] = parts[2] == "1"
        elif parts[0] == "assign":
            slot = slots.setdefault(parts[2], {"vm": {}, "vswitch": {}, "vlink": {}})
            if parts[1] == "vm":
                slot["vm"][parts[3]] = parts[4]
            elif parts[1] == "vswitch":
                slot["vswitch"][parts[3]] = parts[4]
            elif parts[1] == "vlink":
                slot["vlink"][parts[3]] = (parts[4], parts[5], int(parts[6]))
            else:
                raise VdcembedError(f"bad assign record: {raw!r}")
        else:
            raise VdcembedError(f"bad assignment line: {raw!r}")
    return embedded, {
        rid: Assignment(rid, s["vm"], s["vswitch"], s["vlink"]) for rid, s in slots.items()
    }


def cmd_validate(args) -> int:
    net = load_substrate(_read(args.substrate))
    findings = validate_substrate(net)
    requests = []
    if args.requests:
        requests = load_requests(_read(args.requests))
        for req in requests:
            findings.extend(validate_request(req, net))
    problems = [str(f) for f in findings]

    if args.assignment:
        if not args.requests:
            print("--assignment requires --requests", file=sys.stderr)
            return EXIT_USAGE
        _, assignments = _parse_assignment_file(_read(args.assignment))
        table = enumerate_paths(net)
        state = EmbeddingState(net, table)
        by_id = {req.id: req for req in requests}
        for rid in assignments:
            if rid not in by_id:
                problems.append(f"[unknown-request] {rid}")
        for rid, a in assignments.items():
            if rid not in by_id:
                continue
            violations = state.check_assignment(by_id[rid], a, "allow-capacity-violations")
            if violations:
                problems.extend(f"{rid}: {v}" for v in violations)
            else:
                state.commit(by_id[rid], a)

    if problems:
        for p in problems:
            print(p, file=sys.stderr)
        print(f"{len(problems)} finding(s)", file=sys.stderr)
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="vdcembed", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="debug traces to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-topology", help="write a fat-tree substrate file", parents=[common])
    p.add_argument("--k", type=int, required=True, help="fat-tree arity (even)")
    p.add_argument("--out", required=True)
    p.add_argument("--cpu-cores", type=int, default=8)
    p.add_argument("--memory-mb", type=int, default=16384)
    p.add_argument("--switch-memory", type=int, default=100)
    p.add_argument("--bw-core-agg", type=int, default=10000)
    p.add_argument("--bw-agg-edge", type=int, default=1000)
    p.add_argument("--bw-edge-server", type=int, default=1000)
    p.add_argument("--delay-core-agg", type=int, default=1)
    p.add_argument("--delay-agg-edge", type=int, default=1)
    p.add_argument("--delay-edge-server", type=int, default=1)
    p.set_defaults(func=cmd_gen_topology)

    p = sub.add_parser("gen-workload", help="draw a request set from a workload config", parents=[common])
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_gen_workload)

    p = sub.add_parser("run", help="simulate arrivals/departures and write metrics CSVs", parents=[common])
    p.add_argument("--substrate", required=True)
    p.add_argument("--workload", required=True)
    p.add_argument("--policy", default=None)
    p.add_argument("--mode", choices=RUN_MODES, default="hybrid")
    p.add_argument("--out", required=True, help=f"output dir (env {OUT_DIR_ENV} overrides)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lambdas", default=None, help="sweep: '1:10' or '1,2.5,7'")
    p.add_argument("--audit-every", type=int, default=0)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("solve", help="one-shot batch embedding of a request file", parents=[common])
    p.add_argument("--substrate", required=True)
    p.add_argument("--requests", required=True)
    p.add_argument("--f", default="2", help="switch-move penalty divisor (rational)")
    p.add_argument("--node-limit", type=int, default=200000)
    p.add_argument("--wall-ms", type=int, default=0)
    p.add_argument("--out", default=None, help="assignment file to write")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="check substrate/request/assignment files", parents=[common])
    p.add_argument("--substrate", required=True)
    p.add_argument("--requests", default=None)
    p.add_argument("--assignment", default=None)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except VdcembedError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
