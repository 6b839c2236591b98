"""Command-line entry point: ``tightham <subcommand> ...``.

Exit codes: 0 success, 1 verification rejected, 2 an algorithmic stage
failed, 3 invalid input.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .connector import ConnectionRequest, ConnectorConfig, check_paths, connect_all
from .errors import (CertificationFailure, InternalVerificationFailure, InvalidInput, StageFailure,
                     TightHamError, TooLarge)
from .exposure import ExposureConfig, ExposureLedger, round_key, solve_q_double_prime, split_explicit
from .hypergraph import Hypergraph, canonical, dumps_edgelist, read_edgelist, write_edgelist
from .oracle import verify_tight_cycle, verify_tight_path
from .pipeline import (SCHEMA_VERSION, PipelineConfig, RunReport, eps_from_p,
                       find_disjoint_tight_cycles, find_tight_hamilton_cycle)
from .reservoir import build_reservoir_graph, certify_density

OK, REJECTED, STAGE_FAILED, INVALID = 0, 1, 2, 3
MAX_EXPECTED_EDGES = 10 ** 8

REPORT_FIELDS = {"schema_version": int, "success": bool, "seed": int, "n": int, "r": int,
                 "mode": str, "stages": list, "counts": dict, "timings": dict}


def validate_report(d: dict) -> dict:
    for key, kind in REPORT_FIELDS.items():
        if key not in d or not isinstance(d[key], kind):
            raise InternalVerificationFailure(f"report field {key!r} missing or not {kind.__name__}")
    if d["success"] != (d.get("cycle") is not None or d.get("cycles") is not None):
        raise InternalVerificationFailure("report success flag disagrees with its cycles")
    return d


def _dump_json(obj, path) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("TIGHTHAM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise InvalidInput(f"TIGHTHAM_SEED={env!r} is not an integer") from None


# ---------------------------------------------------------------------------
# gen / split / reservoir

def sample_gnp(n: int, r: int, p: float, seed: int) -> Hypergraph:
    """G^(r)(n, p): a binomial edge count, then that many distinct uniform r-sets."""
    total = math.comb(n, r)
    if total * p > MAX_EXPECTED_EDGES:
        raise TooLarge(f"about {total * p:.3g} expected edges; use lazy mode instead")
    rng = np.random.default_rng([seed & (2 ** 63 - 1), 0x6E4])
    g = Hypergraph(n, r)
    if p <= 0 or total == 0:
        return g
    if total <= 2 * 10 ** 6:
        combos = np.array(list(itertools.combinations(range(n), r)), dtype=np.int64).reshape(-1, r)
        keep = rng.random(combos.shape[0]) < p
        g.add_edges(map(tuple, combos[keep].tolist()))
        return g
    m = int(rng.binomial(total, p))
    seen: set[tuple[int, ...]] = set()
    while len(seen) < m:
        batch = np.sort(np.array([rng.choice(n, r, replace=False) for _ in range(m - len(seen))]), axis=1)
        for row in batch.tolist():
            seen.add(tuple(row))
            if len(seen) == m:
                break
    g.add_edges(sorted(seen))
    return g


def cmd_gen(args) -> int:
    g = sample_gnp(args.n, args.r, args.p, _seed(args))
    if args.out:
        write_edgelist(g, args.out)
    else:
        sys.stdout.write(dumps_edgelist(g))
    return OK


def cmd_split(args) -> int:
    g = read_edgelist(args.graph)
    total = math.comb(g.n, g.r)
    q = args.q if args.q is not None else g.num_edges() / total
    if args.q_prime is not None:
        qp = args.q_prime
    else:
        qp = (1.0 - (1.0 - q) ** 0.2) * (1.0 - 1e-9)
    qpp = solve_q_double_prime(q, qp)
    parts, _ = split_explicit(g, q, qp, qpp, _seed(args))
    prefix = args.out or args.graph
    for i, part in enumerate(parts, 1):
        write_edgelist(part, f"{prefix}.g{i}")
    _dump_json({"seed": _seed(args), "q": q, "q_prime": qp, "q_double_prime": qpp,
                "edges": [p.num_edges() for p in parts]}, f"{prefix}.split.json")
    return OK


def cmd_reservoir(args) -> int:
    rg = build_reservoir_graph(args.r, args.ell, args.k)
    write_edgelist(rg.H_star, args.out)
    c = rg.core
    side = {"r": args.r, "ell": args.ell, "k": rg.k, "w_star": rg.w_star, "u": list(rg.u), "v": list(rg.v),
            "groups": {"U": list(c.U), "V": list(c.V), "A": [list(a) for a in c.A], "B": [list(b) for b in c.B]},
            "blocks": {k: list(v) for k, v in rg.blocks.items()},
            "path_with": rg.path_with, "path_without": rg.path_without}
    code = OK
    if args.eps is not None:
        try:
            side["certificate"] = certify_density(rg, args.eps).as_dict()
        except CertificationFailure as exc:
            side["certificate"] = {"failed": exc.clause, "message": str(exc)}
            code = REJECTED
    _dump_json(side, f"{args.out}.json")
    return code


# ---------------------------------------------------------------------------
# connect / solve / factor

def _exposure_for(args, seed: int) -> ExposureLedger:
    rnd = args.round
    if args.graph:
        g = read_edgelist(args.graph)
        cfg = ExposureConfig(g.n, g.r, seed, [1.0] * 5, mode="explicit-graph", graphs=[g] * 5)
    else:
        if args.n is None or args.p is None:
            raise InvalidInput("lazy mode needs --n and --p")
        probs = [1.0] * 5
        probs[rnd - 1] = args.p
        cfg = ExposureConfig(args.n, args.r, seed, probs)
    return ExposureLedger(cfg)


def cmd_connect(args) -> int:
    seed = _seed(args)
    request = json.loads(Path(args.request).read_text())
    ledger = _exposure_for(args, seed)
    n, r = ledger.cfg.n, ledger.cfg.r
    req = ConnectionRequest([tuple(map(tuple, p)) for p in request["pairs"]], request["X"], args.round,
                            request.get("target_lengths"))
    p = args.p if args.p is not None else 1.0
    eps = args.eps if args.eps is not None else eps_from_p(n, p)
    over = {k: getattr(args, k) for k in ("xi", "c_min", "c_max", "max_fan_levels") if getattr(args, k) is not None}
    if args.width is not None:
        over["width_target"] = args.width
    delta = args.delta if args.delta is not None else len(req.X) / n
    cfg = ConnectorConfig(r, eps, delta=delta, mode=args.mode, early_exit_bridge=args.early_exit_bridge, **over)
    res = connect_all(req, ledger, cfg, seed=seed)
    out = res.as_dict()
    out["seed"] = seed
    out["schema_version"] = SCHEMA_VERSION
    rl_app = set(ledger.round(args.round).appeared_edges())
    test = lambda e: canonical(e) in rl_app  # noqa: E731
    bad = [i for i, path in enumerate(res.paths) if not verify_tight_path(test, path, r)]
    bad_contract = check_paths(req, res.paths, r, None if req.target_lengths else cfg.path_cap(n))
    out["verified"] = not bad and not bad_contract
    _dump_json(out, args.out)
    if bad or bad_contract:
        return REJECTED
    return OK if res.success else STAGE_FAILED


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(n=args.n, r=args.r, eps=args.eps, p=args.p, mode=args.mode, seed=_seed(args),
                          reservoir_count=args.reservoir_count, gadget_ell=args.ell,
                          greedy_stop=args.greedy_stop)


def _graph_arg(args) -> Hypergraph | None:
    if args.graph and args.lazy:
        raise InvalidInput("--graph and --lazy are exclusive")
    return read_edgelist(args.graph) if args.graph else None


def _finish(report: RunReport, args, cycles: list[list[int]] | None) -> int:
    d = validate_report(report.as_dict())
    if args.report:
        _dump_json(d, args.report)
    if cycles is not None and args.cycle_out:
        Path(args.cycle_out).write_text("".join(" ".join(map(str, c)) + "\n" for c in cycles))
    if not report.success:
        f = report.failure or {}
        print(f"stage {f.get('stage')} failed: {f.get('message')}", file=sys.stderr)
        return STAGE_FAILED
    return OK


def _solve_args_fix(args) -> None:
    if args.graph:
        g = read_edgelist(args.graph)
        if args.n is None:
            args.n = g.n
        if args.r is None:
            args.r = g.r
        if args.p is None and args.eps is None:
            args.p = g.num_edges() / math.comb(g.n, g.r)
    if args.r is None:
        args.r = 3
    if args.n is None:
        raise InvalidInput("--n is required without --graph")


def cmd_solve(args) -> int:
    _solve_args_fix(args)
    cfg = _pipeline_config(args)
    report = find_tight_hamilton_cycle(cfg, _graph_arg(args))
    if args.edges_out and report.cycle is not None:
        _write_cycle_edges(report.cycle, cfg.r, cfg.n, args.edges_out)
    return _finish(report, args, None if report.cycle is None else [report.cycle])


def cmd_factor(args) -> int:
    _solve_args_fix(args)
    cfg = _pipeline_config(args)
    report = find_disjoint_tight_cycles(cfg, _ints(args.lengths), _graph_arg(args))
    if args.edges_out and report.cycles is not None:
        edges = set()
        for c in report.cycles:
            edges |= _cyclic_edges(c, cfg.r)
        write_edgelist(Hypergraph(cfg.n, cfg.r, sorted(edges)), args.edges_out)
    return _finish(report, args, report.cycles)


def _cyclic_edges(c: list[int], r: int) -> set:
    ext = c + c[:r - 1]
    return {canonical(ext[i:i + r]) for i in range(len(c))}


def _write_cycle_edges(c: list[int], r: int, n: int, path) -> None:
    write_edgelist(Hypergraph(n, r, sorted(_cyclic_edges(c, r))), path)


# ---------------------------------------------------------------------------
# verify

def cmd_verify(args) -> int:
    g = read_edgelist(args.graph)
    if args.cycle:
        lines = [_ints(x) for x in Path(args.cycle).read_text().splitlines() if x.strip()]
        if not lines:
            print("empty cycle file", file=sys.stderr)
            return REJECTED
        if len(lines) == 1:
            verdicts = [verify_tight_cycle(g, lines[0])]
        else:
            verdicts = [verify_tight_cycle(g, c, vertices=c) for c in lines]
            if len({x for c in lines for x in c}) != sum(map(len, lines)):
                print("cycles share vertices", file=sys.stderr)
                return REJECTED
    elif args.path:
        seq = _ints(Path(args.path).read_text())
        verdicts = [verify_tight_path(g, seq)]
        if args.interior_in:
            allowed = set(_ints(Path(args.interior_in).read_text()))
            r = g.r
            outside = [x for x in seq[r - 1:len(seq) - (r - 1)] if x not in allowed]
            if outside:
                print(f"interior vertex {outside[0]} is outside the allowed set", file=sys.stderr)
                return REJECTED
    else:
        raise InvalidInput("verify needs --cycle or --path")
    for v in verdicts:
        if not v:
            print(f"rejected: {v.first_violation}", file=sys.stderr)
            return REJECTED
    print("accepted")
    return OK


# ---------------------------------------------------------------------------
# bench

CSV_FIELDS = ["cell", "trial", "n", "r", "p", "eps", "mode", "seed", "outcome", "failure_stage",
              "cycle_length", "exposed_r1", "exposed_r2", "exposed_r3", "exposed_r4", "exposed_r5"]


def trial_seed(base: int, cell: int, trial: int) -> int:
    return (base ^ round_key(0, f"trial-{cell}-{trial}")) & (2 ** 63 - 1)


def wilson(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    ph = successes / trials
    den = 1 + z * z / trials
    mid = (ph + z * z / (2 * trials)) / den
    half = z * math.sqrt(ph * (1 - ph) / trials + z * z / (4 * trials * trials)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


def _run_trial(job: tuple) -> tuple[dict, float]:
    cell, trial, n, r, p, mode, seed = job
    t0 = time.perf_counter()
    cfg = PipelineConfig(n=n, r=r, p=p, mode=mode, seed=seed)
    rep = find_tight_hamilton_cycle(cfg)
    exposed = rep.counts.get("exposed", {})
    row = {"cell": cell, "trial": trial, "n": n, "r": r, "p": repr(p), "eps": repr(cfg.eps), "mode": mode,
           "seed": seed, "outcome": "success" if rep.success else "failure",
           "failure_stage": (rep.failure or {}).get("stage", ""),
           "cycle_length": len(rep.cycle) if rep.cycle else 0}
    for k in range(1, 6):
        row[f"exposed_r{k}"] = exposed.get(str(k), 0)
    return row, time.perf_counter() - t0


def cmd_bench(args) -> int:
    base = _seed(args)
    ns, ps = _ints(args.n), _floats(args.p)
    cells = [(n, args.r, p, args.mode) for n in ns for p in ps]
    jobs = [(j, i, n, r, p, mode, trial_seed(base, j, i))
            for j, (n, r, p, mode) in enumerate(cells) for i in range(args.trials)]
    threads = args.threads or int(os.environ.get("TIGHTHAM_THREADS", "1") or 1)
    prefix = Path(args.out)
    rows: list[dict] = []
    times: list[float] = []
    try:
        if threads > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                for row, dt in pool.map(_run_trial, jobs):
                    rows.append(row)
                    times.append(dt)
        else:
            for job in jobs:
                row, dt = _run_trial(job)
                rows.append(row)
                times.append(dt)
    finally:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        prefix.with_suffix(".csv").write_text(buf.getvalue())
        summary = []
        for j, (n, r, p, mode) in enumerate(cells):
            mine = [row for row in rows if row["cell"] == j]
            wins = sum(row["outcome"] == "success" for row in mine)
            lo, hi = wilson(wins, len(mine))
            summary.append({"cell": j, "n": n, "r": r, "p": p, "mode": mode, "trials": len(mine),
                            "successes": wins, "rate": wins / len(mine) if mine else None,
                            "wilson95": [lo, hi]})
        _dump_json({"schema_version": SCHEMA_VERSION, "seed": base, "trials_per_cell": args.trials,
                    "cells": summary, "timings": {"wall_seconds": [round(t, 6) for t in times]}},
                   prefix.with_suffix(".json"))
    return OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (overrides TIGHTHAM_SEED)")
    common.add_argument("--mode", choices=["strict", "practical"], default="practical")
    common.add_argument("--report", default=None, help="JSON report path")

    ap = argparse.ArgumentParser(prog="tightham", description="Tight Hamilton cycles in random hypergraphs")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="sample G^(r)(n, p) as an edge list")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("split", parents=[common], help="colour an edge list into five rounds")
    p.add_argument("--graph", required=True)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--q-prime", type=float, default=None)
    p.add_argument("--out", default=None, help="prefix of the .g1-.g5 files (default: the input path)")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("reservoir", parents=[common], help="build the reservoir gadget")
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--ell", type=int, default=3)
    p.add_argument("--k", type=int, default=None, help="block length override")
    p.add_argument("--eps", type=float, default=None, help="certify density against 1+eps")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reservoir)

    p = sub.add_parser("connect", parents=[common], help="connect tuple pairs through X")
    p.add_argument("--request", required=True, help="JSON with pairs, X and optional target_lengths")
    p.add_argument("--graph", default=None)
    p.add_argument("--lazy", action="store_true")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--round", type=int, default=2)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--early-exit-bridge", action="store_true")
    p.add_argument("--xi", type=float, default=None)
    p.add_argument("--c-min", type=float, default=None)
    p.add_argument("--c-max", type=float, default=None)
    p.add_argument("--width", type=float, default=None)
    p.add_argument("--max-fan-levels", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_connect)

    for name, fn, helptext in (("solve", cmd_solve, "find a tight Hamilton cycle"),
                               ("factor", cmd_factor, "find disjoint tight cycles of given lengths")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--r", type=int, default=None)
        p.add_argument("--eps", type=float, default=None)
        p.add_argument("--p", type=float, default=None)
        p.add_argument("--graph", default=None)
        p.add_argument("--lazy", action="store_true")
        p.add_argument("--reservoir-count", type=int, default=None)
        p.add_argument("--ell", type=int, default=None)
        p.add_argument("--greedy-stop", type=int, default=None)
        p.add_argument("--cycle-out", default=None)
        p.add_argument("--edges-out", default=None, help="write the cycle's edges as an edge list")
        if name == "factor":
            p.add_argument("--lengths", required=True, help="comma-separated, longest first")
        p.set_defaults(func=fn)

    p = sub.add_parser("verify", parents=[common], help="check a cycle or path against a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--cycle", default=None)
    p.add_argument("--path", default=None)
    p.add_argument("--interior-in", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", parents=[common], help="seeded success-rate grid")
    p.add_argument("--n", required=True, help="comma-separated sizes")
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--p", required=True, help="comma-separated probabilities")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True, help="output prefix (.csv and .json)")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInput as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return INVALID
    except StageFailure as exc:
        print(f"stage {exc.stage} failed: {exc}", file=sys.stderr)
        return STAGE_FAILED
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return INVALID
    except TightHamError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return STAGE_FAILED


if __name__ == "__main__":
    sys.exit(main())
