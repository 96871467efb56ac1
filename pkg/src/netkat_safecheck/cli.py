"""Command-line front end: ``explain``, ``oracle-check``, ``encode``, ``bench``."""

from __future__ import annotations

import argparse
import csv
import io
import multiprocessing as mp
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

from .errors import DomainTooLarge, SafeCheckError
from .explain import Verdict, explain
from .oracle import DEFAULT_MAX_PACKETS, find_witness
from .parser import format_problem, parse_problem
from .rewrite import FieldOrder
from .topology import encode_problem, load_graphml, parse_node_value
from .unfold import build_program, default_unfold_bound

EXIT_SAFE, EXIT_UNSAFE, EXIT_ERROR = 0, 1, 2
THREADS_ENV = "NETKAT_SAFECHECK_THREADS"


def _load_problem(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def _field_order(text: Optional[str]) -> Optional[FieldOrder]:
    if not text:
        return None
    return FieldOrder([f.strip() for f in text.split(",") if f.strip()])


def cmd_explain(args, out=None) -> int:
    out = out or sys.stdout
    problem = _load_problem(args.problem)
    result = explain(problem, args.unfold, _field_order(args.field_order), minimized=not args.no_minimize)
    if args.format == "json":
        out.write(result.to_json(indent=2) + "\n")
    else:
        out.write(result.to_text(with_stats=args.stats) + "\n")
    return EXIT_SAFE if result.verdict is Verdict.SAFE else EXIT_UNSAFE


def cmd_oracle_check(args, out=None) -> int:
    out = out or sys.stdout
    problem = _load_problem(args.problem)
    n = args.unfold
    if n is None:
        n = problem.unfold_n if problem.unfold_n is not None else default_unfold_bound(problem.topology, problem.domains)
    try:
        witness = find_witness(build_program(problem, n), problem.domains, args.max_packets)
    except DomainTooLarge as exc:
        out.write(f"error: {exc}\n")
        return EXIT_ERROR
    result = explain(problem, n)
    symbolic_empty = result.verdict is Verdict.SAFE
    oracle_empty = witness is None
    out.write(f"unfold n = {n}\n")
    out.write(f"normal form: {'empty' if symbolic_empty else 'non-empty'} ({len(result.paths)} path(s))\n")
    out.write(f"oracle:      {'empty' if oracle_empty else 'non-empty'}\n")
    if symbolic_empty == oracle_empty:
        out.write("agree\n")
        return 0
    out.write("DISAGREE\n")
    if witness is not None:
        out.write(f"witness packet: {witness}\n")
    return 1


def cmd_encode(args, out=None) -> int:
    out = out or sys.stdout
    data = Path(args.graphml).read_bytes()
    g = load_graphml(data)
    src = parse_node_value(args.ingress) if args.ingress else None
    dst = parse_node_value(args.egress) if args.egress else None
    problem = encode_problem(g, src, dst, args.unfold)
    text = format_problem(
        problem,
        comment=f"encoded from {Path(args.graphml).name}: {len(g.switches)} switches, {len(g.links)} directed links",
    )
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return 0


# -- bench ------------------------------------------------------------------

BENCH_COLUMNS = [
    "file",
    "nodes",
    "directed_links",
    "src",
    "dst",
    "unfold_n",
    "summands_before_reduction",
    "paths_before_minimization",
    "paths",
    "verdict",
    "io_time",
    "analysis_time",
    "status",
]


@dataclass
class BenchJob:
    path: str
    unfold: Optional[int] = None


def bench_one(job: BenchJob) -> dict:
    """Encode and analyse one GraphML file; errors are reported in the row."""
    row = {c: "" for c in BENCH_COLUMNS}
    row["file"] = os.path.basename(job.path)
    try:
        t0 = time.perf_counter()
        g = load_graphml(Path(job.path).read_bytes())
        problem = encode_problem(g, unfold_n=job.unfold)
        io_time = time.perf_counter() - t0
        row.update(
            nodes=len(g.switches),
            directed_links=len(g.links),
            src=problem.ingress.value,
            dst=problem.egress.value,
            unfold_n=problem.unfold_n,
            io_time=f"{io_time:.6f}",
        )
        t1 = time.perf_counter()
        result = explain(problem)
        row.update(
            analysis_time=f"{time.perf_counter() - t1:.6f}",
            verdict=result.verdict.value,
            summands_before_reduction=result.stats["summands_before_reduction"],
            paths_before_minimization=result.stats["paths_before_minimization"],
            paths=result.stats["paths"],
            status="ok",
        )
    except SafeCheckError as exc:
        row["status"] = f"error: {type(exc).__name__}: {exc}"
    return row


def _bench_child(job: BenchJob, conn) -> None:
    try:
        conn.send(bench_one(job))
    except BaseException as exc:  # report anything, the parent decides
        conn.send({"file": os.path.basename(job.path), "status": f"error: {type(exc).__name__}: {exc}"})
    finally:
        conn.close()


def worker_cap(requested: Optional[int] = None) -> int:
    env = os.environ.get(THREADS_ENV)
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            pass
    if requested:
        cap = min(cap, requested)
    return max(1, cap)


def run_bench(jobs: Sequence[BenchJob], timeout: float, workers: int = 1) -> List[dict]:
    """Run jobs in child processes, at most ``workers`` at a time; rows keep input order."""
    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
    rows: List[Optional[dict]] = [None] * len(jobs)
    pending = list(enumerate(jobs))
    running = {}
    while pending or running:
        while pending and len(running) < workers:
            i, job = pending.pop(0)
            parent, child = ctx.Pipe(duplex=False)
            proc = ctx.Process(target=_bench_child, args=(job, child), daemon=True)
            proc.start()
            child.close()
            running[i] = (proc, parent, time.monotonic())
        for i, (proc, conn, started) in list(running.items()):
            if conn.poll():
                try:
                    rows[i] = conn.recv()
                except EOFError:
                    rows[i] = None
            elif not proc.is_alive():
                rows[i] = None
            elif time.monotonic() - started > timeout:
                proc.terminate()
                rows[i] = {"file": os.path.basename(jobs[i].path), "status": "TIMEOUT",
                           "analysis_time": f">{timeout}"}
            else:
                continue
            proc.join()
            conn.close()
            del running[i]
            if rows[i] is None:
                rows[i] = {"file": os.path.basename(jobs[i].path), "status": f"error: worker exit {proc.exitcode}"}
        if running:
            time.sleep(0.01)
    full = []
    for r in rows:
        base = {c: "" for c in BENCH_COLUMNS}
        base.update(r)
        if base["status"] == "TIMEOUT":
            base["verdict"] = "TIMEOUT"
        full.append(base)
    return full


def cmd_bench(args, out=None) -> int:
    out = out or sys.stdout
    root = Path(args.dataset)
    if not root.is_dir():
        raise SafeCheckError(f"{root} is not a directory")
    files = sorted(str(p) for p in root.iterdir() if p.suffix.lower() == ".graphml")
    jobs = [BenchJob(f, args.unfold) for f in files]
    rows = run_bench(jobs, args.timeout, worker_cap(args.jobs))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.output:
        Path(args.output).write_text(buf.getvalue(), encoding="utf-8")
    else:
        out.write(buf.getvalue())
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="netkat-safecheck", description="In-out safety checking for dup-free NetKAT.")
    sub = ap.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("explain", help="decide safety and print minimal failure explanations")
    ex.add_argument("problem")
    ex.add_argument("--unfold", type=int, default=None, metavar="N")
    ex.add_argument("--no-minimize", action="store_true")
    ex.add_argument("--format", choices=("text", "json"), default="text")
    ex.add_argument("--field-order", default=None, metavar="F1,F2,...")
    ex.add_argument("--stats", action="store_true")
    ex.set_defaults(func=cmd_explain)

    oc = sub.add_parser("oracle-check", help="compare the normal form against packet enumeration")
    oc.add_argument("problem")
    oc.add_argument("--unfold", type=int, default=None, metavar="N")
    oc.add_argument("--max-packets", type=int, default=DEFAULT_MAX_PACKETS)
    oc.set_defaults(func=cmd_oracle_check)

    en = sub.add_parser("encode", help="turn a GraphML topology into a problem file")
    en.add_argument("graphml")
    en.add_argument("--in", dest="ingress", default=None, metavar="SWITCH")
    en.add_argument("--out", dest="egress", default=None, metavar="SWITCH")
    en.add_argument("--unfold", type=int, default=None, metavar="N")
    en.add_argument("-o", "--output", default=None)
    en.set_defaults(func=cmd_encode)

    be = sub.add_parser("bench", help="analyse every GraphML file in a directory, CSV output")
    be.add_argument("dataset")
    be.add_argument("--timeout", type=float, default=12000.0, metavar="SECONDS")
    be.add_argument("--unfold", type=int, default=None, metavar="N")
    be.add_argument("-j", "--jobs", type=int, default=None)
    be.add_argument("-o", "--output", default=None)
    be.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_arg_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except SafeCheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
