"""Command-line front door: simulate, rank, plot, serve, stats.

Every command is deterministic given its flags: run logs, rank reports,
and plots come out byte-identical on reruns.  Run logs are append-only
JSON lines keyed by (treatment, seed), so an interrupted sweep resumes
where it stopped instead of recomputing finished runs.
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys
from pathlib import Path

from . import active
from . import corpus as cp
from . import evaluate, features, plots
from .stopwords import STOPWORDS

DEFAULT_PORT = 5000
WORKSPACE_ENV = "FASTREAD_WORKSPACE"
DEFAULT_WORKSPACE = "workspace"


class CommandError(Exception):
    """Fatal command failure carrying its exit code."""

    def __init__(self, message: str, exit_code: int = 2):
        super().__init__(message)
        self.exit_code = exit_code


def workspace_root(override: str | None = None) -> Path:
    if override:
        return Path(override)
    return Path(os.environ.get(WORKSPACE_ENV, DEFAULT_WORKSPACE))


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def parse_treatments(names) -> list[active.TreatmentCode]:
    """Treatment codes for the given names; 'all' expands to all 33."""
    codes: dict[str, active.TreatmentCode] = {}
    for name in names:
        if name.strip().lower() == "all":
            expanded = [*active.all_codes(), active.LINEAR]
        else:
            try:
                expanded = [active.TreatmentCode.parse(name)]
            except ValueError as exc:
                raise CommandError(str(exc)) from exc
        for code in expanded:
            codes.setdefault(str(code), code)
    return list(codes.values())


def load_labeled_corpus(path: str) -> cp.Corpus:
    try:
        corpus = cp.load_csv(path)
    except FileNotFoundError as exc:
        raise CommandError(f"no such file: {path}") from exc
    except cp.CorpusError as exc:
        raise CommandError(str(exc)) from exc
    if not corpus.fully_labeled:
        raise CommandError(
            f"{path} has no complete 'label' column; simulation needs oracle labels"
        )
    return corpus


def cmd_simulate(args) -> int:
    corpus = load_labeled_corpus(args.data)
    treatments = parse_treatments(args.treatment)
    try:
        config = active.TreatmentConfig(target_recall=args.target_recall)
    except ValueError as exc:
        raise CommandError(str(exc)) from exc

    out = Path(args.out) if args.out else Path(f"{Path(args.data).stem}.runs.jsonl")
    done: set[tuple[str, int]] = set()
    if out.exists():
        done = {
            (str(r.treatment), r.seed) for r in evaluate.read_run_log(out)
        }

    fm = None
    if any(not code.linear for code in treatments):
        fm = features.featurize(corpus, args.max_terms)
    total_new = 0
    for code in treatments:
        seeds = [
            seed
            for seed in range(args.seed, args.seed + args.repeats)
            if (str(code), seed) not in done
        ]
        if not seeds:
            print(f"{code}: all {args.repeats} runs already logged")
            continue
        results = evaluate.run_seeds(
            corpus,
            code,
            seeds,
            config=config,
            batch=args.batch,
            max_terms=args.max_terms,
            jobs=args.jobs,
            feature_matrix=None if code.linear else fm,
        )
        evaluate.append_run_log(results, out)
        total_new += len(results)
        skipped = args.repeats - len(seeds)
        note = f" (skipped {skipped} already logged)" if skipped else ""
        print(f"{code}: {len(seeds)} runs{note}")
    print(f"wrote {total_new} results to {out}")
    return 0


def _gather_results(log_paths) -> list[evaluate.SimulationResult]:
    results: list[evaluate.SimulationResult] = []
    for path in log_paths:
        if not Path(path).exists():
            raise CommandError(f"no such run log: {path}")
        results.extend(evaluate.read_run_log(path))
    if not results:
        raise CommandError("run logs contain no results")
    return results


def cmd_rank(args) -> int:
    results = _gather_results(args.logs)
    targets = {r.trajectory[-1][1] for r in results}
    if len(targets) > 1:
        raise CommandError(
            "run logs mix corpora: recall targets differ "
            f"({', '.join(str(t) for t in sorted(targets))})"
        )
    x95: dict[str, list[float]] = {}
    wss: dict[str, list[float]] = {}
    for r in results:
        x95.setdefault(str(r.treatment), []).append(r.x95)
        wss.setdefault(str(r.treatment), []).append(r.wss95)
    counts = {len(v) for v in x95.values()}
    if len(counts) > 1:
        raise CommandError("treatments have unequal repeat counts; rerun simulate")
    report = evaluate.scott_knott(
        x95,
        wss_samples=wss,
        seed=args.seed,
        resamples=args.resamples,
        confidence=args.confidence,
    )
    _print_rank_table(report)
    if args.out:
        payload = {
            "entries": [
                {
                    "rank": e.rank,
                    "treatment": e.treatment,
                    "x95_median": e.x95_median,
                    "x95_iqr": e.x95_iqr,
                    "wss95_median": e.wss95_median,
                    "wss95_iqr": e.wss95_iqr,
                }
                for e in report.entries
            ]
        }
        Path(args.out).write_text(
            json.dumps(payload, indent=2) + "\n", encoding="utf-8"
        )
        print(f"wrote {args.out}")
    return 0


def _print_rank_table(report: evaluate.RankReport) -> None:
    header = f"{'rank':>4}  {'treatment':<10} {'x95 med':>8} {'iqr':>6} {'wss med':>8} {'iqr':>6}"
    print(header)
    print("-" * len(header))
    for e in report.entries:
        print(
            f"{e.rank:>4}  {e.treatment:<10} {e.x95_median:>8.0f} {e.x95_iqr:>6.0f} "
            f"{e.wss95_median:>8.2f} {e.wss95_iqr:>6.2f}"
        )


def cmd_plot(args) -> int:
    results = _gather_results(args.logs)
    svg_path, csv_path = plots.write_plot(results, args.out, title=args.title)
    print(f"wrote {svg_path} and {csv_path}")
    return 0


def cmd_serve(args) -> int:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((args.host, args.port))
    except OSError:
        print(f"port {args.port} is already in use", file=sys.stderr)
        return 1
    finally:
        probe.close()

    import uvicorn

    from . import service

    workspace = workspace_root(args.workspace)
    app = service.create_app(workspace, static_dir=args.static)
    print(f"serving on http://{args.host}:{args.port} (workspace: {workspace})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_stats(args) -> int:
    if args.print_stoplist:
        for word in sorted(STOPWORDS):
            print(word)
        return 0
    if not args.data:
        raise CommandError("stats needs --data (or --print-stoplist)")
    try:
        corpus = cp.load_csv(args.data)
    except FileNotFoundError as exc:
        raise CommandError(f"no such file: {args.data}") from exc
    except cp.CorpusError as exc:
        raise CommandError(str(exc)) from exc
    counts = cp.stats(corpus)
    prevalence = (
        None if counts.relevant is None else counts.relevant / counts.candidates
    )
    if args.json:
        print(
            json.dumps(
                {
                    "name": corpus.name,
                    "candidates": counts.candidates,
                    "relevant": counts.relevant,
                    "prevalence": prevalence,
                },
                indent=2,
            )
        )
        return 0
    print(f"corpus:     {corpus.name}")
    print(f"candidates: {counts.candidates}")
    if counts.relevant is None:
        print("relevant:   unknown (no label column)")
    else:
        print(f"relevant:   {counts.relevant} ({100 * prevalence:.2f}%)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fastread",
        description="Active-learning workbench for systematic-review screening.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser(
        "simulate", help="run seeded review simulations into a JSON-lines log"
    )
    simulate.add_argument("--data", required=True, help="labeled corpus CSV")
    simulate.add_argument(
        "--treatment",
        nargs="+",
        default=["HUTM"],
        help="treatment codes, 'linear', or 'all' (default: HUTM)",
    )
    simulate.add_argument("--repeats", type=positive_int, default=30)
    simulate.add_argument("--seed", type=int, default=0, help="base seed")
    simulate.add_argument("--target-recall", type=float, default=0.95)
    simulate.add_argument("--max-terms", type=positive_int, default=features.MAX_TERMS)
    simulate.add_argument("--batch", type=positive_int, default=1)
    simulate.add_argument("--jobs", type=positive_int, default=1)
    simulate.add_argument("--out", help="run log path (default: <data stem>.runs.jsonl)")
    simulate.set_defaults(func=cmd_simulate)

    rank = sub.add_parser("rank", help="Scott-Knott ranking of logged treatments")
    rank.add_argument("logs", nargs="+", help="run log files")
    rank.add_argument("--out", help="also write a JSON report here")
    rank.add_argument("--resamples", type=positive_int, default=512)
    rank.add_argument("--confidence", type=float, default=0.95)
    rank.add_argument("--seed", type=int, default=0)
    rank.set_defaults(func=cmd_rank)

    plot = sub.add_parser("plot", help="render logged runs as an SVG + CSV curve")
    plot.add_argument("logs", nargs="+", help="run log files")
    plot.add_argument("--out", default="curve", help="output base path")
    plot.add_argument("--title", default="Recall curve")
    plot.set_defaults(func=cmd_plot)

    serve = sub.add_parser("serve", help="launch the review service")
    serve.add_argument("--port", type=int, default=DEFAULT_PORT)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument(
        "--workspace",
        help=f"workspace root (default: ${WORKSPACE_ENV} or ./{DEFAULT_WORKSPACE})",
    )
    serve.add_argument("--static", help="directory of web UI files to serve at /")
    serve.set_defaults(func=cmd_serve)

    stats = sub.add_parser("stats", help="corpus summary")
    stats.add_argument("--data", help="corpus CSV")
    stats.add_argument("--json", action="store_true")
    stats.add_argument(
        "--print-stoplist",
        action="store_true",
        help="print the embedded stop-word list and exit",
    )
    stats.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except evaluate.OracleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
