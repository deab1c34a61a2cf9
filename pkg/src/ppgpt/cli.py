"""Command-line entry points.

`ppgpt pipeline` runs the whole retrieve/generate/revise/rank/verify
flow; the other subcommands expose the individual stages: `ingest`
builds a knowledge store, `gen` stops after generation, `check`
compiles properties against a contract, `rank` scores feature records
or refits weights, and `verify` checks hand-written properties.
Exit codes: 0 clean, 2 when a verified property is violated, 1 on
operational errors (for `check`, 1 also means diagnostics were found).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Optional

from .config import load_config
from .frontend import CompileError, parse_spec, render_diagnostics
from .generation_loop import ProviderFailure, run_generation
from .knowledge_store import StoreError, ingest, persist, read_entries_jsonl
from .pipeline import (
    PipelineError,
    build_embedder,
    build_provider,
    find_function,
    load_program,
    load_store,
    render_summary,
    render_verify_summary,
    run_pipeline,
    run_verify_only,
    write_report,
)
from .ranking import (
    REFERENCE_WEIGHTS,
    FeatureVector,
    fit_weights,
    rank_topk,
    read_training_records,
)
from .spec_checker import check_spec

__all__ = ["main"]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ppgpt",
        description="Generate, rank, and formally verify smart-contract properties.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, contract=False, function=False, spec=False, out=False):
        sp.add_argument("--config", help="path to a key=value config file")
        if contract:
            sp.add_argument("--contract", required=True, help="contract source file")
        if function:
            sp.add_argument("--function", required=True, help="target function name")
        if spec:
            sp.add_argument("--spec", required=True, help="property file")
        if out:
            sp.add_argument("--out", help="write the line-delimited report here")

    sp = sub.add_parser("ingest", help="embed a knowledge base and persist the store")
    common(sp)
    sp.add_argument("--out", required=True, help="where to write the persisted store")

    sp = sub.add_parser("gen", help="generate and revise candidates, skip verification")
    common(sp, contract=True, function=True, out=True)

    sp = sub.add_parser("check", help="compile properties against a contract")
    common(sp, contract=True, spec=True)
    sp.add_argument("--function", help="also check rules call this function")

    sp = sub.add_parser("rank", help="score feature records, or refit weights")
    common(sp, out=True)
    sp.add_argument("--features", help="JSONL of {id, xRaw, xSummary, yRaw, ySummary}")
    sp.add_argument("--train", help="JSONL of training records with an actual score")

    sp = sub.add_parser("verify", help="verify hand-written properties")
    common(sp, contract=True, spec=True, out=True)

    sp = sub.add_parser("pipeline", help="run the full generate-and-verify pipeline")
    common(sp, contract=True, function=True, out=True)
    return p


def _cmd_ingest(args) -> int:
    cfg = load_config(args.config)
    embedder = build_embedder(cfg)
    if not cfg.knowledge_path:
        raise PipelineError("ingest", "knowledge.path is not set")
    store = ingest(read_entries_jsonl(cfg.knowledge_path), embedder)
    persist(store, args.out)
    print(f"ingested {len(store)} entries at dimension {store.dimension} -> {args.out}")
    return 0


def _cmd_gen(args) -> int:
    cfg = load_config(args.config)
    embedder = build_embedder(cfg)
    store = load_store(cfg, embedder)
    program, source = load_program(args.contract)
    from .generation_loop import GenerationTarget

    fdef, func_code = find_function(program, source, args.function)
    target = GenerationTarget(args.function, func_code, source)
    hits = store.retrieve(func_code, cfg.retrieve_threshold, cfg.retrieve_max)
    provider = build_provider(cfg)
    candidates = run_generation(
        provider, target, [h.entry for h in hits], program, max_attempts=cfg.gen_max_attempts
    )
    records = [
        {
            "id": c.id,
            "refEntryId": c.refEntryId,
            "kind": c.kind,
            "status": c.status,
            "attempts": c.attempts,
            "property": c.text,
        }
        for c in candidates
    ]
    if args.out:
        write_report(records, args.out)
    for r in records:
        print(f"{r['id']} ({r['kind']}, ref {r['refEntryId']}): {r['status']}, {r['attempts']} revision(s)")
    if not records:
        print("no candidates were generated (nothing retrieved above the threshold)")
    return 0


def _cmd_check(args) -> int:
    load_config(args.config)
    program, _source = load_program(args.contract)
    try:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec_source = fh.read()
    except OSError as exc:
        raise PipelineError("check", str(exc)) from exc
    try:
        units = parse_spec(spec_source, args.spec)
    except CompileError as exc:
        print(render_diagnostics(exc.diagnostics).rstrip("\n"))
        return 1
    report = check_spec(program, units, target=args.function)
    if report.issues:
        print(render_diagnostics(report.issues).rstrip("\n"))
        return 1
    uncovered = [name for name, covered in report.coverage.items() if not covered]
    for name in uncovered:
        if args.function:
            print(f"note: rule {name!r} never calls {args.function!r}")
        else:
            print(f"note: rule {name!r} calls no contract function")
    print(f"{len(units)} propert{'y' if len(units) == 1 else 'ies'} compiled cleanly")
    return 0


def _read_feature_records(path: str) -> list[tuple[str, FeatureVector]]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                out.append(
                    (
                        str(obj["id"]),
                        FeatureVector(
                            float(obj["xRaw"]),
                            float(obj["xSummary"]),
                            float(obj["yRaw"]),
                            float(obj["ySummary"]),
                        ),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise PipelineError("rank", f"{path}:{lineno}: bad feature record: {exc}") from exc
    return out


class _Named:
    def __init__(self, id: str):
        self.id = id


def _cmd_rank(args) -> int:
    cfg = load_config(args.config)
    if bool(args.features) == bool(args.train):
        raise PipelineError("rank", "pass exactly one of --features or --train")
    if args.train:
        fit = fit_weights(read_training_records(args.train))
        result = {
            "weights": dict(zip(("alpha", "beta", "gamma", "eta"), fit.weights.as_tuple())),
            "normalized": dict(zip(("alpha", "beta", "gamma", "eta"), fit.normalized.as_tuple())),
            "metrics": fit.metrics,
        }
        print(json.dumps(result, indent=2))
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(json.dumps(result) + "\n")
        return 0
    records = _read_feature_records(args.features)
    ranked = rank_topk(
        [(_Named(rid), fv) for rid, fv in records], REFERENCE_WEIGHTS, k=max(cfg.rank_k, len(records) or 1)
    )
    rows = [
        {"rank": i, "id": named.id, "score": s, "selected": i <= cfg.rank_k}
        for i, (named, _fv, s) in enumerate(ranked, 1)
    ]
    for row in rows:
        marker = "*" if row["selected"] else " "
        print(f"{marker} {row['rank']:>2}. {row['id']}  score {row['score']:.4f}")
    if args.out:
        write_report(rows, args.out)
    return 0


def _cmd_verify(args) -> int:
    cfg = load_config(args.config)
    reports = run_verify_only(cfg, args.contract, args.spec)
    if args.out:
        write_report([r.to_record() for r in reports], args.out)
    render_verify_summary(reports, print)
    return 2 if any(r.to_record()["verdict"] == "Violated" for r in reports) else 0


def _cmd_pipeline(args) -> int:
    cfg = load_config(args.config)
    started = time.monotonic()
    report = run_pipeline(cfg, args.contract, args.function)
    if args.out:
        write_report([r.to_record() for r in report.records], args.out)
    render_summary(report, print)
    print(f"pipeline finished in {time.monotonic() - started:.1f}s "
          f"({len(report.records)} candidate(s), exit {report.exit_code})")
    return report.exit_code


_COMMANDS = {
    "ingest": _cmd_ingest,
    "gen": _cmd_gen,
    "check": _cmd_check,
    "rank": _cmd_rank,
    "verify": _cmd_verify,
    "pipeline": _cmd_pipeline,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (PipelineError, StoreError, ProviderFailure, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CompileError as exc:
        print(render_diagnostics(exc.diagnostics).rstrip("\n"), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
