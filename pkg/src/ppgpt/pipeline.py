"""End-to-end pipeline: retrieve references, generate and revise candidate
properties, rank them, and verify the top-ranked ones.

Also hosts the verify-only path (hand-written properties, no generation)
and the report writer shared by both. Reports are line-delimited JSON
records plus a human-readable summary; everything except wall-clock
timings is deterministic under replay providers and the local embedder.
"""

from __future__ import annotations

import json
import math
import shlex
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, TextIO

from .config import PipelineConfig
from .frontend import CompileError, ast as A, parse_contract, parse_spec, render_diagnostics, resolve
from .frontend.resolver import ResolvedProgram
from .generation_loop import (
    CandidateProperty,
    GenerationTarget,
    ProviderFailure,
    RecordingProvider,
    RemoteProvider,
    ReplayProvider,
    TextProvider,
    generate_candidate,
    revise_until_compilable,
    summarize,
)
from .knowledge_store import (
    EmbeddingProvider,
    HashedTokenEmbedder,
    KnowledgeStore,
    RemoteEmbedder,
    StoreError,
    ingest,
    load,
    read_entries_jsonl,
)
from .ranking import REFERENCE_WEIGHTS, FeatureVector, Weights, rank_topk, score
from .solver_bridge import ArrayModel, SolverConfig
from .spec_checker import resolve_spec_unit
from .symexec import ExecOptions
from .verifier import (
    Trace,
    Unknown,
    VacuouslyProven,
    Verdict,
    VerifierConfig,
    Violated,
    verdict_name,
    verify_function_spec,
    verify_invariant,
    verify_rule,
)

__all__ = [
    "PipelineError",
    "CandidateReport",
    "RunReport",
    "run_pipeline",
    "run_verify_only",
    "build_embedder",
    "build_provider",
    "load_store",
    "verifier_config",
    "write_report",
    "render_summary",
]


class PipelineError(Exception):
    """Operational failure, tagged with the stage that hit it."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


# -- stage builders --------------------------------------------------------------

def build_embedder(cfg: PipelineConfig) -> EmbeddingProvider:
    if cfg.embed_mode == "local":
        return HashedTokenEmbedder(cfg.embed_dimension)
    if not cfg.embed_endpoint:
        raise PipelineError("embed", "embed.mode=remote requires embed.endpoint")
    return RemoteEmbedder(cfg.embed_endpoint, cfg.embed_dimension, model=cfg.embed_model)


def build_provider(cfg: PipelineConfig) -> TextProvider:
    if cfg.provider_mode == "replay":
        if not cfg.provider_fixture:
            raise PipelineError("provider", "provider.mode=replay requires provider.fixture")
        try:
            return ReplayProvider(cfg.provider_fixture)
        except (OSError, ProviderFailure) as exc:
            raise PipelineError("provider", str(exc)) from exc
    if not cfg.provider_endpoint:
        raise PipelineError("provider", f"provider.mode={cfg.provider_mode} requires provider.endpoint")
    remote = RemoteProvider(
        cfg.provider_endpoint, cfg.provider_model, concurrency=cfg.provider_concurrency
    )
    if cfg.provider_mode == "record":
        if not cfg.provider_fixture:
            raise PipelineError("provider", "provider.mode=record requires provider.fixture")
        return RecordingProvider(remote, cfg.provider_fixture)
    return remote


def load_store(cfg: PipelineConfig, embedder: EmbeddingProvider) -> KnowledgeStore:
    """Open the knowledge base: either a persisted store (header line) or
    a plain entries file that gets embedded on the spot."""
    if not cfg.knowledge_path:
        raise PipelineError("ingest", "knowledge.path is not set")
    try:
        with open(cfg.knowledge_path, "r", encoding="utf-8") as fh:
            first = ""
            for line in fh:
                if line.strip():
                    first = line.strip()
                    break
    except OSError as exc:
        raise PipelineError("ingest", str(exc)) from exc
    try:
        is_store = first and "dimension" in json.loads(first) and "version" in json.loads(first)
    except json.JSONDecodeError:
        is_store = False
    try:
        if is_store:
            store = load(cfg.knowledge_path, embedder)
        else:
            store = ingest(read_entries_jsonl(cfg.knowledge_path), embedder)
    except StoreError as exc:
        raise PipelineError("ingest", str(exc)) from exc
    if len(store) == 0:
        raise PipelineError("ingest", "no reference properties in the knowledge base")
    return store


def verifier_config(cfg: PipelineConfig) -> VerifierConfig:
    cmd = tuple(shlex.split(cfg.solver_cmd)) if cfg.solver_cmd else None
    return VerifierConfig(
        depth=cfg.bmc_depth,
        solver=SolverConfig(cmd=cmd, timeout_ms=cfg.solver_timeout_ms),
        options=ExecOptions(loop_bound=cfg.loop_bound),
    )


def load_program(contract_path: str) -> tuple[ResolvedProgram, str]:
    try:
        with open(contract_path, "r", encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        raise PipelineError("compile", str(exc)) from exc
    try:
        program = resolve([parse_contract(source, contract_path)])
    except CompileError as exc:
        raise PipelineError("compile", render_diagnostics(exc.diagnostics).rstrip("\n")) from exc
    return program, source


def find_function(program: ResolvedProgram, source: str, name: str) -> tuple[A.FunctionDef, str]:
    info = program.contract()
    for fdef in info.public_functions():
        if fdef.name == name:
            return fdef, source[fdef.span.start : fdef.span.end]
    raise PipelineError(
        "compile",
        f"no public function named {name!r} in contract {info.name!r}",
    )


# -- report records --------------------------------------------------------------

@dataclass
class CandidateReport:
    """Everything the report records about one candidate."""

    candidate: CandidateProperty
    features: Optional[FeatureVector] = None
    score: Optional[float] = None
    rank: Optional[int] = None
    verified: bool = False
    verdict: Optional[Verdict] = None
    generation_ms: int = 0
    verification_ms: int = 0

    def to_record(self) -> dict:
        c = self.candidate
        return {
            "id": c.id,
            "refEntryId": c.refEntryId,
            "kind": c.kind,
            "status": c.status,
            "attempts": c.attempts,
            "rank": self.rank,
            "verified": self.verified,
            "features": _features_json(self.features),
            "score": self.score,
            "verdict": verdict_name(self.verdict) if self.verdict is not None else None,
            "counterexample": _counterexample_json(self.verdict),
            "property": c.text,
            "timings": {"generationMs": self.generation_ms, "verificationMs": self.verification_ms},
        }


@dataclass
class RunReport:
    records: list[CandidateReport] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 2 if any(isinstance(r.verdict, Violated) for r in self.records) else 0


def _features_json(fv: Optional[FeatureVector]) -> Optional[dict]:
    if fv is None:
        return None
    return {"xRaw": fv.xRaw, "xSummary": fv.xSummary, "yRaw": fv.yRaw, "ySummary": fv.ySummary}


def _json_value(v):
    if isinstance(v, ArrayModel):
        return {
            "default": _json_value(v.default),
            "entries": {str(k): _json_value(x) for k, x in sorted(v.entries.items(), key=lambda kv: str(kv[0]))},
        }
    if isinstance(v, dict):
        return {str(k): _json_value(x) for k, x in sorted(v.items(), key=lambda kv: str(kv[0]))}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def _counterexample_json(verdict: Optional[Verdict]) -> Optional[dict]:
    if not isinstance(verdict, Violated):
        return None
    t: Trace = verdict.counterexample
    return {
        "kind": t.kind,
        "property": t.property_name,
        "obligation": t.obligation,
        "initial": _json_value(t.initial_state),
        "steps": [
            {"function": s.function, "args": _json_value(list(s.args)), "env": _json_value(s.env)}
            for s in t.steps
        ],
        "rulevars": _json_value(t.rulevars),
    }


# -- the eight-step run ----------------------------------------------------------

def _cosine(embedder: EmbeddingProvider, a: str, b: str) -> float:
    va, vb = embedder.embed(a), embedder.embed(b)
    na = math.sqrt(sum(x * x for x in va))
    nb = math.sqrt(sum(x * x for x in vb))
    if na == 0 or nb == 0:
        return 0.0
    return sum(x * y for x, y in zip(va, vb)) / (na * nb)


def _verify_unit(program: ResolvedProgram, unit, vcfg: VerifierConfig) -> Verdict:
    resolved, diags = resolve_spec_unit(program, unit)
    if diags:
        return Unknown(reason=render_diagnostics(diags).rstrip("\n"))
    if isinstance(resolved, A.RuleDecl):
        return verify_rule(program, resolved, vcfg)
    if isinstance(resolved, A.FunctionSpec):
        return verify_function_spec(program, resolved, vcfg)
    if isinstance(resolved, A.InvariantDecl):
        per_function = verify_invariant(program, resolved, vcfg)
        return _merge_verdicts(list(per_function.values()))
    raise PipelineError("verify", f"cannot verify a {type(resolved).__name__}")


def _merge_verdicts(verdicts: list[Verdict]) -> Verdict:
    for v in verdicts:
        if isinstance(v, Violated):
            return v
    for v in verdicts:
        if isinstance(v, Unknown):
            return v
    if verdicts and all(isinstance(v, VacuouslyProven) for v in verdicts):
        return verdicts[0]
    from .verifier import Proven

    return Proven()


def run_pipeline(
    cfg: PipelineConfig,
    contract_path: str,
    target_function: str,
    weights: Weights = REFERENCE_WEIGHTS,
) -> RunReport:
    """Run all eight stages against one contract function.

    Stage order: open the knowledge base, embed the subject, retrieve
    references, then per reference generate a candidate and revise it on
    compiler feedback, then score and rank the compilable candidates and
    verify the top-K. Raises PipelineError on operational failure.
    """
    embedder = build_embedder(cfg)
    store = load_store(cfg, embedder)
    program, source = load_program(contract_path)
    fdef, func_code = find_function(program, source, target_function)
    target = GenerationTarget(target_function, func_code, source)

    hits = store.retrieve(func_code, cfg.retrieve_threshold, cfg.retrieve_max)
    provider = build_provider(cfg)

    reports: list[CandidateReport] = []
    subject_summary: Optional[str] = None
    for i, hit in enumerate(hits):
        ref = hit.entry
        started = time.monotonic()
        candidate = generate_candidate(provider, target, ref, cand_id=f"cand-{i + 1:02d}")
        candidate = revise_until_compilable(
            provider, candidate, target, program, ref=ref, max_attempts=cfg.gen_max_attempts
        )
        rep = CandidateReport(candidate=candidate)
        if candidate.status == "compilable":
            try:
                if subject_summary is None:
                    subject_summary = summarize(provider, func_code, "code")
                prop_summary = summarize(provider, candidate.text, "property")
            except ProviderFailure as exc:
                raise PipelineError("rank", f"summarization failed: {exc}") from exc
            rep.features = FeatureVector(
                xRaw=_cosine(embedder, ref.code, func_code),
                xSummary=_cosine(embedder, ref.codeSummary, subject_summary),
                yRaw=_cosine(embedder, ref.property, candidate.text),
                ySummary=_cosine(embedder, ref.propertySummary, prop_summary),
            )
            rep.score = score(rep.features, weights)
        rep.generation_ms = int((time.monotonic() - started) * 1000)
        reports.append(rep)

    ranked = rank_topk(
        [(r.candidate, r.features) for r in reports if r.features is not None],
        weights,
        k=max(cfg.rank_k, len(reports)),
    )
    by_id = {r.candidate.id: r for r in reports}
    for position, (cand, _fv, _s) in enumerate(ranked, 1):
        by_id[cand.id].rank = position

    vcfg = verifier_config(cfg)
    for rep in reports:
        if rep.rank is not None and rep.rank <= cfg.rank_k:
            started = time.monotonic()
            unit = _candidate_unit(program, rep.candidate)
            rep.verdict = _verify_unit(program, unit, vcfg)
            rep.verified = True
            rep.verification_ms = int((time.monotonic() - started) * 1000)

    reports.sort(key=_report_order)
    return RunReport(records=reports)


def _candidate_unit(program: ResolvedProgram, candidate: CandidateProperty):
    units = parse_spec(candidate.text, "candidate.psl")
    wanted = A.RuleDecl if candidate.kind == "rule" else A.FunctionSpec
    for u in units:
        if isinstance(u, wanted):
            return u
    raise PipelineError("verify", f"candidate {candidate.id} lost its {candidate.kind} unit")


def _report_order(rep: CandidateReport):
    return (
        rep.score is None,
        -(rep.score or 0.0),
        rep.candidate.id,
    )


# -- verify-only path ------------------------------------------------------------

@dataclass
class PropertyReport:
    name: str
    kind: str
    verdict: Verdict
    verification_ms: int = 0

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "verdict": verdict_name(self.verdict),
            "counterexample": _counterexample_json(self.verdict),
            "timings": {"verificationMs": self.verification_ms},
        }


def _unit_name(unit) -> tuple[str, str]:
    if isinstance(unit, A.RuleDecl):
        return unit.name, "rule"
    if isinstance(unit, A.FunctionSpec):
        return unit.funcName, "condition"
    if isinstance(unit, A.InvariantDecl):
        return unit.name, "invariant"
    return type(unit).__name__, "unknown"


def run_verify_only(cfg: PipelineConfig, contract_path: str, spec_path: str) -> list[PropertyReport]:
    """Verify hand-written properties against a contract, no generation."""
    program, _source = load_program(contract_path)
    try:
        with open(spec_path, "r", encoding="utf-8") as fh:
            spec_source = fh.read()
    except OSError as exc:
        raise PipelineError("verify", str(exc)) from exc
    try:
        units = parse_spec(spec_source, spec_path)
    except CompileError as exc:
        raise PipelineError("verify", render_diagnostics(exc.diagnostics).rstrip("\n")) from exc
    if not units:
        raise PipelineError("verify", f"{spec_path}: no properties found")
    vcfg = verifier_config(cfg)
    out = []
    for unit in units:
        name, kind = _unit_name(unit)
        started = time.monotonic()
        verdict = _verify_unit(program, unit, vcfg)
        ms = int((time.monotonic() - started) * 1000)
        out.append(PropertyReport(name=name, kind=kind, verdict=verdict, verification_ms=ms))
    return out


# -- report output ---------------------------------------------------------------

def write_report(records: list[dict], out_path: str) -> None:
    with open(out_path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def _describe_value(v) -> str:
    if isinstance(v, ArrayModel):
        inner = ", ".join(f"[{k}]={_describe_value(x)}" for k, x in sorted(v.entries.items(), key=lambda kv: str(kv[0])))
        base = f"default {_describe_value(v.default)}"
        return "{" + (f"{inner}, {base}" if inner else base) + "}"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_describe_value(x)}" for k, x in sorted(v.items())) + "}"
    return str(v)


def describe_trace(t: Trace, indent: str = "  ") -> list[str]:
    """Human-readable counterexample: initial state then a numbered call
    sequence with concrete arguments."""
    lines = []
    init = ", ".join(f"{k} = {_describe_value(v)}" for k, v in sorted(t.initial_state.items()))
    lines.append(f"{indent}initial state: {init if init else '(empty)'}")
    if not t.steps:
        lines.append(f"{indent}(the initial state itself violates the property)")
    for n, s in enumerate(t.steps, 1):
        args = ", ".join(_describe_value(a) for a in s.args)
        env = ""
        if s.env:
            sender = s.env.get("sender")
            value = s.env.get("value")
            parts = []
            if sender is not None:
                parts.append(f"sender={_describe_value(sender)}")
            if value:
                parts.append(f"value={_describe_value(value)}")
            if parts:
                env = "  [" + ", ".join(parts) + "]"
        lines.append(f"{indent}{n}. {s.function}({args}){env}")
    if t.rulevars:
        rv = ", ".join(f"{k} = {_describe_value(v)}" for k, v in sorted(t.rulevars.items()))
        lines.append(f"{indent}rule bindings: {rv}")
    lines.append(f"{indent}violated: {t.obligation}")
    return lines


def render_summary(report: RunReport, out: Callable[[str], None]) -> None:
    if not report.records:
        out("no candidates were generated (nothing retrieved above the threshold)")
        return
    for rep in report.records:
        c = rep.candidate
        rank = f"rank {rep.rank}" if rep.rank is not None else "unranked"
        sc = f"score {rep.score:.4f}" if rep.score is not None else "no score"
        head = f"{c.id} ({c.kind}, ref {c.refEntryId}): {c.status}, {c.attempts} revision(s), {rank}, {sc}"
        if rep.verdict is not None:
            head += f", verdict {verdict_name(rep.verdict)}"
        out(head)
        if isinstance(rep.verdict, Violated):
            for line in describe_trace(rep.verdict.counterexample):
                out(line)
        elif isinstance(rep.verdict, Unknown):
            out(f"  undecided: {rep.verdict.reason}")


def render_verify_summary(reports: list[PropertyReport], out: Callable[[str], None]) -> None:
    for rep in reports:
        out(f"{rep.kind} {rep.name}: {verdict_name(rep.verdict)}")
        if isinstance(rep.verdict, Violated):
            for line in describe_trace(rep.verdict.counterexample):
                out(line)
        elif isinstance(rep.verdict, Unknown):
            out(f"  undecided: {rep.verdict.reason}")
