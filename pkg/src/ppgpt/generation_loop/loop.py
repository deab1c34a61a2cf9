"""Generate-and-revise loop for candidate properties.

A candidate is drafted from a retrieved reference property, compiled
against the contract, and revised on compiler feedback until it compiles
or the attempt budget runs out. A rule that compiles but never calls the
function under test gets one dedicated kind of revision prompt; everything
else goes through the generic compiler-feedback prompt.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from ..frontend import CompileError, Diagnostic, Span, ast as A, parse_spec, render_diagnostics
from ..frontend.resolver import ResolvedProgram
from ..knowledge_store import KnowledgeEntry
from ..spec_checker import check_spec
from .providers import ProviderFailure, TextProvider
from .templates import GRAMMAR_EXAMPLE, build_prompt

__all__ = [
    "CandidateProperty",
    "GenerationTarget",
    "strip_fences",
    "compile_candidate",
    "generate_candidate",
    "revise_until_compilable",
    "run_generation",
    "summarize",
    "success_rate",
    "MAX_ATTEMPTS",
]

MAX_ATTEMPTS = 9

_CANDIDATE_FILE = "candidate.psl"
_KIND_NODES = {
    "rule": A.RuleDecl,
    "condition": A.FunctionSpec,
    "invariant": A.FunctionSpec,
}
_KIND_LABEL = {
    "rule": "rule",
    "condition": "function pre/postcondition",
    "invariant": "function pre/postcondition",
}


@dataclass(frozen=True)
class GenerationTarget:
    """The function a candidate property must be written for."""

    function_name: str
    func_code: str
    contract_code: str


@dataclass
class CandidateProperty:
    """One generated property and the history of getting it to compile.

    status is `compiling` while the loop is still working on the text,
    `compilable` once it parses and checks cleanly, and `failed` when the
    attempt budget is exhausted or the provider breaks. attempts counts
    revision calls only; the initial draft is attempt zero.
    """

    id: str
    text: str
    refEntryId: str
    kind: str
    attempts: int = 0
    status: str = "compiling"
    transcript: list[dict] = field(default_factory=list)


def strip_fences(response: str) -> str:
    """Extract property text from a model response.

    If the response contains a fenced code block, its first block wins
    (minus any language tag); otherwise the whole response is used.
    """
    text = response.strip()
    if "```" not in text:
        return text
    start = text.index("```")
    rest = text[start + 3 :]
    newline = rest.find("\n")
    end = rest.find("```", newline if newline >= 0 else 0)
    if newline < 0 or end < 0:
        return text.replace("```", "").strip()
    return rest[newline + 1 : end].strip()


def _diag(message: str) -> Diagnostic:
    return Diagnostic(
        code="GEN001",
        message=message,
        span=Span(0, 0, 1, 1, _CANDIDATE_FILE),
        severity="error",
    )


def compile_candidate(
    program: ResolvedProgram, text: str, kind: str, function_name: str
) -> tuple[list, list[Diagnostic], bool]:
    """Compile a candidate property against a resolved program.

    Returns (units, diagnostics, covers_target). units is empty when the
    text does not even parse. covers_target is False for rules that never
    call the function under test; it is True for compiling pre/post
    specifications, whose function header is already checked here.
    """
    try:
        units = parse_spec(text, _CANDIDATE_FILE)
    except CompileError as exc:
        return [], list(exc.diagnostics), False
    expected = _KIND_NODES[kind]
    matching = [u for u in units if isinstance(u, expected)]
    if not matching:
        found = ", ".join(sorted({type(u).__name__ for u in units})) or "nothing"
        return units, [_diag(f"expected a {_KIND_LABEL[kind]} specification, found {found}")], False
    if expected is A.FunctionSpec:
        wrong = [u.funcName for u in matching if u.funcName != function_name]
        if wrong:
            return units, [
                _diag(
                    f"specification targets function {wrong[0]!r}, expected {function_name!r}"
                )
            ], False
    report = check_spec(program, units, target=function_name)
    if not report.ok:
        return units, list(report.issues), False
    covers = all(report.coverage.values()) if report.coverage else True
    return units, [], covers


def generate_candidate(
    provider: TextProvider,
    target: GenerationTarget,
    ref: KnowledgeEntry,
    cand_id: Optional[str] = None,
    grammar_example: str = GRAMMAR_EXAMPLE,
) -> CandidateProperty:
    """Draft one candidate property from a reference entry (one call)."""
    if ref.kind == "rule":
        prompt = build_prompt(
            "ruleGen",
            {
                "func_code": target.func_code,
                "contract_code": target.contract_code,
                "rule_property": ref.property,
                "spec_grammar": grammar_example,
            },
        )
    else:
        prompt = build_prompt(
            "conditionGen",
            {
                "func_code": target.func_code,
                "condition_property": ref.property,
                "func_name": target.function_name,
            },
        )
    candidate = CandidateProperty(
        id=cand_id if cand_id is not None else f"{ref.id}:cand",
        text="",
        refEntryId=ref.id,
        kind=ref.kind,
    )
    try:
        response = provider.complete(prompt)
    except ProviderFailure as exc:
        candidate.status = "failed"
        candidate.transcript.append({"prompt": prompt, "error": str(exc)})
        return candidate
    candidate.text = strip_fences(response)
    candidate.transcript.append({"prompt": prompt, "response": response})
    return candidate


def revise_until_compilable(
    provider: TextProvider,
    candidate: CandidateProperty,
    target: GenerationTarget,
    program: ResolvedProgram,
    ref: Optional[KnowledgeEntry] = None,
    max_attempts: int = MAX_ATTEMPTS,
) -> CandidateProperty:
    """Compile the candidate and revise on feedback until it is clean.

    Each failed compile produces one revision call: compiler diagnostics
    feed the generic revision prompt, and a compiling rule that never
    calls the target function feeds the dedicated coverage prompt instead.
    After max_attempts revision calls the candidate is marked failed.
    """
    if candidate.status == "failed":
        return candidate
    revisions = 0
    while True:
        _, diags, covers = compile_candidate(
            program, candidate.text, candidate.kind, target.function_name
        )
        if not diags and covers:
            candidate.status = "compilable"
            candidate.attempts = revisions
            return candidate
        if revisions >= max_attempts:
            candidate.status = "failed"
            candidate.attempts = revisions
            return candidate
        if diags:
            prompt = build_prompt(
                "commonRevise",
                {
                    "spec_res": candidate.text,
                    "error_info": render_diagnostics(diags),
                    "func_code": target.func_code,
                    "contract_code": target.contract_code,
                    "function_name": target.function_name,
                },
            )
        else:
            prompt = build_prompt(
                "specialRevise",
                {
                    "knowledge_rule": ref.property if ref is not None else "",
                    "spec_res": candidate.text,
                    "function_name": target.function_name,
                    "contract_code": target.contract_code,
                    "func_code": target.func_code,
                },
            )
        try:
            response = provider.complete(prompt)
        except ProviderFailure as exc:
            candidate.status = "failed"
            candidate.attempts = revisions
            candidate.transcript.append({"prompt": prompt, "error": str(exc)})
            return candidate
        revisions += 1
        candidate.attempts = revisions
        candidate.text = strip_fences(response)
        candidate.transcript.append({"prompt": prompt, "response": response})


def run_generation(
    provider: TextProvider,
    target: GenerationTarget,
    refs: list[KnowledgeEntry],
    program: ResolvedProgram,
    max_attempts: int = MAX_ATTEMPTS,
    grammar_example: str = GRAMMAR_EXAMPLE,
) -> list[CandidateProperty]:
    """Generate and revise one candidate per reference entry.

    Work runs on a bounded pool sized by the provider's concurrency;
    results come back in reference order with stable candidate ids.
    """

    def job(i_ref: tuple[int, KnowledgeEntry]) -> CandidateProperty:
        i, ref = i_ref
        candidate = generate_candidate(
            provider, target, ref, cand_id=f"cand-{i + 1:02d}", grammar_example=grammar_example
        )
        return revise_until_compilable(
            provider, candidate, target, program, ref=ref, max_attempts=max_attempts
        )

    workers = max(1, getattr(provider, "concurrency", 1))
    if workers == 1 or len(refs) <= 1:
        return [job(p) for p in enumerate(refs)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, enumerate(refs)))


_SUMMARIZE_PROMPTS = {
    "code": "Summarize what the following smart-contract code does in one plain-English sentence.\n\n",
    "property": "Summarize what the following formal property checks in one plain-English sentence.\n\n",
}


def summarize(provider: TextProvider, text: str, mode: str) -> str:
    """One-call plain-English summary of code or of a property."""
    if mode not in _SUMMARIZE_PROMPTS:
        raise ValueError(f"mode must be 'code' or 'property', got {mode!r}")
    if not text.strip():
        raise ValueError("cannot summarize empty text")
    return provider.complete(_SUMMARIZE_PROMPTS[mode] + text).strip()


def success_rate(candidates: list[CandidateProperty]) -> float:
    """Fraction of candidates whose final status is compilable."""
    if not candidates:
        return 0.0
    return sum(1 for c in candidates if c.status == "compilable") / len(candidates)
