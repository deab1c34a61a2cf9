"""Retrieval-guided property generation with compiler-feedback revision."""

from .loop import (
    MAX_ATTEMPTS,
    CandidateProperty,
    GenerationTarget,
    compile_candidate,
    generate_candidate,
    revise_until_compilable,
    run_generation,
    strip_fences,
    success_rate,
    summarize,
)
from .providers import (
    API_KEY_ENV,
    GenParams,
    ProviderFailure,
    RecordingProvider,
    RemoteProvider,
    ReplayProvider,
    TextProvider,
    prompt_hash,
)
from .templates import GRAMMAR_EXAMPLE, PLACEHOLDERS, TEMPLATES, build_prompt

__all__ = [
    "MAX_ATTEMPTS",
    "CandidateProperty",
    "GenerationTarget",
    "compile_candidate",
    "generate_candidate",
    "revise_until_compilable",
    "run_generation",
    "strip_fences",
    "success_rate",
    "summarize",
    "API_KEY_ENV",
    "GenParams",
    "ProviderFailure",
    "RecordingProvider",
    "RemoteProvider",
    "ReplayProvider",
    "TextProvider",
    "prompt_hash",
    "GRAMMAR_EXAMPLE",
    "PLACEHOLDERS",
    "TEMPLATES",
    "build_prompt",
]
