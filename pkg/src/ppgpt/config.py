"""Line-oriented key=value configuration for the pipeline.

A config file holds one `key = value` pair per line, with `#` comments
and blank lines ignored. Keys are dotted; every key has a typed default,
and unknown keys are rejected so typos fail loudly instead of silently
keeping a default.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Optional

__all__ = ["PipelineConfig", "parse_config", "load_config"]

_PROVIDER_MODES = ("remote", "record", "replay")
_EMBED_MODES = ("local", "remote")


@dataclass(frozen=True)
class PipelineConfig:
    """Typed view of every supported config key (field metadata holds the
    key name as written in config files)."""

    knowledge_path: str = field(default="", metadata={"key": "knowledge.path"})
    solver_cmd: str = field(default="", metadata={"key": "solver.cmd"})
    solver_timeout_ms: int = field(default=10000, metadata={"key": "solver.timeout_ms"})
    retrieve_threshold: float = field(default=0.8, metadata={"key": "retrieve.threshold"})
    retrieve_max: Optional[int] = field(default=None, metadata={"key": "retrieve.max"})
    gen_max_attempts: int = field(default=9, metadata={"key": "gen.max_attempts"})
    rank_k: int = field(default=2, metadata={"key": "rank.k"})
    provider_mode: str = field(default="replay", metadata={"key": "provider.mode"})
    provider_endpoint: str = field(default="", metadata={"key": "provider.endpoint"})
    provider_model: str = field(default="", metadata={"key": "provider.model"})
    provider_fixture: str = field(default="", metadata={"key": "provider.fixture"})
    provider_concurrency: int = field(default=1, metadata={"key": "provider.concurrency"})
    embed_mode: str = field(default="local", metadata={"key": "embed.mode"})
    embed_endpoint: str = field(default="", metadata={"key": "embed.endpoint"})
    embed_model: str = field(default="", metadata={"key": "embed.model"})
    embed_dimension: int = field(default=256, metadata={"key": "embed.dimension"})
    bmc_depth: int = field(default=3, metadata={"key": "bmc.depth"})
    loop_bound: int = field(default=5, metadata={"key": "loop.bound"})

    def validate(self) -> "PipelineConfig":
        if not -1.0 <= self.retrieve_threshold <= 1.0:
            raise ValueError("retrieve.threshold must be in [-1, 1]")
        for name, value in (
            ("solver.timeout_ms", self.solver_timeout_ms),
            ("gen.max_attempts", self.gen_max_attempts),
            ("rank.k", self.rank_k),
            ("provider.concurrency", self.provider_concurrency),
            ("embed.dimension", self.embed_dimension),
            ("loop.bound", self.loop_bound),
        ):
            if value < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.retrieve_max is not None and self.retrieve_max < 1:
            raise ValueError("retrieve.max must be a positive integer")
        if self.bmc_depth < 0:
            raise ValueError("bmc.depth must be non-negative")
        if self.provider_mode not in _PROVIDER_MODES:
            raise ValueError(f"provider.mode must be one of {', '.join(_PROVIDER_MODES)}")
        if self.embed_mode not in _EMBED_MODES:
            raise ValueError(f"embed.mode must be one of {', '.join(_EMBED_MODES)}")
        return self


def _key_map() -> dict[str, object]:
    mapping: dict[str, object] = {}
    for f in fields(PipelineConfig):
        mapping[f.metadata["key"]] = f
    # legacy spelling of the knowledge-base key
    mapping["knowledgePath"] = mapping["knowledge.path"]
    return mapping


_KEYS = _key_map()


def _convert(f, raw: str, where: str):
    text = raw.strip()
    typ = f.type
    if typ == "str":
        return text
    if typ == "Optional[int]":
        if text.lower() in ("", "none"):
            return None
        typ = "int"
    try:
        if typ == "int":
            return int(text)
        if typ == "float":
            return float(text)
    except ValueError:
        raise ValueError(f"{where}: {f.metadata['key']} expects a {typ}, got {text!r}") from None
    raise AssertionError(f"unhandled config field type {typ}")


def parse_config(text: str, where: str = "<config>") -> PipelineConfig:
    """Parse key=value lines into a validated PipelineConfig."""
    overrides: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{where}:{lineno}: expected key = value, got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        f = _KEYS.get(key)
        if f is None:
            raise ValueError(f"{where}:{lineno}: unknown config key {key!r}")
        overrides[f.name] = _convert(f, raw, f"{where}:{lineno}")
    return replace(PipelineConfig(), **overrides).validate()


def load_config(path: Optional[str]) -> PipelineConfig:
    """Read a config file; no path means all defaults."""
    if path is None:
        return PipelineConfig().validate()
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), path)
