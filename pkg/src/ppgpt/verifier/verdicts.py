"""Verification verdicts and concrete counterexample traces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..frontend.diagnostics import DUMMY_SPAN, Span

__all__ = [
    "Proven",
    "VacuouslyProven",
    "Violated",
    "Unknown",
    "Verdict",
    "Trace",
    "TraceStep",
    "verdict_name",
]


@dataclass(frozen=True)
class TraceStep:
    """One concrete transaction: function name, argument values, and the
    environment (sender, value, timestamp) it ran under."""

    function: str
    args: tuple
    env: dict


@dataclass
class Trace:
    """A concrete, replayable witness that a property fails.

    initial_state maps storage slots to concrete values (ints, bools, or
    map objects) at the start of the call sequence; steps lists the calls
    in order. For rule properties the rule body runs after the steps with
    the recorded rule-local values and environment. length counts every
    call including those made by the property itself and never exceeds
    the exploration depth.
    """

    kind: str  # "function_spec" | "invariant" | "rule"
    property_name: str
    initial_state: dict
    steps: list[TraceStep]
    obligation: str
    obligation_index: int
    span: Span = DUMMY_SPAN
    length: int = 0
    rulevars: dict = field(default_factory=dict)
    rule_env: Optional[dict] = None

    def describe(self) -> str:
        calls = ", ".join(
            f"{s.function}({', '.join(map(_short, s.args))})" for s in self.steps
        )
        return f"[{calls}]" if calls else "[<initial state>]"


def _short(v) -> str:
    s = str(v)
    return s if len(s) <= 24 else s[:21] + "..."


@dataclass(frozen=True)
class Proven:
    pass


@dataclass(frozen=True)
class VacuouslyProven:
    pass


@dataclass
class Violated:
    counterexample: Trace


@dataclass(frozen=True)
class Unknown:
    reason: str


Verdict = Union[Proven, VacuouslyProven, Violated, Unknown]


def verdict_name(v: Verdict) -> str:
    return type(v).__name__
