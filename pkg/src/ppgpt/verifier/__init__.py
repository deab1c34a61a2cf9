"""Property verification: modular symbolic proofs, bounded refutation with
replay-checked counterexample traces, and a concrete reference interpreter."""

from .concrete import ConcreteInterp, Diverged, Revert
from .core import (
    VerifierConfig,
    bmc_refute,
    replay,
    verify_function_spec,
    verify_invariant,
    verify_rule,
)
from .verdicts import (
    Proven,
    Trace,
    TraceStep,
    Unknown,
    VacuouslyProven,
    Verdict,
    Violated,
    verdict_name,
)

__all__ = [
    "ConcreteInterp",
    "Diverged",
    "Revert",
    "VerifierConfig",
    "bmc_refute",
    "replay",
    "verify_function_spec",
    "verify_invariant",
    "verify_rule",
    "Proven",
    "Trace",
    "TraceStep",
    "Unknown",
    "VacuouslyProven",
    "Verdict",
    "Violated",
    "verdict_name",
]
