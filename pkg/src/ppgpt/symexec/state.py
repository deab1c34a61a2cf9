"""Symbolic machine state and path outcomes.

A SymState tracks the contract storage (flattened to one slot per scalar,
per mapping, per struct field and per array data/length pair), the local
frame, a snapshot of storage at entry for old() references, the path
condition as an ordered conjunct list, and the transaction environment.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

from ..frontend.diagnostics import Span
from .terms import Term, mk_and

__all__ = [
    "Env",
    "StructVal",
    "Obligation",
    "CallRecord",
    "SymState",
    "Normal",
    "Reverted",
    "PathOutcome",
]


@dataclass(frozen=True)
class Env:
    """Transaction environment visible through msg.* and block.*."""

    sender: Term
    value: Term
    timestamp: Term


@dataclass
class StructVal:
    """A struct value in flight: one term per field, in declaration order."""

    struct: str
    fields: dict[str, object]  # field name -> Term | StructVal

    def copy(self) -> "StructVal":
        return StructVal(self.struct, dict(self.fields))


@dataclass(frozen=True)
class Obligation:
    """One assert reached on a path: prove conds => expr.

    conds is the path condition at the assert site, frozen so later
    branching on the same path cannot retroactively weaken it.
    """

    conds: tuple
    expr: Term
    span: Span
    label: str


@dataclass(frozen=True)
class CallRecord:
    """One external .call made on a path, with its fresh result symbols."""

    target: Term
    value: Term
    success: Term
    returndata: Term


@dataclass
class SymState:
    store: dict[str, object] = field(default_factory=dict)
    locals: dict[str, object] = field(default_factory=dict)
    oldStore: dict[str, object] = field(default_factory=dict)
    conds: list[Term] = field(default_factory=list)
    env: Optional[Env] = None
    obligations: list[Obligation] = field(default_factory=list)
    ext_calls: list[CallRecord] = field(default_factory=list)
    entry_params: dict[str, object] = field(default_factory=dict)
    # Shared fresh-name allocator. Deliberately aliased across copies so
    # that diverging branches never mint the same symbol twice.
    names: dict[str, int] = field(default_factory=dict)

    @property
    def pathCond(self) -> Term:
        """The path condition as a single conjunction term."""
        return mk_and(*self.conds)

    def copy(self) -> "SymState":
        return SymState(
            store=dict(self.store),
            locals=dict(self.locals),
            oldStore=self.oldStore,
            conds=list(self.conds),
            env=self.env,
            obligations=list(self.obligations),
            ext_calls=list(self.ext_calls),
            entry_params=self.entry_params,
            names=self.names,
        )

    def assume(self, c: Term) -> None:
        self.conds.append(c)

    def assume_fact(self, c: Term) -> None:
        """Add a type-level fact, skipping duplicates to keep paths lean."""
        if c not in self.conds:
            self.conds.append(c)


@dataclass
class Normal:
    """A path that ran to completion (or was cut off at a bound).

    truncated marks paths stopped early by the loop bound or the call
    depth limit; their obligations cover only the executed prefix and no
    postcondition may be judged against their state.
    """

    state: SymState
    obligations: list[Obligation]
    ret: Optional[object] = None
    truncated: bool = False
    truncation_reason: str = ""


@dataclass
class Reverted:
    """A path that reverted.

    Still carries the obligations recorded before the revert point: an
    assert checked on the path must be proved even when every execution
    continuing past it reverts.
    """

    reason: str
    conds: list[Term]
    obligations: list[Obligation] = field(default_factory=list)

    @property
    def pathCond(self) -> Term:
        return mk_and(*self.conds)


PathOutcome = Union[Normal, Reverted]
