"""Semantic types assigned by the resolver."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Type:
    def __str__(self) -> str:  # pragma: no cover - overridden
        return self.__class__.__name__


@dataclass(frozen=True)
class UIntType(Type):
    def __str__(self) -> str:
        return "uint256"


@dataclass(frozen=True)
class IntType(Type):
    def __str__(self) -> str:
        return "int256"


@dataclass(frozen=True)
class BoolType(Type):
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class AddressType(Type):
    def __str__(self) -> str:
        return "address"


@dataclass(frozen=True)
class Bytes32Type(Type):
    def __str__(self) -> str:
        return "bytes32"


@dataclass(frozen=True)
class StringType(Type):
    def __str__(self) -> str:
        return "string"


@dataclass(frozen=True)
class MappingType(Type):
    key: Type
    value: Type

    def __str__(self) -> str:
        return f"mapping({self.key} => {self.value})"


@dataclass(frozen=True)
class ArrayType(Type):
    elem: Type

    def __str__(self) -> str:
        return f"{self.elem}[]"


@dataclass(frozen=True)
class StructType(Type):
    name: str

    def __str__(self) -> str:
        return self.name


UINT = UIntType()
INT = IntType()
BOOL = BoolType()
ADDRESS = AddressType()
BYTES32 = Bytes32Type()
STRING = StringType()

# Scalars are the types a solver symbol can carry directly.
SCALARS = (UIntType, IntType, BoolType, AddressType, Bytes32Type, StringType)
# Int-like scalars: modeled as mathematical integers with range constraints.
INTLIKE = (UIntType, IntType, AddressType, Bytes32Type, StringType)
ARITH = (UIntType, IntType)


def is_scalar(t: Type) -> bool:
    return isinstance(t, SCALARS)


def is_intlike(t: Type) -> bool:
    return isinstance(t, INTLIKE)


def type_range(t: Type) -> tuple[int, int] | None:
    """Inclusive value range enforced for symbols of int-like types."""
    if isinstance(t, UIntType):
        return (0, 2**256 - 1)
    if isinstance(t, IntType):
        return (-(2**255), 2**255 - 1)
    if isinstance(t, AddressType):
        return (0, 2**160 - 1)
    if isinstance(t, Bytes32Type):
        return (0, 2**256 - 1)
    if isinstance(t, StringType):
        # Opaque interned code; non-negative.
        return (0, 2**256 - 1)
    return None
