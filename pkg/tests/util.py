"""Shared helpers for the test suite."""

from __future__ import annotations

import dataclasses
import os

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
CORPUS = os.path.join(os.path.dirname(__file__), "corpus")


def fixture(name: str) -> str:
    return os.path.join(FIXTURES, name)


def read_fixture(name: str) -> str:
    with open(fixture(name), "r", encoding="utf-8") as fh:
        return fh.read()


def strip(node):
    """Convert a syntax tree to a nested comparable structure, dropping
    source spans so trees from different renderings compare equal."""
    if dataclasses.is_dataclass(node) and not isinstance(node, type):
        items = []
        for f in dataclasses.fields(node):
            if f.name == "span":
                continue
            items.append((f.name, strip(getattr(node, f.name))))
        return (type(node).__name__, tuple(items))
    if isinstance(node, (list, tuple)):
        return tuple(strip(x) for x in node)
    if isinstance(node, dict):
        return tuple(sorted((k, strip(v)) for k, v in node.items()))
    return node
