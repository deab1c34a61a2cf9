"""Reference-property store with embedding-based similarity retrieval.

Holds (code, property) reference pairs, embeds the code text of each
entry, and answers "which stored snippets look like this one" queries by
cosine similarity over unit-normalized vectors. Retrieval is a linear
scan; at hundreds of entries nothing faster is warranted.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import urllib.request
from dataclasses import asdict, dataclass
from typing import Optional, Protocol

__all__ = [
    "KnowledgeEntry",
    "QueryResult",
    "KnowledgeStore",
    "EmbeddingProvider",
    "HashedTokenEmbedder",
    "RemoteEmbedder",
    "StoreError",
    "DuplicateEntryError",
    "DimensionMismatch",
    "ProviderError",
    "CorruptStore",
    "UnsupportedStoreVersion",
    "ingest",
    "retrieve",
    "persist",
    "load",
]

STORE_FORMAT_VERSION = 1
ENTRY_KINDS = ("rule", "condition", "invariant")


class StoreError(Exception):
    """Base for knowledge-store failures."""


class DuplicateEntryError(StoreError):
    """Same id ingested twice with different content."""


class DimensionMismatch(StoreError):
    """A vector's dimension differs from the store's."""


class ProviderError(StoreError):
    """The embedding provider failed or returned garbage."""


class CorruptStore(StoreError):
    """A persisted store file cannot be decoded."""


class UnsupportedStoreVersion(StoreError):
    """A persisted store declares a format version this code cannot read."""


@dataclass(frozen=True)
class KnowledgeEntry:
    """One reference pair: a code snippet and the property written for it."""

    id: str
    code: str
    codeSummary: str
    property: str
    propertySummary: str
    kind: str  # rule | condition | invariant
    sourceTag: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("entry id must be non-empty")
        if not self.code:
            raise ValueError(f"entry {self.id}: code must be non-empty")
        if self.kind not in ENTRY_KINDS:
            raise ValueError(
                f"entry {self.id}: kind must be one of {', '.join(ENTRY_KINDS)}, got {self.kind!r}"
            )


@dataclass(frozen=True)
class QueryResult:
    entry: KnowledgeEntry
    similarity: float


class EmbeddingProvider(Protocol):
    dimension: int

    def embed(self, text: str) -> list[float]: ...


_TOKEN = re.compile(r"[A-Za-z0-9_]+")


class HashedTokenEmbedder:
    """Deterministic local embedder: hashed token-frequency vector.

    Each token is hashed to one of `dimension` buckets and counted; the
    store normalizes vectors when computing cosine similarity. Identical
    texts embed identically, so a query equal to a stored code snippet
    scores exactly 1.0.
    """

    def __init__(self, dimension: int = 256):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self.dimension = dimension

    def embed(self, text: str) -> list[float]:
        vec = [0.0] * self.dimension
        for token in _TOKEN.findall(text.lower()):
            h = hashlib.sha256(token.encode("utf-8")).digest()
            vec[int.from_bytes(h[:4], "big") % self.dimension] += 1.0
        if not any(vec):
            vec[0] = 1.0
        return vec


class RemoteEmbedder:
    """HTTP embedding client: POST {"text": ...} returns {"vector": [...]}."""

    def __init__(self, endpoint: str, dimension: int = 256, model: str = "", key: str = "", timeout: float = 30.0):
        self.endpoint = endpoint
        self.dimension = dimension
        self.model = model
        self.key = key
        self.timeout = timeout

    def embed(self, text: str) -> list[float]:
        payload: dict = {"text": text}
        if self.model:
            payload["model"] = self.model
        headers = {"Content-Type": "application/json"}
        if self.key:
            headers["Authorization"] = f"Bearer {self.key}"
        req = urllib.request.Request(
            self.endpoint, data=json.dumps(payload).encode("utf-8"), headers=headers
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                body = json.loads(resp.read().decode("utf-8"))
        except Exception as exc:
            raise ProviderError(f"embedding request failed: {exc}") from exc
        vector = body.get("vector")
        if not isinstance(vector, list) or not all(isinstance(x, (int, float)) for x in vector):
            raise ProviderError("embedding response has no numeric 'vector' field")
        return [float(x) for x in vector]


def _normalize(vec: list[float], dimension: int, owner: str) -> list[float]:
    if len(vec) != dimension:
        raise DimensionMismatch(
            f"{owner}: vector has dimension {len(vec)}, store expects {dimension}"
        )
    norm = math.sqrt(sum(x * x for x in vec))
    if norm == 0.0:
        raise ProviderError(f"{owner}: zero vector cannot be normalized")
    return [x / norm for x in vec]


def _dot(a: list[float], b: list[float]) -> float:
    return sum(x * y for x, y in zip(a, b))


class KnowledgeStore:
    """Immutable-after-ingest collection of entries plus their unit vectors."""

    def __init__(self, embedder: EmbeddingProvider):
        self.embedder = embedder
        self.dimension = embedder.dimension
        self.entries: dict[str, KnowledgeEntry] = {}
        self.vectors: dict[str, list[float]] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, entry: KnowledgeEntry) -> None:
        existing = self.entries.get(entry.id)
        if existing is not None:
            if existing == entry:
                return  # identical re-ingest is a no-op
            raise DuplicateEntryError(
                f"entry {entry.id!r} already stored with different content"
            )
        vec = _normalize(self.embedder.embed(entry.code), self.dimension, f"entry {entry.id}")
        self.entries[entry.id] = entry
        self.vectors[entry.id] = vec

    def retrieve(
        self, queryCode: str, threshold: float = 0.8, max_results: Optional[int] = None
    ) -> list[QueryResult]:
        """Entries whose code similarity to queryCode is at least threshold,
        best first, ties broken by id."""
        q = _normalize(self.embedder.embed(queryCode), self.dimension, "query")
        hits = [
            QueryResult(entry=self.entries[eid], similarity=_dot(q, vec))
            for eid, vec in self.vectors.items()
            if _dot(q, vec) >= threshold
        ]
        hits.sort(key=lambda r: (-r.similarity, r.entry.id))
        if max_results is not None:
            hits = hits[:max_results]
        return hits


def ingest(entries: list[KnowledgeEntry], embedder: EmbeddingProvider) -> KnowledgeStore:
    store = KnowledgeStore(embedder)
    for e in entries:
        store.add(e)
    return store


def retrieve(
    store: KnowledgeStore,
    queryCode: str,
    threshold: float = 0.8,
    max_results: Optional[int] = None,
) -> list[QueryResult]:
    return store.retrieve(queryCode, threshold, max_results)


# -- entry (de)serialization ------------------------------------------------------

_JSON_KEYS = {
    "id": "id",
    "code": "code",
    "code_summary": "codeSummary",
    "property": "property",
    "property_summary": "propertySummary",
    "kind": "kind",
    "source": "sourceTag",
}


def entry_to_json(entry: KnowledgeEntry) -> dict:
    d = asdict(entry)
    return {js: d[attr] for js, attr in _JSON_KEYS.items()}


def entry_from_json(obj: dict) -> KnowledgeEntry:
    missing = [k for k in _JSON_KEYS if k not in obj and k != "source"]
    if missing:
        raise CorruptStore(f"entry record missing keys: {', '.join(missing)}")
    kwargs = {attr: obj.get(js, "") for js, attr in _JSON_KEYS.items()}
    try:
        return KnowledgeEntry(**kwargs)
    except ValueError as exc:
        raise CorruptStore(str(exc)) from exc


def read_entries_jsonl(path: str) -> list[KnowledgeEntry]:
    """Read a knowledge-base file: one JSON entry record per line."""
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptStore(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            entries.append(entry_from_json(obj))
    return entries


# -- store persistence ---------------------------------------------------------

def persist(store: KnowledgeStore, path: str) -> None:
    """Write the store (entries and vectors) as line-delimited JSON with a
    header recording format version, count, and dimension."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "version": STORE_FORMAT_VERSION,
            "count": len(store),
            "dimension": store.dimension,
        }
        fh.write(json.dumps(header) + "\n")
        for eid in store.entries:
            record = entry_to_json(store.entries[eid])
            record["vector"] = store.vectors[eid]
            fh.write(json.dumps(record) + "\n")


def load(path: str, embedder: Optional[EmbeddingProvider] = None) -> KnowledgeStore:
    """Read a persisted store. Queries still need an embedder; by default a
    local deterministic one of the persisted dimension is attached."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in (l.strip() for l in fh) if ln]
    if not lines:
        raise CorruptStore(f"{path}: empty store file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CorruptStore(f"{path}: bad header: {exc}") from exc
    version = header.get("version")
    if version != STORE_FORMAT_VERSION:
        raise UnsupportedStoreVersion(
            f"{path}: store format version {version!r}, this build reads {STORE_FORMAT_VERSION}"
        )
    count = header.get("count")
    dimension = header.get("dimension")
    if not isinstance(count, int) or not isinstance(dimension, int):
        raise CorruptStore(f"{path}: header missing count/dimension")
    if len(lines) - 1 != count:
        raise CorruptStore(
            f"{path}: header says {count} entries, file has {len(lines) - 1}"
        )
    if embedder is None:
        embedder = HashedTokenEmbedder(dimension)
    if embedder.dimension != dimension:
        raise DimensionMismatch(
            f"{path}: store dimension {dimension}, embedder dimension {embedder.dimension}"
        )
    store = KnowledgeStore(embedder)
    for lineno, line in enumerate(lines[1:], 2):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptStore(f"{path}:{lineno}: not valid JSON: {exc}") from exc
        vector = obj.pop("vector", None)
        if not isinstance(vector, list):
            raise CorruptStore(f"{path}:{lineno}: record has no vector")
        entry = entry_from_json(obj)
        vec = [float(x) for x in vector]
        if len(vec) != dimension:
            raise CorruptStore(
                f"{path}:{lineno}: vector length {len(vec)}, expected {dimension}"
            )
        store.entries[entry.id] = entry
        # Persisted vectors are already normalized; renormalizing would
        # perturb similarities by float rounding, breaking byte-for-byte
        # reproducibility of retrieval results across a save/load cycle.
        store.vectors[entry.id] = vec
    return store
