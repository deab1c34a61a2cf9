"""Knowledge base: entries, embedding, retrieval, persistence."""

import json
import math
import time

import pytest

from ppgpt.knowledge_store import (
    CorruptStore,
    DimensionMismatch,
    DuplicateEntryError,
    HashedTokenEmbedder,
    KnowledgeEntry,
    KnowledgeStore,
    UnsupportedStoreVersion,
    entry_from_json,
    entry_to_json,
    ingest,
    load,
    persist,
    read_entries_jsonl,
    retrieve,
)

# Thirteen words that hash to thirteen distinct buckets at dimension 256.
# A query of the first ten against an entry sharing exactly seven of them
# (7 shared, 10 each side) has cosine similarity 7 / sqrt(10 * 10) = 0.70.
WORDS = [
    "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf",
    "hotel", "india", "juliet", "kilo", "lima", "mike",
]
QUERY_TEXT = " ".join(WORDS[:10])
NEAR_TEXT = " ".join(WORDS[:7] + WORDS[10:13])


def entry(eid="e1", code="function f() { return 1; }", kind="rule", **over):
    fields = dict(
        id=eid,
        code=code,
        codeSummary="returns one",
        property="rule r() { assert(1 == 1); }",
        propertySummary="trivial identity",
        kind=kind,
        sourceTag="unit-test",
    )
    fields.update(over)
    return KnowledgeEntry(**fields)


def test_entry_validation_rejects_bad_kind():
    with pytest.raises(ValueError):
        entry(kind="poem")


def test_entry_validation_rejects_empty_id():
    with pytest.raises(ValueError):
        entry(eid="")


def test_embedder_is_deterministic():
    emb = HashedTokenEmbedder(dimension=64)
    assert emb.embed("transfer(a, b)") == emb.embed("transfer(a, b)")
    assert emb.embed("CASE insensitive") == emb.embed("case INSENSITIVE")


def test_embedder_zero_text_gets_sentinel():
    emb = HashedTokenEmbedder(dimension=16)
    vec = emb.embed("!!! ***")
    assert vec[0] == 1.0
    assert sum(vec) == 1.0


def test_embedder_rejects_bad_dimension():
    with pytest.raises(ValueError):
        HashedTokenEmbedder(dimension=0)


def test_self_retrieval_is_exact():
    store = KnowledgeStore(HashedTokenEmbedder(dimension=256))
    e = entry()
    store.add(e)
    hits = store.retrieve(e.code, threshold=0.8)
    assert len(hits) == 1
    assert hits[0].entry == e
    assert abs(hits[0].similarity - 1.0) <= 1e-6


def test_threshold_filters_seven_tenths_entry():
    store = KnowledgeStore(HashedTokenEmbedder(dimension=256))
    store.add(entry(eid="near", code=NEAR_TEXT))
    unfiltered = store.retrieve(QUERY_TEXT, threshold=0.0)
    assert len(unfiltered) == 1
    assert unfiltered[0].similarity == pytest.approx(0.70, abs=1e-9)
    assert store.retrieve(QUERY_TEXT, threshold=0.8) == []


def test_retrieval_orders_by_similarity_then_id():
    store = KnowledgeStore(HashedTokenEmbedder(dimension=256))
    store.add(entry(eid="b", code=QUERY_TEXT))
    store.add(entry(eid="a", code=QUERY_TEXT))
    store.add(entry(eid="c", code=NEAR_TEXT))
    hits = store.retrieve(QUERY_TEXT, threshold=0.0)
    assert [h.entry.id for h in hits] == ["a", "b", "c"]
    top = store.retrieve(QUERY_TEXT, threshold=0.0, max_results=2)
    assert [h.entry.id for h in top] == ["a", "b"]


def test_identical_reingest_is_a_no_op():
    store = KnowledgeStore(HashedTokenEmbedder(dimension=32))
    store.add(entry())
    store.add(entry())
    assert len(store.entries) == 1


def test_conflicting_reingest_is_rejected():
    store = KnowledgeStore(HashedTokenEmbedder(dimension=32))
    store.add(entry())
    with pytest.raises(DuplicateEntryError):
        store.add(entry(codeSummary="something else"))


def test_json_round_trip():
    e = entry()
    d = entry_to_json(e)
    assert set(d) == {
        "id", "code", "code_summary", "property", "property_summary", "kind", "source",
    }
    assert entry_from_json(d) == e


def test_persist_load_preserves_retrieval_bytes(tmp_path):
    emb = HashedTokenEmbedder(dimension=256)
    store = ingest([entry(eid="x", code=QUERY_TEXT), entry(eid="y", code=NEAR_TEXT)], emb)
    path = tmp_path / "kb.jsonl"
    persist(store, str(path))
    loaded = load(str(path))

    def snapshot(s):
        return json.dumps(
            [
                [h.entry.id, h.similarity, entry_to_json(h.entry)]
                for h in retrieve(s, QUERY_TEXT, threshold=0.0)
            ],
            sort_keys=True,
        ).encode("utf-8")

    assert snapshot(loaded) == snapshot(store)


def test_persisted_header_is_validated(tmp_path):
    emb = HashedTokenEmbedder(dimension=16)
    store = ingest([entry()], emb)
    path = tmp_path / "kb.jsonl"
    persist(store, str(path))
    lines = path.read_text(encoding="utf-8").splitlines()
    header = json.loads(lines[0])
    assert header["version"] == 1
    assert header["count"] == 1
    assert header["dimension"] == 16

    bad = tmp_path / "future.jsonl"
    header["version"] = 99
    bad.write_text("\n".join([json.dumps(header)] + lines[1:]) + "\n", encoding="utf-8")
    with pytest.raises(UnsupportedStoreVersion):
        load(str(bad))

    trunc = tmp_path / "trunc.jsonl"
    trunc.write_text(lines[0] + "\n", encoding="utf-8")
    with pytest.raises(CorruptStore):
        load(str(trunc))


def test_dimension_mismatch_is_rejected():
    class WrongSize:
        dimension = 8

        def embed(self, text):
            return [1.0] * 9

    store = KnowledgeStore(WrongSize())
    with pytest.raises(DimensionMismatch):
        store.add(entry())


def test_entries_jsonl_reader(tmp_path):
    path = tmp_path / "entries.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(entry_to_json(entry(eid="one"))) + "\n")
        fh.write("\n")
        fh.write(json.dumps(entry_to_json(entry(eid="two"))) + "\n")
    entries = read_entries_jsonl(str(path))
    assert [e.id for e in entries] == ["one", "two"]


def test_retrieval_is_fast():
    emb = HashedTokenEmbedder(dimension=256)
    store = KnowledgeStore(emb)
    for i in range(50):
        store.add(entry(eid=f"e{i:02}", code=f"function f{i}() {{ return {i}; }}"))
    start = time.monotonic()
    for i in range(50):
        store.retrieve(f"function f{i}() {{ return {i}; }}", threshold=0.8)
    assert time.monotonic() - start < 5.0
