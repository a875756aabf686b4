"""Scorer inputs for the classifiers: hashed sparse features or precomputed
dense embeddings, behind one backend interface so model code is agnostic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from trialtables.corpus.records import Doc, is_numeric_token
from trialtables.errors import (
    AlignmentError,
    ContractError,
    EmbeddingFormatError,
    OffsetRangeError,
)

N_BUCKETS_DEFAULT = 1 << 20
EMBEDDING_FORMAT_VERSION = 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(text: str) -> int:
    """FNV-1a 64-bit hash over the UTF-8 bytes of the input."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def hash_feature(feature: str, n_buckets: int = N_BUCKETS_DEFAULT) -> int:
    return fnv1a_64(feature) % n_buckets


def word_shape(text: str) -> str:
    """Character-class transcription: X/x/d for upper/lower/digit, others kept."""
    out = []
    for ch in text:
        if ch.isdigit():
            out.append("d")
        elif ch.isalpha():
            out.append("X" if ch.isupper() else "x")
        else:
            out.append(ch)
    return "".join(out)


def load_units() -> frozenset[str]:
    """Measurement-unit lexicon entries, lowercased."""
    raw = resources.files("trialtables.data").joinpath("units.txt").read_text("utf-8")
    entries = set()
    for line in raw.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.add(line.lower())
    return frozenset(entries)


def is_unit_mention(doc: Doc, index: int, units: frozenset[str]) -> bool:
    """True when the token, alone or with a neighbour, is a unit phrase."""
    text = doc.tokens[index].text.lower()
    if text in units or text.endswith("%"):
        return True
    if index + 1 < len(doc.tokens) and f"{text} {doc.tokens[index + 1].text.lower()}" in units:
        return True
    if index > 0 and f"{doc.tokens[index - 1].text.lower()} {text}" in units:
        return True
    return False


def token_feature_strings(
    doc: Doc, index: int, window: int = 2, units: frozenset[str] | None = None
) -> list[str]:
    """Raw (unhashed) feature strings describing one token in context."""
    if not 0 <= index < len(doc.tokens):
        raise OffsetRangeError(f"token index {index} outside 0..{len(doc.tokens) - 1}")
    if units is None:
        units = load_units()
    text = doc.tokens[index].text
    feats = [
        f"low={text.lower()}",
        f"shape={word_shape(text)}",
        f"pre3={text[:3].lower()}",
        f"suf3={text[-3:].lower()}",
    ]
    if is_numeric_token(text):
        feats.append("numeric")
    if is_unit_mention(doc, index, units):
        feats.append("unit")
    for offset in range(-window, window + 1):
        if offset == 0:
            continue
        neighbour = index + offset
        if neighbour < 0:
            form = "<s>"
        elif neighbour >= len(doc.tokens):
            form = "</s>"
        else:
            form = doc.tokens[neighbour].text.lower()
        feats.append(f"w{offset:+d}={form}")
    return feats


def hash_strings(strings, n_buckets: int = N_BUCKETS_DEFAULT) -> dict[int, float]:
    """Hash feature strings into a bucket→count map; collisions accumulate."""
    vec: dict[int, float] = {}
    for s in strings:
        bucket = hash_feature(s, n_buckets)
        vec[bucket] = vec.get(bucket, 0.0) + 1.0
    return vec


def hash_token_features(
    doc: Doc,
    index: int,
    window: int = 2,
    n_buckets: int = N_BUCKETS_DEFAULT,
    units: frozenset[str] | None = None,
) -> dict[int, float]:
    """Sparse hashed feature vector for one token in its context."""
    return hash_strings(token_feature_strings(doc, index, window, units), n_buckets)


def score_input(weights: np.ndarray, x) -> np.ndarray:
    """Linear scores for every weight row given one scorer input.

    Accepts both input representations: a sparse bucket→value map or a dense
    vector whose length matches the weight columns.
    """
    if isinstance(x, dict):
        if not x:
            return np.zeros(weights.shape[0])
        idx = np.fromiter(x.keys(), dtype=np.int64, count=len(x))
        vals = np.fromiter(x.values(), dtype=np.float64, count=len(x))
        return weights[:, idx] @ vals
    return weights @ x


def pool_mean(vectors):
    """Elementwise (dense) or bucketwise (sparse) arithmetic mean.

    Bucketwise means divide by the vector count, so a bucket absent from a
    vector contributes zero for it.
    """
    vectors = list(vectors)
    if not vectors:
        raise ContractError("pool_mean over zero vectors")
    if isinstance(vectors[0], dict):
        totals: dict[int, float] = {}
        for vec in vectors:
            for key, value in vec.items():
                totals[key] = totals.get(key, 0.0) + value
        return {key: value / len(vectors) for key, value in totals.items()}
    return np.mean(np.asarray(vectors, dtype=np.float64), axis=0)


class EmbeddingStore:
    """Per-token dense vectors keyed by doc id, immutable after load."""

    def __init__(self, dim: int, by_id: dict[str, np.ndarray] | None = None):
        self.dim = dim
        self._by_id = dict(by_id or {})

    def __len__(self) -> int:
        return len(self._by_id)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(self._by_id)

    def vectors_for(self, doc: Doc) -> np.ndarray:
        """The (token_count, dim) matrix for a Doc; absence is an error here."""
        arr = self._by_id.get(doc.doc_id)
        if arr is None:
            raise AlignmentError(f"no embeddings for doc {doc.doc_id}")
        if arr.shape[0] != len(doc.tokens):
            raise AlignmentError(
                f"doc {doc.doc_id} has {len(doc.tokens)} tokens but {arr.shape[0]} vectors"
            )
        return arr


def load_embeddings(path: str | Path) -> EmbeddingStore:
    """Load a line-delimited embedding file: header record, then one per doc."""
    path = Path(path)
    dim: int | None = None
    by_id: dict[str, np.ndarray] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EmbeddingFormatError(f"{path}:line {lineno}: invalid JSON: {exc.msg}")
            if dim is None:
                if "format_version" not in record or "dim" not in record:
                    raise EmbeddingFormatError(
                        f"{path}:line {lineno}: first record must be a "
                        "{format_version, dim} header"
                    )
                if record["format_version"] != EMBEDDING_FORMAT_VERSION:
                    raise EmbeddingFormatError(
                        f"{path}: unsupported format_version {record['format_version']!r}"
                    )
                dim = int(record["dim"])
                if dim <= 0:
                    raise EmbeddingFormatError(f"{path}: dim must be positive, got {dim}")
                continue
            for key in ("id", "dim", "vectors"):
                if key not in record:
                    raise EmbeddingFormatError(f"{path}:line {lineno}: missing key {key!r}")
            if record["dim"] != dim:
                raise EmbeddingFormatError(
                    f"{path}:line {lineno}: dim {record['dim']} != header dim {dim}"
                )
            if record["id"] in by_id:
                raise EmbeddingFormatError(f"{path}:line {lineno}: duplicate id {record['id']!r}")
            vectors = record["vectors"]
            if any(len(v) != dim for v in vectors):
                raise EmbeddingFormatError(
                    f"{path}:line {lineno}: vector length differs from dim {dim}"
                )
            by_id[record["id"]] = np.asarray(vectors, dtype=np.float64).reshape(-1, dim)
    return EmbeddingStore(dim=dim or 0, by_id=by_id)


def write_embeddings(store: EmbeddingStore, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps({"format_version": EMBEDDING_FORMAT_VERSION, "dim": store.dim}))
        fh.write("\n")
        for doc_id in store.ids:
            arr = store._by_id[doc_id]
            fh.write(
                json.dumps(
                    {"id": doc_id, "dim": store.dim, "vectors": arr.tolist()},
                    sort_keys=True,
                )
            )
            fh.write("\n")


class HashedBackend:
    """Sparse scorer-input backend over hashed surface features."""

    kind = "hashed"

    def __init__(self, n_buckets: int = N_BUCKETS_DEFAULT, window: int = 2):
        self.n_buckets = n_buckets
        self.window = window
        self.units = load_units()

    @property
    def token_width(self) -> int:
        return self.n_buckets

    def token_vector(self, doc: Doc, index: int) -> dict[int, float]:
        return hash_token_features(doc, index, self.window, self.n_buckets, self.units)

    def token_strings(self, doc: Doc, index: int) -> list[str]:
        return token_feature_strings(doc, index, self.window, self.units)

    def span_pool(self, doc: Doc, token_start: int, token_end: int) -> dict[int, float]:
        return pool_mean([self.token_vector(doc, i) for i in range(token_start, token_end + 1)])

    def hash_strings(self, strings) -> dict[int, float]:
        return hash_strings(strings, self.n_buckets)


class EmbeddingBackend:
    """Dense scorer-input backend over precomputed per-token vectors."""

    kind = "embeddings"

    def __init__(self, store: EmbeddingStore):
        self.store = store

    @property
    def token_width(self) -> int:
        return self.store.dim

    def token_vector(self, doc: Doc, index: int) -> np.ndarray:
        return self.store.vectors_for(doc)[index]

    def span_pool(self, doc: Doc, token_start: int, token_end: int) -> np.ndarray:
        return pool_mean(list(self.store.vectors_for(doc)[token_start : token_end + 1]))
