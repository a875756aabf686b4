"""Literature-index queries for sorting PMIDs into disease-area domains.

Queries are chunked into ten batches and every batch response is cached to a
content-addressed file, so a warmed cache directory makes reruns fully
offline. A batch that can be served neither from cache nor from the client
is a hard failure; there are no silent partial results.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Protocol, Sequence

from trialtables.errors import BatchQueryError, TransportError

N_BATCHES = 10


class IndexClient(Protocol):
    def query(self, term: str, pmids: Sequence[str]) -> set[str]:
        """Return the subset of pmids whose indexed records match the term."""
        ...


class FixtureClient:
    """Offline client backed by a term → matching-id mapping."""

    def __init__(self, matches_by_term: dict[str, Sequence[str]]):
        self._matches = {term: set(ids) for term, ids in matches_by_term.items()}

    def query(self, term: str, pmids: Sequence[str]) -> set[str]:
        return set(pmids) & self._matches.get(term, set())


def make_batches(pmids: Sequence[str]) -> list[list[str]]:
    """Chunk ids into up to N_BATCHES contiguous groups, sizes differing by at most 1.

    Fewer ids than batch slots yields fewer batches, never empty ones.
    """
    n = len(pmids)
    size, extra = divmod(n, N_BATCHES)
    batches = []
    start = 0
    for i in range(N_BATCHES):
        stop = start + size + (1 if i < extra else 0)
        if stop > start:
            batches.append(list(pmids[start:stop]))
        start = stop
    return batches


def _cache_key(term: str, batch: Sequence[str]) -> str:
    payload = json.dumps({"term": term, "pmids": list(batch)}, sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _write_atomic(path: Path, payload: dict) -> None:
    tmp = path.with_name(f"{path.name}.tmp-{os.getpid()}")
    tmp.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
    os.replace(tmp, path)


def partition_by_domain(
    pmids: Sequence[str],
    term: str,
    client: IndexClient | None = None,
    cache_dir: str | Path | None = None,
) -> set[str]:
    """Return the pmids whose records match a disease-area term.

    Each of the ten id batches is answered from the cache when possible and
    from the client otherwise, writing the response back to the cache. Any
    unanswerable batch makes the whole call fail with the failed batch
    indexes, so callers never act on partial results.
    """
    pmids = list(pmids)
    if not pmids:
        return set()
    if client is None and cache_dir is None:
        raise TransportError("no client and no cache directory supplied")
    cache = Path(cache_dir) if cache_dir is not None else None
    if cache is not None:
        cache.mkdir(parents=True, exist_ok=True)

    matches: set[str] = set()
    failed: list[int] = []
    for index, batch in enumerate(make_batches(pmids)):
        if not batch:
            continue
        cache_file = cache / f"{_cache_key(term, batch)}.json" if cache is not None else None
        if cache_file is not None and cache_file.exists():
            matches.update(json.loads(cache_file.read_text(encoding="utf-8"))["matches"])
            continue
        if client is None:
            failed.append(index)
            continue
        try:
            batch_matches = set(client.query(term, batch))
        except Exception:
            failed.append(index)
            continue
        matches.update(batch_matches)
        if cache_file is not None:
            _write_atomic(
                cache_file,
                {"term": term, "pmids": batch, "matches": sorted(batch_matches)},
            )
    if failed:
        raise BatchQueryError(f"query for term {term!r} failed", failed_batches=failed)
    return matches
