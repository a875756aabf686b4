"""Reproducible train/dev/test splitting and sampling helpers."""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass
from pathlib import Path

from trialtables.corpus.records import Doc
from trialtables.errors import (
    ContractError,
    DomainLookupError,
    FractionRangeError,
    PairingError,
    SplitSizeError,
)

SPLIT_NAMES = ("train", "dev", "test")

# Floating-point guard for size arithmetic: ratios like 0.1 are not exact
# binary fractions, so n*ratio can land a hair above or below the intended
# integer.
_EPS = 1e-9


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[Doc, ...]
    dev: tuple[Doc, ...]
    test: tuple[Doc, ...]
    seed: int
    ratios: tuple[float, float, float]

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (len(self.train), len(self.dev), len(self.test))

    def manifest_lines(self) -> list[str]:
        lines = [f"seed={self.seed}"]
        for name in SPLIT_NAMES:
            for doc in getattr(self, name):
                lines.append(f"{doc.doc_id}\t{name}")
        return lines

    def write_manifest(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.manifest_lines()) + "\n", encoding="utf-8")


def split_sizes(n: int, ratios: tuple[float, float, float]) -> tuple[int, int, int]:
    """Floor-based split sizes with the remainder assigned to train.

    Dev and test sizes come from flooring the cumulative ratio boundaries,
    so each is at most its exact share and train absorbs what is left.
    """
    _check_ratios(ratios)
    dev = math.floor(n * ratios[1] + _EPS)
    test = math.floor(n * (ratios[1] + ratios[2]) + _EPS) - dev
    return (n - dev - test, dev, test)


def _check_ratios(ratios) -> None:
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise SplitSizeError(f"ratios must be three non-negative numbers, got {ratios!r}")
    if abs(sum(ratios) - 1.0) > _EPS:
        raise SplitSizeError(f"ratios must sum to 1, got {sum(ratios)!r}")


def split_dataset(docs, ratios=(0.7, 0.1, 0.2), seed: int = 0) -> DatasetSplit:
    """Shuffle docs under the seed and partition them into train/dev/test.

    An empty dev or test split is legal for small inputs but worth flagging,
    so it emits a warning rather than an error.
    """
    docs = list(docs)
    _check_ratios(ratios)
    if len(docs) < 3:
        raise SplitSizeError(f"need at least 3 docs to split, got {len(docs)}")
    ids = [doc.doc_id for doc in docs]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ContractError(f"duplicate doc ids: {', '.join(dupes)}")

    shuffled = docs[:]
    random.Random(seed).shuffle(shuffled)
    n_train, n_dev, n_test = split_sizes(len(shuffled), ratios)
    for name, size in (("dev", n_dev), ("test", n_test)):
        if size == 0:
            warnings.warn(f"{name} split is empty for n={len(shuffled)}", stacklevel=2)
    return DatasetSplit(
        train=tuple(shuffled[:n_train]),
        dev=tuple(shuffled[n_train : n_train + n_dev]),
        test=tuple(shuffled[n_train + n_dev :]),
        seed=seed,
        ratios=tuple(ratios),
    )


def read_manifest(path: str | Path) -> tuple[int, list[tuple[str, str]]]:
    """Parse a split manifest into its seed and (doc-id, split) assignments."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("seed="):
        raise ContractError(f"{path}: manifest must start with a seed= header")
    seed = int(lines[0].removeprefix("seed="))
    assignments = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or parts[1] not in SPLIT_NAMES:
            raise ContractError(f"{path}:line {lineno}: malformed manifest line {line!r}")
        assignments.append((parts[0], parts[1]))
    return seed, assignments


def apply_manifest(docs, path: str | Path) -> DatasetSplit:
    """Rebuild a DatasetSplit by assigning docs per a written manifest."""
    seed, assignments = read_manifest(path)
    by_id = {doc.doc_id: doc for doc in docs}
    missing = [doc_id for doc_id, _ in assignments if doc_id not in by_id]
    unassigned = set(by_id) - {doc_id for doc_id, _ in assignments}
    if missing or unassigned:
        raise PairingError(
            f"manifest/doc mismatch: missing docs {sorted(missing)}, "
            f"unassigned docs {sorted(unassigned)}"
        )
    buckets = {name: [] for name in SPLIT_NAMES}
    for doc_id, name in assignments:
        buckets[name].append(by_id[doc_id])
    return DatasetSplit(
        train=tuple(buckets["train"]),
        dev=tuple(buckets["dev"]),
        test=tuple(buckets["test"]),
        seed=seed,
        ratios=(0.0, 0.0, 0.0) if not docs else _infer_ratios(buckets, len(docs)),
    )


def _infer_ratios(buckets, n):
    return tuple(len(buckets[name]) / n for name in SPLIT_NAMES)


def stratify_fraction(docs, fraction: float, seed: int = 0) -> list[Doc]:
    """Sample ceil(fraction*n) docs without replacement, seeded.

    Fraction 1 is the identity: the input comes back in its original order.
    """
    if not 0 < fraction <= 1:
        raise FractionRangeError(f"fraction must be in (0, 1], got {fraction!r}")
    docs = list(docs)
    if fraction == 1:
        return docs
    if not docs:
        return []
    k = max(1, math.ceil(fraction * len(docs) - _EPS))
    return random.Random(seed).sample(docs, k)


@dataclass(frozen=True)
class HoldoutSplit:
    rest: tuple[Doc, ...]
    holdout: tuple[Doc, ...]


def domain_holdout(docs, holdout_domain: str) -> HoldoutSplit:
    """Set aside every doc of one domain as an unseen test set."""
    docs = list(docs)
    untagged = [doc.doc_id for doc in docs if not doc.meta.get("domain")]
    if untagged:
        raise ContractError(f"docs without a domain tag: {', '.join(untagged[:5])}")
    present = {doc.meta["domain"] for doc in docs}
    if holdout_domain not in present:
        raise DomainLookupError(
            f"domain {holdout_domain!r} not in corpus (have: {', '.join(sorted(present))})"
        )
    holdout = tuple(d for d in docs if d.meta["domain"] == holdout_domain)
    rest = tuple(d for d in docs if d.meta["domain"] != holdout_domain)
    return HoldoutSplit(rest=rest, holdout=holdout)


def mixed_domain_pool(docs, domains, total: int, seed: int = 0) -> list[Doc]:
    """Build a size-capped training pool with equal per-domain quotas.

    Each listed domain contributes total // len(domains) docs, sampled and
    then shuffled together under one seeded generator.
    """
    docs = list(docs)
    domains = list(domains)
    if not domains or total <= 0:
        raise SplitSizeError(f"need domains and a positive total, got {domains!r}, {total}")
    quota = total // len(domains)
    rng = random.Random(seed)
    pool = []
    for domain in domains:
        candidates = [d for d in docs if d.meta.get("domain") == domain]
        if not candidates:
            raise DomainLookupError(f"domain {domain!r} not in corpus")
        if len(candidates) < quota:
            raise SplitSizeError(
                f"domain {domain!r} has {len(candidates)} docs, quota is {quota}"
            )
        pool.extend(rng.sample(candidates, quota))
    rng.shuffle(pool)
    return pool
