"""Trained-model archives: a single self-describing .npz layout shared by
the tagger and the pair classifier, plus backend-compatibility checks.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from trialtables.corpus.records import ENTITY_LABELS, RELATION_LABELS
from trialtables.errors import ConfigurationError
from trialtables.features import EmbeddingStore, HashedBackend, load_embeddings
from trialtables.ner.model import NerModel
from trialtables.relex import RelexModel

ARCHIVE_FORMAT_VERSION = 1
TASKS = ("ner", "re")


def _backend_meta(backend) -> dict:
    if backend.kind == "hashed":
        return {"kind": "hashed", "n_buckets": backend.n_buckets, "window": backend.window}
    return {"kind": "embeddings", "dim": backend.token_width}


def save_model(model, path: str | Path) -> None:
    """Write one model to a .npz archive with its metadata alongside.

    The archive is self-describing: task, label set, backend identity and
    the training configuration travel with the weights so loading needs no
    side channel beyond an embedding file for dense backends.
    """
    if isinstance(model, NerModel):
        task, labels = "ner", list(ENTITY_LABELS)
        threshold = None
    elif isinstance(model, RelexModel):
        task, labels = "re", list(RELATION_LABELS)
        threshold = model.threshold
    else:
        raise ConfigurationError(f"cannot archive object of type {type(model).__name__}")
    meta = {
        "format_version": ARCHIVE_FORMAT_VERSION,
        "task": task,
        "labels": labels,
        "backend": _backend_meta(model.backend),
        "config": model.config,
    }
    if threshold is not None:
        meta["threshold"] = threshold
    path = Path(path)
    with path.open("wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta, sort_keys=True)), weights=model.weights)


def _rebuild_backend(meta: dict, embeddings: str | Path | EmbeddingStore | None):
    kind = meta.get("kind")
    if kind == "hashed":
        return HashedBackend(n_buckets=int(meta["n_buckets"]), window=int(meta["window"]))
    if kind == "embeddings":
        if embeddings is None:
            raise ConfigurationError(
                "model was trained on embeddings; supply the embedding file to load it"
            )
        store = embeddings
        if not isinstance(store, EmbeddingStore):
            store = load_embeddings(store)
        if store.dim != int(meta["dim"]):
            raise ConfigurationError(
                f"embedding dim {store.dim} does not match archived dim {meta['dim']}"
            )
        from trialtables.features import EmbeddingBackend

        return EmbeddingBackend(store)
    raise ConfigurationError(f"unknown backend kind {kind!r} in model archive")


def load_model(path: str | Path, embeddings: str | Path | EmbeddingStore | None = None):
    """Reconstruct a NerModel or RelexModel from a .npz archive."""
    path = Path(path)
    with np.load(path, allow_pickle=False) as archive:
        try:
            meta = json.loads(str(archive["meta"]))
            weights = np.asarray(archive["weights"], dtype=np.float64)
        except KeyError as exc:
            raise ConfigurationError(f"{path}: not a model archive (missing {exc})")
    if meta.get("format_version") != ARCHIVE_FORMAT_VERSION:
        raise ConfigurationError(
            f"{path}: unsupported archive format_version {meta.get('format_version')!r}"
        )
    task = meta.get("task")
    if task not in TASKS:
        raise ConfigurationError(f"{path}: unknown task {task!r}")
    expected = list(ENTITY_LABELS) if task == "ner" else list(RELATION_LABELS)
    if meta.get("labels") != expected:
        raise ConfigurationError(f"{path}: label set {meta.get('labels')!r} is not supported")
    backend = _rebuild_backend(meta.get("backend", {}), embeddings)
    config = dict(meta.get("config") or {})
    if task == "ner":
        return NerModel(weights=weights, backend=backend, config=config)
    return RelexModel(
        weights=weights,
        backend=backend,
        threshold=float(meta.get("threshold", 0.5)),
        config=config,
    )


def require_matching_backends(ner_model: NerModel, re_model: RelexModel) -> None:
    """Reject model pairs whose scorer inputs come from different worlds.

    A hashed tagger cannot feed an embeddings pair classifier (and vice
    versa): the pipeline would need two different input preparations for
    the same tokens, which the batch runner does not support.
    """
    a, b = ner_model.backend, re_model.backend
    if a.kind != b.kind:
        raise ConfigurationError(
            f"backend mismatch: tagger uses {a.kind!r} but pair classifier uses {b.kind!r}"
        )
    if a.kind == "embeddings" and a.token_width != b.token_width:
        raise ConfigurationError(
            f"backend mismatch: embedding dims differ ({a.token_width} vs {b.token_width})"
        )
