"""Shared training machinery: config, batching, dropout, optimizers,
and the early-stopping loop both classifier trainers run on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from trialtables.errors import ConfigurationError

EVAL_INTERVAL_DEFAULT = 50

# Backend-specific defaults: the adaptive dense path uses the published
# fine-tuning rate, the sparse baseline a plain descent rate.
LEARNING_RATE_DENSE = 5e-5
LEARNING_RATE_SPARSE = 0.1


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 64
    dropout: float = 0.2
    learning_rate: float | None = None
    patience_steps: int = 1000
    max_steps: int = 20000
    eval_interval: int = EVAL_INTERVAL_DEFAULT
    seed: int = 0

    def __post_init__(self):
        problems = []
        if self.batch_size <= 0:
            problems.append("batch_size must be positive")
        if not 0 <= self.dropout < 1:
            problems.append("dropout must be in [0, 1)")
        if self.learning_rate is not None and self.learning_rate <= 0:
            problems.append("learning_rate must be positive")
        if self.patience_steps <= 0 or self.max_steps <= 0 or self.eval_interval <= 0:
            problems.append("step counts must be positive")
        if self.patience_steps > self.max_steps:
            problems.append("patience_steps must not exceed max_steps")
        if problems:
            raise ConfigurationError("; ".join(problems))

    def resolve_learning_rate(self, backend_kind: str) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return LEARNING_RATE_SPARSE if backend_kind == "hashed" else LEARNING_RATE_DENSE

    def snapshot(self, **extras) -> dict:
        out = asdict(self)
        out.update(extras)
        return out


def apply_dropout(x, rate: float, rng: np.random.Generator):
    """Inverted feature dropout: drop with probability ``rate``, rescale the rest."""
    if rate == 0:
        return x
    keep = 1.0 - rate
    if isinstance(x, dict):
        mask = rng.random(len(x))
        return {
            key: value / keep
            for (key, value), m in zip(x.items(), mask)
            if m >= rate
        }
    mask = rng.random(x.shape) >= rate
    return x * mask / keep


class Adam:
    """Adaptive per-parameter steps for the dense backend."""

    def __init__(self, shape, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)
        self.t = 0

    def step(self, weights: np.ndarray, grad: np.ndarray) -> None:
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        weights -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def sgd_sparse_update(weights: np.ndarray, rows, cols, deltas, lr: float) -> None:
    """Scatter-subtract averaged gradients into a large weight matrix."""
    if len(rows) == 0:
        return
    np.subtract.at(
        weights,
        (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64)),
        lr * np.asarray(deltas, dtype=np.float64),
    )


class _Batches:
    """Per-epoch shuffled index batches, reshuffling when an epoch ends."""

    def __init__(self, n: int, batch_size: int, rng: np.random.Generator):
        self.n = n
        self.batch_size = min(batch_size, n)
        self.rng = rng
        self.order = np.arange(n)
        self.rng.shuffle(self.order)
        self.pos = 0

    def next(self) -> np.ndarray:
        if self.pos + self.batch_size > self.n:
            self.rng.shuffle(self.order)
            self.pos = 0
        batch = self.order[self.pos : self.pos + self.batch_size]
        self.pos += self.batch_size
        return batch


def training_loop(
    n_examples: int,
    config: TrainConfig,
    rng: np.random.Generator,
    update,
    dev_score,
    snapshot,
    restore,
) -> list[dict]:
    """Run batched updates with periodic dev evaluation and early stopping.

    ``update(batch_indices)`` performs one optimization step and returns the
    batch loss; ``dev_score()`` returns the dev metric or None when there is
    no dev set, which disables early stopping and runs to max_steps.
    Improvements snapshot the weights; the best snapshot is restored at the
    end. Returns the training log.
    """
    batches = _Batches(n_examples, config.batch_size, rng)
    log: list[dict] = []
    best_score = float("-inf")
    best_step = 0
    best_state = snapshot()
    window_losses: list[float] = []
    for step in range(1, config.max_steps + 1):
        window_losses.append(float(update(batches.next())))
        if step % config.eval_interval != 0:
            continue
        score = dev_score()
        log.append(
            {
                "step": step,
                "loss": float(np.mean(window_losses)),
                "dev_f1": None if score is None else float(score),
            }
        )
        window_losses.clear()
        if score is None:
            continue
        if score > best_score:
            best_score = score
            best_step = step
            best_state = snapshot()
        elif step - best_step >= config.patience_steps:
            break
    if best_score > float("-inf"):
        restore(best_state)
    return log


def write_training_log(log, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for entry in log:
            fh.write(json.dumps(entry, sort_keys=True))
            fh.write("\n")
