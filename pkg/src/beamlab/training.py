"""Mini-batch training with validation-based early stopping."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import NumericError
from .nn import Adam, restore, snapshot
from .seeding import make_rng

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 128
    max_epochs: int = 200
    early_stop_patience: int = 10
    validation_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if min(self.learning_rate, self.batch_size, self.max_epochs,
               self.early_stop_patience) <= 0:
            raise ValueError("training constants must be positive")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in [0, 1)")


@dataclass
class TrainResult:
    history: list = field(default_factory=list)  # (epoch, train_loss, val_loss)
    best_epoch: int = 0
    epochs_run: int = 0

    @property
    def final_train_loss(self) -> float:
        return self.history[-1][1]


def _epoch_loss(model, dataset: Dataset, indices: np.ndarray, batch_size: int) -> float:
    """Mean loss over the given samples without touching gradients."""
    total = 0.0
    for start in range(0, len(indices), batch_size):
        batch = indices[start:start + batch_size]
        loss = model.loss(dataset.locations[batch], dataset.orientations[batch],
                          dataset.labels[batch])
        total += float(loss.value) * len(batch)
    return total / len(indices)


def train(model, train_set: Dataset, cfg: TrainConfig) -> TrainResult:
    """Minimize the model's cross-entropy loss over shuffled mini-batches.

    A held-out slice of the training split tracks generalization; training
    stops once it fails to improve for ``early_stop_patience`` epochs and
    the best-scoring parameters are restored. With too few samples for a
    validation slice, the training loss is monitored instead.
    """
    n = len(train_set)
    if n == 0:
        raise ValueError("training set is empty")
    params = model.parameters()
    optimizer = Adam(params, lr=cfg.learning_rate)

    perm = make_rng(cfg.seed, "val").permutation(n)
    n_val = int(round(n * cfg.validation_fraction))
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    if len(train_idx) == 0:
        raise ValueError("validation split leaves no training samples")

    result = TrainResult()
    best_loss = math.inf
    best_params = snapshot(params)
    since_best = 0
    for epoch in range(cfg.max_epochs):
        order = train_idx[make_rng(cfg.seed, "shuffle", epoch).permutation(len(train_idx))]
        running = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            optimizer.zero_grad()
            loss = model.loss(train_set.locations[batch],
                              train_set.orientations[batch],
                              train_set.labels[batch])
            if not math.isfinite(float(loss.value)):
                raise NumericError(f"training loss became non-finite at epoch {epoch}")
            loss.backward()
            optimizer.step()
            running += float(loss.value) * len(batch)
        train_loss = running / len(order)
        if len(val_idx):
            monitored = _epoch_loss(model, train_set, val_idx, cfg.batch_size)
        else:
            monitored = train_loss
        result.history.append((epoch, train_loss, monitored))
        log.debug("epoch %d train %.6f monitored %.6f", epoch, train_loss, monitored)
        if monitored < best_loss:
            best_loss = monitored
            best_params = snapshot(params)
            result.best_epoch = epoch
            since_best = 0
        else:
            since_best += 1
            if since_best >= cfg.early_stop_patience:
                break
    result.epochs_run = len(result.history)
    restore(params, best_params)
    return result
