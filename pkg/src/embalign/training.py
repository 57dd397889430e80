"""Plain SGD over a paired dataset: the alignment stage.

No momentum, no weight decay, no schedule.  Shuffling is driven by a
seeded generator, so a fixed (data, config, init) triple reproduces the
trained head bit for bit.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DimensionError, NumericError
from .losses import batch_loss, infonce_loss_as_printed, loss_gradient
from .projection import ProjectionHead
from .store import PairedDataset


@dataclass
class TrainConfig:
    loss: str = "infonce"
    temperature: float = 0.01
    learning_rate: float = 1e-3
    batch_size: int = 512
    epochs: int = 5
    seed: int = 0
    shuffle: bool = True
    diag_as_printed: bool = False

    def validate(self):
        if self.loss not in ("infonce", "mse"):
            raise DataError(f"unknown loss {self.loss!r}")
        if self.temperature <= 0:
            raise NumericError("temperature must be positive", code="bad-tau")
        if self.learning_rate <= 0:
            raise NumericError("learning rate must be positive", code="bad-lr")
        min_batch = 2 if self.loss == "infonce" else 1
        if self.batch_size < min_batch:
            raise DataError(
                f"batch size {self.batch_size} too small for {self.loss}"
            )
        if self.epochs < 0:
            raise DataError("epochs must be non-negative")

    def fingerprint(self) -> str:
        payload = json.dumps(
            {
                "loss": self.loss,
                "temperature": self.temperature,
                "learning_rate": self.learning_rate,
                "batch_size": self.batch_size,
                "epochs": self.epochs,
                "seed": self.seed,
                "shuffle": self.shuffle,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class TrainReport:
    epoch_losses: list[float] = field(default_factory=list)
    final_loss: float = math.nan
    steps: int = 0
    config_fingerprint: str = ""
    epoch_losses_as_printed: list[float] | None = None

    def to_dict(self) -> dict:
        out = {
            "epoch_losses": self.epoch_losses,
            "final_loss": self.final_loss,
            "steps": self.steps,
            "config_fingerprint": self.config_fingerprint,
        }
        if self.epoch_losses_as_printed is not None:
            out["epoch_losses_as_printed"] = self.epoch_losses_as_printed
        return out


def train(head: ProjectionHead, data: PairedDataset,
          config: TrainConfig) -> tuple[ProjectionHead, TrainReport]:
    """Run SGD and return a new head; the input head and the dataset
    are left untouched.

    The last partial batch is kept, except that a single leftover row
    is dropped under the contrastive loss (a 1-row contrastive batch
    is degenerate).
    """
    config.validate()
    if len(data) == 0:
        raise DataError("empty dataset")
    if data.visual.dim != head.in_dim or data.target.dim != head.out_dim:
        raise DimensionError(
            f"dataset dims {data.visual.dim}->{data.target.dim} do not match "
            f"head {head.in_dim}->{head.out_dim}"
        )
    x_all, t_all = data.arrays()
    n = x_all.shape[0]
    w = head.weights.copy()
    rng = np.random.default_rng(config.seed)

    report = TrainReport(config_fingerprint=config.fingerprint())
    if config.diag_as_printed:
        report.epoch_losses_as_printed = []

    working = ProjectionHead(w, dict(head.metadata))
    last_loss = math.nan
    for _ in range(config.epochs):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        epoch_losses = []
        epoch_printed = []
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            if config.loss == "infonce" and idx.size < 2:
                continue
            xb, tb = x_all[idx], t_all[idx]
            projected = xb @ working.weights
            loss = batch_loss(projected, tb, config.loss, config.temperature)
            grad = loss_gradient(working, xb, tb, config.loss,
                                 config.temperature)
            working.weights -= config.learning_rate * grad
            epoch_losses.append(loss)
            if config.diag_as_printed:
                epoch_printed.append(
                    infonce_loss_as_printed(projected, tb, config.temperature)
                )
            report.steps += 1
        if epoch_losses:
            report.epoch_losses.append(float(np.mean(epoch_losses)))
            last_loss = epoch_losses[-1]
        if config.diag_as_printed and epoch_printed:
            report.epoch_losses_as_printed.append(float(np.mean(epoch_printed)))

    report.final_loss = last_loss
    working.metadata["train_config"] = config.fingerprint()
    return working, report
