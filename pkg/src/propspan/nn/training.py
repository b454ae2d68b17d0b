"""Training loop with early stopping, plus checkpoint serialization.

Checkpoints are versioned binary files: a 4-byte magic, a uint32 header
length, a JSON header (architecture mode, dimensions, loss weights,
seed, parameter inventory) and the raw parameter blocks as
little-endian 64-bit floats in header order.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .network import MgnModel, TrainingExample, backward, build_model
from .optim import AdamW

CHECKPOINT_MAGIC = b"MGNC"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainSettings:
    """Hyper-parameters of one training run."""

    learning_rate: float = 3e-5
    weight_decay: float = 0.01
    batch_size: int = 16
    max_epochs: int = 100
    patience: int = 7
    warmup_proportion: float = 0.1
    target_score: float | None = None  # stop early once reached (overfit runs)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    sentence_loss: float
    token_loss: float
    validation_score: float


@dataclass(frozen=True)
class TrainingLog:
    entries: tuple[EpochRecord, ...]
    best_epoch: int
    best_score: float

    @property
    def evaluations(self) -> int:
        return len(self.entries)

    def to_tsv(self) -> str:
        lines = ["epoch\ttrain_loss\tsentence_loss\ttoken_loss\tvalidation_score"]
        for e in self.entries:
            lines.append(
                f"{e.epoch}\t{e.train_loss:.6f}\t{e.sentence_loss:.6f}"
                f"\t{e.token_loss:.6f}\t{e.validation_score:.6f}"
            )
        return "\n".join(lines) + "\n"


def train_model(
    model: MgnModel,
    examples: Sequence[TrainingExample],
    settings: TrainSettings,
    eval_fn: Callable[[MgnModel], float],
    rng: np.random.Generator,
) -> TrainingLog:
    """Mini-batch training with early stopping on a validation score.

    After every epoch ``eval_fn`` scores the model; training stops once
    ``patience`` consecutive evaluations fail to improve on the best
    score (or at ``max_epochs``), and the best-scoring parameters are
    restored into ``model``. With a monotonically worsening score the
    loop therefore runs exactly ``patience + 1`` evaluations.
    """
    if not examples:
        raise ValueError("empty training set")
    steps_per_epoch = math.ceil(len(examples) / settings.batch_size)
    warmup_steps = math.ceil(
        settings.warmup_proportion * steps_per_epoch * settings.max_epochs
    )
    optimizer = AdamW(
        model.parameters(),
        lr=settings.learning_rate,
        weight_decay=settings.weight_decay,
        warmup_steps=warmup_steps,
    )

    entries: list[EpochRecord] = []
    best_score = -math.inf
    best_epoch = 0
    best_params = model.copy_parameters()
    since_best = 0

    for epoch in range(1, settings.max_epochs + 1):
        order = rng.permutation(len(examples))
        losses, l1s, l2s = [], [], []
        for start in range(0, len(examples), settings.batch_size):
            batch = [examples[i] for i in order[start:start + settings.batch_size]]
            parts, grads = backward(model, batch)
            optimizer.step(grads)
            losses.append(parts.total)
            l1s.append(parts.sentence_loss)
            l2s.append(parts.token_loss)

        score = eval_fn(model)
        entries.append(
            EpochRecord(
                epoch=epoch,
                train_loss=float(np.mean(losses)),
                sentence_loss=float(np.mean(l1s)),
                token_loss=float(np.mean(l2s)),
                validation_score=score,
            )
        )
        if score > best_score:
            best_score = score
            best_epoch = epoch
            best_params = model.copy_parameters()
            since_best = 0
        else:
            since_best += 1
        if settings.target_score is not None and best_score >= settings.target_score:
            break
        if since_best >= settings.patience:
            break

    model.load_parameters(best_params)
    return TrainingLog(entries=tuple(entries), best_epoch=best_epoch, best_score=best_score)


def save_checkpoint(
    model: MgnModel, path: Path | str, seed: int | None = None
) -> None:
    params = model.parameters()
    header = {
        "format_version": CHECKPOINT_VERSION,
        "mode": model.mode,
        "dim": model.dim,
        "token_classes": model.token_classes,
        "gate_activation": model.gate_activation,
        "alpha": model.alpha,
        "positive_weight": model.positive_weight,
        "seed": seed,
        "parameters": [
            {"name": name, "shape": list(arr.shape)} for name, arr in params.items()
        ],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    chunks = [CHECKPOINT_MAGIC, struct.pack("<I", len(blob)), blob]
    for entry in header["parameters"]:
        chunks.append(np.ascontiguousarray(params[entry["name"]], dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(chunks))


def load_checkpoint(path: Path | str) -> tuple[MgnModel, dict]:
    """Rebuild a model from a checkpoint; returns (model, header)."""
    path = Path(path)
    data = path.read_bytes()
    if data[:4] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a model checkpoint (bad magic)")
    (header_len,) = struct.unpack("<I", data[4:8])
    header = json.loads(data[8:8 + header_len].decode("utf-8"))
    if header.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version")

    model = build_model(
        mode=header["mode"],
        dim=header["dim"],
        gate_activation=header["gate_activation"] or "sigmoid",
        alpha=header["alpha"],
        positive_weight=header["positive_weight"],
        token_classes=header["token_classes"],
        seed=0,
    )
    params = model.parameters()
    offset = 8 + header_len
    values: dict[str, np.ndarray] = {}
    for entry in header["parameters"]:
        name, shape = entry["name"], tuple(entry["shape"])
        if name not in params:
            raise ValueError(f"{path}: unexpected parameter {name!r} for mode {header['mode']!r}")
        count = int(np.prod(shape)) if shape else 1
        nbytes = 8 * count
        block = data[offset:offset + nbytes]
        if len(block) != nbytes:
            raise ValueError(f"{path}: truncated parameter block {name!r}")
        values[name] = np.frombuffer(block, dtype="<f8").reshape(shape).copy()
        offset += nbytes
    if offset != len(data):
        raise ValueError(f"{path}: trailing bytes after parameter blocks")
    model.load_parameters(values)
    return model, header
