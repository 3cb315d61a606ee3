"""Training loop, evaluation, and confusion machinery.

All randomness in a run flows from one seed through named substreams
(parameter init, epoch shuffling, dropout), so single-threaded training is
bitwise reproducible.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .autodiff import Adam, NonFiniteGradientError, Tensor, backward
from .autodiff import ops
from .models import Network, format_features
from .signals import Dataset

_STREAM_SHUFFLE = 0x5FF1
_STREAM_DROPOUT = 0xD0D0


class TrainingDivergedError(RuntimeError):
    """Loss or a gradient became non-finite; carries epoch/batch context."""

    def __init__(self, epoch: int, batch: int, detail: str):
        super().__init__(f"training diverged at epoch {epoch}, batch {batch}: {detail}")
        self.epoch = epoch
        self.batch = batch


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 128
    lr: float = 0.001
    epochs: int = 150
    seed: int = 0
    patience: int | None = None  # early stop after this many epochs without val improvement
    stop_at_val_accuracy: float | None = None  # optional desk-scale shortcut

    def __post_init__(self):
        if self.batch_size <= 0 or self.epochs < 0 or self.lr < 0:
            raise ValueError("batch_size must be positive; epochs and lr nonnegative")

    def manifest_entries(self) -> dict[str, str]:
        return {
            "batch_size": str(self.batch_size),
            "lr": str(self.lr),
            "epochs": str(self.epochs),
            "seed": str(self.seed),
            "patience": str(self.patience),
            "stop_at_val_accuracy": str(self.stop_at_val_accuracy),
        }


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_accuracy: float


@dataclass
class TrainResult:
    network: Network
    history: list[EpochRecord]
    best_epoch: int
    best_val_accuracy: float


def _features_for(net_spec_format: str, ds: Dataset, split: str, dtype=np.float32):
    idx = ds.indices(split)
    features = format_features(ds.iq[idx], net_spec_format, dtype=dtype)
    return features, ds.labels[idx].astype(np.int64)


def train(network: Network, dataset: Dataset, cfg: TrainConfig) -> TrainResult:
    """Train on the dataset's train split, checkpointing the best-val epoch.

    The returned network holds the parameters of the epoch with the highest
    validation accuracy (first epoch wins ties), never worse than the final
    epoch.  ``network`` itself is left at the final-epoch parameters.
    """
    fmt = network.spec.input_format
    x_train, y_train = _features_for(fmt, dataset, "train")
    x_val, y_val = _features_for(fmt, dataset, "val")
    if len(x_train) == 0 or len(x_val) == 0:
        raise ValueError("dataset needs non-empty train and val splits")

    shuffle_rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, _STREAM_SHUFFLE)))
    dropout_rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, _STREAM_DROPOUT)))
    optimizer = Adam(network.params, lr=cfg.lr)

    history: list[EpochRecord] = []
    best_params = {k: p.data.copy() for k, p in network.params.items()}
    best_val = -1.0
    best_epoch = 0
    stale = 0

    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(len(x_train))
        loss_sum = 0.0
        for batch_no, start in enumerate(range(0, len(order), cfg.batch_size)):
            rows = order[start : start + cfg.batch_size]
            x = Tensor(x_train[rows])
            loss = ops.softmax_xent(network.forward_graph(x, train=True, rng=dropout_rng)[0], y_train[rows])
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingDivergedError(epoch, batch_no, f"loss={value}")
            optimizer.zero_grad()
            backward(loss)
            try:
                optimizer.step()
            except NonFiniteGradientError as exc:
                raise TrainingDivergedError(epoch, batch_no, str(exc)) from exc
            loss_sum += value * len(rows)

        val_accuracy = _accuracy_on(network, x_val, y_val, cfg.batch_size)
        history.append(EpochRecord(epoch, loss_sum / len(order), val_accuracy))
        if val_accuracy > best_val:
            best_val = val_accuracy
            best_epoch = epoch
            best_params = {k: p.data.copy() for k, p in network.params.items()}
            stale = 0
        else:
            stale += 1
        if cfg.stop_at_val_accuracy is not None and val_accuracy >= cfg.stop_at_val_accuracy:
            break
        if cfg.patience is not None and stale > cfg.patience:
            break

    if cfg.epochs == 0:
        best_params = {k: p.data.copy() for k, p in network.params.items()}
        best_val = _accuracy_on(network, x_val, y_val, cfg.batch_size)

    best_net = Network(network.spec, {k: Tensor(v, name=k) for k, v in best_params.items()})
    return TrainResult(best_net, history, best_epoch, best_val)


def _accuracy_on(network: Network, features: np.ndarray, labels: np.ndarray, batch_size: int) -> float:
    hits = 0
    for start in range(0, len(features), batch_size):
        logits = network.logits(features[start : start + batch_size])
        hits += int((np.argmax(logits, axis=1) == labels[start : start + batch_size]).sum())
    return hits / len(features)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

class ConfusionMatrix:
    """Row-true confusion counts plus a row-stochastic view.

    Rows with no samples normalize to all-zero and are flagged rather than
    silently divided.
    """

    def __init__(self, counts: np.ndarray, labels: tuple[str, ...]):
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError(f"confusion counts must be square, got {counts.shape}")
        if counts.shape[0] != len(labels):
            raise ValueError("label count does not match matrix size")
        self.counts = counts
        self.labels = tuple(labels)

    @property
    def zero_rows(self) -> np.ndarray:
        return self.counts.sum(axis=1) == 0

    @property
    def row_normalized(self) -> np.ndarray:
        totals = self.counts.sum(axis=1, keepdims=True)
        safe = np.where(totals == 0, 1, totals)
        return self.counts / safe

    @classmethod
    def from_predictions(cls, y_true, y_pred, labels: tuple[str, ...]) -> "ConfusionMatrix":
        n = len(labels)
        counts = np.zeros((n, n), dtype=np.int64)
        np.add.at(counts, (np.asarray(y_true, dtype=int), np.asarray(y_pred, dtype=int)), 1)
        return cls(counts, labels)

    def to_csv(self, path: str | Path, normalized: bool = True) -> None:
        matrix = self.row_normalized if normalized else self.counts
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["true\\pred", *self.labels])
            for name, row in zip(self.labels, matrix):
                writer.writerow([name, *(f"{v:.6f}" if normalized else int(v) for v in row)])


@dataclass
class EvalResult:
    accuracy: float
    confusion: ConfusionMatrix
    per_snr: dict[int, float] = field(default_factory=dict)


def evaluate(network, dataset: Dataset, split: str = "test",
             per_snr: bool = False, batch_size: int = 512) -> EvalResult:
    """Accuracy and confusion over one split; optionally a per-SNR table.

    ``network`` needs only a ``predict_proba_iq`` method, so stub predictors
    can exercise the machinery.
    """
    idx = dataset.indices(split)
    if len(idx) == 0:
        raise ValueError(f"split {split!r} is empty")
    y_true = dataset.labels[idx].astype(np.int64)
    y_pred = np.empty(len(idx), dtype=np.int64)
    for start in range(0, len(idx), batch_size):
        rows = idx[start : start + batch_size]
        probs = network.predict_proba_iq(dataset.iq[rows])
        y_pred[start : start + len(rows)] = np.argmax(probs, axis=1)

    confusion = ConfusionMatrix.from_predictions(y_true, y_pred, dataset.label_names)
    result = EvalResult(float((y_true == y_pred).mean()), confusion)
    if per_snr:
        snrs = dataset.snrs_db[idx]
        for snr in sorted(np.unique(snrs)):
            mask = snrs == snr
            result.per_snr[int(snr)] = float((y_true[mask] == y_pred[mask]).mean())
    return result


def relative_confusion(a: ConfusionMatrix, b: ConfusionMatrix) -> np.ndarray:
    """Elementwise difference of two row-stochastic confusion matrices."""
    if a.labels != b.labels:
        raise ValueError("confusion matrices use different label vocabularies")
    return a.row_normalized - b.row_normalized


# ---------------------------------------------------------------------------
# run reports
# ---------------------------------------------------------------------------

def write_history(path: str | Path, entries: dict[str, str], history: list[EpochRecord]) -> None:
    """Run manifest: key-value header, blank line, CSV-style epoch rows."""
    lines = [f"{k}: {v}" for k, v in entries.items()]
    lines.append("")
    lines.append("epoch,train_loss,val_accuracy")
    for rec in history:
        lines.append(f"{rec.epoch},{rec.train_loss:.6f},{rec.val_accuracy:.6f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
