"""scikit-learn style estimators wrapping the classifiers and adapters.

These compose with the wider ecosystem (clone, get_params, Pipeline); the
lower-level training harness in :mod:`modviz.training` remains the dataset
oriented workhorse underneath.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .models import Network, format_features, softmax_probs
from .autodiff import Adam, Tensor, backward
from .autodiff import ops
from .validation import check_iq_array, check_labels


class _RadioClassifier(BaseEstimator, ClassifierMixin):
    """Shared fit/predict plumbing for the three architectures."""

    _arch = ""

    def __init__(self, input_format="iq", epochs=30, batch_size=128, learning_rate=0.001,
                 validation_fraction=0.1, patience=None, stop_at_validation_accuracy=None,
                 random_state=0):
        self.input_format = input_format
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.validation_fraction = validation_fraction
        self.patience = patience
        self.stop_at_validation_accuracy = stop_at_validation_accuracy
        self.random_state = random_state

    def _hyper(self) -> dict:
        return {}

    def fit(self, X, y, validation_data=None):
        """Train on captures X (complex (n, n_x) or real (n, 2, n_x)).

        ``validation_data`` is an optional (X_val, y_val) pair; without it a
        ``validation_fraction`` share of the training data is held out.
        """
        iq = check_iq_array(X)
        y = check_labels(y, len(iq))
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise ValueError("need at least two classes")
        self.n_features_in_ = iq.shape[1]

        if validation_data is not None:
            iq_val = check_iq_array(validation_data[0])
            y_val = check_labels(validation_data[1], len(iq_val))
            y_val_idx = np.searchsorted(self.classes_, y_val)
            if not np.array_equal(self.classes_[y_val_idx], y_val):
                raise ValueError("validation labels outside the training classes")
            iq_train, y_train = iq, y_idx
        else:
            rng = np.random.default_rng(np.random.SeedSequence((self.random_state, 0x5A11D)))
            order = rng.permutation(len(iq))
            n_val = max(1, int(len(iq) * self.validation_fraction))
            val_rows, train_rows = order[:n_val], order[n_val:]
            iq_train, y_train = iq[train_rows], y_idx[train_rows]
            iq_val, y_val_idx = iq[val_rows], y_idx[val_rows]

        net = Network.build(self._arch, self.n_features_in_, len(self.classes_),
                            self.input_format, seed=self.random_state, **self._hyper())
        result = _fit_arrays(
            net,
            format_features(iq_train, self.input_format),
            y_train.astype(np.int64),
            format_features(iq_val, self.input_format),
            np.asarray(y_val_idx, dtype=np.int64),
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.learning_rate,
            seed=self.random_state,
            patience=self.patience,
            stop_at=self.stop_at_validation_accuracy,
        )
        self.network_ = result[0]
        self.history_ = result[1]
        self.n_iter_ = len(self.history_)
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "network_")
        iq = check_iq_array(X)
        return softmax_probs(self.network_.logits(format_features(iq, self.input_format)))

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


def _fit_arrays(net, x_train, y_train, x_val, y_val, *, epochs, batch_size, lr, seed,
                patience, stop_at):
    """Array-level loop mirroring modviz.training.train (which is Dataset based)."""
    from .training import _accuracy_on, EpochRecord, _STREAM_DROPOUT, _STREAM_SHUFFLE

    shuffle_rng = np.random.default_rng(np.random.SeedSequence((seed, _STREAM_SHUFFLE)))
    dropout_rng = np.random.default_rng(np.random.SeedSequence((seed, _STREAM_DROPOUT)))
    optimizer = Adam(net.params, lr=lr)
    history: list[EpochRecord] = []
    best = (-1.0, {k: p.data.copy() for k, p in net.params.items()})
    stale = 0
    for epoch in range(1, epochs + 1):
        order = shuffle_rng.permutation(len(x_train))
        loss_sum = 0.0
        for start in range(0, len(order), batch_size):
            rows = order[start : start + batch_size]
            loss = ops.softmax_xent(
                net.forward_graph(Tensor(x_train[rows]), train=True, rng=dropout_rng)[0],
                y_train[rows],
            )
            optimizer.zero_grad()
            backward(loss)
            optimizer.step()
            loss_sum += loss.item() * len(rows)
        val_acc = _accuracy_on(net, x_val, y_val, batch_size)
        history.append(EpochRecord(epoch, loss_sum / len(order), val_acc))
        if val_acc > best[0]:
            best = (val_acc, {k: p.data.copy() for k, p in net.params.items()})
            stale = 0
        else:
            stale += 1
        if stop_at is not None and val_acc >= stop_at:
            break
        if patience is not None and stale > patience:
            break
    if epochs > 0:
        for k, p in net.params.items():
            p.data = best[1][k]
    return net, history


class LeNetClassifier(_RadioClassifier):
    """LeNet-style CNN: two conv layers then three dense layers."""

    _arch = "lenet"

    def __init__(self, input_format="iq", epochs=30, batch_size=128, learning_rate=0.001,
                 validation_fraction=0.1, patience=None, stop_at_validation_accuracy=None,
                 random_state=0, conv1_kernels=64, conv2_kernels=80, dense1=256, dense2=128):
        super().__init__(input_format, epochs, batch_size, learning_rate,
                         validation_fraction, patience, stop_at_validation_accuracy, random_state)
        self.conv1_kernels = conv1_kernels
        self.conv2_kernels = conv2_kernels
        self.dense1 = dense1
        self.dense2 = dense2

    def _hyper(self):
        return {"conv1_kernels": self.conv1_kernels, "conv2_kernels": self.conv2_kernels,
                "dense1": self.dense1, "dense2": self.dense2}


class ResNetClassifier(_RadioClassifier):
    """Residual CNN: three 32-channel stacks with external max-pools."""

    _arch = "resnet"

    def __init__(self, input_format="iq", epochs=30, batch_size=128, learning_rate=0.001,
                 validation_fraction=0.1, patience=None, stop_at_validation_accuracy=None,
                 random_state=0, channels=32):
        super().__init__(input_format, epochs, batch_size, learning_rate,
                         validation_fraction, patience, stop_at_validation_accuracy, random_state)
        self.channels = channels

    def _hyper(self):
        return {"channels": self.channels}


class LSTMClassifier(_RadioClassifier):
    """Two-layer LSTM over per-point channels; defaults to amplitude/phase input."""

    _arch = "lstm"

    def __init__(self, input_format="ap", epochs=30, batch_size=128, learning_rate=0.001,
                 validation_fraction=0.1, patience=None, stop_at_validation_accuracy=None,
                 random_state=0, hidden=128):
        super().__init__(input_format, epochs, batch_size, learning_rate,
                         validation_fraction, patience, stop_at_validation_accuracy, random_state)
        self.hidden = hidden

    def _hyper(self):
        return {"hidden": self.hidden}


class IQToAmplitudePhase(BaseEstimator, TransformerMixin):
    """Stateless transformer from complex captures to normalized A/phi channels."""

    def fit(self, X, y=None):
        check_iq_array(X)
        return self

    def transform(self, X):
        return format_features(check_iq_array(X), "ap", dtype=np.float64)
