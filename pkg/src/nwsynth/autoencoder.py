"""Fully connected autoencoder over single-cycle wavetables.

The network is deliberately small: a 512 -> hidden stack -> latent encoder
with a mirrored decoder, tanh at every layer, trained from scratch with plain
mini-batch gradient descent on time-domain MSE. All arithmetic is float64 and
every stage (init, shuffling, updates) is driven by one seeded generator, so
results are bit-reproducible for a given config.

The analytic gradients are verified against central finite differences on
tiny models; see :func:`gradient_check_suite`, which also backs the
``gradcheck`` CLI command.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import ModelFormatError, TrainingDiverged
from .validation import as_matrix, as_samples, frozen_array
from .waveforms import CANONICAL_LENGTH, SHAPES, gen_waveform, normalize

MODEL_FORMAT = "nwae"
MODEL_VERSION = 1
# Saturating odd activations mapping R onto (-1, 1), plus identity.
ACTIVATIONS = ("tanh", "softsign", "rsqrt", "linear")


def _activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(z)
    if name == "softsign":
        return z / (1.0 + np.abs(z))
    if name == "rsqrt":
        return z / np.sqrt(1.0 + z * z)
    return z


def _activation_grad(name: str, y: np.ndarray) -> np.ndarray:
    """Derivative of the activation expressed through its output value."""
    if name == "tanh":
        return 1.0 - y * y
    if name == "softsign":
        g = 1.0 - np.abs(y)
        return g * g
    if name == "rsqrt":
        return (1.0 - y * y) ** 1.5
    return np.ones_like(y)


@dataclass(frozen=True)
class Layer:
    """One dense layer: ``out = activation(weights @ in + bias)``."""

    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)
    activation: str = "tanh"

    def __post_init__(self):
        w = frozen_array(self.weights)
        b = frozen_array(self.bias)
        if w.ndim != 2:
            raise ValueError(f"weights must be 2-D, got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise ValueError(f"bias shape {b.shape} does not match weights {w.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("layer parameters contain non-finite values")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


def _check_chain(layers: tuple[Layer, ...], name: str) -> None:
    if not layers:
        raise ValueError(f"{name} must have at least one layer")
    for i in range(1, len(layers)):
        if layers[i].in_dim != layers[i - 1].out_dim:
            raise ValueError(
                f"{name} layer {i}: input dim {layers[i].in_dim} does not chain "
                f"with previous output dim {layers[i - 1].out_dim}"
            )


@dataclass(frozen=True)
class AutoencoderModel:
    """Immutable weights and metadata for one encoder/decoder pair."""

    encoder: tuple[Layer, ...]
    decoder: tuple[Layer, ...]
    latent_dim: int
    seed: int = 0
    epochs_trained: int = 0
    final_training_loss: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "encoder", tuple(self.encoder))
        object.__setattr__(self, "decoder", tuple(self.decoder))
        _check_chain(self.encoder, "encoder")
        _check_chain(self.decoder, "decoder")
        if self.encoder[-1].out_dim != self.latent_dim:
            raise ValueError(
                f"encoder output dim {self.encoder[-1].out_dim} != latent_dim {self.latent_dim}"
            )
        if self.decoder[0].in_dim != self.latent_dim:
            raise ValueError(
                f"decoder input dim {self.decoder[0].in_dim} != latent_dim {self.latent_dim}"
            )
        if self.decoder[-1].out_dim != self.encoder[0].in_dim:
            raise ValueError(
                f"decoder output dim {self.decoder[-1].out_dim} does not mirror "
                f"encoder input dim {self.encoder[0].in_dim}"
            )
        if self.decoder[-1].activation == "linear":
            raise ValueError("decoder output layer must use a saturating activation")

    @property
    def input_dim(self) -> int:
        return self.encoder[0].in_dim


@dataclass(frozen=True)
class TrainingConfig:
    """Hyperparameters for one deterministic training run."""

    epochs: int = 2000
    batch_size: int = 16
    learning_rate: float = 1.0
    seed: int = 0
    latent_dim: int = 16
    hidden_dims: tuple[int, ...] = (256, 64)
    holdout_fraction: float = 0.125
    phases_per_shape: int = 32
    input_dim: int = CANONICAL_LENGTH
    activation: str = "tanh"
    latent_activation: str = "tanh"

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(d) for d in self.hidden_dims))
        if self.activation not in ACTIVATIONS or self.activation == "linear":
            raise ValueError(f"activation must be a saturating one, got {self.activation!r}")
        if self.latent_activation not in ACTIVATIONS:
            raise ValueError(f"unknown latent_activation {self.latent_activation!r}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0 < self.learning_rate or not np.isfinite(self.learning_rate):
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.latent_dim < 1 or self.input_dim < 1:
            raise ValueError("latent_dim and input_dim must be positive")
        if any(d < 1 for d in self.hidden_dims):
            raise ValueError(f"hidden_dims must be positive, got {self.hidden_dims}")
        if not 0.0 <= self.holdout_fraction <= 0.5:
            raise ValueError(
                f"holdout_fraction must be in [0, 0.5], got {self.holdout_fraction}"
            )
        if self.phases_per_shape < 1:
            raise ValueError(f"phases_per_shape must be >= 1, got {self.phases_per_shape}")


@dataclass(frozen=True)
class Gradients:
    """Per-layer ``(d_weights, d_bias)`` pairs mirroring a model's shape."""

    encoder: tuple[tuple[np.ndarray, np.ndarray], ...]
    decoder: tuple[tuple[np.ndarray, np.ndarray], ...]


def gen_corpus(seed: int = 0, phases_per_shape: int = 32) -> list[tuple[np.ndarray, str]]:
    """Procedural training corpus: every shape at evenly spaced phase offsets.

    Returns ``4 * phases_per_shape`` normalized waveforms with their shape
    names. The base corpus does not depend on ``seed``; the argument is kept
    for future augmentation.
    """
    del seed
    if phases_per_shape < 1:
        raise ValueError(f"phases_per_shape must be >= 1, got {phases_per_shape}")
    corpus = []
    for shape in SHAPES:
        for k in range(phases_per_shape):
            w = normalize(gen_waveform(shape, CANONICAL_LENGTH, k / phases_per_shape))
            corpus.append((w, shape))
    return corpus


def init_model(config: TrainingConfig) -> AutoencoderModel:
    """Fresh model with uniform weights scaled by 1/sqrt(in_dim), zero biases."""
    rng = np.random.default_rng(config.seed)
    dims = (config.input_dim, *config.hidden_dims, config.latent_dim)

    def make(in_dim, out_dim, activation):
        limit = 1.0 / np.sqrt(in_dim)
        return Layer(rng.uniform(-limit, limit, (out_dim, in_dim)), np.zeros(out_dim), activation)

    encoder = tuple(
        make(dims[i], dims[i + 1],
             config.latent_activation if i == len(dims) - 2 else config.activation)
        for i in range(len(dims) - 1)
    )
    rev = dims[::-1]
    decoder = tuple(make(rev[i], rev[i + 1], config.activation) for i in range(len(rev) - 1))
    return AutoencoderModel(encoder, decoder, config.latent_dim, seed=config.seed)


def _forward(layers, X: np.ndarray) -> list[np.ndarray]:
    """Forward pass keeping every activation (input first, output last)."""
    acts = [X]
    for layer in layers:
        X = _activate(layer.activation, X @ layer.weights.T + layer.bias)
        acts.append(X)
    return acts


def encode(model: AutoencoderModel, w) -> np.ndarray:
    """Map one waveform to its latent vector."""
    w = as_samples(w, "waveform")
    if w.size != model.input_dim:
        raise ValueError(f"waveform length {w.size} != model input dim {model.input_dim}")
    return _forward(model.encoder, w[None, :])[-1][0]


def decode(model: AutoencoderModel, z) -> np.ndarray:
    """Map one latent vector back to a waveform; samples lie in (-1, 1)."""
    z = as_samples(z, "latent")
    if z.size != model.latent_dim:
        raise ValueError(f"latent length {z.size} != model latent dim {model.latent_dim}")
    return _forward(model.decoder, z[None, :])[-1][0]


def loss_mse(pred, target) -> float:
    """Mean squared element-wise difference."""
    pred = as_samples(pred, "pred")
    target = as_samples(target, "target")
    if pred.size != target.size:
        raise ValueError(f"length mismatch: pred {pred.size} vs target {target.size}")
    diff = pred - target
    return float(np.mean(diff * diff))


def _as_batch(model: AutoencoderModel, batch) -> np.ndarray:
    X = as_matrix(batch, "batch", n_cols=model.input_dim)
    return X


def _reconstruction(model: AutoencoderModel, X: np.ndarray) -> np.ndarray:
    return _forward(model.encoder + model.decoder, X)[-1]


def evaluate_mse(model: AutoencoderModel, batch) -> float:
    """Mean reconstruction MSE over a batch of waveforms."""
    X = _as_batch(model, batch)
    diff = _reconstruction(model, X) - X
    return float(np.mean(diff * diff))


def backprop(model: AutoencoderModel, batch) -> tuple[Gradients, float]:
    """Analytic gradient of the mean batch reconstruction loss.

    Returns gradients with the model's shape plus the batch loss itself. The
    loss is the mean of squared differences over every element of the batch,
    so duplicating a batch row leaves the gradient unchanged.
    """
    X = _as_batch(model, batch)
    layers = model.encoder + model.decoder
    acts = _forward(layers, X)
    diff = acts[-1] - X
    loss = float(np.mean(diff * diff))
    delta = (2.0 / diff.size) * diff
    grads: list[tuple[np.ndarray, np.ndarray]] = []
    for k in range(len(layers) - 1, -1, -1):
        dz = delta * _activation_grad(layers[k].activation, acts[k + 1])
        grads.append((dz.T @ acts[k], dz.sum(axis=0)))
        if k:
            delta = dz @ layers[k].weights
    grads.reverse()
    n_enc = len(model.encoder)
    return Gradients(tuple(grads[:n_enc]), tuple(grads[n_enc:])), loss


def train_step(model: AutoencoderModel, batch, learning_rate: float) -> tuple[AutoencoderModel, float]:
    """One plain gradient-descent step; returns the new model and pre-update loss."""
    if learning_rate < 0:
        raise ValueError(f"learning_rate must be >= 0, got {learning_rate}")
    grads, loss = backprop(model, batch)

    def updated(layers, layer_grads):
        return tuple(
            Layer(l.weights - learning_rate * dw, l.bias - learning_rate * db, l.activation)
            for l, (dw, db) in zip(layers, layer_grads)
        )

    new = replace(
        model,
        encoder=updated(model.encoder, grads.encoder),
        decoder=updated(model.decoder, grads.decoder),
    )
    return new, loss


def _holdout_size(n: int, holdout_fraction: float) -> int:
    return int(n * holdout_fraction)


def corpus_split(config: TrainingConfig) -> tuple[np.ndarray, np.ndarray]:
    """Train/holdout waveform matrices exactly as :func:`train` splits them.

    The holdout is the leading ``floor(n * holdout_fraction)`` corpus rows;
    training uses the rest. The split is deterministic so the holdout is
    reconstructable from the config alone.
    """
    X = np.stack([w for w, _ in gen_corpus(config.seed, config.phases_per_shape)])
    n_hold = _holdout_size(len(X), config.holdout_fraction)
    return X[n_hold:], X[:n_hold]


def train_on(X, config: TrainingConfig) -> tuple[AutoencoderModel, list[float]]:
    """Mini-batch gradient descent on the given waveform matrix.

    The leading holdout slice is excluded from every update; the seeded
    generator drives the per-epoch shuffles, making the run bit-reproducible.
    Aborts with :class:`TrainingDiverged` if a batch loss goes non-finite.
    """
    X = as_matrix(X, "X", n_cols=config.input_dim)
    rng = np.random.default_rng(config.seed)
    n_hold = _holdout_size(len(X), config.holdout_fraction)
    if n_hold >= len(X):
        raise ValueError("holdout_fraction leaves no training rows")
    Xtr = X[n_hold:]
    model = init_model(config)
    history: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(Xtr))
        total = 0.0
        for start in range(0, len(Xtr), config.batch_size):
            rows = order[start : start + config.batch_size]
            model, loss = train_step(model, Xtr[rows], config.learning_rate)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"batch loss became non-finite at epoch {epoch}; lower the learning rate"
                )
            total += loss * rows.size
        history.append(total / len(Xtr))
    final = history[-1] if history else None
    return replace(model, epochs_trained=config.epochs, final_training_loss=final), history


def train(config: TrainingConfig) -> tuple[AutoencoderModel, list[float]]:
    """Train on the procedural corpus; returns the model and per-epoch loss."""
    X = np.stack([w for w, _ in gen_corpus(config.seed, config.phases_per_shape)])
    return train_on(X, config)


# ---------------------------------------------------------------------------
# Gradient verification
# ---------------------------------------------------------------------------

def _param_arrays(model: AutoencoderModel) -> list[np.ndarray]:
    arrays = []
    for layer in model.encoder + model.decoder:
        arrays.append(layer.weights.copy())
        arrays.append(layer.bias.copy())
    return arrays


def _rebuild(model: AutoencoderModel, arrays: list[np.ndarray]) -> AutoencoderModel:
    it = iter(arrays)
    sides = []
    for side in (model.encoder, model.decoder):
        sides.append(tuple(Layer(next(it), next(it), l.activation) for l in side))
    return replace(model, encoder=sides[0], decoder=sides[1])


def finite_difference_gradients(model: AutoencoderModel, batch, step: float = 1e-5) -> Gradients:
    """Central-difference gradient of the batch loss, parameter by parameter.

    O(parameters) full forward passes: only viable for tiny models, which is
    exactly what it is for. This is the independent oracle for
    :func:`backprop` and deliberately shares no code with it.
    """
    X = _as_batch(model, batch)
    base = _param_arrays(model)
    grads_flat: list[np.ndarray] = []
    for arr in base:
        g = np.zeros_like(arr)
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + step
            loss_plus = evaluate_mse(_rebuild(model, base), X)
            arr[idx] = orig - step
            loss_minus = evaluate_mse(_rebuild(model, base), X)
            arr[idx] = orig
            g[idx] = (loss_plus - loss_minus) / (2.0 * step)
        grads_flat.append(g)
    pairs = [(grads_flat[i], grads_flat[i + 1]) for i in range(0, len(grads_flat), 2)]
    n_enc = len(model.encoder)
    return Gradients(tuple(pairs[:n_enc]), tuple(pairs[n_enc:]))


def _flat(grads: Gradients) -> np.ndarray:
    parts = []
    for dw, db in grads.encoder + grads.decoder:
        parts.append(dw.ravel())
        parts.append(db)
    return np.concatenate(parts)


def gradient_check(model: AutoencoderModel, batch, step: float = 1e-5) -> float:
    """Max relative error between analytic and finite-difference gradients."""
    analytic = _flat(backprop(model, batch)[0])
    numeric = _flat(finite_difference_gradients(model, batch, step))
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))


def gradient_check_suite(n_seeds: int = 10, step: float = 1e-5) -> float:
    """Worst gradient error over seeded tiny 8-4-2-4-8 models with random batches."""
    worst = 0.0
    for seed in range(n_seeds):
        config = TrainingConfig(input_dim=8, hidden_dims=(4,), latent_dim=2, seed=seed)
        model = init_model(config)
        rng = np.random.default_rng(1000 + seed)
        batch = rng.uniform(-1.0, 1.0, size=(4, 8))
        worst = max(worst, gradient_check(model, batch, step))
    return worst


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def save_model(model: AutoencoderModel, destination) -> None:
    """Write the model as a JSON document with full round-trip precision."""
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "latent_dim": model.latent_dim,
        "seed": model.seed,
        "epochs_trained": model.epochs_trained,
        "final_training_loss": model.final_training_loss,
        "encoder": [_layer_doc(l) for l in model.encoder],
        "decoder": [_layer_doc(l) for l in model.decoder],
    }
    text = json.dumps(doc)
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8") as f:
            f.write(text)


def _layer_doc(layer: Layer) -> dict:
    return {
        "in": layer.in_dim,
        "out": layer.out_dim,
        "activation": layer.activation,
        "weights": layer.weights.ravel().tolist(),  # row-major out x in
        "bias": layer.bias.tolist(),
    }


def load_model(source) -> AutoencoderModel:
    """Read and validate a model file written by :func:`save_model`."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as f:
            text = f.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"malformed model file: {e}") from e
    if not isinstance(doc, dict):
        raise ModelFormatError("malformed model file: top level is not an object")
    if doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"not a model file: format {doc.get('format')!r}")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"unsupported model version {doc.get('version')!r}; expected {MODEL_VERSION}"
        )
    try:
        latent_dim = int(doc["latent_dim"])
        seed = int(doc["seed"])
        epochs_trained = int(doc["epochs_trained"])
        raw_loss = doc["final_training_loss"]
        final_loss = None if raw_loss is None else float(raw_loss)
        enc_docs = doc["encoder"]
        dec_docs = doc["decoder"]
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"malformed model file: {e!r}") from e

    def load_side(docs, name):
        if not isinstance(docs, list) or not docs:
            raise ModelFormatError(f"malformed model file: {name} is not a layer list")
        layers = []
        prev_out = None
        for i, d in enumerate(docs):
            try:
                in_dim, out_dim = int(d["in"]), int(d["out"])
                weights = np.asarray(d["weights"], dtype=np.float64)
                bias = np.asarray(d["bias"], dtype=np.float64)
                activation = d["activation"]
            except (KeyError, TypeError, ValueError) as e:
                raise ModelFormatError(f"{name} layer {i}: malformed layer ({e!r})") from e
            if weights.size != in_dim * out_dim:
                raise ModelFormatError(
                    f"{name} layer {i}: expected {in_dim * out_dim} weights, got {weights.size}"
                )
            if bias.size != out_dim:
                raise ModelFormatError(
                    f"{name} layer {i}: expected {out_dim} bias values, got {bias.size}"
                )
            if prev_out is not None and in_dim != prev_out:
                raise ModelFormatError(
                    f"{name} layer {i}: input dim {in_dim} does not chain with "
                    f"previous output dim {prev_out}"
                )
            prev_out = out_dim
            try:
                layers.append(Layer(weights.reshape(out_dim, in_dim), bias, activation))
            except ValueError as e:
                raise ModelFormatError(f"{name} layer {i}: {e}") from e
        return tuple(layers)

    encoder = load_side(enc_docs, "encoder")
    decoder = load_side(dec_docs, "decoder")
    try:
        return AutoencoderModel(
            encoder, decoder, latent_dim, seed=seed,
            epochs_trained=epochs_trained, final_training_loss=final_loss,
        )
    except ValueError as e:
        raise ModelFormatError(str(e)) from e


# ---------------------------------------------------------------------------
# Estimator facade
# ---------------------------------------------------------------------------

class WavetableAutoencoder(TransformerMixin, BaseEstimator):
    """Estimator facade over the training loop and forward passes.

    ``fit`` trains on an (n, 512) waveform matrix, or on the procedural
    corpus when called without data. ``transform`` encodes waveforms to
    latent vectors and ``inverse_transform`` decodes them back.

    Fitted attributes: ``model_``, ``loss_history_``, ``holdout_mse_``,
    ``n_features_in_``.
    """

    def __init__(
        self,
        latent_dim: int = 16,
        hidden_dims: tuple[int, ...] = (256, 64),
        epochs: int = 2000,
        batch_size: int = 16,
        learning_rate: float = 1.0,
        seed: int = 0,
        holdout_fraction: float = 0.125,
        phases_per_shape: int = 32,
    ):
        self.latent_dim = latent_dim
        self.hidden_dims = hidden_dims
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed
        self.holdout_fraction = holdout_fraction
        self.phases_per_shape = phases_per_shape

    def _config(self, input_dim: int) -> TrainingConfig:
        return TrainingConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            seed=self.seed,
            latent_dim=self.latent_dim,
            hidden_dims=tuple(self.hidden_dims),
            holdout_fraction=self.holdout_fraction,
            phases_per_shape=self.phases_per_shape,
            input_dim=input_dim,
        )

    def fit(self, X=None, y=None):
        if X is None:
            X = np.stack([w for w, _ in gen_corpus(self.seed, self.phases_per_shape)])
        X = as_matrix(X, "X")
        config = self._config(X.shape[1])
        self.model_, self.loss_history_ = train_on(X, config)
        n_hold = _holdout_size(len(X), config.holdout_fraction)
        self.holdout_mse_ = evaluate_mse(self.model_, X[:n_hold]) if n_hold else None
        self.n_features_in_ = X.shape[1]
        return self

    def _require_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("this WavetableAutoencoder is not fitted yet; call fit first")

    def transform(self, X) -> np.ndarray:
        """Encode rows of waveforms into latent vectors."""
        self._require_fitted()
        X = as_matrix(X, "X", n_cols=self.model_.input_dim)
        return _forward(self.model_.encoder, X)[-1]

    def inverse_transform(self, Z) -> np.ndarray:
        """Decode rows of latent vectors back into waveforms."""
        self._require_fitted()
        Z = as_matrix(Z, "Z", n_cols=self.model_.latent_dim)
        return _forward(self.model_.decoder, Z)[-1]
