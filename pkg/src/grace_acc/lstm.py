"""A small LSTM regressor written directly in numpy.

The network is one LSTM layer followed by a stack of linear dense layers
(8 -> 10 -> 32 -> 1 by default), trained with Adam on mean squared error.
Everything runs in float64.

All learnable arrays live in one flat buffer (:class:`ModelParams`); the
named arrays are views into it, so the optimizer updates every parameter in
a single vectorized step and gradients share the exact same layout.

Input layouts
-------------
``one_step_lookback_features``
    each window is one timestep carrying ``look_back`` features, shape
    ``(batch, 1, look_back)``.  With a zero initial state the recurrent
    kernel never influences the output.
``lookback_steps_one_feature``
    each window is ``look_back`` timesteps of one feature,
    shape ``(batch, look_back, 1)``.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .exceptions import LengthMismatch, NumericFailure, ShapeMismatch, TooFewPairs

log = logging.getLogger(__name__)

LAYOUTS = ("one_step_lookback_features", "lookback_steps_one_feature")
CHECKPOINT_FORMAT = "grace-acc-lstm"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    look_back: int = 15
    epochs: int = 300
    batch_size: int = 8
    learning_rate: float = 0.001
    validation_fraction: float = 0.15
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-7
    rng_seed: int = 0
    input_layout: str = "one_step_lookback_features"
    hidden_size: int = 8
    dense_sizes: tuple[int, ...] = (10, 32, 1)

    def __post_init__(self):
        if self.look_back < 1:
            raise ValueError("look_back must be >= 1")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must lie in (0, 1)")
        if not (0.0 < self.adam_beta1 < 1.0 and 0.0 < self.adam_beta2 < 1.0):
            raise ValueError("Adam betas must lie in (0, 1)")
        if self.learning_rate <= 0 or self.adam_epsilon < 0:
            raise ValueError("learning_rate must be positive and epsilon non-negative")
        if self.input_layout not in LAYOUTS:
            raise ValueError(f"input_layout must be one of {LAYOUTS}")
        if self.dense_sizes[-1] != 1:
            raise ValueError("the last dense layer must have one unit")
        object.__setattr__(self, "dense_sizes", tuple(int(s) for s in self.dense_sizes))

    @property
    def input_dim(self) -> int:
        return self.look_back if self.input_layout == LAYOUTS[0] else 1

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["dense_sizes"] = list(self.dense_sizes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        if "dense_sizes" in d:
            d["dense_sizes"] = tuple(d["dense_sizes"])
        return cls(**d)


class LstmParams(NamedTuple):
    W: np.ndarray  # (input_dim, 4H), gate blocks ordered i, f, g, o
    U: np.ndarray  # (H, 4H)
    b: np.ndarray  # (4H,)


class DenseParams(NamedTuple):
    weights: np.ndarray
    bias: np.ndarray


def _layout(input_dim: int, hidden: int, dense_sizes) -> list[tuple[str, tuple[int, ...]]]:
    entries = [
        ("lstm.W", (input_dim, 4 * hidden)),
        ("lstm.U", (hidden, 4 * hidden)),
        ("lstm.b", (4 * hidden,)),
    ]
    fan_in = hidden
    for k, units in enumerate(dense_sizes):
        entries.append((f"dense{k}.w", (fan_in, units)))
        entries.append((f"dense{k}.b", (units,)))
        fan_in = units
    return entries


class ModelParams:
    """Flat parameter buffer with named array views.

    The same class doubles as the gradient container, which guarantees that
    gradients mirror parameter shapes.
    """

    def __init__(self, input_dim: int, hidden: int = 8, dense_sizes=(10, 32, 1), flat=None):
        self.input_dim = int(input_dim)
        self.hidden = int(hidden)
        self.dense_sizes = tuple(int(s) for s in dense_sizes)
        self.shapes = _layout(self.input_dim, self.hidden, self.dense_sizes)
        size = sum(math.prod(s) for _, s in self.shapes)
        if flat is None:
            flat = np.zeros(size)
        flat = np.ascontiguousarray(flat, dtype=np.float64)
        if flat.shape != (size,):
            raise ShapeMismatch(f"flat buffer has shape {flat.shape}, expected ({size},)")
        self.flat = flat
        self.arrays: dict[str, np.ndarray] = {}
        start = 0
        for name, shape in self.shapes:
            n = math.prod(shape)
            self.arrays[name] = flat[start:start + n].reshape(shape)
            start += n

    @property
    def size(self) -> int:
        return self.flat.size

    @property
    def lstm(self) -> LstmParams:
        a = self.arrays
        return LstmParams(a["lstm.W"], a["lstm.U"], a["lstm.b"])

    @property
    def dense(self) -> list[DenseParams]:
        a = self.arrays
        return [DenseParams(a[f"dense{k}.w"], a[f"dense{k}.b"]) for k in range(len(self.dense_sizes))]

    def zeros_like(self) -> "ModelParams":
        return ModelParams(self.input_dim, self.hidden, self.dense_sizes)

    def copy(self) -> "ModelParams":
        return ModelParams(self.input_dim, self.hidden, self.dense_sizes, self.flat.copy())

    def same_layout(self, other: "ModelParams") -> bool:
        return self.shapes == other.shapes

    def __eq__(self, other):
        if not isinstance(other, ModelParams):
            return NotImplemented
        return self.same_layout(other) and np.array_equal(self.flat, other.flat)

    def __repr__(self):
        return (f"ModelParams(input_dim={self.input_dim}, hidden={self.hidden}, "
                f"dense_sizes={self.dense_sizes}, size={self.size})")


def glorot_limit(fan_in: int, fan_out: int) -> float:
    return math.sqrt(6.0 / (fan_in + fan_out))


def orthogonal(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Random matrix with orthonormal rows (rows <= cols) or columns."""
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))
    return q.T if rows < cols else q


def init_params(config: TrainConfig, rng_seed: int | None = None) -> ModelParams:
    """Glorot-uniform kernels, orthogonal recurrent kernel, unit forget bias."""
    seed = config.rng_seed if rng_seed is None else rng_seed
    rng = np.random.default_rng(seed)
    H = config.hidden_size
    params = ModelParams(config.input_dim, H, config.dense_sizes)
    W, U, b = params.lstm
    lim = glorot_limit(*W.shape)
    W[...] = rng.uniform(-lim, lim, W.shape)
    U[...] = orthogonal(rng, H, 4 * H)
    b[H:2 * H] = 1.0
    for layer in params.dense:
        lim = glorot_limit(*layer.weights.shape)
        layer.weights[...] = rng.uniform(-lim, lim, layer.weights.shape)
    return params


def sigmoid(x):
    # split form avoids overflow in exp for large |x|
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class StepCache(NamedTuple):
    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    i: np.ndarray
    f: np.ndarray
    g: np.ndarray
    o: np.ndarray
    tanh_c: np.ndarray


def lstm_forward(lstm: LstmParams, x_sequence, h0=None, c0=None):
    """Run the LSTM over ``x_sequence`` and return ``(h_final, caches)``.

    ``x_sequence`` is ``(timesteps, input_dim)`` or batched
    ``(batch, timesteps, input_dim)``; ``h0``/``c0`` default to zeros.
    """
    W, U, b = lstm
    x = np.asarray(x_sequence, dtype=np.float64)
    unbatched = x.ndim == 2
    if unbatched:
        x = x[None]
    if x.ndim != 3 or x.shape[2] != W.shape[0]:
        raise ShapeMismatch(f"input of shape {np.shape(x_sequence)} does not match "
                            f"input_dim {W.shape[0]}")
    B, T, _ = x.shape
    H = U.shape[0]
    h = np.zeros((B, H)) if h0 is None else np.broadcast_to(np.asarray(h0, float), (B, H)).copy()
    c = np.zeros((B, H)) if c0 is None else np.broadcast_to(np.asarray(c0, float), (B, H)).copy()
    if h.shape != (B, H) or c.shape != (B, H):
        raise ShapeMismatch("initial state does not match hidden size")
    caches = []
    for t in range(T):
        xt = x[:, t, :]
        z = xt @ W + h @ U + b
        i = sigmoid(z[:, :H])
        f = sigmoid(z[:, H:2 * H])
        g = np.tanh(z[:, 2 * H:3 * H])
        o = sigmoid(z[:, 3 * H:])
        c_new = f * c + i * g
        tanh_c = np.tanh(c_new)
        caches.append(StepCache(xt, h, c, i, f, g, o, tanh_c))
        h, c = o * tanh_c, c_new
    return (h[0] if unbatched else h), caches


class ForwardCache(NamedTuple):
    lstm: list
    activations: list  # input of each dense layer, then the output


def model_forward(params: ModelParams, X_batch):
    """Predictions of shape ``(batch, 1)`` plus the cache needed by :func:`backward`."""
    X = np.asarray(X_batch, dtype=np.float64)
    if X.ndim != 3:
        raise ShapeMismatch(f"expected (batch, timesteps, features), got {X.shape}")
    h, lstm_cache = lstm_forward(params.lstm, X)
    acts = [h]
    a = h
    for layer in params.dense:
        a = a @ layer.weights + layer.bias
        acts.append(a)
    return a, ForwardCache(lstm_cache, acts)


def to_model_input(X, params_or_input_dim) -> np.ndarray:
    """Reshape windowed ``(n, look_back)`` data for a model.

    The layout follows from the model's LSTM input width: a width equal to
    ``look_back`` means one timestep of features, a width of one means one
    feature per timestep.
    """
    X = np.asarray(X, dtype=np.float64)
    input_dim = getattr(params_or_input_dim, "input_dim", params_or_input_dim)
    if X.ndim == 3:
        if X.shape[2] != input_dim:
            raise ShapeMismatch(f"feature width {X.shape[2]} != model input_dim {input_dim}")
        return X
    if X.ndim != 2:
        raise ShapeMismatch(f"expected 2-D windows, got shape {X.shape}")
    if X.shape[1] == input_dim:
        return X[:, None, :]
    if input_dim == 1:
        return X[:, :, None]
    raise ShapeMismatch(f"window length {X.shape[1]} incompatible with input_dim {input_dim}")


def predict(params: ModelParams, X) -> np.ndarray:
    """Pure forward pass; returns a flat ``(n,)`` array of predictions."""
    X3 = to_model_input(X, params)
    if len(X3) == 0:
        return np.empty(0)
    out, _ = model_forward(params, X3)
    return out[:, 0]


def _pair(pred, target):
    p = np.ravel(np.asarray(pred, dtype=np.float64))
    t = np.ravel(np.asarray(target, dtype=np.float64))
    if p.size != t.size:
        raise LengthMismatch(f"prediction length {p.size} != target length {t.size}")
    if p.size == 0:
        raise LengthMismatch("need at least one value")
    return p, t


def mse(pred, target) -> float:
    p, t = _pair(pred, target)
    return float(np.mean((p - t) ** 2))


def mae(pred, target) -> float:
    p, t = _pair(pred, target)
    return float(np.mean(np.abs(p - t)))


def backward(params: ModelParams, batch, cached: ForwardCache, out: ModelParams | None = None):
    """Exact gradient of the batch MSE with respect to every parameter.

    ``batch`` is ``(X, Y)`` as passed to :func:`model_forward` (only ``Y`` is
    read; ``X`` lives in the cache).  Returns a :class:`ModelParams` holding
    gradients.
    """
    _, Y = batch
    grads = params.zeros_like() if out is None else out
    if out is not None:
        grads.flat[:] = 0.0
    pred = cached.activations[-1]
    Y = np.asarray(Y, dtype=np.float64).reshape(pred.shape)
    d = 2.0 * (pred - Y) / pred.shape[0]

    acts = cached.activations
    for k in range(len(params.dense) - 1, -1, -1):
        layer = params.dense[k]
        g = grads.dense[k]
        np.dot(acts[k].T, d, out=g.weights)
        g.bias[:] = d.sum(axis=0)
        d = d @ layer.weights.T

    W, U, _ = params.lstm
    gW, gU, gb = grads.lstm
    H = U.shape[0]
    dh = d
    dc = np.zeros_like(dh)
    dz = np.empty((dh.shape[0], 4 * H))
    for step in reversed(cached.lstm):
        dc = dc + dh * step.o * (1.0 - step.tanh_c ** 2)
        dz[:, :H] = dc * step.g * step.i * (1.0 - step.i)
        dz[:, H:2 * H] = dc * step.c_prev * step.f * (1.0 - step.f)
        dz[:, 2 * H:3 * H] = dc * step.i * (1.0 - step.g ** 2)
        dz[:, 3 * H:] = dh * step.tanh_c * step.o * (1.0 - step.o)
        gW += step.x.T @ dz
        gU += step.h_prev.T @ dz
        gb += dz.sum(axis=0)
        dh = dz @ U.T
        dc = dc * step.f
    return grads


def loss_and_grad(params: ModelParams, X, Y, out: ModelParams | None = None):
    pred, cache = model_forward(params, X)
    grads = backward(params, (X, Y), cache, out)
    y = np.asarray(Y, dtype=np.float64).ravel()
    return float(np.mean((pred[:, 0] - y) ** 2)), grads


def numerical_gradient(params: ModelParams, X, Y, eps: float = 1e-5) -> ModelParams:
    """Central finite differences of the batch MSE, one parameter at a time."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64).ravel()
    probe = params.copy()
    grads = params.zeros_like()

    def loss():
        pred, _ = model_forward(probe, X)
        return np.mean((pred[:, 0] - Y) ** 2)

    for j in range(probe.size):
        keep = probe.flat[j]
        probe.flat[j] = keep + eps
        up = loss()
        probe.flat[j] = keep - eps
        down = loss()
        probe.flat[j] = keep
        grads.flat[j] = (up - down) / (2.0 * eps)
    return grads


def relative_error(a, b, floor: float = 1e-7) -> np.ndarray:
    """Elementwise ``|a - b| / max(|a|, |b|, floor)``.

    The floor keeps entries whose true value is below the round-off of a
    central difference (about 1e-11 for an O(1) loss at eps=1e-5) from
    reading as large relative errors.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, params: ModelParams) -> "AdamState":
        return cls(np.zeros(params.size), np.zeros(params.size), 0)

    def copy(self) -> "AdamState":
        return AdamState(self.m.copy(), self.v.copy(), self.t)


def _adam_update(theta, g, state: AdamState, lr, beta1, beta2, eps):
    state.t += 1
    state.m *= beta1
    state.m += (1.0 - beta1) * g
    state.v *= beta2
    state.v += (1.0 - beta2) * (g * g)
    m_hat = state.m / (1.0 - beta1 ** state.t)
    v_hat = state.v / (1.0 - beta2 ** state.t)
    theta -= lr * m_hat / (np.sqrt(v_hat) + eps)


def adam_step(params: ModelParams, grads: ModelParams, state: AdamState,
              config: TrainConfig = TrainConfig()):
    """One bias-corrected Adam update; inputs are left untouched."""
    if not params.same_layout(grads) or state.m.shape != params.flat.shape:
        raise ShapeMismatch("parameters, gradients and optimizer state disagree in layout")
    new_params, new_state = params.copy(), state.copy()
    _adam_update(new_params.flat, grads.flat, new_state, config.learning_rate,
                 config.adam_beta1, config.adam_beta2, config.adam_epsilon)
    return new_params, new_state


@dataclass
class TrainHistory:
    loss: list = field(default_factory=list)
    mae: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    val_mae: list = field(default_factory=list)

    def __len__(self):
        return len(self.loss)

    def append(self, loss, mae_, val_loss, val_mae):
        self.loss.append(float(loss))
        self.mae.append(float(mae_))
        self.val_loss.append(float(val_loss))
        self.val_mae.append(float(val_mae))

    def rows(self):
        for k in range(len(self)):
            yield k + 1, self.loss[k], self.mae[k], self.val_loss[k], self.val_mae[k]


def validation_split(n: int, fraction: float) -> int:
    """Number of leading pairs kept for training; the tail validates."""
    return int(n * (1.0 - fraction))


def fit(trainX, trainY, config: TrainConfig = TrainConfig(), callback=None):
    """Train from scratch and return ``(params, history)``.

    The last ``validation_fraction`` of the pairs (taken before any shuffling)
    is held out.  The rest is reshuffled every epoch and consumed in batches
    of ``batch_size``; the final batch may be short.  Reported training loss
    and MAE are batch-size weighted averages over the epoch, validation
    figures are computed on the held-out pairs after the epoch.

    Raises ``TooFewPairs`` when either side of the split would be empty and
    ``NumericFailure`` if the loss stops being finite.
    """
    X = np.asarray(trainX, dtype=np.float64)
    Y = np.asarray(trainY, dtype=np.float64).ravel()
    if len(X) != len(Y):
        raise LengthMismatch(f"{len(X)} windows but {len(Y)} targets")
    if X.ndim == 2 and X.shape[1] != config.look_back:
        raise ShapeMismatch(f"windows of length {X.shape[1]}, config look_back {config.look_back}")
    n = len(Y)
    n_train = validation_split(n, config.validation_fraction)
    if n < 2 or n_train < 1 or n_train == n:
        raise TooFewPairs(f"{n} pairs cannot be split with validation fraction "
                          f"{config.validation_fraction}")

    init_seq, shuffle_seq = np.random.SeedSequence(config.rng_seed).spawn(2)
    params = init_params(config, int(init_seq.generate_state(1)[0]))
    X3 = to_model_input(X, params)
    Xtr, Ytr = X3[:n_train], Y[:n_train]
    Xva, Yva = X3[n_train:], Y[n_train:]
    rng = np.random.default_rng(shuffle_seq)
    state = AdamState.zeros(params)
    grads = params.zeros_like()
    history = TrainHistory()
    for epoch in range(config.epochs):
        order = rng.permutation(n_train)
        with np.errstate(over="ignore", invalid="ignore"):
            sq_sum, abs_sum = _train_epoch(params, grads, state, Xtr[order], Ytr[order], config)
            val_pred = predict(params, Xva)
        row = (sq_sum / n_train, abs_sum / n_train, mse(val_pred, Yva), mae(val_pred, Yva))
        if not all(math.isfinite(v) for v in row) or not np.all(np.isfinite(params.flat)):
            raise NumericFailure(f"non-finite loss at epoch {epoch + 1}: {row}")
        history.append(*row)
        if callback is not None:
            callback(epoch + 1, row)
        log.debug("epoch %d loss=%.6g mae=%.6g val_loss=%.6g val_mae=%.6g", epoch + 1, *row)
    return params, history


def _train_epoch(params, grads, state, X, Y, config):
    """One pass over already shuffled pairs; returns summed squared and absolute residuals."""
    bs = config.batch_size
    sq_sum = abs_sum = 0.0
    for start in range(0, len(Y), bs):
        xb, yb = X[start:start + bs], Y[start:start + bs]
        pred, cache = model_forward(params, xb)
        resid = pred[:, 0] - yb
        sq_sum += float(resid @ resid)
        abs_sum += float(np.abs(resid).sum())
        backward(params, (xb, yb), cache, grads)
        _adam_update(params.flat, grads.flat, state, config.learning_rate,
                     config.adam_beta1, config.adam_beta2, config.adam_epsilon)
    return sq_sum, abs_sum


def save_checkpoint(params: ModelParams, config: TrainConfig, path) -> Path:
    """Write a JSON checkpoint; floats are stored as hex for bit-exact reload."""
    doc = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": config.as_dict(),
        "input_dim": params.input_dim,
        "hidden": params.hidden,
        "dense_sizes": list(params.dense_sizes),
        "arrays": [
            {"name": name, "shape": list(shape),
             "data": [float(v).hex() for v in params.arrays[name].ravel()]}
            for name, shape in params.shapes
        ],
    }
    path = Path(path)
    path.write_text(json.dumps(doc, indent=1) + "\n")
    return path


def load_checkpoint(path) -> tuple[ModelParams, TrainConfig]:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != CHECKPOINT_FORMAT or doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: not a version {CHECKPOINT_VERSION} checkpoint")
    config = TrainConfig.from_dict(doc["config"])
    params = ModelParams(doc["input_dim"], doc["hidden"], doc["dense_sizes"])
    by_name = {a["name"]: a for a in doc["arrays"]}
    for name, shape in params.shapes:
        entry = by_name.get(name)
        if entry is None or tuple(entry["shape"]) != shape:
            raise ShapeMismatch(f"{path}: array {name} missing or misshapen")
        params.arrays[name][...] = np.array(
            [float.fromhex(v) for v in entry["data"]], dtype=np.float64).reshape(shape)
    return params, config


def write_history_csv(history: TrainHistory, path) -> Path:
    path = Path(path)
    lines = ["epoch,loss,mae,val_loss,val_mae"]
    lines += [f"{e},{a!r},{b!r},{c!r},{d!r}" for e, a, b, c, d in history.rows()]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_history_csv(path) -> TrainHistory:
    rows = Path(path).read_text().splitlines()[1:]
    history = TrainHistory()
    for row in rows:
        _, *vals = row.split(",")
        history.append(*(float(v) for v in vals))
    return history
