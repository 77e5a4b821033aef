"""Dense network with inverted dropout, trained by mean-squared error under ADAM.

Weights are stored as ``(fan_in, fan_out)`` matrices so a batch of row vectors
propagates as ``x @ W + b``. Hidden layers use ReLU followed by dropout; the
output layer is linear and never dropped.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

DIVERGENCE_LIMIT = 1e6
CHECKPOINT_MAGIC = "dropdagger-mlp 1"


class ShapeError(ValueError):
    pass


class EmptyBatchError(ValueError):
    pass


class TrainingDivergence(RuntimeError):
    pass


@dataclass(frozen=True)
class NetConfig:
    layer_sizes: tuple[int, ...]
    dropout_prob: float = 0.05
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    l2_weight: float = 1e-5
    train_epochs: int = 100
    batch_size: int = 32

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError(f"layer_sizes must have >= 2 positive entries, got {sizes}")
        if not 0.0 <= self.dropout_prob < 1.0:
            raise ValueError(f"dropout_prob must lie in [0, 1), got {self.dropout_prob}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        for name in ("adam_beta1", "adam_beta2"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.adam_epsilon <= 0:
            raise ValueError("adam_epsilon must be positive")
        if self.l2_weight < 0:
            raise ValueError("l2_weight must be nonnegative")
        if self.train_epochs < 1 or self.batch_size < 1:
            raise ValueError("train_epochs and batch_size must be >= 1")

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_dim(self) -> int:
        return self.layer_sizes[-1]

    @property
    def hidden_sizes(self) -> tuple[int, ...]:
        return self.layer_sizes[1:-1]


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def arrays(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]


@dataclass
class AdamState:
    first_moments: list[np.ndarray]
    second_moments: list[np.ndarray]
    step_count: int = 0

    @classmethod
    def zeros_like(cls, params: list[np.ndarray]) -> AdamState:
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])


@dataclass
class TrainReport:
    final_loss: float
    epochs_run: int
    epoch_losses: list[float] = field(default_factory=list)


class MLP:
    def __init__(self, config: NetConfig, weights: list[np.ndarray], biases: list[np.ndarray]):
        sizes = config.layer_sizes
        if len(weights) != len(sizes) - 1 or len(biases) != len(sizes) - 1:
            raise ShapeError("number of layers does not match layer_sizes")
        for k, (w, b) in enumerate(zip(weights, biases)):
            if w.shape != (sizes[k], sizes[k + 1]) or b.shape != (sizes[k + 1],):
                raise ShapeError(
                    f"layer {k}: expected W{(sizes[k], sizes[k + 1])} b{(sizes[k + 1],)}, "
                    f"got W{w.shape} b{b.shape}"
                )
        self.config = config
        self.weights = [np.array(w, dtype=np.float64) for w in weights]
        self.biases = [np.array(b, dtype=np.float64) for b in biases]
        self.adam_state = AdamState.zeros_like(self.parameters())

    @classmethod
    def initialize(cls, config: NetConfig, rng: np.random.Generator) -> MLP:
        """Glorot-uniform weights, zero biases."""
        weights, biases = [], []
        for fan_in, fan_out in zip(config.layer_sizes[:-1], config.layer_sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(config, weights, biases)

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def parameters(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def copy(self) -> MLP:
        net = MLP(self.config, self.weights, self.biases)
        net.adam_state = AdamState(
            [m.copy() for m in self.adam_state.first_moments],
            [v.copy() for v in self.adam_state.second_moments],
            self.adam_state.step_count,
        )
        return net

    def with_config(self, config: NetConfig) -> MLP:
        """Same parameters under a new config (layer sizes must agree)."""
        return MLP(config, self.weights, self.biases)

    def reset_optimizer(self) -> None:
        self.adam_state = AdamState.zeros_like(self.parameters())

    def checksum(self) -> str:
        h = hashlib.sha256()
        for p in self.parameters():
            h.update(np.ascontiguousarray(p).tobytes())
        return h.hexdigest()


def _as_batch(net: MLP, x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != net.config.input_dim:
        raise ShapeError(f"expected input of length {net.config.input_dim}, got shape {np.shape(x)}")
    return arr, single


def sample_masks(net: MLP, batch_size: int, rng: np.random.Generator) -> list[np.ndarray]:
    """One keep-mask per hidden layer, shape ``(batch_size, width)``, entries in {0, 1}."""
    keep = 1.0 - net.config.dropout_prob
    return [
        (rng.random((batch_size, width)) < keep).astype(np.float64)
        for width in net.config.hidden_sizes
    ]


def _check_masks(net: MLP, masks: list[np.ndarray], batch_size: int) -> list[np.ndarray]:
    if len(masks) != len(net.config.hidden_sizes):
        raise ShapeError("need exactly one mask per hidden layer")
    out = []
    for m, width in zip(masks, net.config.hidden_sizes):
        m = np.asarray(m, dtype=np.float64)
        if m.ndim == 1:
            m = np.broadcast_to(m, (batch_size, width))
        if m.shape != (batch_size, width):
            raise ShapeError(f"mask shape {m.shape} does not match ({batch_size}, {width})")
        out.append(m)
    return out


def _forward(net: MLP, x: np.ndarray, masks: list[np.ndarray] | None):
    """Return (pre-activations, layer inputs, output) for backprop."""
    scale = 1.0 / (1.0 - net.config.dropout_prob)
    pre, inputs = [], []
    h = x
    last = net.num_layers - 1
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        inputs.append(h)
        z = h @ w + b
        pre.append(z)
        if k < last:
            h = np.maximum(z, 0.0)
            if masks is not None:
                h = h * masks[k] * scale
        else:
            h = z
    return pre, inputs, h


def forward_deterministic(net: MLP, x) -> np.ndarray:
    batch, single = _as_batch(net, x)
    out = _forward(net, batch, None)[2]
    return out[0] if single else out


def forward_stochastic(
    net: MLP,
    x,
    rng: np.random.Generator | None = None,
    masks: list[np.ndarray] | None = None,
) -> np.ndarray:
    """Forward pass with dropout masks; each row of a batch gets its own mask.

    Kept activations are scaled by ``1 / (1 - d)`` so the expected hidden
    activation matches the deterministic pass.
    """
    batch, single = _as_batch(net, x)
    if masks is None:
        if rng is None:
            raise ValueError("forward_stochastic needs either rng or masks")
        masks = sample_masks(net, batch.shape[0], rng)
    else:
        masks = _check_masks(net, masks, batch.shape[0])
    out = _forward(net, batch, masks)[2]
    return out[0] if single else out


def _prepare_batch(net: MLP, inputs, targets) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if y.ndim == 1:
        y = y[:, None] if net.config.output_dim == 1 and y.shape[0] == x.shape[0] else y[None, :]
    if x.shape[0] == 0:
        raise EmptyBatchError("batch is empty")
    if x.ndim != 2 or x.shape[1] != net.config.input_dim:
        raise ShapeError(f"inputs must have {net.config.input_dim} columns, got {x.shape}")
    if y.shape != (x.shape[0], net.config.output_dim):
        raise ShapeError(f"targets shape {y.shape} incompatible with {x.shape[0]} x {net.config.output_dim}")
    return x, y


def _l2_penalty(net: MLP) -> float:
    return net.config.l2_weight * sum(float(np.sum(w * w)) for w in net.weights)


def loss(net: MLP, inputs, targets, masks: list[np.ndarray] | None = None) -> float:
    """Mean squared error over batch and output dims, plus L2 on weights only."""
    x, y = _prepare_batch(net, inputs, targets)
    if masks is not None:
        masks = _check_masks(net, masks, x.shape[0])
    pred = _forward(net, x, masks)[2]
    return float(np.mean((pred - y) ** 2)) + _l2_penalty(net)


def _loss_and_gradients(net: MLP, x: np.ndarray, y: np.ndarray, masks):
    pre, inputs, pred = _forward(net, x, masks)
    diff = pred - y
    value = float(np.mean(diff * diff)) + _l2_penalty(net)
    scale = 1.0 / (1.0 - net.config.dropout_prob)
    l2 = 2.0 * net.config.l2_weight

    grad_w = [None] * net.num_layers
    grad_b = [None] * net.num_layers
    delta = 2.0 * diff / diff.size
    for k in range(net.num_layers - 1, -1, -1):
        grad_w[k] = inputs[k].T @ delta + l2 * net.weights[k]
        grad_b[k] = delta.sum(axis=0)
        if k > 0:
            delta = delta @ net.weights[k].T
            if masks is not None:
                delta = delta * masks[k - 1] * scale
            delta = delta * (pre[k - 1] > 0.0)
    return value, Gradients(grad_w, grad_b)


def gradients(net: MLP, inputs, targets, masks: list[np.ndarray] | None = None) -> Gradients:
    """Exact gradient of ``loss`` with the dropout masks held fixed."""
    x, y = _prepare_batch(net, inputs, targets)
    if masks is not None:
        masks = _check_masks(net, masks, x.shape[0])
    return _loss_and_gradients(net, x, y, masks)[1]


def adam_step(net: MLP, grads: Gradients) -> MLP:
    """Bias-corrected ADAM update, applied in place."""
    params = net.parameters()
    garrs = grads.arrays()
    if len(garrs) != len(params) or any(g.shape != p.shape for g, p in zip(garrs, params)):
        raise ShapeError("gradient shapes do not match parameters")
    if not all(np.all(np.isfinite(g)) for g in garrs):
        raise TrainingDivergence("non-finite gradient entries")

    cfg = net.config
    state = net.adam_state
    state.step_count += 1
    t = state.step_count
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    correction1 = 1.0 - b1**t
    correction2 = 1.0 - b2**t
    for p, g, m, v in zip(params, garrs, state.first_moments, state.second_moments):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= cfg.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + cfg.adam_epsilon)
    return net


def train(
    net: MLP,
    inputs,
    targets,
    rng: np.random.Generator,
    reset_optimizer: bool = True,
) -> TrainReport:
    """Shuffled mini-batch ADAM for ``config.train_epochs`` passes.

    Every example draws a fresh dropout mask each time it is visited.
    """
    x, y = _prepare_batch(net, inputs, targets)
    if reset_optimizer:
        net.reset_optimizer()
    cfg = net.config
    n = x.shape[0]
    use_dropout = cfg.dropout_prob > 0.0
    epoch_losses = []
    for _ in range(cfg.train_epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            masks = sample_masks(net, idx.size, rng) if use_dropout else None
            value, grads = _loss_and_gradients(net, x[idx], y[idx], masks)
            if not np.isfinite(value) or value > DIVERGENCE_LIMIT:
                raise TrainingDivergence(f"loss diverged to {value}")
            adam_step(net, grads)
            total += value * idx.size
        epoch_losses.append(total / n)
    return TrainReport(final_loss=epoch_losses[-1], epochs_run=len(epoch_losses), epoch_losses=epoch_losses)


# -- checkpoints -------------------------------------------------------------

_CONFIG_SCALARS = [f.name for f in fields(NetConfig) if f.name != "layer_sizes"]


def dumps(net: MLP) -> str:
    """Serialize to line-oriented decimal text; ``repr`` floats round-trip exactly."""
    out = io.StringIO()
    out.write(CHECKPOINT_MAGIC + "\n")
    out.write("layer_sizes " + " ".join(str(s) for s in net.config.layer_sizes) + "\n")
    for name in _CONFIG_SCALARS:
        out.write(f"{name} {getattr(net.config, name)!r}\n")
    for k, w in enumerate(net.weights):
        out.write(f"weights {k}\n")
        for row in w:
            out.write(" ".join(repr(float(v)) for v in row) + "\n")
    for k, b in enumerate(net.biases):
        out.write(f"biases {k}\n")
        out.write(" ".join(repr(float(v)) for v in b) + "\n")
    return out.getvalue()


def loads(text: str) -> MLP:
    lines = text.splitlines()
    if not lines or lines[0].strip() != CHECKPOINT_MAGIC:
        raise ValueError("not a dropdagger network checkpoint")
    pos = 1

    def take() -> list[str]:
        nonlocal pos
        if pos >= len(lines):
            raise ValueError("truncated checkpoint")
        parts = lines[pos].split()
        pos += 1
        return parts

    head = take()
    if head[0] != "layer_sizes":
        raise ValueError("expected layer_sizes line")
    sizes = tuple(int(s) for s in head[1:])
    scalars = {}
    for name in _CONFIG_SCALARS:
        key, value = take()
        if key != name:
            raise ValueError(f"expected {name}, found {key}")
        scalars[name] = int(value) if name in ("train_epochs", "batch_size") else float(value)
    config = NetConfig(layer_sizes=sizes, **scalars)

    weights, biases = [], []
    for k in range(len(sizes) - 1):
        if take() != ["weights", str(k)]:
            raise ValueError(f"expected weights block {k}")
        rows = [[float(v) for v in take()] for _ in range(sizes[k])]
        weights.append(np.array(rows, dtype=np.float64).reshape(sizes[k], sizes[k + 1]))
    for k in range(len(sizes) - 1):
        if take() != ["biases", str(k)]:
            raise ValueError(f"expected biases block {k}")
        biases.append(np.array([float(v) for v in take()], dtype=np.float64))
    return MLP(config, weights, biases)


def save(net: MLP, path) -> None:
    Path(path).write_text(dumps(net))


def load(path) -> MLP:
    return loads(Path(path).read_text())


def with_dropout(config: NetConfig, dropout_prob: float) -> NetConfig:
    return replace(config, dropout_prob=dropout_prob)
