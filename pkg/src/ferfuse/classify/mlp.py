"""Multi-layer perceptron: ReLU hidden layers, softmax cross-entropy,
mini-batch gradient descent with He-style seeded initialization."""

from dataclasses import dataclass, field

import numpy as np

from .. import blobio
from ..errors import DimensionMismatchError


@dataclass
class MlpModel:
    weights: list  # W[l] maps layer l activations to layer l+1
    biases: list
    activation: str = "relu"
    loss_history: list = field(default_factory=list)

    @property
    def layer_sizes(self):
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]


def _softmax(z):
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def forward(model: MlpModel, x):
    """Per-layer activations; the last entry is the softmax output."""
    a = np.asarray(x, dtype=np.float64)
    if a.shape[1] != model.weights[0].shape[0]:
        raise DimensionMismatchError(
            f"expected {model.weights[0].shape[0]} inputs, got {a.shape[1]}"
        )
    acts = [a]
    last = len(model.weights) - 1
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = acts[-1] @ w + b
        acts.append(_softmax(z) if l == last else np.maximum(z, 0.0))
    return acts


def loss_and_grads(model: MlpModel, x, y):
    """Mean cross-entropy over the batch and gradients for every layer."""
    y = np.asarray(y, dtype=np.int64)
    acts = forward(model, x)
    probs = acts[-1]
    n = probs.shape[0]
    eps = 1e-12
    loss = float(-np.log(np.clip(probs[np.arange(n), y], eps, None)).mean())
    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads_w = []
    grads_b = []
    for l in range(len(model.weights) - 1, -1, -1):
        grads_w.append(acts[l].T @ delta)
        grads_b.append(delta.sum(axis=0))
        if l > 0:
            delta = (delta @ model.weights[l].T) * (acts[l] > 0)
    return loss, grads_w[::-1], grads_b[::-1]


def mlp_init(n_inputs, hidden, n_classes, seed: int = 0) -> MlpModel:
    sizes = [n_inputs, *hidden, n_classes]
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(weights=weights, biases=biases)


def mlp_train(
    x,
    y,
    hidden=(64,),
    epochs: int = 100,
    lr: float = 0.01,
    batch_size: int = 32,
    seed: int = 0,
    n_classes: int | None = None,
) -> MlpModel:
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    model = mlp_init(x.shape[1], hidden, n_classes, seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    n = x.shape[0]
    for _ in range(epochs):
        perm = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            batch = perm[start : start + batch_size]
            loss, gw, gb = loss_and_grads(model, x[batch], y[batch])
            total += loss * len(batch)
            for l in range(len(model.weights)):
                model.weights[l] -= lr * gw[l]
                model.biases[l] -= lr * gb[l]
        model.loss_history.append(total / n)
    return model


def mlp_predict(model: MlpModel, x):
    """Argmax of the softmax output; ties go to the smaller class index."""
    return np.argmax(forward(model, x)[-1], axis=1)


def save_mlp(model: MlpModel, path):
    arrays = {}
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        arrays[f"w{l}"] = w
        arrays[f"b{l}"] = b
    meta = {
        "n_layers": len(model.weights),
        "activation": model.activation,
        "loss_history": model.loss_history,
    }
    blobio.write_blob(path, "mlp", arrays, meta)


def load_mlp(path) -> MlpModel:
    kind, arrays, meta = blobio.read_blob(path)
    if kind != "mlp":
        raise ValueError(f"{path}: blob kind {kind!r} is not an mlp")
    n = meta["n_layers"]
    return MlpModel(
        weights=[arrays[f"w{l}"] for l in range(n)],
        biases=[arrays[f"b{l}"] for l in range(n)],
        activation=meta["activation"],
        loss_history=meta.get("loss_history", []),
    )
