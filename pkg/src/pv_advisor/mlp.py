"""Minimal dense feed-forward network with exact analytic gradients.

This is the Q-function approximator: a stack of fully connected layers
(ReLU hidden, linear output) trained with plain SGD. Everything is float64
and deterministic given a seed; there is no autodiff, the backward pass is
the hand-derived chain rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Activation(Enum):
    RELU = "relu"
    IDENTITY = "identity"


@dataclass
class DenseLayer:
    """One fully connected layer: y = act(W x + b), W is (out, in)."""

    weights: np.ndarray
    bias: np.ndarray
    activation: Activation

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2:
            raise ValueError(f"weights must be 2-D, got shape {self.weights.shape}")
        if self.bias.shape != (self.weights.shape[0],):
            raise ValueError(
                f"bias length {self.bias.shape} does not match "
                f"{self.weights.shape[0]} output rows"
            )

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class ForwardCache:
    """Intermediate values of one forward pass, needed by backward().

    All arrays are 2-D (batch, dim); vector inputs are cached as a batch
    of one.
    """

    inputs: np.ndarray
    pre_activations: list = field(default_factory=list)
    activations: list = field(default_factory=list)


@dataclass
class Gradients:
    """Per-layer loss gradients, shaped exactly like the parameters."""

    d_weights: list
    d_bias: list


class Mlp:
    """Fully connected network; layer dimensions must chain."""

    def __init__(self, layers: list[DenseLayer]):
        if not layers:
            raise ValueError("network needs at least one layer")
        for a, b in zip(layers, layers[1:]):
            if a.out_dim != b.in_dim:
                raise ValueError(
                    f"layer dimensions do not chain: {a.out_dim} -> {b.in_dim}"
                )
        self.layers = layers

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    def parameter_count(self) -> int:
        return sum(l.weights.size + l.bias.size for l in self.layers)

    def forward(self, x) -> tuple[np.ndarray, ForwardCache]:
        """Run the network on a vector (input_dim,) or batch (B, input_dim).

        Returns the output (same leading shape as the input) and the cache
        of intermediate activations consumed by backward().
        """
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        batch = x[np.newaxis, :] if single else x
        if batch.ndim != 2 or batch.shape[1] != self.input_dim:
            raise ValueError(
                f"input has shape {x.shape}, expected trailing dim {self.input_dim}"
            )
        cache = ForwardCache(inputs=batch)
        h = batch
        for layer in self.layers:
            # einsum, not @: BLAS gemm results differ in the last ulp between
            # batch sizes, which would break bit-level batch/vector agreement
            z = np.einsum("bi,oi->bo", h, layer.weights) + layer.bias
            h = np.maximum(z, 0.0) if layer.activation is Activation.RELU else z
            cache.pre_activations.append(z)
            cache.activations.append(h)
        out = cache.activations[-1]
        return (out[0], cache) if single else (out, cache)

    def predict(self, x) -> np.ndarray:
        """Forward pass without keeping the cache (inference path)."""
        return self.forward(x)[0]

    def backward(self, cache: ForwardCache, output_grad) -> Gradients:
        """Exact chain-rule gradients of the loss w.r.t. every parameter.

        ``output_grad`` is dLoss/dOutput, a vector (output_dim,) or batch
        (B, output_dim) matching the cached forward pass. Batched gradients
        are summed over the batch (the loss carries any 1/B factor). The
        ReLU subgradient at exactly 0 is taken as 0.
        """
        g = np.asarray(output_grad, dtype=np.float64)
        if g.ndim == 1:
            g = g[np.newaxis, :]
        if len(cache.activations) != len(self.layers):
            raise ValueError("cache depth does not match layer count")
        if g.shape != cache.activations[-1].shape:
            raise ValueError(
                f"output_grad shape {output_grad if np.ndim(output_grad) == 0 else np.shape(output_grad)} "
                f"does not match cached output {cache.activations[-1].shape}"
            )
        d_weights = [None] * len(self.layers)
        d_bias = [None] * len(self.layers)
        for i in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[i]
            if layer.activation is Activation.RELU:
                g = g * (cache.pre_activations[i] > 0.0)
            prev = cache.inputs if i == 0 else cache.activations[i - 1]
            if prev.shape[1] != layer.in_dim:
                raise ValueError("cache does not match this network's shapes")
            d_weights[i] = np.einsum("bo,bi->oi", g, prev)
            d_bias[i] = g.sum(axis=0)
            if i > 0:
                g = np.einsum("bo,oi->bi", g, layer.weights)
        return Gradients(d_weights=d_weights, d_bias=d_bias)

    def sgd_step(self, grads: Gradients, learning_rate: float) -> None:
        """In-place plain SGD: p <- p - lr * grad(p)."""
        if learning_rate <= 0 or not np.isfinite(learning_rate):
            raise ValueError(f"learning_rate must be positive, got {learning_rate}")
        if len(grads.d_weights) != len(self.layers):
            raise ValueError("gradient layer count does not match network")
        for layer, dw, db in zip(self.layers, grads.d_weights, grads.d_bias):
            if dw.shape != layer.weights.shape or db.shape != layer.bias.shape:
                raise ValueError(
                    f"gradient shapes {dw.shape}/{db.shape} do not match "
                    f"parameters {layer.weights.shape}/{layer.bias.shape}"
                )
        for layer, dw, db in zip(self.layers, grads.d_weights, grads.d_bias):
            layer.weights -= learning_rate * dw
            layer.bias -= learning_rate * db

    def copy(self) -> "Mlp":
        return Mlp(
            [
                DenseLayer(l.weights.copy(), l.bias.copy(), l.activation)
                for l in self.layers
            ]
        )


def init_mlp(input_dim: int, hidden: list[int], output_dim: int, seed: int) -> Mlp:
    """Build a network with fan-in-scaled uniform weights and zero biases.

    Weights are drawn from U(-sqrt(6/fan_in), +sqrt(6/fan_in)), a He-style
    bound suited to the ReLU hidden layers. Deterministic given ``seed``.
    """
    dims = [input_dim, *hidden, output_dim]
    if any(int(d) < 1 for d in dims):
        raise ValueError(f"all dimensions must be >= 1, got {dims}")
    rng = np.random.default_rng(seed)
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(dims, dims[1:])):
        bound = np.sqrt(6.0 / fan_in)
        weights = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        activation = Activation.RELU if i < len(dims) - 2 else Activation.IDENTITY
        layers.append(DenseLayer(weights, np.zeros(fan_out), activation))
    return Mlp(layers)


def masked_q_loss(predicted_q, actions, targets) -> tuple[float, np.ndarray]:
    """Mean squared Bellman error over a batch, on the taken actions only.

    loss = mean_i (target_i - Q(s_i, a_i))^2. The returned gradient batch
    is dLoss/dQ: zero everywhere except at each row's taken action, where
    it is 2 * (Q - target) / batch_size.
    """
    q = np.asarray(predicted_q, dtype=np.float64)
    if q.ndim == 1:
        q = q[np.newaxis, :]
    acts = np.asarray(actions, dtype=np.intp).reshape(-1)
    tgts = np.asarray(targets, dtype=np.float64).reshape(-1)
    n = q.shape[0]
    if n == 0:
        raise ValueError("empty batch")
    if acts.shape[0] != n or tgts.shape[0] != n:
        raise ValueError(
            f"batch lengths differ: {n} predictions, {acts.shape[0]} actions, "
            f"{tgts.shape[0]} targets"
        )
    if acts.min() < 0 or acts.max() >= q.shape[1]:
        raise ValueError(f"action index out of range for {q.shape[1]} outputs")
    taken = q[np.arange(n), acts]
    residual = taken - tgts
    loss = float(np.mean(residual**2))
    grads = np.zeros_like(q)
    grads[np.arange(n), acts] = 2.0 * residual / n
    return loss, grads
