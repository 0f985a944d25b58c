"""Minimal reverse-mode automatic differentiation over numpy arrays.

Only the handful of operations needed by the beam-selection models is
implemented. Every forward call builds a fresh graph of ``Tensor`` nodes;
``Tensor.backward`` walks it once in reverse topological order and
accumulates gradients into the ``grad`` buffers, so trainable leaves keep
their gradients until explicitly zeroed.
"""

from __future__ import annotations

import numpy as np

from ..errors import NumericError


class Tensor:
    """Array value plus gradient buffer and the closure that backpropagates."""

    __slots__ = ("value", "grad", "requires_grad", "_parents", "_grad_fn")

    def __init__(self, value, requires_grad: bool = False, _parents=(), _grad_fn=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)
        self.requires_grad = requires_grad
        self._parents = _parents
        self._grad_fn = _grad_fn

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad[...] = 0.0

    def backward(self):
        """Accumulate d(self)/d(leaf) into every reachable gradient buffer."""
        if not self._parents:
            raise RuntimeError("backward called on a leaf tensor: run a forward pass first")
        if self.value.size != 1:
            raise RuntimeError("backward requires a scalar output")
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                stack.append((parent, False))
        self.grad = np.ones_like(self.value)
        for node in reversed(order):
            if node._grad_fn is not None:
                node._grad_fn(node.grad)


def _finite_or_raise(value: np.ndarray, op: str) -> np.ndarray:
    if not np.all(np.isfinite(value)):
        raise NumericError(f"non-finite values produced by {op}")
    return value


def matmul(x: Tensor, w: Tensor) -> Tensor:
    with np.errstate(over="ignore", invalid="ignore"):
        product = x.value @ w.value
    out = Tensor(_finite_or_raise(product, "matmul"), _parents=(x, w))

    def grad_fn(g):
        x.grad += g @ w.value.T
        w.grad += x.value.T @ g

    out._grad_fn = grad_fn
    return out


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    out = Tensor(x.value + b.value, _parents=(x, b))

    def grad_fn(g):
        x.grad += g
        b.grad += g.sum(axis=tuple(range(g.ndim - 1)))

    out._grad_fn = grad_fn
    return out


def relu(x: Tensor) -> Tensor:
    mask = x.value > 0.0
    out = Tensor(np.where(mask, x.value, 0.0), _parents=(x,))

    def grad_fn(g):
        x.grad += g * mask

    out._grad_fn = grad_fn
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.value.shape != b.value.shape:
        raise ValueError("add requires identical shapes")
    out = Tensor(a.value + b.value, _parents=(a, b))

    def grad_fn(g):
        a.grad += g
        b.grad += g

    out._grad_fn = grad_fn
    return out


def concat(parts: list, axis: int = -1) -> Tensor:
    values = [p.value for p in parts]
    out = Tensor(np.concatenate(values, axis=axis), _parents=tuple(parts))
    sizes = [v.shape[axis] for v in values]
    splits = np.cumsum(sizes)[:-1]

    def grad_fn(g):
        for part, piece in zip(parts, np.split(g, splits, axis=axis)):
            part.grad += piece

    out._grad_fn = grad_fn
    return out


def gather_rows(x: Tensor, index: np.ndarray) -> Tensor:
    """Select rows of a 2-D tensor; backward scatter-adds into the source."""
    out = Tensor(x.value[index], _parents=(x,))

    def grad_fn(g):
        np.add.at(x.grad, index, g)

    out._grad_fn = grad_fn
    return out


def reshape(x: Tensor, shape: tuple) -> Tensor:
    out = Tensor(x.value.reshape(shape), _parents=(x,))

    def grad_fn(g):
        x.grad += g.reshape(x.value.shape)

    out._grad_fn = grad_fn
    return out


def sum_axis(x: Tensor, axis: int) -> Tensor:
    out = Tensor(x.value.sum(axis=axis), _parents=(x,))

    def grad_fn(g):
        x.grad += np.expand_dims(g, axis)

    out._grad_fn = grad_fn
    return out


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Numerically stable softmax (plain numpy; inference and labels only)."""
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def cross_entropy(pred_probs: np.ndarray, label: int) -> float:
    """`-log p[label]` with the probability floored at 1e-12."""
    probs = np.asarray(pred_probs, dtype=np.float64)
    if not 0 <= label < probs.shape[-1]:
        raise ValueError(f"label {label} out of range for {probs.shape[-1]} classes")
    return float(-np.log(max(float(probs[label]), 1e-12)))


def softmax_cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean cross-entropy of row-wise softmax against integer labels.

    Fused so the backward pass is the plain ``(softmax - onehot) / batch``.
    """
    if logits.value.ndim != 2:
        raise ValueError("logits must be (batch, classes)")
    batch, n_classes = logits.value.shape
    labels = np.asarray(labels)
    if labels.shape != (batch,):
        raise ValueError("labels must be one integer per batch row")
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ValueError("label index out of range")
    probs = softmax(logits.value, axis=1)
    picked = np.maximum(probs[np.arange(batch), labels], 1e-12)
    loss_value = _finite_or_raise(-np.log(picked).mean(), "softmax_cross_entropy")
    out = Tensor(loss_value, _parents=(logits,))

    def grad_fn(g):
        delta = probs.copy()
        delta[np.arange(batch), labels] -= 1.0
        logits.grad += (float(g) / batch) * delta

    out._grad_fn = grad_fn
    return out
