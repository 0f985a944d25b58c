"""Dense multi-layer perceptrons built on the autodiff tensors."""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor


class Mlp:
    """Affine chain with ReLU on hidden layers and a linear output.

    ``layer_sizes`` lists the widths from input to output, so
    ``Mlp([6, 32, 16], rng)`` is one hidden layer of 32 units. Weights are
    Glorot-uniform from the supplied generator; biases start at zero.
    """

    def __init__(self, layer_sizes: list, rng: np.random.Generator):
        if len(layer_sizes) < 2:
            raise ValueError("an MLP needs at least input and output sizes")
        self.layer_sizes = list(int(s) for s in layer_sizes)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            self.weights.append(Tensor(w, requires_grad=True))
            self.biases.append(Tensor(np.zeros(fan_out), requires_grad=True))

    def forward(self, x: Tensor) -> Tensor:
        if x.value.shape[-1] != self.layer_sizes[0]:
            raise ValueError(f"input width {x.value.shape[-1]} does not match "
                             f"layer size {self.layer_sizes[0]}")
        out = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out = ad.add_bias(ad.matmul(out, w), b)
            if i < last:
                out = ad.relu(out)
        return out

    def __call__(self, x: Tensor) -> Tensor:
        return self.forward(x)

    def parameters(self) -> list:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def parameter_count(self, include_biases: bool = True) -> int:
        total = sum(w.value.size for w in self.weights)
        if include_biases:
            total += sum(b.value.size for b in self.biases)
        return total
