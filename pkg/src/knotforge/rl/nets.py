"""Minimal float64 MLP with hand-written backprop, plus Adam.

Kept dependency-free so gradients can be verified against finite differences
exactly; network sizes here are small enough that numpy BLAS is the fast path.
"""

from __future__ import annotations

import numpy as np


class MLP:
    """Fully connected ReLU network with a linear head."""

    def __init__(self, sizes: list[int], rng: np.random.Generator,
                 dtype=np.float64):
        self.sizes = list(sizes)
        self.dtype = np.dtype(dtype)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            scale = np.sqrt(2.0 / fan_in)
            self.weights.append(
                rng.normal(0.0, scale, size=(fan_in, fan_out)).astype(self.dtype))
            self.biases.append(np.zeros(fan_out, dtype=self.dtype))
        self._inputs: list[np.ndarray] = []

    def forward(self, x: np.ndarray, cache: bool = False) -> np.ndarray:
        h = np.asarray(x, dtype=self.dtype)
        inputs = []
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            inputs.append(h)
            h = h @ w + b
            if k != last:
                h = np.maximum(h, 0.0)
        if cache:
            self._inputs = inputs
        return h

    def backward(self, grad_out: np.ndarray):
        """Gradients after forward(..., cache=True).

        Returns (weight_grads, bias_grads, grad_wrt_input); grad_out is
        dL/d(output), shape like the forward result.
        """
        w_grads = [None] * len(self.weights)
        b_grads = [None] * len(self.biases)
        g = np.asarray(grad_out, dtype=self.dtype)
        for k in range(len(self.weights) - 1, -1, -1):
            x = self._inputs[k]
            if k != len(self.weights) - 1:
                # ReLU mask of this layer's post-activation = next layer's input.
                g = g * (self._inputs[k + 1] > 0.0)
            w_grads[k] = x.T @ g
            b_grads[k] = g.sum(axis=0)
            g = g @ self.weights[k].T
        return w_grads, b_grads, g

    # Flat-vector access used by checkpoints and finite-difference checks.
    def tensors(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def get_flat(self) -> np.ndarray:
        return np.concatenate([t.reshape(-1) for t in self.tensors()])

    def set_flat(self, flat: np.ndarray) -> None:
        idx = 0
        for t in self.tensors():
            n = t.size
            t[...] = flat[idx:idx + n].reshape(t.shape)
            idx += n
        assert idx == flat.size

    def copy_from(self, other: "MLP") -> None:
        for dst, src in zip(self.tensors(), other.tensors()):
            dst[...] = src

    def soft_update_from(self, other: "MLP", tau: float) -> None:
        for dst, src in zip(self.tensors(), other.tensors()):
            dst[...] = tau * src + (1.0 - tau) * dst


class Adam:
    """Adam over a list of tensors updated in place."""

    def __init__(self, tensors: list[np.ndarray], lr: float = 3e-4,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.tensors = tensors
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(t) for t in tensors]
        self.v = [np.zeros_like(t) for t in tensors]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(self.tensors, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)
