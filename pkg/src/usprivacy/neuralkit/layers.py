"""Layers for the from-scratch neural kit.

Every layer works on float64 batch arrays whose first axis is the batch;
shape inference (`out_shape`) and the manifest config speak in per-sample
shapes. forward returns (activation, ctx); backward consumes the cached
ctx and returns (input gradients, parameter gradients). Parameters live
in `self.params` and are shared by reference when a layer object appears
in more than one network.
"""

from __future__ import annotations

import numpy as np

from ..util import sigmoid


class Layer:
    kind = "layer"

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}

    def init_params(self, rng: np.random.Generator) -> None:
        """Fill self.params; no-op for parameterless layers."""

    def out_shape(self, in_shapes: list[tuple[int, ...]]) -> tuple[int, ...]:
        raise NotImplementedError

    def forward(self, xs, train: bool, rng):
        raise NotImplementedError

    def backward(self, gout, ctx):
        raise NotImplementedError

    def config(self) -> dict:
        return {}

    def _one(self, in_shapes):
        if len(in_shapes) != 1:
            raise ValueError(f"{self.kind} takes exactly one input")
        return in_shapes[0]


def _glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(np.float64)


class Embedding(Layer):
    kind = "embedding"

    def __init__(self, vocab_size: int, dim: int):
        super().__init__()
        if vocab_size < 1 or dim < 1:
            raise ValueError("embedding needs vocab_size >= 1 and dim >= 1")
        self.vocab_size = vocab_size
        self.dim = dim

    def init_params(self, rng):
        self.params["W"] = rng.uniform(
            -0.05, 0.05, size=(self.vocab_size, self.dim)).astype(np.float64)

    def out_shape(self, in_shapes):
        shape = self._one(in_shapes)
        if len(shape) != 1:
            raise ValueError(f"embedding input must be rank 1, got {shape}")
        return (shape[0], self.dim)

    def forward(self, xs, train, rng):
        ids = xs[0]
        if ids.max(initial=0) >= self.vocab_size or ids.min(initial=0) < 0:
            raise ValueError(
                f"embedding id out of range [0, {self.vocab_size})"
            )
        return self.params["W"][ids], ids

    def backward(self, gout, ctx):
        ids = ctx
        dW = np.zeros_like(self.params["W"])
        np.add.at(dW, ids, gout)
        return [None], {"W": dW}

    def config(self):
        return {"vocab_size": self.vocab_size, "dim": self.dim}


class Conv1D(Layer):
    """Valid 1-D convolution over the time axis with a fixed ReLU."""

    kind = "conv1d"

    def __init__(self, in_channels: int, filters: int, width: int):
        super().__init__()
        if min(in_channels, filters, width) < 1:
            raise ValueError("conv1d dimensions must be >= 1")
        self.in_channels = in_channels
        self.filters = filters
        self.width = width

    def init_params(self, rng):
        fan_in = self.width * self.in_channels
        fan_out = self.width * self.filters
        self.params["W"] = _glorot(
            rng, (self.width, self.in_channels, self.filters), fan_in, fan_out)
        self.params["b"] = np.zeros(self.filters, dtype=np.float64)

    def out_shape(self, in_shapes):
        shape = self._one(in_shapes)
        if len(shape) != 2:
            raise ValueError(f"conv1d input must be rank 2, got {shape}")
        length, channels = shape
        if channels != self.in_channels:
            raise ValueError(
                f"conv1d expects {self.in_channels} channels, got {channels}"
            )
        if length < self.width:
            raise ValueError(
                f"conv1d kernel width {self.width} exceeds input length {length}"
            )
        return (length - self.width + 1, self.filters)

    def forward(self, xs, train, rng):
        x = xs[0]
        # (B, T, width, C) windows -> (B*T, width*C) @ (width*C, F)
        windows = np.lib.stride_tricks.sliding_window_view(
            x, self.width, axis=1).transpose(0, 1, 3, 2)
        b, t = windows.shape[:2]
        cols = np.ascontiguousarray(windows).reshape(b * t, -1)
        w2 = self.params["W"].reshape(-1, self.filters)
        z = (cols @ w2 + self.params["b"]).reshape(b, t, self.filters)
        out = np.maximum(z, 0.0)
        return out, (cols, z.shape, out > 0)

    def backward(self, gout, ctx):
        cols, zshape, active = ctx
        b, t, f = zshape
        dz = (gout * active).reshape(b * t, f)
        w2 = self.params["W"].reshape(-1, self.filters)
        dW = (cols.T @ dz).reshape(self.params["W"].shape)
        db = dz.sum(axis=0)
        dcols = (dz @ w2.T).reshape(b, t, self.width, self.in_channels)
        dx = np.zeros((b, t + self.width - 1, self.in_channels))
        for k in range(self.width):
            dx[:, k:k + t, :] += dcols[:, :, k, :]
        return [dx], {"W": dW, "b": db}

    def config(self):
        return {"in_channels": self.in_channels, "filters": self.filters,
                "width": self.width}


class GlobalMaxPool1D(Layer):
    kind = "global_max_pool1d"

    def out_shape(self, in_shapes):
        shape = self._one(in_shapes)
        if len(shape) != 2:
            raise ValueError(f"global max pool input must be rank 2, got {shape}")
        return (shape[1],)

    def forward(self, xs, train, rng):
        x = xs[0]
        arg = x.argmax(axis=1)
        out = np.take_along_axis(x, arg[:, None, :], axis=1)[:, 0, :]
        return out, (arg, x.shape)

    def backward(self, gout, ctx):
        arg, shape = ctx
        dx = np.zeros(shape)
        bidx = np.arange(shape[0])[:, None]
        fidx = np.arange(shape[2])[None, :]
        dx[bidx, arg, fidx] = gout
        return [dx], {}


class Flatten(Layer):
    kind = "flatten"

    def out_shape(self, in_shapes):
        shape = self._one(in_shapes)
        return (int(np.prod(shape)) if shape else 1,)

    def forward(self, xs, train, rng):
        x = xs[0]
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, gout, ctx):
        return [gout.reshape(ctx)], {}


_ACTIVATIONS = ("linear", "relu", "sigmoid")


class Dense(Layer):
    kind = "dense"

    def __init__(self, in_dim: int, out_dim: int, activation: str = "linear"):
        super().__init__()
        if in_dim < 1 or out_dim < 1:
            raise ValueError("dense dimensions must be >= 1")
        if activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.activation = activation

    def init_params(self, rng):
        self.params["W"] = _glorot(
            rng, (self.in_dim, self.out_dim), self.in_dim, self.out_dim)
        self.params["b"] = np.zeros(self.out_dim, dtype=np.float64)

    def out_shape(self, in_shapes):
        shape = self._one(in_shapes)
        if len(shape) != 1:
            raise ValueError(f"dense input must be rank 1, got {shape}")
        if shape[0] != self.in_dim:
            raise ValueError(f"dense expects width {self.in_dim}, got {shape[0]}")
        return (self.out_dim,)

    def forward(self, xs, train, rng):
        x = xs[0]
        z = x @ self.params["W"] + self.params["b"]
        if self.activation == "relu":
            out = np.maximum(z, 0.0)
        elif self.activation == "sigmoid":
            out = sigmoid(z)
        else:
            out = z
        return out, (x, out)

    def _dz(self, gout, out):
        if self.activation == "relu":
            return gout * (out > 0)
        if self.activation == "sigmoid":
            return gout * out * (1.0 - out)
        return gout

    def backward(self, gout, ctx):
        x, out = ctx
        return self.backward_from_preact(self._dz(gout, out), ctx)

    def backward_from_preact(self, dz, ctx):
        """Backward given the gradient at the pre-activation (fused losses)."""
        x, _ = ctx
        dW = x.T @ dz
        db = dz.sum(axis=0)
        dx = dz @ self.params["W"].T
        return [dx], {"W": dW, "b": db}

    def config(self):
        return {"in_dim": self.in_dim, "out_dim": self.out_dim,
                "activation": self.activation}


class Dropout(Layer):
    """Inverted dropout: scales kept units by 1/(1-rate) during training."""

    kind = "dropout"

    def __init__(self, rate: float):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate

    def out_shape(self, in_shapes):
        return self._one(in_shapes)

    def forward(self, xs, train, rng):
        x = xs[0]
        if not train or self.rate == 0.0:
            return x, None
        keep = 1.0 - self.rate
        mask = (rng.random(x.shape) >= self.rate) / keep
        return x * mask, mask

    def backward(self, gout, ctx):
        if ctx is None:
            return [gout], {}
        return [gout * ctx], {}

    def config(self):
        return {"rate": self.rate}


class Concatenate(Layer):
    """Concatenates rank-1-per-sample inputs along the feature axis."""

    kind = "concatenate"

    def out_shape(self, in_shapes):
        if len(in_shapes) < 2:
            raise ValueError("concatenate needs at least two inputs")
        for shape in in_shapes:
            if len(shape) != 1:
                raise ValueError(
                    f"concatenate inputs must be rank 1, got {shape}"
                )
        return (sum(s[0] for s in in_shapes),)

    def forward(self, xs, train, rng):
        return np.concatenate(xs, axis=1), [x.shape[1] for x in xs]

    def backward(self, gout, ctx):
        grads = []
        offset = 0
        for width in ctx:
            grads.append(gout[:, offset:offset + width])
            offset += width
        return grads, {}


LAYER_REGISTRY = {
    cls.kind: cls
    for cls in (Embedding, Conv1D, GlobalMaxPool1D, Flatten, Dense, Dropout,
                Concatenate)
}
