"""Dense float64 tensors with reverse-mode automatic differentiation.

Values are numpy arrays evaluated eagerly; every differentiable operation
records a backward closure, so ``backward()`` on a scalar loss fills
``.grad`` on each reachable tensor that has ``requires_grad=True``.
Gradients accumulate across backward calls until ``zero_grad()``.

The operation set is the closure needed by the encoder, the task heads and
their losses: matmul, add/mul (with bias-style broadcasting), GELU (the one
nonlinearity used everywhere), sigmoid, softmax, log-softmax, logsumexp,
log, sum/mean, transpose, reshape, indexing, concat, embedding lookup,
layer norm and seeded train-only dropout.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from typing import Iterable, Sequence

import numpy as np
from scipy.special import erf

from .errors import ContractError, ShapeError

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)

_grad_enabled = True


@contextmanager
def no_grad():
    """Disable graph recording, e.g. for teacher forwards and decoding."""
    global _grad_enabled
    prev, _grad_enabled = _grad_enabled, False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._backward = None
        self._parents: tuple[Tensor, ...] = ()

    # -- basic introspection ------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def zero_grad(self) -> None:
        self.grad = None

    def _accum(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _wrap(other)
        out = _node(self.data + other.data, (self, other))
        if out._parents:
            def backward(g, a=self, b=other, out_shape=out.data.shape):
                if a.requires_grad:
                    a._accum(_unbroadcast(g, a.data.shape))
                if b.requires_grad:
                    b._accum(_unbroadcast(g, b.data.shape))
            out._backward = backward
        return out

    __radd__ = __add__

    def __mul__(self, other):
        other = _wrap(other)
        out = _node(self.data * other.data, (self, other))
        if out._parents:
            a_data, b_data = self.data, other.data
            def backward(g, a=self, b=other):
                if a.requires_grad:
                    a._accum(_unbroadcast(g * b_data, a.data.shape))
                if b.requires_grad:
                    b._accum(_unbroadcast(g * a_data, b.data.shape))
            out._backward = backward
        return out

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-_wrap(other))

    def __rsub__(self, other):
        return _wrap(other) + (-self)

    def __truediv__(self, scalar):
        if isinstance(scalar, Tensor):
            raise ContractError("tensor/tensor division is not supported; divide by a python scalar")
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        if not isinstance(other, Tensor):
            raise ContractError("matmul requires a Tensor operand")
        if self.data.ndim != 2 or other.data.ndim != 2:
            raise ShapeError(f"matmul needs 2-d operands, got {self.data.shape} and {other.data.shape}")
        if self.data.shape[1] != other.data.shape[0]:
            raise ShapeError(f"matmul inner dimensions disagree: {self.data.shape} x {other.data.shape}")
        out = _node(self.data @ other.data, (self, other))
        if out._parents:
            a_data, b_data = self.data, other.data
            def backward(g, a=self, b=other):
                if a.requires_grad:
                    a._accum(g @ b_data.T)
                if b.requires_grad:
                    b._accum(a_data.T @ g)
            out._backward = backward
        return out

    # -- shape manipulation ---------------------------------------------------

    @property
    def T(self) -> "Tensor":
        out = _node(self.data.T.copy(), (self,))
        if out._parents:
            def backward(g, a=self):
                a._accum(g.T)
            out._backward = backward
        return out

    def reshape(self, *shape) -> "Tensor":
        out = _node(self.data.reshape(*shape), (self,))
        if out._parents:
            orig = self.data.shape
            def backward(g, a=self):
                a._accum(g.reshape(orig))
            out._backward = backward
        return out

    def __getitem__(self, key) -> "Tensor":
        out = _node(np.array(self.data[key], dtype=np.float64), (self,))
        if out._parents:
            def backward(g, a=self, k=key):
                if a.grad is None:
                    a.grad = np.zeros_like(a.data)
                np.add.at(a.grad, k, g)
            out._backward = backward
        return out

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        out = _node(self.data.sum(axis=axis, keepdims=keepdims), (self,))
        if out._parents:
            shape = self.data.shape
            def backward(g, a=self):
                gg = g if keepdims or axis is None else np.expand_dims(g, axis)
                a._accum(np.broadcast_to(gg, shape).copy())
            out._backward = backward
        return out

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        n = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    # -- nonlinearities -------------------------------------------------------

    def gelu(self) -> "Tensor":
        x = self.data
        cdf = 0.5 * (1.0 + erf(x * _INV_SQRT2))
        out = _node(x * cdf, (self,))
        if out._parents:
            def backward(g, a=self):
                pdf = np.exp(-0.5 * x * x) * _INV_SQRT2PI
                a._accum(g * (cdf + x * pdf))
            out._backward = backward
        return out

    def sigmoid(self) -> "Tensor":
        s = 1.0 / (1.0 + np.exp(-self.data))
        out = _node(s, (self,))
        if out._parents:
            def backward(g, a=self):
                a._accum(g * s * (1.0 - s))
            out._backward = backward
        return out

    def softplus(self) -> "Tensor":
        out = _node(np.logaddexp(0.0, self.data), (self,))
        if out._parents:
            x = self.data
            def backward(g, a=self):
                a._accum(g / (1.0 + np.exp(-x)))
            out._backward = backward
        return out

    def log(self) -> "Tensor":
        out = _node(np.log(self.data), (self,))
        if out._parents:
            x = self.data
            def backward(g, a=self):
                a._accum(g / x)
            out._backward = backward
        return out

    def softmax(self, axis: int = -1) -> "Tensor":
        x = self.data
        e = np.exp(x - x.max(axis=axis, keepdims=True))
        p = e / e.sum(axis=axis, keepdims=True)
        out = _node(p, (self,))
        if out._parents:
            def backward(g, a=self):
                a._accum(p * (g - (g * p).sum(axis=axis, keepdims=True)))
            out._backward = backward
        return out

    def log_softmax(self, axis: int = -1) -> "Tensor":
        x = self.data
        m = x.max(axis=axis, keepdims=True)
        lse = m + np.log(np.exp(x - m).sum(axis=axis, keepdims=True))
        out = _node(x - lse, (self,))
        if out._parents:
            logp = out.data
            def backward(g, a=self):
                a._accum(g - np.exp(logp) * g.sum(axis=axis, keepdims=True))
            out._backward = backward
        return out

    def logsumexp(self, axis: int = -1, keepdims: bool = False) -> "Tensor":
        x = self.data
        if x.shape[axis] < 1:
            raise ContractError("logsumexp needs at least one element along the reduced axis")
        m = x.max(axis=axis, keepdims=True)
        lse = m + np.log(np.exp(x - m).sum(axis=axis, keepdims=True))
        out = _node(lse if keepdims else lse.reshape(_drop_axis(x.shape, axis)), (self,))
        if out._parents:
            def backward(g, a=self):
                gg = g if keepdims else np.expand_dims(g, axis)
                a._accum(np.exp(x - lse) * gg)
            out._backward = backward
        return out

    # -- backward pass --------------------------------------------------------

    def backward(self) -> None:
        """Reverse-mode pass from a scalar loss.

        Gradients accumulate on leaves (parameters, inputs) across calls;
        interior-node grads are scratch and reset on every pass.
        """
        if self.data.size != 1:
            raise ContractError(f"backward requires a scalar loss, got shape {self.data.shape}")
        order = _toposort(self)
        for node in order:
            if node._backward is not None:
                node.grad = None
        self._accum(np.ones_like(self.data))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def _node(data: np.ndarray, inputs: tuple[Tensor, ...]) -> Tensor:
    out = Tensor(data)
    if _grad_enabled:
        parents = tuple(p for p in inputs if p.requires_grad)
        if parents:
            out.requires_grad = True
            out._parents = parents
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce a broadcast gradient back to the operand's shape."""
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, s in enumerate(shape):
        if s == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


def _drop_axis(shape: tuple[int, ...], axis: int) -> tuple[int, ...]:
    axis = axis % len(shape)
    return shape[:axis] + shape[axis + 1:]


def _toposort(root: Tensor) -> list[Tensor]:
    # Iterative DFS; CRF chains can exceed the recursion limit.
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
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
            if id(parent) not in seen:
                stack.append((parent, False))
    return order


# -- module-level operations ----------------------------------------------


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise ContractError("concat needs at least one tensor")
    out = _node(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors))
    if out._parents:
        sizes = [t.data.shape[axis] for t in tensors]
        offsets = np.cumsum([0] + sizes)
        def backward(g, ts=tuple(tensors)):
            for t, lo, hi in zip(ts, offsets[:-1], offsets[1:]):
                if t.requires_grad:
                    idx = [slice(None)] * g.ndim
                    idx[axis] = slice(lo, hi)
                    t._accum(g[tuple(idx)])
        out._backward = backward
    return out


def embedding(weight: Tensor, ids: Sequence[int]) -> Tensor:
    """Row lookup into an embedding matrix, differentiable w.r.t. the matrix."""
    idx = np.asarray(ids, dtype=np.intp)
    if idx.size and (idx.min() < 0 or idx.max() >= weight.data.shape[0]):
        raise ContractError(f"embedding id out of range for table of {weight.data.shape[0]} rows")
    out = _node(weight.data[idx], (weight,))
    if out._parents:
        def backward(g, w=weight):
            if w.grad is None:
                w.grad = np.zeros_like(w.data)
            np.add.at(w.grad, idx, g)
        out._backward = backward
    return out


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then scale and shift."""
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out = _node(xhat * gain.data + bias.data, (x, gain, bias))
    if out._parents:
        g_data = gain.data
        def backward(g, a=x, gn=gain, b=bias):
            if gn.requires_grad:
                gn._accum((g * xhat).reshape(-1, xhat.shape[-1]).sum(axis=0))
            if b.requires_grad:
                b._accum(g.reshape(-1, xhat.shape[-1]).sum(axis=0))
            if a.requires_grad:
                dxhat = g * g_data
                m1 = dxhat.mean(axis=-1, keepdims=True)
                m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
                a._accum(inv * (dxhat - m1 - xhat * m2))
        out._backward = backward
    return out


def dropout(x: Tensor, p: float, rng: np.random.Generator, training: bool) -> Tensor:
    """Inverted dropout; identity when not training or p == 0."""
    if not training or p <= 0.0:
        return x
    mask = (rng.random(x.data.shape) >= p) / (1.0 - p)
    return x * Tensor(mask)


def stack_rows(rows: Sequence[Tensor]) -> Tensor:
    """Stack 1-d tensors (or 1xK rows) into a 2-d matrix."""
    return concat([r.reshape(1, -1) for r in rows], axis=0)


# -- parameter helpers ------------------------------------------------------


def parameter(data: np.ndarray) -> Tensor:
    return Tensor(data, requires_grad=True)


def zeros(*shape: int) -> Tensor:
    return parameter(np.zeros(shape))


def ones(*shape: int) -> Tensor:
    return parameter(np.ones(shape))


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> Tensor:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return parameter(rng.uniform(-bound, bound, size=(fan_in, fan_out)))


def normal(rng: np.random.Generator, shape: tuple[int, ...], std: float = 0.02) -> Tensor:
    return parameter(rng.normal(0.0, std, size=shape))


def zero_grads(params: Iterable[Tensor]) -> None:
    for p in params:
        p.zero_grad()
