"""Dense float64 tensors with reverse-mode automatic differentiation.

Every operation builds an implicit tape (a DAG of ``Tensor`` nodes holding
backward closures). ``backward`` walks the graph once in reverse topological
order and accumulates gradients additively into the leaves, so summing two
losses and back-propagating once equals two separate passes.
"""

import contextlib

import numpy as np

from . import kernels

_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad():
    """Disable tape construction inside the block (forward-only evaluation)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, dim in enumerate(shape):
        if dim == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_prev", "_op")

    def __init__(self, data, requires_grad=False, _prev=(), _op="leaf"):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = np.zeros_like(self.data) if self.requires_grad else None
        self._backward = None
        self._prev = _prev
        self._op = _op

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, op={self._op!r}, requires_grad={self.requires_grad})"

    def item(self):
        return float(self.data)

    def zero_grad(self):
        if self.grad is not None:
            self.grad[...] = 0.0

    # -- graph construction -------------------------------------------------

    @staticmethod
    def _make(data, parents, op, backward):
        requires = _GRAD_ENABLED and any(p.requires_grad for p in parents)
        if not requires:
            return Tensor(data)
        out = Tensor(data, requires_grad=True, _prev=tuple(parents), _op=op)
        out._backward = backward
        return out

    def backward(self):
        """Accumulate d(self)/d(leaf) into every reachable leaf gradient."""
        if self.data.size != 1:
            raise ValueError(
                f"backward requires a scalar loss, got shape {self.data.shape}"
            )
        if not self.requires_grad:
            return
        topo = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._prev:
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))
        # Interior nodes get a fresh buffer per pass; leaves keep accumulating.
        for node in topo:
            if node._prev:
                node.grad = np.zeros_like(node.data)
        self.grad = self.grad + np.ones_like(self.data) if not self._prev else np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None:
                node._backward()

    # -- arithmetic ----------------------------------------------------------

    @staticmethod
    def _wrap(x):
        return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))

    def __add__(self, other):
        other = Tensor._wrap(other)
        out_data = self.data + other.data
        def backward():
            if self.requires_grad:
                self.grad += _unbroadcast(out.grad, self.data.shape)
            if other.requires_grad:
                other.grad += _unbroadcast(out.grad, other.data.shape)
        out = Tensor._make(out_data, (self, other), "add", backward)
        return out

    __radd__ = __add__

    def __neg__(self):
        def backward():
            if self.requires_grad:
                self.grad -= out.grad
        out = Tensor._make(-self.data, (self,), "neg", backward)
        return out

    def __sub__(self, other):
        return self + (-Tensor._wrap(other))

    def __rsub__(self, other):
        return Tensor._wrap(other) + (-self)

    def __mul__(self, other):
        other = Tensor._wrap(other)
        out_data = self.data * other.data
        def backward():
            if self.requires_grad:
                self.grad += _unbroadcast(other.data * out.grad, self.data.shape)
            if other.requires_grad:
                other.grad += _unbroadcast(self.data * out.grad, other.data.shape)
        out = Tensor._make(out_data, (self, other), "mul", backward)
        return out

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, Tensor):
            raise TypeError("tensor/tensor division is not supported; multiply by a reciprocal")
        return self * (1.0 / float(scalar))

    def __matmul__(self, other):
        other = Tensor._wrap(other)
        a, b = self.data, other.data
        if a.ndim not in (1, 2) or b.ndim not in (1, 2):
            raise ValueError(f"matmul supports 1-D/2-D operands, got {a.shape} @ {b.shape}")
        if a.shape[-1] != b.shape[0]:
            raise ValueError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
        out_data = a @ b
        def backward():
            g = out.grad
            if self.requires_grad:
                if a.ndim == 2 and b.ndim == 2:
                    self.grad += g @ b.T
                elif a.ndim == 2:
                    self.grad += np.outer(g, b)
                elif b.ndim == 2:
                    self.grad += b @ g
                else:
                    self.grad += g * b
            if other.requires_grad:
                if a.ndim == 2 and b.ndim == 2:
                    other.grad += a.T @ g
                elif a.ndim == 2:
                    other.grad += a.T @ g
                elif b.ndim == 2:
                    other.grad += np.outer(a, g)
                else:
                    other.grad += g * a
        out = Tensor._make(out_data, (self, other), "matmul", backward)
        return out

    # -- elementwise nonlinearities -------------------------------------------

    def sigmoid(self):
        y = 1.0 / (1.0 + np.exp(-np.clip(self.data, -60.0, 60.0)))
        def backward():
            if self.requires_grad:
                self.grad += y * (1.0 - y) * out.grad
        out = Tensor._make(y, (self,), "sigmoid", backward)
        return out

    def tanh(self):
        y = np.tanh(self.data)
        def backward():
            if self.requires_grad:
                self.grad += (1.0 - y * y) * out.grad
        out = Tensor._make(y, (self,), "tanh", backward)
        return out

    def exp(self):
        y = np.exp(self.data)
        def backward():
            if self.requires_grad:
                self.grad += y * out.grad
        out = Tensor._make(y, (self,), "exp", backward)
        return out

    def log(self):
        def backward():
            if self.requires_grad:
                self.grad += out.grad / self.data
        out = Tensor._make(np.log(self.data), (self,), "log", backward)
        return out

    # -- shape manipulation ----------------------------------------------------

    def reshape(self, *shape):
        old = self.data.shape
        def backward():
            if self.requires_grad:
                self.grad += out.grad.reshape(old)
        out = Tensor._make(self.data.reshape(*shape), (self,), "reshape", backward)
        return out

    @property
    def T(self):
        if self.data.ndim != 2:
            raise ValueError(f"transpose expects a matrix, got shape {self.data.shape}")
        def backward():
            if self.requires_grad:
                self.grad += out.grad.T
        out = Tensor._make(self.data.T.copy(), (self,), "transpose", backward)
        return out

    def row(self, i):
        def backward():
            if self.requires_grad:
                self.grad[i] += out.grad
        out = Tensor._make(self.data[i].copy(), (self,), "row", backward)
        return out

    def pick(self, i):
        """Scalar element of a vector."""
        if self.data.ndim != 1:
            raise ValueError(f"pick expects a vector, got shape {self.data.shape}")
        def backward():
            if self.requires_grad:
                self.grad[i] += out.grad
        out = Tensor._make(self.data[i], (self,), "pick", backward)
        return out

    # -- reductions --------------------------------------------------------------

    def sum(self, axis=None):
        def backward():
            if self.requires_grad:
                if axis is None:
                    self.grad += out.grad
                else:
                    self.grad += np.expand_dims(out.grad, axis)
        out = Tensor._make(self.data.sum(axis=axis), (self,), "sum", backward)
        return out

    def mean(self):
        return self.sum() * (1.0 / self.data.size)

    def sumsq(self):
        """Sum of squared entries, the L2 penalty building block."""
        def backward():
            if self.requires_grad:
                self.grad += 2.0 * self.data * out.grad
        out = Tensor._make(np.float64(np.sum(self.data * self.data)), (self,), "sumsq", backward)
        return out


# -- n-ary and structured operations ------------------------------------------


def concat(tensors, axis=0):
    tensors = [Tensor._wrap(t) for t in tensors]
    if not tensors:
        raise ValueError("concat of an empty tensor list")
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)
    def backward():
        for t, a, b in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                idx = [slice(None)] * out_data.ndim
                idx[axis] = slice(a, b)
                t.grad += out.grad[tuple(idx)]
    out = Tensor._make(out_data, tensors, "concat", backward)
    return out


def stack_rows(tensors):
    """Stack equal-width vectors into a matrix, one row each."""
    tensors = [Tensor._wrap(t) for t in tensors]
    out_data = np.stack([t.data for t in tensors], axis=0)
    def backward():
        for i, t in enumerate(tensors):
            if t.requires_grad:
                t.grad += out.grad[i]
    out = Tensor._make(out_data, tensors, "stack", backward)
    return out


def take_rows(table, indices):
    """Differentiable row lookup (embedding gather)."""
    indices = np.asarray(indices, dtype=np.int64)
    def backward():
        if table.requires_grad:
            np.add.at(table.grad, indices, out.grad)
    out = Tensor._make(table.data[indices], (table,), "take_rows", backward)
    return out


def softmax(x, axis=-1):
    """Max-subtracted softmax along ``axis``; rows sum to 1 within 1e-12."""
    x = Tensor._wrap(x)
    if x.data.size == 0:
        raise ValueError("softmax of an empty vector")
    if not np.all(np.isfinite(x.data)):
        raise ValueError("softmax requires finite entries")
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)
    def backward():
        if x.requires_grad:
            g = out.grad
            x.grad += (g - (g * y).sum(axis=axis, keepdims=True)) * y
    out = Tensor._make(y, (x,), "softmax", backward)
    return out


def log_softmax(x):
    """Numerically stable log-softmax of a vector."""
    x = Tensor._wrap(x)
    if x.data.ndim != 1 or x.data.size == 0:
        raise ValueError(f"log_softmax expects a nonempty vector, got shape {x.data.shape}")
    shifted = x.data - x.data.max()
    ls = shifted - np.log(np.exp(shifted).sum())
    def backward():
        if x.requires_grad:
            g = out.grad
            x.grad += g - np.exp(ls) * g.sum()
    out = Tensor._make(ls, (x,), "log_softmax", backward)
    return out


def segment_max_pool(feature_map, boundaries):
    """Piecewise max over the three column segments split at ``boundaries``.

    ``feature_map`` has one row per filter; an empty segment pools to 0 (the
    sentinel-padding rule for entity mentions at sentence edges).
    """
    fm = Tensor._wrap(feature_map)
    if fm.data.ndim != 2:
        raise ValueError(f"segment_max_pool expects a matrix, got shape {fm.data.shape}")
    n_f, length = fm.data.shape
    cut1, cut2 = int(boundaries[0]), int(boundaries[1])
    if not (0 <= cut1 <= cut2 <= length):
        raise ValueError(
            f"segment boundaries ({cut1}, {cut2}) outside 0 <= cut1 <= cut2 <= {length}"
        )
    pooled, argmax = kernels.segment_pool_forward(np.ascontiguousarray(fm.data), cut1, cut2)
    def backward():
        if fm.requires_grad:
            fm.grad += kernels.segment_pool_backward(
                np.ascontiguousarray(out.grad), argmax, n_f, length
            )
    out = Tensor._make(pooled, (fm,), "segment_max_pool", backward)
    return out


def conv1d_same(x, w):
    """Same-length 1-D convolution of token features ``x`` with filters ``w``.

    ``x`` is (n_w, d_b), ``w`` is (n_f, n_s, d_b); output is (n_f, n_w).
    """
    x = Tensor._wrap(x)
    w = Tensor._wrap(w)
    if x.data.ndim != 2 or w.data.ndim != 3:
        raise ValueError(f"conv1d_same expects (n_w,d_b) and (n_f,n_s,d_b), got {x.data.shape} and {w.data.shape}")
    if x.data.shape[0] == 0:
        raise ValueError("conv1d_same on an empty sentence")
    if x.data.shape[1] != w.data.shape[2]:
        raise ValueError(f"channel mismatch: input {x.data.shape} vs filters {w.data.shape}")
    n_s = w.data.shape[1]
    left = (n_s - 1) // 2
    right = n_s - 1 - left
    xp = np.pad(x.data, ((left, right), (0, 0)))
    out_data = kernels.conv1d_forward(xp, np.ascontiguousarray(w.data))
    def backward():
        d_xp, d_w = kernels.conv1d_backward(
            xp, np.ascontiguousarray(w.data), np.ascontiguousarray(out.grad)
        )
        if x.requires_grad:
            x.grad += d_xp[left:left + x.data.shape[0]]
        if w.requires_grad:
            w.grad += d_w
    out = Tensor._make(out_data, (x, w), "conv1d", backward)
    return out


def lstm(x, w, u, b, h0, c0):
    """Full LSTM pass over ``x`` (T, d_in); returns all hidden states (T, H)."""
    parents = [Tensor._wrap(t) for t in (x, w, u, b, h0, c0)]
    x, w, u, b, h0, c0 = parents
    if x.data.ndim != 2:
        raise ValueError(f"lstm input must be (T, d_in), got shape {x.data.shape}")
    hidden = h0.data.shape[0]
    if w.data.shape != (x.data.shape[1], 4 * hidden):
        raise ValueError(f"lstm input weights {w.data.shape} incompatible with input {x.data.shape} and hidden {hidden}")
    args = [np.ascontiguousarray(t.data) for t in (x, w, u, b, h0, c0)]
    h, cache = kernels.lstm_forward(*args)
    def backward():
        grads = kernels.lstm_backward(
            args[0], args[1], args[2], args[4], args[5], h, cache,
            np.ascontiguousarray(out.grad),
        )
        for parent, g in zip((x, w, u, b, h0, c0), grads):
            if parent.requires_grad:
                parent.grad += g
    out = Tensor._make(h, parents, "lstm", backward)
    return out


def dropout(x, p, rng):
    """Inverted dropout with a tape-recorded mask; caller skips it in eval mode."""
    x = Tensor._wrap(x)
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must lie in [0, 1), got {p}")
    if p == 0.0:
        return x
    mask = (rng.random(x.data.shape) >= p) / (1.0 - p)
    def backward():
        if x.requires_grad:
            x.grad += mask * out.grad
    out = Tensor._make(x.data * mask, (x,), "dropout", backward)
    return out


def zero_grads(tensors):
    for t in tensors:
        t.zero_grad()


def finite_diff_check(f, params, eps=1e-5):
    """Max relative error between tape gradients of ``f()`` and central differences.

    ``f`` must be deterministic (evaluated twice to reject active dropout) and
    return a scalar Tensor depending on ``params``.
    """
    first = f()
    second = f()
    if float(first.data) != float(second.data):
        raise ValueError("finite_diff_check requires a deterministic map (is dropout active?)")
    zero_grads(params)
    out = f()
    out.backward()
    analytic = [p.grad.copy() for p in params]
    worst = 0.0
    for p, an in zip(params, analytic):
        flat = p.data.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            hi = float(f().data)
            flat[i] = orig - eps
            lo = float(f().data)
            flat[i] = orig
            num = (hi - lo) / (2.0 * eps)
            a = an.reshape(-1)[i]
            err = abs(a - num) / max(abs(a), abs(num), 1e-8)
            worst = max(worst, err)
    return worst
