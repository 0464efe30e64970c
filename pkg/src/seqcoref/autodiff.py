"""Minimal reverse-mode automatic differentiation over numpy arrays.

Every op in this module accepts plain ndarrays, Python floats, or Tensor
nodes.  When no argument is a Tensor the op returns a plain ndarray (fast
inference path); otherwise it returns a Tensor recording the backward
closure, so the same model code serves both prediction and training.

Tensors always carry float64 data.  Gradients accumulate on `.grad` after
calling `backward()` on a scalar output.
"""

import numpy as np


class Tensor:
    """A node in the reverse-mode computation graph."""

    __slots__ = ("data", "grad", "_parents", "_bwd")

    def __init__(self, data, parents=(), bwd=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self._parents = parents
        self._bwd = bwd

    @property
    def shape(self):
        return self.data.shape

    def backward(self):
        """Accumulate gradients of this scalar into every reachable Tensor."""
        if self.data.shape != ():
            raise ValueError("backward() requires a scalar output")
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
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones((), dtype=np.float64)
        for node in reversed(order):
            if node._bwd is None or node.grad is None:
                continue
            for parent, g in zip(node._parents, node._bwd(node.grad)):
                if g is None:
                    continue
                parent.grad = g if parent.grad is None else parent.grad + g

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"


def is_tensor(x):
    return isinstance(x, Tensor)


def value(x):
    """Underlying ndarray (or scalar) of x, whether or not it is a Tensor."""
    return x.data if isinstance(x, Tensor) else x


def _node(out, *pairs):
    """Build a Tensor from (arg, grad_fn) pairs, or return `out` raw.

    Only arguments that are Tensors become parents; their grad_fn receives
    the upstream gradient and returns the local contribution.
    """
    parents = tuple(a for a, _ in pairs if isinstance(a, Tensor))
    if not parents:
        return out
    fns = tuple(fn for a, fn in pairs if isinstance(a, Tensor))
    return Tensor(out, parents, lambda g: tuple(fn(g) for fn in fns))


# --- arithmetic -----------------------------------------------------------

def add(a, b):
    out = value(a) + value(b)
    return _node(out, (a, lambda g: g), (b, lambda g: g))


def sub(a, b):
    out = value(a) - value(b)
    return _node(out, (a, lambda g: g), (b, lambda g: -g))


def mul(a, b):
    av, bv = value(a), value(b)
    return _node(av * bv, (a, lambda g: g * bv), (b, lambda g: g * av))


def scale(x, c):
    """x * c for a Python scalar c."""
    return _node(value(x) * c, (x, lambda g: g * c))


def add_n(xs):
    """Sum of a non-empty list of same-shaped vectors."""
    out = value(xs[0])
    for x in xs[1:]:
        out = out + value(x)
    return _node(out, *((x, lambda g: g) for x in xs))


def mean_n(xs):
    return scale(add_n(xs), 1.0 / len(xs))


def matvec(w, x):
    """Matrix-vector product w @ x."""
    wv, xv = value(w), value(x)
    return _node(wv @ xv,
                 (w, lambda g: np.outer(g, xv)),
                 (x, lambda g: wv.T @ g))


def dot(a, b):
    av, bv = value(a), value(b)
    return _node(np.float64(av @ bv), (a, lambda g: g * bv), (b, lambda g: g * av))


# --- nonlinearities ---------------------------------------------------------

def tanh(x):
    out = np.tanh(value(x))
    return _node(out, (x, lambda g: g * (1.0 - out * out)))


def sigmoid(x):
    out = 1.0 / (1.0 + np.exp(-value(x)))
    return _node(out, (x, lambda g: g * out * (1.0 - out)))


def abs_(x):
    xv = value(x)
    return _node(np.abs(xv), (x, lambda g: g * np.sign(xv)))


# --- shape ops ---------------------------------------------------------------

def concat(parts):
    vals = [np.atleast_1d(value(p)) for p in parts]
    sizes = [v.shape[0] for v in vals]
    offs = np.concatenate([[0], np.cumsum(sizes)])
    pairs = []
    for i, p in enumerate(parts):
        lo, hi = offs[i], offs[i + 1]
        pairs.append((p, lambda g, lo=lo, hi=hi: g[lo:hi]))
    return _node(np.concatenate(vals), *pairs)


def slice_(x, lo, hi):
    xv = value(x)

    def bwd(g):
        full = np.zeros_like(xv)
        full[lo:hi] = g
        return full

    return _node(xv[lo:hi], (x, bwd))


def stack(scalars):
    """Stack 0-d scalars into a 1-d vector."""
    out = np.array([float(value(s)) for s in scalars], dtype=np.float64)
    pairs = [(s, lambda g, i=i: g[i]) for i, s in enumerate(scalars)]
    return _node(out, *pairs)


# --- fused numerical ops ------------------------------------------------------

def cosine(a, b):
    """Cosine similarity with the zero-norm convention cos(0, v) = 0.

    Fused so the gradient stays finite near (but not at) zero vectors; at an
    exactly-zero argument the value and gradient are both zero.
    """
    av, bv = value(a), value(b)
    na = float(np.linalg.norm(av))
    nb = float(np.linalg.norm(bv))
    if na == 0.0 or nb == 0.0:
        return _node(np.float64(0.0), (a, lambda g: np.zeros_like(av)),
                     (b, lambda g: np.zeros_like(bv)))
    c = float(av @ bv) / (na * nb)
    return _node(np.float64(c),
                 (a, lambda g: g * (bv / (na * nb) - c * av / (na * na))),
                 (b, lambda g: g * (av / (na * nb) - c * bv / (nb * nb))))


def softmax(z):
    """Plain-numpy softmax of a 1-d array (no graph); max-subtracted."""
    zv = np.asarray(value(z), dtype=np.float64)
    e = np.exp(zv - zv.max())
    return e / e.sum()


def nll(logits, index):
    """Negative log softmax probability of `index`; gradient is p - onehot."""
    zv = value(logits)
    m = zv.max()
    lse = m + np.log(np.exp(zv - m).sum())
    out = np.float64(lse - zv[index])

    def bwd(g):
        p = np.exp(zv - lse)
        p[index] -= 1.0
        return g * p

    return _node(out, (logits, bwd))
