import contextlib
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disables graph recording (sampling, finite differences)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def grad_enabled() -> bool:
    return _grad_enabled


def _as_array(data, dtype=None) -> np.ndarray:
    arr = np.asarray(data, dtype=dtype)
    if arr.dtype.kind in "iub":
        arr = arr.astype(np.float64)
    return arr


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sums `grad` down to `shape` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """
    Array with reverse-mode gradient tracking.

    `_backward` receives the output gradient and returns one gradient
    (or None) per parent, in parent order.
    """

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        _parents: Sequence["Tensor"] = (),
        _backward: Optional[Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]] = None,
        name: Optional[str] = None,
    ):
        self.data = _as_array(data)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = bool(requires_grad)
        self._parents = tuple(_parents)
        self._backward = _backward
        self.name = name

    # ----------------- META -----------------
    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    def __len__(self) -> int:
        return self.data.shape[0]

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{flag})"

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    # ----------------- GRAPH -----------------
    @staticmethod
    def make(data, parents: Sequence["Tensor"], backward) -> "Tensor":
        if _grad_enabled and any(p.requires_grad for p in parents):
            return Tensor(data, requires_grad=True, _parents=parents, _backward=backward)
        return Tensor(data)

    def _topo(self):
        order, seen = [], set()
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
            for parent in reversed(node._parents):
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))
        return order

    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        if not self.requires_grad:
            raise RuntimeError("backward() on a tensor that does not require grad")
        if grad is None:
            if self.data.size != 1:
                raise RuntimeError("backward() without a gradient needs a scalar output")
            grad = np.ones_like(self.data)

        grads = {id(self): np.asarray(grad, dtype=self.data.dtype)}
        for node in reversed(self._topo()):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                pg = np.asarray(pg, dtype=parent.data.dtype)
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg

    # ----------------- OPERATORS -----------------
    def __add__(self, other):
        from src.numerics import ops
        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from src.numerics import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from src.numerics import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from src.numerics import ops
        return ops.mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        from src.numerics import ops
        return ops.div(self, other)

    def __rtruediv__(self, other):
        from src.numerics import ops
        return ops.div(other, self)

    def __neg__(self):
        from src.numerics import ops
        return ops.mul(self, -1.0)

    def __matmul__(self, other):
        from src.numerics import ops
        return ops.matmul(self, other)

    def __getitem__(self, idx):
        from src.numerics import ops
        return ops.index(self, idx)

    def sum(self, axis=None, keepdims: bool = False):
        from src.numerics import ops
        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False):
        from src.numerics import ops
        return ops.mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        from src.numerics import ops
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def swapaxes(self, a: int, b: int):
        from src.numerics import ops
        return ops.swapaxes(self, a, b)


class Parameter(Tensor):
    """Learnable leaf tensor."""

    def __init__(self, data, name: Optional[str] = None):
        super().__init__(data, requires_grad=True, name=name)


def as_tensor(value, dtype=None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(_as_array(value, dtype=dtype))
