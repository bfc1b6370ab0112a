# -*- coding: utf-8 -*-
"""
最小反向自动微分

Tensor 包装一个 float64 的 numpy 数组，记录前向计算图 (_prev / _backward)，
backward() 按拓扑逆序把梯度写回所有 requires_grad 的叶子节点。
"""
from typing import Callable, Iterable, Optional, Tuple, Union

import numpy as np

from app.errors import UsageError

ArrayLike = Union[np.ndarray, float, int, "Tensor"]


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """把广播后的梯度求和还原到原始形状"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """带梯度槽的数组节点"""

    # ndarray 与 Tensor 混合运算时交给 Tensor 的反向运算符
    __array_ufunc__ = None

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        _prev: Tuple["Tensor", ...] = (),
        _op: str = "",
    ):
        if isinstance(data, Tensor):
            data = data.data
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = np.zeros_like(self.data) if requires_grad else None
        self._prev = _prev
        self._op = _op
        self._backward: Callable[[], None] = lambda: None

    # ─── 基础属性 ───

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self._op or 'leaf'}, requires_grad={self.requires_grad})"

    # ─── 图构造 ───

    @staticmethod
    def _wrap(value: ArrayLike) -> "Tensor":
        return value if isinstance(value, Tensor) else Tensor(value)

    @staticmethod
    def _make(data: np.ndarray, parents: Iterable["Tensor"], op: str) -> "Tensor":
        parents = tuple(parents)
        return Tensor(data, requires_grad=any(p.requires_grad for p in parents), _prev=parents, _op=op)

    @staticmethod
    def _accumulate(node: "Tensor", grad: np.ndarray):
        if not node.requires_grad:
            return
        if node.grad is None:
            node.grad = np.zeros_like(node.data)
        node.grad += _unbroadcast(np.asarray(grad, dtype=np.float64), node.data.shape)

    # ─── 算术 ───

    def __add__(self, other: ArrayLike) -> "Tensor":
        other = self._wrap(other)
        out = self._make(self.data + other.data, (self, other), "add")

        def _backward():
            self._accumulate(self, out.grad)
            self._accumulate(other, out.grad)

        out._backward = _backward
        return out

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return self + other

    def __neg__(self) -> "Tensor":
        out = self._make(-self.data, (self,), "neg")

        def _backward():
            self._accumulate(self, -out.grad)

        out._backward = _backward
        return out

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return self + (-self._wrap(other))

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return self._wrap(other) + (-self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        other = self._wrap(other)
        out = self._make(self.data * other.data, (self, other), "mul")

        def _backward():
            self._accumulate(self, out.grad * other.data)
            self._accumulate(other, out.grad * self.data)

        out._backward = _backward
        return out

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return self * other

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        other = self._wrap(other)
        out = self._make(self.data / other.data, (self, other), "div")

        def _backward():
            self._accumulate(self, out.grad / other.data)
            self._accumulate(other, -out.grad * self.data / (other.data ** 2))

        out._backward = _backward
        return out

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        return self._wrap(other) / self

    def __pow__(self, exponent: float) -> "Tensor":
        out = self._make(self.data ** exponent, (self,), "pow")

        def _backward():
            self._accumulate(self, out.grad * exponent * self.data ** (exponent - 1))

        out._backward = _backward
        return out

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        other = self._wrap(other)
        if self.ndim > 2 or other.ndim > 2:
            raise ValueError("matmul 只支持 1D / 2D 张量")
        out = self._make(self.data @ other.data, (self, other), "matmul")

        def _backward():
            g = out.grad
            a, b = self.data, other.data
            if a.ndim == 1 and b.ndim == 1:
                ga, gb = g * b, g * a
            elif a.ndim == 1:
                ga, gb = b @ g, np.outer(a, g)
            elif b.ndim == 1:
                ga, gb = np.outer(g, b), a.T @ g
            else:
                ga, gb = g @ b.T, a.T @ g
            self._accumulate(self, ga)
            self._accumulate(other, gb)

        out._backward = _backward
        return out

    @property
    def T(self) -> "Tensor":
        out = self._make(self.data.T, (self,), "transpose")

        def _backward():
            self._accumulate(self, out.grad.T)

        out._backward = _backward
        return out

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        out = self._make(self.data.reshape(shape), (self,), "reshape")

        def _backward():
            self._accumulate(self, out.grad.reshape(self.data.shape))

        out._backward = _backward
        return out

    # ─── 逐元素函数 ───

    def exp(self) -> "Tensor":
        out = self._make(np.exp(self.data), (self,), "exp")

        def _backward():
            self._accumulate(self, out.grad * out.data)

        out._backward = _backward
        return out

    def log(self) -> "Tensor":
        out = self._make(np.log(self.data), (self,), "log")

        def _backward():
            self._accumulate(self, out.grad / self.data)

        out._backward = _backward
        return out

    def tanh(self) -> "Tensor":
        out = self._make(np.tanh(self.data), (self,), "tanh")

        def _backward():
            self._accumulate(self, out.grad * (1.0 - out.data ** 2))

        out._backward = _backward
        return out

    def clip(self, low: float, high: float) -> "Tensor":
        """截断；梯度只在 low <= x <= high 处通过"""
        out = self._make(np.clip(self.data, low, high), (self,), "clip")

        def _backward():
            inside = (self.data >= low) & (self.data <= high)
            self._accumulate(self, out.grad * inside)

        out._backward = _backward
        return out

    def maximum(self, other: ArrayLike) -> "Tensor":
        other = self._wrap(other)
        out = self._make(np.maximum(self.data, other.data), (self, other), "maximum")

        def _backward():
            take_self = self.data >= other.data
            self._accumulate(self, out.grad * take_self)
            self._accumulate(other, out.grad * ~take_self)

        out._backward = _backward
        return out

    def minimum(self, other: ArrayLike) -> "Tensor":
        other = self._wrap(other)
        out = self._make(np.minimum(self.data, other.data), (self, other), "minimum")

        def _backward():
            take_self = self.data <= other.data
            self._accumulate(self, out.grad * take_self)
            self._accumulate(other, out.grad * ~take_self)

        out._backward = _backward
        return out

    # ─── 归约 ───

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        out = self._make(self.data.sum(axis=axis, keepdims=keepdims), (self,), "sum")

        def _backward():
            g = out.grad
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            self._accumulate(self, np.broadcast_to(g, self.data.shape))

        out._backward = _backward
        return out

    def mean(self, axis: Optional[int] = None) -> "Tensor":
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis) / float(count)

    def log_softmax(self, axis: int = -1) -> "Tensor":
        shifted = self.data - self.data.max(axis=axis, keepdims=True)
        lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
        out = self._make(shifted - lse, (self,), "log_softmax")

        def _backward():
            probs = np.exp(out.data)
            g = out.grad
            self._accumulate(self, g - probs * g.sum(axis=axis, keepdims=True))

        out._backward = _backward
        return out

    def pick(self, index) -> "Tensor":
        """按最后一维取元素: 2D 时 index 为每行的列号，1D 时为单个下标"""
        index = np.asarray(index, dtype=np.int64)
        if self.ndim == 1:
            rows = None
            data = self.data[index]
        else:
            rows = np.arange(self.data.shape[0])
            data = self.data[rows, index]
        out = self._make(data, (self,), "pick")

        def _backward():
            grad = np.zeros_like(self.data)
            if rows is None:
                np.add.at(grad, index, out.grad)
            else:
                np.add.at(grad, (rows, index), out.grad)
            self._accumulate(self, grad)

        out._backward = _backward
        return out

    # ─── 反向传播 ───

    def backward(self):
        """从标量节点反向传播，梯度累加到叶子节点的 .grad"""
        if not self._prev:
            raise UsageError("backward() 需要一个由前向计算得到的节点，当前节点是叶子")
        if not self.requires_grad:
            raise UsageError("backward() 的计算图中没有需要梯度的参数")
        if self.data.size != 1:
            raise UsageError(f"backward() 只接受标量，当前形状 {self.shape}")

        topo = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._prev:
                if id(parent) not in visited:
                    stack.append((parent, False))

        for node in topo:
            if node._prev and node.requires_grad:
                node.grad = np.zeros_like(node.data)
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node.requires_grad:
                node._backward()


def as_tensor(value: ArrayLike) -> Tensor:
    """常量包装 (不需要梯度)"""
    return Tensor._wrap(value)
