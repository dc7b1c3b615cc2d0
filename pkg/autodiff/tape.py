"""
Define-by-run reverse-mode differentiation over dense 2-D float64 matrices.

A ``Tape`` records every primitive applied to one of its leaves. Values that
never touch a leaf are constants: operations on constants only compute and
record nothing. A tape belongs to one thread and one forward pass.

Usage:
    tape = Tape()
    w = tape.leaf(np.ones((2, 2)), name="w")
    loss = reduce_sum(elementwise(matmul(w, x), "sigmoid"))
    grads = tape.backward(loss)   # {w: dloss/dw}
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from utility.errors import ContractError, DimensionError


UNARY_FORMS = ("sigmoid", "tanh", "identity", "log", "clamp", "scale")
BINARY_FORMS = ("add", "sub", "mul", "div")


@dataclass(eq=False)
class ADValue:
    """A matrix value, optionally tracked by a tape."""

    value: np.ndarray
    tape: Optional["Tape"] = None
    name: Optional[str] = None

    @property
    def shape(self) -> Tuple[int, int]:
        return self.value.shape

    @property
    def rows(self) -> int:
        return self.value.shape[0]

    @property
    def cols(self) -> int:
        return self.value.shape[1]

    @property
    def is_tracked(self) -> bool:
        return self.tape is not None

    @property
    def T(self) -> "ADValue":
        return transpose(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __add__(self, other):
        return elementwise(self, "add", other)

    def __sub__(self, other):
        return elementwise(self, "sub", other)

    def __mul__(self, other):
        return elementwise(self, "mul", other)

    def __truediv__(self, other):
        return elementwise(self, "div", other)

    def item(self) -> float:
        if self.value.shape != (1, 1):
            raise ContractError(f"item() needs a 1x1 value, got {self.value.shape}")
        return float(self.value[0, 0])

    def __repr__(self):
        label = self.name or ("tracked" if self.is_tracked else "constant")
        return f"ADValue({label}, shape={self.value.shape})"


@dataclass
class Record:
    """One primitive on the tape: operands, output and the local adjoint rule."""

    op: str
    inputs: Tuple[ADValue, ...]
    output: ADValue
    backward: Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


@dataclass
class Tape:
    records: List[Record] = field(default_factory=list)
    leaves: List[ADValue] = field(default_factory=list)

    def leaf(self, value, name: Optional[str] = None) -> ADValue:
        """Register a differentiable input."""
        node = ADValue(as_matrix(value).copy(), tape=self, name=name)
        self.leaves.append(node)
        return node

    def record(self, op, inputs, value, backward) -> ADValue:
        output = ADValue(value, tape=self)
        self.records.append(Record(op, tuple(inputs), output, backward))
        return output

    def backward(self, root: ADValue) -> Dict[ADValue, np.ndarray]:
        """
        Gradient of a 1x1 root with respect to every leaf of this tape.

        Leaves the root does not depend on get a zero gradient. A leaf used
        along several paths accumulates the contributions of all of them.
        """
        if root.value.shape != (1, 1):
            raise ContractError(f"backward() needs a 1x1 root, got shape {root.value.shape}")
        if root.tape is not None and root.tape is not self:
            raise ContractError("root was recorded on a different tape")

        adjoints: Dict[int, np.ndarray] = {id(root): np.ones((1, 1))}
        for record in reversed(self.records):
            grad_out = adjoints.get(id(record.output))
            if grad_out is None:
                continue
            local = record.backward(grad_out)
            for operand, grad in zip(record.inputs, local):
                if grad is None or operand.tape is not self:
                    continue
                key = id(operand)
                if key in adjoints:
                    adjoints[key] = adjoints[key] + grad
                else:
                    adjoints[key] = grad

        return {
            node: adjoints.get(id(node), np.zeros_like(node.value))
            for node in self.leaves
        }


def as_matrix(value) -> np.ndarray:
    array = np.asarray(value, dtype=np.float64)
    if array.ndim == 0:
        array = array.reshape(1, 1)
    if array.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {array.shape}")
    return array


def constant(value, name: Optional[str] = None) -> ADValue:
    return ADValue(as_matrix(value), tape=None, name=name)


def as_ad(value) -> ADValue:
    if isinstance(value, ADValue):
        return value
    return constant(value)


def backward(root: ADValue) -> Dict[ADValue, np.ndarray]:
    if root.tape is None:
        if root.value.shape != (1, 1):
            raise ContractError(f"backward() needs a 1x1 root, got shape {root.value.shape}")
        return {}
    return root.tape.backward(root)


def _common_tape(*operands: ADValue) -> Optional[Tape]:
    tape = None
    for operand in operands:
        if operand.tape is None:
            continue
        if tape is None:
            tape = operand.tape
        elif operand.tape is not tape:
            raise ContractError("operands belong to different tapes")
    return tape


def emit(op, inputs, value, rule) -> ADValue:
    tape = _common_tape(*inputs)
    if tape is None:
        return ADValue(value)
    return tape.record(op, inputs, value, rule)


def stable_sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    positive = x >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-x[positive]))
    exp_x = np.exp(x[~positive])
    out[~positive] = exp_x / (1.0 + exp_x)
    return out


def matmul(a, b) -> ADValue:
    a, b = as_ad(a), as_ad(b)
    if a.cols != b.rows:
        raise DimensionError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    a_val, b_val = a.value, b.value
    value = a_val @ b_val

    def rule(grad):
        return grad @ b_val.T, a_val.T @ grad

    return emit("matmul", (a, b), value, rule)


def transpose(a) -> ADValue:
    a = as_ad(a)
    value = np.ascontiguousarray(a.value.T)
    return emit("transpose", (a,), value, lambda grad: (np.ascontiguousarray(grad.T),))


def elementwise(a, f: str, b=None, *, factor: float = 1.0,
                lo: float = 0.0, hi: float = 1.0) -> ADValue:
    """
    Entrywise primitive.

    Unary forms: sigmoid, tanh, identity, log, clamp (to [lo, hi]),
    scale (by ``factor``). Binary forms take ``b`` of the same shape:
    add, sub, mul, div.
    """
    a = as_ad(a)
    x = a.value

    if f in BINARY_FORMS:
        if b is None:
            raise ContractError(f"elementwise '{f}' needs a second operand")
        b = as_ad(b)
        if a.shape != b.shape:
            raise DimensionError(f"elementwise '{f}' shape mismatch: {a.shape} vs {b.shape}")
        y = b.value
        if f == "add":
            return emit(f, (a, b), x + y, lambda g: (g, g))
        if f == "sub":
            return emit(f, (a, b), x - y, lambda g: (g, -g))
        if f == "mul":
            return emit(f, (a, b), x * y, lambda g: (g * y, g * x))
        return emit(f, (a, b), x / y, lambda g: (g / y, -g * x / (y * y)))

    if f not in UNARY_FORMS:
        raise ContractError(f"unknown elementwise form '{f}'")
    if b is not None:
        raise ContractError(f"elementwise '{f}' is unary")

    if f == "sigmoid":
        s = stable_sigmoid(x)
        return emit(f, (a,), s, lambda g: (g * s * (1.0 - s),))
    if f == "tanh":
        t = np.tanh(x)
        return emit(f, (a,), t, lambda g: (g * (1.0 - t * t),))
    if f == "identity":
        return emit(f, (a,), x.copy(), lambda g: (g,))
    if f == "log":
        return emit(f, (a,), np.log(x), lambda g: (g / x,))
    if f == "clamp":
        inside = (x >= lo) & (x <= hi)
        return emit(f, (a,), np.clip(x, lo, hi), lambda g: (g * inside,))
    return emit(f, (a,), x * factor, lambda g: (g * factor,))


def reduce_sum(a, weights=None) -> ADValue:
    """1x1 sum of all entries, optionally weighted by a constant matrix."""
    a = as_ad(a)
    if weights is None:
        w = np.ones_like(a.value)
    else:
        w = as_matrix(weights)
        if w.shape != a.shape:
            raise DimensionError(f"reduce_sum weight shape {w.shape} does not match {a.shape}")
    value = np.array([[np.sum(w * a.value)]])
    return emit("reduce_sum", (a,), value, lambda g: (g[0, 0] * w,))
