"""Electrostatic potentials used by the quantum and particle solvers."""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class Potential:
    """Dimensionless potential ``U(x)``.

    Variants: ``zero``, ``klein_step`` (``v0 * 1{x1 >= 0}``), ``linear``
    (``alpha * x1``) and ``custom`` (user callables for the value and the
    gradient, both acting on arrays of points of shape ``(..., 2)``).
    """

    kind: str
    v0: float = 0.0
    alpha: float = 0.0
    func: Optional[Callable] = None
    grad: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in ("zero", "klein_step", "linear", "custom"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "custom" and (self.func is None or self.grad is None):
            raise ValueError("custom potential needs both func and grad")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def klein_step(cls, v0):
        return cls("klein_step", v0=float(v0))

    @classmethod
    def linear(cls, alpha):
        return cls("linear", alpha=float(alpha))

    @classmethod
    def custom(cls, func, grad):
        return cls("custom", func=func, grad=grad)

    @property
    def has_gradient(self):
        return self.kind != "klein_step"

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros(x.shape[:-1])
        if self.kind == "klein_step":
            return np.where(x[..., 0] >= 0.0, self.v0, 0.0)
        if self.kind == "linear":
            return self.alpha * x[..., 0]
        return np.asarray(self.func(x), dtype=float)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros(x.shape)
        if self.kind == "klein_step":
            raise ValueError("the Klein step has no classical gradient; use it with the quantum solver only")
        if self.kind == "linear":
            g = np.zeros(x.shape)
            g[..., 0] = self.alpha
            return g
        return np.asarray(self.grad(x), dtype=float)

    def describe(self):
        if self.kind == "klein_step":
            return f"klein_step(v0={self.v0:g})"
        if self.kind == "linear":
            return f"linear(alpha={self.alpha:g})"
        return self.kind
