"""Compiled right-hand sides and Jacobians for the integrators.

Every field has the signature ``rhs(y, params, out)`` and every Jacobian
``jac(y, params, out_matrix)``; both write in place so the integration
kernels never allocate inside their step loop.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numba
import numpy as np

__all__ = [
    "VectorField",
    "truncated_rhs",
    "truncated_jac",
    "scaled_rhs",
    "scaled_jac",
    "linear_rhs",
    "linear_jac",
    "compile_field",
]

_jit = numba.njit(nogil=True, cache=True)


# params = [N!/0!, N!/1!, ..., N!/(N-1)!, N!, c_0, c_1, ..., c_d]
@_jit
def truncated_rhs(y, params, out):
    n = y.shape[0]
    x = y[0]
    d = params.shape[0] - 1
    fx = params[d]
    for k in range(d - 1, n, -1):
        fx = fx * x + params[k]
    acc = 0.0
    for j in range(n):
        acc += params[j] * y[j]
    for j in range(n - 1):
        out[j] = y[j + 1]
    out[n - 1] = params[n] * fx - acc


@_jit
def truncated_jac(y, params, out):
    n = y.shape[0]
    x = y[0]
    d = params.shape[0] - 1
    # f'(x) by Horner on k * c_k
    deg = d - n - 1
    dfx = 0.0
    for k in range(deg, 0, -1):
        dfx = dfx * x + k * params[n + 1 + k]
    for i in range(n):
        for j in range(n):
            out[i, j] = 0.0
    for i in range(n - 1):
        out[i, i + 1] = 1.0
    out[n - 1, 0] = params[n] * dfx - params[0]
    for j in range(1, n):
        out[n - 1, j] = -params[j]


# params = [nu, lambda]
@_jit
def scaled_rhs(y, params, out):
    out[0] = y[1]
    out[1] = y[2]
    out[2] = -y[2] - params[0] * y[1] + params[1] * y[0] - y[0] * y[0]


@_jit
def scaled_jac(y, params, out):
    for i in range(3):
        for j in range(3):
            out[i, j] = 0.0
    out[0, 1] = 1.0
    out[1, 2] = 1.0
    out[2, 0] = params[1] - 2.0 * y[0]
    out[2, 1] = -params[0]
    out[2, 2] = -1.0


# params = [m_0, ..., m_(N-1), v]: companion last row and inhomogeneous term
@_jit
def linear_rhs(y, params, out):
    n = y.shape[0]
    acc = params[n]
    for j in range(n):
        acc += params[j] * y[j]
    for j in range(n - 1):
        out[j] = y[j + 1]
    out[n - 1] = acc


@_jit
def linear_jac(y, params, out):
    n = y.shape[0]
    for i in range(n):
        for j in range(n):
            out[i, j] = 0.0
    for i in range(n - 1):
        out[i, i + 1] = 1.0
    for j in range(n):
        out[n - 1, j] = params[j]


def compile_field(fn):
    """Return ``fn`` as a numba dispatcher, jitting plain Python callables."""
    if isinstance(fn, numba.core.registry.CPUDispatcher):
        return fn
    return numba.njit(nogil=True)(fn)


@dataclass(frozen=True, eq=False)
class VectorField:
    """An autonomous field ``dy/dt = rhs(y)`` with its analytic Jacobian.

    ``rhs`` and ``jac`` must be numba-compilable in-place functions; plain
    Python functions are jitted on construction.
    """

    rhs: Any
    jac: Any
    params: np.ndarray
    dim: int
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "rhs", compile_field(self.rhs))
        if self.jac is not None:
            object.__setattr__(self, "jac", compile_field(self.jac))
        object.__setattr__(self, "params", np.ascontiguousarray(self.params, dtype=np.float64))

    def __call__(self, y) -> np.ndarray:
        y = np.ascontiguousarray(y, dtype=np.float64)
        out = np.empty(self.dim)
        with np.errstate(over="ignore", invalid="ignore"):
            self.rhs(y, self.params, out)
        return out

    def jacobian(self, y) -> np.ndarray:
        if self.jac is None:
            raise ValueError(f"field {self.name!r} has no Jacobian")
        y = np.ascontiguousarray(y, dtype=np.float64)
        out = np.empty((self.dim, self.dim))
        self.jac(y, self.params, out)
        return out
