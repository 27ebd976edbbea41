"""Continuous-time truncations of a one-dimensional map.

The map ``x_{n+1} = f(x_n)`` is written as ``exp(d/dt) x(t) = f(x(t))`` and
the exponential is cut after the ``N``-th derivative::

    sum_{j=0}^{N} x^(j)(t) / j! = f(x(t)).

As a first-order system the state is ``xi = (x, x', ..., x^(N-1))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .fields import (
    VectorField,
    linear_jac,
    linear_rhs,
    scaled_jac,
    scaled_rhs,
    truncated_jac,
    truncated_rhs,
)
from .maps import MapSpec, deriv, eval_map

__all__ = [
    "TruncatedSystem",
    "LinearizedSystem",
    "ScaledCubic",
    "truncate",
    "vector_field",
    "jacobian",
    "linearize",
    "to_scaled",
    "scaled_vector_field",
    "scaled_from_unscaled",
    "unscaled_from_scaled",
]

MAX_ORDER = 20


@dataclass(frozen=True)
class TruncatedSystem:
    map: MapSpec
    order: int
    taylor_coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if self.order < 1:
            raise DomainError("truncation order must be >= 1")
        if len(self.taylor_coeffs) != self.order + 1:
            raise DomainError("taylor_coeffs must have order+1 entries")

    def integer_coeffs(self) -> tuple[int, ...]:
        """``N!/j!`` for ``j = N, N-1, ..., 0`` (highest derivative first)."""
        nf = math.factorial(self.order)
        return tuple(int(nf * c) for c in reversed(self.taylor_coeffs))

    def params(self) -> np.ndarray:
        nf = math.factorial(self.order)
        weights = [float(nf // math.factorial(j)) for j in range(self.order)]
        return np.array(weights + [float(nf)] + list(self.map.coeffs), dtype=np.float64)

    def field(self) -> VectorField:
        return VectorField(
            truncated_rhs,
            truncated_jac,
            self.params(),
            self.order,
            name=f"truncation N={self.order} of {self.map.spec_string()}",
        )

    def describe(self) -> str:
        terms = []
        for j, c in zip(range(self.order, -1, -1), self.integer_coeffs()):
            if j == 0:
                terms.append(f"{c}*(x - f(x))")
            elif j == 1:
                terms.append(f"{c}*dx/dt")
            else:
                terms.append(f"{c}*d^{j}x/dt^{j}")
        return " + ".join(terms) + " = 0"


def truncate(m: MapSpec, order: int) -> TruncatedSystem:
    if int(order) != order or order < 1:
        raise DomainError(f"truncation order must be an integer >= 1 (N = 0 is algebraic), got {order}")
    if order > MAX_ORDER:
        raise DomainError(f"orders above {MAX_ORDER} lose exact factorial weights in float64")
    order = int(order)
    return TruncatedSystem(m, order, tuple(Fraction(1, math.factorial(j)) for j in range(order + 1)))


def vector_field(s: TruncatedSystem, state) -> np.ndarray:
    """``(xi_2, ..., xi_N, N! [f(xi_1) - sum_{j<N} xi_{j+1}/j!])``.

    Overflow yields non-finite components instead of raising; integrators
    treat that as divergence.
    """
    state = np.asarray(state, dtype=np.float64)
    if state.shape != (s.order,):
        raise DomainError(f"state must have length {s.order}")
    if not np.all(np.isfinite(state)):
        raise DomainError("state must be finite")
    return s.field()(state)


def jacobian(s: TruncatedSystem, state) -> np.ndarray:
    return s.field().jacobian(np.asarray(state, dtype=np.float64))


@dataclass(frozen=True)
class LinearizedSystem:
    """``d xi/dt = M xi + v`` about a reference point ``x*``.

    ``companion`` has ones on the superdiagonal and last row
    ``-N! alpha, -N!/1!, ..., -N!/(N-1)!``; ``inhomogeneous`` is zero except
    for ``N! beta`` in the last slot.
    """

    alpha: float
    beta: float
    ref_point: float
    order: int
    companion: np.ndarray
    inhomogeneous: np.ndarray

    def field(self) -> VectorField:
        params = np.concatenate([self.companion[-1], [self.inhomogeneous[-1]]])
        return VectorField(linear_rhs, linear_jac, params, self.order, name="linearized")


def companion_matrix(order: int, alpha: float) -> np.ndarray:
    nf = math.factorial(order)
    m = np.zeros((order, order))
    m[np.arange(order - 1), np.arange(1, order)] = 1.0
    m[-1, 0] = -nf * alpha
    for k in range(1, order):
        m[-1, k] = -float(nf // math.factorial(k))
    return m


def linear_system(order: int, alpha: float, beta: float = 0.0, ref_point: float = float("nan")) -> LinearizedSystem:
    """Build the linear system directly from ``(N, alpha, beta)``."""
    v = np.zeros(order)
    v[-1] = math.factorial(order) * beta
    return LinearizedSystem(float(alpha), float(beta), ref_point, order, companion_matrix(order, alpha), v)


def linearize(s: TruncatedSystem, x_star: float) -> LinearizedSystem:
    if not math.isfinite(x_star):
        raise DomainError("reference point must be finite")
    alpha = 1.0 - float(deriv(s.map, x_star))
    beta = float(eval_map(s.map, x_star)) - x_star
    return linear_system(s.order, alpha, beta, float(x_star))


@dataclass(frozen=True)
class ScaledCubic:
    """``X''' + X'' + nu X' - lambda X + X^2 = 0`` (derivatives in tau)."""

    nu: float
    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.nu) and math.isfinite(self.lam)):
            raise DomainError("nu and lambda must be finite")

    def field(self) -> VectorField:
        return VectorField(
            scaled_rhs, scaled_jac, np.array([self.nu, self.lam]), 3,
            name=f"scaled cubic nu={self.nu!r} lambda={self.lam!r}",
        )

    def equilibria(self) -> tuple[float, float]:
        return (0.0, self.lam)


def to_scaled(p: float) -> ScaledCubic:
    """Scaled parameters of the cubic truncation of ``p x (1 - x)``."""
    if not math.isfinite(p):
        raise DomainError("p must be finite")
    return ScaledCubic(2.0 / 3.0, 2.0 * (p - 1.0) / 9.0)


def scaled_vector_field(c: ScaledCubic, state) -> np.ndarray:
    state = np.asarray(state, dtype=np.float64)
    if state.shape != (3,) or not np.all(np.isfinite(state)):
        raise DomainError("state must be a finite 3-vector")
    return c.field()(state)


# X = (2p/9) x and tau = 3 t, hence d^k X / d tau^k = (2p/9) 3^-k d^k x / dt^k.
def scaled_from_unscaled(x_state, p: float) -> np.ndarray:
    if p == 0:
        raise DomainError("p = 0 has no scaled form")
    x_state = np.asarray(x_state, dtype=np.float64)
    return (2.0 * p / 9.0) * x_state / 3.0 ** np.arange(x_state.shape[-1])


def unscaled_from_scaled(X_state, p: float) -> np.ndarray:
    if p == 0:
        raise DomainError("p = 0 has no scaled form")
    X_state = np.asarray(X_state, dtype=np.float64)
    return X_state * 3.0 ** np.arange(X_state.shape[-1]) / (2.0 * p / 9.0)
