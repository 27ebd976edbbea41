"""One-dimensional polynomial maps ``x -> f(x)``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, NumericError

__all__ = ["MapSpec", "Logistic", "Polynomial", "parse_map", "eval_map", "deriv", "fixed_points"]


@dataclass(frozen=True)
class MapSpec:
    """A polynomial map. ``coeffs`` are stored lowest degree first.

    ``kind`` and ``p`` only record how the map was built; every numerical
    routine works from ``coeffs`` so a logistic map and the equivalent
    polynomial give bit-identical results.
    """

    kind: str
    coeffs: tuple[float, ...]
    p: float | None = None

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise DomainError("polynomial map needs at least one coefficient")
        if self.coeffs[-1] == 0.0:
            raise DomainError("leading polynomial coefficient must be nonzero")
        if not all(math.isfinite(c) for c in self.coeffs):
            raise DomainError("map coefficients must be finite")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return eval_map(self, x)

    def spec_string(self) -> str:
        """Inverse of :func:`parse_map`."""
        if self.kind == "logistic":
            return f"logistic:{self.p!r}"
        return "poly:" + ",".join(repr(c) for c in self.coeffs)


def Logistic(p: float) -> MapSpec:
    """``f(x) = p x (1 - x)``."""
    p = float(p)
    if not math.isfinite(p) or p == 0.0:
        raise DomainError(f"logistic parameter must be finite and nonzero, got {p}")
    return MapSpec("logistic", (0.0, p, -p), p)


def Polynomial(coeffs: Sequence[float]) -> MapSpec:
    return MapSpec("polynomial", tuple(float(c) for c in coeffs))


def parse_map(text: str) -> MapSpec:
    """Parse ``logistic:<p>`` or ``poly:<c0>,<c1>,...``."""
    kind, sep, body = text.strip().partition(":")
    if not sep:
        raise DomainError(f"map spec {text!r} must look like 'logistic:<p>' or 'poly:<c0>,...'")
    try:
        if kind == "logistic":
            return Logistic(float(body))
        if kind == "poly":
            return Polynomial([float(c) for c in body.split(",")])
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"cannot parse numbers in map spec {text!r}") from exc
    raise DomainError(f"unknown map kind {kind!r}")


def _check_finite(x):
    if not np.all(np.isfinite(x)):
        raise DomainError("map argument must be finite")


def _horner(coeffs, x):
    acc = coeffs[-1] * np.ones_like(x) if isinstance(x, np.ndarray) else coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * x + c
    return acc


def eval_map(m: MapSpec, x):
    """Evaluate ``f(x)``; accepts scalars or arrays."""
    _check_finite(x)
    return _horner(m.coeffs, x)


def derivative_coeffs(coeffs: Sequence[float]) -> tuple[float, ...]:
    if len(coeffs) == 1:
        return (0.0,)
    return tuple(k * c for k, c in enumerate(coeffs) if k > 0)


def deriv(m: MapSpec, x):
    """Exact derivative ``f'(x)`` by term-by-term differentiation."""
    _check_finite(x)
    return _horner(derivative_coeffs(m.coeffs), x)


def fixed_points(m: MapSpec, imag_tol: float = 1e-9) -> list[float]:
    """All real solutions of ``f(x) = x``, ascending.

    Roots of ``f(x) - x`` come from the simultaneous-iteration root finder;
    nearly real ones are kept and Newton-polished until the residual is below
    ``1e-10``.
    """
    from .stability import poly_roots

    if m.degree < 1:
        raise DomainError("fixed points need a map of degree >= 1")
    g = list(m.coeffs)
    g[1] -= 1.0
    while len(g) > 1 and g[-1] == 0.0:
        g.pop()
    if len(g) == 1:
        if g[0] == 0.0:
            raise DomainError("degenerate: f(x)-x ≡ 0")
        return []

    candidates = poly_roots(g[::-1])
    dg = derivative_coeffs(g)
    out = []
    for r in candidates:
        if abs(r.imag) >= imag_tol:
            continue
        x = float(r.real)
        for _ in range(50):
            res = _horner(g, x)
            if abs(res) < 1e-14:
                break
            slope = _horner(dg, x)
            if slope == 0.0:
                break
            step = res / slope
            x -= step
            if abs(step) <= 1e-16 * max(1.0, abs(x)):
                break
        out.append(x)
    out.sort()
    residuals = [abs(eval_map(m, x) - x) for x in out]
    if any(r >= 1e-10 for r in residuals):
        raise NumericError("fixed-point polishing did not converge", residuals)
    return out
