"""Closed-form solution of the linearised truncation ``xi' = M xi + v``.

With ``M = S D S^-1`` and ``v`` constant in time,

    xi(t) = S e^{Dt} S^-1 xi0 + S diag((e^{mu_k t} - 1)/mu_k) S^-1 v.

:func:`propagate_series` evaluates the same quantity through the
exponential of the augmented matrix ``[[M, v], [0, 0]]`` and works for any
spectrum; it is the fallback for repeated eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .embedding import LinearizedSystem
from .errors import DegenerateSpectrum, DomainError

__all__ = ["EigenSolution", "eigendecompose", "propagate_closed", "propagate_series", "propagate"]

DEGENERACY_GAP = 1e-8
ZERO_EIGENVALUE = 1e-10


@dataclass(frozen=True)
class EigenSolution:
    eigenvalues: np.ndarray
    similarity: np.ndarray
    s_inverse: np.ndarray
    condition: float


def _vandermonde(mu: np.ndarray) -> np.ndarray:
    n = mu.size
    S = mu[np.newaxis, :] ** np.arange(n)[:, np.newaxis]
    return S / np.max(np.abs(S), axis=0)


def eigendecompose(ls: LinearizedSystem) -> EigenSolution:
    """Diagonalise the companion matrix.

    Eigenvalues come from a general eigensolver; the eigenvector of a
    companion matrix for ``mu`` is the Vandermonde column
    ``(1, mu, ..., mu^(N-1))``, scaled here to unit max-norm.

    Raises
    ------
    DegenerateSpectrum
        If two eigenvalues lie within ``1e-8`` of each other.
    """
    mu = np.linalg.eigvals(ls.companion).astype(complex)
    gaps = np.abs(mu[:, None] - mu[None, :])
    np.fill_diagonal(gaps, np.inf)
    if mu.size > 1 and np.min(gaps) < DEGENERACY_GAP:
        raise DegenerateSpectrum(
            "repeated eigenvalue; use propagate_series", residuals=mu
        )
    S = _vandermonde(mu)
    S_inv = np.linalg.inv(S)
    return EigenSolution(mu, S, S_inv, float(np.linalg.cond(S)))


def _phi(mu: np.ndarray, t: float) -> np.ndarray:
    """(e^{mu t} - 1)/mu, continued through mu = 0."""
    small = np.abs(mu) < ZERO_EIGENVALUE
    safe = np.where(small, 1.0, mu)
    out = np.expm1(mu * t) / safe
    return np.where(small, t + mu * t * t / 2.0, out)


def _check(ls: LinearizedSystem, xi0, t) -> np.ndarray:
    xi0 = np.asarray(xi0, dtype=float)
    if xi0.shape != (ls.order,):
        raise DomainError(f"xi0 must have length {ls.order}")
    if not t >= 0:
        raise DomainError("t must be >= 0")
    return xi0


def propagate_closed(ls: LinearizedSystem, xi0, t: float, eig: EigenSolution | None = None) -> np.ndarray:
    xi0 = _check(ls, xi0, t)
    if t == 0:
        return xi0.copy()
    eig = eig or eigendecompose(ls)
    mu, S, S_inv = eig.eigenvalues, eig.similarity, eig.s_inverse
    hom = S @ (np.exp(mu * t) * (S_inv @ xi0))
    inh = S @ (_phi(mu, t) * (S_inv @ ls.inhomogeneous))
    return np.real(hom + inh)


def propagate_series(ls: LinearizedSystem, xi0, t: float) -> np.ndarray:
    xi0 = _check(ls, xi0, t)
    if t == 0:
        return xi0.copy()
    n = ls.order
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = ls.companion
    A[:n, n] = ls.inhomogeneous
    E = scipy.linalg.expm(A * t)
    return E[:n, :n] @ xi0 + E[:n, n]


def propagate(ls: LinearizedSystem, xi0, t: float) -> np.ndarray:
    """Closed form when the spectrum is simple, augmented exponential otherwise."""
    try:
        return propagate_closed(ls, xi0, t)
    except DegenerateSpectrum:
        return propagate_series(ls, xi0, t)
