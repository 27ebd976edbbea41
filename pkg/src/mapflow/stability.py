"""Routh-Hurwitz analysis of the characteristic polynomial of a truncation.

Perturbations ``c exp(mu t)`` about a reference point obey

    mu^N/N! + ... + mu^2/2! + mu + alpha = 0,

i.e. ``a_j = 1/(N-j)!`` for ``j < N`` and ``a_N = alpha``.  All Hurwitz
minors are computed in exact rational arithmetic; the coefficients span
factorially many decades, and floating determinants lose the sign of the
higher minors from ``N ~ 10`` on.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DomainError, NumericError

__all__ = [
    "CharPoly",
    "HurwitzReport",
    "Verdict",
    "to_rational",
    "char_poly",
    "hurwitz_matrix",
    "leading_minors",
    "hurwitz_sequence",
    "closed_form_u",
    "poly_roots",
    "roots",
    "stable_alpha_window",
]


class Verdict(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"


def to_rational(value, max_denominator: int | None = None) -> Fraction:
    """Convert ``value`` to a :class:`~fractions.Fraction`.

    Floats are converted through their exact binary expansion, so the
    verdict refers to the number actually used by the floating-point code.
    Strings such as ``"5/3"`` or ``"0.25"`` are parsed exactly.
    """
    if isinstance(value, bool):
        raise DomainError("boolean is not a valid rational")
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        raise DomainError(f"alpha must be finite, got {value}")
    try:
        q = Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot interpret {value!r} as a rational number") from exc
    if max_denominator is not None:
        q = q.limit_denominator(max_denominator)
    return q


@dataclass(frozen=True)
class CharPoly:
    """``a_0 mu^N + a_1 mu^(N-1) + ... + a_N`` with exact coefficients."""

    order: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.order + 1:
            raise DomainError("CharPoly needs exactly order+1 coefficients")
        if self.coeffs[0] <= 0:
            raise DomainError("leading coefficient a_0 must be positive")

    @property
    def alpha(self) -> Fraction:
        return self.coeffs[-1]

    def as_float(self) -> np.ndarray:
        """Coefficients as floats, highest power first (numpy.polyval order)."""
        return np.array([float(c) for c in self.coeffs])


def char_poly(order: int, alpha) -> CharPoly:
    if int(order) != order or order < 1:
        raise DomainError(f"truncation order must be an integer >= 1, got {order}")
    order = int(order)
    a = [Fraction(1, math.factorial(order - j)) for j in range(order)]
    a.append(to_rational(alpha))
    return CharPoly(order, tuple(a))


def hurwitz_matrix(cp: CharPoly) -> list[list[Fraction]]:
    """``H[i][j] = a_(2i-j)`` (1-based), with ``a_k = 0`` outside ``0..N``."""
    n = cp.order
    a = cp.coeffs

    def coef(k):
        return a[k] if 0 <= k <= n else Fraction(0)

    return [[coef(2 * i - j) for j in range(1, n + 1)] for i in range(1, n + 1)]


def _integer_matrix(mat: Sequence[Sequence[Fraction]]) -> tuple[list[list[int]], int]:
    den = 1
    for row in mat:
        for x in row:
            den = math.lcm(den, x.denominator)
    return [[int(x * den) for x in row] for row in mat], den


def _bareiss_det(m: list[list[int]]) -> int:
    """Exact determinant of an integer matrix (fraction-free elimination)."""
    m = [row[:] for row in m]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = pivot
    return sign * m[n - 1][n - 1]


def leading_minors(mat: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """Exact leading principal minors ``det(mat[:k, :k])`` for ``k = 1..n``.

    Without pivoting, the Bareiss pivots *are* the leading minors, so one
    elimination gives all of them.  If a zero pivot shows up the remaining
    minors are computed one by one with row pivoting.
    """
    im, den = _integer_matrix(mat)
    n = len(im)
    m = [row[:] for row in im]
    out: list[Fraction] = []
    prev = 1
    for k in range(n):
        pivot = m[k][k]
        if pivot == 0:
            for size in range(k + 1, n + 1):
                sub = [row[:size] for row in im[:size]]
                out.append(Fraction(_bareiss_det(sub), den**size))
            return out
        out.append(Fraction(pivot, den ** (k + 1)))
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = pivot
    return out


def _sign_flips(seq: Sequence[Fraction]) -> int:
    nz = [x for x in seq if x != 0]
    return sum(1 for x, y in zip(nz, nz[1:]) if (x > 0) != (y > 0))


@dataclass(frozen=True)
class HurwitzReport:
    """Outcome of the Routh-Hurwitz test.

    ``u_sequence`` holds ``U_0 = a_0`` followed by the leading Hurwitz minors
    ``U_1 .. U_N``.  ``sign_changes`` counts sign variations of Routh's first
    column ``U_0, U_1, U_2/U_1, ..., U_N/U_(N-1)``, which equals the number of
    roots with positive real part whenever no minor vanishes.  When some
    ``U_j`` is exactly zero that column is undefined and the verdict is
    Marginal; ``sign_changes`` then takes the common Routh count at
    ``alpha -/+ 2^-40`` when the two agree (no root on the imaginary axis),
    and falls back to ``raw_sign_changes`` otherwise.
    ``raw_sign_changes`` is the plain count of flips along ``U_0 .. U_N``
    (zeros dropped), kept for comparison.
    """

    char_poly: CharPoly
    u_sequence: tuple[Fraction, ...]
    sign_changes: int
    raw_sign_changes: int
    n_unstable_roots: int
    verdict: Verdict

    @property
    def regular(self) -> bool:
        return all(u != 0 for u in self.u_sequence)

    def to_dict(self) -> dict:
        return {
            "order": self.char_poly.order,
            "coeffs": [_fmt_q(c) for c in self.char_poly.coeffs],
            "u_sequence": [_fmt_q(u) for u in self.u_sequence],
            "sign_changes": self.sign_changes,
            "raw_sign_changes": self.raw_sign_changes,
            "n_unstable_roots": self.n_unstable_roots,
            "verdict": self.verdict.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HurwitzReport":
        coeffs = tuple(Fraction(c) for c in d["coeffs"])
        return cls(
            CharPoly(int(d["order"]), coeffs),
            tuple(Fraction(u) for u in d["u_sequence"]),
            int(d["sign_changes"]),
            int(d["raw_sign_changes"]),
            int(d["n_unstable_roots"]),
            Verdict(d["verdict"]),
        )


def _fmt_q(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def hurwitz_sequence(cp: CharPoly) -> HurwitzReport:
    minors = leading_minors(hurwitz_matrix(cp))
    u = (cp.coeffs[0], *minors)
    raw = _sign_flips(u)
    if all(x != 0 for x in u):
        changes = _routh_count(u)
        verdict = Verdict.STABLE if changes == 0 else Verdict.UNSTABLE
        return HurwitzReport(cp, u, changes, raw, changes, verdict)
    # Routh's column is undefined. If no root sits on the imaginary axis the
    # count is locally constant in alpha, so both one-sided neighbours agree
    # (the epsilon method); otherwise keep the raw flips and count
    # right-half-plane roots numerically.
    changes = _neighbour_count(cp)
    if changes is not None:
        unstable = changes
    else:
        changes = raw
        mu = roots(cp)
        scale = max(1.0, float(np.max(np.abs(mu))))
        unstable = int(np.sum(mu.real > 1e-9 * scale))
    return HurwitzReport(cp, u, changes, raw, unstable, Verdict.MARGINAL)


def _routh_count(u: Sequence[Fraction]) -> int:
    column = [u[0], u[1]] + [u[k] / u[k - 1] for k in range(2, len(u))]
    return _sign_flips(column)


def _neighbour_count(cp: CharPoly) -> int | None:
    for e in (40, 60, 80):
        counts = []
        for sign in (-1, 1):
            q = char_poly(cp.order, cp.alpha + sign * Fraction(1, 2**e))
            u = (q.coeffs[0], *leading_minors(hurwitz_matrix(q)))
            if any(x == 0 for x in u):
                break
            counts.append(_routh_count(u))
        if len(counts) == 2:
            return counts[0] if counts[0] == counts[1] else None
    return None


def closed_form_u(order: int, alpha) -> list[Fraction]:
    """Printed closed forms for the leading Hurwitz minors.

    ``N > 5`` gives ``U_0 .. U_3``; ``N = 5`` gives ``U_0 .. U_4``.  These
    are written out directly from the formulas and never touch the
    determinant code, so they serve as its oracle.
    """
    n = int(order)
    f = math.factorial
    if n > 5:
        return [
            Fraction(1, f(n)),
            Fraction(1, f(n - 1)),
            Fraction(2, f(n) * f(n - 2)),
            Fraction(-2 * (n - 5), f(n) * f(n - 1) * f(n - 3)),
        ]
    if n == 5:
        a = to_rational(alpha)
        return [
            Fraction(1, f(5)),
            Fraction(1, f(4)),
            Fraction(2, f(5) * f(3)),
            (a - 1) / (f(5) * f(4)),
            -((a - Fraction(5, 3)) ** 2 + Fraction(20, 9)) / f(5) ** 2,
        ]
    raise DomainError(f"no closed form for the Hurwitz minors at N = {n} (only N >= 5)")


def _pair_conjugates(z: np.ndarray, tol: float) -> np.ndarray:
    """Snap nearly-real roots to the real axis and make pairs exact conjugates."""
    z = z.copy()
    scale = np.maximum(1.0, np.abs(z))
    real = np.abs(z.imag) <= tol * scale
    z[real] = z[real].real
    upper = [k for k in range(z.size) if not real[k] and z[k].imag > 0]
    lower = [k for k in range(z.size) if not real[k] and z[k].imag < 0]
    used = set()
    out = [complex(z[k].real, 0.0) for k in range(z.size) if real[k]]
    for k in upper:
        cands = [j for j in lower if j not in used]
        if not cands:
            out.append(z[k])
            continue
        j = min(cands, key=lambda j: abs(z[j] - np.conj(z[k])))
        used.add(j)
        m = 0.5 * (z[k] + np.conj(z[j]))
        out.extend([m, np.conj(m)])
    out.extend(z[j] for j in lower if j not in used)
    out = np.array(out, dtype=complex)
    order = np.lexsort((-out.imag, out.real))
    return out[order]


def poly_roots(coeffs_high_first: Sequence[float], max_sweeps: int = 1000, tol: float = 1e-10) -> np.ndarray:
    """All roots of a real polynomial by Durand-Kerner (Weierstrass) iteration.

    Parameters
    ----------
    coeffs_high_first : sequence of float
        Polynomial coefficients, highest power first; the leading one must be
        nonzero.
    max_sweeps : int
        Sweep budget before :class:`NumericError` is raised.
    tol : float
        Required relative residual ``|p(z)| / sum_j |a_j| |z|^j``.

    Returns
    -------
    numpy.ndarray
        Complex roots, real ones first within equal real part, conjugate
        pairs adjacent (positive imaginary part first).
    """
    c = np.asarray(coeffs_high_first, dtype=float)
    if c.size < 2 or c[0] == 0.0:
        raise DomainError("polynomial must have degree >= 1 and a nonzero leading coefficient")
    monic = c / c[0]
    n = monic.size - 1
    if n == 1:
        return np.array([complex(-monic[1], 0.0)])
    absc = np.abs(monic)

    def rel_residual(z):
        num = np.abs(np.polyval(monic, z))
        den = np.polyval(absc, np.abs(z))
        return num / np.where(den > 0, den, 1.0)

    # Cauchy-type radius, with an off-axis rotation so no guess is real.
    radius = 1.0 + np.max(absc[1:])
    radius = min(radius, 2.0 * np.max(absc[1:] ** (1.0 / np.arange(1, n + 1))) + 1e-3)
    z = radius * np.exp(1j * (2.0 * np.pi * np.arange(n) / n + 0.4))
    for _ in range(max_sweeps):
        for k in range(n):
            diff = z[k] - np.delete(z, k)
            denom = np.prod(diff)
            if denom == 0:
                denom = 1e-300
            z[k] = z[k] - np.polyval(monic, z[k]) / denom
        if np.all(rel_residual(z) < tol * 1e-2):
            break
    res = rel_residual(z)
    if not np.all(res < tol):
        raise NumericError("Durand-Kerner iteration did not converge", res)
    out = _pair_conjugates(z, 1e-9)
    if not np.all(rel_residual(out) < tol):
        raise NumericError("conjugate pairing broke the residual bound", rel_residual(out))
    return out


def roots(cp: CharPoly, max_sweeps: int = 1000) -> np.ndarray:
    """Characteristic exponents ``mu`` of the linearised truncation."""
    return poly_roots(cp.as_float(), max_sweeps=max_sweeps)


def _is_stable(order: int, alpha: Fraction) -> bool:
    return hurwitz_sequence(char_poly(order, alpha)).verdict is Verdict.STABLE


def stable_alpha_window(order: int, lo: float = -100.0, hi: float = 100.0, resolution: float = 1e-9):
    """Maximal interval of ``alpha`` in ``[lo, hi]`` with a Stable verdict.

    Returns ``(left, right)`` as floats or ``None`` when no grid point is
    stable.  The endpoints are located by exact bisection; a window that
    runs into the search range is clipped there.
    """
    if not 1 <= order <= 8:
        raise DomainError("stable_alpha_window supports 1 <= N <= 8")
    lo_q, hi_q = to_rational(lo), to_rational(hi)
    grid = sorted(set(
        [lo_q + (hi_q - lo_q) * Fraction(k, 800) for k in range(801)]
        + [Fraction(s, 10**e) for e in range(1, 7) for s in (1, 5)]
    ))
    grid = [g for g in grid if lo_q <= g <= hi_q]
    flags = [_is_stable(order, g) for g in grid]
    if not any(flags):
        return None
    # Longest run of stable grid points.
    best, start = (0, 0, -1), None
    for k, f in enumerate(flags + [False]):
        if f and start is None:
            start = k
        elif not f and start is not None:
            if k - start > best[0]:
                best = (k - start, start, k - 1)
            start = None
    _, i0, i1 = best

    def bisect(stable_q, unstable_q):
        while abs(stable_q - unstable_q) > resolution:
            mid = (stable_q + unstable_q) / 2
            mid = Fraction(mid.numerator, mid.denominator)
            if _is_stable(order, mid):
                stable_q = mid
            else:
                unstable_q = mid
        return stable_q, unstable_q

    if i0 == 0:
        left = grid[0]
    else:
        s, u = bisect(grid[i0], grid[i0 - 1])
        left = (s + u) / 2
    if i1 == len(grid) - 1:
        right = grid[-1]
    else:
        s, u = bisect(grid[i1], grid[i1 + 1])
        right = (s + u) / 2
    return float(left), float(right)
