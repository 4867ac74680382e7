r"""Half-integer modified Bessel machinery.

Everything here is built on the ratio

.. math::
    P_n(r) = \frac{I_{n+3/2}(r)}{r\, I_{n+1/2}(r)},

which satisfies :math:`r^2 P_n P_{n+1} + (2n+3) P_n = 1` and
:math:`P_0(r) = (r\cosh r - \sinh r)/(r^2 \sinh r)`.

``P_0`` is evaluated from its hyperbolic closed form (ascending series for
``r < 0.5``).  Higher orders are generated by running the identity *downward*,
``P_n = 1 / (2n + 3 + r^2 P_{n+1})``, from a deep starting index: the upward
recurrence loses roughly ``2 log10((2n+3)/r)`` digits per step for small ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import DomainError, OrderRangeError

N_MAX = 50
SERIES_THRESHOLD = 0.5

__all__ = [
    "N_MAX",
    "RatioTable",
    "p0_closed",
    "p1_explicit",
    "p2_explicit",
    "p_ratio",
    "p_ratios",
    "ratio_table",
    "radial_profile",
    "profile_boundary_derivs",
]


def _check_radius(r: float) -> float:
    r = float(r)
    if not r > 0.0 or not math.isfinite(r):
        raise DomainError(f"radius must be positive and finite, got {r!r}")
    return r


def _p0_series(r: float) -> float:
    # (r cosh r - sinh r) / (r^2 sinh r) as a ratio of two even power series:
    #   num = sum_{k>=1} 2k r^(2k-2)/(2k+1)!,  den = sum_{k>=0} r^(2k)/(2k+1)!
    r2 = r * r
    num = 0.0
    den = 1.0
    term = 1.0  # r^(2k) / (2k+1)!
    for k in range(1, 30):
        term *= r2 / ((2 * k) * (2 * k + 1))
        num += 2 * k * term / r2
        den += term
        if term < 1e-18 * den:
            break
    return num / den


def p0_closed(r: float) -> float:
    """``P_0(r)`` from the hyperbolic closed form, series branch below 0.5."""
    r = _check_radius(r)
    if r < SERIES_THRESHOLD:
        return _p0_series(r)
    # (r coth r - 1) / r^2 never overflows
    return (r / math.tanh(r) - 1.0) / (r * r)


def p1_explicit(r: float) -> float:
    """Explicit hyperbolic expression for ``P_1``.

    The expression cancels badly for small r, so it is evaluated with 40
    significant digits; it serves as an independent cross-check.
    """
    r = _check_radius(r)
    with mpmath.workdps(40):
        x = mpmath.mpf(r)
        ch, sh = mpmath.cosh(x), mpmath.sinh(x)
        return float((x * x * sh - 3 * x * ch + 3 * sh) / (x * x * (x * ch - sh)))


def p2_explicit(r: float) -> float:
    """Explicit hyperbolic expression for ``P_2`` (40-digit evaluation)."""
    r = _check_radius(r)
    with mpmath.workdps(40):
        x = mpmath.mpf(r)
        ch, sh = mpmath.cosh(x), mpmath.sinh(x)
        num = x**3 * ch - 6 * x * x * sh + 15 * x * ch - 15 * sh
        den = x * x * (x * x * sh - 3 * x * ch + 3 * sh)
        return float(num / den)


def p_ratios(r: float, n_max: int = N_MAX) -> np.ndarray:
    """Return ``[P_0(r), ..., P_{n_max}(r)]``.

    Parameters
    ----------
    r : float
        Positive radius.
    n_max : int
        Highest order, at most :data:`N_MAX`.
    """
    r = _check_radius(r)
    n_max = int(n_max)
    if n_max < 0:
        raise OrderRangeError(f"n_max must be non-negative, got {n_max}")
    if n_max > N_MAX:
        raise OrderRangeError(f"orders above {N_MAX} are not certified (asked {n_max})")
    r2 = r * r
    # starting error is damped by prod r^2 P_k P_{k+1}; well below 1e-16 at this depth
    top = n_max + int(2.0 * r) + 40
    p = 1.0 / (2 * top + 3)
    out = np.empty(n_max + 1)
    for k in range(top - 1, -1, -1):
        p = 1.0 / ((2 * k + 3) + r2 * p)
        if k <= n_max:
            out[k] = p
    out[0] = p0_closed(r)
    return out


def p_ratio(n: int, r: float, n_max: int = N_MAX) -> float:
    """``P_n(r)`` for a single order ``0 <= n <= n_max``."""
    if n < 0:
        raise OrderRangeError(f"order must be non-negative, got {n}")
    if n > n_max:
        raise OrderRangeError(f"order {n} exceeds configured n_max={n_max}")
    if n == 0:
        return p0_closed(r)
    return float(p_ratios(r, n)[n])


@dataclass(frozen=True)
class RatioTable:
    """``P_0(r) .. P_{n_max}(r)`` at one radius."""

    r: float
    values: tuple[float, ...]

    def identity_residuals(self) -> np.ndarray:
        v = np.asarray(self.values)
        n = np.arange(len(v) - 1)
        return np.abs(self.r**2 * v[:-1] * v[1:] + (2 * n + 3) * v[:-1] - 1.0)

    def is_valid(self) -> bool:
        v = np.asarray(self.values)
        return bool(
            np.all(v > 0)
            and np.all(np.diff(v) < 0)
            and np.all(self.identity_residuals() <= 1e-12)
        )


def ratio_table(r: float, n_max: int = 10) -> RatioTable:
    return RatioTable(float(r), tuple(float(x) for x in p_ratios(r, n_max)))


def _sinh_ratio(r: float, big_r: float) -> float:
    # (sinh r / r) * (R / sinh R), overflow-free
    return (big_r / r) * math.exp(r - big_r) * (math.expm1(-2 * r) / math.expm1(-2 * big_r))


def radial_profile(n: int, r: float, big_r: float) -> float:
    r"""Normalized radial profile :math:`\frac{I_{n+1/2}(r)/r^{1/2}}{I_{n+1/2}(R)/R^{1/2}}`.

    Built from ``I_{1/2}(r) \propto \sinh r / \sqrt{r}`` and the ratio form of the
    three-term recurrence, ``I_{k+3/2}(r) / I_{k+1/2}(r) = r P_k(r)``, so that no
    individual Bessel value is ever formed.
    """
    r = _check_radius(r)
    big_r = _check_radius(big_r)
    if r > big_r * (1 + 1e-15):
        raise DomainError(f"profile is defined on (0, R]; got r={r} > R={big_r}")
    if n < 0:
        raise OrderRangeError(f"order must be non-negative, got {n}")
    if r == big_r:
        return 1.0
    value = _sinh_ratio(r, big_r)
    if n:
        pr = p_ratios(r, n - 1)
        pR = p_ratios(big_r, n - 1)
        value *= float(np.prod((r * pr) / (big_r * pR)))
    return value


def profile_boundary_derivs(n: int, big_r: float) -> tuple[float, float, float]:
    """First three r-derivatives of :func:`radial_profile` at ``r = R``."""
    big_r = _check_radius(big_r)
    pn = p_ratio(n, big_r)
    a = n * (n - 1) / big_r**2 + 1.0
    d1 = n / big_r + big_r * pn
    d2 = a - 2.0 * pn
    d3 = (n - 2) / big_r * a + ((n * n + n + 6) / big_r**2 + 1.0) * big_r * pn
    return d1, d2, d3
