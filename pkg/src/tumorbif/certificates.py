"""Sign certificates for the slope coefficients E1, E2, E3.

E1 and E3 are certified by direct evaluation plus a positivity decomposition.
E2 reduces to the sign of the hyperbolic polynomial G1(R), whose Taylor series
is ``-4 sum_{n>=4} n R^{2n+1}/(2n+1)! (a_n + b_n 3^{2n-5})`` with integer
polynomials a_n, b_n.  The combined coefficients are checked in exact integer
arithmetic for 4 <= n <= 17 and by monotone bracket factors for n >= 18.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .bessel_ratios import p_ratios
from .errors import CertificateViolation, DomainError

__all__ = [
    "A_COEFFS",
    "B_COEFFS",
    "TABLE1_PUBLISHED",
    "e_coeffs",
    "e1_compact",
    "e2_via_g1",
    "e3_decomposition",
    "g1_closed",
    "g1_series",
    "ExactSeriesTerm",
    "series_polys",
    "table1",
    "verify_table1",
    "low_order_cancellation",
    "tail_bracket_certificate",
    "SignSweepReport",
    "sign_sweep",
]

# ascending powers of n
A_COEFFS = (10305, -20712, -18498, 77432, -73920, 31904, -6528, 512)
B_COEFFS = (-77235, 114544, -67962, 20008, -2880, 160)

TABLE1_PUBLISHED = {
    4: 0,
    5: 0,
    6: 0,
    7: 656308224,
    8: 32037857280,
    9: 935872045056,
    10: 21237572689920,
    11: 412227655004160,
    12: 7180490438922240,
    13: 115430374226534400,
    14: 1743676765861109760,
    15: 25059810408839424000,
    16: 345732732222060165120,
    17: 4609555109351370768384,
}

G1_MAX_R = 300.0
SERIES_MAX_R = 20.0


def e_coeffs(big_r: float) -> tuple[float, float, float]:
    """(E1, E2, E3) at radius R."""
    _, p1, p2 = (float(v) for v in p_ratios(big_r, 2))
    r2 = big_r * big_r
    e1 = -0.5 * (p1 + p2 + 2 * r2 * p2 * p2 - 2 * r2 * p1 * p2)
    e2 = (
        1.0
        - 12 * p1
        + 1.5 * p2
        + r2 * p1
        - 0.5 * r2 * p2
        + 2.5 * r2 * p2 * p2
        - 7 * r2 * p1 * p2
        - 0.5 * r2 * r2 * p1 * p2 * p2
    )
    e3 = -(
        24 * p1
        - 4 * r2 * p1
        + 2 * r2 * p2
        - 3 * r2 * p2 * p2
        + 22 * r2 * p1 * p2
        + 2 * r2 * r2 * p1 * p2 * p2
    ) / (2 * big_r)
    return e1, e2, e3


def e1_compact(big_r: float) -> float:
    """E1 in the form obtained before the n=1 ratio identity is applied."""
    _, p1, p2 = (float(v) for v in p_ratios(big_r, 2))
    r2 = big_r * big_r
    return -0.5 * (-1 + 6 * p1 + p2 + 2 * r2 * p2 * p2 - r2 * p1 * p2)


def _g1_denominator(big_r: mpmath.mpf):
    ch, sh = mpmath.cosh(big_r), mpmath.sinh(big_r)
    return 8 * big_r**2 * (-3 * big_r * ch + (3 + big_r**2) * sh) ** 2 * (big_r * ch - sh)


def _working_dps(big_r: float) -> int:
    # G1 = O(R^15) while its summands are O(R): lose ~14 log10(1/R) digits
    return 30 + int(max(0.0, 15.0 * math.log10(1.0 / big_r)))


def g1_closed(big_r: float) -> float:
    """G1(R) from its four-term hyperbolic closed form.

    Evaluated in multiprecision arithmetic sized to the cancellation, so the
    result is accurate to double precision for every ``0 < R <= 300``.
    """
    if not big_r > 0:
        raise DomainError(f"R must be positive, got {big_r}")
    if big_r > G1_MAX_R:
        raise DomainError(f"G1 evaluation guarded to R <= {G1_MAX_R:g}")
    with mpmath.workdps(_working_dps(big_r)):
        x = mpmath.mpf(big_r)
        x2 = x * x
        val = (
            (-1269 + 741 * x2 + 366 * x2**2 + 44 * x2**3) * x * mpmath.cosh(x)
            + 3 * (423 + 317 * x2 + 30 * x2**2) * x * mpmath.cosh(3 * x)
            + (1269 - 648 * x2 - 606 * x2**2 - 146 * x2**3 - 8 * x2**4) * mpmath.sinh(x)
            - (423 + 1476 * x2 + 378 * x2**2 + 10 * x2**3) * mpmath.sinh(3 * x)
        )
        return float(val)


def e2_via_g1(big_r: float) -> float:
    """E2 as G1(R) over its (positive) hyperbolic denominator."""
    if big_r > G1_MAX_R:
        raise DomainError(f"G1 evaluation guarded to R <= {G1_MAX_R:g}")
    with mpmath.workdps(_working_dps(big_r)):
        den = _g1_denominator(mpmath.mpf(big_r))
        return float(mpmath.mpf(g1_closed(big_r)) / den)


def e3_decomposition(big_r: float) -> tuple[float, float, float, float]:
    """The four positive summands whose sum is ``-2 R E3``.

    Returns (24 P1, 4 R^4 P1 P2 (P2 - P3), R^2 P1 P2, 3 R^2 P2 (P1 - P2)).
    """
    _, p1, p2, p3 = (float(v) for v in p_ratios(big_r, 3))
    r2 = big_r * big_r
    return (
        24 * p1,
        4 * r2 * r2 * p1 * p2 * (p2 - p3),
        r2 * p1 * p2,
        3 * r2 * p2 * (p1 - p2),
    )


@dataclass(frozen=True)
class ExactSeriesTerm:
    n: int
    a_n: int
    b_n: int
    combined: int


def _horner(coeffs: Sequence[int], n: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = acc * n + c
    return acc


def series_polys(n: int, a_coeffs=A_COEFFS, b_coeffs=B_COEFFS) -> ExactSeriesTerm:
    """Exact ``a_n``, ``b_n`` and ``a_n + b_n 3^(2n-5)``."""
    if n < 4:
        raise DomainError(f"series index starts at 4, got {n}")
    a = _horner(a_coeffs, n)
    b = _horner(b_coeffs, n)
    return ExactSeriesTerm(n, a, b, a + b * 3 ** (2 * n - 5))


def table1(a_coeffs=A_COEFFS, b_coeffs=B_COEFFS) -> list[ExactSeriesTerm]:
    return [series_polys(n, a_coeffs, b_coeffs) for n in range(4, 18)]


def verify_table1(terms: list[ExactSeriesTerm] | None = None) -> int:
    """Compare against the published integers; returns the match count."""
    terms = table1() if terms is None else terms
    bad = [t.n for t in terms if TABLE1_PUBLISHED.get(t.n) != t.combined]
    if bad or len(terms) != len(TABLE1_PUBLISHED):
        raise CertificateViolation(f"published series integers differ at n = {bad}")
    return len(terms)


def g1_series(big_r: float, terms: int = 60, a_coeffs=A_COEFFS, b_coeffs=B_COEFFS):
    """Partial sum of the G1 power series with ``terms`` terms (n = 4 ...).

    Returns ``(partial_sum, tail_estimate)``; the estimate is the first omitted
    term magnitude scaled by ``1/(1-q)`` with ``q`` the next term ratio, or inf
    while terms are still growing.
    """
    if terms < 1:
        raise DomainError("need at least one term")
    if big_r < 0 or big_r > SERIES_MAX_R:
        raise DomainError(f"series used for 0 <= R <= {SERIES_MAX_R:g}")
    if big_r == 0:
        return 0.0, 0.0
    r2 = big_r * big_r
    w = big_r**9 / math.factorial(9)  # R^(2n+1)/(2n+1)! at n = 4
    total = 0.0
    mags = []
    for n in range(4, 4 + terms + 2):
        c = series_polys(n, a_coeffs, b_coeffs).combined
        t = -4.0 * n * w * float(c)
        if n < 4 + terms:
            total += t
        else:
            mags.append(abs(t))
        w *= r2 / ((2 * n + 2) * (2 * n + 3))
    q = mags[1] / mags[0] if mags[0] else 0.0
    tail = mags[0] / (1.0 - q) if q < 1.0 else math.inf
    return total, tail


_F = Fraction
_f = math.factorial


def low_order_cancellation() -> list[tuple[int, Fraction]]:
    """The R, R^3, R^5, R^7 coefficients of G1, term by term as collected.

    Each entry is ``(power, value)``.  Raises :class:`CertificateViolation`
    unless every value is exactly zero.
    """
    r1 = -1269 + 423 * 3 + 1269 - 423 * 3
    r3 = (
        _F(-1269, _f(2)) + 741 + _F(423 * 3**3, _f(2)) + 317 * 3
        + _F(1269, _f(3)) - 648 - _F(423 * 3**3, _f(3)) - 1476 * 3
    )
    r5 = (
        _F(-1269, _f(4)) + _F(741, _f(2)) + 366 + _F(423 * 3**5, _f(4))
        + _F(317 * 3**3, _f(2)) + 30 * 3 + _F(1269, _f(5)) - _F(648, _f(3))
        - 606 - _F(423 * 3**5, _f(5)) - _F(1476 * 3**3, _f(3)) - 378 * 3
    )
    r7 = (
        _F(-1269, _f(6)) + _F(741, _f(4)) + _F(366, _f(2)) + 44
        + _F(423 * 3**7, _f(6)) + _F(317 * 3**5, _f(4)) + _F(30 * 3**3, _f(2))
        + _F(1269, _f(7)) - _F(648, _f(5)) - _F(606, _f(3)) - 146
        - _F(423 * 3**7, _f(7)) - _F(1476 * 3**5, _f(5)) - _F(378 * 3**3, _f(3)) - 10 * 3
    )
    out = []
    for power, val in ((1, r1), (3, r3), (5, r5), (7, r7)):
        val = Fraction(val)
        # every summand is an integer multiple of 1/5040
        if (val * 5040).denominator != 1 or val != 0:
            raise CertificateViolation(f"R^{power} coefficient is {val}, not 0")
        out.append((power, val))
    return out


def tail_bracket_certificate(n0: int = 18) -> dict:
    """Bracket factors of a_n and b_n at ``n0``.

    a_n = 10305 + 20712 n (n^2 - 1) + (-18498 + 56720 n) n^2
          + (-73920 + 31904 n) n^4 + (-6528 + 512 n) n^6
    b_n = (-77235 + 114544 n) + (-67962 + 20008 n) n^2 + (-2880 + 160 n) n^4

    Every linear bracket has positive slope, so non-negativity at ``n0``
    persists for all larger n.  Raises if any bracket is negative or if a_n, b_n
    fail to be strictly positive at ``n0``.
    """
    n = n0
    a_brackets = {
        "20712(n^2-1)": 20712 * (n * n - 1),
        "-18498+56720n": -18498 + 56720 * n,
        "-73920+31904n": -73920 + 31904 * n,
        "-6528+512n": -6528 + 512 * n,
    }
    b_brackets = {
        "-77235+114544n": -77235 + 114544 * n,
        "-67962+20008n": -67962 + 20008 * n,
        "-2880+160n": -2880 + 160 * n,
    }
    a_re = 10305 + n * a_brackets["20712(n^2-1)"] + a_brackets["-18498+56720n"] * n**2 \
        + a_brackets["-73920+31904n"] * n**4 + a_brackets["-6528+512n"] * n**6
    b_re = b_brackets["-77235+114544n"] + b_brackets["-67962+20008n"] * n**2 \
        + b_brackets["-2880+160n"] * n**4
    term = series_polys(n)
    if a_re != term.a_n or b_re != term.b_n:
        raise CertificateViolation("bracket rewriting does not reproduce a_n, b_n")
    if min(a_brackets.values()) < 0 or min(b_brackets.values()) < 0:
        raise CertificateViolation(f"negative bracket at n = {n}")
    if term.a_n <= 0 or term.b_n <= 0:
        raise CertificateViolation(f"a_n or b_n not positive at n = {n}")
    return {"n": n, "a_brackets": a_brackets, "b_brackets": b_brackets,
            "a_n": term.a_n, "b_n": term.b_n}


@dataclass
class SignSweepReport:
    """Per-point certificate values and all-negative flags."""

    betas: tuple
    sigma_tildes: tuple
    r_grid: tuple
    rows: list = field(default_factory=list)
    r_rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def flag(self, key: str) -> bool:
        vals = [row[key] for row in self.rows + self.r_rows if key in row]
        return bool(vals) and all(v < 0 for v in vals)


def _sweep_point(beta, sigma_tilde, gamma):
    from .bifurcation import mu2_slope, mu_n
    from .stationary import ModelParams, radius_equation, solve_radius

    params = ModelParams(beta, sigma_tilde, gamma)
    big_r = solve_radius(params)
    e1, e2, e3 = e_coeffs(big_r)
    mu2 = mu_n(2, big_r, beta, sigma_tilde, gamma)
    cert = mu2_slope(big_r, beta, mu2, gamma)
    return {
        "beta": beta,
        "sigma_tilde": sigma_tilde,
        "R": big_r,
        "residual": abs(radius_equation(big_r, beta, sigma_tilde)),
        "E1": e1,
        "E2": e2,
        "E3": e3,
        "G1": g1_closed(big_r),
        "slope": cert.slope,
    }


def sign_sweep(betas, sigma_tildes, r_grid=(), gamma: float = 1.0, threads: int = 1) -> SignSweepReport:
    """Evaluate every certified quantity over a parameter grid.

    Each (beta, sigma_tilde) pair gives one row with R from the radius
    equation; ``r_grid`` adds beta-independent rows of E1, E2, E3 and G1.
    """
    betas = tuple(float(b) for b in betas)
    sigmas = tuple(float(s) for s in sigma_tildes)
    r_grid = tuple(float(r) for r in r_grid)
    if not betas or not sigmas:
        raise DomainError("beta and sigma_tilde grids must be non-empty")
    if any(b <= 0 for b in betas) or any(not 0 < s < 1 for s in sigmas) or any(r <= 0 for r in r_grid):
        raise DomainError("grid values out of range")
    report = SignSweepReport(betas, sigmas, r_grid)
    pts = [(b, s) for b in betas for s in sigmas]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            report.rows = list(pool.map(lambda p: _sweep_point(p[0], p[1], gamma), pts))
    else:
        report.rows = [_sweep_point(b, s, gamma) for b, s in pts]
    for r in r_grid:
        e1, e2, e3 = e_coeffs(r)
        report.r_rows.append({"R": r, "E1": e1, "E2": e2, "E3": e3, "G1": g1_closed(r)})
    for row in report.rows + report.r_rows:
        for key in ("E1", "E2", "E3", "G1", "slope"):
            if key in row and not row[key] < 0:
                report.failures.append({**row, "quantity": key})
    return report
