"""Bifurcation values, first/second-order boundary expansions and the slope mu_2'(0).

Notation used throughout (all evaluated at the stationary radius R):

* ``c = beta P0 / (beta + R P0)``     (equals sigma_s'(R) / R)
* ``A = beta + 2/R + R P2``           (Robin factor of the n = 2 profile)
* ``B = beta + 1/R + R P1``
* ``Y20_CUBE = <Y20 Y20, Y20> = sqrt(5/pi)/7``

The second-order bracket ``<1/2 H_RR(0, mu2)[Y20, Y20], Y20>`` is available two
ways: ``assembly`` sums the boundary contributions using quadrature triple
products, ``compact`` uses the closed E1 R beta^2 + E2 beta + E3 form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bessel_ratios import N_MAX, p_ratios, radial_profile
from .certificates import e_coeffs
from .errors import DegenerateParameterError, DomainError
from .harmonics import Y20_CUBE, triple_products
from .stationary import boundary_derivs

__all__ = [
    "BifurcationData",
    "FirstOrderProfile",
    "SlopeCertificate",
    "mu_n",
    "mu_2_closed",
    "b_n",
    "bifurcation_data",
    "spectrum_neg_h",
    "first_order_profile",
    "d_coeffs",
    "sigma2_robin_projection",
    "p2_boundary_projection",
    "bracket_hrr",
    "mu2_slope",
]


def _factors(big_r, beta):
    p0, p1, p2 = (float(v) for v in p_ratios(big_r, 2))
    c = beta * p0 / (beta + big_r * p0)
    a = beta + 2.0 / big_r + big_r * p2
    b = beta + 1.0 / big_r + big_r * p1
    return p0, p1, p2, c, a, b


def mu_n(n: int, big_r: float, beta: float, sigma_tilde: float, gamma: float) -> float:
    """Bifurcation value mu_n for mode n >= 2."""
    if n < 2:
        raise DomainError(f"mu_n is defined for n >= 2, got {n}")
    if n > N_MAX:
        raise DomainError(f"n above {N_MAX} is not certified")
    p = p_ratios(big_r, n)
    pn, p1 = p[n], p[1]
    den = (n + beta * big_r) * p1 - (1 + beta * big_r) * pn
    if not den > 0:
        raise DegenerateParameterError(f"mu_{n} denominator {den:.3g} is not positive")
    return float(
        gamma * 3 * n * (n - 1) * (n + 2) / (2 * sigma_tilde * big_r**4)
        * (beta + n / big_r + big_r * pn) / den
    )


def mu_2_closed(big_r: float, beta: float, gamma: float) -> float:
    """mu_2 with sigma_tilde eliminated through the radius equation."""
    p0, p1, p2, _, a, b = _factors(big_r, beta)
    den = a * p1 - b * p2
    if not den > 0:
        raise DegenerateParameterError("mu_2 denominator is not positive")
    return float(gamma * 4 / big_r**5 * (beta + big_r * p0) / (beta * p0) * a / den)


def b_n(n: int, big_r: float, gamma: float, mu_n_value=None, beta=None, sigma_tilde=None) -> float:
    """Coefficient B_n of the linearization eigenvalue ``B_n (mu_n - mu)``.

    n = 0 needs beta and sigma_tilde; n >= 2 needs the bifurcation value.
    """
    if n == 1:
        return 0.0
    if n == 0:
        if beta is None or sigma_tilde is None:
            raise ValueError("B_0 needs beta and sigma_tilde")
        p0, p1 = p_ratios(big_r, 1)
        return float(
            -sigma_tilde * big_r / 3.0
            * (beta * big_r * (p0 - p1) + p0) / (beta + big_r * p0)
        )
    if n < 0:
        raise DomainError(f"mode index must be >= 0, got {n}")
    if mu_n_value is None:
        raise ValueError(f"B_{n} needs mu_{n}")
    return gamma * n * (n - 1) * (n + 2) / (2 * big_r**3) / mu_n_value


@dataclass(frozen=True)
class BifurcationData:
    n: int
    mu_n: float
    b_n: float


def bifurcation_data(n, big_r, beta, sigma_tilde, gamma) -> BifurcationData:
    if n == 1:
        return BifurcationData(1, float("nan"), 0.0)
    m = mu_n(n, big_r, beta, sigma_tilde, gamma)
    return BifurcationData(n, m, b_n(n, big_r, gamma, m))


def spectrum_neg_h(mu, big_r, beta, sigma_tilde, gamma, ns=range(1, 11)) -> list[float]:
    """Eigenvalues ``B_n (mu - mu_n)`` of ``-H_R(0, mu)`` on span{Y_nm}, n >= 1.

    The radial mode n = 0 is not covered (its bifurcation value is not part
    of this model's closed forms).
    """
    out = []
    for n in ns:
        if n < 1:
            raise DomainError("radial mode n = 0 is not supported")
        if n == 1:
            out.append(0.0)
            continue
        d = bifurcation_data(n, big_r, beta, sigma_tilde, gamma)
        out.append(d.b_n * (mu - d.mu_n))
    return out


@dataclass(frozen=True)
class FirstOrderProfile:
    """First-order profiles sigma_1, p_1 for the boundary perturbation Y20.

    Every field is the coefficient multiplying Y20 (or d_theta Y20 for the
    ``*_theta`` fields) on r = R.
    """

    R: float
    mu: float
    amplitude: float  # sigma_1 = amplitude * radial_profile(2, r, R) * Y20
    p_quad: float  # p_1 = -mu sigma_1 + p_quad (r/R)^2 Y20
    sigma1: float
    sigma1_r: float
    sigma1_rr: float
    sigma1_theta: float
    p1_r: float
    p1_rr: float
    p1_theta: float

    def sigma1_radial(self, r: float) -> float:
        return self.amplitude * radial_profile(2, r, self.R)

    def p1_radial(self, r: float) -> float:
        return -self.mu * self.sigma1_radial(r) + self.p_quad * (r / self.R) ** 2


def first_order_profile(big_r: float, beta: float, mu: float, gamma: float = 1.0) -> FirstOrderProfile:
    p0, p1, p2, c, a, b = _factors(big_r, beta)
    k = -c * b / a * big_r
    d1 = 2.0 / big_r + big_r * p2
    d2 = 2.0 / big_r**2 + 1.0 - 2.0 * p2
    p_quad = gamma * 2.0 / big_r**2 + mu * k
    return FirstOrderProfile(
        R=big_r,
        mu=mu,
        amplitude=k,
        p_quad=p_quad,
        sigma1=k,
        sigma1_r=k * d1,
        sigma1_rr=k * d2,
        sigma1_theta=k,
        p1_r=mu * c * b / a * big_r**2 * p2 + gamma * 4.0 / big_r**3,
        p1_rr=-mu * k * (1.0 - 2.0 * p2) + gamma * 4.0 / big_r**4,
        # -mu k + p_quad collapses to the curvature term
        p1_theta=gamma * 2.0 / big_r**2,
    )


def d_coeffs(big_r: float, beta: float, mu: float, gamma: float = 1.0) -> tuple[float, float]:
    """Closed forms of D1, D2 (projections of sigma_2, p_2 onto Y20)."""
    p0, p1, p2, c, a, b = _factors(big_r, beta)
    r = big_r
    inner = (
        -0.5 * (r * (1 - 2 * p1) + beta * (1 + r * r * p1) - 3 / r) * a
        + (-1 / r + r * (1 - 2 * p2) + beta * (2 + r * r * p2)) * b
    )
    d1 = Y20_CUBE * c / a**2 * inner
    d2 = mu * d1 + Y20_CUBE * (
        -gamma * 9 / r**3 + 0.5 * mu * c * r * r * p1 - mu * c * b / a * r * r * p2
    )
    return d1, d2


def sigma2_robin_projection(big_r, beta, mu, gamma=1.0, table=None) -> float:
    """``<(d_r sigma_2 + beta sigma_2)|_R, Y20>`` assembled from the boundary
    condition of sigma_2, with quadrature triple products."""
    table = table or triple_products()
    t0, t0_theta = table.cube, table.cube_theta
    eq = boundary_derivs(big_r, beta, mu, 0.5, gamma)
    _, s1, s2, s3 = eq.sigma_boundary_derivs
    fo = first_order_profile(big_r, beta, mu, gamma)
    return (
        -0.5 * (s3 + beta * s2) * t0
        + 0.5 / big_r**2 * s1 * t0_theta
        - (fo.sigma1_rr + beta * fo.sigma1_r) * t0
        + fo.sigma1_theta / big_r**2 * t0_theta
    )


def p2_boundary_projection(big_r, beta, mu, gamma=1.0, table=None) -> float:
    """``<p_2|_R, Y20>`` from the second-order pressure boundary condition."""
    table = table or triple_products()
    t0 = table.cube
    eq = boundary_derivs(big_r, beta, mu, 0.5, gamma)
    ps2 = eq.p_boundary_derivs[2]
    fo = first_order_profile(big_r, beta, mu, gamma)
    # Y20^2 + Y20 Lap Y20 = -5 Y20^2
    return gamma / big_r**3 * (-5.0) * t0 - 0.5 * ps2 * t0 - fo.p1_r * t0


def _bracket_assembly(big_r, beta, mu2, gamma, table):
    t0, t0_theta = table.cube, table.cube_theta
    _, _, p2 = p_ratios(big_r, 2)
    eq = boundary_derivs(big_r, beta, mu2, 0.5, gamma)
    ps3 = eq.p_boundary_derivs[3]
    fo = first_order_profile(big_r, beta, mu2, gamma)
    a = beta + 2.0 / big_r + big_r * p2
    d1 = sigma2_robin_projection(big_r, beta, mu2, gamma, table) / a
    d2 = p2_boundary_projection(big_r, beta, mu2, gamma, table) + mu2 * d1
    dp2_dr = -mu2 * d1 * (2.0 / big_r + big_r * p2) + d2 * 2.0 / big_r
    return (
        0.5 * ps3 * t0
        + fo.p1_rr * t0
        - fo.p1_theta / big_r**2 * t0_theta
        + dp2_dr
    )


def _bracket_compact(big_r, beta, mu2):
    _, _, _, c, a, _ = _factors(big_r, beta)
    e1, e2, e3 = e_coeffs(big_r)
    return Y20_CUBE * mu2 * c / a**2 * (e1 * big_r * beta**2 + e2 * beta + e3)


def bracket_hrr(big_r, beta, mu2, gamma=1.0, method: str = "assembly", table=None) -> float:
    """``<1/2 H_RR(0, mu2)[Y20, Y20], Y20>``.

    ``compact`` is only valid at ``mu2 = mu_2`` (gamma has been eliminated
    with the bifurcation relation); ``assembly`` is valid for any mu but is
    meaningful at the bifurcation value.
    """
    if method == "assembly":
        return _bracket_assembly(big_r, beta, mu2, gamma, table or triple_products())
    if method == "compact":
        return _bracket_compact(big_r, beta, mu2)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class SlopeCertificate:
    """Both evaluation paths of the transcritical slope and the derived a."""

    e1: float
    e2: float
    e3: float
    bracket: float
    bracket_compact: float
    hrmu: float
    slope: float
    slope_closed: float
    a: float

    @property
    def bracket_delta(self) -> float:
        return abs(self.bracket - self.bracket_compact) / abs(self.bracket_compact)

    @property
    def slope_delta(self) -> float:
        return abs(self.slope - self.slope_closed) / abs(self.slope_closed)

    @property
    def signs_ok(self) -> bool:
        return all(v < 0 for v in (self.e1, self.e2, self.e3, self.slope, self.a, self.hrmu))


def mu2_slope(big_r, beta, mu2, gamma=1.0, table=None) -> SlopeCertificate:
    """mu_2'(0) = -bracket / <H_Rmu[Y20], Y20> with ``<H_Rmu[Y20], Y20> = -B_2``."""
    e1, e2, e3 = e_coeffs(big_r)
    br = bracket_hrr(big_r, beta, mu2, gamma, "assembly", table)
    bc = bracket_hrr(big_r, beta, mu2, gamma, "compact")
    hrmu = -b_n(2, big_r, gamma, mu2)
    slope = -br / hrmu
    _, _, _, c, a, _ = _factors(big_r, beta)
    slope_closed = (
        Y20_CUBE * mu2**2 * big_r**3 / (4 * gamma) * c / a**2
        * (e1 * big_r * beta**2 + e2 * beta + e3)
    )
    vals = (e1, e2, e3, br, bc, hrmu, slope, slope_closed, 2.0 * br)
    return SlopeCertificate(*(float(v) for v in vals))
