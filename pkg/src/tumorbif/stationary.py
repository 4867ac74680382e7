"""Radially symmetric stationary solution (sigma_s, p_s, R).

The radius solves ``beta P_0(R) / (beta + R P_0(R)) = sigma_tilde / 3``; the
left side decreases strictly from 1/3 (R -> 0) to 0 (R -> inf), so the root is
unique for every ``0 < sigma_tilde < 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bessel_ratios import p0_closed, p_ratios, radial_profile
from .errors import ConvergenceError, DomainError

__all__ = [
    "ModelParams",
    "RadialEquilibrium",
    "radius_equation",
    "solve_radius",
    "robin_coefficient",
    "sigma_s_at",
    "p_s_at",
    "boundary_derivs",
    "equilibrium",
]

RESIDUAL_TOL = 1e-12
MAX_BISECTIONS = 200
R_CEILING = 1e6


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the model.

    beta is the nutrient supply rate in the Robin condition, sigma_tilde the
    threshold concentration and gamma the cell-to-cell adhesiveness.
    """

    beta: float
    sigma_tilde: float
    gamma: float = 1.0

    def __post_init__(self):
        for name in ("beta", "sigma_tilde", "gamma"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise DomainError(f"{name} must be a finite number, got {v!r}")
        if self.beta <= 0:
            raise DomainError(f"beta must be > 0, got {self.beta}")
        if not 0 < self.sigma_tilde < 1:
            raise DomainError(f"sigma_tilde must lie in (0, 1), got {self.sigma_tilde}")
        if self.gamma <= 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma}")


def radius_equation(big_r: float, beta: float, sigma_tilde: float) -> float:
    """Residual ``beta P_0(R)/(beta + R P_0(R)) - sigma_tilde/3``."""
    p0 = p0_closed(big_r)
    return beta * p0 / (beta + big_r * p0) - sigma_tilde / 3.0


def solve_radius(params: ModelParams) -> float:
    """Stationary radius by bisection on the radius equation."""
    beta, st = params.beta, params.sigma_tilde
    if st / 3.0 >= 1.0 / 3.0:
        raise DomainError("sigma_tilde/3 must be below 1/3")
    f = lambda x: radius_equation(x, beta, st)  # noqa: E731

    lo, hi = 1e-6, 1.0
    while f(lo) <= 0:
        lo *= 1e-2
        if lo < 1e-300:
            raise ConvergenceError("could not bracket the radius from below")
    while f(hi) > 0:
        hi *= 2.0
        if hi > R_CEILING:
            raise ConvergenceError(f"radius bracket exceeded R = {R_CEILING:g}")

    best = lo if abs(f(lo)) < abs(f(hi)) else hi
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) < abs(f(best)):
            best = mid
        if fm == 0.0 or hi - lo <= 4 * math.ulp(mid):
            break
        if fm > 0:
            lo = mid
        else:
            hi = mid
    if abs(f(best)) > RESIDUAL_TOL:
        raise ConvergenceError(f"radius residual {abs(f(best)):.3g} above {RESIDUAL_TOL:g}")
    return best


def robin_coefficient(big_r: float, beta: float) -> float:
    """``beta / (beta + R P_0(R))`` = sigma_s on the boundary."""
    return beta / (beta + big_r * p0_closed(big_r))


def _check_inside(r: float, big_r: float) -> None:
    if not 0 < r <= big_r:
        raise DomainError(f"r must lie in (0, R={big_r}], got {r}")


def sigma_s_at(r: float, big_r: float, beta: float) -> float:
    """Stationary nutrient concentration at radius ``r``."""
    _check_inside(r, big_r)
    return robin_coefficient(big_r, beta) * radial_profile(0, r, big_r)


def p_s_at(r, big_r, beta, mu, sigma_tilde, gamma):
    """Stationary pressure at radius ``r``."""
    _check_inside(r, big_r)
    return (
        -mu * sigma_s_at(r, big_r, beta)
        + mu * sigma_tilde * (r * r - big_r * big_r) / 6.0
        + gamma / big_r
        + mu * robin_coefficient(big_r, beta)
    )


@dataclass(frozen=True)
class RadialEquilibrium:
    """Radius plus boundary values of sigma_s and p_s and their r-derivatives.

    ``sigma_boundary_derivs`` holds (sigma_s, sigma_s', sigma_s'', sigma_s''')
    at r = R and ``p_boundary_derivs`` holds (p_s, p_s', p_s'', p_s''') there.
    """

    R: float
    sigma_boundary_derivs: tuple[float, float, float, float]
    p_boundary_derivs: tuple[float, float, float, float]
    residual: float = float("nan")

    @property
    def c(self) -> float:
        """``beta P_0 / (beta + R P_0)``, the common prefactor (= sigma_s'(R)/R)."""
        return self.sigma_boundary_derivs[1] / self.R


def boundary_derivs(big_r, beta, mu, sigma_tilde, gamma=1.0) -> RadialEquilibrium:
    """Closed-form boundary derivatives of the stationary solution.

    ``sigma_tilde`` does not enter the closed forms (it has been eliminated
    through the radius equation) but is kept so the residual can be reported.
    """
    p0, p1 = (float(v) for v in p_ratios(big_r, 1))
    c = beta * p0 / (beta + big_r * p0)
    sig = (
        beta / (beta + big_r * p0),
        c * big_r,
        c * (1.0 + big_r**2 * p1),
        c * big_r * (1.0 - 2.0 * p1),
    )
    prs = (
        gamma / big_r,
        0.0,
        -mu * c * big_r**2 * p1,
        mu * c * big_r * (2.0 * p1 - 1.0),
    )
    res = abs(radius_equation(big_r, beta, sigma_tilde))
    return RadialEquilibrium(float(big_r), sig, prs, res)


def equilibrium(params: ModelParams, mu: float = 0.0) -> RadialEquilibrium:
    """Solve for R and attach the boundary derivative block for pressure scale mu."""
    big_r = solve_radius(params)
    return boundary_derivs(big_r, params.beta, mu, params.sigma_tilde, params.gamma)
