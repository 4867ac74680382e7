"""Spherical harmonics, surface quadrature and boundary-geometry expansions.

Convention: complex harmonics with the Condon-Shortley phase,

    Y_{n,m}(theta, phi) = sqrt((n-m)!/(n+m)! (2n+1)/(4 pi)) L_n^m(cos theta) e^{i m phi},

and ``<f, g> = int_{S^2} f conj(g) d omega``.  Theta derivatives are analytic
(ladder identity on L_n^m), never finite differences.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import lpmv

from .errors import CertificateViolation, DomainError

__all__ = [
    "SphereGrid",
    "default_grid",
    "ylm",
    "dtheta_ylm",
    "sphere_inner",
    "project",
    "synthesize",
    "TripleProductTable",
    "triple_products",
    "gaunt_y20",
    "verify_triple_products",
    "laplace_beltrami_check",
    "mean_curvature_expansion",
    "normal_vector_expansion",
    "normal_defect",
]

Y20_CUBE = math.sqrt(5.0 / math.pi) / 7.0  # <Y20 Y20, Y20>
MODE_COUPLING = {0: 1.0, 1: 0.5, -1: 0.5, 2: -1.0, -2: -1.0}


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre nodes in cos(theta) times uniform phi nodes."""

    n_theta: int = 64
    n_phi: int = 128
    theta: np.ndarray = field(init=False, repr=False)
    phi: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_theta < 1 or self.n_phi < 1:
            raise DomainError("grid needs at least one node per direction")
        x, w = np.polynomial.legendre.leggauss(self.n_theta)
        th = np.arccos(x)
        ph = 2 * np.pi * np.arange(self.n_phi) / self.n_phi
        TH, PH = np.meshgrid(th, ph, indexing="ij")
        W = np.outer(w, np.full(self.n_phi, 2 * np.pi / self.n_phi))
        object.__setattr__(self, "theta", TH)
        object.__setattr__(self, "phi", PH)
        object.__setattr__(self, "weights", W)


@functools.lru_cache(maxsize=8)
def default_grid(n_theta: int = 64, n_phi: int = 128) -> SphereGrid:
    return SphereGrid(n_theta, n_phi)


def _check_nm(n: int, m: int) -> None:
    if n < 0 or abs(m) > n:
        raise DomainError(f"need |m| <= n and n >= 0, got n={n}, m={m}")


def _norm(n: int, m: int) -> float:
    return math.sqrt(math.factorial(n - m) / math.factorial(n + m) * (2 * n + 1) / (4 * math.pi))


def _legendre(n: int, m: int, x):
    # L_n^m with Condon-Shortley phase, negative m via the standard reflection
    if m >= 0:
        return lpmv(m, n, x)
    k = -m
    return (-1) ** k * math.factorial(n - k) / math.factorial(n + k) * lpmv(k, n, x)


def ylm(n: int, m: int, theta, phi):
    """Normalized complex harmonic ``Y_{n,m}(theta, phi)``."""
    _check_nm(n, m)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return _norm(n, m) * _legendre(n, m, np.cos(theta)) * np.exp(1j * m * phi)


def dtheta_ylm(n: int, m: int, theta, phi):
    r"""``\partial_\theta Y_{n,m}`` from
    ``dL_n^m/d\theta = (L_n^{m+1} - (n+m)(n-m+1) L_n^{m-1}) / 2``."""
    _check_nm(n, m)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    x = np.cos(theta)
    up = _legendre(n, m + 1, x) if m + 1 <= n else 0.0
    down = _legendre(n, m - 1, x) if m - 1 >= -n else 0.0
    dl = 0.5 * (up - (n + m) * (n - m + 1) * down)
    return _norm(n, m) * dl * np.exp(1j * m * phi)


def _on_grid(f, grid: SphereGrid):
    if callable(f):
        return np.asarray(f(grid.theta, grid.phi))
    f = np.asarray(f)
    if f.ndim == 0:
        return np.full(grid.theta.shape, f)
    return f


def sphere_inner(f, g, grid: SphereGrid | None = None) -> complex:
    """``int f conj(g) d omega`` by tensor quadrature.

    ``f`` and ``g`` may be callables ``(theta, phi) -> array``, arrays sampled on
    ``grid``, or scalars.
    """
    grid = grid or default_grid()
    fv = _on_grid(f, grid)
    gv = _on_grid(g, grid)
    return complex(np.sum(grid.weights * fv * np.conj(gv)))


def project(f, n_max: int = 10, grid: SphereGrid | None = None) -> dict[tuple[int, int], complex]:
    """Harmonic coefficients ``<f, Y_{n,m}>`` for ``n <= n_max``."""
    grid = grid or default_grid()
    fv = _on_grid(f, grid)
    return {
        (n, m): sphere_inner(fv, ylm(n, m, grid.theta, grid.phi), grid)
        for n in range(n_max + 1)
        for m in range(-n, n + 1)
    }


def synthesize(coeffs, theta, phi, kind: str = "value"):
    """Evaluate ``sum c_nm Y_nm`` (or its theta/phi derivative or Laplacian)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    out = np.zeros(np.broadcast(theta, phi).shape, dtype=complex)
    for (n, m), c in coeffs.items():
        if c == 0:
            continue
        if kind == "value":
            out += c * ylm(n, m, theta, phi)
        elif kind == "theta":
            out += c * dtheta_ylm(n, m, theta, phi)
        elif kind == "phi":
            out += c * 1j * m * ylm(n, m, theta, phi)
        elif kind == "laplacian":
            out += -n * (n + 1) * c * ylm(n, m, theta, phi)
        else:
            raise ValueError(f"unknown kind {kind!r}")
    return out


@dataclass(frozen=True)
class TripleProductTable:
    """Quadrature values of ``<Y20 Y2m, Y_{n,l}>`` and the theta-derivative analogue.

    Keys are ``(m, n, l)`` with ``|m| <= 2``, ``n in {1, 2}``, ``|l| <= n``.
    ``coupling[m]`` is ``<Y20 Y2m, Y2m> / <Y20 Y20, Y20>``.
    """

    plain: dict
    deriv: dict
    coupling: dict

    @property
    def cube(self) -> float:
        """``<Y20 Y20, Y20>``."""
        return self.plain[(0, 2, 0)].real

    @property
    def cube_theta(self) -> float:
        """``<d_theta Y20 d_theta Y20, Y20>``."""
        return self.deriv[(0, 2, 0)].real


@functools.lru_cache(maxsize=4)
def triple_products(n_theta: int = 64, n_phi: int = 128) -> TripleProductTable:
    grid = default_grid(n_theta, n_phi)
    th, ph = grid.theta, grid.phi
    y20 = ylm(2, 0, th, ph)
    dy20 = dtheta_ylm(2, 0, th, ph)
    plain, deriv = {}, {}
    for m in range(-2, 3):
        y2m = ylm(2, m, th, ph)
        dy2m = dtheta_ylm(2, m, th, ph)
        for n in (1, 2):
            for l in range(-n, n + 1):
                ynl = ylm(n, l, th, ph)
                plain[(m, n, l)] = sphere_inner(y20 * y2m, ynl, grid)
                deriv[(m, n, l)] = sphere_inner(dy20 * dy2m, ynl, grid)
    cube = plain[(0, 2, 0)].real
    coupling = {m: plain[(m, 2, m)].real / cube for m in range(-2, 3)}
    return TripleProductTable(plain, deriv, coupling)


def gaunt_y20(m: int, n: int, l: int, derivative: bool = False) -> float:
    """Closed-form value of the table entries (zero unless ``n == 2, l == m``)."""
    if n != 2 or l != m:
        return 0.0
    base = MODE_COUPLING[m] * Y20_CUBE
    return 3.0 * base if derivative else base


def verify_triple_products(table: TripleProductTable | None = None, tol: float = 1e-10) -> float:
    """Max deviation of the quadrature table from the closed constants.

    Raises :class:`CertificateViolation` above ``tol``.
    """
    table = table or triple_products()
    worst = 0.0
    for key, val in table.plain.items():
        worst = max(worst, abs(val - gaunt_y20(*key)))
    for key, val in table.deriv.items():
        worst = max(worst, abs(val - gaunt_y20(*key, derivative=True)))
    for m, b in table.coupling.items():
        worst = max(worst, abs(b - MODE_COUPLING[m]))
    if worst > tol:
        raise CertificateViolation(f"triple products deviate by {worst:.3g} > {tol:g}")
    return worst


def laplace_beltrami_check(n: int, m: int, n_test: int = 8, grid: SphereGrid | None = None) -> float:
    """Weak-form residual of ``-Lap_omega Y_nm = n(n+1) Y_nm``.

    Uses ``<Lap Y, Z> = -<grad Y, grad Z>`` against every ``Z = Y_{n',m'}``
    with ``n' <= n_test``; returns the largest absolute residual.
    """
    _check_nm(n, m)
    if n > 8:
        raise DomainError("checked for n <= 8 only")
    grid = grid or default_grid()
    th, ph = grid.theta, grid.phi
    s2 = np.sin(th) ** 2
    y = ylm(n, m, th, ph)
    yt = dtheta_ylm(n, m, th, ph)
    yp = 1j * m * y
    worst = 0.0
    for k in range(n_test + 1):
        for j in range(-k, k + 1):
            z = ylm(k, j, th, ph)
            zt = dtheta_ylm(k, j, th, ph)
            zp = 1j * j * z
            grad = np.sum(grid.weights * (yt * np.conj(zt) + yp * np.conj(zp) / s2))
            res = -grad + n * (n + 1) * np.sum(grid.weights * y * np.conj(z))
            worst = max(worst, abs(res))
    return worst


def _perturbation(big_r, rtilde, eps, n_max, grid):
    grid = grid or default_grid()
    vals = np.real(_on_grid(rtilde, grid))
    if abs(eps) * np.max(np.abs(vals)) >= big_r:
        raise DomainError("perturbation eps*rtilde must stay below R")
    coeffs = project(vals, n_max, grid)
    return {k: c for k, c in coeffs.items() if abs(c) > 1e-14}


def mean_curvature_expansion(
    big_r: float,
    rtilde,
    eps: float,
    n_max: int = 10,
    grid: SphereGrid | None = None,
) -> Callable:
    """Mean curvature of ``r = R + eps*rtilde`` to second order in eps.

    Returns a callable ``kappa(theta, phi)``; the Laplace-Beltrami operator acts
    on the harmonic coefficients of ``rtilde`` (bandlimited to ``n_max``).
    """
    coeffs = _perturbation(big_r, rtilde, eps, n_max, grid)

    def kappa(theta, phi):
        rt = np.real(synthesize(coeffs, theta, phi))
        lap = np.real(synthesize(coeffs, theta, phi, "laplacian"))
        return (
            1.0 / big_r
            - eps / big_r**2 * (rt + 0.5 * lap)
            + eps**2 / big_r**3 * (rt * rt + rt * lap)
        )

    return kappa


def normal_vector_expansion(
    big_r: float,
    rtilde,
    eps: float,
    n_max: int = 10,
    grid: SphereGrid | None = None,
) -> Callable:
    """Unit outer normal of ``r = R + eps*rtilde`` to second order in eps.

    The returned callable gives the ``(e_r, e_theta, e_phi)`` components.
    """
    coeffs = _perturbation(big_r, rtilde, eps, n_max, grid)

    def normal(theta, phi):
        theta = np.asarray(theta, dtype=float)
        rt_t = np.real(synthesize(coeffs, theta, phi, "theta"))
        rt_p = np.real(synthesize(coeffs, theta, phi, "phi"))
        s = np.sin(theta)
        n_r = 1.0 - eps**2 / (2 * big_r**2) * (rt_t**2 + rt_p**2 / s**2)
        n_t = -eps * rt_t / big_r
        n_p = -eps * rt_p / (big_r * s)
        return n_r, n_t, n_p

    return normal


def normal_defect(big_r, rtilde, eps, n_max: int = 10, grid: SphereGrid | None = None) -> float:
    """``max | |n|^2 - 1 |`` of the truncated normal over the quadrature nodes."""
    grid = grid or default_grid()
    n_r, n_t, n_p = normal_vector_expansion(big_r, rtilde, eps, n_max, grid)(grid.theta, grid.phi)
    return float(np.max(np.abs(n_r**2 + n_t**2 + n_p**2 - 1.0)))
