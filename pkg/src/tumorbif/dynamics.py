"""Linearized mode dynamics and the perturbed 0-group at the bifurcation point.

The boundary perturbation is written as ``sum A_nm(t) Y_nm`` and evolves by
``dA_nm/dt = lambda_n A_nm`` with ``lambda_n = B_n (mu - mu_n)`` (the spectrum of
``-H``).  The 0-group part is the first-order-in-eps diagonal model: every
rate reported here is formal first order in the branch parameter eps.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .bifurcation import spectrum_neg_h
from .errors import CertificateViolation, ConvergenceError, DomainError
from .stationary import ModelParams, solve_radius

__all__ = [
    "ZERO_GROUP_BASIS",
    "ModeState",
    "ZeroGroupMatrix",
    "StabilityVerdict",
    "mode_rates",
    "evolve_modes",
    "zero_group_matrix",
    "zero_group_eigen_derivs",
    "stability_verdict",
    "stability_diagram",
]

N_MAX_DEFAULT = 16
RK4_MIN_STEPS = 1000
RK4_MAX_STEP_RATE = 0.01  # |lambda| h ceiling for the auto-refined step
RK4_MAX_STEPS = 1_000_000

ZERO_GROUP_BASIS = ((1, 0), (1, 1), (1, -1), (2, 0), (2, 1), (2, -1), (2, 2), (2, -2))
_ZERO_GROUP_WEIGHTS = (0.0, 0.0, 0.0, 0.5, 0.0, 0.0, -1.5, -1.5)


@dataclass(frozen=True)
class ModeState:
    """Real amplitudes of ``Y_nm`` modes at time ``t``; absent modes are zero."""

    amplitudes: Mapping[tuple[int, int], float] = field(default_factory=dict)
    t: float = 0.0

    def __post_init__(self):
        clean = {}
        for (n, m), v in self.amplitudes.items():
            n, m = int(n), int(m)
            if n < 1:
                raise DomainError(f"mode n={n} not supported (n >= 1)")
            if abs(m) > n:
                raise DomainError(f"|m| must not exceed n, got ({n}, {m})")
            v = float(v)
            if not math.isfinite(v):
                raise DomainError(f"amplitude of ({n}, {m}) is not finite")
            clean[(n, m)] = v
        object.__setattr__(self, "amplitudes", dict(sorted(clean.items())))

    def __getitem__(self, key):
        return self.amplitudes.get(key, 0.0)


def mode_rates(mu, params: ModelParams, ns, big_r=None) -> dict[int, float]:
    """``{n: lambda_n}`` for the requested mode indices."""
    if big_r is None:
        big_r = solve_radius(params)
    ns = sorted(set(int(n) for n in ns))
    vals = spectrum_neg_h(mu, big_r, params.beta, params.sigma_tilde, params.gamma, ns)
    return dict(zip(ns, (float(v) for v in vals)))


def _rk4(y0: np.ndarray, lam: np.ndarray, t: float, n_steps: int) -> np.ndarray:
    h = t / n_steps
    y = y0.copy()
    for _ in range(n_steps):
        k1 = lam * y
        k2 = lam * (y + 0.5 * h * k1)
        k3 = lam * (y + 0.5 * h * k2)
        k4 = lam * (y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def evolve_modes(
    state: ModeState,
    mu: float,
    t: float,
    *,
    params: ModelParams,
    big_r: float | None = None,
    method: str = "exact",
    n_steps: int | None = None,
    n_max: int = N_MAX_DEFAULT,
) -> ModeState:
    """Advance every amplitude by ``t`` under the linearized flow.

    ``rk4`` uses a fixed step; by default ``max(1000, ceil(max|lambda| t / 0.01))``
    steps so the stiff high modes stay inside the accurate region.  Runs that
    would need more than ``RK4_MAX_STEPS`` raise; use ``exact`` for those.
    """
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu}")
    if not t >= 0:
        raise DomainError(f"t must be non-negative, got {t}")
    keys = list(state.amplitudes)
    if any(n > n_max for n, _ in keys):
        raise DomainError(f"mode index above n_max={n_max}")
    if not keys:
        return ModeState({}, state.t + t)
    rates = mode_rates(mu, params, {n for n, _ in keys}, big_r)
    lam = np.array([rates[n] for n, _ in keys])
    y0 = np.array([state.amplitudes[k] for k in keys])

    if method == "exact":
        y = y0 * np.exp(lam * t)
    elif method == "rk4":
        if n_steps is None:
            n_steps = max(RK4_MIN_STEPS, math.ceil(float(np.max(np.abs(lam))) * t / RK4_MAX_STEP_RATE))
        if n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if n_steps > RK4_MAX_STEPS:
            raise ConvergenceError(
                f"rk4 needs {n_steps} steps (stiff modes); use method='exact'"
            )
        y = _rk4(y0, lam, t, n_steps) if t > 0 else y0
    else:
        raise ValueError(f"unknown method {method!r}")
    return ModeState(dict(zip(keys, y.tolist())), state.t + t)


@dataclass(frozen=True)
class ZeroGroupMatrix:
    """Diagonal first-order perturbation of H restricted to its 8-dim 0-group."""

    basis: tuple[tuple[int, int], ...]
    diag: tuple[float, ...]

    def as_array(self) -> np.ndarray:
        return np.diag(self.diag)

    @property
    def trace(self) -> float:
        return float(sum(self.diag))


def zero_group_matrix(a: float) -> ZeroGroupMatrix:
    if a >= 0:
        warnings.warn(f"a = {a} is not negative; the instability argument needs a < 0",
                      RuntimeWarning, stacklevel=2)
    return ZeroGroupMatrix(ZERO_GROUP_BASIS, tuple(w * a + 0.0 for w in _ZERO_GROUP_WEIGHTS))


def zero_group_eigen_derivs(a: float) -> tuple[float, float]:
    """``(lambda_1'(0), lambda_2'(0)) = (a/2, -3a/2)`` for H (flip signs for -H)."""
    return 0.5 * a, -1.5 * a


@dataclass(frozen=True)
class StabilityVerdict:
    label: str  # "stable", "unstable" or "neutral"
    leading_rate: float
    rates: tuple[float, ...]


PERTURBATION_CLASSES = ("axisymmetric", "full")


def stability_verdict(eps: float, perturbation_class: str, a: float) -> StabilityVerdict:
    """First-order verdict on the branch point eps; rates are those of ``-H``.

    Axisymmetric perturbations only see the Y20 direction; full perturbations
    also see Y2,+-2.  At eps = 0 every rate vanishes and the verdict is
    ``neutral``.
    """
    if not a < 0:
        raise CertificateViolation(f"a = {a} must be negative")
    if perturbation_class not in PERTURBATION_CLASSES:
        raise ValueError(f"perturbation_class must be one of {PERTURBATION_CLASSES}")
    d1, d2 = zero_group_eigen_derivs(a)
    rates = (-d1 * eps,) if perturbation_class == "axisymmetric" else (-d1 * eps, -d2 * eps)
    rates = tuple(r + 0.0 for r in rates)  # no -0.0
    lead = max(rates)
    if lead > 0:
        label = "unstable"
    elif lead < 0:
        label = "stable"
    else:
        label = "neutral"
    return StabilityVerdict(label, lead, rates)


def stability_diagram(eps_max: float, a: float, samples: int = 41) -> list[dict]:
    """Rows ``(eps, axisym_rate, full_rate, verdicts)`` on a symmetric eps grid.

    ``samples`` is forced odd so eps = 0 is a grid point exactly.
    """
    if not eps_max > 0:
        raise DomainError("eps_max must be positive")
    if samples < 3:
        raise DomainError("need at least 3 samples")
    half = samples // 2
    rows = []
    for k in range(-half, half + 1):
        eps = eps_max * k / half
        ax = stability_verdict(eps, "axisymmetric", a)
        full = stability_verdict(eps, "full", a)
        rows.append({
            "eps": eps,
            "axisym_rate": ax.leading_rate,
            "full_rate": full.leading_rate,
            "axisym_verdict": ax.label,
            "full_verdict": full.label,
        })
    return rows
