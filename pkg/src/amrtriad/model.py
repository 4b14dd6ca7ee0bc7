"""Resistance-reversal population model: vector field, noise, thresholds, equilibria.

The resistant population ``R`` lives on ``(0, N)``; the sensitive population is
``N - R``. All rates are per day.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, replace

import numpy as np


class ModelError(ValueError):
    """Base class for invalid parameters or arguments."""


class ParameterError(ModelError):
    pass


class DomainError(ModelError):
    pass


class NoEquilibriumError(ModelError):
    """The requested interior equilibrium / persistence level does not exist."""


class Regime(str, enum.Enum):
    EXTINCTION = "Extinction"
    PERSISTENCE = "Persistence"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class ModelParams:
    """Rate constants of the model.

    Defaults are the E. coli / colistin values with ``gamma = 0``.
    """

    N: float = 1e6
    mu: float = 0.1
    beta: float = 5e-7
    gamma: float = 0.0
    epsilon: float = 1e-6
    sigma: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.N <= 0:
            raise ParameterError(f"N must be > 0, got {self.N}")
        if self.beta <= 0:
            raise ParameterError(f"beta must be > 0, got {self.beta}")
        for name in ("mu", "gamma", "epsilon", "sigma"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.mu + self.gamma <= 0:
            raise ParameterError("mu + gamma must be > 0 (thresholds divide by it)")
        if not 0 < self.alpha <= 1:
            raise ParameterError(f"alpha must lie in (0, 1], got {self.alpha}")

    @property
    def loss_rate(self) -> float:
        """Total per-capita removal rate ``gamma + mu``."""
        return self.gamma + self.mu

    def with_(self, **changes) -> ModelParams:
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ThresholdReport:
    k0_d: float
    k0_s: float
    k0_f: float
    xi_d: float | None
    xi_s: float | None
    regime_d: Regime
    regime_s: Regime
    regime_f: Regime
    # sigma^2 N <= beta: extra hypothesis of the stochastic extinction result
    sde_extinction_hypothesis: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("regime_d", "regime_s", "regime_f"):
            d[key] = d[key].value
        return d


def _regime(k0: float) -> Regime:
    if k0 > 1:
        return Regime.PERSISTENCE
    if k0 < 1:
        return Regime.EXTINCTION
    return Regime.INDETERMINATE


def functional_response(R, epsilon: float):
    """Saturating contact term ``R / (1 + epsilon R)``."""
    if epsilon < 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    if np.any(np.asarray(R) < 0):
        raise DomainError("functional_response is defined for R >= 0 only")
    return R / (1.0 + epsilon * R)


def in_domain(R, p: ModelParams) -> bool:
    """True when every value of ``R`` lies in the closed interval [0, N]."""
    R = np.asarray(R)
    return bool(np.all((R >= 0) & (R <= p.N)))


def drift(R, p: ModelParams):
    """Deterministic vector field ``beta g(R) (N - R) - (gamma + mu) R``.

    Accepts scalars or arrays. Values outside [0, N] are evaluated without
    complaint (solvers probe them); use :func:`in_domain` to flag them.
    """
    return p.beta * R / (1.0 + p.epsilon * R) * (p.N - R) - (p.gamma + p.mu) * R


def diffusion(R, p: ModelParams):
    """Noise coefficient ``sigma g(R) (N - R)`` multiplying dB."""
    return p.sigma * R / (1.0 + p.epsilon * R) * (p.N - R)


def compute_thresholds(p: ModelParams) -> ThresholdReport:
    lam = p.gamma + p.mu
    if lam <= 0:
        raise ParameterError("gamma + mu must be > 0")
    k0_d = p.beta * p.N / lam
    k0_s = p.beta * p.N / lam - p.sigma**2 * p.N**2 / (2 * lam)
    k0_f = p.beta * p.N / lam

    xi_d = equilibrium_deterministic(p) if k0_d > 1 else None
    xi_s = None
    if k0_s > 1:
        xi_s = equilibrium_stochastic(p)

    return ThresholdReport(
        k0_d=k0_d,
        k0_s=k0_s,
        k0_f=k0_f,
        xi_d=xi_d,
        xi_s=xi_s,
        regime_d=_regime(k0_d),
        regime_s=_regime(k0_s),
        regime_f=_regime(k0_f),
        sde_extinction_hypothesis=bool(k0_s < 1 and p.sigma**2 * p.N <= p.beta),
    )


def equilibrium_deterministic(p: ModelParams) -> float:
    """Interior root ``(beta N - gamma - mu) / (beta + epsilon (gamma + mu))``.

    Shared by the ODE and the Caputo model. Raises
    :class:`NoEquilibriumError` unless ``beta N > gamma + mu``.
    """
    lam = p.gamma + p.mu
    numerator = p.beta * p.N - lam
    if numerator <= 0:
        raise NoEquilibriumError(
            f"no interior equilibrium: beta*N - (gamma+mu) = {numerator:g} <= 0"
        )
    return numerator / (p.beta + p.epsilon * lam)


def _phi(R, p: ModelParams):
    return (p.N - R) / (1.0 + p.epsilon * R)


def lyapunov_sV(R, p: ModelParams):
    """Stochastic generator applied to ``ln R``.

    ``beta phi(R) - (gamma + mu) - sigma^2 phi(R)^2 / 2`` with
    ``phi(R) = (N - R) / (1 + epsilon R)``; defined on the open interval (0, N).
    """
    R_arr = np.asarray(R)
    if np.any((R_arr <= 0) | (R_arr >= p.N)):
        raise DomainError("lyapunov_sV is defined on the open interval (0, N)")
    phi = _phi(R, p)
    return p.beta * phi - (p.gamma + p.mu) - 0.5 * p.sigma**2 * phi * phi


def _lyapunov_sV_limit_at_zero(p: ModelParams) -> float:
    return p.beta * p.N - (p.gamma + p.mu) - 0.5 * p.sigma**2 * p.N**2


def persistence_level_eta(p: ModelParams) -> float:
    """Closed-form stochastic persistence level via the smaller root of
    ``beta u - (gamma+mu) - sigma^2 u^2 / 2`` and inversion of ``phi``.
    """
    lam = p.gamma + p.mu
    if p.sigma == 0:
        eta = lam / p.beta
    else:
        disc = p.beta**2 - 2 * p.sigma**2 * lam
        if disc < 0:
            raise ParameterError(f"beta^2 - 2 sigma^2 (gamma+mu) = {disc:g} < 0")
        # rationalised form of (beta - sqrt(disc)) / sigma^2; no cancellation
        eta = 2 * lam / (p.beta + math.sqrt(disc))
    return (p.N - eta) / (1.0 + p.epsilon * eta)


def equilibrium_stochastic(p: ModelParams, rtol: float = 1e-12) -> float:
    """Persistence level: the unique root of :func:`lyapunov_sV` in (0, N).

    Found by bisection on ``(delta, N - delta)`` with ``delta = 1e-12 N``.
    """
    k0_s = p.beta * p.N / p.loss_rate - p.sigma**2 * p.N**2 / (2 * p.loss_rate)
    if k0_s <= 1:
        raise NoEquilibriumError(f"no persistence level: k0_s = {k0_s:g} <= 1")
    disc = p.beta**2 - 2 * p.sigma**2 * p.loss_rate
    if disc < 0:
        raise ParameterError(f"beta^2 - 2 sigma^2 (gamma+mu) = {disc:g} < 0")

    delta = 1e-12 * p.N
    lo, hi = delta, p.N - delta
    f_lo = float(lyapunov_sV(lo, p))
    if f_lo <= 0 or float(lyapunov_sV(hi, p)) >= 0:
        raise NoEquilibriumError("lyapunov_sV has no sign change on (0, N)")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        f_mid = float(lyapunov_sV(mid, p))
        if f_mid == 0:
            return mid
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fractional_persistence_condition(p: ModelParams) -> dict:
    """Evaluate the side condition on epsilon stated for fractional persistence.

    Reported only: with epsilon measured per bacterium the upper bound
    ``epsilon < 1`` has no fixed meaning.
    """
    lam = p.loss_rate
    lower = (p.beta * p.N - lam) / (p.beta * p.N) - p.beta / lam
    return {
        "lower_bound": lower,
        "upper_bound": 1.0,
        "epsilon": p.epsilon,
        "satisfied": bool(lower < p.epsilon < 1.0),
    }
