"""Delay-based service quality.

A request delivered ``tau`` days after the agreed day under a penalty of
``p`` points per day scores ``1 + p * exp(-p * tau)``.  The score lives in
``[1, 1 + p]``: it is maximal for on-time delivery and decays towards 1 as
the delay grows.

The slope in ``p`` is ``(1 - p*tau) exp(-p*tau)``, not ``(1 - p**2)
exp(-p*tau)``; the two only coincide when ``tau == p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, NoScorableRequestsError

__all__ = [
    "DelayParams",
    "DelayQuality",
    "DelaySensitivity",
    "average_quality",
    "delay_phi",
    "delay_quality",
    "delay_sensitivity",
    "delay_variation",
]


def _check_domain(p, tau):
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(tau))):
        raise DomainError("p and tau must be finite")
    if np.any(np.asarray(p) < 0):
        raise DomainError(f"penalty per day must be >= 0, got {p}")
    if np.any(np.asarray(tau) < 0):
        raise DomainError(f"excess delay must be >= 0, got {tau}")


@dataclass(frozen=True)
class DelayParams:
    p: float
    tau: float

    def __post_init__(self):
        _check_domain(self.p, self.tau)


@dataclass(frozen=True)
class DelayQuality:
    phi: float
    phi_max: float
    phi_min: float = 1.0


@dataclass(frozen=True)
class DelaySensitivity:
    d_phi_d_p: float
    d_phi_d_tau: float


def delay_phi(p, tau):
    """Vectorised score; broadcasts ``p`` against ``tau``.

    Returns a float for scalar input and an ndarray otherwise.
    """
    _check_domain(p, tau)
    p = np.asarray(p, dtype=float)
    tau = np.asarray(tau, dtype=float)
    out = 1.0 + p * np.exp(-p * tau)
    return float(out) if out.ndim == 0 else out


def delay_quality(params: DelayParams) -> DelayQuality:
    p, tau = params.p, params.tau
    return DelayQuality(phi=1.0 + p * math.exp(-p * tau), phi_max=1.0 + p, phi_min=1.0)


def average_quality(scores: Sequence[float]) -> float:
    """Mean score over all requests considered."""
    values = np.asarray(scores, dtype=float)
    if values.size == 0:
        raise NoScorableRequestsError("cannot average an empty set of scores")
    # fsum keeps the mean inside [min, max] even for long, nearly constant runs
    mean = math.fsum(values.tolist()) / values.size
    return min(max(mean, float(values.min())), float(values.max()))


def delay_sensitivity(params: DelayParams) -> DelaySensitivity:
    p, tau = params.p, params.tau
    decay = math.exp(-p * tau)
    return DelaySensitivity(d_phi_d_p=(1.0 - p * tau) * decay, d_phi_d_tau=-p * p * decay)


def delay_variation(params: DelayParams, delta_p: float, delta_tau: float) -> float:
    """First-order change in the score for a perturbation ``(delta_p, delta_tau)``."""
    try:
        _check_domain(params.p + delta_p, params.tau + delta_tau)
    except DomainError as exc:
        raise DomainError(f"perturbed point leaves the domain: {exc}") from None
    sens = delay_sensitivity(params)
    return sens.d_phi_d_p * delta_p + sens.d_phi_d_tau * delta_tau
