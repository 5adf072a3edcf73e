"""Credit-based service quality.

Each on-time request earns ``c`` credits and each late request costs ``p``
penalty points.  Over ``h`` on-time and ``l`` late requests the score is::

    phi = (c*h - p*l) / ((c + p) * (h + l))

which ranges over ``[-p/(c+p), c/(c+p)]``.  Its partial derivatives in the
counts, ``l/(h+l)**2`` and ``-h/(h+l)**2``, do not involve ``c`` or ``p``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NoScorableRequestsError, ParameterError

__all__ = [
    "CreditExtrema",
    "CreditParams",
    "CreditQuality",
    "CreditSensitivity",
    "ServedCounts",
    "credit_extrema",
    "credit_phi",
    "credit_quality",
    "credit_sensitivity",
    "credit_variation",
]


@dataclass(frozen=True)
class CreditParams:
    c: float
    p: float

    def __post_init__(self):
        if self.c < 0 or self.p < 0:
            raise ParameterError(f"credits and penalty must be >= 0, got c={self.c}, p={self.p}")
        if self.c + self.p <= 0:
            raise ParameterError("credits and penalty cannot both be zero")


@dataclass(frozen=True)
class ServedCounts:
    h: int
    l: int

    def __post_init__(self):
        if self.h < 0 or self.l < 0:
            raise DomainError(f"counts must be >= 0, got h={self.h}, l={self.l}")

    @property
    def total(self):
        return self.h + self.l

    def __add__(self, other):
        return ServedCounts(self.h + other.h, self.l + other.l)


@dataclass(frozen=True)
class CreditQuality:
    phi: float
    phi_max: float
    phi_min: float


@dataclass(frozen=True)
class CreditSensitivity:
    d_phi_d_h: float
    d_phi_d_l: float


class CreditExtrema(NamedTuple):
    phi_min: float
    phi_max: float
    argmax: str
    argmin: str


def credit_phi(c, p, h, l):
    """Score on the continuous relaxation: ``h`` and ``l`` may be real or arrays.

    Evaluated as an offset from whichever bound is nearer, which is the same
    rational function but lands exactly on the bounds when ``l == 0`` or
    ``h == 0`` and never crosses them under rounding.  Plain arithmetic only,
    so ``Fraction`` inputs give exact results.
    """
    if c + p <= 0:
        raise ParameterError("credits and penalty cannot both be zero")
    n = h + l
    if np.any(np.asarray(n) <= 0):
        raise NoScorableRequestsError()
    if np.ndim(n) == 0:
        top = c / (c + p)
        if isinstance(top, Fraction):
            # keep integer counts rational too
            h, l, n = Fraction(h), Fraction(l), Fraction(n)
        if l <= h:
            return top - l / n
        return -p / (c + p) + h / n
    h, l = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(l, dtype=float))
    return np.where(l <= h, c / (c + p) - l / n, -p / (c + p) + h / n)


def credit_quality(params: CreditParams, counts: ServedCounts) -> CreditQuality:
    c, p = params.c, params.p
    return CreditQuality(
        phi=credit_phi(c, p, counts.h, counts.l),
        phi_max=c / (c + p),
        phi_min=-p / (c + p),
    )


def _sensitivity(h, l):
    n = h + l
    if n <= 0:
        raise NoScorableRequestsError()
    return CreditSensitivity(d_phi_d_h=l / (n * n), d_phi_d_l=-h / (n * n))


def credit_sensitivity(counts: ServedCounts) -> CreditSensitivity:
    return _sensitivity(counts.h, counts.l)


def credit_variation(counts: ServedCounts, delta_h: float, delta_l: float) -> float:
    """First-order change in the score when the counts move by ``(delta_h, delta_l)``."""
    h2, l2 = counts.h + delta_h, counts.l + delta_l
    if h2 < 0 or l2 < 0 or h2 + l2 <= 0:
        raise DomainError(f"perturbed counts ({h2}, {l2}) are not scorable")
    sens = credit_sensitivity(counts)
    return sens.d_phi_d_h * delta_h + sens.d_phi_d_l * delta_l


def credit_extrema(params: CreditParams) -> CreditExtrema:
    """Bounds of the score and the configurations attaining them.

    The score increases in ``h`` and decreases in ``l``, so the maximum is
    reached exactly when nothing is late and the minimum exactly when nothing
    is on time.
    """
    c, p = params.c, params.p
    return CreditExtrema(
        phi_min=-p / (c + p),
        phi_max=c / (c + p),
        argmax="L = 0",
        argmin="H = 0",
    )
