"""Curve tables for the three standard service-quality plots.

``fig1``
    delay-model quality against the excess delay, one series per penalty
``fig2``
    delay-model quality against the penalty, one series per excess delay
``fig3``
    credit-model quality against the late count, one series per on-time count

Rows are written long-form, ``x  series  phi``, tab-separated under a ``#``
header so gnuplot and spreadsheet tools read them directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .credit_model import credit_phi
from .delay_model import delay_phi
from .errors import DomainError

FIGURES = ("fig1", "fig2", "fig3")


@dataclass(frozen=True)
class Curve:
    series: float
    x: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class CurveTable:
    figure: str
    x_name: str
    series_name: str
    curves: tuple[Curve, ...]

    def series(self, value) -> Curve:
        for curve in self.curves:
            if curve.series == value:
                return curve
        raise KeyError(value)

    def rows(self):
        for curve in self.curves:
            for x, y in zip(curve.x.tolist(), curve.y.tolist()):
                yield x, curve.series, y

    def to_rows_text(self):
        lines = [f"# {self.x_name}\t{self.series_name}\tphi"]
        lines += [f"{x!r}\t{s!r}\t{y!r}" for x, s, y in self.rows()]
        return "\n".join(lines) + "\n"

    def to_records_text(self):
        return "".join(
            json.dumps({"figure": self.figure, self.x_name: x, self.series_name: s, "phi": y}) + "\n"
            for x, s, y in self.rows()
        )


def grid(upper, step):
    """``0, step, ..., upper``; ``upper`` must be a whole number of steps."""
    if not (step > 0 and upper >= 0 and np.isfinite(upper)):
        raise DomainError(f"grid needs step > 0 and upper >= 0, got {upper}, {step}")
    n = round(upper / step)
    if abs(n * step - upper) > 1e-9 * max(1.0, upper):
        raise DomainError(f"{upper} is not a multiple of step {step}")
    return np.linspace(0.0, upper, n + 1)


def fig1(p_values=(1.0, 2.0), tau_max=10.0, tau_step=0.1) -> CurveTable:
    tau = grid(tau_max, tau_step)
    curves = tuple(Curve(float(p), tau, delay_phi(float(p), tau)) for p in p_values)
    return CurveTable("fig1", "tau", "p", curves)


def fig2(tau_values=(1.0, 2.0), p_max=5.0, p_step=0.05) -> CurveTable:
    p = grid(p_max, p_step)
    curves = tuple(Curve(float(t), p, delay_phi(p, float(t))) for t in tau_values)
    return CurveTable("fig2", "p", "tau", curves)


def fig3(h_values=(10, 20), l_max=40, c=1.0, p=1.0) -> CurveTable:
    if int(l_max) != l_max or l_max < 0:
        raise DomainError("l_max must be a non-negative integer")
    if c < 0 or p < 0 or c + p <= 0:
        raise DomainError("credits and penalty must be >= 0 and not both zero")
    l = np.arange(int(l_max) + 1, dtype=float)
    curves = []
    for h in h_values:
        if int(h) != h or h < 0 or (h == 0 and l_max == 0):
            raise DomainError(f"on-time count must be a non-negative integer, got {h}")
        xs = l[1:] if h == 0 else l
        curves.append(Curve(int(h), xs, np.asarray(credit_phi(c, p, float(h), xs), dtype=float)))
    return CurveTable("fig3", "l", "h", tuple(curves))


def curves_command(figure: str, **params) -> CurveTable:
    builders = {"fig1": fig1, "fig2": fig2, "fig3": fig3}
    if figure not in builders:
        raise DomainError(f"figure must be one of {FIGURES}, got {figure!r}")
    return builders[figure](**params)
