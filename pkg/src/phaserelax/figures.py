"""Curves and summary metrics for the three reference figures.

All three parameter sets share the normalization constant of the first
(reference) set.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .model import REFERENCE_SETS, ModelParams, reference_params
from .reconstruct import fringe_minimum
from .spectrum import DEG, autocorrelation, fringe_contrast, normalization_constant, spectrum_grid

FIG1_FRACTIONS = (3 / 8, 7 / 16, 1 / 2, 5 / 8)
FIG_ANGLE_DEG = 170.6
BACK_DEG = 180.0


@dataclass
class Check:
    name: str
    value: float
    bound: str
    passed: bool

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.value:.6g} ({self.bound})"


@dataclass
class FigureData:
    """Curves keyed by panel label; each value is (x, {set label: y})."""

    name: str
    x_label: str
    panels: dict
    metrics: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)


def set_label(beta: float, d: float) -> str:
    return f"beta={beta:g},d={d:g}"


def reference_sets() -> list[ModelParams]:
    return [reference_params(beta, d) for beta, d in REFERENCE_SETS]


def max_pairwise(curves) -> float:
    """Largest |y_i - y_j| over all pairs of curves and all sample points."""
    return max(float(np.max(np.abs(a - b))) for a, b in itertools.combinations(curves, 2))


def fig1(step_deg: float = 0.1) -> FigureData:
    """A P / <sigma> against angle at t = 3T/8, 7T/16, T/2, 5T/8."""
    sets = reference_sets()
    A = normalization_constant(sets[0])
    T = sets[0].period
    n = int(round(180.0 / step_deg))
    theta = np.linspace(0.0, math.pi, n + 1)
    times = np.array(FIG1_FRACTIONS) * T
    grids = [spectrum_grid(p, times, theta, norm_A=A) for p in sets]
    panels = {}
    for i, frac in enumerate(FIG1_FRACTIONS):
        panels[f"t={frac:g}T"] = (theta / DEG, {set_label(p.beta, p.d): g.ratio[i] for p, g in zip(sets, grids)})
    contrast = [fringe_contrast(g, T / 2) for g in grids]
    diffs = {k: max_pairwise(list(v[1].values())) for k, v in panels.items()}
    out = FigureData("fig1", "theta_deg", panels, {"A": A, "contrast_T/2": contrast, "max_pairwise": diffs})
    out.checks.append(
        Check(
            "fig1 contrast at T/2 decreases with beta",
            contrast[0] - max(contrast[1:]),
            f"contrasts {', '.join(f'{c:.4f}' for c in contrast)} strictly decreasing",
            contrast[0] > contrast[1] > contrast[2],
        )
    )
    ref = diffs["t=0.5T"]
    for key in ("t=0.375T", "t=0.625T"):
        r = diffs[key] / ref
        out.checks.append(Check(f"fig1 pairwise spread {key} / T/2", r, "< 0.25", r < 0.25))
    return out


def fig2(dt_over_T: float = 1e-3) -> FigureData:
    """A P / <sigma> against time on [0, 1.5T] at 180 and 170.6 degrees."""
    sets = reference_sets()
    A = normalization_constant(sets[0])
    T = sets[0].period
    n = int(round(1.5 / dt_over_T))
    times = np.linspace(0.0, 1.5 * T, n + 1)
    theta = np.array([FIG_ANGLE_DEG, BACK_DEG]) * DEG
    grids = [spectrum_grid(p, times, theta, norm_A=A) for p in sets]
    panels = {}
    for j, deg in enumerate((FIG_ANGLE_DEG, BACK_DEG)):
        panels[f"theta={deg:g}"] = (times / T, {set_label(p.beta, p.d): g.ratio[:, j] for p, g in zip(sets, grids)})
    minima = []
    for y in panels[f"theta={FIG_ANGLE_DEG:g}"][1].values():
        fm = fringe_minimum(times, y, T / 2 - T / 16, T / 2 + T / 16)
        minima.append(float("nan") if fm is None else fm.p_min)
    spread_fig = max_pairwise(list(panels[f"theta={FIG_ANGLE_DEG:g}"][1].values()))
    spread_back = max_pairwise(list(panels[f"theta={BACK_DEG:g}"][1].values()))
    out = FigureData(
        "fig2",
        "t_over_T",
        panels,
        {"A": A, "min_near_T/2": minima, "spread_170.6": spread_fig, "spread_180": spread_back},
    )
    out.checks.append(
        Check(
            "fig2 minimum near T/2 at 170.6 deeper for smaller beta",
            minima[1] - minima[0],
            f"minima {', '.join(f'{m:.4f}' for m in minima)} strictly increasing",
            bool(np.all(np.isfinite(minima))) and minima[0] < minima[1] < minima[2],
        )
    )
    r = spread_back / spread_fig
    out.checks.append(Check("fig2 pairwise spread 180 / 170.6", r, "< 0.25", r < 0.25))
    return out


def fig3(step_mev: float = 0.01) -> FigureData:
    """C(eps, theta)/C(0, theta) on eps in [0, 8] MeV at 180 and 170.6 degrees."""
    sets = reference_sets()
    eps = np.linspace(0.0, 8.0, int(round(8.0 / step_mev)) + 1)
    theta = np.array([FIG_ANGLE_DEG, BACK_DEG]) * DEG
    C = [autocorrelation(p, eps, theta) for p in sets]
    panels = {}
    for j, deg in enumerate((FIG_ANGLE_DEG, BACK_DEG)):
        panels[f"theta={deg:g}"] = (eps, {set_label(p.beta, p.d): c[:, j] for p, c in zip(sets, C)})
    band = eps >= 4.0 - 1e-12
    d_fig = float(np.max(np.abs(C[0][band, 0] - C[2][band, 0])))
    d_back = float(np.max(np.abs(C[0][band, 1] - C[2][band, 1])))
    out = FigureData("fig3", "eps_MeV", panels, {"maxdiff_4_8_170.6": d_fig, "maxdiff_4_8_180": d_back})
    out.checks.append(Check("fig3 max|C1-C3| on [4,8] MeV at 170.6", d_fig, "in [0.3, 0.5]", 0.3 <= d_fig <= 0.5))
    out.checks.append(
        Check("fig3 same at 180 smaller by factor >= 2", d_fig / d_back, ">= 2", d_fig >= 2.0 * d_back)
    )
    return out


FIGURES = {"fig1": fig1, "fig2": fig2, "fig3": fig3}
