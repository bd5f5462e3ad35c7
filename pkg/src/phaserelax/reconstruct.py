"""Time power spectra from excitation functions.

Three estimators of the delayed decay amplitude P(t, theta), all plain
direct sums over the energy samples (kernel exp(-i E t)):

* from the complex amplitude f(E) itself,
* from the cross-section fluctuation sigma - <sigma> (direct part dominant),
* from the trend-removed cross section divided by sqrt(sigma_d), with the
  linear direct phase absorbed as a clock shift t -> t - t_dir.

Outputs have arbitrary overall scale; compare them after peak normalization.
The time resolution is 1/I for an energy window I (hbar = 1).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .ensemble import ExcitationFunction, parse_comment_header
from .model import DomainError

# Direct contribution above which sigma - <sigma> is dominated by the interference term.
DOMINANT_DIRECT_FRACTION = 0.7


class AliasWarning(UserWarning):
    """Requested time close to the pi/delta_E alias bound."""


@dataclass
class TimeAmplitude:
    theta: float
    times: np.ndarray
    values: np.ndarray
    resolution: float
    source: str
    t_dir: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.values) ** 2


@dataclass
class TrendFit:
    """Least-squares polynomial in (E - E_bar); ``coefficients`` in increasing powers."""

    order: int
    coefficients: np.ndarray
    smooth: np.ndarray
    residual: np.ndarray
    e_bar: float


def amplitude_transform(energies, values, times) -> np.ndarray:
    """delta_E sum_n exp(-i E_n t) values_n for each t, summed in ascending energy."""
    E = np.asarray(energies, dtype=float)
    t = np.atleast_1d(np.asarray(times, dtype=float))
    de = E[1] - E[0]
    return de * (np.exp(-1j * np.outer(t, E)) @ np.asarray(values))


def _check_alias(times: np.ndarray, delta_e: float) -> None:
    bound = math.pi / delta_e
    if np.any(times > bound * (1 + 1e-12)):
        raise DomainError(f"times beyond the alias bound pi/delta_E = {bound:.4g}")
    if np.any(times > 0.9 * bound):
        warnings.warn("times within 10% of the alias bound pi/delta_E", AliasWarning, stacklevel=3)


def _times(times) -> np.ndarray:
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.ndim != 1 or np.any(np.diff(t) <= 0):
        raise DomainError("time grid must be strictly increasing")
    return t


def reconstruct_from_amplitude(xf: ExcitationFunction, times) -> TimeAmplitude:
    if xf.amplitude is None:
        raise DomainError("excitation function carries no complex amplitude")
    t = _times(times)
    if np.any(t < 0):
        raise DomainError("times must be non-negative")
    _check_alias(t, xf.delta_e)
    vals = amplitude_transform(xf.energies, xf.amplitude, t)
    return TimeAmplitude(xf.theta, t, vals, 1.0 / xf.width, "from_amplitude")


def reconstruct_from_fluctuation(xf: ExcitationFunction, times, mean_sigma=None) -> TimeAmplitude:
    """Transform of sigma - <sigma>; valid for t > 0 when the direct part dominates.

    ``mean_sigma`` is a scalar or per-energy series; defaults to the window mean.
    """
    t = _times(times)
    if np.any(t <= 0):
        raise DomainError("the fluctuation transform holds only for t > 0")
    _check_alias(t, xf.delta_e)
    ms = np.mean(xf.sigma) if mean_sigma is None else mean_sigma
    vals = amplitude_transform(xf.energies, xf.sigma - ms, t)
    meta = {}
    if "direct_fraction" in xf.meta:
        frac = float(xf.meta["direct_fraction"])
        meta = {"direct_fraction": frac, "direct_dominant": frac >= DOMINANT_DIRECT_FRACTION}
    return TimeAmplitude(xf.theta, t, vals, 1.0 / xf.width, "from_fluctuation", meta=meta)


def trend_order(width: float, i_d: float) -> int:
    return int(math.floor(width / i_d + 1e-12)) + 1


def detrend(xf: ExcitationFunction, i_d: float, order: int | None = None) -> TrendFit:
    """Best polynomial fit of sigma(E) of order [I/I_d] + 1 (or ``order`` when given)."""
    if i_d <= 0:
        raise DomainError("i_d must be positive")
    if i_d > xf.width * (1 + 1e-12):
        raise DomainError("i_d must not exceed the energy window")
    if order is None:
        order = trend_order(xf.width, i_d)
    if xf.sigma.size <= order + 1:
        raise DomainError(f"polynomial of order {order} is underdetermined on {xf.sigma.size} points")
    x = xf.energies - xf.e_bar
    half = 0.5 * xf.width
    V = np.vander(x / half, order + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(V, xf.sigma, rcond=None)
    smooth = V @ coef
    return TrendFit(order, coef / half ** np.arange(order + 1), smooth, xf.sigma - smooth, xf.e_bar)


def _sigma_d(xf: ExcitationFunction, sigma_d) -> np.ndarray:
    sd = np.broadcast_to(np.asarray(sigma_d, dtype=float), xf.sigma.shape)
    if np.any(sd <= 0):
        raise DomainError("sigma_d must be positive")
    return sd


def reconstruct_general(xf: ExcitationFunction, trend: TrendFit, sigma_d, t_dir: float, times) -> TimeAmplitude:
    """Transform of (sigma - smooth)/sqrt(sigma_d), re-indexed to the delayed clock t' = t - t_dir.

    ``times`` are transform times and must exceed ``t_dir``.
    """
    t = _times(times)
    if np.any(t <= t_dir):
        raise DomainError("transform times must exceed t_dir")
    _check_alias(t, xf.delta_e)
    sd = _sigma_d(xf, sigma_d)
    vals = amplitude_transform(xf.energies, (xf.sigma - trend.smooth) / np.sqrt(sd), t)
    meta = {"trend_order": trend.order, "e_bar": trend.e_bar}
    return TimeAmplitude(xf.theta, t - t_dir, vals, 1.0 / xf.width, "general", t_dir=t_dir, meta=meta)


def sigma_fl_average(xf: ExcitationFunction, trend: TrendFit, sigma_d) -> float:
    """Energy-averaged delayed cross section, mean(smooth - sigma_d)."""
    sd = np.broadcast_to(np.asarray(sigma_d, dtype=float), xf.sigma.shape)
    val = float(np.mean(trend.smooth - sd))
    if val < -1e-6 * float(np.mean(xf.sigma)):
        warnings.warn("negative <sigma_fl>: sigma_d inconsistent with the trend", UserWarning, stacklevel=2)
    return val


def ideal_reconstruction(xf: ExcitationFunction, times) -> TimeAmplitude:
    """Amplitude transform of the pure fluctuating part of synthetic data."""
    if xf.fluct is None:
        raise DomainError("needs synthetic data with the direct amplitude retained")
    pure = ExcitationFunction(xf.theta, xf.e_min, xf.delta_e, np.abs(xf.fluct) ** 2, xf.fluct)
    return reconstruct_from_amplitude(pure, times)


def peak_normalized(power: np.ndarray) -> np.ndarray:
    m = np.max(power)
    return power / m if m > 0 else np.zeros_like(power)


def nrmse(estimate: np.ndarray, truth: np.ndarray) -> float:
    """RMS difference of the two peak-normalized curves."""
    return float(np.sqrt(np.mean((peak_normalized(estimate) - peak_normalized(truth)) ** 2)))


@dataclass
class FringeMinimum:
    t_min: float
    p_min: float
    p_left: float
    p_right: float

    @property
    def depth(self) -> float:
        """Height of the lower flanking maximum above the minimum."""
        return min(self.p_left, self.p_right) - self.p_min


def fringe_minimum(times: np.ndarray, power: np.ndarray, t_lo: float, t_hi: float) -> FringeMinimum | None:
    """Deepest interior local minimum of ``power`` within [t_lo, t_hi] and its flanking maxima."""
    m = np.flatnonzero((times >= t_lo) & (times <= t_hi))
    if m.size < 3:
        return None
    v = power
    cand = [i for i in m[1:-1] if v[i] < v[i - 1] and v[i] <= v[i + 1]]
    if not cand:
        return None
    i = min(cand, key=lambda j: v[j])
    lo = i
    while lo > 0 and v[lo - 1] >= v[lo]:
        lo -= 1
    hi = i
    while hi < v.size - 1 and v[hi + 1] >= v[hi]:
        hi += 1
    return FringeMinimum(float(times[i]), float(v[i]), float(v[lo]), float(v[hi]))


def write_time_amplitude(path, ta: TimeAmplitude, period: float) -> None:
    head = (
        f"# theta_deg={math.degrees(ta.theta)!r} I={1.0 / ta.resolution!r} "
        f"resolution={ta.resolution!r} t_dir={ta.t_dir!r} source={ta.source}"
    )
    with open(path, "w", newline="") as fh:
        fh.write(head + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_invMeV", "t_over_T", "re_P", "im_P", "absP2"])
        for t, v in zip(ta.times, ta.values):
            w.writerow([repr(float(t)), repr(float(t / period)), repr(float(v.real)), repr(float(v.imag)), repr(float(abs(v) ** 2))])


def read_time_amplitude(path) -> TimeAmplitude:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if ln.strip()]
    meta: dict = {}
    for ln in lines:
        if ln.startswith("#"):
            meta.update(parse_comment_header(ln))
    reader = csv.reader([ln for ln in lines if not ln.startswith("#")])
    cols = next(reader)
    if cols != ["t_invMeV", "t_over_T", "re_P", "im_P", "absP2"]:
        raise DomainError(f"{path}: unexpected time-amplitude columns")
    rows = np.array([[float(x) for x in r] for r in reader])
    return TimeAmplitude(
        math.radians(float(meta.get("theta_deg", 180.0))),
        rows[:, 0],
        rows[:, 2] + 1j * rows[:, 3],
        float(meta.get("resolution", "nan")),
        meta.get("source", "general"),
        float(meta.get("t_dir", 0.0)),
    )
