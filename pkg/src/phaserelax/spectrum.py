"""Analytic time power spectrum of the rotating wave packets and derived observables.

The double spin sum is rewritten as a sum over spin differences k = J - J'.
For fixed angle the products ``a_J a_{J+k}`` with
``a_J = (2J+1) sqrt(W(J)) P_J(cos theta)`` are accumulated once; every
observable is then a k-weighted sum of these lag products, so the result is
real by construction (diagonal plus twice the real part over ordered pairs).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .model import (
    DomainError,
    ModelParams,
    ValidityWarning,
    as_angle_grid,
    as_time_grid,
    legendre_table,
    spin_window,
)

DEG = math.pi / 180.0


@dataclass
class PowerSpectrum:
    """P(t, theta) on a (time, angle) grid; ``values[i, j]`` is at ``times[i]``, ``angles[j]``."""

    params: ModelParams
    angles: np.ndarray
    times: np.ndarray
    values: np.ndarray
    norm_A: float
    mean_sigma: np.ndarray

    @property
    def ratio(self) -> np.ndarray:
        """A P(t, theta) / <sigma(theta)>, the quantity plotted against angle and time."""
        return self.norm_A * self.values / self.mean_sigma[None, :]

    def time_index(self, t: float) -> int:
        idx = int(np.argmin(np.abs(self.times - t)))
        if not math.isclose(self.times[idx], t, rel_tol=1e-9, abs_tol=1e-12):
            raise DomainError(f"t={t} is not on the spectrum time grid")
        return idx


@dataclass
class CorrelationFunction:
    """Normalized energy autocorrelation C(eps, theta)/C(0, theta); ``values[i, j]`` at ``epsilons[i]``, ``angles[j]``."""

    angles: np.ndarray
    epsilons: np.ndarray
    values: np.ndarray


def _amplitudes(params: ModelParams, theta) -> np.ndarray:
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    if np.any(th < 0) or np.any(th > math.pi):
        raise DomainError("theta must lie in [0, pi]")
    J = params.spins
    w = np.sqrt(spin_window(J, params))
    P = legendre_table(params.jmax, np.cos(th))
    return ((2 * J + 1) * w)[:, None] * P


def lag_products(params: ModelParams, theta) -> np.ndarray:
    """S_k(theta) = sum_J a_J a_{J+k} for k = 0..j_max; shape (j_max+1, n_theta)."""
    a = _amplitudes(params, theta)
    n = a.shape[0]
    S = np.empty_like(a)
    for k in range(n):
        S[k] = np.sum(a[: n - k] * a[k:], axis=0)
    return S


def _check_times(params: ModelParams, t) -> np.ndarray:
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt < 0):
        raise DomainError("t must be non-negative")
    if params.level_spacing is not None and np.any(tt >= 1.0 / params.level_spacing):
        warnings.warn(
            "t >= 1/D: the continuum approximation behind the spectrum is no longer valid",
            ValidityWarning,
            stacklevel=3,
        )
    return tt


def _time_weights(params: ModelParams, t: np.ndarray) -> np.ndarray:
    k = np.arange(params.jmax + 1)
    tt = t[:, None]
    w = 2.0 * np.exp(-params.beta * k * tt) * np.cos((params.phi - params.omega * tt) * k)
    w[:, 0] = 1.0
    return np.exp(-params.gamma * tt) * w


def power_spectrum(params: ModelParams, t, theta):
    """Time power spectrum P(t, theta) with unit proportionality constant.

    Scalar ``t`` and ``theta`` give a float; otherwise the result has shape
    ``(len(t), len(theta))``.
    """
    scalar = np.ndim(t) == 0 and np.ndim(theta) == 0
    tt = _check_times(params, t)
    out = _time_weights(params, tt) @ lag_products(params, theta)
    return float(out[0, 0]) if scalar else out


def _sigma_weights(params: ModelParams) -> np.ndarray:
    k = np.arange(params.jmax + 1)
    g = params.gamma + params.beta * k
    w = 2.0 * np.real(np.exp(1j * params.phi * k) / (g + 1j * params.omega * k))
    w[0] = 1.0 / params.gamma
    return w


def _corr_weights(params: ModelParams, eps: np.ndarray) -> np.ndarray:
    k = np.arange(params.jmax + 1)[None, :]
    e = eps[:, None]
    g = params.gamma + params.beta * k
    half = 0.5 * (1.0 / (g + 1j * (params.omega * k - e)) + 1.0 / (g + 1j * (params.omega * k + e)))
    w = 2.0 * np.real(np.exp(1j * params.phi * k) * half)
    w[:, 0] = params.gamma / (params.gamma**2 + eps**2)
    return w


def _quad_cos_transform(params: ModelParams, theta: float, eps: float) -> float:
    """Adaptive quadrature of int_0^inf cos(eps t) P(t, theta) dt, split into quarter-period segments."""
    S = lag_products(params, theta)[:, 0]

    def f(t):
        return math.cos(eps * t) * float(_time_weights(params, np.array([t]))[0] @ S)

    t_hi = 60.0 / params.gamma
    step = params.period / 8.0
    if eps > 0:
        step = min(step, math.pi / (2.0 * eps))
    edges = np.arange(0.0, t_hi + step, step)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-11, limit=200)
        total += val
    return total


def mean_cross_section(params: ModelParams, theta, method: str = "closed"):
    """Energy-averaged cross section, the time integral of P(t, theta) over t >= 0."""
    if method == "quad":
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        _amplitudes(params, th)
        out = np.array([_quad_cos_transform(params, x, 0.0) for x in th])
    elif method == "closed":
        out = _sigma_weights(params) @ lag_products(params, theta)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(out[0]) if np.ndim(theta) == 0 else out


def normalization_constant(params: ModelParams) -> float:
    """Constant A such that A P(0, 0) / <sigma(0)> = 1."""
    return mean_cross_section(params, 0.0) / power_spectrum(params, 0.0, 0.0)


def autocorrelation(params: ModelParams, epsilon, theta, method: str = "closed"):
    """C(eps, theta)/C(0, theta): cosine half-Fourier transform of P over <sigma>.

    Scalars give a float; otherwise shape ``(len(epsilon), len(theta))``.
    """
    eps = np.atleast_1d(np.asarray(epsilon, dtype=float))
    if np.any(eps < 0):
        raise DomainError("epsilon must be non-negative")
    sigma = np.atleast_1d(mean_cross_section(params, theta))
    if method == "closed":
        num = _corr_weights(params, eps) @ lag_products(params, theta)
    elif method == "quad":
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        num = np.array([[_quad_cos_transform(params, x, e) for x in th] for e in eps])
        sigma = np.atleast_1d(mean_cross_section(params, theta, method="quad"))
    else:
        raise ValueError(f"unknown method {method!r}")
    out = num / sigma[None, :]
    return float(out[0, 0]) if np.ndim(epsilon) == 0 and np.ndim(theta) == 0 else out


def spectrum_grid(params: ModelParams, times, angles, norm_A: float | None = None) -> PowerSpectrum:
    """Fill P on a grid. ``norm_A`` defaults to this parameter set's own constant."""
    tt = as_time_grid(times)
    th = as_angle_grid(angles)
    S = lag_products(params, th)
    _check_times(params, tt)
    values = _time_weights(params, tt) @ S
    A = normalization_constant(params) if norm_A is None else float(norm_A)
    return PowerSpectrum(params, th, tt, values, A, _sigma_weights(params) @ S)


def correlation_function(params: ModelParams, epsilons, angles) -> CorrelationFunction:
    eps = np.atleast_1d(np.asarray(epsilons, dtype=float))
    th = as_angle_grid(angles)
    return CorrelationFunction(th, eps, autocorrelation(params, eps, th))


def _local_minima(v: np.ndarray) -> np.ndarray:
    return np.flatnonzero((v[1:-1] < v[:-2]) & (v[1:-1] <= v[2:])) + 1


def _local_maxima(v: np.ndarray) -> np.ndarray:
    return np.flatnonzero((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])) + 1


def fringe_contrast(
    ps: PowerSpectrum,
    t: float,
    theta_lo: float = 150.0 * DEG,
    theta_hi: float = 179.9 * DEG,
) -> float:
    """Visibility of the deepest interference minimum of A P/<sigma> inside an angular window.

    Returns (mean(P_a, P_b) - P_min) / (mean(P_a, P_b) + P_min), where P_a, P_b
    are the maxima reached walking uphill from the minimum (clipped to the
    window), or 0 when the window has no interior local minimum.
    """
    if not 0 <= theta_lo < theta_hi <= math.pi:
        raise DomainError("need 0 <= theta_lo < theta_hi <= pi")
    tol = 1e-9
    mask = (ps.angles >= theta_lo - tol) & (ps.angles <= theta_hi + tol)
    th = ps.angles[mask]
    if th.size < 3 or np.max(np.diff(th)) > 0.2 * DEG + 1e-9:
        raise DomainError("angular sampling inside the window must be 0.2 deg or finer")
    v = ps.ratio[ps.time_index(t), mask]
    minima = _local_minima(v)
    if minima.size == 0:
        return 0.0
    i = int(minima[np.argmin(v[minima])])
    lo = i
    while lo > 0 and v[lo - 1] >= v[lo]:
        lo -= 1
    hi = i
    while hi < v.size - 1 and v[hi + 1] >= v[hi]:
        hi += 1
    top = 0.5 * (v[lo] + v[hi])
    return float((top - v[i]) / (top + v[i]))


def angular_width(ps: PowerSpectrum, t: float, clip: float = 3.0) -> float:
    """RMS angular width (rad) of the dominant rotating packet at time t.

    The density is P(t, theta) sin(theta), i.e. per unit polar angle. When
    the maximum sits on theta = 0 or pi the two counter-rotating packets
    coincide and the density is mirrored across that pole; otherwise the
    packet is measured on [0, pi]. The second moment is taken about the
    centroid inside an iteratively clipped window of +-``clip`` widths,
    which keeps the flat incoherent background from dominating.
    """
    row = ps.values[ps.time_index(t)]
    th = ps.angles
    i_max = int(np.argmax(row))
    dens = row * np.sin(th)
    on_pole = i_max in (0, th.size - 1) and th[i_max] in (0.0, math.pi)
    if on_pole and i_max == 0:
        x = np.concatenate([-th[:0:-1], th])
        w = np.concatenate([dens[:0:-1], dens])
        v = np.concatenate([row[:0:-1], row])
    elif on_pole:
        x = np.concatenate([th, 2 * math.pi - th[-2::-1]])
        w = np.concatenate([dens, dens[-2::-1]])
        v = np.concatenate([row, row[-2::-1]])
    else:
        x, w, v = th, dens, row
    centre = th[i_max]
    lo, hi = centre - math.pi / 2, centre + math.pi / 2
    mu = s = float("nan")
    for _ in range(200):
        m = (x >= lo) & (x <= hi)
        ww = w[m]
        mu = float(np.sum(ww * x[m]) / np.sum(ww))
        s = float(math.sqrt(np.sum(ww * (x[m] - mu) ** 2) / np.sum(ww)))
        new_lo, new_hi = mu - clip * s, mu + clip * s
        if abs(new_lo - lo) < 1e-12 and abs(new_hi - hi) < 1e-12:
            break
        lo, hi = new_lo, new_hi
    if not on_pole and (mu - clip * s < 0.0 or mu + clip * s > math.pi):
        raise DomainError("packet overlaps its mirror image; centroid is ambiguous")
    # a second peak of comparable height inside the window means two packets
    m = (x >= mu - clip * s) & (x <= mu + clip * s)
    peaks = _local_maxima(v)
    rival = peaks[m[peaks] & (np.abs(x[peaks] - centre) > 1e-9) & (v[peaks] >= 0.3 * row[i_max])]
    if rival.size:
        raise DomainError("two packets of comparable height overlap; centroid is ambiguous")
    return s
