"""Physical parameters, unit conventions, the spin window and Legendre polynomials.

Units: hbar = 1 throughout. Energies are in MeV, times in MeV^-1, angles in
radians. The rotation period is ``T = 2*pi / hbar_omega``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class ValidityWarning(UserWarning):
    """Evaluation outside the range where the model approximation holds."""


@dataclass(frozen=True)
class ModelParams:
    """Parameter set of the coherent rotation model.

    Attributes:
        phi: deflection, phase slope per unit spin (rad).
        d: J-window width (spin units).
        j_bar: mean spin.
        beta: spin phase-relaxation width (MeV).
        hbar_omega: rotational quantum (MeV).
        gamma: total decay width (MeV).
        j_max: spin-sum cutoff. Defaults to ceil(j_bar + 5 d).
        level_spacing: optional average level spacing D (MeV); only used to
            warn when t >= 1/D.
    """

    phi: float = 0.0
    d: float = 3.0
    j_bar: float = 14.0
    beta: float = 0.01
    hbar_omega: float = 1.45
    gamma: float = 0.3
    j_max: int | None = None
    level_spacing: float | None = None
    _j_max: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("phi", "d", "j_bar", "beta", "hbar_omega", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.d <= 0:
            raise DomainError("d must be positive")
        if self.j_bar < 0:
            raise DomainError("j_bar must be non-negative")
        if self.beta < 0:
            raise DomainError("beta must be non-negative")
        if self.hbar_omega <= 0:
            raise DomainError("hbar_omega must be positive")
        if self.gamma <= 0:
            raise DomainError("gamma must be positive")
        if self.level_spacing is not None and not self.level_spacing > 0:
            raise DomainError("level_spacing must be positive when given")
        default = default_j_max(self.j_bar, self.d)
        if self.j_max is None:
            j_max = default
        else:
            if int(self.j_max) != self.j_max or self.j_max < 0:
                raise DomainError("j_max must be a non-negative integer")
            j_max = int(self.j_max)
            if j_max < default:
                warnings.warn(
                    f"j_max={j_max} truncates the J-window (default {default})",
                    ValidityWarning,
                    stacklevel=3,
                )
        object.__setattr__(self, "_j_max", j_max)

    @property
    def jmax(self) -> int:
        """Effective spin cutoff."""
        return self._j_max

    @property
    def omega(self) -> float:
        return self.hbar_omega

    @property
    def period(self) -> float:
        """Revolution period T in MeV^-1."""
        return 2.0 * math.pi / self.hbar_omega

    @property
    def spins(self) -> np.ndarray:
        return np.arange(self._j_max + 1)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


def default_j_max(j_bar: float, d: float) -> int:
    return int(math.ceil(j_bar + 5.0 * d))


# (beta [MeV], d) combinations compared in the figures; the first is the reference set.
REFERENCE_SETS: tuple[tuple[float, float], ...] = ((0.01, 3.0), (0.04, 4.0), (0.075, 8.0))


def reference_params(beta: float = 0.01, d: float = 3.0, **overrides) -> ModelParams:
    """Reference parameters (phi=0, j_bar=14, hbar_omega=1.45, gamma=0.3) with chosen beta, d."""
    base = dict(phi=0.0, d=d, j_bar=14.0, beta=beta, hbar_omega=1.45, gamma=0.3)
    base.update(overrides)
    return ModelParams(**base)


def spin_window(J, params: ModelParams):
    """Gaussian J-window exp[-(J - j_bar)^2 / d^2].

    Accepts an integer or an integer array.
    """
    J_arr = np.asarray(J)
    if np.any(J_arr < 0) or np.any(J_arr > params.jmax):
        raise DomainError(f"J must lie in [0, {params.jmax}]")
    out = np.exp(-((J_arr - params.j_bar) ** 2) / params.d**2)
    return float(out) if out.ndim == 0 else out


def legendre_table(n_max: int, x) -> np.ndarray:
    """P_0..P_{n_max} at x via the upward Bonnet recurrence.

    Returns an array of shape ``(n_max + 1,) + np.shape(x)``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise DomainError("Legendre argument must satisfy |x| <= 1")
    if n_max < 0:
        raise DomainError("order must be non-negative")
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = x
    for n in range(1, n_max):
        # (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}
        out[n + 1] = ((2 * n + 1) * x * out[n] - n * out[n - 1]) / (n + 1)
    return out


def legendre(n: int, x):
    """Legendre polynomial P_n(x) for |x| <= 1."""
    if int(n) != n or n < 0:
        raise DomainError("order must be a non-negative integer")
    val = legendre_table(int(n), x)[int(n)]
    return float(val) if val.ndim == 0 else val


def as_angle_grid(theta) -> np.ndarray:
    """Validate a strictly increasing grid of angles in [0, pi] (radians)."""
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    if th.ndim != 1:
        raise DomainError("angle grid must be one-dimensional")
    if np.any(th < 0) or np.any(th > math.pi):
        raise DomainError("angles must lie in [0, pi]")
    if np.any(np.diff(th) <= 0):
        raise DomainError("angle grid must be strictly increasing")
    return th


def as_time_grid(t) -> np.ndarray:
    """Validate a strictly increasing grid of non-negative times."""
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if tt.ndim != 1:
        raise DomainError("time grid must be one-dimensional")
    if np.any(tt < 0):
        raise DomainError("times must be non-negative")
    if np.any(np.diff(tt) <= 0):
        raise DomainError("time grid must be strictly increasing")
    return tt
