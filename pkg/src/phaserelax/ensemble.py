"""Stochastic forward model: a correlated phase-diffusion ladder over spin channels.

Each realization draws independent Brownian paths eta_m(t), m = 0..j_max,
with increment variance 2 beta dt, and sets phi_J(t) = sum_{m<=J} eta_m(t).
The phase difference phi_J - phi_J' is then Gaussian with variance
2 beta |J - J'| t, so the ensemble average of exp(i(phi_J - phi_J')) is
exp(-beta |J - J'| t) and the mean decay intensity reproduces the analytic
spectrum exactly on the time grid.

Randomness for realization r comes from a Philox stream keyed by
(base_seed, r), so results do not depend on evaluation order.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import DomainError, ModelParams, legendre_table, spin_window


@dataclass(frozen=True)
class EnsembleConfig:
    n_realizations: int
    base_seed: int
    dt: float
    t_max: float

    def __post_init__(self):
        if self.n_realizations < 1:
            raise DomainError("n_realizations must be positive")
        if not 0 <= self.base_seed < 2**64:
            raise DomainError("base_seed must be an unsigned 64-bit integer")
        if not (self.dt > 0 and self.t_max > self.dt):
            raise DomainError("need 0 < dt < t_max")

    @classmethod
    def for_params(cls, params: ModelParams, n_realizations: int = 1, base_seed: int = 0) -> "EnsembleConfig":
        """Default grid: dt = 0.02 min(1/gamma, T), t_max = 14/gamma."""
        dt = 0.02 * min(1.0 / params.gamma, params.period)
        return cls(n_realizations, base_seed, dt, 14.0 / params.gamma)

    @property
    def n_time_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_time_steps + 1)

    def check(self, params: ModelParams) -> None:
        if self.dt > 0.02 * min(1.0 / params.gamma, params.period) * (1 + 1e-9):
            raise DomainError("dt must resolve both decay and rotation: dt <= 0.02 min(1/gamma, T)")
        if self.t_max < 14.0 / params.gamma * (1 - 1e-9):
            raise DomainError("t_max must be at least 14/gamma")


@dataclass(frozen=True)
class DirectAmplitudeSpec:
    """Energy-smooth direct amplitude added to the fluctuating part.

    f_dir(E) = poly(E - E_bar) * exp(i [phase0 - t_dir (E - E_bar)]), with
    ``magnitude_poly`` in increasing powers of the centred energy (MeV) and
    E_bar the window midpoint. With this sign the transform of
    sigma - smooth, evaluated at t, tracks the delayed amplitude at t - t_dir.

    ``fluctuation_scale`` bypasses the target-fraction solve and multiplies
    the fluctuating amplitude by a fixed factor (0 switches it off).
    """

    magnitude_poly: tuple[float, ...] = (1.0,)
    phase0: float = 0.0
    t_dir: float = 0.0
    target_direct_fraction: float = 0.75
    fluctuation_scale: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "magnitude_poly", tuple(float(c) for c in self.magnitude_poly))
        if self.t_dir < 0:
            raise DomainError("t_dir must be non-negative")
        if not 0 <= self.target_direct_fraction < 1:
            raise DomainError("target_direct_fraction must lie in [0, 1)")
        if self.fluctuation_scale is not None and self.fluctuation_scale < 0:
            raise DomainError("fluctuation_scale must be non-negative")

    def magnitude(self, e_centered) -> np.ndarray:
        return np.polynomial.polynomial.polyval(e_centered, self.magnitude_poly)

    def amplitude(self, energies, e_bar: float) -> np.ndarray:
        x = np.asarray(energies, dtype=float) - e_bar
        return self.magnitude(x) * np.exp(1j * (self.phase0 - self.t_dir * x))


@dataclass(frozen=True)
class EnergyGrid:
    e_min: float
    delta_e: float
    n_steps: int

    def __post_init__(self):
        if self.delta_e <= 0:
            raise DomainError("delta_e must be positive")
        if self.n_steps < 1:
            raise DomainError("n_steps must be at least 1")

    @classmethod
    def centered(cls, params: ModelParams, width: float, delta_e: float) -> "EnergyGrid":
        """Window of the given width centred on hbar_omega * j_bar, where the delayed amplitude lives."""
        n = int(math.floor(width / delta_e + 1e-9))
        return cls(params.hbar_omega * params.j_bar - 0.5 * n * delta_e, delta_e, n)

    @property
    def energies(self) -> np.ndarray:
        return self.e_min + self.delta_e * np.arange(self.n_steps + 1)

    @property
    def width(self) -> float:
        return self.n_steps * self.delta_e


@dataclass
class ExcitationFunction:
    """Equidistant cross-section samples at a fixed angle.

    ``amplitude`` holds the full complex f(E) when retained; ``direct`` the
    direct part f_dir(E) (synthetic data only).
    """

    theta: float
    e_min: float
    delta_e: float
    sigma: np.ndarray
    amplitude: np.ndarray | None = None
    direct: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.sigma.ndim != 1 or self.sigma.size < 2:
            raise DomainError("an excitation function needs at least two samples")
        if np.any(self.sigma < 0):
            raise DomainError("cross sections must be non-negative")
        if self.delta_e <= 0:
            raise DomainError("delta_e must be positive")
        if self.amplitude is not None:
            self.amplitude = np.asarray(self.amplitude, dtype=complex)
            if self.amplitude.shape != self.sigma.shape:
                raise DomainError("amplitude and sigma lengths differ")

    @property
    def n_steps(self) -> int:
        return self.sigma.size - 1

    @property
    def energies(self) -> np.ndarray:
        return self.e_min + self.delta_e * np.arange(self.sigma.size)

    @property
    def width(self) -> float:
        """Energy window I = N delta_e."""
        return self.n_steps * self.delta_e

    @property
    def e_bar(self) -> float:
        return self.e_min + 0.5 * self.width

    @property
    def fluct(self) -> np.ndarray | None:
        if self.amplitude is None or self.direct is None:
            return None
        return self.amplitude - self.direct


def realization_rng(base_seed: int, realization: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(realization),))
    return np.random.Generator(np.random.Philox(ss))


def phase_ladder(params: ModelParams, cfg: EnsembleConfig, realization: int) -> np.ndarray:
    """Ladder phases phi_J(t_k), shape (n_time_steps + 1, j_max + 1)."""
    if not 0 <= realization < cfg.n_realizations:
        raise DomainError("realization index out of range")
    n_t = cfg.n_time_steps
    n_j = params.jmax + 1
    z = realization_rng(cfg.base_seed, realization).standard_normal((n_t, n_j))
    eta = np.zeros((n_t + 1, n_j))
    np.cumsum(math.sqrt(2.0 * params.beta * cfg.dt) * z, axis=0, out=eta[1:])
    return np.cumsum(eta, axis=1)


def _rung_weights(params: ModelParams, theta) -> np.ndarray:
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    if np.any(th < 0) or np.any(th > math.pi):
        raise DomainError("theta must lie in [0, pi]")
    J = params.spins
    c = (2 * J + 1) * np.sqrt(spin_window(J, params)) * np.exp(1j * params.phi * J)
    return c[:, None] * legendre_table(params.jmax, np.cos(th))


def time_amplitude(params: ModelParams, cfg: EnsembleConfig, theta, realization: int, phases=None):
    """Decay amplitude a(t_k, theta) of one realization.

    a = exp(-gamma t/2) sum_J (2J+1) sqrt(W) exp(i phi J) exp(-i omega J t) exp(i phi_J(t)) P_J(cos theta).
    Shape (n_t,) for scalar theta, else (n_t, n_theta).
    """
    if phases is None:
        phases = phase_ladder(params, cfg, realization)
    t = cfg.times
    J = params.spins
    rot = np.exp(1j * (phases - params.omega * np.outer(t, J)))
    a = np.exp(-0.5 * params.gamma * t)[:, None] * (rot @ _rung_weights(params, theta))
    return a[:, 0] if np.ndim(theta) == 0 else a


def ensemble_power(
    params: ModelParams,
    cfg: EnsembleConfig,
    theta,
    threads: int = 1,
    block: int = 64,
) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard error of |a(t_k, theta)|^2 over all realizations.

    Realizations are summed in fixed blocks reduced in index order, so the
    output is bitwise independent of ``threads``.
    """
    weights = _rung_weights(params, theta)
    t = cfg.times
    env = np.exp(-0.5 * params.gamma * t)[:, None]
    rot0 = np.exp(-1j * params.omega * np.outer(t, params.spins))

    def run(lo: int, hi: int):
        s1 = np.zeros((t.size, weights.shape[1]))
        s2 = np.zeros_like(s1)
        for r in range(lo, hi):
            a = env * ((rot0 * np.exp(1j * phase_ladder(params, cfg, r))) @ weights)
            p = a.real**2 + a.imag**2
            s1 += p
            s2 += p * p
        return s1, s2

    bounds = [(lo, min(lo + block, cfg.n_realizations)) for lo in range(0, cfg.n_realizations, block)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: run(*b), bounds))
    else:
        parts = [run(*b) for b in bounds]
    s1 = np.zeros_like(parts[0][0])
    s2 = np.zeros_like(s1)
    for a, b in parts:
        s1 += a
        s2 += b
    n = cfg.n_realizations
    mean = s1 / n
    var = np.maximum(s2 / n - mean**2, 0.0) * n / max(n - 1, 1)
    sem = np.sqrt(var / n)
    if np.ndim(theta) == 0:
        return mean[:, 0], sem[:, 0]
    return mean, sem


def fluctuating_amplitude(energies, times, dt: float, a: np.ndarray) -> np.ndarray:
    """delta f(E_n) = sum_k dt exp(i E_n t_k) a(t_k)."""
    return np.exp(1j * np.outer(energies, times)) @ a * dt


def synth_excitation(
    params: ModelParams,
    cfg: EnsembleConfig,
    theta: float,
    dspec: DirectAmplitudeSpec,
    grid: EnergyGrid,
    realization: int,
) -> ExcitationFunction:
    """Synthetic excitation function sigma = |f_dir + s delta f|^2 for one realization.

    The scale s is solved per realization so that mean|f_dir|^2 / mean(sigma)
    over the window equals the target direct fraction.
    """
    if grid.width < 20.0 * params.gamma * (1 - 1e-9):
        raise DomainError("energy window must span at least 20 gamma")
    if grid.delta_e > 0.5 * params.gamma * (1 + 1e-9):
        raise DomainError("energy step must not exceed gamma/2")
    if dspec.t_dir > 0.2 / params.gamma:
        raise DomainError("t_dir must satisfy t_dir <= 0.2/gamma")
    cfg.check(params)

    E = grid.energies
    e_bar = grid.e_min + 0.5 * grid.width
    a = time_amplitude(params, cfg, theta, realization)
    df = fluctuating_amplitude(E, cfg.times, cfg.dt, a)
    fd = dspec.amplitude(E, e_bar)
    if np.any(np.abs(fd) > 0) and np.any(dspec.magnitude(E - e_bar) <= 0):
        raise DomainError("direct magnitude polynomial must be positive over the window")

    D = float(np.mean(np.abs(fd) ** 2))
    B = float(np.mean(np.abs(df) ** 2))
    C = float(np.mean(np.real(np.conj(fd) * df)))
    target = dspec.target_direct_fraction
    if dspec.fluctuation_scale is not None:
        s = dspec.fluctuation_scale
    elif D == 0.0:
        if target != 0.0:
            raise DomainError("a nonzero direct fraction needs a nonzero direct amplitude")
        s = 1.0
    elif target == 0.0 or B == 0.0:
        raise DomainError("target direct fraction cannot be reached with this direct amplitude")
    else:
        s = (-C + math.sqrt(C * C + B * D * (1.0 / target - 1.0))) / B

    f = fd + s * df
    sigma = np.abs(f) ** 2
    realized = D / float(np.mean(sigma)) if np.mean(sigma) > 0 else float("nan")
    if dspec.fluctuation_scale is None and abs(realized - target) > 0.02:
        raise DomainError(f"realized direct fraction {realized:.4f} misses target {target}")
    meta = dict(
        seed=cfg.base_seed,
        realization=realization,
        direct_fraction=realized,
        fluct_scale=s,
    )
    return ExcitationFunction(theta, grid.e_min, grid.delta_e, sigma, f, fd, meta)


def normalized_variance(xf: ExcitationFunction) -> float:
    """var(sigma) / mean(sigma)^2 with the plain (ddof=0) estimator."""
    if xf.n_steps < 10:
        raise DomainError("need at least 10 energy steps")
    return float(np.var(xf.sigma) / np.mean(xf.sigma) ** 2)


def write_excitation(path, xf: ExcitationFunction) -> None:
    head = dict(
        theta_deg=repr(math.degrees(xf.theta)),
        e_min=repr(xf.e_min),
        delta_e=repr(xf.delta_e),
        seed=str(xf.meta.get("seed", "")),
    )
    for key in ("realization", "direct_fraction"):
        if key in xf.meta:
            head[key] = repr(xf.meta[key])
    with open(path, "w", newline="") as fh:
        fh.write("# " + " ".join(f"{k}={v}" for k, v in head.items()) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        cols = ["E_MeV", "sigma"] + (["re_f", "im_f"] if xf.amplitude is not None else [])
        w.writerow(cols)
        for n, e in enumerate(xf.energies):
            row = [repr(float(e)), repr(float(xf.sigma[n]))]
            if xf.amplitude is not None:
                row += [repr(float(xf.amplitude[n].real)), repr(float(xf.amplitude[n].imag))]
            w.writerow(row)


def parse_comment_header(line: str) -> dict:
    out = {}
    for tok in line.lstrip("#").split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            out[k] = v
    return out


def read_excitation(path) -> ExcitationFunction:
    meta: dict = {}
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if ln.strip()]
    for ln in lines:
        if ln.startswith("#"):
            meta.update(parse_comment_header(ln))
    body = [ln for ln in lines if not ln.startswith("#")]
    reader = csv.reader(body)
    cols = next(reader)
    if cols[:2] != ["E_MeV", "sigma"]:
        raise DomainError(f"{path}: expected columns E_MeV,sigma[,re_f,im_f]")
    rows = np.array([[float(x) for x in r] for r in reader])
    E = rows[:, 0]
    de = np.diff(E)
    if de.size == 0 or not np.allclose(de, de[0], rtol=1e-6, atol=1e-9):
        raise DomainError(f"{path}: energies must be equidistant")
    amp = rows[:, 2] + 1j * rows[:, 3] if cols[2:4] == ["re_f", "im_f"] else None
    theta = math.radians(float(meta["theta_deg"])) if "theta_deg" in meta else math.pi
    parsed: dict = {}
    for k, v in meta.items():
        try:
            parsed[k] = int(v)
        except ValueError:
            try:
                parsed[k] = float(v)
            except ValueError:
                parsed[k] = v
    e_min = float(meta.get("e_min", E[0]))
    delta_e = float(meta.get("delta_e", np.mean(de)))
    return ExcitationFunction(theta, e_min, delta_e, rows[:, 1], amp, None, parsed)
