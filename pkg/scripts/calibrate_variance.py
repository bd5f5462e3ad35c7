"""Normalized variance of purely delayed synthetic data in the fast phase-relaxation limit.

Runs the ladder generator on I = 100 gamma and, as an independent check, a
white-noise model delta f = sum dt exp(i E t) exp(-gamma t / 2) xi(t) that
shares no code with the generator.
"""

import argparse

import numpy as np

from phaserelax import experiments as ex


def white_noise_variances(n, seed, gamma=0.3, width_in_gamma=100.0):
    rng = np.random.default_rng(seed)
    dt = 0.02 / gamma
    t = np.arange(0.0, 14.0 / gamma + dt / 2, dt)
    half = int(round(width_in_gamma))
    E = 20.3 + 0.5 * gamma * np.arange(-half, half + 1)
    K = np.exp(1j * np.outer(E, t) - 0.5 * gamma * t) * dt
    out = np.empty(n)
    for i in range(n):
        x = np.abs(K @ (rng.normal(size=t.size) + 1j * rng.normal(size=t.size))) ** 2
        out[i] = x.var() / x.mean() ** 2
    return out


def summary(label, v):
    inside = np.mean((v >= 0.7) & (v <= 1.3))
    print(f"{label}: n={v.size} mean {v.mean():.3f} sd {v.std(ddof=1):.3f} in [0.7, 1.3]: {inside:.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--oracle-seeds", type=int, default=5000)
    args = ap.parse_args()
    summary("ladder generator", ex.variance_study(n_seeds=args.seeds))
    summary("white-noise oracle", white_noise_variances(args.oracle_seeds, 1))
    for w in (100, 200, 400):
        summary(f"white-noise oracle, I = {w} gamma", white_noise_variances(1000, 2, width_in_gamma=w))


if __name__ == "__main__":
    main()
