"""Command-line interface: ``phaserelax {spectrum,autocorr,synth,reconstruct,figures}``.

Exit codes: 0 success, 1 usage or config error, 2 domain error,
3 failed acceptance check (``figures --check``).
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import reconstruct as rc
from .ensemble import read_excitation, synth_excitation, write_excitation
from .figures import FIGURES
from .model import DomainError
from .spectrum import DEG, autocorrelation, normalization_constant, spectrum_grid


class UsageError(Exception):
    pass


def parse_time(tok: str, period: float) -> float:
    """``2.5`` (MeV^-1) or ``0.4375T`` (fraction of the period)."""
    tok = tok.strip()
    try:
        if tok.endswith("T"):
            return float(tok[:-1] or 1.0) * period
        return float(tok)
    except ValueError:
        raise UsageError(f"bad time value {tok!r}") from None


def parse_range(spec: str, unit=float) -> np.ndarray:
    """Inclusive ``start:stop:step`` grid; a single number gives one point."""
    parts = spec.split(":")
    try:
        vals = [unit(p) for p in parts]
    except UsageError:
        raise
    except ValueError:
        raise UsageError(f"bad range {spec!r}") from None
    if len(vals) == 1:
        return np.array(vals)
    if len(vals) != 3 or vals[2] <= 0 or vals[1] < vals[0]:
        raise UsageError(f"range must be start:stop:step with step > 0, got {spec!r}")
    n = int(math.floor((vals[1] - vals[0]) / vals[2] + 1e-9))
    return vals[0] + vals[2] * np.arange(n + 1)


def parse_list(spec: str, unit=float) -> np.ndarray:
    try:
        return np.array([unit(p) for p in spec.split(",") if p.strip()])
    except ValueError:
        raise UsageError(f"bad list {spec!r}") from None


def _out_dir(args, cfg) -> Path:
    d = Path(args.out or cfg.output.dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_csv(path: Path, header: str, cols: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        for line in header.splitlines():
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([repr(float(x)) if not isinstance(x, str) else x for x in r])


def cmd_spectrum(args, cfg) -> int:
    p = cfg.model
    T = p.period
    times = np.array(sorted(set(parse_time(t, T) for t in args.t.split(","))))
    theta_deg = parse_range(args.theta)
    if args.fixed_A:
        A = normalization_constant(cfgmod.load(args.fixed_A).model)
    else:
        A = normalization_constant(p)
    ps = spectrum_grid(p, times, theta_deg * DEG, norm_A=A)
    out = _out_dir(args, cfg)
    for i, t in enumerate(times):
        head = f"{cfgmod.echo(cfg)}\nt={float(t)!r} t_over_T={float(t / T)!r} A={A!r} fixed_A={args.fixed_A or 'none'}"
        path = out / f"{cfg.output.prefix}spectrum_t{t / T:.6f}T.csv"
        _write_csv(path, head, ["theta_deg", "AP_over_meansigma"], zip(theta_deg, ps.ratio[i]))
        print(path)
    return 0


def cmd_autocorr(args, cfg) -> int:
    eps = parse_range(args.eps)
    thetas = parse_list(args.theta)
    C = autocorrelation(cfg.model, eps, thetas * DEG)
    out = _out_dir(args, cfg)
    for j, deg in enumerate(thetas):
        path = out / f"{cfg.output.prefix}autocorr_theta{deg:g}.csv"
        _write_csv(path, f"{cfgmod.echo(cfg)}\ntheta_deg={float(deg)!r}", ["eps_MeV", "C_norm"], zip(eps, C[:, j]))
        print(path)
    return 0


def _time_grid(spec: str | None, period: float, default: tuple[float, float, float]) -> np.ndarray:
    if spec is None:
        lo, hi, step = default
        return lo + step * np.arange(int(math.floor((hi - lo) / step + 1e-9)) + 1)
    return parse_range(spec, lambda s: parse_time(s, period))


def cmd_synth(args, cfg) -> int:
    p = cfg.model
    T = p.period
    ens = cfg.ensemble.build(p)
    grid = cfg.grid.build(p)
    theta = cfg.grid.theta
    times = _time_grid(args.t_grid, T, (0.05 * T, 1.5 * T, 0.01))
    out = _out_dir(args, cfg)
    notes = []
    for r in range(ens.n_realizations):
        xf = synth_excitation(p, ens, theta, cfg.direct, grid, r)
        write_excitation(out / f"{cfg.output.prefix}excitation_r{r:04d}.csv", xf)
        truth = rc.ideal_reconstruction(xf, times)
        rc.write_time_amplitude(out / f"{cfg.output.prefix}truth_r{r:04d}.csv", truth, T)
        notes.append(
            f"# realization={r} seed={ens.base_seed} direct_fraction={xf.meta['direct_fraction']!r} "
            f"fluct_scale={xf.meta['fluct_scale']!r}"
        )
    manifest = out / f"{cfg.output.prefix}manifest.cfg"
    manifest.write_text("\n".join(notes) + "\n" + cfgmod.dumps(cfg))
    print(manifest)
    return 0


def _report_peaks(ta: rc.TimeAmplitude) -> tuple[float, float]:
    i = int(np.argmax(ta.power))
    return float(ta.times[i] + ta.t_dir), float(ta.times[i])


def cmd_reconstruct(args, cfg) -> int:
    p = cfg.model
    T = p.period
    xf = read_excitation(args.input)
    times = _time_grid(args.t_grid, T, (0.05 * T, 1.5 * T, 0.01))
    mode = args.mode
    if mode == "amplitude":
        if xf.amplitude is None:
            raise UsageError("amplitude mode needs re_f,im_f columns in the input")
        ta = rc.reconstruct_from_amplitude(xf, times)
    elif mode == "fluctuation":
        ta = rc.reconstruct_from_fluctuation(xf, times)
    else:
        if args.t_dir is None:
            raise UsageError("general mode needs --t-dir")
        frac = args.direct_fraction
        if frac is None:
            frac = xf.meta.get("direct_fraction")
        if frac is None:
            raise UsageError("general mode needs --direct-fraction or a direct_fraction header")
        trend = rc.detrend(xf, args.i_d)
        # sigma_d = smooth part minus the mean delayed cross section
        sigma_d = trend.smooth - (1.0 - float(frac)) * float(np.mean(xf.sigma))
        ta = rc.reconstruct_general(xf, trend, sigma_d, args.t_dir, times + args.t_dir)
    out = _out_dir(args, cfg)
    stem = Path(args.input).stem
    path = out / f"{cfg.output.prefix}{stem}_{mode}.csv"
    rc.write_time_amplitude(path, ta, T)

    power = ta.power
    report = {
        "input": str(args.input),
        "mode": mode,
        "theta_deg": repr(math.degrees(xf.theta)),
        "I_mev": repr(xf.width),
        "resolution_invmev": repr(ta.resolution),
        "t_dir": repr(ta.t_dir),
        "max_absP2": repr(float(np.max(power))),
    }
    t_tr, t_del = _report_peaks(ta)
    report["peak_t_transform"] = repr(t_tr)
    report["peak_t_delayed"] = repr(t_del)
    fm = rc.fringe_minimum(ta.times, rc.peak_normalized(power), T / 2 - T / 16, T / 2 + T / 16)
    if fm is None:
        report["fringe_t_min"] = "none"
    else:
        report["fringe_t_min"] = repr(fm.t_min)
        report["fringe_t_min_transform"] = repr(fm.t_min + ta.t_dir)
        report["fringe_t_min_over_T"] = repr(fm.t_min / T)
        report["fringe_depth"] = repr(fm.depth)
    if "direct_dominant" in ta.meta:
        report["direct_dominant"] = str(ta.meta["direct_dominant"])
    if args.truth:
        truth = rc.read_time_amplitude(args.truth)
        if truth.times.shape != ta.times.shape or not np.allclose(truth.times, ta.times, rtol=0, atol=1e-9):
            raise UsageError("truth CSV time grid differs from the reconstruction grid")
        report["nrmse"] = repr(rc.nrmse(power, truth.power))
    rpath = out / f"{cfg.output.prefix}{stem}_{mode}_report.txt"
    rpath.write_text("".join(f"{k} = {v}\n" for k, v in report.items()))
    print(rpath)
    for k, v in report.items():
        print(f"{k} = {v}")
    return 0


def write_figure(out: Path, fig, prefix: str = "") -> list[Path]:
    paths = []
    for label, (x, curves) in fig.panels.items():
        tag = label.replace("=", "").replace("/", "")
        path = out / f"{prefix}{fig.name}_{tag}.csv"
        cols = [fig.x_label] + list(curves)
        rows = zip(x, *curves.values())
        head = f"{fig.name} {label} phi=0 jbar=14 hbar_omega_mev=1.45 gamma_mev=0.3 A_from=beta=0.01,d=3"
        _write_csv(path, head, cols, rows)
        paths.append(path)
    summary = out / f"{prefix}{fig.name}_summary.txt"
    lines = [f"{k} = {v!r}" for k, v in fig.metrics.items()] + [c.line() for c in fig.checks]
    summary.write_text("\n".join(lines) + "\n")
    paths.append(summary)
    return paths


def cmd_figures(args, cfg) -> int:
    fig = FIGURES[args.which]()
    out = _out_dir(args, cfg)
    for path in write_figure(out, fig, cfg.output.prefix):
        print(path)
    for c in fig.checks:
        print(c.line())
    if args.check and not fig.ok:
        return 3
    return 0


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="run configuration file")
    p.add_argument("--out", default=d, help="output directory (overrides [output] dir)")
    p.add_argument("--seed", type=int, default=d, help="base seed (overrides [ensemble] seed)")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1, help="worker count (speed only)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phaserelax", description=__doc__.splitlines()[0])
    _global_flags(ap, False)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", help="A P/<sigma> against angle at chosen times")
    _global_flags(s, True)
    s.add_argument("--t", required=True, help="comma-separated times, MeV^-1 or xT")
    s.add_argument("--theta", default="0:180:0.1", help="degrees, start:stop:step")
    s.add_argument("--fixed-A", dest="fixed_A", help="config whose model fixes A")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("autocorr", help="normalized energy autocorrelation")
    _global_flags(s, True)
    s.add_argument("--eps", default="0:8:0.01", help="MeV, start:stop:step")
    s.add_argument("--theta", default="170.6,180", help="comma-separated degrees")
    s.set_defaults(func=cmd_autocorr)

    s = sub.add_parser("synth", help="synthetic excitation functions")
    _global_flags(s, True)
    s.add_argument("--t-grid", dest="t_grid", help="truth time grid start:stop:step (MeV^-1 or xT)")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("reconstruct", help="time power spectrum from an excitation function")
    _global_flags(s, True)
    s.add_argument("input", help="excitation-function CSV")
    s.add_argument("--mode", choices=("amplitude", "fluctuation", "general"), default="general")
    s.add_argument("--t-grid", dest="t_grid", help="start:stop:step on the delayed clock")
    s.add_argument("--i-d", dest="i_d", type=float, default=4.5, help="trend scale I_d (MeV)")
    s.add_argument("--t-dir", dest="t_dir", type=float, help="direct time delay (MeV^-1)")
    s.add_argument("--direct-fraction", dest="direct_fraction", type=float)
    s.add_argument("--truth", help="truth time-amplitude CSV for the NRMSE")
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("figures", help="curve bundles and metrics of the reference figures")
    _global_flags(s, True)
    s.add_argument("which", choices=sorted(FIGURES))
    s.add_argument("--check", action="store_true", help="exit 3 if a check fails")
    s.set_defaults(func=cmd_figures)
    return ap


def _load_config(args) -> cfgmod.RunConfig:
    cfg = cfgmod.load(args.config) if args.config else cfgmod.RunConfig()
    if args.seed is not None:
        cfg = replace(cfg, ensemble=replace(cfg.ensemble, seed=args.seed))
    return cfg


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return 1
    warnings.simplefilter("default")
    try:
        cfg = _load_config(args)
        return args.func(args, cfg)
    except (UsageError, cfgmod.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
