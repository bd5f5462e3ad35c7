import csv
import math

import numpy as np
import pytest

from phaserelax.cli import main, parse_range, parse_time, UsageError
from phaserelax.config import loads
from phaserelax.model import reference_params


def rows(path):
    with open(path) as fh:
        body = [ln for ln in fh if not ln.startswith("#")]
    r = list(csv.reader(body))
    return r[0], np.array([[float(x) for x in row] for row in r[1:]])


def report(path):
    out = {}
    for line in path.read_text().splitlines():
        k, v = line.split(" = ", 1)
        out[k] = v
    return out


def test_time_and_range_parsing():
    T = 4.0
    assert parse_time("0.4375T", T) == 1.75
    assert parse_time("T", T) == 4.0
    assert parse_time("2.5", T) == 2.5
    np.testing.assert_allclose(parse_range("0:180:0.1")[[0, -1]], [0.0, 180.0])
    assert parse_range("0:180:0.1").size == 1801
    with pytest.raises(UsageError):
        parse_range("0:1")
    with pytest.raises(UsageError):
        parse_time("xT", T)


def test_spectrum_files(tmp_path):
    assert main(["--out", str(tmp_path), "spectrum", "--t", "0.375T,0.4375T,0.5T,0.625T", "--theta", "0:180:0.1"]) == 0
    files = sorted(tmp_path.glob("spectrum_*.csv"))
    assert len(files) == 4
    head = files[0].read_text().splitlines()[:3]
    assert head[0].startswith("# phi=0.0 d=3.0") and "t_over_T=0.375" in head[1]
    cols, data = rows(files[0])
    assert cols == ["theta_deg", "AP_over_meansigma"] and data.shape == (1801, 2)


def test_spectrum_normalization(tmp_path):
    assert main(["--out", str(tmp_path), "spectrum", "--t", "0", "--theta", "0:10:1"]) == 0
    _, data = rows(next(tmp_path.glob("spectrum_*.csv")))
    assert data[0, 0] == 0.0 and data[0, 1] == pytest.approx(1.0, rel=1e-13)


def test_spectrum_fixed_A(tmp_path):
    ref = tmp_path / "ref.cfg"
    ref.write_text("[model]\nbeta_mev = 0.01\nd = 3\n")
    other = tmp_path / "other.cfg"
    other.write_text("[model]\nbeta_mev = 0.075\nd = 8\n")
    for name, extra in (("own", []), ("fixed", ["--fixed-A", str(ref)])):
        out = tmp_path / name
        assert main(["--config", str(other), "--out", str(out), "spectrum", "--t", "0", "--theta", "0", *extra]) == 0
    _, own = rows(next((tmp_path / "own").glob("*.csv")))
    _, fixed = rows(next((tmp_path / "fixed").glob("*.csv")))
    assert own[0, 1] == pytest.approx(1.0)
    assert fixed[0, 1] != pytest.approx(1.0, rel=1e-3)


def test_spectrum_periodic_without_relaxation(tmp_path):
    cfg = tmp_path / "b0.cfg"
    cfg.write_text("[model]\nbeta_mev = 0\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path), "spectrum", "--t", "0,1T", "--theta", "0:180:0.5"]) == 0
    _, a = rows(tmp_path / "spectrum_t0.000000T.csv")
    _, b = rows(tmp_path / "spectrum_t1.000000T.csv")
    p = reference_params(beta=0.0)
    np.testing.assert_allclose(b[:, 1], math.exp(-p.gamma * p.period) * a[:, 1], rtol=1e-10, atol=1e-14)


def test_autocorr(tmp_path):
    assert main(["--out", str(tmp_path), "autocorr", "--eps", "0:8:0.05", "--theta", "180,170.6"]) == 0
    _, c180 = rows(tmp_path / "autocorr_theta180.csv")
    _, c170 = rows(tmp_path / "autocorr_theta170.6.csv")
    assert c180[0, 1] == pytest.approx(1.0) and c170[0, 1] == pytest.approx(1.0)


def test_autocorr_set_spread(tmp_path):
    spread = {}
    curves = {180.0: [], 170.6: []}
    for beta, d in ((0.01, 3), (0.04, 4), (0.075, 8)):
        cfg = tmp_path / f"{beta}.cfg"
        cfg.write_text(f"[model]\nbeta_mev = {beta}\nd = {d}\n")
        out = tmp_path / str(beta)
        assert main(["--config", str(cfg), "--out", str(out), "autocorr", "--theta", "180,170.6"]) == 0
        for deg in curves:
            curves[deg].append(rows(out / f"autocorr_theta{deg:g}.csv")[1][:, 1])
    for deg, cs in curves.items():
        spread[deg] = max(np.max(np.abs(a - b)) for i, a in enumerate(cs) for b in cs[i + 1 :])
    assert spread[180.0] < spread[170.6]


def test_autocorr_diagonal_limit(tmp_path):
    cfg = tmp_path / "fast.cfg"
    cfg.write_text("[model]\nbeta_mev = 1e6\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path), "autocorr", "--theta", "170.6"]) == 0
    _, c = rows(tmp_path / "autocorr_theta170.6.csv")
    lor = 0.09 / (0.09 + c[:, 0] ** 2)
    assert np.max(np.abs(c[:, 1] - lor)) < 1e-6


@pytest.fixture
def synth_run(tmp_path):
    out = tmp_path / "syn"
    cfg = tmp_path / "s.cfg"
    cfg.write_text("[ensemble]\nn_realizations = 2\n")
    assert main(["--config", str(cfg), "--out", str(out), "--seed", "41", "synth"]) == 0
    return out


def test_synth_outputs(synth_run):
    cols, data = rows(synth_run / "excitation_r0000.csv")
    assert cols == ["E_MeV", "sigma", "re_f", "im_f"]
    assert data.shape[0] == 79
    head = (synth_run / "excitation_r0000.csv").read_text().splitlines()[0]
    assert "seed=41" in head and "direct_fraction=" in head
    manifest = (synth_run / "manifest.cfg").read_text()
    notes = [ln for ln in manifest.splitlines() if ln.startswith("# realization=")]
    assert len(notes) == 2
    for ln in notes:
        frac = float(ln.split("direct_fraction=")[1].split()[0])
        assert abs(frac - 0.75) <= 0.02
    cfg = loads(manifest)
    assert cfg.ensemble.seed == 41 and cfg.ensemble.n_realizations == 2
    assert loads(manifest) == loads(manifest.replace("# realization", "#"))


def test_synth_manifest_reparses_to_config(synth_run, tmp_path):
    cfg = loads((synth_run / "manifest.cfg").read_text())
    out2 = tmp_path / "again"
    manifest2 = tmp_path / "m.cfg"
    manifest2.write_text((synth_run / "manifest.cfg").read_text())
    assert main(["--config", str(manifest2), "--out", str(out2), "synth"]) == 0
    assert loads((out2 / "manifest.cfg").read_text()) == cfg


def test_synth_deterministic(synth_run, tmp_path):
    cfg = tmp_path / "s.cfg"
    out = tmp_path / "again"
    assert main(["--config", str(cfg), "--out", str(out), "--seed", "41", "--threads", "3", "synth"]) == 0
    for name in ("excitation_r0001.csv", "truth_r0001.csv", "manifest.cfg"):
        assert (out / name).read_bytes() == (synth_run / name).read_bytes()


def test_synth_constant_without_fluctuation(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[direct]\nfluctuation_scale = 0\nmagnitude_poly = 2.0\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path), "synth"]) == 0
    _, data = rows(tmp_path / "excitation_r0000.csv")
    np.testing.assert_allclose(data[:, 1], 4.0, rtol=1e-14)


def test_reconstruct_round_trip(synth_run):
    argv = ["--out", str(synth_run), "reconstruct", str(synth_run / "excitation_r0000.csv")]
    truth = ["--truth", str(synth_run / "truth_r0000.csv")]
    assert main(argv + ["--mode", "fluctuation"] + truth) == 0
    rep = report(synth_run / "excitation_r0000_fluctuation_report.txt")
    assert float(rep["nrmse"]) <= 0.15
    assert rep["direct_dominant"] == "True"
    assert float(rep["resolution_invmev"]) == pytest.approx(1 / (78 * 0.133))
    assert main(argv + ["--mode", "general", "--t-dir", "0"] + truth) == 0
    rep = report(synth_run / "excitation_r0000_general_report.txt")
    assert float(rep["nrmse"]) <= 0.2
    assert main(argv + ["--mode", "amplitude"] + truth) == 0
    rep = report(synth_run / "excitation_r0000_amplitude_report.txt")
    # the full amplitude still carries the direct part, peaked near t = 0
    assert float(rep["peak_t_transform"]) < 1.0
    assert float(rep["nrmse"]) > 0.15


def test_reconstruct_constant_input(tmp_path):
    path = tmp_path / "flat.csv"
    path.write_text("# theta_deg=180.0 e_min=15.0 delta_e=0.133 seed=\nE_MeV,sigma\n")
    with open(path, "a") as fh:
        for n in range(79):
            fh.write(f"{15.0 + 0.133 * n!r},3.0\n")
    assert main(["--out", str(tmp_path), "reconstruct", str(path), "--mode", "fluctuation"]) == 0
    rep = report(tmp_path / "flat_fluctuation_report.txt")
    assert float(rep["max_absP2"]) < 1e-20
    # amplitude mode without amplitude columns is a usage error
    assert main(["--out", str(tmp_path), "reconstruct", str(path), "--mode", "amplitude"]) == 1
    # general mode without a direct fraction
    assert main(["--out", str(tmp_path), "reconstruct", str(path), "--mode", "general", "--t-dir", "0"]) == 1


def test_reconstruct_delay_shift(tmp_path):
    cfg = tmp_path / "td.cfg"
    cfg.write_text("[direct]\nt_dir = 0.5\n")
    t_min = {}
    for name, cfg_args, t_dir in (("a", [], "0"), ("b", ["--config", str(cfg)], "0.5")):
        out = tmp_path / name
        assert main(cfg_args + ["--out", str(out), "--seed", "3", "synth"]) == 0
        assert main(["--out", str(out), "reconstruct", str(out / "excitation_r0000.csv"), "--t-dir", t_dir]) == 0
        rep = report(out / "excitation_r0000_general_report.txt")
        t_min[name] = float(rep["fringe_t_min_transform"])
        resolution = float(rep["resolution_invmev"])
    assert abs(t_min["b"] - t_min["a"] - 0.5) <= resolution


def test_figures(tmp_path):
    assert main(["--out", str(tmp_path), "figures", "fig2"]) == 0
    cols, data = rows(tmp_path / "fig2_theta170.6.csv")
    assert cols == ["t_over_T", "beta=0.01,d=3", "beta=0.04,d=4", "beta=0.075,d=8"]
    assert (tmp_path / "fig2_theta180.csv").exists()
    assert data[0, 0] == 0.0 and data[-1, 0] == pytest.approx(1.5)
    assert main(["--out", str(tmp_path), "figures", "fig1", "--check"]) == 0
    assert main(["--out", str(tmp_path), "figures", "fig3"]) == 0
    summary = (tmp_path / "fig3_summary.txt").read_text()
    assert "maxdiff_4_8_170.6" in summary


def test_figures_check_reports_failure(tmp_path):
    # the 180 deg spread in fig3 is not a factor 2 below the 170.6 deg one
    assert main(["--out", str(tmp_path), "figures", "fig3", "--check"]) == 3


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[model]\nbetta = 1\n")
    assert main(["--config", str(bad), "autocorr"]) == 1
    assert main(["nonsense"]) == 1
    neg = tmp_path / "neg.cfg"
    neg.write_text("[model]\ngamma_mev = -0.3\n")
    assert main(["--config", str(neg), "autocorr"]) == 2
    assert main(["--out", str(tmp_path), "spectrum", "--t", "-1"]) == 2
    assert main(["--out", str(tmp_path), "spectrum", "--t", "1", "--theta", "0:190:1"]) == 2
