import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaserelax.config import ConfigError, RunConfig, dumps, load, loads
from phaserelax.ensemble import DirectAmplitudeSpec
from phaserelax.model import DomainError, reference_params

SAMPLE = """
# reference set, reference-scale window
[model]
beta_mev = 0.04   # phase relaxation
d = 4
jmax = none

[ensemble]
n_realizations = 3
seed = 18446744073709551615

[grid]
delta_e_mev = 0.1
n_steps = 120
theta_deg = 180

[direct]
magnitude_poly = 1.0, 0.05
t_dir = 0.25

[output]
dir = runs/a
"""


def test_parse_sample():
    cfg = loads(SAMPLE)
    assert cfg.model == reference_params(0.04, 4.0)
    assert cfg.ensemble.seed == 2**64 - 1
    assert cfg.grid.n_steps == 120 and cfg.grid.theta_deg == 180.0
    assert cfg.direct.magnitude_poly == (1.0, 0.05)
    assert cfg.output.dir == "runs/a"


def test_defaults_are_reference():
    cfg = loads("")
    assert cfg == RunConfig()
    assert cfg.model == reference_params()
    grid = cfg.grid.build(cfg.model)
    assert grid.n_steps == 78 and grid.delta_e == 0.133


def test_round_trip():
    cfg = loads(SAMPLE)
    assert loads(dumps(cfg)) == cfg


@settings(max_examples=40, deadline=None)
@given(
    beta=st.floats(0, 1, allow_subnormal=False),
    d=st.floats(0.5, 10),
    seed=st.integers(0, 2**64 - 1),
    poly=st.lists(st.floats(0.1, 5), min_size=1, max_size=4),
    frac=st.floats(0, 0.99),
    spacing=st.one_of(st.none(), st.floats(1e-3, 1.0)),
)
def test_round_trip_property(beta, d, seed, poly, frac, spacing):
    from dataclasses import replace

    base = RunConfig()
    cfg = replace(
        base,
        model=reference_params(beta, d, level_spacing=spacing),
        ensemble=replace(base.ensemble, seed=seed),
        direct=DirectAmplitudeSpec(tuple(poly), target_direct_fraction=frac),
    )
    assert loads(dumps(cfg)) == cfg


@pytest.mark.parametrize(
    "text, line",
    [
        ("[model]\nbeta_mev = 0.01\nbetta = 2\n", 3),
        ("[modle]\n", 1),
        ("beta_mev = 0.01\n", 1),
        ("[grid]\nn_steps = many\n", 2),
        ("[grid]\n\nn_steps\n", 3),
        ("[model]\nd = 3\nd = 4\n", 3),
    ],
)
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError, match=rf"<config>:{line}:"):
        loads(text)


def test_domain_violation():
    with pytest.raises(DomainError):
        loads("[model]\ngamma_mev = 0\n")


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load(tmp_path / "nope.cfg")


def test_ensemble_build_checks(ref):
    cfg = loads("[ensemble]\ndt = 0.5\n")
    with pytest.raises(DomainError):
        cfg.ensemble.build(ref)
