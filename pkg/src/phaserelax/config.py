"""Run configuration: flat ``key = value`` text with ``[section]`` headers and ``#`` comments.

Sections are ``[model]``, ``[ensemble]``, ``[grid]``, ``[direct]`` and
``[output]``. Unknown sections or keys are rejected with their line number.
``dumps`` writes every key, so a dumped config re-parses to an equal one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .ensemble import DirectAmplitudeSpec, EnergyGrid, EnsembleConfig
from .model import DomainError, ModelParams, reference_params


class ConfigError(ValueError):
    """Malformed configuration text."""


@dataclass(frozen=True)
class EnsembleSection:
    n_realizations: int = 1
    seed: int = 0
    dt: float | None = None  # default 0.02 min(1/gamma, T)
    t_max: float | None = None  # default 14/gamma

    def build(self, params: ModelParams) -> EnsembleConfig:
        base = EnsembleConfig.for_params(params, self.n_realizations, self.seed)
        cfg = EnsembleConfig(
            self.n_realizations,
            self.seed,
            base.dt if self.dt is None else self.dt,
            base.t_max if self.t_max is None else self.t_max,
        )
        cfg.check(params)
        return cfg


@dataclass(frozen=True)
class GridSection:
    e_min_mev: float | None = None  # default: window centred on hbar_omega * j_bar
    delta_e_mev: float = 0.133
    n_steps: int = 78
    theta_deg: float = 170.6

    def build(self, params: ModelParams) -> EnergyGrid:
        if self.e_min_mev is None:
            e_min = params.hbar_omega * params.j_bar - 0.5 * self.n_steps * self.delta_e_mev
        else:
            e_min = self.e_min_mev
        return EnergyGrid(e_min, self.delta_e_mev, self.n_steps)

    @property
    def theta(self) -> float:
        if not 0.0 <= self.theta_deg <= 180.0:
            raise DomainError("theta_deg must lie in [0, 180]")
        return math.radians(self.theta_deg)


@dataclass(frozen=True)
class OutputSection:
    dir: str = "out"
    prefix: str = ""


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = field(default_factory=reference_params)
    ensemble: EnsembleSection = field(default_factory=EnsembleSection)
    grid: GridSection = field(default_factory=GridSection)
    direct: DirectAmplitudeSpec = field(default_factory=DirectAmplitudeSpec)
    output: OutputSection = field(default_factory=OutputSection)


# config key -> dataclass attribute, per section
_MODEL_KEYS = {
    "phi": "phi",
    "d": "d",
    "jbar": "j_bar",
    "beta_mev": "beta",
    "hbar_omega_mev": "hbar_omega",
    "gamma_mev": "gamma",
    "jmax": "j_max",
    "level_spacing_mev": "level_spacing",
}
_SECTIONS = {
    "model": (ModelParams, _MODEL_KEYS),
    "ensemble": (EnsembleSection, {f.name: f.name for f in fields(EnsembleSection)}),
    "grid": (GridSection, {f.name: f.name for f in fields(GridSection)}),
    "direct": (
        DirectAmplitudeSpec,
        {f.name: f.name for f in fields(DirectAmplitudeSpec)},
    ),
    "output": (OutputSection, {f.name: f.name for f in fields(OutputSection)}),
}
_INT = {"j_max", "n_realizations", "seed", "n_steps"}
_STR = {"dir", "prefix"}
_OPTIONAL = {"j_max", "level_spacing", "dt", "t_max", "e_min_mev", "fluctuation_scale"}


def _convert(attr: str, raw: str):
    if attr in _STR:
        return raw
    if attr in _OPTIONAL and raw.lower() == "none":
        return None
    if attr == "magnitude_poly":
        return tuple(float(x) for x in raw.split(",") if x.strip())
    if attr in _INT:
        return int(raw)
    return float(raw)


def _format(attr: str, value) -> str:
    if value is None:
        return "none"
    if attr == "magnitude_poly":
        return ", ".join(repr(float(c)) for c in value)
    if attr in _STR or attr in _INT:
        return str(value)
    return repr(float(value))


def loads(text: str, source: str = "<config>") -> RunConfig:
    values: dict[str, dict] = {s: {} for s in _SECTIONS}
    section = None
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("[") and body.endswith("]"):
            section = body[1:-1].strip()
            if section not in _SECTIONS:
                raise ConfigError(f"{source}:{lineno}: unknown section [{section}]")
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        if section is None:
            raise ConfigError(f"{source}:{lineno}: key outside any section")
        key, raw = (s.strip() for s in body.split("=", 1))
        keys = _SECTIONS[section][1]
        if key not in keys:
            raise ConfigError(f"{source}:{lineno}: unknown key '{key}' in [{section}]")
        if keys[key] in values[section]:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'")
        try:
            values[section][keys[key]] = _convert(keys[key], raw)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for '{key}': {raw!r}") from exc
    defaults = RunConfig()
    built = {}
    for name, (cls, _) in _SECTIONS.items():
        try:
            built[name] = replace(getattr(defaults, name), **values[name])
        except DomainError as exc:
            raise DomainError(f"{source} [{name}]: {exc}") from exc
    return RunConfig(**built)


def load(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from exc
    return loads(text, str(p))


def dumps(cfg: RunConfig) -> str:
    out = []
    for name, (_, keys) in _SECTIONS.items():
        sec = getattr(cfg, name)
        out.append(f"[{name}]")
        for key, attr in keys.items():
            out.append(f"{key} = {_format(attr, getattr(sec, attr))}")
        out.append("")
    return "\n".join(out)


def echo(cfg: RunConfig) -> str:
    """One-line parameter echo for CSV comment headers."""
    m = cfg.model
    return (
        f"phi={m.phi!r} d={m.d!r} jbar={m.j_bar!r} beta_mev={m.beta!r} "
        f"hbar_omega_mev={m.hbar_omega!r} gamma_mev={m.gamma!r} jmax={m.jmax}"
    )
