"""Scenario configuration: TOML parsing, validation and built-in presets."""

from __future__ import annotations

import math
import re
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .atoms import (
    BUILTIN_ATOMS,
    AtomSpec,
    CouplingConfig,
    UnknownAtomError,
    builtin_atom,
    detuning_from_multiple,
    rabi_from_intensity,
)
from .initial_state import DEFAULT_TAIL_TOL, AtomAmplitudes, FieldAmplitudes, normalize_gamma

__all__ = [
    "ConfigError",
    "ConfigIssue",
    "ScenarioConfig",
    "PRESETS",
    "REQUIRED_KEYS",
    "OPTIONAL_KEYS",
    "parse_config",
    "preset_config",
    "resolve_scenario",
    "describe_keys",
]

DEFAULT_T_END = 500.0
DEFAULT_STEPS = 2000


@dataclass(frozen=True)
class ConfigIssue:
    key: str
    message: str
    line: int | None = None

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line else ""
        return f"{where}{self.key}: {self.message}"


class ConfigError(ValueError):
    def __init__(self, issues: list[ConfigIssue] | str):
        if isinstance(issues, str):
            issues = [ConfigIssue("<config>", issues)]
        self.issues = list(issues)
        super().__init__("\n".join(str(i) for i in self.issues))


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to run one scenario; times in units of 1/omega_3."""

    atom: AtomSpec
    intensity_ratio_1: float
    intensity_ratio_2: float
    detuning_multiple: float
    nbar1: float
    nbar2: float
    zetas: tuple[float, float, float]
    delta23_multiple: float | None = None
    phase1: float = 0.0
    phase2: float = 0.0
    thetas: tuple[float, float, float] = (0.0, 0.0, 0.0)
    tail_tol: float = DEFAULT_TAIL_TOL
    t_start: float = 0.0
    t_end: float = DEFAULT_T_END
    steps: int = DEFAULT_STEPS
    snapshots: tuple[float, ...] = ()
    husimi: bool = True
    husimi_step: float = 0.05
    ppt: bool = False
    name: str = "custom"

    @property
    def mu13(self) -> float:
        return rabi_from_intensity(self.atom.gamma_bar, self.intensity_ratio_1)

    @property
    def mu23(self) -> float:
        return rabi_from_intensity(self.atom.gamma_bar, self.intensity_ratio_2)

    @property
    def delta13(self) -> float:
        return detuning_from_multiple(self.atom.gamma_bar, self.detuning_multiple)

    @property
    def delta23(self) -> float:
        n = self.detuning_multiple if self.delta23_multiple is None else self.delta23_multiple
        return detuning_from_multiple(self.atom.gamma_bar, n)

    @property
    def equal_detuning(self) -> bool:
        return self.delta23_multiple is None or self.delta23_multiple == self.detuning_multiple

    def coupling(self) -> CouplingConfig:
        return CouplingConfig.from_atom(self.atom, self.mu13, self.mu23, self.delta13, self.delta23)

    def field(self) -> FieldAmplitudes:
        return FieldAmplitudes.from_mean_photons(self.nbar1, self.nbar2, self.phase1, self.phase2)

    def atom_amplitudes(self) -> AtomAmplitudes:
        return normalize_gamma(self.zetas, self.thetas)

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.steps + 1)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["atom"] = asdict(self.atom)
        d["zetas"] = list(self.zetas)
        d["thetas"] = list(self.thetas)
        d["snapshots"] = list(self.snapshots)
        return d


# --------------------------------------------------------------------------
# presets
#
# Time windows are fixed in units of 1/gamma_bar (scaled from the lithium
# value), so the same dynamics is covered for every atom.

_LI_GAMMA = BUILTIN_ATOMS["li6"].gamma_bar

PRESETS: dict[str, dict] = {
    "state1": dict(intensity_ratio_1=3.0, intensity_ratio_2=3.0, nbar1=3.0, nbar2=3.0,
                   detuning_multiple=0.0, zetas=(1.0, 0.0, 0.0), li_t_end=500.0, steps=2000),
    "state2": dict(intensity_ratio_1=3.0, intensity_ratio_2=3.0, nbar1=3.0, nbar2=3.0,
                   detuning_multiple=5.0, zetas=(0.0, 1.0, 0.0), li_t_end=500.0, steps=2000),
    "state3": dict(intensity_ratio_1=3.0, intensity_ratio_2=3.0, nbar1=3.0, nbar2=3.0,
                   detuning_multiple=0.0, zetas=(0.0, 0.0, 1.0), li_t_end=500.0, steps=2000),
    "state4": dict(intensity_ratio_1=3.0, intensity_ratio_2=3.0, nbar1=3.0, nbar2=3.0,
                   detuning_multiple=0.0, zetas=(1.0, 1.0, 1.0), li_t_end=500.0, steps=2000),
    "raman1": dict(intensity_ratio_1=5.0, intensity_ratio_2=0.25, nbar1=3.0, nbar2=1.0,
                   detuning_multiple=0.0, zetas=(0.0, 0.0, 1.0), li_t_end=4000.0, steps=4000),
    "raman2": dict(intensity_ratio_1=1.0, intensity_ratio_2=1.0, nbar1=3.0, nbar2=3.0,
                   detuning_multiple=10.0, zetas=(1.0, 0.0, 0.0), li_t_end=4000.0, steps=4000),
}


def preset_config(spec: str) -> ScenarioConfig:
    """``"<atom>/<preset>"`` or a bare preset name (lithium by default)."""
    atom_name, _, preset = spec.rpartition("/")
    atom_name = atom_name or "li6"
    if preset not in PRESETS:
        raise ConfigError([ConfigIssue("preset", f"unknown preset {preset!r}; known: {sorted(PRESETS)}")])
    if atom_name.lower() not in BUILTIN_ATOMS:
        raise ConfigError([ConfigIssue("atom", f"unknown atom {atom_name!r}; known: {sorted(BUILTIN_ATOMS)}")])
    atom = builtin_atom(atom_name)
    p = dict(PRESETS[preset])
    li_t_end = p.pop("li_t_end")
    t_end = li_t_end if atom.gamma_bar == _LI_GAMMA else li_t_end * _LI_GAMMA / atom.gamma_bar
    return ScenarioConfig(atom=atom, t_end=t_end, name=f"{atom.label}/{preset}", **p)


# --------------------------------------------------------------------------
# parsing

REQUIRED_KEYS = {
    "intensity_ratio_1": "I1 / I_sat of mode 1 (>= 0)",
    "intensity_ratio_2": "I2 / I_sat of mode 2 (>= 0)",
    "detuning_multiple": "Delta_13 in units of gamma_bar (any sign)",
    "nbar1": "mean photon number of mode 1 (>= 0)",
    "nbar2": "mean photon number of mode 2 (>= 0)",
    "zetas": "three non-negative moduli of the atomic amplitudes (normalised on load)",
}

OPTIONAL_KEYS = {
    "preset": ("none", "start from a built-in preset; other keys override it"),
    "atom": ("li6", "built-in name (li6, rb87) or an inline table "
                    "{label, omega1, omega2, gamma_bar, time_unit_ns[, omega3]}"),
    "delta23_multiple": ("detuning_multiple", "Delta_23 in units of gamma_bar; unequal values need --oracle"),
    "phase1": ("0", "phase of alpha_1 (rad)"),
    "phase2": ("0", "phase of alpha_2 (rad)"),
    "thetas": ("[0, 0, 0]", "phases of the atomic amplitudes (rad)"),
    "tail_tol": (f"{DEFAULT_TAIL_TOL:g}", "Poisson tail mass allowed per mode"),
    "t_start": ("0", "first time (1/omega_3)"),
    "t_end": (f"{DEFAULT_T_END:g}", "last time (1/omega_3)"),
    "steps": (f"{DEFAULT_STEPS}", "number of intervals; steps + 1 rows are written"),
    "snapshots": ("[]", "times at which density matrices are written"),
    "husimi": ("true", "write Husimi grids with each snapshot"),
    "husimi_step": ("0.05", "Husimi grid spacing"),
    "ppt": ("false", "add the mode-mode partial-transpose eigenvalue to snapshots (slow)"),
}

_ATOM_KEYS = {"label", "omega1", "omega2", "gamma_bar", "time_unit_ns", "omega3"}


def describe_keys() -> str:
    lines = ["required keys (unless 'preset' is given):"]
    lines += [f"  {k:18s} {v}" for k, v in REQUIRED_KEYS.items()]
    lines.append("optional keys [default]:")
    lines += [f"  {k:18s} [{d}] {v}" for k, (d, v) in OPTIONAL_KEYS.items()]
    return "\n".join(lines)


def _line_of(text: str, key: str) -> int | None:
    m = re.search(rf"^\s*{re.escape(key)}\s*=", text, flags=re.MULTILINE)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([ConfigIssue(source, f"TOML syntax error: {exc}")]) from None

    issues: list[ConfigIssue] = []

    def bad(key, msg):
        issues.append(ConfigIssue(key, msg, _line_of(text, key)))

    for key in raw:
        if key not in REQUIRED_KEYS and key not in OPTIONAL_KEYS:
            bad(key, "unknown key")

    base: ScenarioConfig | None = None
    if "preset" in raw:
        if not isinstance(raw["preset"], str):
            bad("preset", "must be a string")
        else:
            try:
                base = preset_config(raw["preset"])
            except ConfigError as exc:
                for i in exc.issues:
                    bad("preset", i.message)
    else:
        for key in REQUIRED_KEYS:
            if key not in raw:
                issues.append(ConfigIssue(key, "missing required key"))

    values: dict = {}

    atom = None
    if "atom" in raw:
        a = raw["atom"]
        if isinstance(a, str):
            try:
                atom = builtin_atom(a)
            except UnknownAtomError as exc:
                bad("atom", str(exc.args[0]))
        elif isinstance(a, dict):
            unknown = set(a) - _ATOM_KEYS
            missing = {"label", "omega1", "omega2", "gamma_bar", "time_unit_ns"} - set(a)
            if unknown:
                bad("atom", f"unknown fields {sorted(unknown)}")
            if missing:
                bad("atom", f"missing fields {sorted(missing)}")
            if not unknown and not missing:
                nums = {k: v for k, v in a.items() if k != "label"}
                if not all(_is_number(v) for v in nums.values()) or not isinstance(a["label"], str):
                    bad("atom", "label must be a string and the other fields numbers")
                else:
                    try:
                        atom = AtomSpec(**{k: (float(v) if k != "label" else v) for k, v in a.items()})
                    except ValueError as exc:
                        bad("atom", str(exc))
        else:
            bad("atom", "must be a built-in name or an inline table")
        if atom is not None:
            values["atom"] = atom

    for key in ("intensity_ratio_1", "intensity_ratio_2", "nbar1", "nbar2"):
        if key in raw:
            v = raw[key]
            if not _is_number(v):
                bad(key, f"expected a number, got {v!r}")
            elif v < 0:
                bad(key, "must be non-negative")
            else:
                values[key] = float(v)
    for key in ("detuning_multiple", "delta23_multiple", "phase1", "phase2", "t_start", "t_end"):
        if key in raw:
            v = raw[key]
            if not _is_number(v):
                bad(key, f"expected a number, got {v!r}")
            else:
                values[key] = float(v)
    if "tail_tol" in raw:
        v = raw["tail_tol"]
        if not _is_number(v) or not 0 < v < 1:
            bad("tail_tol", "must be a number in (0, 1)")
        else:
            values["tail_tol"] = float(v)
    if "husimi_step" in raw:
        v = raw["husimi_step"]
        if not _is_number(v) or v <= 0:
            bad("husimi_step", "must be a positive number")
        else:
            values["husimi_step"] = float(v)
    if "steps" in raw:
        v = raw["steps"]
        if not isinstance(v, int) or isinstance(v, bool):
            bad("steps", f"expected an integer, got {v!r}")
        elif v < 1:
            bad("steps", "must be >= 1")
        else:
            values["steps"] = v
    for key in ("husimi", "ppt"):
        if key in raw:
            if not isinstance(raw[key], bool):
                bad(key, "expected true or false")
            else:
                values[key] = raw[key]
    for key in ("zetas", "thetas"):
        if key in raw:
            v = raw[key]
            if not isinstance(v, list) or len(v) != 3 or not all(_is_number(x) for x in v):
                bad(key, "expected a list of three numbers")
            elif key == "zetas" and (any(x < 0 for x in v) or not any(x > 0 for x in v)):
                bad(key, "moduli must be non-negative and not all zero")
            else:
                values[key] = tuple(float(x) for x in v)
    if "snapshots" in raw:
        v = raw["snapshots"]
        if not isinstance(v, list) or not all(_is_number(x) for x in v):
            bad("snapshots", "expected a list of numbers")
        else:
            values["snapshots"] = tuple(float(x) for x in v)

    if issues:
        raise ConfigError(issues)

    if base is None:
        values.setdefault("atom", builtin_atom("li6"))
        cfg = ScenarioConfig(name=source, **values)
    else:
        cfg = replace(base, **values)
    _check_invariants(cfg, text)
    return cfg


def _check_invariants(cfg: ScenarioConfig, text: str = "") -> None:
    issues = []
    if cfg.t_end < cfg.t_start:
        issues.append(ConfigIssue("t_end", f"t_end={cfg.t_end} is before t_start={cfg.t_start}", _line_of(text, "t_end")))
    if issues:
        raise ConfigError(issues)


def resolve_scenario(arg: str) -> ScenarioConfig:
    """A path to a TOML file or a preset name."""
    path = Path(arg)
    if path.is_file():
        return parse_config(path.read_text(), source=str(path))
    try:
        return preset_config(arg)
    except ConfigError:
        raise ConfigError([ConfigIssue("--scenario", f"{arg!r} is neither a readable file nor a preset name")]) from None
