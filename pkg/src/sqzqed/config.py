"""Sectioned ``key = value`` run configuration.

Example::

    [run]
    mode = homodyne
    workers = 1

    [system]
    chi_sq = 0.41

    [grid]
    start = -0.2
    stop = 1.4
    points = 801

Unset keys take the defaults in ``SCHEMA`` (the system defaults are the
kappa = gamma1 = 0.01, gamma_phi = 0.067, chi = 1 parameter set).  Grid bounds
left unset fall back to the default grid of the chosen mode.  Parsing reports
every problem it finds, not just the first.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .model import MultimodeParams, RegimeError, SystemParams, tune_multimode

MODES = ("steady", "homodyne", "qubit-spectrum", "sweep-chisq", "sweep-phi", "h1-benchmark", "transmon")


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    items = [t for t in text.replace(",", " ").split() if t]
    if not items:
        raise ValueError("empty list")
    return tuple(float(t) for t in items)


def _int(text: str) -> int:
    return int(text.strip())


def _str(text: str) -> str:
    return text.strip()


# section -> key -> (parser, default); None defaults are "not set"
SCHEMA: dict[str, dict[str, tuple]] = {
    "run": {"mode": (_str, None), "workers": (_int, 1)},
    "system": {
        "chi": (float, 1.0), "chi_sq": (float, 0.0), "e1": (float, 0.0), "kappa": (float, 0.01),
        "gamma1": (float, 0.01), "gamma_phi": (float, 0.067), "n_fock": (_int, 30), "unstable": (_bool, False),
    },
    "grid": {"start": (float, None), "stop": (float, None), "points": (_int, None), "phi": (float, 0.0)},
    "sweep": {"values": (_floats, None)},
    "multimode": {
        "n1_fock": (_int, 40), "n2_fock": (_int, 2), "chi_sq": (float, 0.41), "coupling_ratio": (float, 0.02),
        "g_cross": (float, 0.05), "kappa2": (float, 1.0),
    },
    "transmon": {
        "ec": (float, 1.0), "ej_over_ec": (_floats, (1.0, 10.0, 20.0, 50.0, 100.0)), "ng_start": (float, 0.0),
        "ng_stop": (float, 0.5), "ng_points": (_int, 51), "levels": (_int, 3),
    },
    "output": {"out_dir": (_str, "."), "stem": (_str, None)},
    "tolerances": {"steady": (float, 1e-10), "solve": (float, 1e-9)},
}


def defaults() -> dict[str, dict]:
    return {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in SCHEMA.items()}


@dataclass(frozen=True)
class RunConfig:
    mode: str
    values: dict = field(default_factory=defaults)

    def section(self, name: str) -> dict:
        return self.values[name]

    @property
    def workers(self) -> int:
        return int(self.values["run"]["workers"])

    def system_params(self) -> SystemParams:
        return SystemParams(**self.values["system"])

    def multimode_params(self) -> MultimodeParams:
        mm = self.values["multimode"]
        s = self.values["system"]
        return tune_multimode(
            chi_sq=mm["chi_sq"], chi=s["chi"], coupling_ratio=mm["coupling_ratio"], g_cross=mm["g_cross"],
            kappa2=mm["kappa2"], n1_fock=mm["n1_fock"], n2_fock=mm["n2_fock"], kappa=s["kappa"],
            gamma1=s["gamma1"], gamma_phi=s["gamma_phi"],
        )

    def grid(self, default: tuple[float, float, int]) -> tuple[float, float, int]:
        g = self.values["grid"]
        return (
            default[0] if g["start"] is None else g["start"],
            default[1] if g["stop"] is None else g["stop"],
            default[2] if g["points"] is None else g["points"],
        )


def parse_config(text: str, mode: str | None = None) -> RunConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    errors: list[str] = []
    values = defaults()
    seen: dict[tuple[str, str], int] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in SCHEMA:
                errors.append(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, val = (t.strip() for t in line.split("=", 1))
        if section is None:
            errors.append(f"line {lineno}: key {key!r} outside any section")
            continue
        if section not in SCHEMA:
            continue
        if key not in SCHEMA[section]:
            errors.append(f"line {lineno}: unknown key {key!r} in [{section}]")
            continue
        if (section, key) in seen:
            errors.append(f"line {lineno}: duplicate key {key!r} in [{section}] (first set on line {seen[section, key]})")
            continue
        seen[section, key] = lineno
        parser = SCHEMA[section][key][0]
        try:
            values[section][key] = parser(val)
        except ValueError as exc:
            errors.append(f"line {lineno}: bad value for {section}.{key}: {exc}")

    cfg_mode = values["run"]["mode"]
    if mode is not None and cfg_mode is not None and mode != cfg_mode:
        errors.append(f"mode {mode!r} on the command line conflicts with config mode {cfg_mode!r}")
    mode = mode or cfg_mode
    if mode is None:
        errors.append("no mode given")
    elif mode not in MODES:
        errors.append(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    values["run"]["mode"] = mode

    errors.extend(_validate(values))
    if errors:
        raise ConfigError(errors)
    return RunConfig(mode, values)


def _validate(values: dict) -> list[str]:
    errors = []
    try:
        SystemParams(**values["system"])
    except RegimeError as exc:
        errors.append(f"regime: {exc}")
    except (ValueError, TypeError) as exc:
        errors.append(f"system: {exc}")
    if values["run"]["workers"] < 1:
        errors.append("run.workers must be >= 1")
    g = values["grid"]
    if g["points"] is not None and g["points"] < 2:
        errors.append("grid.points must be >= 2")
    if g["start"] is not None and g["stop"] is not None and not g["stop"] > g["start"]:
        errors.append("grid.stop must exceed grid.start")
    mm = values["multimode"]
    if not 0 < mm["chi_sq"] < values["system"]["chi"] / 2:
        errors.append("multimode.chi_sq must lie in (0, chi/2)")
    if not 0 < mm["coupling_ratio"] < 0.3:
        errors.append("multimode.coupling_ratio must lie in (0, 0.3)")
    if mm["n1_fock"] < 2 or mm["n2_fock"] < 2:
        errors.append("multimode truncations must be >= 2")
    tr = values["transmon"]
    if tr["ec"] <= 0 or any(r <= 0 for r in tr["ej_over_ec"]):
        errors.append("transmon ec and ej_over_ec must be positive")
    if tr["levels"] < 3:
        errors.append("transmon.levels must be >= 3")
    if tr["ng_points"] < 2:
        errors.append("transmon.ng_points must be >= 2")
    for k, v in values["tolerances"].items():
        if not v > 0:
            errors.append(f"tolerances.{k} must be > 0")
    return errors


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_config(cfg: RunConfig) -> str:
    """Serialize so that ``parse_config(emit_config(c)) == c``."""
    lines = []
    for sec, keys in cfg.values.items():
        body = [f"{k} = {_fmt(v)}" for k, v in keys.items() if v is not None]
        if body:
            lines.append(f"[{sec}]")
            lines.extend(body)
            lines.append("")
    return "\n".join(lines)
