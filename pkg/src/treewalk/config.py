"""INI run configurations: ``[group]``, ``[measure]`` and ``[options]``.

Example::

    [group]
    involutions = a b c
    free =

    [measure]
    a = 1/3
    b = 1/3
    c = 1/3

    [options]
    tol = 1e-12
"""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .group_tree import GroupSpec
from .walk_kernel import MeasureError, StepMeasure


class ConfigError(ValueError):
    pass


DEFAULTS = {"tol": 1e-12, "nmax": 16, "seed": 0, "r_max": 64.0}


@dataclass(frozen=True)
class RunConfig:
    measure: StepMeasure
    tol: float = DEFAULTS["tol"]
    nmax: int = DEFAULTS["nmax"]
    seed: int = DEFAULTS["seed"]
    r_max: float = DEFAULTS["r_max"]
    name: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def group(self) -> GroupSpec:
        return self.measure.group

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str  # generator names are case sensitive
    return cp


def parse_config(text: str, name: str = "") -> RunConfig:
    cp = _parser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    for section in ("group", "measure"):
        if not cp.has_section(section):
            raise ConfigError(f"missing [{section}] section")
    grp = cp["group"]
    try:
        group = GroupSpec(grp.get("involutions", "").split(), grp.get("free", "").split())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    weights = {}
    for word, value in cp["measure"].items():
        try:
            weights[word] = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad weight for {word!r}: {value!r}") from exc
    try:
        measure = StepMeasure.from_words(group, weights)
    except MeasureError as exc:
        raise ConfigError(str(exc)) from exc
    except ValueError as exc:
        raise ConfigError(f"bad word in [measure]: {exc}") from exc
    opts = cp["options"] if cp.has_section("options") else {}
    known = {}
    extra = {}
    for key, value in dict(opts).items():
        if key not in DEFAULTS:
            extra[key] = value
            continue
        try:
            known[key] = type(DEFAULTS[key])(float(value)) if key in ("nmax", "seed") else float(value)
        except ValueError as exc:
            raise ConfigError(f"bad option {key} = {value!r}") from exc
    return RunConfig(measure, name=name, extra=extra, **known)


def load_config(source: str | Path) -> RunConfig:
    """Load from a path, or from a bundled name such as ``nn3``."""
    path = Path(source)
    if path.exists():
        return parse_config(path.read_text(), path.stem)
    bundled = resources.files("treewalk") / "data" / f"{source}.ini"
    if bundled.is_file():
        return parse_config(bundled.read_text(), str(source))
    raise ConfigError(f"config not found: {source}")


def dump_config(cfg: RunConfig) -> str:
    cp = _parser()
    g = cfg.group
    cp["group"] = {"involutions": " ".join(g.involutions), "free": " ".join(g.free)}
    cp["measure"] = {g.format(w): str(p) for w, p in cfg.measure.steps}
    opts = {"tol": repr(cfg.tol), "nmax": str(cfg.nmax), "seed": str(cfg.seed),
            "r_max": repr(cfg.r_max)}
    opts.update({k: str(v) for k, v in cfg.extra.items()})
    cp["options"] = opts
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
