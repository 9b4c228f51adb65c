"""Scenario descriptions: a TOML file (or the equivalent JSON) parsed into ScenarioConfig.

Grammar (TOML; JSON uses the same nesting)::

    name  = "free_fall_eps"
    model = "classical_phase"      # see MODELS
    hbar  = 1.0

    [masses]
    M = 1.0                        # classical mass
    m = 1.0                        # quantum mass (hybrid models)

    [grid.q]                       # one table per axis: q, p, x
    min = -8.0
    max = 8.0
    points = 96
    boundary = "periodic"          # or "clamped"

    [potential]
    kind = "free_fall"             # none | free_fall | harmonic | hybrid_harmonic | custom_poly
    g = 1.0                        # free_fall; harmonic takes omega, hybrid_harmonic takes k
    # poly = "q^4/4"               # custom_poly: in q (classical) or s = q - x (hybrid)

    [initial]                      # model specific, see below
    centre = [0.0, 1.0]
    width  = [0.8, 0.6]
    sigma  = "q*p"                 # polynomial string or [[coeff, [exponents]], ...]

    [integrator]
    dt = 0.01
    T = 2.0
    stride = 10                    # output every `stride` steps
    splitting = "strang"

    [outputs]
    observables = ["q", "p", "p^2/2 + q"]
    quantum = ["x", "px"]          # hybrid models
    snapshots = [0.0, 2.0]
    report = { constraints = true, energies = true }
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError
from .numerics.grid import Axis, Grid, GridError
from .numerics.poly import PolyPhaseFn

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MODELS = {
    "classical_config": ("q",),
    "classical_phase": ("q", "p"),
    "classical_hilbert": ("q", "p"),
    "hybrid_ecs": ("q", "x"),
    "hybrid_hilbert": ("q", "p", "x"),
    "hybrid_lambda": ("q", "p", "x"),
    "galilei": (),
    "bridge": ("q", "p"),
}
CLASSICAL_POTENTIALS = ("none", "free_fall", "harmonic", "custom_poly")
HYBRID_POTENTIALS = ("none", "hybrid_harmonic", "custom_poly")
SPLITTINGS = ("strang",)
REPORT_KEYS = ("constraints", "energies", "madelung", "compare_liouville", "quantum_potential",
               "mutual_information")
STATIC_MODELS = ("hybrid_lambda", "galilei")


@dataclass(frozen=True)
class Integrator:
    dt: float
    T: float
    stride: int = 1
    splitting: str = "strang"
    converge: bool = False

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))


@dataclass(frozen=True)
class Outputs:
    observables: tuple[str, ...] = ()
    quantum: tuple[str, ...] = ()
    snapshots: tuple[float, ...] = ()
    report: dict = field(default_factory=dict)

    def wants(self, key: str) -> bool:
        return bool(self.report.get(key, False))


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    model: str
    axes: tuple[Axis, ...]
    M: float = 1.0
    m: float = 1.0
    hbar: float = 1.0
    potential: dict = field(default_factory=lambda: {"kind": "none"})
    initial: dict = field(default_factory=dict)
    integrator: Integrator | None = None
    outputs: Outputs = field(default_factory=Outputs)

    @property
    def grid(self) -> Grid:
        return Grid.make(*self.axes)

    def axis(self, name: str) -> Axis:
        for a in self.axes:
            if a.name == name:
                return a
        raise ConfigError(f"scenario {self.name!r} has no {name!r} axis")

    def observable_polys(self) -> list[tuple[str, PolyPhaseFn]]:
        return [(text, parse_poly(text, ("q", "p"))) for text in self.outputs.observables]

    def scaled(self, factor: float) -> "ScenarioConfig":
        """Same scenario with every axis carrying ``factor`` times as many points."""
        if factor <= 0:
            raise ConfigError("resolution scale must be positive")
        if factor == 1:
            return self
        return replace(self, axes=tuple(a.scaled(factor) for a in self.axes))

    def to_dict(self) -> dict:
        d = {"name": self.name, "model": self.model, "hbar": self.hbar,
             "masses": {"M": self.M, "m": self.m},
             "grid": {a.name: {k: v for k, v in a.to_dict().items() if k != "name"} for a in self.axes},
             "potential": dict(self.potential), "initial": dict(self.initial),
             "outputs": {"observables": list(self.outputs.observables),
                         "quantum": list(self.outputs.quantum),
                         "snapshots": list(self.outputs.snapshots),
                         "report": dict(self.outputs.report)}}
        if self.integrator is not None:
            it = self.integrator
            d["integrator"] = {"dt": it.dt, "T": it.T, "stride": it.stride,
                               "splitting": it.splitting, "converge": it.converge}
        return d


def parse_poly(spec, variables=("q", "p")) -> PolyPhaseFn:
    """A polynomial from a string expression or a ``[[coeff, [exps]], ...]`` list."""
    try:
        if isinstance(spec, str):
            return PolyPhaseFn.parse(spec, tuple(variables))
        if isinstance(spec, (int, float)):
            return PolyPhaseFn.const(spec, tuple(variables))
        if isinstance(spec, list):
            return PolyPhaseFn.from_terms(spec, tuple(variables))
    except Exception as exc:  # sympy raises a zoo of exception types
        raise ConfigError(f"cannot parse polynomial {spec!r}: {exc}") from None
    raise ConfigError(f"cannot parse polynomial {spec!r}")


def _number(d: dict, key: str, where: str, default=None, positive=False) -> float:
    if key not in d:
        if default is None:
            raise ConfigError(f"{where}: missing {key!r}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{where}.{key} must be positive, got {v}")
    return float(v)


def _parse_axes(raw: dict, model: str) -> tuple[Axis, ...]:
    if not isinstance(raw, dict):
        raise ConfigError("[grid] must be a table of axes")
    needed = MODELS[model]
    missing = [n for n in needed if n not in raw]
    if missing:
        raise ConfigError(f"model {model!r} needs grid axes {needed}, missing {missing}")
    extra = [n for n in raw if n not in needed]
    if extra:
        raise ConfigError(f"model {model!r} does not use grid axes {extra}")
    axes = []
    for name in needed:
        a = raw[name]
        if not isinstance(a, dict):
            raise ConfigError(f"grid.{name} must be a table")
        pts = a.get("points")
        if isinstance(pts, bool) or not isinstance(pts, int):
            raise ConfigError(f"grid.{name}.points must be an integer")
        try:
            axes.append(Axis(name, _number(a, "min", f"grid.{name}"), _number(a, "max", f"grid.{name}"),
                             pts, a.get("boundary", "periodic")))
        except GridError as exc:
            raise ConfigError(str(exc)) from None
    if axes:
        try:
            Grid.make(*axes)
        except GridError as exc:
            raise ConfigError(str(exc)) from None
    return tuple(axes)


def _parse_potential(raw: dict, model: str) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("[potential] must be a table")
    kind = raw.get("kind", "none")
    hybrid = model.startswith("hybrid")
    allowed = HYBRID_POTENTIALS if hybrid else CLASSICAL_POTENTIALS
    if kind not in allowed:
        raise ConfigError(f"potential kind {kind!r} not valid for model {model!r}; choose from {allowed}")
    out = {"kind": kind}
    if kind == "free_fall":
        out["g"] = _number(raw, "g", "potential")
    elif kind == "harmonic":
        out["omega"] = _number(raw, "omega", "potential", positive=True)
    elif kind == "hybrid_harmonic":
        out["k"] = _number(raw, "k", "potential")
    elif kind == "custom_poly":
        var = ("s",) if hybrid else ("q",)
        poly = parse_poly(raw.get("poly", ""), var)
        bad = [v for v in poly.variables if v not in var and poly.depends_on(v)]
        if bad:
            raise ConfigError(f"potential polynomial may use {var} only, found {bad}")
        out["poly"] = raw["poly"]
    return out


def _parse_integrator(raw, model: str) -> Integrator | None:
    if raw is None:
        if model in STATIC_MODELS:
            return None
        raise ConfigError(f"model {model!r} needs an [integrator] table")
    if not isinstance(raw, dict):
        raise ConfigError("[integrator] must be a table")
    dt = _number(raw, "dt", "integrator", positive=True)
    T = _number(raw, "T", "integrator")
    if T < dt:
        raise ConfigError(f"integrator.T = {T} is shorter than dt = {dt}")
    steps = T / dt
    if abs(steps - round(steps)) > 1e-9 * steps:
        raise ConfigError(f"integrator.T = {T} is not a whole number of steps of {dt}")
    stride = raw.get("stride", 1)
    if isinstance(stride, bool) or not isinstance(stride, int) or stride < 1:
        raise ConfigError("integrator.stride must be a positive integer")
    splitting = raw.get("splitting", "strang")
    if splitting not in SPLITTINGS:
        raise ConfigError(f"integrator.splitting must be one of {SPLITTINGS}")
    return Integrator(dt, T, stride, splitting, bool(raw.get("converge", False)))


def _parse_outputs(raw: dict, model: str, integ: Integrator | None) -> Outputs:
    if not isinstance(raw, dict):
        raise ConfigError("[outputs] must be a table")
    obs = raw.get("observables", [])
    if not isinstance(obs, list) or not all(isinstance(o, str) for o in obs):
        raise ConfigError("outputs.observables must be a list of polynomial strings")
    for o in obs:
        poly = parse_poly(o, ("q", "p"))
        bad = [v for v in poly.variables if v not in ("q", "p") and poly.depends_on(v)]
        if bad:
            raise ConfigError(f"observable {o!r} may use q and p only, found {bad}")
    quantum = raw.get("quantum", [])
    from .hybrid import QUANTUM_OPERATORS

    bad = [op for op in quantum if op not in QUANTUM_OPERATORS]
    if bad:
        raise ConfigError(f"unknown quantum operators {bad}; choose from {QUANTUM_OPERATORS}")
    if quantum and not model.startswith("hybrid"):
        raise ConfigError("quantum observables need a hybrid model")
    snaps = raw.get("snapshots", [])
    if not isinstance(snaps, list):
        raise ConfigError("outputs.snapshots must be a list of times")
    for s in snaps:
        if isinstance(s, bool) or not isinstance(s, (int, float)) or s < 0:
            raise ConfigError(f"bad snapshot time {s!r}")
        if integ is not None and s > integ.T + 1e-12:
            raise ConfigError(f"snapshot time {s} is after T = {integ.T}")
    report = raw.get("report", {})
    if not isinstance(report, dict):
        raise ConfigError("outputs.report must be a table of toggles")
    unknown = [k for k in report if k not in REPORT_KEYS]
    if unknown:
        raise ConfigError(f"unknown report toggles {unknown}; choose from {REPORT_KEYS}")
    return Outputs(tuple(obs), tuple(quantum), tuple(float(s) for s in snaps),
                   {k: bool(v) for k, v in report.items()})


def from_dict(d: dict) -> ScenarioConfig:
    if not isinstance(d, dict):
        raise ConfigError("scenario must be a table")
    name = d.get("name")
    if not isinstance(name, str) or not name:
        raise ConfigError("scenario needs a non-empty 'name'")
    model = d.get("model")
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}; choose from {sorted(MODELS)}")
    masses = d.get("masses", {})
    M = _number(masses, "M", "masses", 1.0, positive=True)
    m = _number(masses, "m", "masses", 1.0, positive=True)
    hbar = _number(d, "hbar", "scenario", 1.0, positive=True)
    axes = _parse_axes(d.get("grid", {}), model)
    potential = _parse_potential(d.get("potential", {}), model)
    initial = d.get("initial", {})
    if not isinstance(initial, dict):
        raise ConfigError("[initial] must be a table")
    integ = _parse_integrator(d.get("integrator"), model)
    outputs = _parse_outputs(d.get("outputs", {}), model, integ)
    return ScenarioConfig(name, model, axes, M, m, hbar, potential, dict(initial), integ, outputs)


def loads(text: str, fmt: str | None = None) -> ScenarioConfig:
    """Parse TOML or JSON text (``fmt`` = "toml" | "json"; guessed when None)."""
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "toml"
    try:
        raw = json.loads(text) if fmt == "json" else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse scenario ({fmt}): {exc}") from None
    return from_dict(raw)


def catalog_dir() -> Path:
    return Path(__file__).with_name("scenarios")


def catalog() -> list[str]:
    return sorted(p.stem for p in catalog_dir().glob("*.toml"))


def resolve(ref: str | Path) -> Path:
    """A path on disk, or the name of a shipped scenario (with or without extension)."""
    p = Path(ref)
    if p.is_file():
        return p
    stem = p.stem if p.suffix else p.name
    shipped = catalog_dir() / f"{stem}.toml"
    if shipped.is_file():
        return shipped
    raise ConfigError(f"no scenario file {str(ref)!r} and no shipped scenario named {stem!r}")


def load(ref: str | Path) -> ScenarioConfig:
    path = resolve(ref)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return loads(text, "json" if path.suffix == ".json" else None)
