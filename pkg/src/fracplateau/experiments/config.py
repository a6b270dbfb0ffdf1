"""Experiment configuration read from TOML with strict key checking."""

from dataclasses import dataclass, field, replace
import math
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from ..domain import Domain1D, ExteriorData, Grid1D, ObstacleSpec, PsiSpec
from ..functional import default_M
from ..kernel import KernelSpec
from ..solver import ObstacleProblem


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


_SCHEMA = {
    "domain": {"a", "b", "W", "h", "M"},
    "exterior": {"kind", "c", "m", "kappa", "table_x", "table_y"},
    "obstacle": {"region", "psi", "c0", "c1", "c2", "x0", "table_x", "table_y", "eps"},
    "kernel": {"n", "s"},
    "sweep": {"s_values", "k_levels", "tol", "max_iters", "method", "paired_eps",
              "window_check", "window_tol"},
    "output": {"dir", "record_wall_time", "plots"},
    "set": {"shape", "s_sequence", "method"},
}

DEFAULTS = {
    "domain": {"a": -1.0, "b": 1.0, "W": 20.0, "h": 1.0 / 64, "M": "auto"},
    "exterior": {"kind": "cone", "c": 0.0, "m": 0.0, "kappa": 2.0},
    "obstacle": {"region": [-0.4, 0.4], "psi": "constant", "c0": 0.5, "eps": 1.0},
    "kernel": {"n": 1, "s": 0.5},
    "sweep": {"s_values": [0.5, 0.25, 0.1, 0.05, 0.02], "tol": 1e-8, "max_iters": 200,
              "method": "newton", "paired_eps": [], "window_check": True, "window_tol": 1e-6},
    "output": {"dir": "out", "record_wall_time": False, "plots": True},
}


@dataclass(frozen=True)
class ProblemTemplate:
    """Everything of an obstacle problem except the fractional order."""

    domain: Domain1D
    h: float
    phi: ExteriorData
    obstacle: ObstacleSpec
    M: object = "auto"
    n: int = 1

    def resolved_M(self):
        if self.M == "auto":
            return default_M(self.domain, self.phi, self.obstacle)
        return float(self.M)

    def problem(self, s, h=None):
        h = self.h if h is None else h
        grid = Grid1D(self.domain, h, self.obstacle)
        return ObstacleProblem(KernelSpec(self.n, s), self.domain, grid, self.phi,
                               self.obstacle, self.resolved_M())

    def with_eps(self, eps):
        return replace(self, obstacle=replace(self.obstacle, eps=float(eps)))

    def to_dict(self):
        ob = self.obstacle
        return {
            "domain": {"a": self.domain.a, "b": self.domain.b, "W": self.domain.W,
                       "h": self.h, "M": self.M if self.M == "auto" else float(self.M),
                       "M_resolved": self.resolved_M()},
            "exterior": {"kind": self.phi.kind, "c": self.phi.c, "m": self.phi.m,
                         "kappa": self.phi.kappa, "table_x": list(self.phi.table_x),
                         "table_y": list(self.phi.table_y)},
            "obstacle": {"region": list(ob.region) if ob.region else None,
                         "psi": ob.psi.kind, "c0": ob.psi.c0, "c1": ob.psi.c1,
                         "c2": ob.psi.c2, "x0": ob.psi.x0, "eps": ob.eps},
            "kernel": {"n": self.n},
        }


@dataclass(frozen=True)
class SweepConfig:
    """A problem template with the list of fractional orders and threshold levels."""

    template: ProblemTemplate
    s_values: tuple
    k_levels: tuple = ()
    tol: float = 1e-8
    max_iters: int = 200
    method: str = "newton"
    out_dir: str = "out"
    record_wall_time: bool = False
    plots: bool = True
    paired_eps: tuple = ()
    window_check: bool = True
    window_tol: float = 1e-6
    source: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        s = list(self.s_values)
        if any(not 0.0 < v < 1.0 for v in s):
            raise ConfigError("s_values must lie in (0, 1)")
        if any(b >= a for a, b in zip(s, s[1:])):
            raise ConfigError("s_values must be strictly decreasing")
        k0 = self.k0
        if not self.k_levels:
            object.__setattr__(self, "k_levels", (float(k0),))
        if any(k < k0 for k in self.k_levels):
            raise ConfigError(f"k_levels must be at least k0 = {k0}")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.window_tol <= 0:
            raise ConfigError("window_tol must be positive")

    @property
    def k0(self):
        """2 + ceil(max(sup|psi|, sup of |phi| on Omega_1 minus Omega))."""
        t = self.template
        om = t.domain
        sup_phi = t.phi.sup_abs([(om.a - 1.0, om.a), (om.b, om.b + 1.0)])
        sup_psi = replace(t.obstacle, eps=1.0).sup_abs()
        return 2 + int(math.ceil(max(sup_psi, sup_phi)))


def _section(raw, name):
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    unknown = set(sec) - _SCHEMA[name]
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    out = dict(DEFAULTS.get(name, {}))
    out.update(sec)
    return out


def _template(raw):
    d = _section(raw, "domain")
    e = _section(raw, "exterior")
    o = _section(raw, "obstacle")
    k = _section(raw, "kernel")
    try:
        domain = Domain1D(float(d["a"]), float(d["b"]), float(d["W"]))
        kind = e["kind"]
        if kind == "constant":
            phi = ExteriorData.constant(e["c"])
        elif kind == "affine":
            phi = ExteriorData.affine(e["c"], e["m"])
        elif kind == "cone":
            phi = ExteriorData.cone(e["kappa"], e["c"], e["m"])
        elif kind == "tabulated":
            phi = ExteriorData.tabulated(e["table_x"], e["table_y"])
        else:
            raise ConfigError(f"unknown exterior kind {kind!r}")
        region = o["region"]
        if region in (None, "none", "empty", []):
            region = None
        elif region == "omega":
            region = (domain.a, domain.b)
        else:
            region = tuple(map(float, region))
        psi = PsiSpec(o["psi"], float(o.get("c0", 0.0)), float(o.get("c1", 0.0)),
                      float(o.get("c2", 0.0)), float(o.get("x0", 0.0)),
                      tuple(o.get("table_x", ())), tuple(o.get("table_y", ())))
        obstacle = ObstacleSpec(region, psi, float(o["eps"]))
        obstacle.check_inside(domain)
        M = d["M"]
        if M != "auto":
            M = float(M)
        h = float(d["h"])
        Grid1D(domain, h, obstacle)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    return ProblemTemplate(domain, h, phi, obstacle, M, int(k["n"]))


def load_raw(path):
    p = Path(path)
    try:
        with p.open("rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    unknown = set(raw) - set(_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    return raw


def sweep_config_from_dict(raw, overrides=None):
    """Build a SweepConfig from parsed TOML; ``overrides`` may set h, tol, out_dir."""
    overrides = overrides or {}
    unknown = set(raw) - set(_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    tpl = _template(raw)
    if overrides.get("h") is not None:
        try:
            Grid1D(tpl.domain, overrides["h"], tpl.obstacle)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        tpl = replace(tpl, h=float(overrides["h"]))
    sw = _section(raw, "sweep")
    out = _section(raw, "output")
    tol = overrides.get("tol") or float(sw["tol"])
    try:
        return SweepConfig(
            template=tpl,
            s_values=tuple(float(v) for v in sw["s_values"]),
            k_levels=tuple(float(v) for v in sw.get("k_levels", ())),
            tol=float(tol),
            max_iters=int(sw["max_iters"]),
            method=str(sw["method"]),
            out_dir=str(overrides.get("out_dir") or out["dir"]),
            record_wall_time=bool(out["record_wall_time"]),
            plots=bool(out["plots"]),
            paired_eps=tuple(float(v) for v in sw["paired_eps"]),
            window_check=bool(sw["window_check"]),
            window_tol=float(sw["window_tol"]),
            source=raw,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path, overrides=None):
    return sweep_config_from_dict(load_raw(path), overrides)


def kernel_s(raw):
    return float(_section(raw, "kernel")["s"])


def set_section(raw):
    """The optional [set] table: a shape description plus the s sequence for alpha."""
    sec = raw.get("set", {})
    unknown = set(sec) - _SCHEMA["set"]
    if unknown:
        raise ConfigError(f"unknown keys in [set]: {sorted(unknown)}")
    return sec
