"""Run configuration: a flat, sectioned TOML document.

Every key is optional; the defaults reproduce the two-state benchmark with
a 2 s measurement delay::

    [system]
    d = 2.0            # measurement delay, s
    omega = 3.0        # harmonic frequency, rad/s
    a1 = 1.0           # sin amplitude of theta
    a2 = 1.7320508...  # cos amplitude of theta (sqrt 3)
    x0 = [1.0, 2.0]
    u_amp = 2.0        # u(t) = u_amp * sin(u_freq * t)
    u_freq = 1.0

    [filters]
    lambda1 = 10.0     # frequency-regression filter pole
    lambda2 = 10.0     # amplitude-regression filter pole
    lambda3 = 10.0     # regressor-extension forgetting rate
    filter_init = "dc" # "dc": latch each filter at equilibrium for its first
                       # input sample; "zero": all internal states start at 0

    [gains]
    gamma1 = 10.0      # frequency estimator
    gamma2 = 100.0     # amplitude estimator
    gamma3 = 100.0     # initial-error estimator
    gamma_w = 100.0    # finite-time weight; defaults to gamma3

    [run]
    h = 0.001
    horizon = 40.0
    mu = 0.01          # clipping margin, in (0, 1)
    v_floor = 1e-8
    t_switch = 5.0     # observer estimator start time
    oracle_theta = false
    known_omega = false
    freeze_omega_at_switch = false
    integrate_from_switch = true   # observer copy and Phi start at t_switch
                                   # (false: integrate from 0, estimator frozen)
    decimate = 10
    scenario = "run"
    out = ""
"""

import dataclasses
import math
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from ltvobs.errors import ConfigError
from ltvobs.plant import example_system

SECTIONS = {
    "system": ("d", "omega", "a1", "a2", "x0", "u_amp", "u_freq"),
    "filters": ("lambda1", "lambda2", "lambda3", "filter_init"),
    "gains": ("gamma1", "gamma2", "gamma3", "gamma_w"),
    "run": ("h", "horizon", "mu", "v_floor", "t_switch", "oracle_theta", "known_omega",
            "freeze_omega_at_switch", "integrate_from_switch", "decimate", "scenario", "out"),
}


@dataclass
class RunConfig:
    d: float = 2.0
    omega: float = 3.0
    a1: float = 1.0
    a2: float = math.sqrt(3.0)
    x0: tuple = (1.0, 2.0)
    u_amp: float = 2.0
    u_freq: float = 1.0
    lambda1: float = 10.0
    lambda2: float = 10.0
    lambda3: float = 10.0
    filter_init: str = "dc"
    gamma1: float = 10.0
    gamma2: float = 100.0
    gamma3: float = 100.0
    gamma_w: float = None
    h: float = 1e-3
    horizon: float = 40.0
    mu: float = 0.01
    v_floor: float = 1e-8
    t_switch: float = 5.0
    oracle_theta: bool = False
    known_omega: bool = False
    freeze_omega_at_switch: bool = False
    integrate_from_switch: bool = True
    decimate: int = 10
    scenario: str = "run"
    out: str = ""
    system: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.gamma_w is None:
            self.gamma_w = self.gamma3
        self.x0 = tuple(float(v) for v in self.x0)
        self.validate()

    def validate(self):
        positive = ("omega", "lambda1", "lambda2", "lambda3", "gamma1", "gamma2", "gamma3",
                    "gamma_w", "h", "v_floor")
        for key in positive:
            if not getattr(self, key) > 0:
                raise ConfigError(key, f"{key} must be positive")
        if self.d < 0:
            raise ConfigError("d", "delay must be non-negative")
        if abs(self.d / self.h - round(self.d / self.h)) > 1e-9:
            raise ConfigError("d", "delay must be a whole number of grid steps h")
        if not 0.0 < self.mu < 1.0:
            raise ConfigError("mu", "mu must lie in (0,1)")
        if not self.horizon > self.d:
            raise ConfigError("horizon", "horizon must exceed the delay d")
        if self.t_switch < 0:
            raise ConfigError("t_switch", "t_switch must be non-negative")
        if int(self.decimate) != self.decimate or self.decimate < 1:
            raise ConfigError("decimate", "decimate must be a positive integer")
        if self.filter_init not in ("dc", "zero"):
            raise ConfigError("filter_init", 'filter_init must be "dc" or "zero"')
        if len(self.x0) < 1:
            raise ConfigError("x0", "x0 must be a non-empty list")

    def replace(self, **changes):
        if "gamma3" in changes and "gamma_w" not in changes and self.gamma_w == self.gamma3:
            changes["gamma_w"] = changes["gamma3"]
        return dataclasses.replace(self, **changes)

    def build_system(self):
        if self.system is not None:
            return self.system
        return example_system(d=self.d, omega=self.omega, a1=self.a1, a2=self.a2, x0=self.x0,
                              u_amp=self.u_amp, u_freq=self.u_freq)

    def gains_tag(self):
        return f"g1-{self.gamma1:g}_g2-{self.gamma2:g}_g3-{self.gamma3:g}"

    def file_stem(self):
        return f"{self.scenario}_d{self.d:g}_{self.gains_tag()}"


def load_config(text):
    """Parse a configuration document into a validated :class:`RunConfig`."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<document>", str(exc)) from None
    values = {}
    for section, body in doc.items():
        if section not in SECTIONS:
            raise ConfigError(section, "unknown section")
        if not isinstance(body, dict):
            raise ConfigError(section, "expected a section table")
        for key, value in body.items():
            if key not in SECTIONS[section]:
                raise ConfigError(f"{section}.{key}", "unknown key")
            values[key] = value
    try:
        return RunConfig(**values)
    except ConfigError as exc:
        section = next((s for s, keys in SECTIONS.items() if exc.key in keys), None)
        if section is None:
            raise
        raise ConfigError(f"{section}.{exc.key}", str(exc).split(": ", 1)[1]) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError("<document>", str(exc)) from None


def load_config_file(path):
    with open(path, encoding="utf-8") as fh:
        return load_config(fh.read())
