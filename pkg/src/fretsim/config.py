"""Run configuration: defaults, config-file parsing and validation.

Configuration merges three layers in increasing precedence: built-in
defaults, a flat ``key = value`` config file (``#`` starts a comment),
and command-line flags. Unknown keys are errors, not warnings. The
built-in defaults reproduce the reference operating point of the model:
gamma1 = gamma2 = gamma3 = 1, gamma4 = 0.1, baseline transfer rate 0.65
bounded to [0, 5], correlation time 7 with diffusion 7 (unit stationary
variance), 1000 realizations at dt = 0.01.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .adiabatic import AdiabaticParams
from .correlator import EnsembleConfig, default_burn_in
from .errors import ConfigurationError
from .geometry import ForsterParams, distance_from_rate
from .kinetics import RateSet
from .noise import BoundingPolicy, OUParams, Scheme

_FLOAT, _INT, _BOOL, _STR = "float", "int", "bool", "str"

#: every accepted configuration key with its type and default.
#: ``None`` defaults are derived during resolution.
KEY_SPECS: dict[str, tuple[str, object]] = {
    "lambda": (_FLOAT, 1.0 / 7.0),
    "diffusion": (_FLOAT, 7.0),
    "gamma5_baseline": (_FLOAT, 0.65),
    "gamma5_min": (_FLOAT, 0.0),
    "gamma5_max": (_FLOAT, 5.0),
    "bounding_policy": (_STR, "reject_resample"),
    "scheme": (_STR, "exact"),
    "dt": (_FLOAT, 0.01),
    "gamma1": (_FLOAT, 1.0),
    "gamma2": (_FLOAT, 1.0),
    "gamma3": (_FLOAT, 1.0),
    "gamma4": (_FLOAT, None),
    "f": (_FLOAT, 0.1),
    "realizations": (_INT, 1000),
    "burn_in": (_FLOAT, None),
    "origins_per_path": (_INT, 4),
    "origin_spacing": (_FLOAT, None),
    "tau_max": (_FLOAT, 28.0),
    "r0": (_FLOAT, 53.0),
    "r_ref": (_FLOAT, None),
    "master_seed": (_INT, 1),
    "workers": (_INT, 1),
    "output_dir": (_STR, "out"),
    "emit_paths": (_BOOL, False),
    "emit_adiabatic": (_BOOL, True),
    "literal_eq10_normalization": (_BOOL, False),
}

_CHOICES = {
    "bounding_policy": tuple(p.value for p in BoundingPolicy),
    "scheme": tuple(s.value for s in Scheme),
}

_TRUE = {"true", "1", "yes", "on"}
_FALSE = {"false", "0", "no", "off"}


def _coerce(key: str, raw: str, where: str):
    kind = KEY_SPECS[key][0]
    try:
        if kind == _FLOAT:
            return float(raw)
        if kind == _INT:
            return int(raw)
        if kind == _BOOL:
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        value = raw
        if key in _CHOICES and value not in _CHOICES[key]:
            raise ValueError(f"must be one of {', '.join(_CHOICES[key])}")
        return value
    except ValueError as exc:
        detail = str(exc) if key in _CHOICES else f"expected {kind}, got {raw!r}"
        raise ConfigurationError(f"{where}: key '{key}': {detail}") from None


def parse_config_file(path) -> dict:
    """Read a flat ``key = value`` file into a typed mapping."""
    values: dict = {}
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{path}:{lineno}"
        if "=" not in line:
            raise ConfigurationError(f"{where}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in KEY_SPECS:
            raise ConfigurationError(f"{where}: unknown configuration key '{key}'")
        if not value:
            raise ConfigurationError(f"{where}: key '{key}' has no value")
        values[key] = _coerce(key, value, where)
    return values


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved and validated run configuration."""

    lam: float
    diffusion: float
    gamma5_baseline: float
    gamma5_min: float
    gamma5_max: float
    bounding_policy: BoundingPolicy
    scheme: Scheme
    dt: float
    gamma1: float
    gamma2: float
    gamma3: float
    gamma4: float
    f: float | None
    realizations: int
    burn_in: float
    origins_per_path: int
    origin_spacing: float
    tau_max: float
    r0: float
    r_ref: float
    master_seed: int
    workers: int
    output_dir: str
    emit_paths: bool
    emit_adiabatic: bool
    literal_eq10_normalization: bool

    # -- builders for the domain objects -----------------------------------
    def ou_params(self) -> OUParams:
        return OUParams(lam=self.lam, diffusion=self.diffusion,
                        baseline=self.gamma5_baseline,
                        lower_bound=self.gamma5_min,
                        upper_bound=self.gamma5_max,
                        policy=self.bounding_policy, dt=self.dt,
                        scheme=self.scheme)

    def rate_set(self) -> RateSet:
        return RateSet(gamma1=self.gamma1, gamma2=self.gamma2,
                       gamma3=self.gamma3, gamma4=self.gamma4, f=self.f)

    def ensemble_config(self) -> EnsembleConfig:
        return EnsembleConfig(n_realizations=self.realizations,
                              burn_in=self.burn_in,
                              n_origins_per_path=self.origins_per_path,
                              origin_spacing=self.origin_spacing,
                              tau_max=self.tau_max, dt=self.dt)

    def forster_params(self) -> ForsterParams:
        return ForsterParams(r0=self.r0, gamma1=self.gamma1, r_ref=self.r_ref)

    def adiabatic_params(self) -> AdiabaticParams:
        f = self.f if self.f is not None else (
            self.gamma4 / self.gamma3 if self.gamma3 > 0 else 0.0)
        return AdiabaticParams(gamma1=self.gamma1, gamma3=self.gamma3, f=f,
                               gamma_high=self.gamma5_max,
                               gamma_low=self.gamma5_min,
                               tau_c=1.0 / self.lam)

    def as_dict(self) -> dict:
        """Resolved key/value mapping, suitable as a config echo."""
        out = {
            "lambda": self.lam,
            "diffusion": self.diffusion,
            "gamma5_baseline": self.gamma5_baseline,
            "gamma5_min": self.gamma5_min,
            "gamma5_max": self.gamma5_max,
            "bounding_policy": self.bounding_policy.value,
            "scheme": self.scheme.value,
            "dt": self.dt,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "gamma3": self.gamma3,
            "gamma4": self.gamma4,
            "realizations": self.realizations,
            "burn_in": self.burn_in,
            "origins_per_path": self.origins_per_path,
            "origin_spacing": self.origin_spacing,
            "tau_max": self.tau_max,
            "r0": self.r0,
            "r_ref": self.r_ref,
            "master_seed": self.master_seed,
            "workers": self.workers,
            "output_dir": self.output_dir,
            "emit_paths": self.emit_paths,
            "emit_adiabatic": self.emit_adiabatic,
            "literal_eq10_normalization": self.literal_eq10_normalization,
        }
        if self.f is not None:
            out["f"] = self.f
        return out


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigurationError(message)


def resolve_config(file_values: Mapping | None = None,
                   overrides: Mapping | None = None) -> RunConfig:
    """Merge defaults < config file < flags and validate everything.

    ``overrides`` entries that are ``None`` are treated as absent.
    """
    merged = {key: default for key, (_, default) in KEY_SPECS.items()}
    user_keys: set[str] = set()
    for layer in (file_values or {}), {k: v for k, v in (overrides or {}).items()
                                       if v is not None}:
        for key, value in layer.items():
            if key not in KEY_SPECS:
                raise ConfigurationError(f"unknown configuration key '{key}'")
            merged[key] = value
            user_keys.add(key)

    # gamma4 given without f: the fraction no longer constrains the rate
    if "gamma4" in user_keys and "f" not in user_keys:
        merged["f"] = None
    _require(not ("gamma4" not in user_keys and merged["gamma4"] is None
                  and merged["f"] is None),
             "one of 'gamma4' or 'f' is required")

    lam = merged["lambda"]
    _require(lam > 0 and math.isfinite(lam), "key 'lambda': must be positive")
    _require(merged["diffusion"] >= 0 and math.isfinite(merged["diffusion"]),
             "key 'diffusion': must be nonnegative")
    _require(merged["dt"] > 0 and math.isfinite(merged["dt"]),
             "key 'dt': must be positive")
    for key in ("gamma1", "gamma2", "gamma3"):
        _require(merged[key] >= 0 and math.isfinite(merged[key]),
                 f"key '{key}': must be nonnegative")
    if merged["f"] is not None:
        _require(merged["f"] >= 0 and math.isfinite(merged["f"]),
                 "key 'f': must be nonnegative")
    if merged["gamma4"] is not None:
        _require(merged["gamma4"] >= 0 and math.isfinite(merged["gamma4"]),
                 "key 'gamma4': must be nonnegative")
    lo, hi, base = merged["gamma5_min"], merged["gamma5_max"], merged["gamma5_baseline"]
    _require(lo <= hi, "keys 'gamma5_min'/'gamma5_max': lower bound exceeds upper")
    if math.isfinite(lo):
        _require(0 <= lo <= base,
                 "key 'gamma5_baseline': must satisfy 0 <= gamma5_min <= gamma5_baseline")
    if math.isfinite(hi):
        _require(base <= hi,
                 "key 'gamma5_baseline': must not exceed gamma5_max")
    _require(merged["realizations"] >= 1, "key 'realizations': must be >= 1")
    _require(merged["origins_per_path"] >= 1, "key 'origins_per_path': must be >= 1")
    _require(merged["tau_max"] > 0, "key 'tau_max': must be positive")
    _require(merged["workers"] >= 1, "key 'workers': must be >= 1")
    _require(0 <= merged["master_seed"] < 2 ** 64,
             "key 'master_seed': must fit in 64 bits")
    _require(merged["r0"] > 0 and math.isfinite(merged["r0"]),
             "key 'r0': must be positive")

    policy = BoundingPolicy(merged["bounding_policy"])
    scheme = Scheme(merged["scheme"])

    # derived values
    gamma4 = merged["gamma4"]
    if merged["f"] is not None:
        gamma4 = merged["f"] * merged["gamma3"]
        if merged["gamma4"] is not None and merged["gamma4"] != gamma4:
            raise ConfigurationError(
                f"key 'gamma4': value {merged['gamma4']} conflicts with "
                f"f*gamma3 = {gamma4}")
    spacing = merged["origin_spacing"]
    if spacing is None:
        spacing = 1.0 / lam
    _require(spacing >= merged["dt"], "key 'origin_spacing': must be >= dt")
    r_ref = merged["r_ref"]
    if r_ref is None:
        r_ref = (distance_from_rate(base, ForsterParams(r0=merged["r0"],
                                                        gamma1=merged["gamma1"],
                                                        r_ref=merged["r0"]))
                 if base > 0 and merged["gamma1"] > 0 else merged["r0"])
    _require(r_ref > 0 and math.isfinite(r_ref), "key 'r_ref': must be positive")

    ou = OUParams(lam=lam, diffusion=merged["diffusion"], baseline=base,
                  lower_bound=lo, upper_bound=hi, policy=policy,
                  dt=merged["dt"], scheme=scheme)
    rates = RateSet(gamma1=merged["gamma1"], gamma2=merged["gamma2"],
                    gamma3=merged["gamma3"], gamma4=gamma4, f=merged["f"])
    burn_in = merged["burn_in"]
    if burn_in is None:
        burn_in = default_burn_in(ou, rates)
    _require(burn_in >= 0, "key 'burn_in': must be nonnegative")

    cfg = RunConfig(
        lam=lam, diffusion=merged["diffusion"], gamma5_baseline=base,
        gamma5_min=lo, gamma5_max=hi, bounding_policy=policy, scheme=scheme,
        dt=merged["dt"], gamma1=merged["gamma1"], gamma2=merged["gamma2"],
        gamma3=merged["gamma3"], gamma4=rates.gamma4, f=merged["f"],
        realizations=merged["realizations"], burn_in=burn_in,
        origins_per_path=merged["origins_per_path"], origin_spacing=spacing,
        tau_max=merged["tau_max"], r0=merged["r0"], r_ref=r_ref,
        master_seed=merged["master_seed"], workers=merged["workers"],
        output_dir=merged["output_dir"], emit_paths=merged["emit_paths"],
        emit_adiabatic=merged["emit_adiabatic"],
        literal_eq10_normalization=merged["literal_eq10_normalization"])

    # cross-validate the composite objects (burn-in floor, dt coupling)
    from .correlator import validate_ensemble
    validate_ensemble(cfg.ensemble_config(), ou, rates)
    cfg.forster_params()
    return cfg
