"""Slow-noise (adiabatic) closed forms used as analytic cross-checks.

When the rate fluctuation is much slower than the optical kinetics the
excited populations track the instantaneous transfer rate, the acceptor
intensity follows a simple branching formula, and a dual-rate model
switching between a high and a low intensity gives an exponential
bunching tail. Both are approximations; the full simulation is the
reference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class AdiabaticParams:
    """Inputs of the adiabatic intensity and dual-rate bunching formulas."""

    gamma1: float
    gamma3: float
    f: float
    gamma_high: float = 5.0
    gamma_low: float = 0.0
    tau_c: float = 7.0

    def __post_init__(self):
        if not (self.gamma_high >= self.gamma_low >= 0.0):
            raise ConfigurationError("need gamma_high >= gamma_low >= 0")
        if not math.isfinite(self.gamma_high):
            raise ConfigurationError("gamma_high must be finite")
        if not (self.tau_c > 0 and math.isfinite(self.tau_c)):
            raise ConfigurationError("tau_c must be positive and finite")
        for name in ("gamma1", "gamma3", "f"):
            v = getattr(self, name)
            if v < 0 or not math.isfinite(v):
                raise ConfigurationError(f"{name} must be nonnegative and finite")


def intensity_adiabatic(gamma5: float, params: AdiabaticParams) -> float:
    """Acceptor intensity when populations track the transfer rate:
    ``gamma3 * (f + gamma5 / (gamma5 + gamma1))``."""
    if gamma5 < 0:
        raise ValueError("gamma5 must be nonnegative")
    branching = gamma5 / (gamma5 + params.gamma1) if gamma5 > 0 else 0.0
    return params.gamma3 * (params.f + branching)


def g2_acceptor_adiabatic(tau, params: AdiabaticParams):
    """Dual-rate exponential bunching curve.

    ``1 + ((I_H - I_L) / (I_H + I_L))^2 * exp(-2 tau / tau_c)`` with the
    high/low intensities evaluated at gamma_high/gamma_low. The decay
    rate is read as 2/tau_c (twice the noise relaxation rate).
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be nonnegative")
    i_high = intensity_adiabatic(params.gamma_high, params)
    i_low = intensity_adiabatic(params.gamma_low, params)
    total = i_high + i_low
    contrast = ((i_high - i_low) / total) ** 2 if total > 0 else 0.0
    out = 1.0 + contrast * np.exp(-2.0 * tau / params.tau_c)
    return float(out) if out.ndim == 0 else out
