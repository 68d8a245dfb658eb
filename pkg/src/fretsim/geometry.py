"""Distance dependence of the transfer rate (sixth-power law).

Diagnostic module: the simulation drives the transfer rate directly as
an OU process, while these helpers map between rate and inter-dye
distance and quantify when the linear-in-displacement approximation of
the rate fluctuation is faithful to the sixth-power law. Distances are
in Angstrom throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError


@dataclass(frozen=True)
class ForsterParams:
    """Transfer-rate geometry: critical radius ``r0`` at which the rate
    equals the donor decay rate ``gamma1``, and the reference distance
    ``r_ref`` about which displacements are measured."""

    r0: float = 53.0
    gamma1: float = 1.0
    r_ref: float = 53.0

    def __post_init__(self):
        if not (self.r0 > 0 and math.isfinite(self.r0)):
            raise ConfigurationError("r0 must be positive and finite")
        if not (self.r_ref > 0 and math.isfinite(self.r_ref)):
            raise ConfigurationError("r_ref must be positive and finite")
        if not (self.gamma1 >= 0 and math.isfinite(self.gamma1)):
            raise ConfigurationError("gamma1 must be nonnegative and finite")


def rate_from_distance(r: float, params: ForsterParams) -> float:
    """Transfer rate at separation r: ``gamma1 * (r0 / r)**6``."""
    if r <= 0:
        raise ValueError("distance must be positive")
    return params.gamma1 * (params.r0 / r) ** 6


def distance_from_rate(gamma5: float, params: ForsterParams) -> float:
    """Exact inverse of :func:`rate_from_distance`."""
    if gamma5 <= 0:
        raise ValueError("rate must be positive")
    return params.r0 * (params.gamma1 / gamma5) ** (1.0 / 6.0)


def exact_delta_gamma(x: float, params: ForsterParams, gamma5_0: float) -> float:
    """Full sixth-power rate change for a displacement x from r_ref:
    ``gamma5_0 / (1 + x/r_ref)**6 - gamma5_0``."""
    if x <= -params.r_ref:
        raise ValueError("displacement must keep the separation positive")
    return gamma5_0 / (1.0 + x / params.r_ref) ** 6 - gamma5_0


def linearized_delta_gamma(x: float, params: ForsterParams,
                           gamma5_0: float) -> float:
    """First-order rate change ``-6 * gamma5_0 * x / r_ref``.

    Valid for |x| small against r_ref (the precondition |x| < r_ref is
    enforced; accuracy degrades well before that limit).
    """
    if abs(x) >= params.r_ref:
        raise ValueError("|x| must be smaller than r_ref")
    return -6.0 * gamma5_0 * x / params.r_ref
