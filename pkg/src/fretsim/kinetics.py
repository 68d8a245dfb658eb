"""Four-state donor-acceptor population kinetics.

The joint state of the dye pair is the diagonal of the density operator
in the product basis |donor, acceptor>; optical coherences play no role
and are not tracked. Index order is 0 = |00>, 1 = |01>, 2 = |10>,
3 = |11>, donor occupation first.

Five jump channels move population: donor decay (gamma1), acceptor decay
(gamma2), donor excitation (gamma3), acceptor excitation (gamma4) and
donor-to-acceptor transfer (gamma5), the last acting on |10> -> |01>
only since the transfer operator annihilates |11> and the donor-ground
states.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from . import _kernels
from .errors import ConfigurationError, IntegrationError, SingularGeneratorError
from .noise import RatePath


class JumpChannel(enum.Enum):
    DONOR = "donor"
    ACCEPTOR = "acceptor"


# (source, target) population transfers of each channel
_DONOR_DECAY = ((2, 0), (3, 1))
_ACCEPTOR_DECAY = ((1, 0), (3, 2))
_DONOR_PUMP = ((0, 2), (1, 3))
_ACCEPTOR_PUMP = ((0, 1), (2, 3))
_TRANSFER = ((2, 1),)
_TRANSFER_REVERSED = ((1, 2),)


@dataclass(frozen=True)
class RateSet:
    """Constant rate coefficients of the pair.

    ``gamma4`` may alternatively be given through the off-resonant
    excitation fraction ``f`` as ``gamma4 = f * gamma3`` (exactly).
    ``gamma5`` carries the transfer rate when it is constant, or a
    :class:`RatePath` when it fluctuates; the kinetics operations take
    the instantaneous value explicitly. ``reverse_transfer`` builds the
    label-mirrored system (transfer acceptor -> donor), which represents
    the same physics with the donor/acceptor names exchanged.
    """

    gamma1: float
    gamma2: float
    gamma3: float
    gamma4: float | None = None
    f: float | None = None
    gamma5: Union[float, RatePath, None] = None
    reverse_transfer: bool = False

    def __post_init__(self):
        if self.f is not None:
            if self.f < 0 or not math.isfinite(self.f):
                raise ConfigurationError("f must be nonnegative and finite")
            derived = self.f * self.gamma3
            if self.gamma4 is not None and self.gamma4 != derived:
                raise ConfigurationError(
                    f"gamma4={self.gamma4} conflicts with f*gamma3={derived}")
            object.__setattr__(self, "gamma4", derived)
        if self.gamma4 is None:
            raise ConfigurationError("either gamma4 or f is required")
        for name in ("gamma1", "gamma2", "gamma3", "gamma4"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ConfigurationError(f"{name} must be nonnegative and finite")

    def mirrored(self) -> "RateSet":
        """The same system with the donor/acceptor labels exchanged."""
        return RateSet(gamma1=self.gamma2, gamma2=self.gamma1,
                       gamma3=self.gamma4, gamma4=self.gamma3,
                       gamma5=self.gamma5,
                       reverse_transfer=not self.reverse_transfer)


@dataclass(frozen=True)
class PopulationState:
    """Probabilities of the four basis states (donor index first)."""

    p00: float
    p01: float
    p10: float
    p11: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p00, self.p01, self.p10, self.p11])

    @classmethod
    def from_array(cls, a) -> "PopulationState":
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @classmethod
    def uniform(cls) -> "PopulationState":
        return cls(0.25, 0.25, 0.25, 0.25)

    def total(self) -> float:
        return self.p00 + self.p01 + self.p10 + self.p11

    def validate_normalized(self, tol: float = 1e-9) -> None:
        for v in (self.p00, self.p01, self.p10, self.p11):
            if not -tol <= v <= 1.0 + tol:
                raise ValueError(f"population {v} outside [0, 1]")
        if abs(self.total() - 1.0) > tol:
            raise ValueError(f"populations sum to {self.total()}, not 1")


def build_generator(rates: RateSet, gamma5_now: float) -> np.ndarray:
    """Population-transfer generator M with dP/dt = M P.

    Columns sum to zero by construction (probability conservation).
    """
    if not (gamma5_now >= 0 and math.isfinite(gamma5_now)):
        raise ConfigurationError("gamma5 must be nonnegative and finite")
    transfer = _TRANSFER_REVERSED if rates.reverse_transfer else _TRANSFER
    m = np.zeros((4, 4))
    for value, moves in ((rates.gamma1, _DONOR_DECAY),
                         (rates.gamma2, _ACCEPTOR_DECAY),
                         (rates.gamma3, _DONOR_PUMP),
                         (rates.gamma4, _ACCEPTOR_PUMP),
                         (gamma5_now, transfer)):
        for src, dst in moves:
            m[dst, src] += value
            m[src, src] -= value
    return m


def generator_parts(rates: RateSet) -> tuple[np.ndarray, np.ndarray]:
    """Split M(gamma5) = m0 + gamma5 * m5 for time-dependent propagation."""
    m0 = build_generator(rates, 0.0)
    transfer = _TRANSFER_REVERSED if rates.reverse_transfer else _TRANSFER
    m5 = np.zeros((4, 4))
    for src, dst in transfer:
        m5[dst, src] += 1.0
        m5[src, src] -= 1.0
    return m0, m5


_NO_RECORD = np.empty(0)


def _steps_on_grid(span: float, dt: float) -> int:
    k = int(round(span / dt))
    if abs(k * dt - span) > 1e-9 * max(dt, span):
        raise ConfigurationError(f"span {span} is not a multiple of dt={dt}")
    return k


def _raise_on_status(status: int, drift: float) -> None:
    if status == _kernels.RK_DRIFT:
        raise IntegrationError(
            f"probability drift {drift:.3e} exceeded 1e-6 in one step")
    if status == _kernels.RK_NEGATIVE:
        raise IntegrationError("population went below -1e-12")


def propagate(state: PopulationState, rates: RateSet, path: RatePath,
              t_span: float, *, return_drift: bool = False):
    """Integrate dP/dt = M(gamma5(t)) P over ``t_span`` along ``path``.

    Fixed-step 4th-order Runge-Kutta on the path grid, with gamma5 held
    constant within each dt step. The state is renormalized every step;
    the largest pre-normalization drift is returned when requested.
    """
    if t_span < 0:
        raise ConfigurationError("t_span must be nonnegative")
    n_steps = _steps_on_grid(t_span, path.dt)
    if n_steps == 0:
        out = replace(state)
        return (out, 0.0) if return_drift else out
    if path.n < n_steps:
        raise ConfigurationError(
            f"path has {path.n} steps but the span needs {n_steps}")
    p = state.as_array()
    m0, m5 = generator_parts(rates)
    status, drift = _kernels.rk4_run(p, m0, m5, path.values, 0, n_steps,
                                     path.dt, _NO_RECORD, _NO_RECORD, False)
    _raise_on_status(status, drift)
    out = PopulationState.from_array(p)
    return (out, drift) if return_drift else out


def steady_state_fixed(rates: RateSet, gamma5: float) -> PopulationState:
    """Stationary populations for a constant transfer rate.

    Solves M P = 0 with sum(P) = 1 by direct linear algebra; the chain
    must be irreducible (at least one excitation and one decay channel).
    """
    if rates.gamma3 <= 0 and rates.gamma4 <= 0:
        raise SingularGeneratorError(
            "no excitation channel: stationary state is not unique")
    if rates.gamma1 <= 0 and rates.gamma2 <= 0:
        raise SingularGeneratorError(
            "no decay channel: stationary state is not unique")
    m = build_generator(rates, gamma5)
    a = np.vstack([m[:3], np.ones(4)])
    try:
        p = np.linalg.solve(a, np.array([0.0, 0.0, 0.0, 1.0]))
    except np.linalg.LinAlgError as exc:
        raise SingularGeneratorError(f"singular generator: {exc}") from exc
    scale = 1.0 + float(np.abs(m).max())
    if (not np.all(np.isfinite(p)) or np.any(p < -1e-9)
            or float(np.abs(m @ p).max()) > 1e-8 * scale):
        raise SingularGeneratorError(
            "generator is reducible; stationary state is not unique")
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    return PopulationState.from_array(p)


def apply_emission_collapse(state: PopulationState,
                            channel: JumpChannel) -> tuple[PopulationState, float]:
    """Condition the state on a photon detected in ``channel``.

    Returns the unnormalized post-emission populations together with the
    collapse weight, which equals the pre-collapse emission intensity of
    that channel.
    """
    if channel is JumpChannel.DONOR:
        collapsed = PopulationState(p00=state.p10, p01=state.p11, p10=0.0, p11=0.0)
        weight = state.p10 + state.p11
    else:
        collapsed = PopulationState(p00=state.p01, p01=0.0, p10=state.p11, p11=0.0)
        weight = state.p01 + state.p11
    return collapsed, weight


def intensity(state: PopulationState, channel: JumpChannel) -> float:
    """Emission intensity of one channel: its excited-manifold population."""
    if channel is JumpChannel.DONOR:
        return state.p10 + state.p11
    return state.p01 + state.p11
