"""Bounded Ornstein-Uhlenbeck trajectories for the energy-transfer rate.

The transfer rate is modelled as ``rate(t) = baseline + xi(t)`` where xi
is a stationary zero-mean OU process with relaxation rate ``lam`` and
noise amplitude ``diffusion``, so its autocovariance is
``diffusion * lam * exp(-lam * |t - t'|)``. Samples outside the physical
band [lower_bound, upper_bound] are handled by a selectable bounding
policy; the default redraws the offending deviate.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from . import _kernels
from .errors import ConfigurationError, GridMismatchError, ResampleLimitError
from .rng import SeededRng, standard_normals


class BoundingPolicy(enum.Enum):
    """How samples that leave [lower_bound, upper_bound] are treated."""

    REJECT_RESAMPLE = "reject_resample"
    CLIP = "clip"
    REFLECT = "reflect"

    @property
    def code(self) -> int:
        return {
            BoundingPolicy.REJECT_RESAMPLE: _kernels.POLICY_REJECT,
            BoundingPolicy.CLIP: _kernels.POLICY_CLIP,
            BoundingPolicy.REFLECT: _kernels.POLICY_REFLECT,
        }[self]


class Scheme(enum.Enum):
    """Discretization of the OU recursion."""

    EULER_MARUYAMA = "euler_maruyama"
    EXACT = "exact"


@dataclass(frozen=True)
class OUParams:
    """Parameters of the bounded OU rate process.

    ``lam`` is the inverse correlation time (1/tau_c) and ``diffusion``
    the noise amplitude, giving stationary variance ``diffusion * lam``.
    Bounds may be set to ``-inf``/``inf`` to disable bounding on that
    side (used by the unbounded statistical validation runs); finite
    bounds must satisfy ``0 <= lower_bound <= baseline <= upper_bound``.
    """

    lam: float
    diffusion: float
    baseline: float
    lower_bound: float = 0.0
    upper_bound: float = 5.0
    policy: BoundingPolicy = BoundingPolicy.REJECT_RESAMPLE
    dt: float = 0.01
    scheme: Scheme = Scheme.EXACT

    def __post_init__(self):
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise ConfigurationError("lambda must be positive and finite")
        if not (self.diffusion >= 0.0 and math.isfinite(self.diffusion)):
            raise ConfigurationError("diffusion must be nonnegative and finite")
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ConfigurationError("dt must be positive and finite")
        if not math.isfinite(self.baseline):
            raise ConfigurationError("baseline must be finite")
        if self.lower_bound > self.upper_bound:
            raise ConfigurationError("lower bound exceeds upper bound")
        if math.isfinite(self.lower_bound) and not 0.0 <= self.lower_bound <= self.baseline:
            raise ConfigurationError(
                "bounds must satisfy 0 <= lower_bound <= baseline")
        if math.isfinite(self.upper_bound) and self.baseline > self.upper_bound:
            raise ConfigurationError("baseline exceeds upper bound")
        if self.scheme is Scheme.EULER_MARUYAMA and self.dt >= 1.0 / self.lam:
            raise ConfigurationError(
                "Euler-Maruyama is unstable for dt >= 1/lambda; "
                "reduce dt or use the exact scheme")

    @property
    def tau_c(self) -> float:
        return 1.0 / self.lam

    @property
    def stationary_std(self) -> float:
        return math.sqrt(self.diffusion * self.lam)

    def step_coefficients(self) -> tuple[float, float]:
        """Per-step (decay, noise) coefficients of ``xi' = decay*xi + noise*z``."""
        if self.scheme is Scheme.EXACT:
            decay = math.exp(-self.lam * self.dt)
            noise = math.sqrt(self.diffusion * self.lam * (1.0 - decay * decay))
        else:
            decay = 1.0 - self.lam * self.dt
            noise = self.lam * math.sqrt(2.0 * self.diffusion * self.dt)
        return decay, noise


@dataclass(eq=False)
class RatePath:
    """A transfer-rate trajectory sampled on a uniform grid."""

    t0: float
    dt: float
    values: np.ndarray

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    def mean(self) -> float:
        return float(self.values.mean())

    @classmethod
    def constant(cls, value: float, dt: float, n: int, t0: float = 0.0) -> "RatePath":
        return cls(t0=t0, dt=dt, values=np.full(n, float(value)))


class AutocorrelationEstimate(NamedTuple):
    lags: np.ndarray
    values: np.ndarray


def ou_step(xi: float, params: OUParams, z: float) -> float:
    """One unbounded OU update of the fluctuation xi driven by deviate z.

    Exact scheme: ``xi * exp(-lam dt) + sqrt(D lam (1 - exp(-2 lam dt))) z``.
    Euler-Maruyama: ``xi (1 - lam dt) + lam sqrt(2 D dt) z``. Both leave
    N(0, D lam) invariant (the Euler form up to O(dt) bias).
    """
    decay, noise = params.step_coefficients()
    return xi * decay + noise * z


def generate_rate_path(params: OUParams, rng: SeededRng, n_steps: int) -> RatePath:
    """Generate a bounded rate trajectory of ``n_steps`` samples.

    The initial fluctuation is drawn from the stationary law
    N(0, D*lam) so no burn-in is needed; every subsequent sample applies
    one OU step followed by the bounding policy. Under REJECT_RESAMPLE a
    run of 10^4 consecutive rejected candidates aborts with
    :class:`ResampleLimitError`.
    """
    if n_steps < 1:
        raise ConfigurationError("n_steps must be >= 1")
    gen = rng.generator()
    decay, step_sigma = params.step_coefficients()
    lo, hi = params.lower_bound, params.upper_bound
    policy = params.policy.code
    values = np.empty(n_steps)

    chunk = max(4096, n_steps + 1 + n_steps // 8)
    normals = standard_normals(gen, chunk)
    pos = 0

    def refill():
        nonlocal normals, pos
        normals = standard_normals(gen, max(4096, n_steps // 4))
        pos = 0

    # initial sample from the stationary distribution, bounded per policy
    sigma_stat = params.stationary_std
    if policy == _kernels.POLICY_REJECT:
        for _ in range(_kernels.MAX_CONSECUTIVE_REDRAWS):
            if pos >= len(normals):
                refill()
            xi = sigma_stat * normals[pos]
            pos += 1
            if lo <= params.baseline + xi <= hi:
                break
        else:
            raise ResampleLimitError(
                "initial stationary draw rejected 10000 times; "
                "bounds are incompatible with the noise scale")
    else:
        xi = sigma_stat * normals[pos]
        pos += 1
        g = params.baseline + xi
        if not lo <= g <= hi:
            if policy == _kernels.POLICY_CLIP:
                g = min(max(g, lo), hi)
            else:
                g = _kernels.reflect_into(g, lo, hi)
            xi = g - params.baseline
    values[0] = params.baseline + xi

    i, redraws = 1, 0
    while i < n_steps:
        i, xi, pos, redraws, status = _kernels.ou_fill(
            values, i, xi, decay, step_sigma, params.baseline, lo, hi,
            policy, normals, pos, redraws)
        if status == _kernels.OU_REDRAW_LIMIT:
            raise ResampleLimitError(
                f"step {i}: 10000 consecutive redraws rejected; "
                "bounds are incompatible with the noise scale")
        if status == _kernels.OU_NEED_NORMALS:
            refill()
    return RatePath(t0=0.0, dt=params.dt, values=values)


def estimate_autocorrelation(paths: Iterable[RatePath],
                             max_lag: float) -> AutocorrelationEstimate:
    """Ensemble-and-time averaged autocovariance of the rate fluctuation.

    The grand mean over all paths is subtracted, then
    ``c(k dt) = sum_paths sum_t xi(t) xi(t + k dt) / (#pairs)`` is
    evaluated with FFTs for every lag on the grid up to ``max_lag``.

    Parameters
    ----------
    paths : iterable of RatePath
        At least two trajectories on one common grid.
    max_lag : float
        Largest lag to evaluate; must be shorter than the path duration.
    """
    paths = list(paths)
    if len(paths) < 2:
        raise ConfigurationError("need at least two paths")
    dt, n, t0 = paths[0].dt, paths[0].n, paths[0].t0
    for p in paths[1:]:
        if p.dt != dt or p.n != n or p.t0 != t0:
            raise GridMismatchError("paths are not on a common grid")
    k_max = int(round(max_lag / dt))
    if k_max >= n:
        raise ConfigurationError("max_lag must be shorter than the paths")

    data = np.stack([p.values for p in paths])
    xi = data - data.mean()
    size = 1 << int(2 * n - 1).bit_length()
    acf = np.zeros(k_max + 1)
    block = 64  # keeps the padded FFT workspace small
    for s in range(0, len(paths), block):
        spectrum = np.fft.rfft(xi[s:s + block], n=size, axis=1)
        corr = np.fft.irfft(spectrum * np.conj(spectrum),
                            n=size, axis=1)[:, :k_max + 1]
        acf += corr.sum(axis=0)
    counts = len(paths) * (n - np.arange(k_max + 1))
    return AutocorrelationEstimate(lags=np.arange(k_max + 1) * dt,
                                   values=acf / counts)


def theoretical_autocorrelation(params: OUParams, lag):
    """Stationary OU autocovariance ``D * lam * exp(-lam * lag)``."""
    lag = np.asarray(lag, dtype=float)
    if np.any(lag < 0):
        raise ValueError("lag must be nonnegative")
    out = params.diffusion * params.lam * np.exp(-params.lam * lag)
    return float(out) if out.ndim == 0 else out
