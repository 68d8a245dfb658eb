"""Ensemble estimation of normalized intensity correlations g2_ij(tau).

For every noise realization the populations are first driven into the
path-conditional stationary regime, then at a sequence of time origins
the state is collapsed by a photon emission in channel j and propagated
along the *same* noise trajectory, recording the channel-i intensity
over the delay grid. Averaging the unnormalized products over all
realizations and origins before dividing by the mean-intensity product
is what exposes bunching: slow rate fluctuations make <I_i I_j> exceed
<I_i><I_j>.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import (ConfigurationError, FitError, NoBunchingError,
                     NumericalError)
from .kinetics import (JumpChannel, RateSet, _raise_on_status,
                       generator_parts)
from .noise import OUParams, RatePath, generate_rate_path
from .output import write_path_csv
from .rng import SeededRng

DONOR = JumpChannel.DONOR
ACCEPTOR = JumpChannel.ACCEPTOR

#: channel pairs (i, j) in output-column order: dd, aa, da, ad
ALL_PAIRS = ((DONOR, DONOR), (ACCEPTOR, ACCEPTOR),
             (DONOR, ACCEPTOR), (ACCEPTOR, DONOR))

#: realizations per work unit; fixed so that results do not depend on
#: the worker count (blocks are always reduced in index order)
BLOCK_SIZE = 25

_NO_RECORD = np.empty(0)


@dataclass(frozen=True)
class EnsembleConfig:
    """Sampling layout of one correlation ensemble."""

    n_realizations: int = 1000
    burn_in: float = 70.0
    n_origins_per_path: int = 4
    origin_spacing: float = 7.0
    tau_max: float = 28.0
    dt: float = 0.01
    channels: tuple = ALL_PAIRS
    n_bootstrap: int = 200

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ConfigurationError("n_realizations must be >= 1")
        if not self.tau_max > 0:
            raise ConfigurationError("tau_max must be positive")
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")
        if self.origin_spacing < self.dt:
            raise ConfigurationError("origin_spacing must be >= dt")
        if self.n_origins_per_path < 1:
            raise ConfigurationError("n_origins_per_path must be >= 1")
        if self.burn_in < 0:
            raise ConfigurationError("burn_in must be nonnegative")
        if self.n_bootstrap < 0:
            raise ConfigurationError("n_bootstrap must be nonnegative")
        if not self.channels:
            raise ConfigurationError("at least one channel pair is required")
        for pair in self.channels:
            if (len(pair) != 2 or not all(isinstance(c, JumpChannel) for c in pair)):
                raise ConfigurationError(f"invalid channel pair {pair!r}")


@dataclass
class FitResult:
    amplitude: float
    rate: float
    residual: float
    window: tuple[float, float]


@dataclass
class CorrelationSeries:
    """g2 of one channel pair on a uniform delay grid."""

    pair: tuple[JumpChannel, JumpChannel]
    taus: np.ndarray
    g2: np.ndarray
    se: np.ndarray
    mean_intensity_i: float
    mean_intensity_j: float
    n_samples: int
    fit: FitResult | None = None
    meta: dict = field(default_factory=dict)


def min_positive_kinetic_rate(rates: RateSet) -> float:
    positives = [r for r in (rates.gamma1, rates.gamma2, rates.gamma3,
                             rates.gamma4) if r > 0]
    return min(positives) if positives else math.inf


def default_burn_in(ou: OUParams, rates: RateSet) -> float:
    """10x the slower of noise and donor-decay timescales, raised if
    needed so the slowest kinetic channel also relaxes five times over."""
    tau_c = ou.tau_c
    donor_time = 1.0 / rates.gamma1 if rates.gamma1 > 0 else tau_c
    slowest = 1.0 / min_positive_kinetic_rate(rates)
    if not math.isfinite(slowest):
        slowest = tau_c
    return max(10.0 * max(tau_c, donor_time), 5.0 * max(tau_c, slowest))


def default_ensemble_config(ou: OUParams, rates: RateSet,
                            **overrides) -> EnsembleConfig:
    """EnsembleConfig with burn-in and origin spacing derived from the
    noise correlation time."""
    values = dict(burn_in=default_burn_in(ou, rates),
                  origin_spacing=ou.tau_c, dt=ou.dt)
    values.update(overrides)
    return EnsembleConfig(**values)


def validate_ensemble(config: EnsembleConfig, ou: OUParams,
                      rates: RateSet) -> None:
    if config.dt != ou.dt:
        raise ConfigurationError(
            f"ensemble dt={config.dt} differs from the noise dt={ou.dt}")
    slowest = 1.0 / min_positive_kinetic_rate(rates)
    if not math.isfinite(slowest):
        slowest = ou.tau_c
    floor = 5.0 * max(ou.tau_c, slowest)
    if config.burn_in < floor:
        raise ConfigurationError(
            f"burn_in={config.burn_in} is below the stationarity floor "
            f"5*max(tau_c, 1/slowest-rate) = {floor}")


def tau_grid(config: EnsembleConfig) -> np.ndarray:
    n_tau = int(round(config.tau_max / config.dt))
    return np.arange(n_tau + 1) * config.dt


def required_path_steps(config: EnsembleConfig) -> int:
    """Number of path samples one realization consumes."""
    burn = int(round(config.burn_in / config.dt))
    spacing = int(round(config.origin_spacing / config.dt))
    tau_steps = int(round(config.tau_max / config.dt))
    return burn + (config.n_origins_per_path - 1) * spacing + tau_steps


def _collapse_channels(pairs) -> tuple[JumpChannel, ...]:
    seen = []
    for _, j in pairs:
        if j not in seen:
            seen.append(j)
    return tuple(seen)


def _path_samples(rates: RateSet, path: RatePath, config: EnsembleConfig,
                  collapse_channels=(DONOR, ACCEPTOR)):
    """Collapse-then-propagate samples along one noise trajectory.

    Returns ``(numerators, intensities)`` where ``numerators`` maps
    (i, j) to an (n_origins, n_tau) array of
    ``weight_j * intensity_i(tau)`` and ``intensities`` holds the
    uncollapsed (donor, acceptor) intensities at every origin.
    """
    dt = config.dt
    if path.dt != dt:
        raise ConfigurationError("path dt differs from the ensemble dt")
    burn = int(round(config.burn_in / dt))
    spacing = int(round(config.origin_spacing / dt))
    tau_steps = int(round(config.tau_max / dt))
    n_origins = config.n_origins_per_path
    needed = burn + (n_origins - 1) * spacing + tau_steps
    if path.n < needed:
        raise ConfigurationError(
            f"path has {path.n} steps but the ensemble layout needs {needed}")

    m0, m5 = generator_parts(rates)
    p = np.full(4, 0.25)  # arbitrary start; forgotten during burn-in
    status, drift = _kernels.rk4_run(p, m0, m5, path.values, 0, burn, dt,
                                     _NO_RECORD, _NO_RECORD, False)
    _check(status, drift)

    numerators = {(i, j): np.zeros((n_origins, tau_steps + 1))
                  for i in (DONOR, ACCEPTOR) for j in collapse_channels}
    intensities = np.zeros((n_origins, 2))
    i_d = np.empty(tau_steps + 1)
    i_a = np.empty(tau_steps + 1)
    offset = burn
    for k in range(n_origins):
        intensities[k, 0] = p[2] + p[3]
        intensities[k, 1] = p[1] + p[3]
        for channel in collapse_channels:
            if channel is DONOR:
                w = p[2] + p[3]
                q = np.array([p[2], p[3], 0.0, 0.0])
            else:
                w = p[1] + p[3]
                q = np.array([p[1], 0.0, p[3], 0.0])
            if w <= 0.0:
                continue  # nothing to emit: numerator row stays zero
            q /= w
            status, drift = _kernels.rk4_run(q, m0, m5, path.values, offset,
                                             tau_steps, dt, i_d, i_a, True)
            _check(status, drift)
            numerators[(DONOR, channel)][k] = w * i_d
            numerators[(ACCEPTOR, channel)][k] = w * i_a
        if k < n_origins - 1:
            status, drift = _kernels.rk4_run(p, m0, m5, path.values, offset,
                                             spacing, dt, _NO_RECORD,
                                             _NO_RECORD, False)
            _check(status, drift)
            offset += spacing
    return numerators, intensities


def _check(status: int, drift: float) -> None:
    if status != _kernels.RK_OK:
        _raise_on_status(status, drift)


def g2_single_path(rates: RateSet, path: RatePath, config: EnsembleConfig,
                   pair: tuple[JumpChannel, JumpChannel]):
    """Numerator and intensity samples of one pair along one trajectory.

    Returns ``(numerators, intensities)``: an (n_origins, n_tau) array of
    unnormalized ``G(tau) = weight_j * I_i(tau)`` samples and an
    (n_origins, 2) array of the uncollapsed origin intensities
    ``(I_i, I_j)``.
    """
    i, j = pair
    numerators, intensities = _path_samples(rates, path, config,
                                            collapse_channels=(j,))
    cols = {DONOR: 0, ACCEPTOR: 1}
    return numerators[(i, j)], intensities[:, [cols[i], cols[j]]]


# ---------------------------------------------------------------------------
# ensemble averaging


def _run_block(args):
    """Worker unit: realizations [r0, r1) of the ensemble."""
    (rates, ou, config, master_seed, r0, r1, n_steps, collapse, paths_dir) = args
    pairs = [(i, j) for i in (DONOR, ACCEPTOR) for j in collapse]
    nb = r1 - r0
    n_tau = int(round(config.tau_max / config.dt)) + 1
    num = {pair: np.empty((nb, n_tau)) for pair in pairs}
    inten = np.empty((nb, 2))
    g5_mean = np.empty(nb)
    for k, r in enumerate(range(r0, r1)):
        try:
            path = generate_rate_path(ou, SeededRng(master_seed, r), n_steps)
            samples, origin_inten = _path_samples(rates, path, config, collapse)
        except NumericalError as exc:
            raise type(exc)(f"realization {r}: {exc}") from exc
        for pair in pairs:
            num[pair][k] = samples[pair].mean(axis=0)
        inten[k] = origin_inten.mean(axis=0)
        g5_mean[k] = path.values.mean()
        if paths_dir is not None:
            write_path_csv(Path(paths_dir) / f"path_{r}.csv", path)
    return num, inten, g5_mean


def _bootstrap_se(num, inten_i, inten_j, n_boot, seed_key, literal):
    """Realization-level bootstrap of the full g2 ratio."""
    n = num.shape[0]
    if n_boot < 2 or n < 2:
        return np.zeros(num.shape[1])
    gen = SeededRng(seed_key[0], seed_key[1]).generator()
    counts = np.empty((n_boot, n))
    for b in range(n_boot):
        counts[b] = np.bincount(gen.integers(0, n, size=n), minlength=n)
    mean_num = (counts @ num) / n
    with np.errstate(divide="ignore", invalid="ignore"):
        if literal:
            denom = mean_num[:, :1]
        else:
            denom = ((counts @ inten_i) / n * (counts @ inten_j) / n)[:, None]
        g2_b = mean_num / denom
    if not np.isfinite(g2_b).any():
        return np.full(num.shape[1], np.nan)
    with np.errstate(invalid="ignore"):
        return np.nanstd(g2_b, axis=0, ddof=1)


def g2_ensemble(rates: RateSet, ou: OUParams, config: EnsembleConfig,
                master_seed: int, *, n_workers: int = 1,
                literal_normalization: bool = False,
                paths_dir: str | None = None) -> list[CorrelationSeries]:
    """Ensemble-averaged normalized correlations for every requested pair.

    Each realization r draws its noise from the stream
    ``(master_seed, r)``. Numerator and intensity samples are averaged
    over all realizations and origins *before* dividing:
    ``g2_ij = <G_ij(tau)> / (<I_i> <I_j>)``. With
    ``literal_normalization`` the denominator is the equal-time value
    ``<G_ij(0)>`` instead (for comparison only; it is zero for the
    autocorrelations, whose g2 is then reported as NaN).

    Results are bit-identical for a fixed master seed regardless of
    ``n_workers``: realizations are partitioned into fixed blocks whose
    partial results are reduced in block order.
    """
    validate_ensemble(config, ou, rates)
    collapse = _collapse_channels(config.channels)
    n_steps = required_path_steps(config)
    n = config.n_realizations
    tasks = [(rates, ou, config, master_seed, r0, min(r0 + BLOCK_SIZE, n),
              n_steps, collapse, paths_dir)
             for r0 in range(0, n, BLOCK_SIZE)]
    if n_workers <= 1 or len(tasks) == 1:
        blocks = [_run_block(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            blocks = list(pool.map(_run_block, tasks))

    pairs_computed = [(i, j) for i in (DONOR, ACCEPTOR) for j in collapse]
    num = {pair: np.concatenate([b[0][pair] for b in blocks]) for pair in pairs_computed}
    inten = np.concatenate([b[1] for b in blocks])
    gamma5_mean = float(np.concatenate([b[2] for b in blocks]).mean())
    mean_inten = inten.mean(axis=0)
    taus = tau_grid(config)
    cols = {DONOR: 0, ACCEPTOR: 1}

    series = []
    for p_idx, pair in enumerate(config.channels):
        i, j = pair
        mean_num = num[pair].mean(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            if literal_normalization:
                denom = mean_num[0]
            else:
                denom = mean_inten[cols[i]] * mean_inten[cols[j]]
            g2 = mean_num / denom if denom != 0.0 else np.full_like(mean_num, np.nan)
        se = _bootstrap_se(num[pair], inten[:, cols[i]], inten[:, cols[j]],
                           config.n_bootstrap, (master_seed, 0xB0075 + p_idx),
                           literal_normalization)
        series.append(CorrelationSeries(
            pair=pair, taus=taus, g2=g2, se=se,
            mean_intensity_i=float(mean_inten[cols[i]]),
            mean_intensity_j=float(mean_inten[cols[j]]),
            n_samples=n * config.n_origins_per_path,
            meta={"mean_gamma5": gamma5_mean,
                  "n_realizations": n,
                  "n_origins_per_path": config.n_origins_per_path,
                  "master_seed": master_seed,
                  "normalization": ("equal-time" if literal_normalization
                                    else "intensity-product")}))
    return series


# ---------------------------------------------------------------------------
# tail fitting


def default_fit_window(tau_c: float, tau_max: float,
                       dt: float) -> tuple[float, float]:
    """Window that skips the antibunching rise and ends inside the tail."""
    lo = max(0.25 * tau_c, 2 * dt)
    hi = min(3.5 * tau_c, tau_max)
    return lo, hi


def fit_exponential_tail(series: CorrelationSeries,
                         tau_window: tuple[float, float]) -> FitResult:
    """Least-squares fit of ``log(g2 - 1)`` vs tau over the window.

    Returns the bunching amplitude, decay rate and RMS log-residual.
    Raises :class:`NoBunchingError` when g2 never exceeds 1 in the
    window (distinct from a failed fit).
    """
    lo, hi = tau_window
    sel = (series.taus >= lo) & (series.taus <= hi)
    if int(sel.sum()) < 10:
        raise ConfigurationError("fit window must contain at least 10 grid points")
    taus = series.taus[sel]
    excess = series.g2[sel] - 1.0
    pos = excess > 0
    if not pos.any():
        raise NoBunchingError(
            f"g2 never exceeds 1 in the window [{lo}, {hi}]")
    if int(pos.sum()) < 2:
        raise FitError("fewer than two points above 1; cannot fit a slope")
    t = taus[pos]
    log_excess = np.log(excess[pos])
    design = np.column_stack([np.ones_like(t), -t])
    coef, *_ = np.linalg.lstsq(design, log_excess, rcond=None)
    resid = float(np.sqrt(np.mean((log_excess - design @ coef) ** 2)))
    return FitResult(amplitude=float(np.exp(coef[0])), rate=float(coef[1]),
                     residual=resid, window=(lo, hi))
