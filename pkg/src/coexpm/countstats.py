"""Coincidence counting: quality ratios, rate arithmetic, fringe fits and
event-level simulations.

Rate conventions: singles and coincidence rates in s^-1, coincidence window
tau_c in seconds, pump power in mW where brightness is involved.

The two-detector quality ratio compares measured coincidences with the
accidental rate of uncorrelated streams,

    alpha_2d = R_c / (tau_c R_s R_i),

(unity for independent Poissonian streams, >> 1 for a pair source). The
heralded three-detector ratio for a herald s and a split target arm (i, i')

    alpha_3d = R_sii' R_s / (R_si R_si')

is << 1 for a single-photon-like source (one target photon cannot fire both
split detectors).

Simulations are event-based: arrivals are binned at the coincidence window
and coincidences are shared-bin events, so estimator behavior (not just the
formulas) is exercised.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, factorial

import numpy as np

from .biphoton import AnalyzerSetting, as_density_matrix, coincidence_probability
from .errors import FitError, ValidationError
from .util import spawn_rng

__all__ = [
    "CountRecord",
    "HeraldedRecord",
    "VisibilityFit",
    "accidental_rate",
    "alpha_2d",
    "alpha_3d",
    "brightness",
    "subtract_accidentals",
    "apply_dead_time",
    "correct_dead_time",
    "fit_visibility",
    "simulate_counts",
    "simulate_pair_stream",
    "simulate_heralded",
]


@dataclass(frozen=True)
class CountRecord:
    """Raw two-detector tallies over one acquisition."""

    counts_signal: float
    counts_idler: float
    coincidences: float
    duration_s: float

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValidationError("duration must be positive")
        if min(self.counts_signal, self.counts_idler, self.coincidences) < 0:
            raise ValidationError("counts must be >= 0")

    @property
    def rate_signal(self) -> float:
        return self.counts_signal / self.duration_s

    @property
    def rate_idler(self) -> float:
        return self.counts_idler / self.duration_s

    @property
    def rate_coincidence(self) -> float:
        return self.coincidences / self.duration_s


@dataclass(frozen=True)
class HeraldedRecord:
    """Herald + split-target tallies over one acquisition."""

    counts_herald: float
    counts_herald_t1: float
    counts_herald_t2: float
    counts_triple: float
    duration_s: float

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValidationError("duration must be positive")
        if min(
            self.counts_herald, self.counts_herald_t1, self.counts_herald_t2, self.counts_triple
        ) < 0:
            raise ValidationError("counts must be >= 0")


def accidental_rate(rate_signal: float, rate_idler: float, tau_c_s: float) -> float:
    """Uncorrelated-stream coincidence rate R_s R_i tau_c."""
    if tau_c_s <= 0:
        raise ValidationError("coincidence window must be positive")
    return rate_signal * rate_idler * tau_c_s

def alpha_2d(record: CountRecord, tau_c_s: float) -> float:
    """Two-detector quality ratio R_c / (tau_c R_s R_i)."""
    acc = accidental_rate(record.rate_signal, record.rate_idler, tau_c_s)
    if acc == 0:
        raise ValidationError("alpha_2d undefined: zero singles rate")
    return record.rate_coincidence / acc


def alpha_3d(record: HeraldedRecord) -> float:
    """Heralded ratio R_sii' R_s / (R_si R_si') (window-free)."""
    denom = record.counts_herald_t1 * record.counts_herald_t2
    if denom == 0:
        raise ValidationError("alpha_3d undefined: zero heralded doubles")
    return record.counts_triple * record.counts_herald / denom


def brightness(record: CountRecord, pump_mw: float | None = None) -> float:
    """Joint-rate figure R_s R_i / R_c, per mW if pump power is given."""
    if record.coincidences == 0:
        raise ValidationError("brightness undefined: zero coincidences")
    value = record.rate_signal * record.rate_idler / record.rate_coincidence
    if pump_mw is not None:
        if pump_mw <= 0:
            raise ValidationError("pump power must be positive")
        value /= pump_mw
    return value


def subtract_accidentals(record: CountRecord, tau_c_s: float) -> CountRecord:
    """Record with the expected accidental coincidences removed (floored at 0)."""
    acc_counts = accidental_rate(record.rate_signal, record.rate_idler, tau_c_s) * record.duration_s
    return CountRecord(
        record.counts_signal,
        record.counts_idler,
        max(0.0, record.coincidences - acc_counts),
        record.duration_s,
    )


def apply_dead_time(true_rate: float, dead_time_s: float) -> float:
    """Registered rate of a non-paralyzable detector, R / (1 + R t_dead)."""
    if dead_time_s < 0 or true_rate < 0:
        raise ValidationError("rate and dead time must be >= 0")
    return true_rate / (1.0 + true_rate * dead_time_s)


def correct_dead_time(measured_rate: float, dead_time_s: float) -> float:
    """Invert apply_dead_time: true rate R / (1 - R t_dead)."""
    if dead_time_s < 0 or measured_rate < 0:
        raise ValidationError("rate and dead time must be >= 0")
    loss = measured_rate * dead_time_s
    if loss >= 1.0:
        raise ValidationError("measured rate saturates the dead time; cannot invert")
    return measured_rate / (1.0 - loss)


@dataclass(frozen=True)
class VisibilityFit:
    """Least-squares fit of rate(theta) = A [1 + V cos(2(theta - theta0))]."""

    visibility: float
    visibility_se: float
    mean_rate: float
    phase_deg: float

    @property
    def percent(self) -> float:
        return 100.0 * self.visibility


def fit_visibility(theta_deg, rates) -> VisibilityFit:
    """Fringe visibility from analyzer-angle scan data.

    Linear least squares on the basis (1, cos 2theta, sin 2theta); the
    visibility standard error comes from the residual covariance through the
    delta method. Raises FitError for degenerate scans (fewer than 4 distinct
    angles modulo 180, or a non-positive mean rate).
    """
    th = np.deg2rad(np.asarray(theta_deg, dtype=float))
    y = np.asarray(rates, dtype=float)
    if th.ndim != 1 or th.shape != y.shape:
        raise ValidationError("theta and rates must be 1-d arrays of equal length")
    distinct = np.unique(np.round(np.mod(th, np.pi), 12))
    if distinct.size < 4:
        raise FitError("need at least 4 distinct analyzer angles for a visibility fit")
    x = np.column_stack([np.ones_like(th), np.cos(2 * th), np.sin(2 * th)])
    coef, *_ = np.linalg.lstsq(x, y, rcond=None)
    a, b, c = coef
    if a <= 0:
        raise FitError(f"fitted mean rate {a:.4g} is not positive")
    amp = float(np.hypot(b, c))
    vis = amp / a

    dof = y.size - 3
    if dof > 0:
        resid = y - x @ coef
        sigma2 = float(resid @ resid) / dof
        cov = sigma2 * np.linalg.inv(x.T @ x)
        if amp > 0:
            grad = np.array([-amp / a**2, b / (a * amp), c / (a * amp)])
        else:
            grad = np.array([0.0, 1.0 / a, 1.0 / a])
        se = float(np.sqrt(max(0.0, grad @ cov @ grad)))
    else:
        se = float("nan")
    phase = 0.5 * np.degrees(np.arctan2(c, b))
    return VisibilityFit(float(vis), se, float(a), float(phase))


def simulate_counts(
    state,
    settings: list[AnalyzerSetting],
    pair_rate_hz: float,
    integration_time_s: float,
    seed: int = 0,
    singles_rate_s_hz: float = 0.0,
    singles_rate_i_hz: float = 0.0,
    tau_c_s: float = 1e-9,
    poisson: bool = True,
) -> list[CountRecord]:
    """Coincidence counts behind polarization analyzers for each setting.

    Mean coincidences are pair_rate * P(setting) * T plus the accidental
    contribution R_s R_i tau_c T when singles rates are supplied. Each setting
    draws from an independent derived random stream keyed by its index, so
    results do not depend on evaluation order.
    """
    if pair_rate_hz < 0 or integration_time_s <= 0:
        raise ValidationError("pair rate must be >= 0 and integration time > 0")
    rho = as_density_matrix(state)
    records = []
    for k, setting in enumerate(settings):
        p = coincidence_probability(rho, setting)
        mean_c = pair_rate_hz * p * integration_time_s
        if singles_rate_s_hz > 0 and singles_rate_i_hz > 0:
            mean_c += accidental_rate(singles_rate_s_hz, singles_rate_i_hz, tau_c_s) * integration_time_s
        mean_s = singles_rate_s_hz * integration_time_s
        mean_i = singles_rate_i_hz * integration_time_s
        if poisson:
            rng = spawn_rng(seed, k)
            cs = float(rng.poisson(mean_s)) if mean_s > 0 else 0.0
            ci = float(rng.poisson(mean_i)) if mean_i > 0 else 0.0
            cc = float(rng.poisson(mean_c))
        else:
            cs, ci, cc = mean_s, mean_i, mean_c
        records.append(CountRecord(cs, ci, cc, integration_time_s))
    return records


def _binned_coincidences(bins_a: np.ndarray, bins_b: np.ndarray) -> int:
    """Number of (a, b) pairs sharing a bin, counting multiplicity."""
    ua, ca = np.unique(bins_a, return_counts=True)
    ub, cb = np.unique(bins_b, return_counts=True)
    common, ia, ib = np.intersect1d(ua, ub, return_indices=True)
    return int(np.sum(ca[ia] * cb[ib]))


def simulate_pair_stream(
    pair_rate_hz: float,
    duration_s: float,
    tau_c_s: float,
    seed: int = 0,
    eta_signal: float = 1.0,
    eta_idler: float = 1.0,
    background_rate_s_hz: float = 0.0,
    background_rate_i_hz: float = 0.0,
) -> CountRecord:
    """Event-level two-detector acquisition.

    Pairs arrive as a Poisson process; each photon survives to its detector
    with the arm efficiency; independent background singles are added to both
    arms. Arrival times are binned at tau_c and coincidences are shared-bin
    events, exactly as a time tagger with window tau_c would count them.
    With pair_rate_hz = 0 this is a pure accidental (uncorrelated) source.
    """
    if duration_s <= 0 or tau_c_s <= 0:
        raise ValidationError("duration and coincidence window must be positive")
    if not (0.0 <= eta_signal <= 1.0 and 0.0 <= eta_idler <= 1.0):
        raise ValidationError("arm efficiencies must be in [0, 1]")
    if min(pair_rate_hz, background_rate_s_hz, background_rate_i_hz) < 0:
        raise ValidationError("rates must be >= 0")
    rng = spawn_rng(seed, 2)
    n_bins = int(np.ceil(duration_s / tau_c_s))
    n_pairs = rng.poisson(pair_rate_hz * duration_s)
    pair_bins = rng.integers(0, n_bins, size=n_pairs)
    s_from_pairs = pair_bins[rng.random(n_pairs) < eta_signal]
    i_from_pairs = pair_bins[rng.random(n_pairs) < eta_idler]
    s_bg = rng.integers(0, n_bins, size=rng.poisson(background_rate_s_hz * duration_s))
    i_bg = rng.integers(0, n_bins, size=rng.poisson(background_rate_i_hz * duration_s))
    s_bins = np.concatenate([s_from_pairs, s_bg])
    i_bins = np.concatenate([i_from_pairs, i_bg])
    return CountRecord(
        float(s_bins.size),
        float(i_bins.size),
        float(_binned_coincidences(s_bins, i_bins)),
        duration_s,
    )


def simulate_heralded(
    pair_rate_hz: float,
    duration_s: float,
    tau_c_s: float,
    seed: int = 0,
    eta_herald: float = 0.25,
    eta_target: float = 0.25,
    max_multiplicity: int = 8,
) -> HeraldedRecord:
    """Event-level heralded acquisition with a balanced split target arm.

    Pairs are Poisson-distributed over coincidence bins; the herald photon is
    detected with eta_herald, the target photon routes to one of two detectors
    (half of eta_target each). Within one bin a lone target photon can never
    fire both split detectors, so triples require multi-pair bins: the ratio
    alpha_3d ~ 2 pair_rate tau_c at low rates.

    Bins are grouped by pair multiplicity k (Poissonized counts, exact for
    the binned model); k = 1 bins are tallied with one multinomial draw and
    k >= 2 bins with vectorized per-bin draws.
    """
    if duration_s <= 0 or tau_c_s <= 0:
        raise ValidationError("duration and coincidence window must be positive")
    if not (0.0 < eta_herald <= 1.0 and 0.0 < eta_target <= 1.0):
        raise ValidationError("detection efficiencies must be in (0, 1]")
    rng = spawn_rng(seed, 3)
    n_bins = duration_s / tau_c_s
    mu = pair_rate_hz * tau_c_s
    if mu > 0.1:
        raise ValidationError(
            f"mean pairs per window {mu:.3g} too high for the multiplicity cap; "
            "reduce pair rate or window"
        )
    n_h = n_h1 = n_h2 = n_t = 0.0

    # k = 1: aggregate joint outcomes (herald?, target route) in one multinomial.
    n1 = rng.poisson(n_bins * mu * np.exp(-mu))
    ph, pt = eta_herald, eta_target / 2.0
    probs = [
        ph * pt,  # herald + t1
        ph * pt,  # herald + t2
        ph * (1 - 2 * pt),  # herald only
        (1 - ph) * pt,
        (1 - ph) * pt,
        (1 - ph) * (1 - 2 * pt),
    ]
    cls = rng.multinomial(n1, probs)
    n_h += cls[0] + cls[1] + cls[2]
    n_h1 += cls[0]
    n_h2 += cls[1]

    for k in range(2, max_multiplicity + 1):
        nk = rng.poisson(n_bins * exp(-mu) * mu**k / factorial(k))
        if nk == 0:
            continue
        herald_hits = rng.binomial(k, eta_herald, size=nk) > 0
        t1 = rng.binomial(k, pt, size=nk)
        t2 = rng.binomial(k - t1, pt / (1.0 - pt), size=nk)
        n_h += herald_hits.sum()
        n_h1 += (herald_hits & (t1 > 0)).sum()
        n_h2 += (herald_hits & (t2 > 0)).sum()
        n_t += (herald_hits & (t1 > 0) & (t2 > 0)).sum()
    return HeraldedRecord(float(n_h), float(n_h1), float(n_h2), float(n_t), duration_s)
