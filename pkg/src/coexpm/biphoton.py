"""Polarization two-qubit states, entanglement metrics, correlation
measurements and state tomography.

Basis and conventions:

* Single-photon basis |H> = (1, 0), |V> = (0, 1); H lies along the crystal
  y axis and V along z.
* Two-photon basis ordering (signal tensor idler): |HH>, |HV>, |VH>, |VV>.
* A linear analyzer at angle theta (degrees from H) passes
  |theta> = cos(theta)|H> + sin(theta)|V>; a half-wave plate implementing it
  sits at theta/2.
* Circular kets |R> = (|H> - i|V>)/sqrt(2), |L> = (|H> + i|V>)/sqrt(2);
  diagonal |D> = (|H> + |V>)/sqrt(2), |A> = (|H> - |V>)/sqrt(2).

The source model: the two simultaneously phase-matched conversion channels
(birefringent and grating-assisted, orthogonal signal/idler polarization
pairs) with efficiencies r1 and r2 produce

    |psi> = (sqrt(r1)|HV> + e^{i phi} sqrt(r2)|VH>) / sqrt(r1 + r2),

a Psi+ Bell state when r1 = r2 and phi = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import FitError, ValidationError
from .poling import efficiency_ratio, efficiency_samples
from .util import spawn_rng

__all__ = [
    "PolarizationState",
    "DensityMatrix4",
    "AnalyzerSetting",
    "CANONICAL_CHSH_ANGLES",
    "SINGLE_KETS",
    "state_from_efficiencies",
    "bell_psi_plus",
    "werner_state",
    "as_density_matrix",
    "concurrence",
    "fidelity",
    "purity",
    "coincidence_probability",
    "correlation",
    "chsh_s",
    "chsh_s_symmetric",
    "tomography_settings",
    "setting_projector",
    "expected_tomography_rates",
    "simulate_tomography_counts",
    "reconstruct_state",
    "TomographyResult",
    "entanglement_vs_fabrication",
]

_SQ2 = np.sqrt(2.0)

SINGLE_KETS = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "D": np.array([1.0, 1.0], dtype=complex) / _SQ2,
    "A": np.array([1.0, -1.0], dtype=complex) / _SQ2,
    "R": np.array([1.0, -1.0j], dtype=complex) / _SQ2,
    "L": np.array([1.0, 1.0j], dtype=complex) / _SQ2,
}

# (a, a', b, b') analyzer angles, degrees, that saturate the Bell bound for Psi+.
CANONICAL_CHSH_ANGLES = (0.0, 45.0, 22.5, 67.5)


@dataclass(frozen=True)
class PolarizationState:
    """Pure two-photon polarization state (amplitudes over HH, HV, VH, VV)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.shape != (4,):
            raise ValidationError("state needs exactly 4 amplitudes (HH, HV, VH, VV)")
        norm = np.linalg.norm(amp)
        if norm == 0:
            raise ValidationError("state amplitudes are all zero")
        object.__setattr__(self, "amplitudes", amp / norm)

    def density(self) -> "DensityMatrix4":
        return DensityMatrix4(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix4:
    """Validated 4x4 density matrix on the polarization pair space."""

    matrix: np.ndarray
    tolerance: float = field(default=1e-10, compare=False)

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        if rho.shape != (4, 4):
            raise ValidationError("density matrix must be 4x4")
        if np.max(np.abs(rho - rho.conj().T)) > max(self.tolerance, 1e-9):
            raise ValidationError("density matrix is not Hermitian within tolerance")
        rho = 0.5 * (rho + rho.conj().T)
        tr = float(np.real(np.trace(rho)))
        if not np.isfinite(tr) or abs(tr - 1.0) > 1e-6:
            raise ValidationError(f"density matrix trace {tr:.8g} differs from 1")
        rho = rho / tr
        evals = np.linalg.eigvalsh(rho)
        if evals.min() < -1e-8:
            raise ValidationError(
                f"density matrix has negative eigenvalue {evals.min():.3e} beyond tolerance"
            )
        object.__setattr__(self, "matrix", rho)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def as_density_matrix(state) -> DensityMatrix4:
    """Coerce a PolarizationState / DensityMatrix4 / raw array to a density matrix."""
    if isinstance(state, DensityMatrix4):
        return state
    if isinstance(state, PolarizationState):
        return state.density()
    arr = np.asarray(state, dtype=complex)
    if arr.shape == (4,):
        return PolarizationState(arr).density()
    return DensityMatrix4(arr)


def state_from_efficiencies(
    r_birefringent: float, r_grating: float, relative_phase_rad: float = 0.0
) -> PolarizationState:
    """Pair state generated by two coexisting channels of given efficiencies.

    The birefringent-channel efficiency weights |HV> and the grating-channel
    efficiency weights |VH>; the grating amplitude carries
    exp(i relative_phase_rad). Only the ratio of the two efficiencies matters.
    """
    if r_birefringent < 0 or r_grating < 0:
        raise ValidationError("channel efficiencies must be >= 0")
    if r_birefringent + r_grating == 0:
        raise ValidationError("at least one channel efficiency must be positive")
    amp = np.zeros(4, dtype=complex)
    amp[1] = np.sqrt(r_birefringent)
    amp[2] = np.exp(1j * relative_phase_rad) * np.sqrt(r_grating)
    return PolarizationState(amp)


def bell_psi_plus() -> PolarizationState:
    """(|HV> + |VH>)/sqrt(2)."""
    return state_from_efficiencies(1.0, 1.0, 0.0)


def werner_state(p: float, pure: PolarizationState | None = None) -> DensityMatrix4:
    """p |psi><psi| + (1-p) I/4 (white-noise admixture model)."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError("mixing parameter p must be in [0, 1]")
    if pure is None:
        pure = bell_psi_plus()
    rho = p * pure.density().matrix + (1.0 - p) * np.eye(4) / 4.0
    return DensityMatrix4(rho)


# --- entanglement metrics ---------------------------------------------------

_SIGMA_Y2 = np.kron(
    np.array([[0.0, -1.0j], [1.0j, 0.0]]), np.array([[0.0, -1.0j], [1.0j, 0.0]])
)


def concurrence(state) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    rho = as_density_matrix(state).matrix
    rho_tilde = _SIGMA_Y2 @ rho.conj() @ _SIGMA_Y2
    evals = np.linalg.eigvals(rho @ rho_tilde)
    lam = np.sqrt(np.clip(np.real(evals), 0.0, None))
    lam.sort()
    return float(max(0.0, lam[3] - lam[2] - lam[1] - lam[0]))


def fidelity(state, target) -> float:
    """Overlap <psi_t| rho |psi_t> with a pure target state."""
    rho = as_density_matrix(state).matrix
    if isinstance(target, DensityMatrix4):
        evals, evecs = np.linalg.eigh(target.matrix)
        if evals.max() < 1.0 - 1e-9:
            raise ValidationError("fidelity target must be a pure state")
        psi = evecs[:, int(np.argmax(evals))]
    else:
        psi = (
            target.amplitudes
            if isinstance(target, PolarizationState)
            else PolarizationState(np.asarray(target)).amplitudes
        )
    return float(np.real(psi.conj() @ rho @ psi))


def purity(state) -> float:
    """Tr(rho^2)."""
    rho = as_density_matrix(state).matrix
    return float(np.real(np.trace(rho @ rho)))


# --- analyzer measurements ---------------------------------------------------


@dataclass(frozen=True)
class AnalyzerSetting:
    """Linear polarization analyzers in the two arms (degrees from H)."""

    theta_signal_deg: float
    theta_idler_deg: float

    @property
    def hwp_signal_deg(self) -> float:
        return self.theta_signal_deg / 2.0

    @property
    def hwp_idler_deg(self) -> float:
        return self.theta_idler_deg / 2.0

    def ket(self) -> np.ndarray:
        ts = np.deg2rad(self.theta_signal_deg)
        ti = np.deg2rad(self.theta_idler_deg)
        ks = np.array([np.cos(ts), np.sin(ts)], dtype=complex)
        ki = np.array([np.cos(ti), np.sin(ti)], dtype=complex)
        return np.kron(ks, ki)


def coincidence_probability(state, setting: AnalyzerSetting) -> float:
    """Probability that both photons pass their linear analyzers."""
    rho = as_density_matrix(state).matrix
    k = setting.ket()
    return float(np.real(k.conj() @ rho @ k))


def correlation(state, theta_signal_deg: float, theta_idler_deg: float) -> float:
    """Polarization correlation E(theta_s, theta_i).

    E = [P(t_s, t_i) + P(t_s+90, t_i+90) - P(t_s+90, t_i) - P(t_s, t_i+90)]
    normalized by the four-outcome sum (unity for a normalized state).
    """
    rho = as_density_matrix(state)
    p = [
        coincidence_probability(rho, AnalyzerSetting(theta_signal_deg + ds, theta_idler_deg + di))
        for ds, di in ((0, 0), (90, 90), (90, 0), (0, 90))
    ]
    total = sum(p)
    if total <= 0:
        raise ValidationError("correlation undefined: zero total coincidence probability")
    return (p[0] + p[1] - p[2] - p[3]) / total


def chsh_s(state, angles_deg=CANONICAL_CHSH_ANGLES) -> float:
    """Bell parameter in the three-term form

        S = |E(a,b) - E(a,b')| + |E(a',b)| + |E(a',b')|.

    This is the combination used to report the source's Bell violation; at the
    canonical angles (0, 45, 22.5, 67.5) it reaches 2 sqrt(2) for a Psi+ state
    and stays <= 2 for any product state. Away from the canonical angles the
    three-term form is not a faithful separability witness (product states can
    exceed 2), so angle choices other than the canonical set should be
    interpreted with care; see chsh_s_symmetric for the four-term variant.
    """
    a, ap, b, bp = angles_deg
    e_ab = correlation(state, a, b)
    e_abp = correlation(state, a, bp)
    e_apb = correlation(state, ap, b)
    e_apbp = correlation(state, ap, bp)
    return abs(e_ab - e_abp) + abs(e_apb) + abs(e_apbp)


def chsh_s_symmetric(state, angles_deg=CANONICAL_CHSH_ANGLES) -> float:
    """Four-term Bell parameter |E(a,b)| + |E(a,b')| + |E(a',b)| + |E(a',b')|."""
    a, ap, b, bp = angles_deg
    return (
        abs(correlation(state, a, b))
        + abs(correlation(state, a, bp))
        + abs(correlation(state, ap, b))
        + abs(correlation(state, ap, bp))
    )


# --- tomography ---------------------------------------------------------------

_TOMO_LABELS = ("H", "V", "D", "R")


def tomography_settings() -> list[tuple[str, str]]:
    """The 16 projective settings {H, V, D, R} x {H, V, D, R}."""
    return [(s, i) for s in _TOMO_LABELS for i in _TOMO_LABELS]


def setting_projector(label_signal: str, label_idler: str) -> np.ndarray:
    """Rank-1 projector |l_s l_i><l_s l_i| for labeled analyzer settings."""
    try:
        ks = SINGLE_KETS[label_signal.upper()]
        ki = SINGLE_KETS[label_idler.upper()]
    except KeyError as exc:
        raise ValidationError(f"unknown analyzer label {exc.args[0]!r}; use H/V/D/A/R/L") from None
    k = np.kron(ks, ki)
    return np.outer(k, k.conj())


def expected_tomography_rates(state, settings=None) -> np.ndarray:
    """Coincidence probabilities p_k = Tr(rho P_k) for each setting."""
    rho = as_density_matrix(state).matrix
    settings = tomography_settings() if settings is None else list(settings)
    return np.array([np.real(np.trace(setting_projector(*s) @ rho)) for s in settings])


def simulate_tomography_counts(
    state,
    pair_rate_hz: float,
    integration_time_s: float,
    seed: int | None = None,
    accidental_rate_hz: float = 0.0,
    poisson: bool = True,
    settings=None,
) -> list[dict]:
    """Forward-model counts for each tomography setting.

    With poisson=False returns the exact expected (generally non-integer)
    counts. Accidentals add a flat accidental_rate_hz to every setting.
    """
    if pair_rate_hz < 0 or integration_time_s <= 0 or accidental_rate_hz < 0:
        raise ValidationError("rates must be >= 0 and integration time > 0")
    settings = tomography_settings() if settings is None else list(settings)
    probs = expected_tomography_rates(state, settings)
    mean = pair_rate_hz * integration_time_s * probs + accidental_rate_hz * integration_time_s
    if poisson:
        rng = spawn_rng(0 if seed is None else seed)
        counts = rng.poisson(mean).astype(float)
    else:
        counts = mean
    return [
        {
            "setting_signal": s,
            "setting_idler": i,
            "coincidences": float(c),
            "integration_time_s": float(integration_time_s),
            "accidentals": float(accidental_rate_hz * integration_time_s),
        }
        for (s, i), c in zip(settings, counts)
    ]


@dataclass(frozen=True)
class TomographyResult:
    rho: DensityMatrix4
    method: str
    neg_log_likelihood: float
    flux: float


def _projected_physical(rho_raw: np.ndarray) -> np.ndarray:
    """Nearest physical state: hermitize, clip negative eigenvalues, renormalize."""
    rho = 0.5 * (rho_raw + rho_raw.conj().T)
    evals, evecs = np.linalg.eigh(rho)
    evals = np.clip(evals, 0.0, None)
    if evals.sum() == 0:
        raise FitError("projection produced the zero matrix; counts are degenerate")
    rho = (evecs * evals) @ evecs.conj().T
    return rho / np.real(np.trace(rho))


def _cholesky_params(rho: np.ndarray) -> np.ndarray:
    """Parameter vector for rho ~ M M^dagger with M lower triangular."""
    eps = 1e-7
    safe = (1.0 - eps) * rho + eps * np.eye(4) / 4.0
    m = np.linalg.cholesky(safe)
    params = list(np.real(np.diag(m)))
    for r in range(4):
        for c in range(r):
            params.extend([np.real(m[r, c]), np.imag(m[r, c])])
    return np.array(params)


def _rho_from_params(t: np.ndarray) -> np.ndarray:
    m = np.zeros((4, 4), dtype=complex)
    np.fill_diagonal(m, t[:4])
    idx = 4
    for r in range(4):
        for c in range(r):
            m[r, c] = t[idx] + 1j * t[idx + 1]
            idx += 2
    rho = m @ m.conj().T
    tr = np.real(np.trace(rho))
    if tr <= 0 or not np.isfinite(tr):
        raise FloatingPointError("degenerate Cholesky factor")
    return rho / tr


def _poisson_nll(mu: np.ndarray, counts: np.ndarray) -> float:
    mu = np.clip(mu, 1e-12, None)
    return float(np.sum(mu - counts * np.log(mu)))


def reconstruct_state(records: list[dict], subtract_accidentals: bool = True) -> TomographyResult:
    """Density matrix from 16-setting coincidence counts.

    Pipeline: accidental subtraction (optional, floored at zero) -> linear
    inversion from count fractions -> projection onto the physical set ->
    Cholesky-parameterized Poisson maximum-likelihood refinement with the
    total-flux scale profiled out analytically (the likelihood is then the
    multinomial one, so a noisy flux estimate cannot distort the state).
    Returns whichever of the projected linear inversion and the MLE scores
    the better likelihood, so exact (noise-free) data reproduces its state
    exactly.

    Each record needs keys setting_signal, setting_idler, coincidences,
    integration_time_s; accidentals is optional (expected accidental counts in
    the same integration window).
    """
    if len(records) < 16:
        raise ValidationError(f"need at least 16 settings, got {len(records)}")
    labels = [(r["setting_signal"], r["setting_idler"]) for r in records]
    if len(set(labels)) < 16:
        raise ValidationError("tomography settings are not informationally complete (duplicates)")
    counts = np.array([float(r["coincidences"]) for r in records])
    times = np.array([float(r["integration_time_s"]) for r in records])
    if np.any(counts < 0) or np.any(times <= 0):
        raise ValidationError("counts must be >= 0 and integration times > 0")
    acc = np.array([float(r.get("accidentals", 0.0)) for r in records])
    if subtract_accidentals:
        counts = np.clip(counts - acc, 0.0, None)

    # Per-unit-time rates on a common exposure scale.
    t_ref = times[0]
    rates = counts * (t_ref / times)

    projectors = np.array([setting_projector(s, i) for s, i in labels])

    # Flux from the rectilinear subset, which resolves the identity.
    rect = [k for k, (s, i) in enumerate(labels) if s in "HV" and i in "HV"]
    if len(rect) < 4:
        raise ValidationError("settings must include the four rectilinear combinations")
    flux = float(rates[rect].sum())
    if flux <= 0:
        raise FitError("no counts in the rectilinear settings; flux scale undefined")

    probs = rates / flux
    amat = projectors.conj().reshape(len(labels), 16)
    rho_li, *_ = np.linalg.lstsq(amat, probs.astype(complex), rcond=None)
    rho_li = _projected_physical(rho_li.reshape(4, 4))

    def nll_of(rho: np.ndarray) -> float:
        # Poisson likelihood with the flux scale profiled out: at fixed shape
        # the optimal scale is total counts over total predicted weight.
        shape = np.clip(np.real(np.einsum("kij,ji->k", projectors, rho)), 1e-12, None) * (
            times / t_ref
        )
        scale = counts.sum() / shape.sum()
        return _poisson_nll(scale * shape, counts)

    x0 = _cholesky_params(rho_li)

    def objective(t):
        try:
            return nll_of(_rho_from_params(t))
        except FloatingPointError:
            return 1e12

    res = minimize(objective, x0, method="L-BFGS-B", options={"maxiter": 500, "ftol": 1e-12})
    candidates = [("linear_inversion", rho_li, nll_of(rho_li))]
    if res.success or np.isfinite(res.fun):
        rho_mle = _rho_from_params(res.x)
        candidates.append(("mle", rho_mle, nll_of(rho_mle)))
    method, rho, nll = min(candidates, key=lambda c: c[2])
    return TomographyResult(DensityMatrix4(rho), method, float(nll), flux / t_ref)


# --- source quality vs fabrication errors ------------------------------------


def entanglement_vs_fabrication(
    period_mm: float,
    duty_cycle: float,
    num_domains: int,
    sigma_z_grid_um,
    samples: int = 2000,
    seed: int = 0,
    relative_phase_rad: float = 0.0,
    reorder: str = "allow",
) -> list[dict]:
    """Concurrence/fidelity statistics of the emitted state vs wall errors.

    Per realization the grating channel efficiency is reduced by the realized
    eta while the birefringent channel is unaffected (its mismatch is zero, so
    wall errors add no phase); the pair state is rebuilt from the two channel
    efficiencies and scored against the ideal Bell state.
    """
    r_bire = efficiency_ratio(duty_cycle, 0)
    r_grating = efficiency_ratio(duty_cycle, 1)
    target = bell_psi_plus()
    rows = []
    for idx, sigma in enumerate(np.asarray(sigma_z_grid_um, dtype=float)):
        eta = efficiency_samples(
            period_mm,
            duty_cycle,
            num_domains,
            float(sigma),
            samples,
            spawn_rng(seed, idx, 1),
            qpm_order=1,
            reorder=reorder,
        )
        conc = np.empty(samples)
        fid = np.empty(samples)
        for j, e in enumerate(eta):
            state = state_from_efficiencies(r_bire, r_grating * e, relative_phase_rad)
            conc[j] = concurrence(state)
            fid[j] = fidelity(state, target)
        rows.append(
            {
                "sigma_z_um": float(sigma),
                "mean_eta": float(eta.mean()),
                "mean_concurrence": float(conc.mean()),
                "std_concurrence": float(conc.std(ddof=1) if samples > 1 else 0.0),
                "mean_fidelity": float(fid.mean()),
                "std_fidelity": float(fid.std(ddof=1) if samples > 1 else 0.0),
            }
        )
    return rows
