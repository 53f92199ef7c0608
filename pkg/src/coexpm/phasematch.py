"""Collinear type-II phase matching for photon-pair generation.

Conventions:

* Wavelengths at the API surface are vacuum wavelengths in nanometers;
  wavevectors are in rad/um.
* The pair is ordered by wavelength, signal shorter: lambda_s <= lambda_i.
* Polarizations are crystallographic axis labels ('y'/'z' for KTP; 'H'/'V'
  aliases map to y/z for a y-cut collinear geometry).
* A periodically inverted structure of period Lambda contributes grating
  vectors m * 2 pi / Lambda; order m = 0 is the unpoled (birefringent)
  process and m >= 1 the quasi-phase-matched orders.

The collinear mismatch is

    delta_k = k_p(lambda_p) - k_s(lambda_s) - k_i(lambda_i),

with lambda_i fixed by energy conservation 1/lambda_i = 1/lambda_p - 1/lambda_s.
Solvers bracket the mismatch on the nondegenerate-signal window
[1.5 lambda_p, 2 lambda_p) and refine with Brent's method (bracketed
bisection/secant), polishing to residuals far below 1e-10 rad/um.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .dispersion import CrystalDispersion, ktp_axes, wavevector
from .errors import SolverError, ValidationError

__all__ = [
    "ProcessSpec",
    "PhaseMatchPoint",
    "NBPM_PROCESS",
    "QPM_PROCESS",
    "delta_k",
    "solve_nbpm",
    "solve_qpm",
    "solve_coexistence",
    "solve_pump_for_period",
    "degeneracy_pump_nm",
    "period_sweep",
]

_AXIS_ALIASES = {"y": "y", "z": "z", "h": "y", "v": "z", "e": "e"}

# Signal window: nondegenerate pair with the signal on the short side.
_WINDOW_LO = 1.5
_WINDOW_HI = 2.0
# Pairs closer than this to degeneracy are flagged rather than trusted.
_DEGENERACY_FLAG_NM = 0.1


def _axis(label: str) -> str:
    try:
        return _AXIS_ALIASES[label.lower()]
    except KeyError:
        raise ValidationError(f"unknown polarization axis {label!r}; use y/z (or H/V)") from None


@dataclass(frozen=True)
class ProcessSpec:
    """One three-wave process: pump/signal/idler axes, grating order, temperature."""

    pump_axis: str = "y"
    signal_axis: str = "z"
    idler_axis: str = "y"
    qpm_order: int = 0
    temperature_c: float = 25.0

    def __post_init__(self):
        object.__setattr__(self, "pump_axis", _axis(self.pump_axis))
        object.__setattr__(self, "signal_axis", _axis(self.signal_axis))
        object.__setattr__(self, "idler_axis", _axis(self.idler_axis))
        if self.qpm_order < 0 or int(self.qpm_order) != self.qpm_order:
            raise ValidationError("qpm_order must be a nonnegative integer")

    def swapped(self) -> "ProcessSpec":
        """Same process with the signal/idler polarization roles exchanged."""
        return replace(self, signal_axis=self.idler_axis, idler_axis=self.signal_axis)


# The two processes that coexist in the designed structure (pump along y):
# birefringent: y -> z(signal) + y(idler); first-order grating: y -> y(signal) + z(idler).
NBPM_PROCESS = ProcessSpec("y", "z", "y", qpm_order=0)
QPM_PROCESS = ProcessSpec("y", "y", "z", qpm_order=1)


@dataclass(frozen=True)
class PhaseMatchPoint:
    """A solved operating point of one process."""

    pump_nm: float
    signal_nm: float
    idler_nm: float
    temperature_c: float
    qpm_order: int
    poling_period_mm: float | None
    residual_rad_per_um: float
    near_degenerate: bool = False

    @property
    def splitting_nm(self) -> float:
        return self.idler_nm - self.signal_nm


def idler_wavelength_nm(pump_nm: float, signal_nm):
    """Idler wavelength from energy conservation, 1/l_i = 1/l_p - 1/l_s (nm)."""
    pump = np.asarray(pump_nm, dtype=float)
    sig = np.asarray(signal_nm, dtype=float)
    if np.any(sig <= pump):
        raise ValidationError("signal wavelength must exceed pump wavelength")
    out = 1.0 / (1.0 / pump - 1.0 / sig)
    return float(out) if np.ndim(signal_nm) == 0 and np.ndim(pump_nm) == 0 else out


def delta_k(
    spec: ProcessSpec,
    pump_nm: float,
    signal_nm,
    axes: dict[str, CrystalDispersion] | None = None,
    period_mm: float | None = None,
):
    """Collinear mismatch delta_k - m*2pi/Lambda in rad/um (array-friendly in signal).

    With no period (or order 0) this is the bare material mismatch.
    """
    if axes is None:
        axes = ktp_axes()
    idler_nm = idler_wavelength_nm(pump_nm, signal_nm)
    t = spec.temperature_c
    kp = wavevector(axes[spec.pump_axis], np.asarray(pump_nm, float) * 1e-3, t)
    ks = wavevector(axes[spec.signal_axis], np.asarray(signal_nm, float) * 1e-3, t)
    ki = wavevector(axes[spec.idler_axis], np.asarray(idler_nm, float) * 1e-3, t)
    dk = kp - ks - ki
    if spec.qpm_order and period_mm is not None:
        if period_mm <= 0:
            raise ValidationError("poling period must be positive")
        dk = dk - spec.qpm_order * 2.0 * np.pi / (period_mm * 1e3)
    return dk


def _solve_window(spec, pump_nm, axes, period_mm, *, signal_lo_nm=None):
    """Brent solve of delta_k = 0 on the nondegenerate signal window."""
    lo = _WINDOW_LO * pump_nm if signal_lo_nm is None else signal_lo_nm
    hi = _WINDOW_HI * pump_nm * (1.0 - 1e-12)

    def f(sig):
        return delta_k(spec, pump_nm, sig, axes=axes, period_mm=period_mm)

    f_lo, f_hi = f(lo), f(hi)
    if np.sign(f_lo) == np.sign(f_hi):
        raise SolverError(
            "no phase-matched signal in window: "
            f"delta_k({lo:.3f} nm) = {f_lo:.6g}, delta_k({hi:.3f} nm) = {f_hi:.6g} rad/um "
            f"(pump {pump_nm:.3f} nm, T {spec.temperature_c:.2f} C, order {spec.qpm_order})"
        )
    sig = brentq(f, lo, hi, xtol=1e-13, rtol=8.9e-16, maxiter=200)
    res = float(f(sig))
    return sig, res


def _point(spec, pump_nm, signal_nm, residual, period_mm):
    idler = idler_wavelength_nm(pump_nm, signal_nm)
    if idler < signal_nm:
        signal_nm, idler = idler, signal_nm
    return PhaseMatchPoint(
        pump_nm=float(pump_nm),
        signal_nm=float(signal_nm),
        idler_nm=float(idler),
        temperature_c=spec.temperature_c,
        qpm_order=spec.qpm_order,
        poling_period_mm=period_mm,
        residual_rad_per_um=residual,
        near_degenerate=bool(abs(idler - signal_nm) < _DEGENERACY_FLAG_NM),
    )


def solve_nbpm(
    spec: ProcessSpec,
    pump_nm: float,
    axes: dict[str, CrystalDispersion] | None = None,
) -> PhaseMatchPoint:
    """Birefringent (order-0) phase-matched pair for the given pump.

    Finds the nondegenerate root with the signal in [1.5, 2) x pump. Raises
    SolverError with the bracket values when no sign change exists (e.g. pump
    beyond the degeneracy cutoff).
    """
    if pump_nm <= 0:
        raise ValidationError("pump wavelength must be positive")
    bare = replace(spec, qpm_order=0)
    sig, res = _solve_window(bare, pump_nm, axes, None)
    return _point(bare, pump_nm, sig, res, None)


def solve_qpm(
    spec: ProcessSpec,
    pump_nm: float,
    period_mm: float | None,
    axes: dict[str, CrystalDispersion] | None = None,
) -> PhaseMatchPoint:
    """Grating-assisted pair for the given pump and poling period.

    With period None (or infinite) and order m the grating term vanishes and
    the result coincides exactly with the order-0 solve.
    """
    if pump_nm <= 0:
        raise ValidationError("pump wavelength must be positive")
    if period_mm is not None and not np.isfinite(period_mm):
        period_mm = None
    sig, res = _solve_window(spec, pump_nm, axes, period_mm)
    return _point(spec, pump_nm, sig, res, period_mm)


def solve_coexistence(
    pump_nm: float,
    temperature_c: float = 25.0,
    axes: dict[str, CrystalDispersion] | None = None,
) -> tuple[float, PhaseMatchPoint]:
    """Poling period that lets the first-order grating process share the
    birefringent process' wavelengths.

    Solves the order-0 process (pump y -> signal z + idler y), evaluates the
    residual mismatch of the complementary process (pump y -> signal y +
    idler z) at those wavelengths, and returns (period_mm, point) with
    period = 2 pi / |mismatch|. The returned point describes the first-order
    process at the shared wavelengths; its residual includes the grating term
    and vanishes by construction.
    """
    nb = replace(NBPM_PROCESS, temperature_c=temperature_c)
    qp = replace(QPM_PROCESS, temperature_c=temperature_c)
    base = solve_nbpm(nb, pump_nm, axes=axes)
    mismatch = delta_k(replace(qp, qpm_order=0), pump_nm, base.signal_nm, axes=axes)
    if mismatch == 0.0:
        raise SolverError(
            "first-order process is already phase matched without a grating; "
            "no finite poling period is defined"
        )
    period_mm = 2.0 * np.pi / abs(float(mismatch)) * 1e-3
    residual = float(delta_k(qp, pump_nm, base.signal_nm, axes=axes, period_mm=period_mm))
    point = PhaseMatchPoint(
        pump_nm=base.pump_nm,
        signal_nm=base.signal_nm,
        idler_nm=base.idler_nm,
        temperature_c=temperature_c,
        qpm_order=1,
        poling_period_mm=period_mm,
        residual_rad_per_um=residual,
        near_degenerate=base.near_degenerate,
    )
    return period_mm, point


def solve_pump_for_period(
    period_mm: float,
    temperature_c: float = 25.0,
    axes: dict[str, CrystalDispersion] | None = None,
    pump_bracket_nm: tuple[float, float] = (530.0, 545.0),
) -> tuple[float, PhaseMatchPoint]:
    """Pump wavelength whose coexistence period equals the given target.

    The coexistence period grows monotonically with pump and diverges at the
    degeneracy cutoff, so the search bracket is capped there. Returns
    (pump_nm, point) like solve_coexistence.
    """
    if period_mm <= 0:
        raise ValidationError("period_mm must be positive")
    if axes is None:
        axes = ktp_axes()
    lo, hi = pump_bracket_nm
    cutoff = degeneracy_pump_nm(temperature_c, axes=axes, bracket_nm=(lo, max(hi, lo + 1.0) + 60.0))
    hi = min(hi, cutoff - 1e-6)
    if hi <= lo:
        raise SolverError(
            f"pump bracket [{lo}, {hi}] nm collapses below the degeneracy cutoff {cutoff:.3f} nm"
        )

    def g(pump):
        period, _ = solve_coexistence(pump, temperature_c, axes=axes)
        return period - period_mm

    g_lo, g_hi = g(lo), g(hi)
    if np.sign(g_lo) == np.sign(g_hi):
        raise SolverError(
            f"target period {period_mm} mm not bracketed: period({lo:.3f} nm) = "
            f"{g_lo + period_mm:.4f} mm, period({hi:.3f} nm) = {g_hi + period_mm:.4f} mm"
        )
    pump = float(brentq(g, lo, hi, xtol=1e-9, maxiter=200))
    _, point = solve_coexistence(pump, temperature_c, axes=axes)
    return pump, point


def degeneracy_pump_nm(
    temperature_c: float = 25.0,
    axes: dict[str, CrystalDispersion] | None = None,
    bracket_nm: tuple[float, float] = (500.0, 600.0),
) -> float:
    """Pump wavelength at which the order-0 pair collapses to degeneracy.

    Above this pump the nondegenerate root no longer exists. Found as the zero
    of delta_k evaluated at the degenerate point lambda_s -> 2 lambda_p.
    """
    nb = replace(NBPM_PROCESS, temperature_c=temperature_c)

    def g(pump):
        sig = 2.0 * pump * (1.0 - 1e-12)
        return delta_k(nb, pump, sig, axes=axes)

    lo, hi = bracket_nm
    g_lo, g_hi = g(lo), g(hi)
    if np.sign(g_lo) == np.sign(g_hi):
        raise SolverError(
            f"no degeneracy cutoff in [{lo}, {hi}] nm: g({lo}) = {g_lo:.6g}, g({hi}) = {g_hi:.6g}"
        )
    return float(brentq(g, lo, hi, xtol=1e-10, maxiter=200))


def period_sweep(
    pump_nm_grid,
    temperature_c: float = 25.0,
    axes: dict[str, CrystalDispersion] | None = None,
) -> list[tuple[float, float, PhaseMatchPoint]]:
    """Coexistence period across a pump grid.

    Returns (pump_nm, period_mm, point) rows for pumps where the order-0 root
    exists; pumps beyond the degeneracy cutoff are skipped.
    """
    if axes is None:
        axes = ktp_axes()
    rows = []
    for pump in np.asarray(pump_nm_grid, dtype=float):
        try:
            period, point = solve_coexistence(float(pump), temperature_c, axes=axes)
        except SolverError:
            continue
        rows.append((float(pump), period, point))
    return rows
