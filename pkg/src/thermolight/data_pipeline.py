"""Reduction of raw spectrometer counts to calibrated single-mode PSDs.

The chain: divide out the instrument response, divide out the
wavelength-dependent slit clipping of the diverging fiber mode, scale the
result so its band-integrated power matches a power-meter reading, then
compare against the ideal single-mode thermal spectrum to get a delivery
efficiency and a best-fit source temperature. An atmospheric correction
curve, built by ratioing a reference solar spectrum against an ideal
blackbody, converts the ideal spectrum into the expected one at ground
level. Every correction is multiplicative, so apply order is free.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import erf

from .constants import NM
from .radiometry import (
    Temperature,
    planck_irradiance_per_wavelength,
    q1d_psd_per_wavelength,
)
from .spectra import SampledSpectrum, SpectrumKind, read_spectrum_csv


class FitConvergenceError(RuntimeError):
    """Temperature fit failed to converge inside the allowed iterations/bracket."""


def _as_temperature(t) -> Temperature:
    return t if isinstance(t, Temperature) else Temperature(t)


@dataclass(frozen=True)
class InstrumentResponse:
    """Relative spectrometer response on a wavelength grid; dimensionless, positive."""

    wavelengths_nm: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        wl = np.asarray(self.wavelengths_nm, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if wl.ndim != 1 or wl.size < 2 or v.shape != wl.shape:
            raise ValueError("response needs matching 1-d wavelength and value arrays")
        if np.any(np.diff(wl) <= 0.0) or np.any(wl <= 0.0):
            raise ValueError("response wavelengths must be positive and strictly increasing")
        if np.any(~np.isfinite(v)) or np.any(v <= 0.0):
            raise ValueError("response values must be finite and positive")
        wl = wl.copy(); v = v.copy()
        wl.setflags(write=False); v.setflags(write=False)
        object.__setattr__(self, "wavelengths_nm", wl)
        object.__setattr__(self, "values", v)

    def interpolate(self, grid_nm) -> np.ndarray:
        g = np.asarray(grid_nm, dtype=float)
        lo, hi = self.wavelengths_nm[0], self.wavelengths_nm[-1]
        if np.any(g < lo) or np.any(g > hi):
            raise ValueError(f"response does not cover requested band (covers [{lo}, {hi}] nm)")
        return np.interp(g, self.wavelengths_nm, self.values)

    @classmethod
    def from_csv(cls, path) -> "InstrumentResponse":
        wl, v = _read_two_column_csv(path)
        return cls(wl, v)


@dataclass(frozen=True)
class SlitGeometry:
    """Entrance-slit clipping geometry: slit width, fiber-to-slit distance, mode-field radius."""

    slit_width_m: float
    distance_m: float
    mode_field_radius_m: float

    def __post_init__(self):
        for label in ("slit_width_m", "distance_m", "mode_field_radius_m"):
            v = getattr(self, label)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0.0):
                raise ValueError(f"{label} must be finite and positive, got {v!r}")
        if self.distance_m < 100.0 * self.mode_field_radius_m:
            warnings.warn(
                "fiber-to-slit distance is not large against the mode-field radius; "
                "paraxial far-field clipping model is marginal",
                stacklevel=2,
            )


def beam_radius_at_slit(geometry: SlitGeometry, wavelength_nm: float) -> float:
    """Gaussian beam 1/e^2 radius after propagating the fiber-to-slit distance."""
    lam = np.asarray(wavelength_nm, dtype=float) * NM
    wf = geometry.mode_field_radius_m
    spread = lam * geometry.distance_m / (math.pi * wf ** 2)
    return wf * np.sqrt(1.0 + spread ** 2)


def slit_transmission(geometry: SlitGeometry, wavelength_nm):
    """Fraction of a Gaussian beam passing a slit of the configured width.

    One-axis clipping: T = erf(sqrt(2) (s/2) / w(d, lambda)). Monotone
    decreasing in wavelength for fixed geometry.
    """
    w = beam_radius_at_slit(geometry, wavelength_nm)
    t = erf(math.sqrt(2.0) * (geometry.slit_width_m / 2.0) / w)
    return float(t) if np.isscalar(wavelength_nm) else t


@dataclass(frozen=True)
class ReferenceSolarSpectrum:
    """Direct-normal solar irradiance [W m^-2 nm^-1]; must cover 350-1100 nm."""

    wavelengths_nm: np.ndarray
    irradiance: np.ndarray

    def __post_init__(self):
        wl = np.asarray(self.wavelengths_nm, dtype=float)
        v = np.asarray(self.irradiance, dtype=float)
        if wl.ndim != 1 or wl.size < 2 or v.shape != wl.shape:
            raise ValueError("reference needs matching 1-d wavelength and irradiance arrays")
        if np.any(np.diff(wl) <= 0.0) or np.any(wl <= 0.0):
            raise ValueError("reference wavelengths must be positive and strictly increasing")
        if np.any(~np.isfinite(v)) or np.any(v < 0.0):
            raise ValueError("reference irradiance must be finite and non-negative")
        if wl[0] > 350.0 or wl[-1] < 1100.0:
            raise ValueError("reference spectrum must cover at least [350, 1100] nm")
        wl = wl.copy(); v = v.copy()
        wl.setflags(write=False); v.setflags(write=False)
        object.__setattr__(self, "wavelengths_nm", wl)
        object.__setattr__(self, "irradiance", v)

    def interpolate(self, grid_nm) -> np.ndarray:
        g = np.asarray(grid_nm, dtype=float)
        lo, hi = self.wavelengths_nm[0], self.wavelengths_nm[-1]
        if np.any(g < lo) or np.any(g > hi):
            raise ValueError(f"reference does not cover requested band (covers [{lo}, {hi}] nm)")
        return np.interp(g, self.wavelengths_nm, self.irradiance)

    @classmethod
    def from_csv(cls, path) -> "ReferenceSolarSpectrum":
        wl, v = _read_two_column_csv(path)
        return cls(wl, v)

    @classmethod
    def load_bundled(cls) -> "ReferenceSolarSpectrum":
        with resources.as_file(resources.files("thermolight.data") / "solar_reference.csv") as p:
            return cls.from_csv(p)


def _read_two_column_csv(path):
    """Lenient wavelength_nm,value reader: '#' comments allowed, kind line optional."""
    wl, vals = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.lower().replace(" ", "") == "wavelength_nm,value":
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two comma-separated columns")
            try:
                wl.append(float(parts[0]))
                vals.append(float(parts[1]))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric row {line!r}") from exc
    if len(wl) < 2:
        raise ValueError(f"{path}: need at least two data rows")
    return np.array(wl), np.array(vals)


# -- corrections ---------------------------------------------------------


def apply_response(raw: SampledSpectrum, response: InstrumentResponse) -> SampledSpectrum:
    """Divide counts by the instrument response on the coarser grid of the overlap."""
    lo = max(raw.wavelengths_nm[0], response.wavelengths_nm[0])
    hi = min(raw.wavelengths_nm[-1], response.wavelengths_nm[-1])
    if hi <= lo:
        raise ValueError("raw spectrum and response share no wavelength overlap")

    def spacing(grid):
        inside = grid[(grid >= lo) & (grid <= hi)]
        return np.median(np.diff(inside)) if inside.size >= 2 else math.inf

    raw_dx = spacing(raw.wavelengths_nm)
    resp_dx = spacing(response.wavelengths_nm)
    source = raw.wavelengths_nm if raw_dx >= resp_dx else response.wavelengths_nm
    grid = source[(source >= lo) & (source <= hi)]
    if grid.size < 2:
        raise ValueError("overlap between raw spectrum and response is too narrow")
    r = response.interpolate(grid)
    if np.any(r <= 0.0):
        raise ValueError("response is non-positive inside the analysis band")
    values = raw.interpolate(grid) / r
    return SampledSpectrum(grid, values, raw.kind, dict(raw.meta))


def apply_slit_correction(spectrum: SampledSpectrum, geometry: SlitGeometry) -> SampledSpectrum:
    """Divide out the wavelength-dependent slit transmission on the spectrum's own grid."""
    t = slit_transmission(geometry, spectrum.wavelengths_nm)
    return SampledSpectrum(spectrum.wavelengths_nm, spectrum.values / t, spectrum.kind, dict(spectrum.meta))


@dataclass(frozen=True)
class AtmosphericCorrection:
    """Ratio of a measured solar reference to a fitted ideal blackbody, clipped to [0, 1.2].

    Multiplying the ideal single-mode thermal PSD by this curve gives the
    spectrum expected at ground level after atmospheric extinction.
    """

    wavelengths_nm: np.ndarray
    values: np.ndarray
    amplitude: float
    temperature: Temperature
    fit_band_nm: tuple

    def interpolate(self, grid_nm) -> np.ndarray:
        g = np.asarray(grid_nm, dtype=float)
        lo, hi = self.wavelengths_nm[0], self.wavelengths_nm[-1]
        if np.any(g < lo) or np.any(g > hi):
            raise ValueError(f"correction does not cover requested band (covers [{lo}, {hi}] nm)")
        return np.interp(g, self.wavelengths_nm, self.values)

    def expected_q1d_psd(self, grid_nm=None) -> SampledSpectrum:
        """Expected single-mode PSD at ground level: c(lambda) * S_lambda(lambda, T)."""
        g = self.wavelengths_nm if grid_nm is None else np.asarray(grid_nm, dtype=float)
        ideal = np.array([q1d_psd_per_wavelength(l, self.temperature) for l in g])
        return SampledSpectrum(g, self.interpolate(g) * ideal, SpectrumKind.PSD_PER_WAVELENGTH)


def atmospheric_correction(
    reference: ReferenceSolarSpectrum,
    temperature,
    fit_band_nm: tuple = (400.0, 900.0),
    clip_ceiling: float = 1.2,
) -> AtmosphericCorrection:
    """Build c(lambda) = ref / (a * Planck_lambda) with a fitted by least squares.

    The single amplitude a minimizes |a * Planck - ref|^2 over the fit band,
    absorbing the sun's solid-angle dilution and any gray loss; the residual
    wavelength dependence is the atmospheric (plus calibration) shape.
    """
    t = _as_temperature(temperature)
    wl = reference.wavelengths_nm
    planck = np.array([planck_irradiance_per_wavelength(l, t) for l in wl])
    lo, hi = fit_band_nm
    if not lo < hi:
        raise ValueError(f"fit band must satisfy lo < hi, got {fit_band_nm!r}")
    in_band = (wl >= lo) & (wl <= hi)
    if np.count_nonzero(in_band) < 2:
        raise ValueError("fit band contains fewer than two reference samples")
    p, r = planck[in_band], reference.irradiance[in_band]
    amplitude = float(np.dot(p, r) / np.dot(p, p))
    if amplitude <= 0.0:
        raise ValueError("degenerate amplitude fit: reference is not Planck-like in the fit band")
    c = np.clip(reference.irradiance / (amplitude * planck), 0.0, clip_ceiling)
    return AtmosphericCorrection(
        wavelengths_nm=wl,
        values=c,
        amplitude=amplitude,
        temperature=t,
        fit_band_nm=(float(lo), float(hi)),
    )


# -- calibration and extraction -----------------------------------------


def calibrate_power(spectrum: SampledSpectrum, measured_power_w: float, band_nm: tuple) -> SampledSpectrum:
    """Scale a corrected spectrum so its band integral equals a power-meter reading.

    The input is treated as a per-wavelength shape (counts after response
    and slit correction, or an already-per-wavelength density); the output
    is a calibrated PSD in W/nm.
    """
    if not (measured_power_w > 0.0 and math.isfinite(measured_power_w)):
        raise ValueError(f"measured power must be finite and positive, got {measured_power_w!r}")
    if spectrum.kind in (SpectrumKind.PSD_PER_ANGULAR_FREQUENCY, SpectrumKind.IRRADIANCE_PER_ANGULAR_FREQUENCY):
        raise ValueError("convert per-angular-frequency input to a per-wavelength kind first")
    lo, hi = band_nm
    wl = spectrum.wavelengths_nm
    if not (lo < hi) or lo < wl[0] or hi > wl[-1]:
        raise ValueError(f"band {band_nm!r} not contained in the sampled grid [{wl[0]}, {wl[-1]}] nm")
    inside = wl[(wl > lo) & (wl < hi)]
    grid = np.concatenate(([lo], inside, [hi]))
    integral = float(trapezoid(spectrum.interpolate(grid), grid))
    if integral <= 0.0:
        raise ValueError("spectrum integrates to zero over the calibration band")
    scale = measured_power_w / integral
    return SampledSpectrum(wl, spectrum.values * scale, SpectrumKind.PSD_PER_WAVELENGTH, dict(spectrum.meta))


@dataclass(frozen=True)
class EfficiencyCurve:
    wavelengths_nm: np.ndarray
    values: np.ndarray
    band_nm: tuple
    band_average: float


def extract_efficiency(
    calibrated: SampledSpectrum,
    temperature,
    band_nm: "tuple | None" = None,
    correction: "AtmosphericCorrection | None" = None,
) -> EfficiencyCurve:
    """Delivery efficiency eta(lambda) = measured PSD / ideal single-mode thermal PSD.

    With an atmospheric correction supplied, the denominator is the expected
    ground-level spectrum c(lambda) * S_lambda instead of the bare ideal.
    Warns if eta exceeds 1 anywhere (super-thermal: calibration suspect).
    """
    if calibrated.kind == SpectrumKind.PSD_PER_ANGULAR_FREQUENCY:
        from .spectra import convert_spectral_domain

        calibrated = convert_spectral_domain(calibrated, SpectrumKind.PSD_PER_WAVELENGTH)
    if calibrated.kind != SpectrumKind.PSD_PER_WAVELENGTH:
        raise ValueError(f"expected a calibrated PSD, got kind {calibrated.kind.value!r}")
    t = _as_temperature(temperature)
    wl = calibrated.wavelengths_nm
    ideal = np.array([q1d_psd_per_wavelength(l, t) for l in wl])
    if correction is not None:
        ideal = ideal * np.maximum(correction.interpolate(wl), 1e-6)
    eta = calibrated.values / ideal
    if band_nm is None:
        band_nm = (float(wl[0]), float(wl[-1]))
    lo, hi = band_nm
    in_band = (wl >= lo) & (wl <= hi)
    if np.count_nonzero(in_band) < 2:
        raise ValueError("efficiency band contains fewer than two samples")
    wb, eb = wl[in_band], eta[in_band]
    band_average = float(trapezoid(eb, wb) / (wb[-1] - wb[0]))
    if np.any(eta > 1.0):
        warnings.warn(
            "efficiency exceeds 1 at some wavelengths: super-thermal, check calibration",
            stacklevel=2,
        )
    return EfficiencyCurve(wavelengths_nm=wl, values=eta, band_nm=(float(lo), float(hi)), band_average=band_average)


# -- temperature fitting -------------------------------------------------

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TemperatureFit:
    temperature: Temperature
    residual: float          # RMS misfit / RMS data, dimensionless
    amplitude: float
    iterations: int
    flagged: bool            # residual beyond the shape-consistency threshold


def _model_shape(model: str, wavelengths_nm, temperature: Temperature) -> np.ndarray:
    key = model.lower()
    if key in ("q1d", "1d"):
        return np.array([q1d_psd_per_wavelength(l, temperature) for l in wavelengths_nm])
    if key in ("3d", "planck"):
        return np.array([planck_irradiance_per_wavelength(l, temperature) for l in wavelengths_nm])
    raise ValueError(f"unknown model {model!r}; expected 'q1d' or '3d'")


def fit_temperature(
    spectrum: SampledSpectrum,
    model: str = "q1d",
    bracket_k: tuple = (1000.0, 20000.0),
    max_iterations: int = 200,
    residual_threshold: float = 0.05,
) -> TemperatureFit:
    """Golden-section search on T with the amplitude solved linearly at each step.

    Needs at least 20 samples spanning a factor 1.5 in wavelength. Raises
    FitConvergenceError if the bracket cannot be shrunk inside the iteration
    budget or the minimum sits at a bracket edge (degenerate shape).
    """
    if spectrum.kind in (SpectrumKind.PSD_PER_ANGULAR_FREQUENCY, SpectrumKind.IRRADIANCE_PER_ANGULAR_FREQUENCY):
        from .spectra import convert_spectral_domain

        target = (
            SpectrumKind.PSD_PER_WAVELENGTH
            if spectrum.kind == SpectrumKind.PSD_PER_ANGULAR_FREQUENCY
            else SpectrumKind.IRRADIANCE_PER_WAVELENGTH
        )
        spectrum = convert_spectral_domain(spectrum, target)
    wl = spectrum.wavelengths_nm
    y = spectrum.values
    if wl.size < 20:
        raise ValueError(f"temperature fit needs at least 20 samples, got {wl.size}")
    if wl[-1] / wl[0] < 1.5:
        raise ValueError("temperature fit needs a wavelength span of at least a factor 1.5")
    lo, hi = (float(b) for b in bracket_k)
    if not 0.0 < lo < hi:
        raise ValueError(f"bracket must satisfy 0 < lo < hi, got {bracket_k!r}")
    y_norm = math.sqrt(float(np.mean(y ** 2)))
    if y_norm == 0.0:
        raise ValueError("spectrum is identically zero")

    def misfit(t_k: float):
        m = _model_shape(model, wl, Temperature(t_k))
        mm = float(np.dot(m, m))
        if mm == 0.0:
            return math.inf, 0.0
        a = float(np.dot(m, y) / mm)
        r = y - a * m
        return float(np.dot(r, r)), a

    a_k, b_k = lo, hi
    c_k = b_k - _GOLDEN * (b_k - a_k)
    d_k = a_k + _GOLDEN * (b_k - a_k)
    f_c, _ = misfit(c_k)
    f_d, _ = misfit(d_k)
    iterations = 0
    while (b_k - a_k) > 1e-7 * (a_k + b_k) / 2.0:
        iterations += 1
        if iterations > max_iterations:
            raise FitConvergenceError(
                f"temperature fit did not converge in {max_iterations} iterations"
            )
        if f_c < f_d:
            b_k, d_k, f_d = d_k, c_k, f_c
            c_k = b_k - _GOLDEN * (b_k - a_k)
            f_c, _ = misfit(c_k)
        else:
            a_k, c_k, f_c = c_k, d_k, f_d
            d_k = a_k + _GOLDEN * (b_k - a_k)
            f_d, _ = misfit(d_k)
    t_best = 0.5 * (a_k + b_k)
    span = hi - lo
    if t_best - lo < 1e-3 * span or hi - t_best < 1e-3 * span:
        raise FitConvergenceError(
            f"best-fit temperature {t_best:.4g} K pinned at the bracket edge; "
            "spectrum shape is not thermal in the searched range"
        )
    ssr, amplitude = misfit(t_best)
    if amplitude <= 0.0:
        raise FitConvergenceError("degenerate fit: non-positive amplitude")
    residual = math.sqrt(ssr / wl.size) / y_norm
    return TemperatureFit(
        temperature=Temperature(t_best),
        residual=residual,
        amplitude=amplitude,
        iterations=iterations,
        flagged=residual > residual_threshold,
    )
