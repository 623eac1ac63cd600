"""Closed-form thermal radiation in three dimensions and in quasi-1D.

Conventions: angular frequency omega in rad/s throughout; spectral
densities per angular frequency unless a name says per_wavelength.
The quasi-1D power spectral density defaults to two polarizations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.optimize import brentq

from .constants import C, HBAR, K_B, NM, TWO_PI_C

# Smallest positive double; q1d_psd never returns below this so that
# ratios against it stay finite deep in the exponential tail.
_TINY = math.ulp(0.0)

# exp overflows above ~709; past this point 1/(e^x - 1) == e^-x exactly.
_EXP_CUT = 700.0


@dataclass(frozen=True)
class Temperature:
    """Absolute temperature. kelvin > 0, or math.inf for a laser bath."""

    kelvin: float

    def __post_init__(self):
        k = self.kelvin
        if not isinstance(k, (int, float)) or math.isnan(k) or k <= 0.0:
            raise ValueError(f"temperature must be positive, got {k!r}")
        object.__setattr__(self, "kelvin", float(k))

    @classmethod
    def infinite(cls) -> "Temperature":
        return cls(math.inf)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.kelvin)

    @property
    def inverse_kelvin(self) -> float:
        """1/T in 1/K; exactly 0.0 for the infinite sentinel."""
        return 0.0 if self.is_infinite else 1.0 / self.kelvin

    @property
    def beta(self) -> float:
        """1/(k_B T) in 1/J; exactly 0.0 for the infinite sentinel."""
        return 0.0 if self.is_infinite else 1.0 / (K_B * self.kelvin)


@dataclass(frozen=True)
class AngularFrequency:
    """Angular frequency in rad/s, finite and positive."""

    rad_per_s: float

    def __post_init__(self):
        w = self.rad_per_s
        if not isinstance(w, (int, float)) or not math.isfinite(w) or w <= 0.0:
            raise ValueError(f"angular frequency must be finite and positive, got {w!r}")
        object.__setattr__(self, "rad_per_s", float(w))

    @classmethod
    def from_wavelength_nm(cls, wavelength_nm: float) -> "AngularFrequency":
        if not (wavelength_nm > 0.0 and math.isfinite(wavelength_nm)):
            raise ValueError(f"wavelength must be finite and positive, got {wavelength_nm!r}")
        return cls(TWO_PI_C / (wavelength_nm * NM))

    @property
    def wavelength_m(self) -> float:
        return TWO_PI_C / self.rad_per_s

    @property
    def wavelength_nm(self) -> float:
        return self.wavelength_m / NM


def _omega_value(omega: "AngularFrequency | float") -> float:
    if isinstance(omega, AngularFrequency):
        return omega.rad_per_s
    return AngularFrequency(omega).rad_per_s


def _temperature(t: "Temperature | float") -> Temperature:
    return t if isinstance(t, Temperature) else Temperature(t)


def _bose(x: float) -> float:
    """1/(e^x - 1) for x > 0, with overflow guard; inf at x == 0."""
    if x == 0.0:
        return math.inf
    if x > _EXP_CUT:
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def mean_occupation(omega: "AngularFrequency | float", temperature: "Temperature | float") -> float:
    """Bose-Einstein occupation of a mode at omega in a bath at T.

    Diverges (returns inf) for the infinite-temperature sentinel and
    underflows to exactly 0.0 deep in the exponential tail.
    """
    w = _omega_value(omega)
    t = _temperature(temperature)
    return _bose(HBAR * w * t.beta)


def planck_radiance(omega: "AngularFrequency | float", temperature: "Temperature | float") -> float:
    """Blackbody spectral radiance per angular frequency.

    Units W m^-2 sr^-1 (rad/s)^-1.
    """
    w = _omega_value(omega)
    n = mean_occupation(w, temperature)
    return HBAR * w ** 3 / (4.0 * math.pi ** 3 * C ** 2) * n


def planck_energy_density(omega: "AngularFrequency | float", temperature: "Temperature | float") -> float:
    """Isotropic blackbody energy density per angular frequency, J m^-3 (rad/s)^-1.

    Equals (4 pi / c) * planck_radiance.
    """
    w = _omega_value(omega)
    n = mean_occupation(w, temperature)
    return HBAR * w ** 3 / (math.pi ** 2 * C ** 3) * n


def q1d_psd(
    omega: "AngularFrequency | float",
    temperature: "Temperature | float",
    polarizations: int = 2,
) -> float:
    """Thermal power spectral density guided in a single transverse mode.

    Units W s/rad (power per angular-frequency interval). With two
    polarizations S(omega) = (hbar omega / pi) / (e^{beta hbar omega} - 1);
    one polarization carries half that. The return value is floored at the
    smallest positive double so the deep Wien tail stays positive.
    """
    if polarizations not in (1, 2):
        raise ValueError(f"polarizations must be 1 or 2, got {polarizations!r}")
    w = _omega_value(omega)
    n = mean_occupation(w, temperature)
    s = (polarizations / 2.0) * (HBAR * w / math.pi) * n
    if math.isinf(s):
        return s
    return max(s, _TINY)


def q1d_total_power(temperature: "Temperature | float", polarizations: int = 2) -> float:
    """Frequency-integrated single-mode thermal power, pi (k_B T)^2 / (6 hbar) for two polarizations."""
    if polarizations not in (1, 2):
        raise ValueError(f"polarizations must be 1 or 2, got {polarizations!r}")
    t = _temperature(temperature)
    if t.is_infinite:
        raise ValueError("integrated power diverges at infinite temperature")
    return (polarizations / 2.0) * math.pi * (K_B * t.kelvin) ** 2 / (6.0 * HBAR)


def q1d_psd_per_wavelength(wavelength_nm: float, temperature: "Temperature | float") -> float:
    """Single-mode thermal PSD expressed per wavelength interval, W/nm."""
    w = AngularFrequency.from_wavelength_nm(wavelength_nm)
    jac = TWO_PI_C / w.wavelength_m ** 2  # |d omega / d lambda|, rad/s per m
    return q1d_psd(w, temperature) * jac * NM


def planck_irradiance_per_wavelength(wavelength_nm: float, temperature: "Temperature | float") -> float:
    """Blackbody spectral exitance pi * B_lambda, W m^-2 nm^-1."""
    w = AngularFrequency.from_wavelength_nm(wavelength_nm)
    jac = TWO_PI_C / w.wavelength_m ** 2
    return math.pi * planck_radiance(w, temperature) * jac * NM


@lru_cache(maxsize=None)
def _peak_root(p: int) -> float:
    """Positive root of (p - x) e^x = p, the stationary point of x^p/(e^x - 1)."""
    f = lambda x: (p - x) * math.exp(x) - p
    return brentq(f, 1e-8, float(p), rtol=1e-14)


_WIEN_EXPONENT = {
    # distribution family -> power p in x^p / (e^x - 1), or None if monotone
    "q1d_per_omega": None,        # hbar omega n(omega): no interior maximum
    "q1d_per_wavelength": 3,
    "planck_per_omega": 3,
    "planck_per_wavelength": 5,
}


def wien_peak(family: str, temperature: "Temperature | float") -> "float | None":
    """Peak wavelength in nm of a thermal spectral family, or None if monotone.

    Families: 'q1d_per_omega', 'q1d_per_wavelength', 'planck_per_omega',
    'planck_per_wavelength'. For per-omega families the returned value is
    the wavelength of the peak angular frequency.
    """
    if family not in _WIEN_EXPONENT:
        raise ValueError(f"unknown spectral family {family!r}; expected one of {sorted(_WIEN_EXPONENT)}")
    t = _temperature(temperature)
    if t.is_infinite:
        raise ValueError("peak wavelength is undefined at infinite temperature")
    p = _WIEN_EXPONENT[family]
    if p is None:
        return None
    x = _peak_root(p)
    if family.endswith("per_omega"):
        w_pk = x / (HBAR * t.beta)
        return TWO_PI_C / w_pk / NM
    # per-wavelength: x = beta h c / lambda at the peak
    return HBAR * t.beta * TWO_PI_C / x / NM
