"""Atomic excitation rates and multi-bath virtual-qubit thermodynamics.

A three-level ion (S, D, P) is driven on S-D by a red-sideband laser, on
D-P by broadband thermal light, and relaxes on P-S into room-temperature
vacuum modes. The three baths define a virtual qubit at the trap frequency
whose temperature bounds the achievable motional temperature.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

from .constants import C, HBAR
from .radiometry import AngularFrequency, Temperature, mean_occupation, planck_energy_density


class PopulationInversionError(ValueError):
    """Raised when the bath combination yields no cooling (inverted virtual qubit)."""


@dataclass(frozen=True)
class IonSpec:
    """Three-level ion data: S-D at omega1, D-P at omega2, S-P at omega3.

    a_ps_s and a_pd_s are the Einstein A rates out of P back to S and down
    to the D manifold (aggregate). a_pd_driven_s, when given, is the partial
    rate of the specific D-P transition being driven; it defaults to the
    aggregate. g_e/g_g are the degeneracies of the driven transition.
    """

    name: str
    omega1_rad_s: float
    omega2_rad_s: float
    omega3_rad_s: float
    a_ps_s: float
    a_pd_s: float
    g_e: int
    g_g: int
    a_pd_driven_s: "float | None" = None
    references: tuple = ()

    def __post_init__(self):
        for label in ("omega1_rad_s", "omega2_rad_s", "omega3_rad_s", "a_ps_s", "a_pd_s"):
            v = getattr(self, label)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0.0):
                raise ValueError(f"{label} must be finite and positive, got {v!r}")
        closure = abs(self.omega1_rad_s + self.omega2_rad_s - self.omega3_rad_s)
        if closure > 1e-6 * self.omega3_rad_s:
            raise ValueError(
                f"level closure violated: |omega1 + omega2 - omega3| = {closure:.3g} rad/s"
            )
        for label in ("g_e", "g_g"):
            g = getattr(self, label)
            if not (isinstance(g, int) and g >= 1):
                raise ValueError(f"{label} must be an integer >= 1, got {g!r}")
        if self.a_pd_driven_s is not None:
            v = self.a_pd_driven_s
            if not (math.isfinite(v) and 0.0 < v <= self.a_pd_s):
                raise ValueError(f"a_pd_driven_s must lie in (0, A_PD], got {v!r}")
        object.__setattr__(self, "references", tuple(self.references))

    @property
    def a_pd_driven(self) -> float:
        return self.a_pd_s if self.a_pd_driven_s is None else self.a_pd_driven_s

    # -- JSON schema mapping --------------------------------------------

    _SCHEMA = {
        "name": "name",
        "omega1_rad_s": "omega1_rad_s",
        "omega2_rad_s": "omega2_rad_s",
        "omega3_rad_s": "omega3_rad_s",
        "A_PS_s": "a_ps_s",
        "A_PD_s": "a_pd_s",
        "A_PD_driven_s": "a_pd_driven_s",
        "g_e": "g_e",
        "g_g": "g_g",
        "references": "references",
    }

    @classmethod
    def from_dict(cls, d: dict) -> "IonSpec":
        unknown = set(d) - set(cls._SCHEMA)
        if unknown:
            raise ValueError(f"unknown atomic-data keys: {sorted(unknown)}")
        required = {"name", "omega1_rad_s", "omega2_rad_s", "omega3_rad_s", "A_PS_s", "A_PD_s", "g_e", "g_g"}
        missing = required - set(d)
        if missing:
            raise ValueError(f"missing atomic-data keys: {sorted(missing)}")
        kwargs = {cls._SCHEMA[k]: v for k, v in d.items()}
        if "references" in kwargs:
            kwargs["references"] = tuple(kwargs["references"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        back = {v: k for k, v in self._SCHEMA.items()}
        d = {}
        for field_name, key in back.items():
            v = getattr(self, field_name)
            if field_name == "a_pd_driven_s" and v is None:
                continue
            d[key] = list(v) if field_name == "references" else v
        return d

    @classmethod
    def from_json_file(cls, path) -> "IonSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def load_ion(name_or_path: str = "ba138p") -> IonSpec:
    """Load atomic data from a JSON file path or a bundled data-set name."""
    import os

    if os.path.exists(name_or_path):
        return IonSpec.from_json_file(name_or_path)
    try:
        text = resources.files("thermolight.data").joinpath(f"{name_or_path}.json").read_text("utf-8")
    except FileNotFoundError:
        raise ValueError(f"no bundled atomic data named {name_or_path!r} and no such file") from None
    return IonSpec.from_dict(json.loads(text))


@dataclass(frozen=True)
class BathSet:
    """The three thermal environments: laser (possibly infinite), sun, room."""

    t_laser: Temperature
    t_sun: Temperature
    t_room: Temperature

    def __post_init__(self):
        for label in ("t_laser", "t_sun", "t_room"):
            v = getattr(self, label)
            if not isinstance(v, Temperature):
                object.__setattr__(self, label, Temperature(v))
        if self.t_sun.is_infinite or self.t_room.is_infinite:
            raise ValueError("sun and room temperatures must be finite")


@dataclass(frozen=True)
class CoolingDrive:
    """Delivered-light parameters for the rate estimate."""

    eta_delivery: float   # fiber + optics delivery efficiency, (0, 1]
    grayness: float       # geometric grayness G, (0, 1]
    omega_motion: AngularFrequency
    p_d: float = 1.0      # probability of sitting in D when step II light arrives

    def __post_init__(self):
        if not (0.0 < self.eta_delivery <= 1.0):
            raise ValueError(f"eta_delivery must lie in (0, 1], got {self.eta_delivery!r}")
        if not (0.0 < self.grayness <= 1.0):
            raise ValueError(f"grayness must lie in (0, 1], got {self.grayness!r}")
        if not (0.0 <= self.p_d <= 1.0):
            raise ValueError(f"p_d must lie in [0, 1], got {self.p_d!r}")
        if not isinstance(self.omega_motion, AngularFrequency):
            object.__setattr__(self, "omega_motion", AngularFrequency(self.omega_motion))


def branching_fraction(ion: IonSpec) -> float:
    """Probability that a P-state decay lands in S rather than D."""
    return ion.a_ps_s / (ion.a_ps_s + ion.a_pd_s)


def excitation_rate(a_eg: float, g_e: int, g_g: int, omega_eg, rho: float) -> float:
    """Einstein-rate excitation Gamma = (pi^2 c^3 / hbar omega^3) (g_e/g_g) A_eg rho.

    rho is the isotropic spectral energy density at the transition frequency,
    J m^-3 (rad/s)^-1.
    """
    if a_eg <= 0.0 or g_e < 1 or g_g < 1:
        raise ValueError("transition parameters must be positive")
    if rho < 0.0 or not math.isfinite(rho):
        raise ValueError(f"energy density must be finite and non-negative, got {rho!r}")
    w = omega_eg.rad_per_s if isinstance(omega_eg, AngularFrequency) else AngularFrequency(omega_eg).rad_per_s
    return (math.pi ** 2 * C ** 3) / (HBAR * w ** 3) * (g_e / g_g) * a_eg * rho


def phonon_cooling_rate(gamma: float, p_d: float, eta_sp: float) -> float:
    """Cycle-averaged phonon rate -Gamma p_D eta_SP; negative means cooling."""
    if gamma < 0.0:
        raise ValueError(f"excitation rate must be non-negative, got {gamma!r}")
    if not (0.0 <= p_d <= 1.0 and 0.0 <= eta_sp <= 1.0):
        raise ValueError("p_d and eta_sp must lie in [0, 1]")
    return -gamma * p_d * eta_sp


@dataclass(frozen=True)
class CoolingRateReport:
    mean_occupation_sun: float
    energy_density: float     # J m^-3 (rad/s)^-1 delivered at omega2
    gamma: float              # D -> P excitation rate, 1/s
    eta_sp: float
    phonon_rate: float        # phonon/s, negative = cooling


def cooling_rate_report(ion: IonSpec, drive: CoolingDrive, t_sun: "Temperature | float") -> CoolingRateReport:
    """Full estimate chain: delivered energy density -> excitation -> phonon rate."""
    t = t_sun if isinstance(t_sun, Temperature) else Temperature(t_sun)
    w2 = AngularFrequency(ion.omega2_rad_s)
    rho = drive.eta_delivery * drive.grayness * planck_energy_density(w2, t)
    gamma = excitation_rate(ion.a_pd_driven, ion.g_e, ion.g_g, w2, rho)
    eta_sp = branching_fraction(ion)
    return CoolingRateReport(
        mean_occupation_sun=mean_occupation(w2, t),
        energy_density=rho,
        gamma=gamma,
        eta_sp=eta_sp,
        phonon_rate=phonon_cooling_rate(gamma, drive.p_d, eta_sp),
    )


def virtual_temperature(ion: IonSpec, baths: BathSet, omega_motion) -> Temperature:
    """Temperature of the virtual qubit at the trap frequency.

    T_V = omega_motion / (omega3/T_room - omega2/T_sun - omega_l/T_laser)
    with omega_l = omega1 - omega_motion the red-sideband laser frequency.
    The denominator is evaluated with the level closure omega1 = omega3 -
    omega2 substituted, so equal baths cancel term-by-term and the fixed
    point T_V = T holds to rounding. Infinite baths contribute zero.
    """
    wm = omega_motion.rad_per_s if isinstance(omega_motion, AngularFrequency) else AngularFrequency(omega_motion).rad_per_s
    if wm >= ion.omega1_rad_s:
        raise ValueError("motional frequency must be far below the S-D splitting")
    inv_l = baths.t_laser.inverse_kelvin
    inv_s = baths.t_sun.inverse_kelvin
    inv_r = baths.t_room.inverse_kelvin
    # omega3/T3 - omega2/T2 - (omega3 - omega2 - wm)/Tl, grouped for exact cancellation
    denom = ion.omega3_rad_s * (inv_r - inv_l) - ion.omega2_rad_s * (inv_s - inv_l) + wm * inv_l
    if denom <= 0.0:
        raise PopulationInversionError(
            "no cooling: bath combination population-inverts the virtual qubit"
        )
    return Temperature(wm / denom)


def virtual_temperature_room_limit(ion: IonSpec, t_room: "Temperature | float", omega_motion) -> Temperature:
    """Scaled-room-temperature limit (omega_motion/omega3) T_room.

    The limit of virtual_temperature for an infinite laser bath and
    omega2/T_sun << omega3/T_room; the practical floor for sideband
    cooling in a room-temperature chamber.
    """
    t = t_room if isinstance(t_room, Temperature) else Temperature(t_room)
    if t.is_infinite:
        raise ValueError("room temperature must be finite")
    wm = omega_motion.rad_per_s if isinstance(omega_motion, AngularFrequency) else AngularFrequency(omega_motion).rad_per_s
    return Temperature(wm / ion.omega3_rad_s * t.kelvin)


@dataclass(frozen=True)
class OccupationReport:
    n_exact: float          # Bose factor 1/(e^x - 1)
    n_wien: float           # e^-x approximation
    difference: float       # n_exact - n_wien


def ground_state_occupation(t_v: "Temperature | float", omega_motion) -> OccupationReport:
    """Motional occupation at the virtual temperature, exact and Wien-approximated."""
    t = t_v if isinstance(t_v, Temperature) else Temperature(t_v)
    wm = omega_motion.rad_per_s if isinstance(omega_motion, AngularFrequency) else AngularFrequency(omega_motion).rad_per_s
    n_exact = mean_occupation(wm, t)
    x = HBAR * wm * t.beta
    n_wien = math.exp(-x) if x < 745.0 else 0.0
    return OccupationReport(n_exact=n_exact, n_wien=n_wien, difference=n_exact - n_wien)
