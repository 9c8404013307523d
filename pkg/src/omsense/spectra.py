"""Single-sensor frequency-domain noise physics.

Everything here is expressed in angular frequency (rad/s) and SI units.
Force spectral densities are symmetrized, one-sided quantities in N^2/Hz.

Core relations
--------------
Mechanical susceptibility (dimensionless-normalized response of position
to force, per ``q(w) = chi_w/(m*Omega) * F(w)``):

    chi_w = Omega / (Omega^2 - w^2 - 2j*gamma*w),      Q = Omega/(2*gamma)

Cavity reflection phase and optomechanical cooperativity:

    e^{i phi_w} = (kappa/2 + i w)/(kappa/2 - i w)
    C_w = (2 G^2 / gamma kappa) / (1 - 2 i w / kappa)^2 = |C_w| e^{i phi_w}

with G = E*G0, E^2 = (4 kappa_r / kappa^2) E0^2 and E0^2 = P/(hbar Omega_L)
the input photon flux.

Force-noise budget of a phase-quadrature homodyne readout:

    S_F = hbar m Omega / (8 gamma |C_w| |chi_w|^2) * Syy        (shot)
        + 8 hbar m gamma Omega |C_w| * Sxx                      (back-action)
        + 2 hbar m Omega Re[chi_w] / |chi_w|^2 * Sxy            (correlations)
        + 4 hbar m gamma Omega * Spp                            (mechanical)
        + (1-eta^2)/eta^2 * hbar m Omega/(16 gamma |C_w||chi_w|^2)  (loss)

with Spp = K_B T / (hbar Omega) for a flat thermal bath, so the mechanical
term is 4 m gamma K_B T.  The standard quantum limit of the optical part is
hbar m Omega / |chi_w|, reached at |C_w| = 1/(8 gamma |chi_w|).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import C_LIGHT, HBAR, K_B, TWO_PI
from .errors import ConfigError

__all__ = [
    "Oscillator",
    "CavityOptics",
    "SqueezedInput",
    "QuadraturePsds",
    "mechanical_susceptibility",
    "cavity_phase_and_cooperativity",
    "input_quadrature_psds",
    "single_sensor_noise_psd",
    "squeezed_noise_closed_form",
    "sql_noise_psd",
    "simplified_model_noise_psd",
    "bad_cavity_map",
    "thermal_momentum_psd",
    "acceleration_asd",
    "displacement_asd",
]


def _scalarize(value, *inputs):
    """Return a Python scalar when every frequency-like input was scalar."""
    if all(np.ndim(x) == 0 for x in inputs):
        return value.item() if np.ndim(value) else value
    return value


# ---------------------------------------------------------------------------
# parameter records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Oscillator:
    """Mechanical test mass: mass (kg), resonance and damping (rad/s), bath T (K).

    ``gamma`` is the half-linewidth entering the susceptibility denominator
    ``-2j*gamma*w``; the quality factor is Q = Omega/(2*gamma).
    """

    mass: float
    omega0: float
    gamma: float
    temperature: float = 0.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ConfigError(f"oscillator mass must be positive, got {self.mass}")
        if not self.omega0 > 0:
            raise ConfigError(f"resonance must be positive, got {self.omega0}")
        if not self.gamma > 0:
            raise ConfigError(f"damping must be positive, got {self.gamma}")
        if self.temperature < 0:
            raise ConfigError(f"temperature must be >= 0, got {self.temperature}")

    @property
    def quality(self) -> float:
        return self.omega0 / (2.0 * self.gamma)

    @classmethod
    def from_quality(cls, mass, omega0, quality, temperature=0.0,
                     gamma_convention="half"):
        """Build from a quality factor under a stated damping convention.

        ``half`` (default) reads Q = Omega/(2*gamma), i.e. gamma is the
        half-linewidth of the displacement response.  ``full`` reads the
        quoted Q against the full linewidth, gamma = Omega/Q, and inserts
        that value directly into the susceptibility.  Both conventions are
        supported so published numbers can be reproduced under either
        reading; reports should state which convention they used.
        """
        if gamma_convention == "half":
            gamma = omega0 / (2.0 * quality)
        elif gamma_convention == "full":
            gamma = omega0 / quality
        else:
            raise ConfigError(f"unknown gamma convention {gamma_convention!r}")
        return cls(mass=mass, omega0=omega0, gamma=gamma, temperature=temperature)


@dataclass(frozen=True)
class CavityOptics:
    """Cavity and drive parameters for one sensor.

    kappa           total cavity dissipation rate (rad/s)
    kappa_readout   dissipation to the readout port (rad/s), <= kappa
    g0              vacuum optomechanical coupling rate (rad/s)
    laser_omega     laser angular frequency (rad/s)
    input_power     input laser power (W)
    efficiency_sq   detection efficiency eta^2 in [0, 1]
    length          cavity length (m), optional; enables the Fabry-Perot
                    identity g0 = (Omega_L/L) sqrt(hbar/(2 m Omega))
    """

    kappa: float
    kappa_readout: float
    g0: float
    laser_omega: float
    input_power: float
    efficiency_sq: float = 1.0
    length: float | None = None

    def __post_init__(self):
        if not 0 < self.kappa_readout <= self.kappa * (1 + 1e-12):
            raise ConfigError(
                f"need 0 < kappa_readout <= kappa, got {self.kappa_readout} / {self.kappa}")
        if not 0 <= self.efficiency_sq <= 1:
            raise ConfigError(f"efficiency^2 must lie in [0,1], got {self.efficiency_sq}")
        if self.input_power < 0:
            raise ConfigError(f"input power must be >= 0, got {self.input_power}")
        if self.g0 < 0:
            raise ConfigError(f"g0 must be >= 0, got {self.g0}")
        if not self.laser_omega > 0:
            raise ConfigError(f"laser frequency must be positive, got {self.laser_omega}")

    @property
    def photon_flux(self) -> float:
        """Input photon flux E0^2 = P / (hbar Omega_L), 1/s."""
        return self.input_power / (HBAR * self.laser_omega)

    @property
    def intracavity_flux(self) -> float:
        """Intra-cavity field squared, E^2 = (4 kappa_r / kappa^2) E0^2."""
        return 4.0 * self.kappa_readout / self.kappa**2 * self.photon_flux

    @property
    def loss_rate(self) -> float:
        """Internal loss kappa_l = kappa - kappa_r."""
        return self.kappa - self.kappa_readout

    @classmethod
    def from_wavelength(cls, kappa, kappa_readout, g0, wavelength, input_power,
                        efficiency_sq=1.0, length=None):
        return cls(kappa=kappa, kappa_readout=kappa_readout, g0=g0,
                   laser_omega=TWO_PI * C_LIGHT / wavelength,
                   input_power=input_power, efficiency_sq=efficiency_sq,
                   length=length)

    def g0_from_geometry(self, osc: Oscillator) -> float:
        """Fabry-Perot vacuum coupling (Omega_L/L) sqrt(hbar / 2 m Omega)."""
        if self.length is None:
            raise ConfigError("cavity length is required to derive g0 from geometry")
        return self.laser_omega / self.length * math.sqrt(
            HBAR / (2.0 * osc.mass * osc.omega0))


@dataclass(frozen=True)
class SqueezedInput:
    """Input optical state: squeezing strength r and an angle policy.

    angle_policy is one of "vacuum" (r forced to 0), "fixed" (use ``angle``)
    or "optimal" (caller substitutes the frequency-dependent optimum).
    Conversions: dB = 10 log10(e^{2r});  N_s = sinh^2 r, so that
    e^{-2r} = 1/(sqrt(N_s) + sqrt(N_s+1))^2.
    """

    r: float = 0.0
    angle_policy: str = "fixed"
    angle: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise ConfigError(f"squeezing strength must be >= 0, got {self.r}")
        if self.angle_policy not in ("vacuum", "fixed", "optimal"):
            raise ConfigError(f"unknown angle policy {self.angle_policy!r}")
        if self.angle_policy == "vacuum" and self.r != 0.0:
            raise ConfigError("vacuum policy requires r = 0")

    @property
    def db(self) -> float:
        return 10.0 * self.r * 2.0 / math.log(10.0)

    @property
    def photon_number(self) -> float:
        return math.sinh(self.r) ** 2

    @classmethod
    def vacuum(cls):
        return cls(r=0.0, angle_policy="vacuum")

    @classmethod
    def from_db(cls, db, angle_policy="fixed", angle=0.0):
        return cls(r=db * math.log(10.0) / 20.0, angle_policy=angle_policy, angle=angle)

    @classmethod
    def from_photon_number(cls, n_s, angle_policy="fixed", angle=0.0):
        if n_s < 0:
            raise ConfigError(f"photon number must be >= 0, got {n_s}")
        return cls(r=math.asinh(math.sqrt(n_s)), angle_policy=angle_policy, angle=angle)


@dataclass(frozen=True)
class QuadraturePsds:
    """Symmetrized input-field quadrature PSDs (dimensionless, vacuum = 1/2).

    syy, sxx are the phase/amplitude variances; sxy is the symmetrized
    cross spectrum, real by construction.
    """

    syy: float
    sxx: float
    sxy: float = 0.0

    def __post_init__(self):
        if not (self.syy > 0 and self.sxx > 0):
            raise ConfigError("quadrature variances must be positive")

    @property
    def uncertainty_product(self) -> float:
        """syy*sxx - sxy^2; equals 1/4 for any pure squeezed input."""
        return self.syy * self.sxx - self.sxy**2

    @classmethod
    def vacuum(cls):
        return cls(syy=0.5, sxx=0.5, sxy=0.0)


# ---------------------------------------------------------------------------
# response functions
# ---------------------------------------------------------------------------

def mechanical_susceptibility(osc: Oscillator, omega):
    """chi_w = Omega / (Omega^2 - w^2 - 2j*gamma*w); chi(-w) = chi(w)*."""
    w = np.asarray(omega, dtype=float)
    chi = osc.omega0 / (osc.omega0**2 - w**2 - 2j * osc.gamma * w)
    return _scalarize(chi, omega)


def cavity_phase_and_cooperativity(cav: CavityOptics, osc: Oscillator, omega,
                                   power_scale=1.0):
    """Reflection phase e^{i phi_w} and complex cooperativity C_w.

    ``power_scale`` rescales the circulating power (|w_k0|^2 when the sensor
    receives a fraction of a shared laser; 1.0 standalone).  The returned
    pair satisfies C_w = |C_w| e^{i phi_w} identically.
    """
    if np.any(np.asarray(power_scale) < 0):
        raise ConfigError(f"power_scale must be >= 0, got {power_scale}")
    w = np.asarray(omega, dtype=float)
    u = 2.0 * w / cav.kappa
    phase = (1.0 + 1j * u) / (1.0 - 1j * u)           # (kappa/2 + iw)/(kappa/2 - iw)
    g_sq = cav.g0**2 * cav.intracavity_flux
    coop = power_scale * (2.0 * g_sq / (osc.gamma * cav.kappa)) / (1.0 - 1j * u) ** 2
    return _scalarize(phase, omega), _scalarize(coop, omega)


def _half_phase(cav: CavityOptics, omega):
    """e^{i phi_w / 2} = (1 + 2iw/kappa)/|1 + 2iw/kappa| (branch-free)."""
    w = np.asarray(omega, dtype=float)
    z = 1.0 + 2j * w / cav.kappa
    return z / np.abs(z)


def input_quadrature_psds(squeeze: SqueezedInput, theta) -> QuadraturePsds:
    """Quadrature PSDs of a squeezed input at angle theta.

    Syy = (e^{-2r} cos^2 + e^{2r} sin^2)/2, Sxx with the roles swapped,
    Sxy = cos*sin*(e^{2r} - e^{-2r})/2.  Vacuum gives (1/2, 1/2, 0).
    """
    r = squeeze.r
    c, s = math.cos(theta), math.sin(theta)
    em, ep = math.exp(-2.0 * r), math.exp(2.0 * r)
    return QuadraturePsds(
        syy=0.5 * (em * c * c + ep * s * s),
        sxx=0.5 * (ep * c * c + em * s * s),
        sxy=0.5 * c * s * (ep - em),
    )


def thermal_momentum_psd(osc: Oscillator) -> float:
    """Flat mechanical-bath momentum PSD, K_B T / (hbar Omega)."""
    return K_B * osc.temperature / (HBAR * osc.omega0)


# ---------------------------------------------------------------------------
# noise budgets
# ---------------------------------------------------------------------------

def _check_coop(coop_mag):
    if np.any(coop_mag == 0.0):
        raise ConfigError(
            "zero optomechanical cooperativity: no optical readout "
            "(shot noise diverges); check laser power / g0 / weights")


def single_sensor_noise_psd(osc: Oscillator, cav: CavityOptics,
                            inp: QuadraturePsds, omega, *,
                            mech_psd=None, power_scale=1.0):
    """Total force-noise PSD (N^2/Hz) for one sensor read out in phase.

    Sum of shot, back-action, quadrature-correlation and mechanical terms
    plus the detection-loss term; see the module docstring for the formulas.
    ``mech_psd`` overrides the flat thermal default K_B T/(hbar Omega).
    """
    w = np.asarray(omega, dtype=float)
    chi = mechanical_susceptibility(osc, w)
    _, coop = cavity_phase_and_cooperativity(cav, osc, w, power_scale)
    cmag = np.abs(coop)
    _check_coop(cmag)
    if cav.efficiency_sq == 0.0:
        raise ConfigError("detection efficiency eta^2 = 0: nothing reaches the detector")
    if mech_psd is None:
        mech_psd = thermal_momentum_psd(osc)

    m, om, gam = osc.mass, osc.omega0, osc.gamma
    chi_sq = np.abs(chi) ** 2
    shot = HBAR * m * om / (8.0 * gam * cmag * chi_sq) * inp.syy
    back_action = 8.0 * HBAR * m * gam * om * cmag * inp.sxx
    corr = 2.0 * HBAR * m * om * np.real(chi) / chi_sq * inp.sxy
    mech = 4.0 * HBAR * m * gam * om * mech_psd
    loss = ((1.0 - cav.efficiency_sq) / cav.efficiency_sq
            * HBAR * m * om / (16.0 * gam * cmag * chi_sq))
    return _scalarize(shot + back_action + corr + mech + loss, omega)


def squeezed_noise_closed_form(osc: Oscillator, cav: CavityOptics,
                               r, theta, omega, *, power_scale=1.0):
    """Squeezed-input force noise in the e^{-+2r} factorization (N^2/Hz).

    hbar m Omega / (16 gamma |C||chi|^2) * (|cos t - 8 gamma |C| chi sin t|^2 e^{-2r}
    + |sin t + 8 gamma |C| chi cos t|^2 e^{2r}) + 4 m gamma K_B T, plus the
    same detection-loss term as the generic budget.  Must agree with
    single_sensor_noise_psd(input_quadrature_psds(r, theta)) to rounding.
    """
    w = np.asarray(omega, dtype=float)
    chi = mechanical_susceptibility(osc, w)
    _, coop = cavity_phase_and_cooperativity(cav, osc, w, power_scale)
    cmag = np.abs(coop)
    _check_coop(cmag)
    if cav.efficiency_sq == 0.0:
        raise ConfigError("detection efficiency eta^2 = 0: nothing reaches the detector")

    m, om, gam = osc.mass, osc.omega0, osc.gamma
    chi_sq = np.abs(chi) ** 2
    k = 8.0 * gam * cmag * chi
    c, s = np.cos(theta), np.sin(theta)
    scale = HBAR * m * om / (16.0 * gam * cmag * chi_sq)
    optical = scale * (np.abs(c - k * s) ** 2 * math.exp(-2.0 * r)
                       + np.abs(s + k * c) ** 2 * math.exp(2.0 * r))
    thermal = 4.0 * m * gam * K_B * osc.temperature
    loss = (1.0 - cav.efficiency_sq) / cav.efficiency_sq * scale
    return _scalarize(optical + thermal + loss, omega, theta)


def sql_noise_psd(osc: Oscillator, omega):
    """Optical noise floor at the standard quantum limit, hbar m Omega/|chi_w|.

    Thermal noise is not included; callers add it when relevant.
    """
    chi = mechanical_susceptibility(osc, np.asarray(omega, dtype=float))
    return _scalarize(HBAR * osc.mass * osc.omega0 / np.abs(chi), omega)


# ---------------------------------------------------------------------------
# simplified (free-space mirror) model
# ---------------------------------------------------------------------------

def simplified_model_noise_psd(zeta, e0, eta, osc: Oscillator,
                               inp: QuadraturePsds, omega):
    """Force-noise PSD of the single-mirror phase-shift model (N^2/Hz).

    The mirror imprints a phase 2 k q on the reflected beam (zeta = 2 Omega_L/c)
    and each reflected photon kicks the mirror by kappa_p = hbar * zeta.  With
    B(w) = m Omega / (sqrt(2) E0 zeta chi_w) the budget reads

        4 m gamma K_B T + |B|^2 (Syy + (1-eta^2)/(2 eta^2))
        + 2 kappa_p^2 E0^2 Sxx + 2 Re[B'(-w)] Sxy,   B'(w) = sqrt(2) kappa_p E0 B(w).
    """
    if e0 == 0:
        raise ConfigError("zero input field amplitude: shot noise diverges")
    if eta == 0:
        raise ConfigError("detection efficiency eta = 0: nothing reaches the detector")
    w = np.asarray(omega, dtype=float)
    chi = mechanical_susceptibility(osc, w)
    m, om, gam = osc.mass, osc.omega0, osc.gamma
    kappa_p = HBAR * zeta

    b_sq = (m * om) ** 2 / (2.0 * e0**2 * zeta**2 * np.abs(chi) ** 2)
    eta_sq = eta * eta
    shot = b_sq * (inp.syy + (1.0 - eta_sq) / (2.0 * eta_sq))
    back_action = 2.0 * kappa_p**2 * e0**2 * inp.sxx
    # B'(-w) = kappa_p m Omega / (zeta chi*), so Re[B'(-w)] uses Re[chi]/|chi|^2
    corr = 2.0 * kappa_p * m * om / zeta * np.real(chi) / np.abs(chi) ** 2 * inp.sxy
    thermal = 4.0 * m * gam * K_B * osc.temperature
    return _scalarize(thermal + shot + back_action + corr, omega)


def bad_cavity_map(cav: CavityOptics, osc: Oscillator | None = None):
    """Map cavity parameters onto the simplified model's (zeta, E0).

    hbar zeta = (4 g0 / kappa) sqrt(2 hbar m Omega), which equals
    4 Omega_L / (L kappa) for a Fabry-Perot cavity.  Valid for kappa much
    larger than the band of interest; a warning is issued otherwise.
    """
    if osc is not None and cav.kappa < 100.0 * osc.omega0:
        warnings.warn("bad-cavity map requested with kappa < 100*Omega; "
                      "the simplified model may be inaccurate", stacklevel=2)
    if osc is not None and cav.g0 > 0:
        zeta = 4.0 * cav.g0 / cav.kappa * math.sqrt(
            2.0 * osc.mass * osc.omega0 / HBAR)
    elif cav.length is not None:
        zeta = 4.0 * cav.laser_omega / (cav.length * cav.kappa)
    else:
        raise ConfigError("bad_cavity_map needs a cavity length or an oscillator")
    return zeta, math.sqrt(cav.photon_flux)


# ---------------------------------------------------------------------------
# unit helpers
# ---------------------------------------------------------------------------

def acceleration_asd(osc: Oscillator, force_psd):
    """Force PSD (N^2/Hz) -> acceleration amplitude spectral density (m s^-2/rtHz)."""
    return np.sqrt(force_psd) / osc.mass


def displacement_asd(osc: Oscillator, omega, force_psd):
    """Force PSD -> displacement ASD via |chi_w|/(m Omega), in m/rtHz."""
    chi = mechanical_susceptibility(osc, np.asarray(omega, dtype=float))
    out = np.sqrt(force_psd) * np.abs(chi) / (osc.mass * osc.omega0)
    return _scalarize(out, omega)
