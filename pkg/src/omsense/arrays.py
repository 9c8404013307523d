"""Coherent sensor-network algebra for M optomechanical force sensors.

One bright input mode (optionally squeezed) is split over the array by a
passive network whose first column carries the dividing weights w_k0; the
homodyne records are converted to per-sensor force estimates and combined
with weights W_0k.  With hats on the coherent per-sensor amplitudes

    alpha_k = e^{i phi_k/2}/(2 chi_k) sqrt(hbar m_k Omega_k / (2 gamma_k |C'_k|))
    beta_k  = 2 e^{i phi_k/2} sqrt(2 hbar m_k Omega_k gamma_k |C'_k|)

(where C'_k = |w_k0|^2 C_k is the cooperativity at the sensor's share of the
total laser power), the combined force-noise PSD is

    |sum_k alpha_k W_0k w_k0|^2 Syy  +  |sum_k beta_k W_0k w_k0|^2 Sxx
    + 2 Re[conj(sum alpha W w) (sum beta W w)] Sxy
    + sum_k |W_0k|^2 4 m_k gamma_k K_B T_k
    + residual vacuum of the M-1 idle ports
    + detection-loss terms.

The residual vacuum term is the gap between the weighted incoherent optical
noise and the coherent sums; it vanishes identically for identical sensors
with matched weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import HBAR, K_B
from .errors import ConfigError
from .spectra import (CavityOptics, Oscillator, QuadraturePsds, SqueezedInput,
                      cavity_phase_and_cooperativity, _half_phase,
                      mechanical_susceptibility, single_sensor_noise_psd,
                      squeezed_noise_closed_form)

__all__ = [
    "ArraySensor",
    "SensorArray",
    "NoiseBreakdown",
    "SqueezedNoise",
    "NetworkDiagnostics",
    "DqsDcsReport",
    "validate_network",
    "uniform_weights",
    "matched_weights",
    "inverse_variance_weights",
    "identical_array",
    "single_sensor_array",
    "array_signal_psd",
    "array_noise_psd",
    "residual_vacuum_psd",
    "residual_vacuum_forms",
    "array_squeezed_noise",
    "optimal_squeezing_angle",
    "array_sql_psd",
    "incoherent_baseline",
    "dqs_vs_dcs_report",
]

_NORM_TOL = 1e-10


@dataclass(frozen=True)
class ArraySensor:
    """One network node: mechanics, cavity optics and its signal response.

    ``response_factor`` is the sensor's force response per unit common drive
    (the material/geometry factor for a dark-matter drive).
    """

    oscillator: Oscillator
    cavity: CavityOptics
    response_factor: float = 1.0


@dataclass(frozen=True, eq=False)
class SensorArray:
    """M sensors plus dividing weights w, combining weights W and total power.

    The dividing weights must form one column of a unitary (sum |w_k0|^2 = 1);
    per-sensor circulating power scales as |w_k0|^2 of ``total_power``.
    Combining weights are normalized to sum |W_0k|^2 = 1.
    """

    sensors: tuple[ArraySensor, ...]
    dividing_weights: np.ndarray
    combining_weights: np.ndarray
    total_power: float

    def __post_init__(self):
        object.__setattr__(self, "dividing_weights",
                           np.asarray(self.dividing_weights, dtype=complex))
        object.__setattr__(self, "combining_weights",
                           np.asarray(self.combining_weights, dtype=complex))
        m = len(self.sensors)
        if m == 0:
            raise ConfigError("array needs at least one sensor")
        if self.dividing_weights.shape != (m,) or self.combining_weights.shape != (m,):
            raise ConfigError("weight vectors must have one entry per sensor")
        wnorm = float(np.sum(np.abs(self.dividing_weights) ** 2))
        if abs(wnorm - 1.0) > _NORM_TOL:
            raise ConfigError(
                f"dividing weights must satisfy sum |w_k0|^2 = 1, got {wnorm!r}")
        cnorm = float(np.sum(np.abs(self.combining_weights) ** 2))
        if abs(cnorm - 1.0) > 1e-8:
            raise ConfigError(
                f"combining weights must satisfy sum |W_0k|^2 = 1, got {cnorm!r}")
        if self.total_power < 0:
            raise ConfigError("total power must be >= 0")

    @property
    def n_sensors(self) -> int:
        return len(self.sensors)

    def sensor_cavity_at_total_power(self, k: int) -> CavityOptics:
        return replace(self.sensors[k].cavity, input_power=self.total_power)

    def identical_sensors(self) -> bool:
        return all(s == self.sensors[0] for s in self.sensors[1:])


@dataclass(frozen=True)
class NetworkDiagnostics:
    weight_norm: float
    combining_norm: float
    max_weight_phase: float
    matched: bool
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class NoiseBreakdown:
    """Combined force-noise PSD split into its physical contributions (N^2/Hz)."""

    shot: np.ndarray
    back_action: np.ndarray
    correlation: np.ndarray
    thermal: np.ndarray
    residual_vacuum: np.ndarray
    detection_loss: np.ndarray
    total: np.ndarray


@dataclass(frozen=True)
class SqueezedNoise:
    """Squeezed-input array noise in the e^{-2r}/e^{+2r} factorization."""

    squeezed: np.ndarray
    anti_squeezed: np.ndarray
    thermal: np.ndarray
    residual_vacuum: np.ndarray
    detection_loss: np.ndarray
    total: np.ndarray


@dataclass(frozen=True)
class DqsDcsReport:
    """Distributed-squeezer vs independent-squeezer comparison."""

    n_sensors: int
    photon_number: float
    photons_per_sensor_dqs: float
    photons_per_sensor_dcs: float
    max_rel_deviation: float
    dqs_psd: np.ndarray
    dcs_psd: np.ndarray


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

def uniform_weights(m: int) -> np.ndarray:
    return np.full(m, 1.0 / math.sqrt(m), dtype=complex)


def matched_weights(dividing: np.ndarray) -> np.ndarray:
    """Combining weights conjugate to the dividing column (sum W* w = 1)."""
    w = np.asarray(dividing, dtype=complex)
    return np.conj(w) / math.sqrt(float(np.sum(np.abs(w) ** 2)))


def inverse_variance_weights(sensors, dividing, total_power, omega_ref) -> np.ndarray:
    """W_0k proportional to response/noise of each sensor at omega_ref, renormalized.

    Per-sensor noise is the vacuum-input budget at the sensor's share of the
    laser.  Heterogeneous-array heuristic; the matched policy is exact for
    identical sensors.
    """
    w = np.asarray(dividing, dtype=complex)
    weights = np.zeros(len(sensors))
    for k, s in enumerate(sensors):
        share = float(np.abs(w[k]) ** 2)
        if share == 0.0:
            continue
        cav = replace(s.cavity, input_power=total_power)
        noise = single_sensor_noise_psd(s.oscillator, cav, QuadraturePsds.vacuum(),
                                        omega_ref, power_scale=share)
        weights[k] = s.response_factor / noise
    norm = math.sqrt(float(np.sum(weights**2)))
    if norm == 0.0:
        raise ConfigError("inverse-variance weights vanished for every sensor")
    return (weights / norm).astype(complex)


def identical_array(sensor: ArraySensor, m: int, power_per_sensor: float) -> SensorArray:
    """M copies of one sensor, matched uniform weights, power held per sensor."""
    w = uniform_weights(m)
    return SensorArray(sensors=(sensor,) * m, dividing_weights=w,
                       combining_weights=matched_weights(w),
                       total_power=m * power_per_sensor)


def single_sensor_array(osc: Oscillator, cav: CavityOptics,
                        response_factor: float = 1.0) -> SensorArray:
    sensor = ArraySensor(oscillator=osc, cavity=cav, response_factor=response_factor)
    return SensorArray(sensors=(sensor,), dividing_weights=np.ones(1, complex),
                       combining_weights=np.ones(1, complex),
                       total_power=cav.input_power)


def validate_network(arr: SensorArray) -> NetworkDiagnostics:
    """Check weight normalization/phases and report the combining condition."""
    w = arr.dividing_weights
    cw = arr.combining_weights
    warnings_: list[str] = []
    max_phase = float(np.max(np.abs(np.angle(np.where(w == 0, 1.0, w)))))
    if max_phase > 1e-12:
        warnings_.append(
            "dividing weights carry nonzero phases; per-sensor quadrature bases "
            "are not aligned (arg w_k0 = 0 is assumed by the closed forms)")
    matched = bool(np.allclose(cw, matched_weights(w), rtol=0.0, atol=1e-12))
    return NetworkDiagnostics(
        weight_norm=float(np.sum(np.abs(w) ** 2)),
        combining_norm=float(np.sum(np.abs(cw) ** 2)),
        max_weight_phase=max_phase,
        matched=matched,
        warnings=tuple(warnings_),
    )


# ---------------------------------------------------------------------------
# per-sensor coherent amplitudes
# ---------------------------------------------------------------------------

class _Terms:
    """Per-sensor coherent amplitudes on the active (W != 0) sensors."""

    __slots__ = ("active", "alpha", "beta", "ww", "wabs2", "thermal",
                 "loss_weight")

    def __init__(self, arr: SensorArray, omega):
        w = np.atleast_1d(np.asarray(omega, dtype=float))
        cw = arr.combining_weights
        dv = arr.dividing_weights
        active = np.flatnonzero(np.abs(cw) > 0.0)
        if active.size == 0:
            raise ConfigError("all combining weights vanish")
        shares = np.abs(dv[active]) ** 2
        if np.any(shares == 0.0):
            raise ConfigError("sensor with zero optical share but nonzero "
                              "combining weight: shot noise diverges")

        n = active.size
        alpha = np.empty((n, w.size), dtype=complex)
        beta = np.empty((n, w.size), dtype=complex)
        thermal = np.zeros(n)
        loss_weight = np.zeros(n)
        for i, k in enumerate(active):
            s = arr.sensors[k]
            osc = s.oscillator
            cav = arr.sensor_cavity_at_total_power(k)
            chi_k = mechanical_susceptibility(osc, w)
            _, coop = cavity_phase_and_cooperativity(cav, osc, w, float(shares[i]))
            cmag = np.abs(coop)
            if np.any(cmag == 0.0):
                raise ConfigError("zero cooperativity on an actively combined sensor")
            half = _half_phase(cav, w)
            hmo = HBAR * osc.mass * osc.omega0
            alpha[i] = half / (2.0 * chi_k) * np.sqrt(hmo / (2.0 * osc.gamma * cmag))
            beta[i] = 2.0 * half * np.sqrt(2.0 * hmo * osc.gamma * cmag)
            thermal[i] = 4.0 * osc.mass * osc.gamma * K_B * osc.temperature
            eta_sq = cav.efficiency_sq
            if eta_sq == 0.0:
                raise ConfigError("detection efficiency eta^2 = 0 on an active sensor")
            loss_weight[i] = (1.0 - eta_sq) / eta_sq

        self.active = active
        self.alpha = alpha
        self.beta = beta
        self.ww = (cw[active] * dv[active])[:, None]
        self.wabs2 = (np.abs(cw[active]) ** 2)[:, None]
        self.thermal = thermal[:, None]
        self.loss_weight = loss_weight[:, None]

    def coherent_sums(self):
        a = np.sum(self.alpha * self.ww, axis=0)
        b = np.sum(self.beta * self.ww, axis=0)
        return a, b

    def thermal_psd(self):
        flat = np.sum(self.wabs2 * self.thermal, axis=0)
        return np.broadcast_to(flat, self.alpha.shape[1:]).copy()

    def residual_expanded(self):
        diag = np.sum(self.wabs2 * (np.abs(self.alpha) ** 2
                                    + np.abs(self.beta) ** 2), axis=0)
        a, b = self.coherent_sums()
        return 0.5 * (diag - np.abs(a) ** 2 - np.abs(b) ** 2)

    def detection_loss_psd(self):
        return np.sum(self.wabs2 * self.loss_weight * 0.5 * np.abs(self.alpha) ** 2,
                      axis=0)


def _shape_like(arrs, omega):
    if np.ndim(omega) == 0:
        return tuple(float(np.real(a[0])) for a in arrs)
    return tuple(np.real(a) for a in arrs)


# ---------------------------------------------------------------------------
# signal and noise
# ---------------------------------------------------------------------------

def array_signal_psd(arr: SensorArray, drive_amplitude):
    """Signal PSD of the combined estimator, |sum_n W_0n M_n|^2 f^2 (N^2/Hz)."""
    resp = np.array([s.response_factor for s in arr.sensors])
    gain = np.abs(np.sum(arr.combining_weights * resp)) ** 2
    return gain * np.asarray(drive_amplitude) ** 2


def array_noise_psd(arr: SensorArray, inp: QuadraturePsds, omega) -> NoiseBreakdown:
    """Combined force-noise PSD for arbitrary mode-0 quadrature statistics."""
    t = _Terms(arr, omega)
    a, b = t.coherent_sums()
    shot = np.abs(a) ** 2 * inp.syy
    back_action = np.abs(b) ** 2 * inp.sxx
    correlation = 2.0 * np.real(np.conj(a) * b) * inp.sxy
    thermal = t.thermal_psd()
    residual = t.residual_expanded()
    loss = t.detection_loss_psd()
    total = shot + back_action + correlation + thermal + residual + loss
    parts = _shape_like((shot, back_action, correlation, thermal, residual,
                         loss, total), omega)
    return NoiseBreakdown(*parts)


def residual_vacuum_psd(arr: SensorArray, omega):
    """Residual vacuum noise of the M-1 idle ports (expanded form)."""
    t = _Terms(arr, omega)
    res = t.residual_expanded()
    return float(res[0]) if np.ndim(omega) == 0 else res


def residual_vacuum_forms(arr: SensorArray, omega):
    """Both residual forms: (expanded, Delta_jk double sum).

    The two must agree; a disagreement signals an assembly bug, which is why
    the second path sums Delta_jk = e^{i(phi_k-phi_j)/2} sqrt(hbar^2 m m' O O')
    (delta_jk - w*_j0 w_k0) W*_0j W_0k explicitly instead of expanding it.
    """
    t = _Terms(arr, omega)
    expanded = t.residual_expanded()

    dv = arr.dividing_weights[t.active]
    cw = arr.combining_weights[t.active]
    # alpha/beta carry e^{i phi/2} sqrt(hbar m Omega) and the chi / coop factors,
    # so Delta_jk * (shot + BA kernels) == (delta - w*_j w_k) W*_j W_k *
    # (alpha*_j alpha_k + beta*_j beta_k) / 2.
    proj = np.eye(len(dv), dtype=complex) - np.outer(np.conj(dv), dv)
    wmat = np.outer(np.conj(cw), cw)
    kernel = (np.einsum("jw,kw->jkw", np.conj(t.alpha), t.alpha)
              + np.einsum("jw,kw->jkw", np.conj(t.beta), t.beta))
    delta_sum = 0.5 * np.einsum("jk,jkw->w", proj * wmat, kernel)
    if np.max(np.abs(np.imag(delta_sum))) > 1e-6 * (np.max(np.abs(delta_sum)) + 1e-300):
        raise ConfigError("residual Delta-sum produced a non-real value")
    delta_sum = np.real(delta_sum)
    if np.ndim(omega) == 0:
        return float(expanded[0]), float(delta_sum[0])
    return expanded, delta_sum


def array_squeezed_noise(arr: SensorArray, r, theta, omega) -> SqueezedNoise:
    """Array noise for a squeezed mode-0 input, e^{-+2r} factorization.

    The squeezed/anti-squeezed coefficients are |A cos t - B sin t|^2 / 2 and
    |A sin t + B cos t|^2 / 2 built from the coherent sums A, B; the total
    must match array_noise_psd with input_quadrature_psds(r, theta).
    """
    if r < 0:
        raise ConfigError(f"squeezing strength must be >= 0, got {r}")
    t = _Terms(arr, omega)
    a, b = t.coherent_sums()
    th = np.asarray(theta, dtype=float)
    c, s = np.cos(th), np.sin(th)
    squeezed = 0.5 * np.abs(a * c - b * s) ** 2 * math.exp(-2.0 * r)
    anti = 0.5 * np.abs(a * s + b * c) ** 2 * math.exp(2.0 * r)
    thermal = t.thermal_psd()
    residual = t.residual_expanded()
    loss = t.detection_loss_psd()
    total = squeezed + anti + thermal + residual + loss
    parts = _shape_like((squeezed, anti, thermal, residual, loss, total), omega)
    return SqueezedNoise(*parts)


def optimal_squeezing_angle(arr: SensorArray, omega):
    """Squeezing angle minimizing the anti-squeezed (e^{+2r}) coefficient.

    The minimized quantity is |A sin t + B cos t|^2 with A, B the coherent
    shot/back-action sums; the exact minimizer is
    t* = atan2(-2 Re[A conj(B)], |A|^2 - |B|^2) / 2 in (-pi/2, pi/2], which
    reduces to tan t* = -8 gamma |C| chi for a single high-Q sensor below
    resonance.  On resonance (A perpendicular to B, |B| > |A|) this returns
    -pi/2; far above resonance it tends to 0 through positive angles.
    """
    t = _Terms(arr, omega)
    a, b = t.coherent_sums()
    q = np.abs(b) ** 2 - np.abs(a) ** 2
    rr = 2.0 * np.real(a * np.conj(b))
    theta = 0.5 * np.arctan2(-rr, -q)
    # +pi/2 and -pi/2 label the same squeezed state; use the negative branch.
    theta = np.where(theta > math.pi / 2 - 1e-15, -math.pi / 2, theta)
    return float(theta[0]) if np.ndim(omega) == 0 else theta


def array_sql_psd(arr: SensorArray, omega):
    """Weighted-average standard quantum limit, sum_k |W_0k|^2 hbar m_k O_k/|chi_k|."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.zeros(w.size)
    for k, s in enumerate(arr.sensors):
        wk = float(np.abs(arr.combining_weights[k]) ** 2)
        if wk == 0.0:
            continue
        chi = mechanical_susceptibility(s.oscillator, w)
        out += wk * HBAR * s.oscillator.mass * s.oscillator.omega0 / np.abs(chi)
    return float(out[0]) if np.ndim(omega) == 0 else out


def incoherent_baseline(per_sensor_snrs) -> float:
    """Power-level combination of independent sensors: effective SNR^2 = sum SNR_k^2."""
    snrs = np.asarray(per_sensor_snrs, dtype=float)
    if np.any(snrs < 0):
        raise ConfigError("SNRs must be >= 0")
    return float(np.sum(snrs**2))


def dqs_vs_dcs_report(arr: SensorArray, n_photons: float, omega,
                      rel_tol: float = 1e-10) -> DqsDcsReport:
    """Compare one distributed squeezer (N_s photons over M sensors) against
    M independent squeezers (N_s photons each) at equal total laser power.

    The two schemes must produce equal noise PSDs for identical sensors; the
    report records the squeezed-photon cost per sensor of each scheme.
    """
    if not arr.identical_sensors():
        raise ConfigError("the DQS/DCS equivalence is stated for identical sensors")
    m = arr.n_sensors
    squeeze = SqueezedInput.from_photon_number(n_photons)
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    theta = optimal_squeezing_angle(arr, w)

    dqs = array_squeezed_noise(arr, squeeze.r, theta, w).total

    sensor = arr.sensors[0]
    per_sensor_power = arr.total_power / m
    cav = replace(sensor.cavity, input_power=per_sensor_power)
    weights = np.abs(arr.combining_weights) ** 2
    dcs = np.zeros(w.size)
    for k in range(m):
        if weights[k] == 0.0:
            continue
        dcs += weights[k] * np.asarray(
            squeezed_noise_closed_form(sensor.oscillator, cav, squeeze.r, theta, w))

    dev = float(np.max(np.abs(dqs - dcs) / np.abs(dcs)))
    if dev > rel_tol:
        raise ConfigError(
            f"DQS and DCS noise disagree by {dev:.3e} (> {rel_tol:.1e}); "
            "the configurations are not equivalent")
    return DqsDcsReport(n_sensors=m, photon_number=n_photons,
                        photons_per_sensor_dqs=n_photons / m,
                        photons_per_sensor_dcs=n_photons,
                        max_rel_deviation=dev, dqs_psd=dqs, dcs_psd=dcs)
