import math
from typing import Tuple

import numpy as np
from scipy.signal import lfilter

from qkdhydro.common.exception import DegenerateChannelError, DomainError
from qkdhydro.schema.channel import DetectorModel, EnvironmentProfile, FiberLink, NoiseSource

DEFAULT_ATTENUATION = 0.2
DEFAULT_COUPLING = 0.05


def _check_probability(name: str, value) -> None:
    values = np.asarray(value, dtype=np.float64)
    if np.any(np.isnan(values)) or np.any((values < 0) | (values > 1)):
        raise DomainError(f"{name} must lie in [0, 1], got {value}", field=name)


def _as_result(value):
    return float(value) if np.ndim(value) == 0 else value


# 1. Loss
def total_loss_db(link: FiberLink) -> float:
    return link.attenuation_db_per_km * link.length_km


def channel_transmittance(length_km, attenuation_db_per_km: float = DEFAULT_ATTENUATION):
    length = np.asarray(length_km, dtype=np.float64)
    if np.any(length < 0):
        raise DomainError(f"Fiber length must be >= 0 km, got {length_km}", field="length_km")
    return _as_result(np.power(10.0, -attenuation_db_per_km * length / 10.0))


def link_transmittance(link: FiberLink) -> float:
    return channel_transmittance(link.length_km, link.attenuation_db_per_km)


# 2. Detection and errors
def detection_rate(intensity_k, eta, det: DetectorModel):
    k = np.asarray(intensity_k, dtype=np.float64)
    if np.any(k < 0):
        raise DomainError(f"Mean photon number must be >= 0, got {intensity_k}", field="intensity_k")
    _check_probability("eta", eta)
    rate = 1.0 - (1.0 - 2.0 * det.dark_count_probability) * np.exp(-np.asarray(eta) * k)
    return _as_result(np.clip(rate, 0.0, 1.0))


def error_model(intensity_k, eta_ch, det: DetectorModel, e_mis):
    """e_k = p_dc + e_mis (1 - exp(-eta k)) + p_ap D_k / 2.

    ``eta_ch`` is the transmittance the photons actually see; callers that model
    a lossy detector pass ``eta_ch * eta_det`` here as well as to
    ``detection_rate``.
    """
    _check_probability("e_mis", e_mis)
    d_k = detection_rate(intensity_k, eta_ch, det)
    k = np.asarray(intensity_k, dtype=np.float64)
    e_k = (
        det.dark_count_probability
        + np.asarray(e_mis) * (1.0 - np.exp(-np.asarray(eta_ch) * k))
        + det.after_pulse_probability * np.asarray(d_k) / 2.0
    )
    return _as_result(e_k)


def intensity_qber(e_k, d_k):
    """Per-intensity QBER min(e_k / D_k, 0.5)."""
    e = np.asarray(e_k, dtype=np.float64)
    d = np.asarray(d_k, dtype=np.float64)
    if np.any((d == 0) & (e > 0)):
        raise DegenerateChannelError(e_k=e_k, d_k=d_k)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(d > 0, e / d, 0.0)
    return _as_result(np.minimum(ratio, 0.5))


# 3. Environment
def default_profile() -> EnvironmentProfile:
    return EnvironmentProfile(
        baseline_misalignment_rad=0.0,
        sources=[
            NoiseSource(name="turbine", frequency_hz=10.0, amplitude_mm=1.0, coupling_rad_per_mm=DEFAULT_COUPLING),
            NoiseSource(name="generator", frequency_hz=60.0, amplitude_mm=1.0, coupling_rad_per_mm=DEFAULT_COUPLING),
        ],
    )


def frozen_profile(theta: float) -> EnvironmentProfile:
    return EnvironmentProfile(baseline_misalignment_rad=theta, sources=[])


def misalignment_series(profile: EnvironmentProfile, times: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    t = np.asarray(times, dtype=np.float64)
    if np.any(t < 0):
        raise DomainError("Time must be >= 0", field="t")
    theta = np.full(t.shape, profile.baseline_misalignment_rad, dtype=np.float64)
    for source in profile.sources:
        theta += (
            source.coupling_rad_per_mm
            * source.amplitude_mm
            * np.sin(2.0 * math.pi * source.frequency_hz * t + source.phase_rad)
        )
    e_mis = np.clip(np.sin(theta) ** 2, 0.0, 1.0)
    return theta, e_mis


def misalignment_at(profile: EnvironmentProfile, t: float) -> Tuple[float, float]:
    theta, e_mis = misalignment_series(profile, np.asarray(t))
    return float(theta), float(e_mis)


MEAN_WINDOW = 1 << 20


def mean_misalignment(profile: EnvironmentProfile, pulse_rate: float, pulses: float, gain: float = 0.0) -> float:
    """Average e_mis seen by the first ``pulses`` pulses (at most MEAN_WINDOW of them).

    With ``gain > 0`` the compensator runs at pulse cadence, as in the pulse-level
    simulation.
    """
    samples = int(min(max(pulses, 1), MEAN_WINDOW))
    times = np.arange(samples, dtype=np.float64) / pulse_rate
    if gain > 0:
        theta, _ = stabilize_series(profile, gain, times)
        return float(np.mean(np.clip(np.sin(theta) ** 2, 0.0, 1.0)))
    return float(misalignment_series(profile, times)[1].mean())


# 4. Feedback stabilisation
def _check_gain(gain: float) -> None:
    if not 0.0 <= gain <= 1.0:
        raise DomainError(f"Stabilization gain must lie in [0, 1], got {gain}", field="gain")


def stabilize(profile: EnvironmentProfile, gain: float, t: float, state: float) -> Tuple[float, float]:
    """One compensator step.

    The correction uses the compensator angle held before this observation; the
    angle then moves toward the observed theta by ``gain``.
    """
    _check_gain(gain)
    raw, _ = misalignment_at(profile, t)
    corrected = raw - state
    return corrected, state + gain * (raw - state)


def stabilize_series(
    profile: EnvironmentProfile,
    gain: float,
    times: np.ndarray,
    state: float = 0.0,
) -> Tuple[np.ndarray, float]:
    """Vectorised ``stabilize`` over a time grid: s[n+1] = (1-g) s[n] + g raw[n]."""
    _check_gain(gain)
    raw, _ = misalignment_series(profile, times)
    if raw.size == 0:
        return raw, state
    updated, _ = lfilter([gain], [1.0, -(1.0 - gain)], raw, zi=[(1.0 - gain) * state])
    held = np.concatenate([[state], updated[:-1]])
    return raw - held, float(updated[-1])


class Stabilizer:
    def __init__(self, gain: float, state: float = 0.0):
        _check_gain(gain)
        self.gain = gain
        self.state = state

    def step(self, profile: EnvironmentProfile, t: float) -> float:
        corrected, self.state = stabilize(profile, self.gain, t, self.state)
        return corrected

    def series(self, profile: EnvironmentProfile, times: np.ndarray) -> np.ndarray:
        corrected, self.state = stabilize_series(profile, self.gain, times, self.state)
        return corrected


def rms(values) -> float:
    values = np.asarray(values, dtype=np.float64)
    return float(np.sqrt(np.mean(values**2))) if values.size else 0.0
