import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from loguru import logger

from qkdhydro.common.exception import DomainError, EstimationError
from qkdhydro.core.config import settings
from qkdhydro.schema import (
    CurveRow,
    DecoyEstimate,
    EnvironmentProfile,
    EstimateMode,
    Scenario,
    SecurityParams,
    SimulationConfig,
    SweepEngine,
    SweepMode,
    SweepSettings,
    TallyTable,
)
from qkdhydro.service.bitops import binary_entropy
from qkdhydro.service.channel import (
    channel_transmittance,
    detection_rate,
    frozen_profile,
    mean_misalignment,
)
from qkdhydro.service.montecarlo import expected_tally, monteCarloService
from qkdhydro.service.postproc import leak_accounting

CURVE_HEADERS = {
    "distance": ("distance_km", "loss_db", "transmittance", "qber", "key_length_bits", "skr_bps"),
    "misalignment": ("theta_rad", "loss_db", "transmittance", "qber", "key_length_bits", "skr_bps"),
}


# 1. Decoy estimation
def oracle_estimate(tally: TallyTable) -> DecoyEstimate:
    """Ground truth from the photon-number buckets."""
    if not tally.has_oracle:
        raise EstimationError("Tally carries no photon-number breakdown")
    s0 = float(tally.oracle_detected[:, 0].sum())
    s1 = float(tally.oracle_detected[:, 1].sum())
    e1 = float(tally.oracle_errors[:, 1].sum())
    phi = min(e1 / s1, 0.5) if s1 > 0 else 0.0
    return DecoyEstimate(s_x0=s0, s_x1=s1, phi_x=phi, mode=EstimateMode.ORACLE)


def _hoeffding(total: float, epsilon_sec: float) -> float:
    return math.sqrt(total / 2.0 * math.log(21.0 / epsilon_sec))


def decoy_estimate(tally: TallyTable, config: SimulationConfig, params: SecurityParams) -> DecoyEstimate:
    """Two-decoy finite-sample bounds on (s_x0, s_x1, phi_x).

    Each per-intensity count is widened by a Hoeffding term before the vacuum
    and single-photon bounds are formed; lower bounds are clamped at zero.
    """
    mu, nu1, nu2 = config.intensities
    if not (mu > nu1 + nu2 and nu1 > nu2 >= 0):
        raise EstimationError(
            f"Decoy bounds need mu > nu1 + nu2 and nu1 > nu2 >= 0, got ({mu}, {nu1}, {nu2})",
            intensities=[mu, nu1, nu2],
        )
    probs = config.probabilities
    if np.any(tally.sent <= 0) or np.any(probs <= 0):
        raise EstimationError("Every intensity class needs pulses sent", sent=tally.sent.tolist())
    k = config.intensities
    weight = np.exp(k) / probs

    n = tally.detected_sifted.astype(np.float64)
    m = tally.errors_sifted.astype(np.float64)
    delta_n = _hoeffding(n.sum(), params.epsilon_sec)
    delta_m = _hoeffding(m.sum(), params.epsilon_sec)
    n_lo, n_hi = np.maximum(weight * (n - delta_n), 0.0), weight * (n + delta_n)
    m_lo, m_hi = np.maximum(weight * (m - delta_m), 0.0), weight * (m + delta_m)

    tau0 = float(np.sum(probs * np.exp(-k)))
    tau1 = float(np.sum(probs * np.exp(-k) * k))

    s0 = max(0.0, tau0 * (nu1 * n_lo[2] - nu2 * n_hi[1]) / (nu1 - nu2))
    denominator = mu * (nu1 - nu2) - nu1**2 + nu2**2
    s1 = mu * tau1 * (n_lo[1] - n_hi[2] - (nu1**2 - nu2**2) / mu**2 * (n_hi[0] - s0 / tau0)) / denominator
    s1 = max(0.0, s1)
    v1 = max(0.0, tau1 * (m_hi[1] - m_lo[2]) / (nu1 - nu2))
    phi = min(v1 / s1, 0.5) if s1 > 0 else 0.5
    logger.debug(json.dumps({"event": "decoy_bounds", "s_x0": s0, "s_x1": s1, "phi_x": phi}))
    return DecoyEstimate(s_x0=s0, s_x1=s1, phi_x=phi, mode=EstimateMode.BOUNDED)


# 2. Key length
def key_length(est: DecoyEstimate, leak_ec: float, params: SecurityParams) -> int:
    """l = floor(s0 + s1 - s1 h(phi) - leak - 6 log2(21/eps_sec) - log2(2/eps_cor)), at least 0."""
    value = (
        est.s_x0
        + est.s_x1
        - est.s_x1 * binary_entropy(est.phi_x)
        - leak_ec
        - 6.0 * math.log2(21.0 / params.epsilon_sec)
        - math.log2(2.0 / params.epsilon_cor)
    )
    return max(0, math.floor(value))


def secret_key_rate(length_bits: float, elapsed_time: float) -> float:
    if elapsed_time <= 0:
        raise DomainError(f"Elapsed time must be > 0 s, got {elapsed_time}", elapsed_time=elapsed_time)
    return length_bits / elapsed_time


# 3. Sweeps
def pulses_for_block(config: SimulationConfig, eta: float, det, block_size: float) -> float:
    """Pulses needed for an expected sifted block of ``block_size`` bits."""
    per_pulse = float(np.sum(config.probabilities * detection_rate(config.intensities, eta, det)))
    rate = config.sifting_probability * per_pulse
    if rate <= 0:
        return math.inf
    return block_size / rate


@dataclass(frozen=True)
class _RowPlan:
    kind: str
    x: float
    scenario: Scenario
    profile: EnvironmentProfile
    gain: float
    seed: int


def _evaluate(plan: _RowPlan, sweep: SweepSettings) -> CurveRow:
    scenario = plan.scenario
    config, link, det = scenario.simulation, scenario.link, scenario.detector
    transmittance = channel_transmittance(link.length_km, link.attenuation_db_per_km)
    eta = transmittance * det.efficiency
    if sweep.mode == SweepMode.TIME:
        pulses = config.pulse_rate * sweep.collection_time_s
    else:
        pulses = pulses_for_block(config, eta, det, sweep.block_size)
    elapsed = pulses / config.pulse_rate
    row = {
        "kind": plan.kind,
        "x": plan.x,
        "loss_db": link.attenuation_db_per_km * link.length_km,
        "transmittance": transmittance,
        "collection_time_s": elapsed if math.isfinite(elapsed) else None,
    }
    capped = sweep.mode == SweepMode.BLOCK and sweep.max_collection_time_s > 0
    too_slow = capped and elapsed > sweep.max_collection_time_s
    if not math.isfinite(pulses) or too_slow:
        return CurveRow(**row, qber=0.5, key_length_bits=0, skr_bps=0.0)

    if sweep.engine == SweepEngine.ANALYTIC:
        e_mis = mean_misalignment(plan.profile, config.pulse_rate, pulses, plan.gain)
        tally = expected_tally(config, link, det, e_mis, pulses)
    else:
        run_config = config.model_copy(update={"pulse_count": int(round(pulses)), "seed": plan.seed})
        tally = monteCarloService.run(run_config, link, det, plan.profile, plan.gain)
    qber = tally.qber
    leak = leak_accounting(tally.total_sifted, min(qber, 0.5), scenario.postproc.ec_efficiency)
    try:
        est = decoy_estimate(tally, config, scenario.security)
        length = key_length(est, leak, scenario.security)
    except EstimationError:
        length = 0
    return CurveRow(**row, qber=qber, key_length_bits=length, skr_bps=secret_key_rate(length, elapsed))


def _row_seeds(seed: int, count: int) -> List[int]:
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(count)]


def _run(plans: List[_RowPlan], sweep: SweepSettings) -> List[CurveRow]:
    if sweep.engine == SweepEngine.MONTECARLO and settings.SWEEP_WORKERS > 1:
        with ThreadPoolExecutor(max_workers=settings.SWEEP_WORKERS) as pool:
            return list(pool.map(lambda plan: _evaluate(plan, sweep), plans))
    return [_evaluate(plan, sweep) for plan in plans]


def sweep_distance(
    scenario: Scenario, distances: Sequence[float], sweep: SweepSettings | None = None
) -> List[CurveRow]:
    """One row per fiber length, every other parameter held at the scenario value."""
    if not distances:
        raise DomainError("Distance grid is empty")
    sweep = sweep or scenario.sweep
    seeds = _row_seeds(scenario.simulation.seed, len(distances))
    plans = []
    for distance, seed in zip(distances, seeds):
        if distance < 0:
            raise DomainError(f"Fiber length must be >= 0 km, got {distance}", field="length_km")
        row_scenario = scenario.with_updates(link={"length_km": float(distance)})
        gain = scenario.stabilization_gain
        plans.append(_RowPlan("distance", float(distance), row_scenario, scenario.profile, gain, seed))
    return _run(plans, sweep)


def sweep_misalignment(
    scenario: Scenario, thetas: Sequence[float], sweep: SweepSettings | None = None
) -> List[CurveRow]:
    """One row per misalignment angle, environment frozen at that angle."""
    if not thetas:
        raise DomainError("Misalignment grid is empty")
    sweep = sweep or scenario.sweep
    seeds = _row_seeds(scenario.simulation.seed, len(thetas))
    plans = []
    for theta, seed in zip(thetas, seeds):
        if not 0.0 <= theta <= math.pi / 2:
            raise DomainError(f"Misalignment must lie in [0, pi/2] rad, got {theta}", field="theta_rad")
        plans.append(_RowPlan("misalignment", float(theta), scenario, frozen_profile(theta), 0.0, seed))
    return _run(plans, sweep)


def curve_records(rows: Sequence[CurveRow]) -> List[dict]:
    records = []
    for row in rows:
        first = CURVE_HEADERS[row.kind][0]
        records.append({first: row.x, **row.model_dump(exclude={"kind", "x", "collection_time_s"})})
    return records


__all__ = [
    "oracle_estimate",
    "decoy_estimate",
    "key_length",
    "secret_key_rate",
    "pulses_for_block",
    "sweep_distance",
    "sweep_misalignment",
    "curve_records",
    "CURVE_HEADERS",
]
