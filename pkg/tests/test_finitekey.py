import math

import numpy as np
import pytest

from qkdhydro.common.exception import DomainError, EstimationError
from qkdhydro.schema import (
    DecoyEstimate,
    DetectorModel,
    EstimateMode,
    FiberLink,
    Scenario,
    SecurityParams,
    SimulationConfig,
    TallyTable,
)
from qkdhydro.service.finitekey import (
    CURVE_HEADERS,
    curve_records,
    decoy_estimate,
    key_length,
    oracle_estimate,
    pulses_for_block,
    secret_key_rate,
    sweep_distance,
    sweep_misalignment,
)
from qkdhydro.service.montecarlo import expected_tally, monteCarloService
from qkdhydro.service.postproc import leak_accounting

DERIVED_PARAMS = SecurityParams(epsilon_sec=21 * 2**-10, epsilon_cor=2 * 2**-10)
DISTANCES = [1, 10, 25, 50, 75, 100]
ANGLES = [math.radians(d) for d in (0, 5, 10, 15, 20, 25)]


def _estimate(s0=0.0, s1=1000.0, phi=0.0) -> DecoyEstimate:
    return DecoyEstimate(s_x0=s0, s_x1=s1, phi_x=phi, mode=EstimateMode.ORACLE)


def test_key_length_derived_case():
    assert key_length(_estimate(), 0, DERIVED_PARAMS) == 930


def test_key_length_never_negative():
    assert key_length(_estimate(s1=10.0), 10_000, SecurityParams()) == 0


def test_key_length_monotonicity(rng):
    params = SecurityParams()
    for _ in range(10):
        s0, s1 = rng.uniform(0, 1e4, size=2)
        phi, leak = rng.uniform(0, 0.5), rng.uniform(0, 5e3)
        base = key_length(_estimate(s0, s1, phi), leak, params)
        assert key_length(_estimate(s0, s1 + rng.uniform(1, 1e3), phi), leak, params) >= base
        assert key_length(_estimate(s0 + rng.uniform(1, 1e3), s1, phi), leak, params) >= base
        assert key_length(_estimate(s0, s1, phi), leak + rng.uniform(1, 1e3), params) <= base
        assert key_length(_estimate(s0, s1, min(0.5, phi + rng.uniform(0.01, 0.2))), leak, params) <= base
        looser = SecurityParams(epsilon_sec=params.epsilon_sec * 10, epsilon_cor=params.epsilon_cor * 10)
        assert key_length(_estimate(s0, s1, phi), leak, looser) >= base


def test_secret_key_rate():
    assert secret_key_rate(1e5, 4) == 25_000
    with pytest.raises(DomainError):
        secret_key_rate(1e5, 0)


def test_decoy_estimate_needs_separated_intensities():
    config = SimulationConfig(mu_signal=0.5, mu_decoy=0.4, mu_vacuum=0.2)
    tally = expected_tally(config, FiberLink(), DetectorModel(), 0.0)
    with pytest.raises(EstimationError):
        decoy_estimate(tally, config, SecurityParams())


def test_decoy_estimate_needs_every_class():
    config = SimulationConfig(p_signal=0.8, p_decoy=0.2, p_vacuum=0.0)
    tally = expected_tally(config, FiberLink(), DetectorModel(), 0.0)
    with pytest.raises(EstimationError):
        decoy_estimate(tally, config, SecurityParams())


def test_oracle_estimate_needs_buckets():
    tally = TallyTable.empty(oracle=False)
    with pytest.raises(EstimationError):
        oracle_estimate(tally)


def test_bounded_single_photon_estimate_is_tight_on_quiet_link():
    config = SimulationConfig(pulse_count=10_000_000, p_signal=0.5, p_decoy=0.3, p_vacuum=0.2)
    link, det = FiberLink(length_km=1.0), DetectorModel(efficiency=0.5, dark_count_probability=0.0)
    tally = monteCarloService.run(config, link, det, Scenario().profile)
    bounded = decoy_estimate(tally, config, SecurityParams())
    oracle = oracle_estimate(tally)
    assert 0.75 * oracle.s_x1 <= bounded.s_x1 <= oracle.s_x1
    assert bounded.phi_x < 0.01


def test_decoy_bounds_are_sound_under_vibration():
    config = SimulationConfig(pulse_count=100_000, p_signal=0.5, p_decoy=0.3, p_vacuum=0.2)
    link, det = FiberLink(length_km=1.0), DetectorModel(efficiency=0.5)
    vibrating = Scenario.reference().profile
    params = SecurityParams()
    for seed in range(100):
        tally = monteCarloService.run(config.model_copy(update={"seed": seed}), link, det, vibrating)
        leak = leak_accounting(tally.total_sifted, min(tally.qber, 0.5))
        bounded, oracle = decoy_estimate(tally, config, params), oracle_estimate(tally)
        assert bounded.s_x1 <= oracle.s_x1
        assert key_length(bounded, leak, params) <= key_length(oracle, leak, params)


def test_pulses_for_block(detector):
    config = SimulationConfig()
    eta = 0.1
    pulses = pulses_for_block(config, eta, detector, 1e6)
    tally = expected_tally(config, FiberLink(length_km=0), DetectorModel(efficiency=eta), 0.0, pulses)
    assert tally.total_sifted == pytest.approx(1e6, rel=1e-9)


def test_distance_sweep_shape():
    rows = sweep_distance(Scenario.reference(), DISTANCES)
    assert [row.x for row in rows] == DISTANCES
    rates = [row.skr_bps for row in rows]
    assert all(a >= b for a, b in zip(rates, rates[1:]))
    assert rates[0] > 0
    assert any(row.key_length_bits == 0 for row in rows)


def test_misalignment_sweep_is_nonincreasing():
    rows = sweep_misalignment(Scenario.reference(), ANGLES)
    rates = [row.skr_bps for row in rows]
    assert all(a >= b for a, b in zip(rates, rates[1:]))
    qbers = [row.qber for row in rows]
    assert qbers == sorted(qbers)


def _last_positive(rows) -> int:
    positive = [i for i, row in enumerate(rows) if row.key_length_bits > 0]
    return positive[-1] if positive else -1


def test_larger_block_tolerates_more_misalignment():
    scenario = Scenario.reference().with_updates(sweep={"mode": "block"})
    small = sweep_misalignment(scenario.with_updates(sweep={"block_size": 100_000}), ANGLES)
    large = sweep_misalignment(scenario.with_updates(sweep={"block_size": 1_000_000}), ANGLES)
    assert _last_positive(large) > _last_positive(small)
    assert _last_positive(large) >= 0


def test_block_mode_cap_zeroes_slow_rows():
    scenario = Scenario.reference().with_updates(
        sweep={"mode": "block", "block_size": 1_000_000, "max_collection_time_s": 60}
    )
    rows = sweep_distance(scenario, [1, 100])
    assert rows[0].key_length_bits > 0
    assert rows[1].key_length_bits == 0
    assert rows[1].skr_bps == 0


def test_montecarlo_sweep_is_deterministic():
    scenario = Scenario.reference().with_updates(
        sweep={"engine": "montecarlo", "collection_time_s": 0.02},
    )
    first = sweep_distance(scenario, [1, 25])
    second = sweep_distance(scenario, [1, 25])
    assert first == second
    assert first[0].collection_time_s == pytest.approx(0.02)


def test_sweep_rejects_bad_grids():
    with pytest.raises(DomainError):
        sweep_distance(Scenario.reference(), [])
    with pytest.raises(DomainError):
        sweep_distance(Scenario.reference(), [-1])
    with pytest.raises(DomainError):
        sweep_misalignment(Scenario.reference(), [2.0])


def test_curve_records_follow_header():
    rows = sweep_distance(Scenario.reference(), [1])
    (record,) = curve_records(rows)
    assert tuple(record) == CURVE_HEADERS["distance"]
    assert record["distance_km"] == 1
    assert np.isclose(record["transmittance"], 10 ** -0.02)


def test_larger_block_reaches_a_shorter_distance_under_a_time_cap():
    scenario = Scenario.reference().with_updates(sweep={"mode": "block", "max_collection_time_s": 60})
    small = sweep_distance(scenario.with_updates(sweep={"block_size": 300_000}), DISTANCES)
    large = sweep_distance(scenario.with_updates(sweep={"block_size": 1_000_000}), DISTANCES)
    assert _last_positive(large) >= 0
    assert _last_positive(large) < _last_positive(small)


def test_decoy_estimate_without_detections():
    config = SimulationConfig()
    tally = TallyTable(sent=[700, 200, 100], detected=[0, 0, 0], detected_sifted=[0, 0, 0], errors_sifted=[0, 0, 0])
    est = decoy_estimate(tally, config, SecurityParams())
    assert (est.s_x0, est.s_x1, est.phi_x) == (0.0, 0.0, 0.5)
