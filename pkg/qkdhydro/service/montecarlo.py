import json
from typing import Dict, List, Tuple

import numpy as np
from loguru import logger

from qkdhydro.db.writer import csv_text
from qkdhydro.models import BitString, IntensityClass
from qkdhydro.schema import (
    PHOTON_BUCKETS,
    DetectorModel,
    EnvironmentProfile,
    FiberLink,
    SiftedKeyPair,
    SimulationConfig,
    TallyTable,
)
from qkdhydro.service.channel import (
    detection_rate,
    error_model,
    link_transmittance,
    misalignment_series,
    stabilize_series,
)

CHUNK_SIZE = 1 << 20
TALLY_HEADER = ("intensity", "photons", "sent", "detected", "detected_sifted", "errors_sifted")


def partition_bounds(pulse_count: int, partitions: int) -> List[Tuple[int, int]]:
    """Contiguous global pulse ranges, one per stream."""
    base, extra = divmod(pulse_count, partitions)
    bounds, start = [], 0
    for i in range(partitions):
        stop = start + base + (1 if i < extra else 0)
        bounds.append((start, stop))
        start = stop
    return bounds


def _resolve_after_pulses(primary: np.ndarray, trigger_draw: np.ndarray, p_ap: float, carry: bool) -> np.ndarray:
    # det[i] = primary[i] or (det[i-1] and u[i-1] < p_ap): gate i clicks when no gate between
    # the latest primary click and i failed to trigger its successor
    seeded = primary.copy()
    if seeded.size == 0:
        return seeded
    seeded[0] |= carry
    index = np.arange(seeded.size)
    last_primary = np.maximum.accumulate(np.where(seeded, index, -1))
    breaks = np.where(trigger_draw < p_ap, -1, index)
    last_break = np.empty_like(index)
    last_break[0] = -1
    last_break[1:] = np.maximum.accumulate(breaks[:-1])
    return last_primary > last_break


class _Stream:
    """One independently seeded pulse stream covering global indices [start, stop)."""

    def __init__(self, seed_seq: np.random.SeedSequence, start: int, stop: int):
        self.rng = np.random.default_rng(seed_seq)
        self.start = start
        self.stop = stop

    def simulate(
        self,
        config: SimulationConfig,
        eta: float,
        det: DetectorModel,
        env: EnvironmentProfile,
        stabilization_gain: float,
        keep_bits: bool,
    ) -> Tuple[Dict[str, np.ndarray], List[np.ndarray], List[np.ndarray]]:
        counts = {
            "sent": np.zeros(3, dtype=np.int64),
            "detected": np.zeros(3, dtype=np.int64),
            "detected_sifted": np.zeros(3, dtype=np.int64),
            "errors_sifted": np.zeros(3, dtype=np.int64),
            "oracle_detected": np.zeros(9, dtype=np.int64),
            "oracle_errors": np.zeros(9, dtype=np.int64),
        }
        alice_parts, bob_parts = [], []
        carry, state = False, 0.0
        for first in range(self.start, self.stop, CHUNK_SIZE):
            last = min(first + CHUNK_SIZE, self.stop)
            chunk, carry, state = self._chunk(config, eta, det, env, stabilization_gain, first, last, carry, state)
            for key in counts:
                counts[key] += chunk[key]
            if keep_bits:
                alice_parts.append(chunk["alice_sifted"])
                bob_parts.append(chunk["bob_sifted"])
        return counts, alice_parts, bob_parts

    def _chunk(self, config, eta, det, env, gain, first, last, carry, state):
        rng, n = self.rng, last - first
        # Draw order per chunk is fixed; changing it changes every seeded result.
        classes = rng.choice(len(IntensityClass), size=n, p=config.probabilities)
        alice_bits = rng.integers(0, 2, size=n, dtype=np.uint8)
        alice_bases = (rng.random(n) < config.basis_probability_x).astype(np.uint8)
        bob_bases = (rng.random(n) < config.basis_probability_x).astype(np.uint8)
        photons = rng.poisson(config.intensities[classes])
        survived = rng.binomial(photons, eta)
        dark = rng.random(n) < 2.0 * det.dark_count_probability
        trigger_draw = rng.random(n)
        flip_draw = rng.random(n)
        random_outcome = rng.integers(0, 2, size=n, dtype=np.uint8)

        times = np.arange(first, last, dtype=np.float64) / config.pulse_rate
        if gain > 0:
            theta, state = stabilize_series(env, gain, times, state)
            e_mis = np.clip(np.sin(theta) ** 2, 0.0, 1.0)
        else:
            _, e_mis = misalignment_series(env, times)

        has_photon = survived > 0
        detected = _resolve_after_pulses(has_photon | dark, trigger_draw, det.after_pulse_probability, carry)
        next_carry = bool(n and detected[-1] and trigger_draw[-1] < det.after_pulse_probability)

        # a surviving photon decides the outcome; dark counts and after-pulses are coin flips
        matched = alice_bases == bob_bases
        photon_outcome = alice_bits ^ (flip_draw < e_mis).astype(np.uint8)
        bob_bits = np.where(has_photon & matched, photon_outcome, random_outcome).astype(np.uint8)

        sifted = detected & matched
        errors = sifted & (bob_bits != alice_bits)
        cell = classes * len(PHOTON_BUCKETS) + np.minimum(photons, len(PHOTON_BUCKETS) - 1)
        chunk = {
            "sent": np.bincount(classes, minlength=3),
            "detected": np.bincount(classes[detected], minlength=3),
            "detected_sifted": np.bincount(classes[sifted], minlength=3),
            "errors_sifted": np.bincount(classes[errors], minlength=3),
            "oracle_detected": np.bincount(cell[sifted], minlength=9),
            "oracle_errors": np.bincount(cell[errors], minlength=9),
            "alice_sifted": alice_bits[sifted],
            "bob_sifted": bob_bits[sifted],
        }
        return chunk, next_carry, state


class MonteCarloService:
    def session(
        self,
        config: SimulationConfig,
        link: FiberLink,
        det: DetectorModel,
        env: EnvironmentProfile,
        stabilization_gain: float = 0.0,
        keep_bits: bool = True,
    ) -> Tuple[TallyTable, SiftedKeyPair]:
        """Pulse-level run; returns the tally and the sifted bit strings of both sides."""
        eta = link_transmittance(link) * det.efficiency
        streams = np.random.SeedSequence(config.seed).spawn(config.partitions)
        totals: Dict[str, np.ndarray] = {}
        alice_parts: List[np.ndarray] = []
        bob_parts: List[np.ndarray] = []
        for index, (seed_seq, (start, stop)) in enumerate(
            zip(streams, partition_bounds(config.pulse_count, config.partitions))
        ):
            counts, alice, bob = _Stream(seed_seq, start, stop).simulate(
                config, eta, det, env, stabilization_gain, keep_bits
            )
            for key, value in counts.items():
                totals[key] = totals.get(key, 0) + value
            alice_parts.extend(alice)
            bob_parts.extend(bob)
            logger.debug(json.dumps({"event": "stream_finished", "stream": index, "pulses": stop - start}))
        tally = TallyTable(
            sent=totals["sent"],
            detected=totals["detected"],
            detected_sifted=totals["detected_sifted"],
            errors_sifted=totals["errors_sifted"],
            oracle_detected=totals["oracle_detected"].reshape(3, len(PHOTON_BUCKETS)),
            oracle_errors=totals["oracle_errors"].reshape(3, len(PHOTON_BUCKETS)),
            elapsed_time=config.elapsed_time,
            meta={"engine": "montecarlo", "eta": eta},
        )
        if not keep_bits:
            return tally, SiftedKeyPair.empty()
        empty = np.zeros(0, dtype=np.uint8)
        pair = SiftedKeyPair(
            alice=BitString(np.concatenate(alice_parts) if alice_parts else empty),
            bob=BitString(np.concatenate(bob_parts) if bob_parts else empty),
        )
        return tally, pair

    def run(
        self,
        config: SimulationConfig,
        link: FiberLink,
        det: DetectorModel,
        env: EnvironmentProfile,
        stabilization_gain: float = 0.0,
    ) -> TallyTable:
        tally, _ = self.session(config, link, det, env, stabilization_gain, keep_bits=False)
        return tally


def expected_tally(
    config: SimulationConfig,
    link: FiberLink,
    det: DetectorModel,
    e_mis: float,
    pulse_count: float | None = None,
) -> TallyTable:
    """Expected counts of a run from the channel formulas, with the same oracle layout."""
    n_pulses = float(config.pulse_count if pulse_count is None else pulse_count)
    eta = link_transmittance(link) * det.efficiency
    mu = config.intensities
    sent = n_pulses * config.probabilities
    d_k = np.asarray(detection_rate(mu, eta, det))
    e_k = np.asarray(error_model(mu, eta, det, e_mis))
    sifted = sent * config.sifting_probability

    # photon-number view: P(n | k) for n = 0, 1; the last bucket takes the rest
    p_n = np.stack([np.exp(-mu), mu * np.exp(-mu)], axis=1)
    d_n = 1.0 - (1.0 - 2.0 * det.dark_count_probability) * (1.0 - eta) ** np.arange(2)
    err_n = (
        det.dark_count_probability
        + e_mis * (1.0 - (1.0 - eta) ** np.arange(2))
        + det.after_pulse_probability * d_n / 2.0
    )
    oracle_detected = np.empty((3, len(PHOTON_BUCKETS)))
    oracle_detected[:, :2] = sifted[:, None] * p_n * d_n
    oracle_detected[:, 2] = np.maximum(sifted * d_k - oracle_detected[:, :2].sum(axis=1), 0.0)

    oracle_errors = np.empty_like(oracle_detected)
    oracle_errors[:, :2] = sifted[:, None] * p_n * err_n
    oracle_errors[:, 2] = np.maximum(sifted * e_k - oracle_errors[:, :2].sum(axis=1), 0.0)
    # per-intensity QBER saturates at 1/2; scale the buckets with it
    raw = oracle_errors.sum(axis=1)
    capped = np.minimum(raw, 0.5 * oracle_detected.sum(axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(raw > 0, capped / raw, 0.0)
    oracle_errors = np.minimum(oracle_errors * scale[:, None], oracle_detected)

    return TallyTable(
        sent=sent,
        detected=sent * d_k,
        detected_sifted=oracle_detected.sum(axis=1),
        errors_sifted=oracle_errors.sum(axis=1),
        oracle_detected=oracle_detected,
        oracle_errors=oracle_errors,
        elapsed_time=n_pulses / config.pulse_rate,
        meta={"engine": "analytic", "eta": eta},
    )


def tally_to_csv(tally: TallyTable) -> str:
    """One row per intensity class (photons=all), then the oracle rows."""
    rows = []
    for intensity in IntensityClass:
        rows.append({"intensity": intensity.value, "photons": "all", **tally.row(intensity)})
    if tally.has_oracle:
        for intensity in IntensityClass:
            for bucket, label in enumerate(PHOTON_BUCKETS):
                rows.append(
                    {
                        "intensity": intensity.value,
                        "photons": label,
                        "detected_sifted": tally.oracle_detected[intensity.index, bucket].item(),
                        "errors_sifted": tally.oracle_errors[intensity.index, bucket].item(),
                    }
                )
    return csv_text(TALLY_HEADER, rows)


monteCarloService = MonteCarloService()

__all__ = ["monteCarloService", "expected_tally", "tally_to_csv", "partition_bounds"]
