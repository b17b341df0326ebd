import json
import math
from dataclasses import dataclass
from typing import List, Literal, Optional

import numpy as np
from loguru import logger

from qkdhydro.common.exception import ConfigurationError, VerificationFailed
from qkdhydro.models import BitString
from qkdhydro.schema import (
    CurveRow,
    LeakSource,
    PlanReport,
    Scenario,
    SecureKey,
    SessionReport,
    SweepEngine,
    SweepMode,
    TallyTable,
)
from qkdhydro.service.channel import link_transmittance, total_loss_db
from qkdhydro.service.crypto import plan
from qkdhydro.service.finitekey import (
    decoy_estimate,
    key_length,
    secret_key_rate,
    sweep_distance,
    sweep_misalignment,
)
from qkdhydro.service.montecarlo import monteCarloService
from qkdhydro.service.postproc import (
    abort_check,
    disclose_sample,
    leak_accounting,
    privacy_amplify,
    qber_upper_bound,
    reconcile,
    verification_width,
)

# stream index of the classical post-processing generator, next to the pulse streams
POSTPROC_STREAM = 1
# key files are hex, so key lengths are kept to whole hex digits
HEX_DIGIT_BITS = 4
SweepKind = Literal["distance", "misalignment"]


@dataclass(frozen=True)
class SessionOutcome:
    report: SessionReport
    key: Optional[SecureKey] = None
    tally: Optional[TallyTable] = None


def parse_grid(text: str, kind: SweepKind) -> List[float]:
    """Comma separated grid; a misalignment grid ending in 'deg' is read in degrees."""
    raw = (text or "").strip()
    degrees = kind == "misalignment" and raw.lower().endswith("deg")
    if degrees:
        raw = raw[: -len("deg")]
    items = [item.strip() for item in raw.split(",") if item.strip()]
    if not items:
        raise ConfigurationError("Grid is empty", field="grid")
    try:
        values = [float(item) for item in items]
    except ValueError as e:
        raise ConfigurationError(f"Grid must be a comma separated list of numbers: {text!r}", field="grid") from e
    if any(not math.isfinite(value) for value in values):
        raise ConfigurationError("Grid values must be finite", field="grid")
    if degrees:
        values = [math.radians(value) for value in values]
    if kind == "distance" and any(value < 0 for value in values):
        raise ConfigurationError("Distances must be >= 0 km", field="grid")
    if kind == "misalignment" and any(not 0.0 <= value <= math.pi / 2 for value in values):
        raise ConfigurationError("Misalignment angles must lie in [0, pi/2] rad", field="grid")
    return values


class PipelineService:
    def simulate(self, scenario: Scenario) -> SessionOutcome:
        """Monte Carlo, parameter estimation, reconciliation, verification and amplification."""
        sim, link, security, post = scenario.simulation, scenario.link, scenario.security, scenario.postproc
        tally, pair = monteCarloService.session(
            sim, link, scenario.detector, scenario.profile, scenario.stabilization_gain
        )
        rng = np.random.default_rng([sim.seed, POSTPROC_STREAM])
        base = {
            "length_km": link.length_km,
            "loss_db": total_loss_db(link),
            "transmittance": link_transmittance(link),
            "pulse_count": sim.pulse_count,
            "seed": sim.seed,
            "sifted_bits": len(pair),
            "elapsed_time_s": sim.elapsed_time,
        }
        if len(pair) == 0:
            report = SessionReport(
                **base,
                qber=0.0,
                qber_upper=1.0,
                sample_bits=0,
                leak_ec_bits=0,
                s_x0=0.0,
                s_x1=0.0,
                phi_x=0.5,
                key_length_bits=0,
                skr_bps=0.0,
            )
            return SessionOutcome(report, tally=tally)

        # 1. Parameter estimation
        errors, sample, remaining = disclose_sample(pair, post.sample_fraction, rng)
        qber = errors / sample
        measured = {
            "qber": qber,
            "qber_upper": qber_upper_bound(errors, sample, post.confidence),
            "sample_bits": sample,
        }
        if abort_check(qber, post.qber_threshold):
            report = SessionReport(
                **base,
                **measured,
                leak_ec_bits=0,
                s_x0=0.0,
                s_x1=0.0,
                phi_x=0.5,
                key_length_bits=0,
                skr_bps=0.0,
                aborted=True,
            )
            return SessionOutcome(report, tally=tally)

        # 2. Decoy bounds
        est = decoy_estimate(tally, sim, security)
        bounds = {"s_x0": est.s_x0, "s_x1": est.s_x1, "phi_x": est.phi_x}

        # 3. Reconciliation until the verification hashes agree, and leak accounting
        try:
            corrected, leaked, passes = reconcile(remaining, security.epsilon_cor, rng, post.max_passes)
        except VerificationFailed:
            report = SessionReport(
                **base,
                **measured,
                **bounds,
                leak_ec_bits=sample,
                key_length_bits=0,
                skr_bps=0.0,
                aborted=True,
                keys_match=False,
            )
            return SessionOutcome(report, tally=tally)
        if post.leak_source == LeakSource.ANALYTIC:
            checks = (passes - 1) * verification_width(security.epsilon_cor, len(corrected))
            leak = leak_accounting(len(remaining), min(qber, 0.5), post.ec_efficiency) + checks
        else:
            leak = leaked
        leak += sample

        # 4. Key length in whole hex digits, then privacy amplification
        length = min(key_length(est, leak, security), len(corrected))
        length -= length % HEX_DIGIT_BITS
        key, keys_match = None, True
        if length > 0:
            seed_bits = BitString.random(rng, len(corrected) + length - 1)
            provenance = f"seed={sim.seed};pulses={sim.pulse_count};length_km={link.length_km}"
            key = privacy_amplify(corrected.alice, length, seed_bits, security.epsilon_sec, provenance)
            bob_key = privacy_amplify(corrected.bob, length, seed_bits, security.epsilon_sec, provenance)
            keys_match = key.bits == bob_key.bits
        skr = secret_key_rate(length, sim.elapsed_time) if sim.elapsed_time > 0 else 0.0
        report = SessionReport(
            **base,
            **measured,
            **bounds,
            leak_ec_bits=leak,
            key_length_bits=length,
            skr_bps=skr,
            aborted=not keys_match,
            keys_match=keys_match,
        )
        logger.debug(json.dumps({"event": "session_finished", "key_length_bits": length, "passes": passes}))
        return SessionOutcome(report, key if keys_match else None, tally)

    def sweep(
        self,
        scenario: Scenario,
        kind: SweepKind,
        grid: List[float],
        mode: Optional[SweepMode] = None,
        engine: Optional[SweepEngine] = None,
        block_size: Optional[int] = None,
    ) -> List[CurveRow]:
        overrides = {}
        if mode is not None:
            overrides["mode"] = SweepMode(mode)
        if engine is not None:
            overrides["engine"] = SweepEngine(engine)
        if block_size is not None:
            overrides["block_size"] = block_size
        if overrides:
            scenario = scenario.with_updates(sweep=overrides)
        if kind == "distance":
            return sweep_distance(scenario, grid)
        return sweep_misalignment(scenario, grid)

    def plan(self, bandwidth: float, skr: Optional[float] = None, scenario: Optional[Scenario] = None) -> PlanReport:
        """Plan from a given key rate, or from the analytic rate of the scenario's link."""
        if skr is None:
            if scenario is None:
                raise ConfigurationError("Either a key rate or a scenario is needed", field="skr")
            analytic = scenario.with_updates(sweep={"engine": SweepEngine.ANALYTIC})
            skr = sweep_distance(analytic, [scenario.link.length_km])[0].skr_bps
        return plan(skr, bandwidth)


pipelineService = PipelineService()

__all__ = ["pipelineService", "parse_grid", "SessionOutcome"]
