# ---------------------------------------------------------------------
# Gufo Three-Stage: Leakage and detection metrics
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""
Trial execution and leakage metrics.

Every trial derives independent key, channel and adversary streams
from `(seed, trial index)`, so outcomes do not depend on the order
trials are executed in. `LeakageReport` holds exact counters and is
aggregated with `+`.
"""

# Python modules
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

# Third-party modules
import numpy as np

# Gufo Labs modules
from .adversary import AdversaryModel, AdversaryTap, best_guess
from .config import ScenarioConfig
from .payload import Payload
from .protocols import (
    Variant,
    run_quantum_three_stage,
    run_variant,
    split_roles,
)
from .topology import Topology
from .transcript import RunResult, Transcript
from .transforms import TAU, Family, modexp_payload, sample_key

BATCH = 1024
STREAMS = 3

logger = logging.getLogger(__name__)


def trial_streams(
    seed: int, index: int
) -> Tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """
    Independent random streams of the trial.

    Args:
        seed: Scenario seed.
        index: Trial index.

    Returns:
        Tuple of (`keys and plaintext`, `channel`, `adversary`)
        generators.
    """
    key, channel, adv = (
        np.random.default_rng(s)
        for s in np.random.SeedSequence([seed, index]).spawn(STREAMS)
    )
    return key, channel, adv


@dataclass(frozen=True)
class LeakageReport(object):
    """
    Exact counters over trials.

    Args:
        trials: Number of trials.
        successes: Trials recovering the plaintext exactly.
        bits: Plaintext bits sent.
        bit_errors: Wrong bits at the receiver.
        detections: Trials where honest parties noticed tampering.
        tampered: Trials where the adversary altered a payload.
        tampered_detections: Tampered trials that were noticed.
        guesses: Adversary guesses made.
        guess_hits: Guesses equal to the plaintext.
        adversary: Adversary was present.
    """

    trials: int = 0
    successes: int = 0
    bits: int = 0
    bit_errors: int = 0
    detections: int = 0
    tampered: int = 0
    tampered_detections: int = 0
    guesses: int = 0
    guess_hits: int = 0
    adversary: bool = False

    def __add__(self: "LeakageReport", other: object) -> "LeakageReport":
        """Merge counters."""
        if not isinstance(other, LeakageReport):
            return NotImplemented
        return LeakageReport(
            trials=self.trials + other.trials,
            successes=self.successes + other.successes,
            bits=self.bits + other.bits,
            bit_errors=self.bit_errors + other.bit_errors,
            detections=self.detections + other.detections,
            tampered=self.tampered + other.tampered,
            tampered_detections=self.tampered_detections
            + other.tampered_detections,
            guesses=self.guesses + other.guesses,
            guess_hits=self.guess_hits + other.guess_hits,
            adversary=self.adversary or other.adversary,
        )

    @staticmethod
    def _ratio(a: int, b: int) -> float:
        return a / b if b else 0.0

    @property
    def adversary_guess_accuracy(self: "LeakageReport") -> Optional[float]:
        """Fraction of trials the adversary guessed the plaintext."""
        if not self.adversary:
            return None
        return self._ratio(self.guess_hits, self.guesses)

    @property
    def receiver_error_rate(self: "LeakageReport") -> float:
        """Fraction of wrong bits at the receiver."""
        return self._ratio(self.bit_errors, self.bits)

    @property
    def detection_rate(self: "LeakageReport") -> float:
        """Fraction of tampered trials noticed by honest parties."""
        return self._ratio(self.tampered_detections, self.tampered)

    @property
    def success_rate(self: "LeakageReport") -> float:
        """Fraction of trials recovering the plaintext."""
        return self._ratio(self.successes, self.trials)

    def to_dict(self: "LeakageReport") -> Dict[str, Any]:
        """Metrics block of the scenario report."""
        r: Dict[str, Any] = {
            "trials": self.trials,
            "successes": self.successes,
            "success_rate": self.success_rate,
            "bits": self.bits,
            "bit_errors": self.bit_errors,
            "receiver_error_rate": self.receiver_error_rate,
        }
        if self.adversary:
            r["adversary_guess_accuracy"] = self.adversary_guess_accuracy
            r["guess_hits"] = self.guess_hits
            r["detection_rate"] = self.detection_rate
            r["detections"] = self.detections
            r["tampered"] = self.tampered
        return r


@dataclass(frozen=True)
class TrialOutcome(object):
    """
    Result of the single trial.

    Args:
        index: Trial index.
        success: Plaintext recovered exactly.
        bits: Plaintext length.
        bit_errors: Wrong bits at the receiver.
        detected: Tampering noticed by honest parties.
        guess_hit: Adversary guessed the plaintext, None without
            adversary.
        stage_events: Number of insecure stage transmissions.
        digest: Transcript digest.
        tampered: Adversary altered a payload.
        transcript: Full transcript, when kept.
    """

    index: int
    success: bool
    bits: int
    bit_errors: int
    detected: bool
    guess_hit: Optional[bool]
    stage_events: int
    digest: str
    tampered: bool = False
    transcript: Optional[Transcript] = None

    def report(self: "TrialOutcome") -> LeakageReport:
        """Counters of this trial."""
        return LeakageReport(
            trials=1,
            successes=int(self.success),
            bits=self.bits,
            bit_errors=self.bit_errors,
            detections=int(self.detected),
            tampered=int(self.tampered),
            tampered_detections=int(self.tampered and self.detected),
            guesses=int(self.guess_hit is not None),
            guess_hits=int(bool(self.guess_hit)),
            adversary=self.guess_hit is not None,
        )


def aggregate(outcomes: Iterable[TrialOutcome]) -> LeakageReport:
    """Sum counters of all outcomes."""
    return sum((o.report() for o in outcomes), LeakageReport())


def disclosed_mismatch(result: RunResult, disclose: int) -> bool:
    """
    Compare the disclosed check segment.

    Args:
        result: Run result.
        disclose: Number of trailing plaintext bits compared.

    Returns:
        True, if the segments differ.
    """
    if disclose <= 0:
        return False
    return result.recovered[-disclose:] != result.plaintext[-disclose:]


def _outcome(
    index: int,
    result: RunResult,
    model: AdversaryModel,
    tap: Optional[AdversaryTap],
    family: Family,
    p: int,
    rng: np.random.Generator,
    disclose: int,
    keep: bool,
) -> TrialOutcome:
    guess_hit: Optional[bool] = None
    if tap is not None:
        guess = best_guess(
            model,
            family,
            result.transcript,
            tap,
            rng,
            n=len(result.plaintext),
            p=p,
        )
        guess_hit = guess == result.plaintext
    return TrialOutcome(
        index=index,
        success=result.success,
        bits=len(result.plaintext),
        bit_errors=result.bit_errors,
        detected=result.detected or disclosed_mismatch(result, disclose),
        guess_hit=guess_hit,
        stage_events=len(result.transcript.stage_events()),
        digest=result.transcript.digest(),
        tampered=tap is not None and tap.tampered,
        transcript=result.transcript if keep else None,
    )


Angles = Union[float, List[float]]


def _angles(
    config: ScenarioConfig, rng: np.random.Generator
) -> Tuple[Angles, Angles]:
    fixed = config.family_params.angles
    if fixed is not None:
        return fixed
    if config.per_bit_keys:
        n = config.payload_bits
        return (
            [float(x) for x in rng.uniform(0.0, TAU, size=n)],
            [float(x) for x in rng.uniform(0.0, TAU, size=n)],
        )
    return float(rng.uniform(0.0, TAU)), float(rng.uniform(0.0, TAU))


def _plaintext(
    family: Family, n: int, p: int, rng: np.random.Generator
) -> Payload:
    if family == Family.MODEXP:
        return modexp_payload(int(rng.integers(1, p)), p)
    return Payload.random(n, rng)


def run_trial(
    config: ScenarioConfig,
    topology: Topology,
    index: int,
    *,
    keep_transcript: bool = False,
) -> TrialOutcome:
    """
    Run single seeded trial of the scenario.

    Args:
        config: Scenario config.
        topology: Scenario topology.
        index: Trial index.
        keep_transcript: Keep full transcript in the outcome.

    Returns:
        TrialOutcome instance.
    """
    key_rng, channel_rng, adv_rng = trial_streams(config.seed, index)
    model = config.adversary
    tap = model.tap(adv_rng) if model.active else None
    n, p = config.payload_bits, config.family_params.p
    if config.variant == Variant.QUANTUM:
        theta_a, theta_b = _angles(config, key_rng)
        x = Payload.random(n, key_rng)
        result = run_quantum_three_stage(
            theta_a, theta_b, x, tap, channel_rng, topology=topology
        )
    else:
        x = _plaintext(config.family, n, p, key_rng)
        key_a = sample_key(config.family, key_rng, n=n, p=p)
        key_b = sample_key(config.family, key_rng, n=n, p=p)
        result = run_variant(
            config.variant, topology, config.family, key_a, key_b, x, tap
        )
    return _outcome(
        index,
        result,
        model,
        tap,
        config.family,
        p,
        adv_rng,
        config.coding.disclose,
        keep_transcript,
    )


def run_trials(
    config: ScenarioConfig,
    jobs: int = 1,
    keep: Sequence[int] = (),
) -> List[TrialOutcome]:
    """
    Run all trials of the scenario.

    Args:
        config: Scenario config.
        jobs: Worker threads.
        keep: Indexes of trials to keep full transcripts for.

    Returns:
        Outcomes in trial order.
    """
    topology = config.build_topology()
    config.adversary.check_topology(topology)
    keep_set = set(keep)

    def run(index: int) -> TrialOutcome:
        return run_trial(
            config, topology, index, keep_transcript=index in keep_set
        )

    outcomes: List[TrialOutcome] = []
    pool = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for start in range(0, config.trials, BATCH):
            batch = range(start, min(start + BATCH, config.trials))
            if pool is None:
                outcomes.extend(run(i) for i in batch)
            else:
                outcomes.extend(pool.map(run, batch))
            logger.debug(
                "trials %d..%d of %d done",
                batch.start,
                batch.stop - 1,
                config.trials,
            )
    finally:
        if pool is not None:
            pool.shutdown()
    return outcomes


def estimate_leakage(config: ScenarioConfig, jobs: int = 1) -> LeakageReport:
    """
    Run scenario trials and aggregate the metrics.

    Args:
        config: Scenario config.
        jobs: Worker threads.

    Returns:
        LeakageReport instance.
    """
    report = aggregate(run_trials(config, jobs=jobs))
    logger.info(
        "%s/%s: %d trials, success rate %.4f",
        config.variant.value,
        config.family.value,
        report.trials,
        report.success_rate,
    )
    return report


def mitm_multipath_detect(
    t: Topology,
    variant: Variant,
    adversary: AdversaryModel,
    trials: int,
    rng: np.random.Generator,
    *,
    n_bits: int = 8,
    disclose: int = 0,
) -> LeakageReport:
    """
    Measure how often honest parties detect the active adversary.

    Runs Pad-family trials with random keys and plaintexts. Detection
    is the parity check failure at the receiver, or mismatch of the
    disclosed check segment.

    Args:
        t: Topology. Split-path topologies with the parity link
            carry the parity share.
        variant: Classical protocol variant.
        adversary: Adversary model, typically mitm.
        trials: Number of trials.
        rng: Randomness of keys, plaintexts and the adversary.
        n_bits: Plaintext length.
        disclose: Check segment length.

    Returns:
        LeakageReport instance.
    """
    adversary.check_topology(t)
    if variant == Variant.SPLIT_PATH:
        split_roles(t)
    report = LeakageReport()
    for index in range(trials):
        key_a = sample_key(Family.PAD, rng, n=n_bits)
        key_b = sample_key(Family.PAD, rng, n=n_bits)
        x = Payload.random(n_bits, rng)
        tap = adversary.tap(rng) if adversary.active else None
        result = run_variant(variant, t, Family.PAD, key_a, key_b, x, tap)
        report += _outcome(
            index,
            result,
            adversary,
            tap,
            Family.PAD,
            0,
            rng,
            disclose,
            False,
        ).report()
    return report
