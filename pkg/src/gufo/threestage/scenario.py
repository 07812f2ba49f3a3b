# ---------------------------------------------------------------------
# Gufo Three-Stage: Scenario runner
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""
Scenario runner and report.

Example:
    ``` py
    config = parse_config(text)
    report = run_scenario(config)
    print(report.dump())
    ```
"""

# Python modules
import hashlib
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

# Third-party modules
import yaml

# Gufo Labs modules
from .config import ScenarioConfig, config_to_dict
from .leakage import LeakageReport, TrialOutcome, aggregate, run_trials
from .protocols import Variant, expected_stage_events, split_roles
from .topology import PARTY_A, PARTY_B, Topology, path_diversity
from .transcript import Transcript

MAX_VIOLATIONS = 10

TRANSCRIPT_FULL = "full"
TRANSCRIPT_DIGEST = "digest"

logger = logging.getLogger(__name__)


@dataclass
class ScenarioReport(object):
    """
    Scenario outcome.

    Args:
        config: Scenario config.
        topology: Topology used.
        success: Per-trial success flags, `1` for recovered plaintext.
        metrics: Aggregated counters.
        digest: SHA-256 over all trial transcript digests, in order.
        path_diversity: Insecure A-to-B paths in the topology.
        transcript: Full transcript of trial 0.
        violations: Acceptance-property violations.
    """

    config: ScenarioConfig
    topology: Topology
    success: str
    metrics: LeakageReport
    digest: str
    path_diversity: int
    transcript: Optional[Transcript] = None
    violations: List[str] = field(default_factory=list)

    @property
    def passed(self: "ScenarioReport") -> bool:
        """No property violations found."""
        return not self.violations

    def to_dict(
        self: "ScenarioReport", transcript: str = TRANSCRIPT_FULL
    ) -> Dict[str, Any]:
        """
        Plain structure of the report.

        Args:
            transcript: `full` to include trial 0 transcript,
                `digest` for digest only.
        """
        r: Dict[str, Any] = {
            "config": config_to_dict(self.config),
            "topology": self.topology.to_dict(),
            "path_diversity": self.path_diversity,
            "success": self.success,
            "metrics": self.metrics.to_dict(),
            "checks": {
                "passed": self.passed,
                "violations": list(self.violations),
            },
            "digest": self.digest,
        }
        if transcript == TRANSCRIPT_FULL and self.transcript is not None:
            r["transcript"] = self.transcript.to_records()
        return r

    def dump(self: "ScenarioReport", transcript: str = TRANSCRIPT_FULL) -> str:
        """Report as YAML document."""
        return yaml.safe_dump(self.to_dict(transcript), sort_keys=False)


def scenario_digest(outcomes: List[TrialOutcome]) -> str:
    """SHA-256 over the trial transcript digests, in trial order."""
    h = hashlib.sha256()
    for o in outcomes:
        h.update(o.digest.encode())
        h.update(b"\n")
    return h.hexdigest()


def check_outcomes(
    config: ScenarioConfig, topology: Topology, outcomes: List[TrialOutcome]
) -> List[str]:
    """
    Check acceptance properties over the outcomes.

    * Without adversary every trial recovers the plaintext.
    * Every trial sends the variant's number of stage transmissions.

    Args:
        config: Scenario config.
        topology: Topology used.
        outcomes: Trial outcomes.

    Returns:
        Violation messages, at most `MAX_VIOLATIONS` plus a summary.
    """
    k = (
        len(split_roles(topology).senders)
        if config.variant == Variant.SPLIT_PATH
        else 0
    )
    expected = expected_stage_events(config.variant, config.payload_bits, k)
    r: List[str] = []
    for o in outcomes:
        if not config.adversary.active and not o.success:
            r.append(f"trial {o.index}: plaintext not recovered")
        if o.stage_events != expected:
            r.append(
                f"trial {o.index}: {o.stage_events} stage transmissions, "
                f"expected {expected}"
            )
    if len(r) > MAX_VIOLATIONS:
        extra = len(r) - MAX_VIOLATIONS
        r = [*r[:MAX_VIOLATIONS], f"... and {extra} more"]
    return r


def run_scenario(config: ScenarioConfig, jobs: int = 1) -> ScenarioReport:
    """
    Run scenario.

    Report does not depend on `jobs`.

    Args:
        config: Scenario config.
        jobs: Worker threads.

    Returns:
        ScenarioReport instance.
    """
    logger.info(
        "Running %s/%s, %d trials, seed %d",
        config.variant.value,
        config.family.value,
        config.trials,
        config.seed,
    )
    topology = config.build_topology()
    outcomes = run_trials(config, jobs=jobs, keep=(0,))
    report = ScenarioReport(
        config=config,
        topology=topology,
        success="".join("1" if o.success else "0" for o in outcomes),
        metrics=aggregate(outcomes),
        digest=scenario_digest(outcomes),
        path_diversity=path_diversity(
            topology, PARTY_A, PARTY_B, len(topology.locations)
        ),
        transcript=outcomes[0].transcript if outcomes else None,
        violations=check_outcomes(config, topology, outcomes),
    )
    for v in report.violations:
        logger.warning("Property violation: %s", v)
    logger.info(
        "Done: success rate %.4f, digest %s",
        report.metrics.success_rate,
        report.digest,
    )
    return report
