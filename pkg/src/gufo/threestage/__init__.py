# ---------------------------------------------------------------------
# Gufo Three-Stage: Multi-located party protocol simulator
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""
Gufo Three-Stage is the deterministic simulator of the three-stage
commuting-transform protocol among multi-located parties.

Attributes:
    __version__: Current version.
"""

__version__: str = "0.1.0"

# Gufo Labs modules
from .adversary import AdversaryModel, best_guess
from .coding import reconstruct, split, verify_parity
from .config import ScenarioConfig, parse_config, serialize_config
from .error import ThreeStageError
from .leakage import LeakageReport, estimate_leakage, mitm_multipath_detect
from .payload import Payload
from .protocols import (
    Variant,
    run_chain_forward,
    run_quantum_three_stage,
    run_split_path,
    run_three_stage,
    run_two_stage,
)
from .scenario import ScenarioReport, run_scenario
from .topology import Figure, Topology, build_figure, validate
from .transforms import Family, apply, commutes_check, invert_key, sample_key

__all__ = [
    "AdversaryModel",
    "Family",
    "Figure",
    "LeakageReport",
    "Payload",
    "ScenarioConfig",
    "ScenarioReport",
    "ThreeStageError",
    "Topology",
    "Variant",
    "__version__",
    "apply",
    "best_guess",
    "build_figure",
    "commutes_check",
    "estimate_leakage",
    "invert_key",
    "mitm_multipath_detect",
    "parse_config",
    "reconstruct",
    "run_chain_forward",
    "run_quantum_three_stage",
    "run_scenario",
    "run_split_path",
    "run_three_stage",
    "run_two_stage",
    "sample_key",
    "serialize_config",
    "split",
    "validate",
    "verify_parity",
]
