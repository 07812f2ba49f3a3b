# ---------------------------------------------------------------------
# Gufo Three-Stage: Test Utilities
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

# Python modules
import os
from typing import Any

# Third-party modules
import numpy as np

SCENARIOS = os.path.join(os.path.dirname(__file__), "..", "scenarios")


def as_str(v: Any) -> str:
    """
    Format parameters for @parametrize(..., ids).

    Args:
        v: Input parameters.

    Returns:
        String to display as test id.

    Example:
        ``` py
        @pytest.mark.parametrize(...., ids=as_str)
        ```
    """
    return str(v)


def rng(seed: int = 0) -> np.random.Generator:
    """Seeded generator for the test."""
    return np.random.default_rng(seed)


def scenario_path(name: str) -> str:
    """
    Path to the bundled scenario.

    Args:
        name: File name within `scenarios/`.
    """
    return os.path.join(SCENARIOS, name)
