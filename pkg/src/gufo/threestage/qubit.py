# ---------------------------------------------------------------------
# Gufo Three-Stage: Qubit simulation
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""
Single-qubit simulation with real amplitudes.

Only rotations are used by the quantum three-stage protocol, and
rotations keep real states real.

Attributes:
    STATE_TOLERANCE: Tolerance for state normalization checks.
    ALGEBRA_TOLERANCE: Tolerance for algebraic identities.
"""

# Python modules
import math
from typing import Tuple, Type

# Third-party modules
import numpy as np

STATE_TOLERANCE = 1e-9
ALGEBRA_TOLERANCE = 1e-12


class QubitState(object):
    """
    Normalized real state `a0|0> + a1|1>`.

    Args:
        a0: Amplitude of the basis state 0.
        a1: Amplitude of the basis state 1.
    """

    __slots__ = ("a0", "a1")

    def __init__(self: "QubitState", a0: float, a1: float) -> None:
        norm = a0 * a0 + a1 * a1
        if abs(norm - 1.0) > STATE_TOLERANCE:
            msg = f"state is not normalized: |a|^2 = {norm}"
            raise ValueError(msg)
        self.a0 = float(a0)
        self.a1 = float(a1)

    @classmethod
    def from_vector(
        cls: Type["QubitState"], v: np.ndarray
    ) -> "QubitState":
        """Build state from amplitudes vector."""
        return cls(float(v[0]), float(v[1]))

    @property
    def vector(self: "QubitState") -> np.ndarray:
        """Amplitudes as numpy vector."""
        return np.array([self.a0, self.a1])

    def probability(self: "QubitState", bit: int) -> float:
        """Probability to measure `bit` in the computational basis."""
        return self.a1 * self.a1 if bit else self.a0 * self.a0

    def is_basis(
        self: "QubitState", tolerance: float = STATE_TOLERANCE
    ) -> bool:
        """Check the state is `|0>` or `|1>` up to sign."""
        return min(abs(self.a0), abs(self.a1)) <= tolerance

    def isclose(
        self: "QubitState",
        other: "QubitState",
        tolerance: float = STATE_TOLERANCE,
    ) -> bool:
        """Compare amplitudes within tolerance."""
        return bool(
            np.allclose(self.vector, other.vector, rtol=0.0, atol=tolerance)
        )

    def render(self: "QubitState") -> str:
        """Amplitudes with 12 significant digits."""
        return f"({self.a0:.12g},{self.a1:.12g})"

    def __eq__(self: "QubitState", other: object) -> bool:
        """Exact amplitude equality."""
        if not isinstance(other, QubitState):
            return NotImplemented
        return self.a0 == other.a0 and self.a1 == other.a1

    def __hash__(self: "QubitState") -> int:
        """Hash amplitudes."""
        return hash((self.a0, self.a1))

    def __repr__(self: "QubitState") -> str:
        """Debug representation."""
        return f"QubitState({self.a0!r}, {self.a1!r})"


ZERO = QubitState(1.0, 0.0)
ONE = QubitState(0.0, 1.0)


def encode_bit(b: int) -> QubitState:
    """
    Encode bit as basis state.

    Args:
        b: Bit, 0 or 1.

    Returns:
        `|0>` for 0, `|1>` for 1.
    """
    if b not in (0, 1):
        msg = f"bit must be 0 or 1, got {b}"
        raise ValueError(msg)
    return ONE if b else ZERO


def rotation_matrix(theta: float) -> np.ndarray:
    """Planar rotation matrix for angle `theta`."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotate(s: QubitState, theta: float) -> QubitState:
    """
    Rotate polarization.

    Args:
        s: Normalized state.
        theta: Angle in radians.

    Returns:
        `(a0 cos - a1 sin, a0 sin + a1 cos)`.
    """
    return QubitState.from_vector(rotation_matrix(theta) @ s.vector)


def measure(
    s: QubitState, rng: np.random.Generator
) -> Tuple[int, QubitState]:
    """
    Measure in the computational basis.

    Args:
        s: Normalized state.
        rng: Random generator.

    Returns:
        Tuple of (`bit`, `collapsed state`). Bit is 0 with
        probability `a0^2`.
    """
    if rng.random() < s.probability(0):
        return 0, ZERO
    return 1, ONE
