# ---------------------------------------------------------------------
# Gufo Three-Stage: Commuting transforms
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""
Commuting transform families.

Three families are supported:

* `Family.PAD` - bitwise exclusive-or with a pad of the payload length.
* `Family.MODEXP` - exponentiation modulo prime `p`.
* `Family.ROTATION` - polarization rotation, applies to qubits only.

Attributes:
    MIN_PRIME: Smallest modulus accepted by the ModExp family.
    EXHAUSTIVE_LIMIT: Domains up to this size are checked exhaustively
        by `commutes_check`.
"""

# Python modules
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Tuple

# Third-party modules
import numpy as np
from sympy import isprime, mod_inverse

# Gufo Labs modules
from .error import (
    FamilyMismatchError,
    IncompatiblePayloadError,
    InvalidKeyError,
)
from .payload import Payload
from .qubit import ALGEBRA_TOLERANCE, QubitState, encode_bit, rotate

MIN_PRIME = 5
EXHAUSTIVE_LIMIT = 4096
TAU = 2.0 * math.pi


class Family(str, Enum):
    """Transform family."""

    PAD = "pad"
    MODEXP = "modexp"
    ROTATION = "rotation"


def modexp_width(p: int) -> int:
    """
    Get payload width for residues modulo `p`.

    Args:
        p: Modulus.

    Returns:
        Number of bits required to hold `p - 1`.
    """
    return (p - 1).bit_length()


def modexp_payload(value: int, p: int) -> Payload:
    """
    Encode residue as ModExp payload.

    Args:
        value: Residue in range `1..p-1`.
        p: Modulus.

    Returns:
        Payload of `modexp_width(p)` bits.
    """
    return Payload.from_int(value, modexp_width(p))


def canonical_angle(theta: float) -> float:
    """Reduce angle to `[0, 2pi)` range."""
    r = math.fmod(theta, TAU)
    if r < 0.0:
        r += TAU
    if r >= TAU:
        r = 0.0
    return r


class TransformKey(ABC):
    """
    Secret key of a single commuting transform.

    Subclasses are immutable. Two keys may be composed in any order
    when they have the same `family` and the same `structure`.
    """

    family: Family

    @property
    @abstractmethod
    def structure(self: "TransformKey") -> Tuple[int, ...]:
        """Structural parameters: `(n,)` for Pad, `(p,)` for ModExp."""

    @abstractmethod
    def apply(self: "TransformKey", x: Payload) -> Payload:
        """
        Apply transform to the payload.

        Args:
            x: Payload.

        Returns:
            Transformed payload.
        """

    @abstractmethod
    def inverse(self: "TransformKey") -> "TransformKey":
        """Get the key of the inverse transform."""

    @abstractmethod
    def render(self: "TransformKey") -> str:
        """Render key material for transcripts."""

    def domain_size(self: "TransformKey") -> Optional[int]:
        """Number of valid inputs, `None` when unbounded."""
        return None

    def iter_domain(self: "TransformKey") -> Iterator[Payload]:
        """Iterate over all valid inputs."""
        return iter(())

    def sample_input(
        self: "TransformKey", rng: np.random.Generator
    ) -> Payload:
        """Draw random valid input."""
        msg = f"{self.family.value} keys have no payload domain"
        raise IncompatiblePayloadError(msg)


@dataclass(frozen=True)
class PadKey(TransformKey):
    """
    Pad family key: `x -> x xor pad`.

    Args:
        pad: Pad bits, same length as payloads.
    """

    pad: Payload
    family = Family.PAD

    @property
    def structure(self: "PadKey") -> Tuple[int, ...]:
        """Payload length."""
        return (len(self.pad),)

    def apply(self: "PadKey", x: Payload) -> Payload:
        """Exclusive-or with the pad."""
        if len(x) != len(self.pad):
            msg = f"payload length {len(x)} != pad length {len(self.pad)}"
            raise IncompatiblePayloadError(msg)
        return x ^ self.pad

    def inverse(self: "PadKey") -> "PadKey":
        """Exclusive-or is self-inverse."""
        return self

    def render(self: "PadKey") -> str:
        """Pad bits."""
        return str(self.pad)

    def domain_size(self: "PadKey") -> Optional[int]:
        """All payloads of the pad length."""
        return 1 << len(self.pad)

    def iter_domain(self: "PadKey") -> Iterator[Payload]:
        """All payloads of the pad length, in numeric order."""
        n = len(self.pad)
        for v in range(1 << n):
            yield Payload.from_int(v, n)

    def sample_input(self: "PadKey", rng: np.random.Generator) -> Payload:
        """Uniform random payload."""
        return Payload.random(len(self.pad), rng)


@dataclass(frozen=True)
class ModExpKey(TransformKey):
    """
    ModExp family key: `x -> x^e mod p`.

    Args:
        p: Prime modulus, at least `MIN_PRIME`.
        e: Exponent, `1 <= e < p - 1`, coprime with `p - 1`.
    """

    p: int
    e: int
    family = Family.MODEXP

    def __post_init__(self: "ModExpKey") -> None:
        if self.p < MIN_PRIME or not isprime(self.p):
            msg = f"modulus must be prime >= {MIN_PRIME}, got {self.p}"
            raise InvalidKeyError(msg)
        if not 1 <= self.e < self.p - 1:
            msg = f"exponent must be in 1..{self.p - 2}, got {self.e}"
            raise InvalidKeyError(msg)
        if math.gcd(self.e, self.p - 1) != 1:
            msg = f"exponent {self.e} is not a unit modulo {self.p - 1}"
            raise InvalidKeyError(msg)

    @property
    def structure(self: "ModExpKey") -> Tuple[int, ...]:
        """Modulus."""
        return (self.p,)

    def apply(self: "ModExpKey", x: Payload) -> Payload:
        """Modular exponentiation."""
        width = modexp_width(self.p)
        if len(x) != width:
            msg = f"payload must be {width} bits wide for p={self.p}"
            raise IncompatiblePayloadError(msg)
        v = x.value
        if not 1 <= v <= self.p - 1:
            msg = f"payload value must be in 1..{self.p - 1}, got {v}"
            raise IncompatiblePayloadError(msg)
        return Payload.from_int(pow(v, self.e, self.p), width)

    def inverse(self: "ModExpKey") -> "ModExpKey":
        """Exponent inverse modulo `p - 1`."""
        return ModExpKey(p=self.p, e=int(mod_inverse(self.e, self.p - 1)))

    def render(self: "ModExpKey") -> str:
        """`p:e` pair."""
        return f"{self.p}:{self.e}"

    def domain_size(self: "ModExpKey") -> Optional[int]:
        """Residues `1..p-1`."""
        return self.p - 1

    def iter_domain(self: "ModExpKey") -> Iterator[Payload]:
        """Residues `1..p-1`, in numeric order."""
        for v in range(1, self.p):
            yield modexp_payload(v, self.p)

    def sample_input(self: "ModExpKey", rng: np.random.Generator) -> Payload:
        """Uniform random residue."""
        return modexp_payload(int(rng.integers(1, self.p)), self.p)


@dataclass(frozen=True)
class RotationKey(TransformKey):
    """
    Rotation family key.

    Rotates qubit polarization by `theta` radians. Angle is
    canonicalized to `[0, 2pi)` on construction.

    Args:
        theta: Rotation angle in radians, finite.
    """

    theta: float
    family = Family.ROTATION

    def __post_init__(self: "RotationKey") -> None:
        if not math.isfinite(self.theta):
            msg = f"rotation angle must be finite, got {self.theta}"
            raise InvalidKeyError(msg)
        object.__setattr__(self, "theta", canonical_angle(self.theta))

    @property
    def structure(self: "RotationKey") -> Tuple[int, ...]:
        """No structural parameters."""
        return ()

    def apply(self: "RotationKey", x: Payload) -> Payload:
        """Rotation keys do not apply to classical payloads."""
        msg = "rotation keys apply to qubits, use rotate_state()"
        raise IncompatiblePayloadError(msg)

    def rotate_state(self: "RotationKey", s: QubitState) -> QubitState:
        """Rotate qubit state by `theta`."""
        return rotate(s, self.theta)

    def inverse(self: "RotationKey") -> "RotationKey":
        """Rotation by `-theta`."""
        return RotationKey(theta=-self.theta)

    def render(self: "RotationKey") -> str:
        """Angle with 12 significant digits."""
        return format(self.theta, ".12g")

    def isclose(self: "RotationKey", other: "RotationKey") -> bool:
        """Compare angles on the circle within `ALGEBRA_TOLERANCE`."""
        d = abs(self.theta - other.theta)
        return min(d, TAU - d) <= ALGEBRA_TOLERANCE


def sample_key(
    family: Family,
    rng: np.random.Generator,
    *,
    n: Optional[int] = None,
    p: Optional[int] = None,
) -> TransformKey:
    """
    Draw uniform random key of the given family.

    Args:
        family: Transform family.
        rng: Random generator.
        n: Payload length, Pad family only.
        p: Prime modulus, ModExp family only.

    Returns:
        Pad: uniform pad bits. ModExp: exponent uniform over the units
        modulo `p - 1`. Rotation: angle uniform over `[0, 2pi)`.
    """
    if family == Family.PAD:
        if n is None or n < 1:
            msg = f"pad length must be >= 1, got {n}"
            raise InvalidKeyError(msg)
        return PadKey(pad=Payload.random(n, rng))
    if family == Family.MODEXP:
        if p is None or p < MIN_PRIME or not isprime(p):
            msg = f"modulus must be prime >= {MIN_PRIME}, got {p}"
            raise InvalidKeyError(msg)
        # Rejection sampling keeps the draw uniform over the units
        while True:
            e = int(rng.integers(1, p - 1))
            if math.gcd(e, p - 1) == 1:
                return ModExpKey(p=p, e=e)
    return RotationKey(theta=float(rng.uniform(0.0, TAU)))


def apply(key: TransformKey, x: Payload) -> Payload:
    """
    Apply transform.

    Args:
        key: Transform key.
        x: Payload.

    Returns:
        Transformed payload.
    """
    return key.apply(x)


def invert_key(key: TransformKey) -> TransformKey:
    """
    Get the inverse transform.

    `apply(invert_key(k), apply(k, x)) == x` for every valid `x`.
    """
    return key.inverse()


def commutes_check(
    k1: TransformKey,
    k2: TransformKey,
    samples: int,
    rng: np.random.Generator,
) -> bool:
    """
    Check the keys commute.

    The check is exhaustive when the domain has no more than
    `max(samples, EXHAUSTIVE_LIMIT)` elements, and runs on `samples`
    random inputs otherwise. Rotation keys are checked on random
    qubit states.

    Args:
        k1: First key.
        k2: Second key.
        samples: Number of random inputs.
        rng: Random generator.

    Returns:
        True, if both composition orders agree on every checked input.
    """
    if k1.family != k2.family:
        msg = f"family mismatch: {k1.family.value} != {k2.family.value}"
        raise FamilyMismatchError(msg)
    if k1.structure != k2.structure:
        msg = f"parameter mismatch: {k1.structure} != {k2.structure}"
        raise FamilyMismatchError(msg)
    if isinstance(k1, RotationKey) and isinstance(k2, RotationKey):
        for _ in range(samples):
            s = rotate(encode_bit(0), float(rng.uniform(0.0, TAU)))
            left = k1.rotate_state(k2.rotate_state(s))
            right = k2.rotate_state(k1.rotate_state(s))
            if not left.isclose(right, ALGEBRA_TOLERANCE):
                return False
        return True
    size = k1.domain_size()
    if size is not None and size <= max(samples, EXHAUSTIVE_LIMIT):
        inputs: Iterator[Payload] = k1.iter_domain()
    else:
        inputs = (k1.sample_input(rng) for _ in range(samples))
    return all(k1.apply(k2.apply(x)) == k2.apply(k1.apply(x)) for x in inputs)
