# ---------------------------------------------------------------------
# Gufo Three-Stage: Payload
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""Payload: immutable bit sequence."""

# Python modules
from dataclasses import dataclass
from typing import Iterable, Iterator, Tuple, Type, Union, overload

# Third-party modules
import numpy as np

# Gufo Labs modules
from .error import IncompatiblePayloadError


@dataclass(frozen=True)
class Payload(object):
    """
    Ordered sequence of bits.

    The most significant bit goes first when the payload is
    interpreted as an integer.

    Args:
        bits: Tuple of 0/1 values, non-empty.

    Example:
        ``` py
        x = Payload.from_str("1010")
        assert x ^ Payload.from_str("1100") == Payload.from_str("0110")
        assert x.value == 10
        ```
    """

    bits: Tuple[int, ...]

    def __post_init__(self: "Payload") -> None:
        if not self.bits:
            msg = "payload must contain at least one bit"
            raise IncompatiblePayloadError(msg)
        if any(b not in (0, 1) for b in self.bits):
            msg = "payload bits must be 0 or 1"
            raise IncompatiblePayloadError(msg)

    @classmethod
    def from_str(cls: Type["Payload"], s: str) -> "Payload":
        """
        Parse string of `0` and `1` characters.

        Args:
            s: Bit string, like `1010`.

        Returns:
            Payload instance.
        """
        if any(c not in "01" for c in s):
            msg = f"invalid bit string: {s!r}"
            raise IncompatiblePayloadError(msg)
        return cls(tuple(int(c) for c in s))

    @classmethod
    def from_bits(cls: Type["Payload"], bits: Iterable[int]) -> "Payload":
        """Build payload from any iterable of bits."""
        return cls(tuple(int(b) for b in bits))

    @classmethod
    def from_int(cls: Type["Payload"], value: int, width: int) -> "Payload":
        """
        Convert non-negative integer to fixed-width payload.

        Args:
            value: Integer value.
            width: Number of bits.

        Returns:
            Payload instance, most significant bit first.
        """
        if value < 0 or value >= 1 << width:
            msg = f"{value} does not fit into {width} bits"
            raise IncompatiblePayloadError(msg)
        return cls.from_str(format(value, f"0{width}b"))

    @classmethod
    def zeros(cls: Type["Payload"], n: int) -> "Payload":
        """Get all-zero payload of `n` bits."""
        return cls((0,) * n)

    @classmethod
    def random(
        cls: Type["Payload"], n: int, rng: np.random.Generator
    ) -> "Payload":
        """
        Draw uniform random payload.

        Args:
            n: Number of bits.
            rng: Random generator.

        Returns:
            Payload instance.
        """
        return cls.from_bits(rng.integers(0, 2, size=n).tolist())

    @classmethod
    def concat(
        cls: Type["Payload"], parts: Iterable["Payload"]
    ) -> "Payload":
        """Concatenate payloads in order."""
        return cls(tuple(b for p in parts for b in p.bits))

    @property
    def value(self: "Payload") -> int:
        """Integer interpretation, most significant bit first."""
        return int(str(self), 2)

    def flip(self: "Payload", index: int) -> "Payload":
        """Get copy with single bit inverted."""
        bits = list(self.bits)
        bits[index] ^= 1
        return Payload(tuple(bits))

    def __str__(self: "Payload") -> str:
        """Render as `0`/`1` string."""
        return "".join(str(b) for b in self.bits)

    def __len__(self: "Payload") -> int:
        """Number of bits."""
        return len(self.bits)

    def __iter__(self: "Payload") -> Iterator[int]:
        """Iterate over bits."""
        return iter(self.bits)

    @overload
    def __getitem__(self: "Payload", index: int) -> int: ...

    @overload
    def __getitem__(self: "Payload", index: slice) -> "Payload": ...

    def __getitem__(
        self: "Payload", index: Union[int, slice]
    ) -> Union[int, "Payload"]:
        """Get single bit or sub-payload."""
        if isinstance(index, slice):
            return Payload(self.bits[index])
        return self.bits[index]

    def __xor__(self: "Payload", other: "Payload") -> "Payload":
        """Bitwise exclusive-or of equal-length payloads."""
        if len(self) != len(other):
            msg = f"length mismatch: {len(self)} != {len(other)}"
            raise IncompatiblePayloadError(msg)
        return Payload(tuple(a ^ b for a, b in zip(self.bits, other.bits)))
