# ---------------------------------------------------------------------
# Gufo Three-Stage: Multi-channel coding
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""
Payload splitting with single parity share.

Payload is cut into `k` contiguous data shares, and the parity share
is the exclusive-or of all of them. Single parity corrects one
erasure and detects any odd number of flips in a column.
"""

# Python modules
import operator
from dataclasses import dataclass, replace
from functools import reduce
from typing import List, Optional, Tuple

# Gufo Labs modules
from .error import IncompatiblePayloadError, UnrecoverableError
from .payload import Payload

MIN_SHARES = 2


def xor_all(parts: List[Payload]) -> Payload:
    """Exclusive-or of all payloads."""
    return reduce(operator.xor, parts)


@dataclass(frozen=True)
class ShareSet(object):
    """
    Data shares and the parity share.

    Missing shares are represented by `None`.

    Args:
        data_shares: `k` equal-length data shares, in order.
        parity: Parity share.
    """

    data_shares: Tuple[Optional[Payload], ...]
    parity: Optional[Payload]

    def __post_init__(self: "ShareSet") -> None:
        if len(self.data_shares) < MIN_SHARES:
            msg = f"at least {MIN_SHARES} data shares required"
            raise IncompatiblePayloadError(msg)
        sizes = {len(x) for x in (*self.data_shares, self.parity) if x}
        if len(sizes) > 1:
            msg = f"shares must be equal length, got {sorted(sizes)}"
            raise IncompatiblePayloadError(msg)

    @property
    def k(self: "ShareSet") -> int:
        """Number of data shares."""
        return len(self.data_shares)

    @property
    def missing(self: "ShareSet") -> List[int]:
        """Indexes of the missing data shares."""
        return [i for i, x in enumerate(self.data_shares) if x is None]

    def erase(self: "ShareSet", index: int) -> "ShareSet":
        """Get copy with the data share marked missing."""
        shares = list(self.data_shares)
        shares[index] = None
        return replace(self, data_shares=tuple(shares))

    def with_share(self: "ShareSet", index: int, share: Payload) -> "ShareSet":
        """Get copy with the data share replaced."""
        shares = list(self.data_shares)
        shares[index] = share
        return replace(self, data_shares=tuple(shares))


def split(payload: Payload, k: int) -> ShareSet:
    """
    Split payload into `k` contiguous shares plus parity.

    Args:
        payload: Payload, length divisible by `k`.
        k: Number of data shares, at least 2.

    Returns:
        ShareSet instance.
    """
    if k < MIN_SHARES:
        msg = f"k must be >= {MIN_SHARES}, got {k}"
        raise IncompatiblePayloadError(msg)
    if len(payload) % k:
        msg = f"payload length {len(payload)} is not divisible by {k}"
        raise IncompatiblePayloadError(msg)
    size = len(payload) // k
    shares = [payload[i * size : (i + 1) * size] for i in range(k)]
    return ShareSet(data_shares=tuple(shares), parity=xor_all(shares))


def reconstruct(s: ShareSet) -> Payload:
    """
    Restore payload from shares.

    At most one data share may be missing. The missing share is
    the exclusive-or of the parity and all present shares.

    Args:
        s: ShareSet.

    Returns:
        Concatenated data shares.
    """
    missing = s.missing
    if len(missing) > 1:
        msg = f"unrecoverable: {len(missing)} data shares missing"
        raise UnrecoverableError(msg)
    shares = [x for x in s.data_shares if x is not None]
    if missing:
        if s.parity is None:
            msg = "unrecoverable: parity share missing"
            raise UnrecoverableError(msg)
        restored = xor_all([s.parity, *shares])
        s = s.with_share(missing[0], restored)
    return Payload.concat(x for x in s.data_shares if x is not None)


def verify_parity(s: ShareSet) -> bool:
    """
    Check parity share matches the data shares.

    Args:
        s: ShareSet with all shares present.

    Returns:
        True, if parity equals exclusive-or of the data shares.
    """
    if s.missing or s.parity is None:
        msg = "all shares must be present to verify parity"
        raise UnrecoverableError(msg)
    shares = [x for x in s.data_shares if x is not None]
    return xor_all(shares) == s.parity
