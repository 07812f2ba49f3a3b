# ---------------------------------------------------------------------
# Gufo Three-Stage: TapProto
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""TapProto protocol definition."""

# Python modules
from typing import Protocol

# Gufo Labs modules
from .payload import Payload
from .qubit import QubitState


class TapProto(Protocol):
    """
    Adversary tap protocol.

    Protocol engines pass every insecure transmission through the tap
    and deliver whatever the tap returns. Secure links and co-located
    hand-offs never reach the tap.
    """

    def transmit(
        self: "TapProto", step: int, src: str, dst: str, payload: Payload
    ) -> Payload:
        """
        Pass classical payload through the link.

        Args:
            step: Protocol stage.
            src: Source location id.
            dst: Destination location id.
            payload: Payload sent by the honest party.

        Returns:
            Payload delivered to `dst`.
        """
        ...

    def transmit_qubit(
        self: "TapProto",
        step: int,
        src: str,
        dst: str,
        index: int,
        state: QubitState,
    ) -> QubitState:
        """
        Pass qubit through the link.

        Args:
            step: Protocol stage.
            src: Source location id.
            dst: Destination location id.
            index: Bit position in the message.
            state: State sent by the honest party.

        Returns:
            State delivered to `dst`.
        """
        ...
