# ---------------------------------------------------------------------
# Gufo Three-Stage: Transcript
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""
Protocol transcripts.

Transcript records every transmission of the run in order: insecure
transmissions with the payload an observer of the link could see,
and secure hand-offs with an empty observable. Keys, plaintexts
and true qubit states go to the `hidden` part, which is never
serialized.

Attributes:
    NOTE_PARITY: Note of the parity share transmission.
    NOTE_COMPLETION: Note of the split-path completion leg.
    NOTE_HANDOFF: Note of the secure hand-offs.
    NOTE_COLOCATED: Note of the co-located hand-offs.
    QUBIT_MARKER: Observable of the qubit in flight.
"""

# Python modules
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Tuple

# Gufo Labs modules
from .payload import Payload

NOTE_PARITY = "parity"
NOTE_COMPLETION = "completion"
NOTE_HANDOFF = "hand-off"
NOTE_COLOCATED = "co-located"
QUBIT_MARKER = "qubit"

_AUX_NOTES = (NOTE_PARITY, NOTE_COMPLETION)


@dataclass(frozen=True)
class Event(object):
    """
    Single transmission.

    Args:
        step: Protocol stage the transmission belongs to.
        link_from: Source location id.
        link_to: Destination location id.
        secure: Sent over secure link or co-located hand-off.
        observable: What a link observer sees, empty for secure.
        note: Free-form marker, like `part 1` or `completion`.
        hidden: Ground truth: keys, plaintext, true states.
    """

    step: int
    link_from: str
    link_to: str
    secure: bool
    observable: str
    note: str = ""
    hidden: Dict[str, str] = field(
        default_factory=dict, compare=False, hash=False
    )

    @property
    def link(self: "Event") -> Tuple[str, str]:
        """Directed link as (`from`, `to`) pair."""
        return self.link_from, self.link_to

    def to_record(self: "Event") -> Dict[str, Any]:
        """Serializable record, hidden part excluded."""
        return {
            "step": self.step,
            "link_from": self.link_from,
            "link_to": self.link_to,
            "secure": self.secure,
            "observable": self.observable,
            "note": self.note,
        }


class Transcript(object):
    """Ordered event log of the single run."""

    def __init__(self: "Transcript") -> None:
        self.events: List[Event] = []

    def send(
        self: "Transcript",
        step: int,
        src: str,
        dst: str,
        observable: str,
        note: str = "",
        **hidden: str,
    ) -> Event:
        """
        Record insecure transmission.

        Args:
            step: Protocol stage.
            src: Source location id.
            dst: Destination location id.
            observable: Rendered payload as seen on the link.
            note: Optional marker.
            hidden: Ground truth values.

        Returns:
            Recorded event.
        """
        ev = Event(
            step=step,
            link_from=src,
            link_to=dst,
            secure=False,
            observable=observable,
            note=note,
            hidden=dict(hidden),
        )
        self.events.append(ev)
        return ev

    def handoff(
        self: "Transcript",
        step: int,
        src: str,
        dst: str,
        note: str = NOTE_HANDOFF,
        **hidden: str,
    ) -> Event:
        """
        Record secure hand-off.

        Hand-off content goes to the hidden part only.
        """
        ev = Event(
            step=step,
            link_from=src,
            link_to=dst,
            secure=True,
            observable="",
            note=note,
            hidden=dict(hidden),
        )
        self.events.append(ev)
        return ev

    def insecure(self: "Transcript") -> List[Event]:
        """All insecure transmissions."""
        return [e for e in self.events if not e.secure]

    def stage_events(self: "Transcript") -> List[Event]:
        """Insecure transmissions of the protocol stages proper."""
        return [e for e in self.insecure() if e.note not in _AUX_NOTES]

    def to_records(self: "Transcript") -> List[Dict[str, Any]]:
        """Serializable records."""
        return [e.to_record() for e in self.events]

    def to_jsonl(self: "Transcript") -> str:
        """Line-delimited JSON, one record per event."""
        return "".join(
            json.dumps(r, separators=(",", ":")) + "\n"
            for r in self.to_records()
        )

    def digest(self: "Transcript") -> str:
        """SHA-256 of the line-delimited JSON."""
        return hashlib.sha256(self.to_jsonl().encode()).hexdigest()

    def __iter__(self: "Transcript") -> Iterator[Event]:
        """Iterate events in order."""
        return iter(self.events)

    def __len__(self: "Transcript") -> int:
        """Number of events."""
        return len(self.events)


@dataclass
class RunResult(object):
    """
    Outcome of the single protocol run.

    Args:
        plaintext: Data sent by A.
        recovered: Data restored by B.
        transcript: Run transcript.
        detected: Receiver noticed tampering.
    """

    plaintext: Payload
    recovered: Payload
    transcript: Transcript
    detected: bool = False

    @property
    def success(self: "RunResult") -> bool:
        """Recovered data equals the plaintext."""
        return self.recovered == self.plaintext

    @property
    def bit_errors(self: "RunResult") -> int:
        """Number of wrong bits in the recovered data."""
        return sum(a != b for a, b in zip(self.plaintext, self.recovered))
