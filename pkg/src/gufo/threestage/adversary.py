# ---------------------------------------------------------------------
# Gufo Three-Stage: Adversary models
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""
Eavesdropper models and attacks.

`AdversaryModel` describes what the adversary does and where. Per
trial it builds `AdversaryTap`, which engines call on every insecure
transmission. After the run `best_guess` combines the family-specific
attacks over the observed traffic.

Example:
    ``` py
    model = AdversaryModel.passive()
    tap = model.tap(rng)
    result = run_three_stage(Family.PAD, ka, kb, x, tap)
    guess = best_guess(model, Family.PAD, result.transcript, tap, rng)
    ```
"""

# Python modules
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple, Type, TypeVar

# Third-party modules
import numpy as np
from sympy import isprime, mod_inverse
from sympy.ntheory import n_order

# Gufo Labs modules
from .coding import ShareSet, reconstruct
from .error import AttackError, TopologyError, UnrecoverableError
from .payload import Payload
from .qubit import ONE, QubitState, measure
from .topology import LinkRef, Topology
from .transcript import NOTE_PARITY, QUBIT_MARKER, Event, Transcript
from .transforms import Family, modexp_payload

DESK_SCALE = 10_000
PART_PREFIX = "part "

logger = logging.getLogger(__name__)

T = TypeVar("T")


class AdversaryKind(str, Enum):
    """Adversary kinds."""

    NONE = "none"
    PASSIVE = "passive"
    MITM = "mitm"
    INTERCEPT_RESEND = "intercept_resend"


class Strategy(str, Enum):
    """Man-in-the-middle strategies."""

    RELAY = "relay"
    SUBSTITUTE = "substitute"
    FLIP = "flip"


@dataclass(frozen=True)
class AdversaryModel(object):
    """
    Adversary description.

    Target transmissions are selected by directed `links` and by
    protocol `stages`; unset selector matches everything.

    Args:
        kind: Adversary kind.
        links: Targeted insecure links, None for all.
        stages: Targeted stages, None for all.
        strategy: MITM strategy.
        payload: Replacement for the `substitute` strategy.
        mask: Exclusive-or mask for the `flip` strategy.
    """

    kind: AdversaryKind = AdversaryKind.NONE
    links: Optional[Tuple[LinkRef, ...]] = None
    stages: Optional[Tuple[int, ...]] = None
    strategy: Strategy = Strategy.RELAY
    payload: Optional[Payload] = None
    mask: Optional[Payload] = None

    def __post_init__(self: "AdversaryModel") -> None:
        if self.kind != AdversaryKind.MITM and (
            self.strategy != Strategy.RELAY
            or self.payload is not None
            or self.mask is not None
        ):
            msg = "strategy is applicable to mitm adversary only"
            raise AttackError(msg)
        if self.strategy == Strategy.SUBSTITUTE and self.payload is None:
            msg = "substitute strategy requires payload"
            raise AttackError(msg)
        if self.strategy == Strategy.FLIP and self.mask is None:
            msg = "flip strategy requires mask"
            raise AttackError(msg)
        if self.stages is not None and any(s < 1 for s in self.stages):
            msg = f"stages must be >= 1, got {list(self.stages)}"
            raise AttackError(msg)

    @classmethod
    def none(cls: Type["AdversaryModel"]) -> "AdversaryModel":
        """No adversary."""
        return cls()

    @classmethod
    def passive(
        cls: Type["AdversaryModel"],
        links: Optional[Iterable[LinkRef]] = None,
        stages: Optional[Iterable[int]] = None,
    ) -> "AdversaryModel":
        """
        Passive recording adversary.

        Args:
            links: Observed links, all insecure links when not set.
            stages: Observed stages, all when not set.
        """
        return cls(
            kind=AdversaryKind.PASSIVE,
            links=_opt_tuple(links),
            stages=_opt_tuple(stages),
        )

    @classmethod
    def mitm(
        cls: Type["AdversaryModel"],
        links: Iterable[LinkRef],
        strategy: Strategy = Strategy.RELAY,
        *,
        stages: Optional[Iterable[int]] = None,
        payload: Optional[Payload] = None,
        mask: Optional[Payload] = None,
    ) -> "AdversaryModel":
        """
        Active adversary on the links.

        Args:
            links: Attacked links.
            strategy: What to deliver instead of the sent payload.
            stages: Attacked stages, all when not set.
            payload: Replacement, `substitute` only.
            mask: Exclusive-or mask, `flip` only.
        """
        return cls(
            kind=AdversaryKind.MITM,
            links=tuple(links),
            stages=_opt_tuple(stages),
            strategy=strategy,
            payload=payload,
            mask=mask,
        )

    @classmethod
    def intercept_resend(
        cls: Type["AdversaryModel"],
        links: Optional[Iterable[LinkRef]] = None,
        stages: Optional[Iterable[int]] = None,
    ) -> "AdversaryModel":
        """
        Quantum intercept-resend adversary.

        Args:
            links: Attacked links.
            stages: Attacked stages.
        """
        return cls(
            kind=AdversaryKind.INTERCEPT_RESEND,
            links=_opt_tuple(links),
            stages=_opt_tuple(stages),
        )

    @property
    def active(self: "AdversaryModel") -> bool:
        """Adversary is present."""
        return self.kind != AdversaryKind.NONE

    def targets(self: "AdversaryModel", step: int, src: str, dst: str) -> bool:
        """Check the transmission is within adversary's reach."""
        if not self.active:
            return False
        if self.links is not None and (src, dst) not in self.links:
            return False
        return self.stages is None or step in self.stages

    def check_topology(self: "AdversaryModel", t: Topology) -> None:
        """
        Check referenced links exist and are insecure.

        Args:
            t: Topology.
        """
        for src, dst in self.links or ():
            if t.find_link(src, dst) is not None:
                continue
            if t.find_link(src, dst, secure=True) is not None:
                msg = f"link {src}->{dst} is secure, adversary cannot reach it"
            else:
                msg = f"link {src}->{dst} not in topology"
            raise TopologyError(msg)

    def tap(
        self: "AdversaryModel", rng: np.random.Generator
    ) -> "AdversaryTap":
        """
        Build per-run tap.

        Args:
            rng: Adversary randomness.

        Returns:
            AdversaryTap instance.
        """
        return AdversaryTap(self, rng)


def _opt_tuple(items: Optional[Iterable[T]]) -> Optional[Tuple[T, ...]]:
    return None if items is None else tuple(items)


@dataclass(frozen=True)
class Observation(object):
    """
    Classical payload seen on the link.

    Args:
        step: Protocol stage.
        src: Source location id.
        dst: Destination location id.
        sent: Payload sent by the honest party.
        delivered: Payload delivered to `dst`.
    """

    step: int
    src: str
    dst: str
    sent: Payload
    delivered: Payload


class AdversaryTap(object):
    """
    Recording and tampering tap.

    Implements `TapProto`.

    Args:
        model: Adversary model.
        rng: Adversary randomness.
    """

    def __init__(
        self: "AdversaryTap",
        model: AdversaryModel,
        rng: np.random.Generator,
    ) -> None:
        self.model = model
        self.rng = rng
        self.observations: List[Observation] = []
        self.measured: Dict[int, int] = {}

    def transmit(
        self: "AdversaryTap", step: int, src: str, dst: str, payload: Payload
    ) -> Payload:
        """Record the payload and apply the MITM strategy."""
        if not self.model.targets(step, src, dst):
            return payload
        delivered = payload
        if self.model.kind == AdversaryKind.MITM:
            delivered = self._tamper(payload)
        self.observations.append(
            Observation(
                step=step, src=src, dst=dst, sent=payload, delivered=delivered
            )
        )
        return delivered

    def _tamper(self: "AdversaryTap", payload: Payload) -> Payload:
        strategy = self.model.strategy
        if strategy == Strategy.SUBSTITUTE and self.model.payload is not None:
            if len(self.model.payload) != len(payload):
                msg = (
                    f"substitute payload has {len(self.model.payload)} bits, "
                    f"link carries {len(payload)}"
                )
                raise AttackError(msg)
            return self.model.payload
        if strategy == Strategy.FLIP and self.model.mask is not None:
            if len(self.model.mask) != len(payload):
                msg = (
                    f"flip mask has {len(self.model.mask)} bits, "
                    f"link carries {len(payload)}"
                )
                raise AttackError(msg)
            return payload ^ self.model.mask
        return payload

    def transmit_qubit(
        self: "AdversaryTap",
        step: int,
        src: str,
        dst: str,
        index: int,
        state: QubitState,
    ) -> QubitState:
        """Measure and resend the qubit for intercept-resend adversary."""
        if (
            self.model.kind != AdversaryKind.INTERCEPT_RESEND
            or not self.model.targets(step, src, dst)
        ):
            return state
        collapsed = intercept_resend(state, self.rng)
        self.measured.setdefault(index, int(collapsed == ONE))
        return collapsed

    @property
    def tampered(self: "AdversaryTap") -> bool:
        """Any delivered payload differs from the sent one."""
        return any(x.sent != x.delivered for x in self.observations)


def pad_passive_recover(c1: Payload, c2: Payload, c3: Payload) -> Payload:
    """
    Combine three observed Pad-family stages.

    `(x ^ a) ^ (x ^ a ^ b) ^ (x ^ b) == x`.

    Args:
        c1: Stage 1.
        c2: Stage 2.
        c3: Stage 3.

    Returns:
        Plaintext.
    """
    return c1 ^ c2 ^ c3


def _residue(c: Payload, p: int) -> int:
    v = c.value
    if not 1 <= v <= p - 1:
        msg = f"observed residue {v} outside 1..{p - 1}"
        raise AttackError(msg)
    return v


def modexp_bruteforce(
    p: int, c1: Payload, c3: Payload, c2: Optional[Payload] = None
) -> Payload:
    """
    Recover ModExp plaintext by exhaustive search.

    With stage 2 observed, `c3 ^ eA == c2` pins A's exponent, and the
    plaintext is `c1 ^ (1 / eA)`. Without it, any `x` generating the same
    subgroup as `c1` and `c3` is consistent, the smallest is returned.

    Args:
        p: Prime modulus, at most 10^4.
        c1: Stage 1, `x^eA`.
        c3: Stage 3, `x^eB`.
        c2: Stage 2, `x^(eA * eB)`.

    Returns:
        Smallest consistent plaintext.
    """
    if p > DESK_SCALE:
        msg = f"p={p} is above desk scale ({DESK_SCALE})"
        raise AttackError(msg)
    if not isprime(p):
        msg = f"p={p} is not prime"
        raise AttackError(msg)
    v1, v3 = _residue(c1, p), _residue(c3, p)
    candidates: List[int] = []
    if c2 is not None:
        v2 = _residue(c2, p)
        for e in range(1, p - 1):
            if math.gcd(e, p - 1) == 1 and pow(v3, e, p) == v2:
                candidates.append(pow(v1, int(mod_inverse(e, p - 1)), p))
    else:
        order = n_order(v1, p)
        if n_order(v3, p) == order:
            candidates.append(
                next(x for x in range(1, p) if n_order(x, p) == order)
            )
    if not candidates:
        msg = "no plaintext consistent with the observed stages"
        raise AttackError(msg)
    return modexp_payload(min(candidates), p)


def intercept_resend(s: QubitState, rng: np.random.Generator) -> QubitState:
    """
    Measure qubit in the computational basis and resend.

    Args:
        s: In-flight state.
        rng: Adversary randomness.

    Returns:
        Collapsed basis state.
    """
    _, collapsed = measure(s, rng)
    return collapsed


def adversary_view(model: AdversaryModel, ts: Transcript) -> List[Event]:
    """
    Insecure transmissions within adversary's reach.

    Args:
        model: Adversary model.
        ts: Run transcript.

    Returns:
        Events in transcript order.
    """
    return [
        e for e in ts.insecure() if model.targets(e.step, *e.link)
    ]


def _stage1(ts: Transcript, view: List[Event]) -> Optional[Payload]:
    """Stage 1 ciphertext, reassembled from the observed parts."""
    seen = [e for e in view if e.step == 1]
    whole = [e for e in seen if not e.note]
    if whole:
        return Payload.from_str(whole[0].observable)
    k = sum(1 for e in ts.insecure() if e.note.startswith(PART_PREFIX))
    if not k:
        return None
    shares: List[Optional[Payload]] = [None] * k
    parity: Optional[Payload] = None
    for e in seen:
        if e.note == NOTE_PARITY:
            parity = Payload.from_str(e.observable)
        elif e.note.startswith(PART_PREFIX):
            shares[int(e.note[len(PART_PREFIX) :]) - 1] = Payload.from_str(
                e.observable
            )
    if all(x is None for x in shares):
        return None
    try:
        return reconstruct(ShareSet(data_shares=tuple(shares), parity=parity))
    except UnrecoverableError:
        return None


def _stage(view: List[Event], step: int) -> Optional[Payload]:
    for e in view:
        if e.step == step:
            return Payload.from_str(e.observable)
    return None


def uniform_guess(
    family: Family, n: int, p: int, rng: np.random.Generator
) -> Payload:
    """
    Uniform guess over the plaintext domain.

    Args:
        family: Transform family.
        n: Payload length, Pad and Rotation.
        p: Prime modulus, ModExp.
        rng: Adversary randomness.
    """
    if family == Family.MODEXP:
        return modexp_payload(int(rng.integers(1, p)), p)
    return Payload.random(n, rng)


def best_guess(
    model: AdversaryModel,
    family: Family,
    ts: Transcript,
    tap: AdversaryTap,
    rng: np.random.Generator,
    *,
    n: int = 8,
    p: int = 23,
) -> Payload:
    """
    Adversary's best plaintext guess after the run.

    * Pad: all three stages observed, possibly after reconstructing
      a missed part from the parity share: `pad_passive_recover`.
    * ModExp: stages 1 and 3 observed: `modexp_bruteforce`.
    * Rotation: measured bits, uniform for unmeasured ones.
    * Uniform guess otherwise.

    Args:
        model: Adversary model.
        family: Transform family.
        ts: Run transcript.
        tap: Tap used during the run.
        rng: Adversary randomness.
        n: Payload length.
        p: ModExp modulus.

    Returns:
        Guessed plaintext.
    """
    if family == Family.ROTATION:
        bits = [
            tap.measured.get(i, int(rng.integers(0, 2))) for i in range(n)
        ]
        return Payload.from_bits(bits)
    view = [
        e for e in adversary_view(model, ts) if e.observable != QUBIT_MARKER
    ]
    c1 = _stage1(ts, view)
    c2, c3 = _stage(view, 2), _stage(view, 3)
    if (
        family == Family.PAD
        and c1 is not None
        and c2 is not None
        and c3 is not None
    ):
        return pad_passive_recover(c1, c2, c3)
    if (
        family == Family.MODEXP
        and c1 is not None
        and c3 is not None
        and p <= DESK_SCALE
    ):
        try:
            return modexp_bruteforce(p, c1, c3, c2)
        except AttackError as e:
            logger.debug("ModExp attack failed: %s", e)
    return uniform_guess(family, n, p, rng)
