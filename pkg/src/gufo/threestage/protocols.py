# ---------------------------------------------------------------------
# Gufo Three-Stage: Protocol engines
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""
Protocol engines.

Every engine takes the keys, the plaintext, and an optional adversary
tap, routes the stages over the topology, and returns `RunResult`
with the full transcript.

* `run_three_stage` - A and B bounce stages over one link.
* `run_chain_forward` - stages travel forward through interlaced
  locations.
* `run_two_stage` - A's agent co-located with B removes A's key.
* `run_split_path` - ciphertext parts travel over distinct links.
* `run_quantum_three_stage` - polarization rotations on qubits.
"""

# Python modules
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

# Third-party modules
import numpy as np

# Gufo Labs modules
from .coding import ShareSet, split, verify_parity
from .error import (
    FamilyMismatchError,
    IncompatiblePayloadError,
    NonCommutingKeysError,
    TopologyError,
)
from .payload import Payload
from .proto import TapProto
from .qubit import QubitState, encode_bit, measure, rotate
from .topology import (
    MIN_SENDERS,
    PARTY_A,
    PARTY_B,
    Figure,
    Topology,
    build_figure,
    validate,
)
from .transcript import (
    NOTE_COLOCATED,
    NOTE_COMPLETION,
    NOTE_PARITY,
    QUBIT_MARKER,
    RunResult,
    Transcript,
)
from .transforms import (
    Family,
    ModExpKey,
    PadKey,
    RotationKey,
    TransformKey,
    commutes_check,
)

COMMUTE_SAMPLES = 64
STAGES = 3
TWO_STAGES = 2

Angles = Union[float, Sequence[float]]


class Relay(object):
    """Honest channel: delivers everything unchanged."""

    def transmit(
        self: "Relay", step: int, src: str, dst: str, payload: Payload
    ) -> Payload:
        """Deliver payload as is."""
        return payload

    def transmit_qubit(
        self: "Relay",
        step: int,
        src: str,
        dst: str,
        index: int,
        state: QubitState,
    ) -> QubitState:
        """Deliver state as is."""
        return state


RELAY = Relay()


class _Tampered(Exception):
    """Receiver got payload the key cannot process."""

    def __init__(self: "_Tampered", payload: Payload) -> None:
        super().__init__()
        self.payload = payload


def _receive(key: TransformKey, payload: Payload) -> Payload:
    """Apply key to delivered payload, abort run when malformed."""
    try:
        return key.apply(payload)
    except IncompatiblePayloadError as e:
        raise _Tampered(payload) from e


def check_keys(
    family: Family, key_a: TransformKey, key_b: TransformKey
) -> None:
    """
    Check engine preconditions on the keys.

    Keys of the built-in families with the same parameters commute
    by construction. Any other key classes are verified with
    `commutes_check`.

    Args:
        family: Expected family.
        key_a: A's key.
        key_b: B's key.
    """
    if key_a.family != family or key_b.family != family:
        msg = (
            f"keys must be of {family.value} family, got "
            f"{key_a.family.value} and {key_b.family.value}"
        )
        raise NonCommutingKeysError(msg)
    if key_a.structure != key_b.structure:
        msg = f"key parameters differ: {key_a.structure} != {key_b.structure}"
        raise NonCommutingKeysError(msg)
    if type(key_a) is type(key_b) and type(key_a) in (
        PadKey,
        ModExpKey,
        RotationKey,
    ):
        return
    # Fixed seed, the check must not consume protocol randomness
    rng = np.random.default_rng(0)
    if not commutes_check(key_a, key_b, COMMUTE_SAMPLES, rng):
        msg = "keys do not commute"
        raise NonCommutingKeysError(msg)


def _checked(t: Topology) -> Topology:
    violations = validate(t)
    if violations:
        msg = "invalid topology: " + "; ".join(
            f"{v.message} ({v.element})" for v in violations
        )
        raise TopologyError(msg)
    return t


def _owner(t: Topology, loc_id: str) -> str:
    return t.location(loc_id).owner


def three_stage_roles(t: Topology) -> Tuple[str, str]:
    """
    Find the back-and-forth link of the three-stage protocol.

    Args:
        t: Topology.

    Returns:
        Tuple of (`A location`, `B location`) joined by a
        bidirectional insecure link.
    """
    for a in t.party_locations(PARTY_A):
        for b in t.party_locations(PARTY_B):
            if t.find_link(a, b) and t.find_link(b, a):
                return a, b
    msg = "topology has no bidirectional A-B link"
    raise TopologyError(msg)


def chain_roles(t: Topology) -> Tuple[str, str, str, str]:
    """
    Find the forward chain `A -> B -> A -> B`.

    Args:
        t: Topology.

    Returns:
        Tuple of (`a1`, `b1`, `a2`, `b2`) locations for stages 1-3.
    """
    for start in t.party_locations(PARTY_A):
        if t.insecure_in(start):
            continue
        path = [start]
        while len(path) < STAGES + 1:
            nxt = [x for x in t.insecure_out(path[-1]) if x not in path]
            if len(nxt) != 1:
                break
            path.append(nxt[0])
        owners = [_owner(t, x) for x in path]
        if owners == [PARTY_A, PARTY_B, PARTY_A, PARTY_B]:
            return path[0], path[1], path[2], path[3]
    msg = "topology is not a chain-forward geometry"
    raise TopologyError(msg)


def two_stage_roles(t: Topology) -> Tuple[str, str, str, str]:
    """
    Find two-stage geometry `A1 -> B1 -> A2`, A2 co-located with B2.

    Args:
        t: Topology.

    Returns:
        Tuple of (`a1`, `b1`, `a2`, `b2`).
    """
    for a1 in t.party_locations(PARTY_A):
        for b1 in t.insecure_out(a1):
            if _owner(t, b1) != PARTY_B:
                continue
            for a2 in t.insecure_out(b1):
                site = t.location(a2).site
                if a2 == a1 or _owner(t, a2) != PARTY_A or not site:
                    continue
                for b2 in t.party_locations(PARTY_B):
                    if b2 != b1 and t.location(b2).site == site:
                        return a1, b1, a2, b2
    msg = "topology is not a two-stage geometry"
    raise TopologyError(msg)


@dataclass(frozen=True)
class SplitRoles(object):
    """
    Split-path roles.

    Args:
        senders: A-locations sending ciphertext parts, first one is
            the hub holding the key.
        receiver: B-location reassembling the parts.
        ret: A-location receiving B's reply.
        parity: Return location has link to the receiver.
        entries: B-location each sender sends its part to.
    """

    senders: Tuple[str, ...]
    receiver: str
    ret: str
    parity: bool
    entries: Tuple[str, ...]


def split_roles(t: Topology) -> SplitRoles:
    """
    Find split-path geometry.

    Args:
        t: Topology.

    Returns:
        SplitRoles instance.
    """
    for rcv in t.party_locations(PARTY_B):
        back = [x for x in t.insecure_out(rcv) if _owner(t, x) == PARTY_A]
        if len(back) != 1:
            continue
        ret = back[0]
        entries: Dict[str, str] = {}
        others = [x for x in t.party_locations(PARTY_B) if x != rcv]
        for b in [rcv, *others]:
            for x in t.insecure_in(b):
                if x != ret and _owner(t, x) == PARTY_A:
                    entries.setdefault(x, b)
        if len(entries) >= MIN_SENDERS:
            return SplitRoles(
                senders=tuple(entries),
                receiver=rcv,
                ret=ret,
                parity=t.find_link(ret, rcv) is not None,
                entries=tuple(entries.values()),
            )
    msg = "topology is not a split-path geometry"
    raise TopologyError(msg)


def run_three_stage(
    family: Family,
    key_a: TransformKey,
    key_b: TransformKey,
    x: Payload,
    adversary: Optional[TapProto] = None,
    *,
    topology: Optional[Topology] = None,
) -> RunResult:
    """
    Run classical three-stage protocol.

    Stage 1 `f_A(x)` goes A -> B, stage 2 `f_B(f_A(x))` goes B -> A,
    stage 3 `f_B(x)` goes A -> B, and B removes `f_B`.

    Args:
        family: Transform family, Pad or ModExp.
        key_a: A's key.
        key_b: B's key.
        x: Plaintext.
        adversary: Adversary tap, honest channel when not set.
        topology: Geometry, FIG2 by default.

    Returns:
        RunResult instance.
    """
    check_keys(family, key_a, key_b)
    t = _checked(topology or build_figure(Figure.FIG2))
    a, b = three_stage_roles(t)
    tap = adversary or RELAY
    ts = Transcript()
    inv_a, inv_b = key_a.inverse(), key_b.inverse()
    c1 = key_a.apply(x)
    try:
        ts.send(1, a, b, str(c1), key=key_a.render(), plaintext=str(x))
        d1 = tap.transmit(1, a, b, c1)
        c2 = _receive(key_b, d1)
        ts.send(2, b, a, str(c2), key=key_b.render())
        d2 = tap.transmit(2, b, a, c2)
        c3 = _receive(inv_a, d2)
        ts.send(3, a, b, str(c3), key=inv_a.render())
        d3 = tap.transmit(3, a, b, c3)
        recovered = _receive(inv_b, d3)
    except _Tampered as e:
        return RunResult(x, e.payload, ts, detected=True)
    return RunResult(plaintext=x, recovered=recovered, transcript=ts)


def run_chain_forward(
    topology: Topology,
    family: Family,
    key_a: TransformKey,
    key_b: TransformKey,
    x: Payload,
    adversary: Optional[TapProto] = None,
) -> RunResult:
    """
    Run three-stage protocol over forward chain.

    Stages travel `A1 -> B1 -> A2 -> B2`. A1 hands its key to A2 and
    B1 hands its key to B2 over secure links.

    Args:
        topology: Chain-forward geometry (FIG4).
        family: Transform family, Pad only.
        key_a: A's key.
        key_b: B's key.
        x: Plaintext.
        adversary: Adversary tap, honest channel when not set.

    Returns:
        RunResult instance.
    """
    _pad_only(family, "chain-forward")
    check_keys(family, key_a, key_b)
    a1, b1, a2, b2 = chain_roles(_checked(topology))
    tap = adversary or RELAY
    ts = Transcript()
    inv_a, inv_b = key_a.inverse(), key_b.inverse()
    c1 = key_a.apply(x)
    try:
        ts.send(1, a1, b1, str(c1), key=key_a.render(), plaintext=str(x))
        d1 = tap.transmit(1, a1, b1, c1)
        ts.handoff(1, a1, a2, key=key_a.render())
        c2 = _receive(key_b, d1)
        ts.send(2, b1, a2, str(c2), key=key_b.render())
        d2 = tap.transmit(2, b1, a2, c2)
        ts.handoff(2, b1, b2, key=key_b.render())
        c3 = _receive(inv_a, d2)
        ts.send(3, a2, b2, str(c3))
        d3 = tap.transmit(3, a2, b2, c3)
        recovered = _receive(inv_b, d3)
    except _Tampered as e:
        return RunResult(x, e.payload, ts, detected=True)
    return RunResult(plaintext=x, recovered=recovered, transcript=ts)


def run_two_stage(
    family: Family,
    key_a: TransformKey,
    key_b: TransformKey,
    x: Payload,
    adversary: Optional[TapProto] = None,
    *,
    topology: Optional[Topology] = None,
) -> RunResult:
    """
    Run two-stage protocol.

    Stage 1 `f_A(x)` goes A1 -> B1, A1 conveys its key to A2 over
    secure link, stage 2 `f_B(f_A(x))` goes B1 -> A2. A2 hands the
    data and A's key to B's co-located agent B2, which removes `f_A`,
    then `f_B` learned from B1.

    Args:
        family: Transform family, Pad or ModExp.
        key_a: A's key.
        key_b: B's key.
        x: Plaintext.
        adversary: Adversary tap, honest channel when not set.
        topology: Geometry, FIG5 by default.

    Returns:
        RunResult instance.
    """
    check_keys(family, key_a, key_b)
    t = _checked(topology or build_figure(Figure.FIG5))
    a1, b1, a2, b2 = two_stage_roles(t)
    tap = adversary or RELAY
    ts = Transcript()
    inv_a, inv_b = key_a.inverse(), key_b.inverse()
    c1 = key_a.apply(x)
    try:
        ts.send(1, a1, b1, str(c1), key=key_a.render(), plaintext=str(x))
        d1 = tap.transmit(1, a1, b1, c1)
        ts.handoff(1, a1, a2, key=key_a.render())
        c2 = _receive(key_b, d1)
        ts.send(2, b1, a2, str(c2), key=key_b.render())
        d2 = tap.transmit(2, b1, a2, c2)
        ts.handoff(2, b1, b2, key=key_b.render())
        ts.handoff(
            2, a2, b2, note=NOTE_COLOCATED, data=str(d2), key=key_a.render()
        )
        recovered = _receive(inv_b, _receive(inv_a, d2))
    except _Tampered as e:
        return RunResult(x, e.payload, ts, detected=True)
    return RunResult(plaintext=x, recovered=recovered, transcript=ts)


def run_split_path(
    topology: Topology,
    family: Family,
    key_a: TransformKey,
    key_b: TransformKey,
    x: Payload,
    adversary: Optional[TapProto] = None,
) -> RunResult:
    """
    Run split-path protocol.

    `c = f_A(x)` is cut into contiguous parts, part `i` travels from
    the `i`-th sending A-location to its entry B-location, which
    passes it to the receiver. With the parity link present,
    the parity share of the parts travels from the return location
    and B checks it. B reassembles `c`, sends `f_B(c)` to the return
    location, which removes `f_A` and sends the result back to B for
    completion: over the parity link when present, via the hub
    otherwise.

    Args:
        topology: Split-path geometry (FIG6 or multipath).
        family: Transform family, Pad only.
        key_a: A's key.
        key_b: B's key.
        x: Plaintext, length divisible by the number of senders.
        adversary: Adversary tap, honest channel when not set.

    Returns:
        RunResult instance. `detected` is set when the parity check
        fails at B.
    """
    _pad_only(family, "split-path")
    check_keys(family, key_a, key_b)
    roles = split_roles(_checked(topology))
    hub, rcv, ret = roles.senders[0], roles.receiver, roles.ret
    tap = adversary or RELAY
    ts = Transcript()
    inv_a, inv_b = key_a.inverse(), key_b.inverse()
    c = key_a.apply(x)
    shares = split(c, len(roles.senders))
    parts = [s for s in shares.data_shares if s is not None]
    for sender, part in zip(roles.senders[1:], parts[1:]):
        ts.handoff(1, hub, sender, part=str(part))
    delivered: List[Payload] = []
    routes = zip(roles.senders, roles.entries, parts)
    for i, (sender, entry, part) in enumerate(routes):
        hidden = {"plaintext": str(x), "key": key_a.render()} if i == 0 else {}
        ts.send(1, sender, entry, str(part), note=f"part {i + 1}", **hidden)
        got = tap.transmit(1, sender, entry, part)
        if entry != rcv:
            ts.handoff(1, entry, rcv, part=str(got))
        delivered.append(got)
    parity: Optional[Payload] = None
    if roles.parity and shares.parity is not None:
        ts.handoff(1, hub, ret, parity=str(shares.parity))
        ts.send(1, ret, rcv, str(shares.parity), note=NOTE_PARITY)
        parity = tap.transmit(1, ret, rcv, shares.parity)
    ts.handoff(1, hub, ret, key=key_a.render())
    detected = parity is not None and not verify_parity(
        ShareSet(data_shares=tuple(delivered), parity=parity)
    )
    try:
        c2 = _receive(key_b, Payload.concat(delivered))
        ts.send(2, rcv, ret, str(c2), key=key_b.render())
        d2 = tap.transmit(2, rcv, ret, c2)
        y = _receive(inv_a, d2)
        if roles.parity:
            ts.send(3, ret, rcv, str(y), note=NOTE_COMPLETION)
            d3 = tap.transmit(3, ret, rcv, y)
        else:
            ts.handoff(3, ret, hub, data=str(y))
            ts.send(3, hub, rcv, str(y), note=NOTE_COMPLETION)
            d3 = tap.transmit(3, hub, rcv, y)
        recovered = _receive(inv_b, d3)
    except _Tampered as e:
        return RunResult(x, e.payload, ts, detected=True)
    return RunResult(
        plaintext=x, recovered=recovered, transcript=ts, detected=detected
    )


def _pad_only(family: Family, variant: str) -> None:
    if family != Family.PAD:
        msg = f"{variant} variant supports pad family only"
        raise FamilyMismatchError(msg)


def _angles(theta: Angles, n: int) -> List[float]:
    if isinstance(theta, (int, float)):
        return [float(theta)] * n
    r = [float(x) for x in theta]
    if len(r) != n:
        msg = f"expected {n} per-bit angles, got {len(r)}"
        raise IncompatiblePayloadError(msg)
    return r


def quantum_route(t: Topology) -> Tuple[List[Tuple[str, str]], bool]:
    """
    Route of the quantum stages.

    Args:
        t: Topology.

    Returns:
        Tuple of (`three (src, dst) stage links`, `forward chain flag`).
        Forward chain is preferred when the topology has one.
    """
    try:
        a1, b1, a2, b2 = chain_roles(t)
        return [(a1, b1), (b1, a2), (a2, b2)], True
    except TopologyError:
        a, b = three_stage_roles(t)
        return [(a, b), (b, a), (a, b)], False


def run_quantum_three_stage(
    theta_a: Angles,
    theta_b: Angles,
    bits: Union[Payload, Sequence[int]],
    adversary: Optional[TapProto],
    rng: np.random.Generator,
    *,
    topology: Optional[Topology] = None,
) -> RunResult:
    """
    Run quantum three-stage protocol.

    Every bit is encoded as basis state, rotated by `theta_a` (stage
    1), by `theta_b` (stage 2), by `-theta_a` (stage 3). The receiver
    rotates by `-theta_b` and measures.

    Args:
        theta_a: A's angle, or per-bit angles.
        theta_b: B's angle, or per-bit angles.
        bits: Plaintext bits, non-empty.
        adversary: Adversary tap, honest channel when None.
        rng: Receiver's measurement randomness.
        topology: Geometry, FIG2 by default. Forward chain (FIG4)
            sends photons in single direction.

    Returns:
        RunResult instance.
    """
    x = bits if isinstance(bits, Payload) else Payload.from_bits(bits)
    n = len(x)
    ta, tb = _angles(theta_a, n), _angles(theta_b, n)
    t = _checked(topology or build_figure(Figure.FIG2))
    route, forward = quantum_route(t)
    tap = adversary or RELAY
    ts = Transcript()
    if forward:
        ts.handoff(1, route[0][0], route[2][0], key=_render_angles(ta))
        ts.handoff(2, route[1][0], route[2][1], key=_render_angles(tb))
    out: List[int] = []
    for i, b in enumerate(x):
        state = encode_bit(b)
        for step, ((src, dst), angle) in enumerate(
            zip(route, (ta[i], tb[i], -ta[i])), start=1
        ):
            state = rotate(state, angle)
            ts.send(
                step,
                src,
                dst,
                QUBIT_MARKER,
                note=f"bit {i}",
                state=state.render(),
            )
            state = tap.transmit_qubit(step, src, dst, i, state)
        bit, _ = measure(rotate(state, -tb[i]), rng)
        out.append(bit)
    return RunResult(
        plaintext=x, recovered=Payload.from_bits(out), transcript=ts
    )


def _render_angles(angles: Sequence[float]) -> str:
    return ",".join(format(a, ".12g") for a in angles)


class Variant(str, Enum):
    """Protocol variants."""

    THREE_STAGE = "three_stage"
    CHAIN_FORWARD = "chain_forward"
    TWO_STAGE = "two_stage"
    SPLIT_PATH = "split_path"
    QUANTUM = "quantum"


def expected_stage_events(variant: Variant, n_bits: int, k: int = 2) -> int:
    """
    Number of insecure stage transmissions of the single run.

    Args:
        variant: Protocol variant.
        n_bits: Payload length, used by the quantum variant.
        k: Number of ciphertext parts, used by the split-path variant.

    Returns:
        Expected `len(transcript.stage_events())`.
    """
    if variant == Variant.TWO_STAGE:
        return TWO_STAGES
    if variant == Variant.SPLIT_PATH:
        return k + 1
    if variant == Variant.QUANTUM:
        return STAGES * n_bits
    return STAGES


def run_variant(
    variant: Variant,
    topology: Topology,
    family: Family,
    key_a: TransformKey,
    key_b: TransformKey,
    x: Payload,
    adversary: Optional[TapProto] = None,
) -> RunResult:
    """
    Run classical protocol variant over the topology.

    Args:
        variant: Classical protocol variant.
        topology: Geometry.
        family: Transform family.
        key_a: A's key.
        key_b: B's key.
        x: Plaintext.
        adversary: Adversary tap.

    Returns:
        RunResult instance.
    """
    if variant == Variant.THREE_STAGE:
        return run_three_stage(
            family, key_a, key_b, x, adversary, topology=topology
        )
    if variant == Variant.CHAIN_FORWARD:
        return run_chain_forward(topology, family, key_a, key_b, x, adversary)
    if variant == Variant.TWO_STAGE:
        return run_two_stage(
            family, key_a, key_b, x, adversary, topology=topology
        )
    if variant == Variant.SPLIT_PATH:
        return run_split_path(topology, family, key_a, key_b, x, adversary)
    msg = f"{variant.value} is not a classical variant"
    raise FamilyMismatchError(msg)
