# ---------------------------------------------------------------------
# Gufo Three-Stage: Test Protocol Engines
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

# Python modules
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

# Third-party modules
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Gufo Labs modules
from gufo.threestage.adversary import AdversaryModel, Strategy
from gufo.threestage.error import (
    FamilyMismatchError,
    IncompatiblePayloadError,
    NonCommutingKeysError,
    TopologyError,
)
from gufo.threestage.payload import Payload
from gufo.threestage.protocols import (
    Variant,
    chain_roles,
    expected_stage_events,
    run_chain_forward,
    run_quantum_three_stage,
    run_split_path,
    run_three_stage,
    run_two_stage,
    run_variant,
    split_roles,
    two_stage_roles,
)
from gufo.threestage.qubit import QubitState
from gufo.threestage.topology import (
    Figure,
    Link,
    Location,
    Topology,
    build_chain,
    build_figure,
    build_multipath,
)
from gufo.threestage.transcript import (
    NOTE_COLOCATED,
    NOTE_COMPLETION,
    NOTE_PARITY,
    QUBIT_MARKER,
    RunResult,
)
from gufo.threestage.transforms import (
    TAU,
    Family,
    ModExpKey,
    PadKey,
    TransformKey,
    modexp_payload,
    sample_key,
)

from .util import rng

N_ROUND_TRIP = 1000
N_BITS = 10_000


def bits(s: str) -> Payload:
    return Payload.from_str(s)


def pad(s: str) -> PadKey:
    return PadKey(pad=bits(s))


def observables(r: RunResult) -> List[str]:
    return [e.observable for e in r.transcript.insecure()]


@dataclass(frozen=True)
class ShiftKey(TransformKey):
    """Cyclic left shift followed by the pad."""

    pad: Payload
    shift: int = 1
    inverted: bool = False
    family = Family.PAD

    @property
    def structure(self: "ShiftKey") -> Tuple[int, ...]:
        return (len(self.pad),)

    def _rotate(self: "ShiftKey", x: Payload, s: int) -> Payload:
        s %= len(x)
        return Payload.from_bits(x.bits[s:] + x.bits[:s])

    def apply(self: "ShiftKey", x: Payload) -> Payload:
        if self.inverted:
            return self._rotate(x ^ self.pad, -self.shift)
        return self._rotate(x, self.shift) ^ self.pad

    def inverse(self: "ShiftKey") -> "ShiftKey":
        return ShiftKey(self.pad, self.shift, not self.inverted)

    def render(self: "ShiftKey") -> str:
        return f"{self.pad}<<{self.shift}"

    def domain_size(self: "ShiftKey") -> Optional[int]:
        return 1 << len(self.pad)

    def iter_domain(self: "ShiftKey") -> Iterator[Payload]:
        return PadKey(self.pad).iter_domain()


class Recorder(object):
    """Honest tap remembering every qubit in flight."""

    def __init__(self: "Recorder") -> None:
        self.states: List[QubitState] = []

    def transmit(
        self: "Recorder", step: int, src: str, dst: str, payload: Payload
    ) -> Payload:
        return payload

    def transmit_qubit(
        self: "Recorder",
        step: int,
        src: str,
        dst: str,
        index: int,
        state: QubitState,
    ) -> QubitState:
        self.states.append(state)
        return state


def test_three_stage_pad_worked() -> None:
    r = run_three_stage(Family.PAD, pad("1100"), pad("0110"), bits("1010"))
    assert observables(r) == ["0110", "0000", "1100"]
    assert [e.link for e in r.transcript] == [
        ("A1", "B1"),
        ("B1", "A1"),
        ("A1", "B1"),
    ]
    assert r.recovered == bits("1010")
    assert r.success
    assert not r.detected


def test_three_stage_modexp_worked() -> None:
    p = 23
    r = run_three_stage(
        Family.MODEXP,
        ModExpKey(p=p, e=5),
        ModExpKey(p=p, e=7),
        modexp_payload(7, p),
    )
    assert [bits(x).value for x in observables(r)] == [17, 20, 5]
    assert r.recovered.value == 7


def test_three_stage_identity() -> None:
    r = run_three_stage(Family.PAD, pad("0000"), pad("0000"), bits("1010"))
    assert observables(r) == ["1010", "1010", "1010"]


def test_three_stage_fig3() -> None:
    t = build_figure(Figure.FIG3)
    r = run_three_stage(
        Family.PAD, pad("1100"), pad("0110"), bits("1010"), topology=t
    )
    assert observables(r) == ["0110", "0000", "1100"]
    assert r.success


@given(
    x=st.lists(st.integers(0, 1), min_size=1, max_size=32),
    seed=st.integers(0, 2**32),
)
@settings(max_examples=200)
def test_three_stage_pad_algebra(x: List[int], seed: int) -> None:
    g = rng(seed)
    p = Payload.from_bits(x)
    ka = sample_key(Family.PAD, g, n=len(p))
    kb = sample_key(Family.PAD, g, n=len(p))
    assert isinstance(ka, PadKey)
    assert isinstance(kb, PadKey)
    r = run_three_stage(Family.PAD, ka, kb, p)
    c1, c2, c3 = (bits(s) for s in observables(r))
    assert c1 == p ^ ka.pad
    assert c2 == p ^ ka.pad ^ kb.pad
    assert c3 == p ^ kb.pad
    assert r.recovered == p


def test_non_commuting_rejected() -> None:
    ka, kb, x = ShiftKey(bits("0000")), pad("0110"), bits("1010")
    with pytest.raises(NonCommutingKeysError):
        run_three_stage(Family.PAD, ka, kb, x)
    # Same stages without the check do not recover the plaintext
    c3 = ka.inverse().apply(kb.apply(ka.apply(x)))
    assert kb.inverse().apply(c3) != x


def test_injected_commuting_accepted() -> None:
    r = run_three_stage(
        Family.PAD, ShiftKey(bits("1100"), shift=0), pad("0110"), bits("1010")
    )
    assert r.success


@pytest.mark.parametrize(
    ("family", "ka", "kb"),
    [
        (Family.PAD, pad("1100"), ModExpKey(p=23, e=5)),
        (Family.PAD, pad("1100"), pad("110")),
        (Family.MODEXP, ModExpKey(p=23, e=5), ModExpKey(p=29, e=3)),
        (Family.MODEXP, pad("1100"), pad("0110")),
    ],
)
def test_key_mismatch(
    family: Family, ka: TransformKey, kb: TransformKey
) -> None:
    with pytest.raises(NonCommutingKeysError):
        run_three_stage(family, ka, kb, bits("1010"))


def test_incompatible_payload() -> None:
    with pytest.raises(IncompatiblePayloadError):
        run_three_stage(Family.PAD, pad("1100"), pad("0110"), bits("101"))


def test_invalid_topology() -> None:
    t = Topology(
        locations=(Location("A1", "A"), Location("B1", "B")),
        links=(Link("A1", "B1", secure=True),),
    )
    with pytest.raises(TopologyError):
        run_three_stage(
            Family.PAD, pad("1"), pad("0"), bits("1"), topology=t
        )


def test_three_stage_needs_bidirectional() -> None:
    with pytest.raises(TopologyError):
        run_three_stage(
            Family.PAD,
            pad("1"),
            pad("0"),
            bits("1"),
            topology=build_chain(3),
        )


def test_chain_forward() -> None:
    t = build_figure(Figure.FIG4, chain_length=4)
    r = run_chain_forward(
        t, Family.PAD, pad("1100"), pad("0110"), bits("1010")
    )
    assert r.recovered == bits("1010")
    assert [e.link for e in r.transcript.insecure()] == [
        ("A1", "B1"),
        ("B1", "A2"),
        ("A2", "B2"),
    ]
    assert observables(r) == ["0110", "0000", "1100"]
    handoffs = [e for e in r.transcript if e.secure]
    assert [e.link for e in handoffs] == [("A1", "A2"), ("B1", "B2")]
    assert all(e.observable == "" for e in handoffs)


def test_chain_roles_spares() -> None:
    assert chain_roles(build_chain(7)) == ("A1", "B1", "A2", "B2")


def test_chain_forward_invalid_length() -> None:
    with pytest.raises(TopologyError):
        build_figure(Figure.FIG4, chain_length=2)


def test_chain_forward_wrong_topology() -> None:
    with pytest.raises(TopologyError):
        run_chain_forward(
            build_figure(Figure.FIG2),
            Family.PAD,
            pad("1100"),
            pad("0110"),
            bits("1010"),
        )


def test_chain_forward_modexp() -> None:
    with pytest.raises(FamilyMismatchError):
        run_chain_forward(
            build_chain(3),
            Family.MODEXP,
            ModExpKey(p=23, e=5),
            ModExpKey(p=23, e=7),
            modexp_payload(7, 23),
        )


def test_secure_handoffs_unobservable() -> None:
    t = build_chain(4)
    model = AdversaryModel.passive(links=[("A1", "A2")])
    with pytest.raises(TopologyError):
        model.check_topology(t)
    tap = model.tap(rng())
    run_chain_forward(
        t, Family.PAD, pad("1100"), pad("0110"), bits("1010"), tap
    )
    assert tap.observations == []


def test_two_stage() -> None:
    r = run_two_stage(Family.PAD, pad("1100"), pad("0110"), bits("1010"))
    assert observables(r) == ["0110", "0000"]
    assert r.recovered == bits("1010")
    assert len(r.transcript.stage_events()) == 2
    colocated = [e for e in r.transcript if e.note == NOTE_COLOCATED]
    assert [e.link for e in colocated] == [("A2", "B2")]
    assert colocated[0].secure


def test_two_stage_identity_b() -> None:
    r = run_two_stage(Family.PAD, pad("1100"), pad("0000"), bits("1010"))
    c1, c2 = observables(r)
    assert c1 == c2 == "0110"
    assert r.success


def test_two_stage_modexp() -> None:
    p = 23
    r = run_two_stage(
        Family.MODEXP,
        ModExpKey(p=p, e=5),
        ModExpKey(p=p, e=7),
        modexp_payload(7, p),
    )
    assert [bits(x).value for x in observables(r)] == [17, 20]
    assert r.recovered.value == 7


def test_two_stage_roles() -> None:
    assert two_stage_roles(build_figure(Figure.FIG5)) == (
        "A1",
        "B1",
        "A2",
        "B2",
    )


def test_two_stage_cross_family() -> None:
    with pytest.raises(NonCommutingKeysError):
        run_two_stage(
            Family.PAD, pad("11100"), ModExpKey(p=23, e=5), bits("10100")
        )


def test_split_path() -> None:
    t = build_figure(Figure.FIG6)
    r = run_split_path(t, Family.PAD, pad("1100"), pad("0110"), bits("1010"))
    parts = [e for e in r.transcript.insecure() if e.step == 1]
    assert [(e.link, e.observable) for e in parts] == [
        (("A1", "B1"), "01"),
        (("A2", "B1"), "10"),
    ]
    stage2 = [e for e in r.transcript.insecure() if e.step == 2]
    assert [(e.link, e.observable) for e in stage2] == [(("B1", "A3"), "0000")]
    completion = [e for e in r.transcript if e.note == NOTE_COMPLETION]
    assert [e.link for e in completion] == [("A1", "B1")]
    assert r.recovered == bits("1010")
    assert len(r.transcript.stage_events()) == 3


def test_split_path_parity() -> None:
    t = build_multipath(senders=2, parity=True)
    r = run_split_path(t, Family.PAD, pad("1100"), pad("0110"), bits("1010"))
    parity = [e for e in r.transcript.insecure() if e.note == NOTE_PARITY]
    assert [(e.link, e.observable) for e in parity] == [(("A3", "B1"), "11")]
    completion = [e for e in r.transcript if e.note == NOTE_COMPLETION]
    assert [e.link for e in completion] == [("A3", "B1")]
    assert r.success
    assert not r.detected
    assert len(r.transcript.stage_events()) == 3


def test_split_path_three_senders() -> None:
    t = build_multipath(senders=3, parity=True)
    roles = split_roles(t)
    assert roles.senders == ("A1", "A2", "A3")
    assert roles.ret == "A4"
    r = run_split_path(
        t, Family.PAD, pad("101010"), pad("011001"), bits("110100")
    )
    assert r.success
    assert len(r.transcript.stage_events()) == 4


def test_split_path_receivers() -> None:
    t = build_multipath(senders=2, parity=True, receivers=2)
    roles = split_roles(t)
    assert roles.senders == ("A1", "A2")
    assert roles.entries == ("B1", "B2")
    assert roles.receiver == "B1"
    r = run_split_path(t, Family.PAD, pad("1100"), pad("0110"), bits("1010"))
    parts = [
        (e.link, e.observable)
        for e in r.transcript.insecure()
        if e.note.startswith("part")
    ]
    assert parts == [(("A1", "B1"), "01"), (("A2", "B2"), "10")]
    relayed = [e.link for e in r.transcript if e.secure and e.step == 1]
    assert ("B2", "B1") in relayed
    assert r.success
    assert not r.detected
    assert len(r.transcript.stage_events()) == 3


def test_split_path_receivers_mitm_detected() -> None:
    t = build_multipath(senders=2, parity=True, receivers=2)
    tap = AdversaryModel.mitm(
        [("A2", "B2")], Strategy.FLIP, mask=bits("01")
    ).tap(rng())
    r = run_split_path(
        t, Family.PAD, pad("1100"), pad("0110"), bits("1010"), tap
    )
    assert r.detected
    assert not r.success


def test_split_path_partial_view() -> None:
    t = build_figure(Figure.FIG6)
    tap = AdversaryModel.passive(links=[("A1", "B1")], stages=[1]).tap(
        rng()
    )
    run_split_path(
        t, Family.PAD, pad("1100"), pad("0110"), bits("1010"), tap
    )
    assert [str(o.sent) for o in tap.observations] == ["01"]


def test_split_path_odd_length() -> None:
    with pytest.raises(IncompatiblePayloadError):
        run_split_path(
            build_figure(Figure.FIG6),
            Family.PAD,
            pad("110"),
            pad("011"),
            bits("101"),
        )


def test_split_path_wrong_topology() -> None:
    with pytest.raises(TopologyError):
        run_split_path(
            build_figure(Figure.FIG2),
            Family.PAD,
            pad("1100"),
            pad("0110"),
            bits("1010"),
        )


def test_split_path_mitm_detected() -> None:
    t = build_multipath(senders=2, parity=True)
    tap = AdversaryModel.mitm(
        [("A1", "B1")], Strategy.FLIP, mask=bits("10")
    ).tap(rng())
    r = run_split_path(
        t, Family.PAD, pad("1100"), pad("0110"), bits("1010"), tap
    )
    assert r.detected
    assert not r.success


def test_modexp_tampered_payload_detected() -> None:
    p = 23
    tap = AdversaryModel.mitm(
        [("A1", "B1")], Strategy.SUBSTITUTE, payload=bits("00000")
    ).tap(rng())
    r = run_three_stage(
        Family.MODEXP,
        ModExpKey(p=p, e=5),
        ModExpKey(p=p, e=7),
        modexp_payload(7, p),
        tap,
    )
    assert r.detected
    assert not r.success


def test_quantum_worked() -> None:
    r = run_quantum_three_stage(
        math.pi / 6, math.pi / 4, bits("0110"), None, rng()
    )
    assert r.recovered == bits("0110")
    assert len(r.transcript.stage_events()) == 12
    assert all(e.observable == QUBIT_MARKER for e in r.transcript)
    assert [e.link for e in r.transcript][:3] == [
        ("A1", "B1"),
        ("B1", "A1"),
        ("A1", "B1"),
    ]


def test_quantum_forward_chain() -> None:
    r = run_quantum_three_stage(
        1.0, 2.0, [1, 0], None, rng(), topology=build_chain(3)
    )
    assert r.success
    assert [e.link for e in r.transcript.insecure()][:3] == [
        ("A1", "B1"),
        ("B1", "A2"),
        ("A2", "B2"),
    ]
    assert [e.link for e in r.transcript if e.secure] == [
        ("A1", "A2"),
        ("B1", "B2"),
    ]


def test_quantum_zero_angles_basis() -> None:
    tap = Recorder()
    r = run_quantum_three_stage(0.0, 0.0, bits("0110"), tap, rng())
    assert r.success
    assert len(tap.states) == 12
    assert all(s.is_basis() for s in tap.states)


def test_quantum_per_bit_angles() -> None:
    g = rng(8)
    x = Payload.random(N_BITS, g)
    ta = g.uniform(0.0, TAU, size=N_BITS).tolist()
    tb = g.uniform(0.0, TAU, size=N_BITS).tolist()
    r = run_quantum_three_stage(ta, tb, x, None, g)
    assert r.bit_errors == 0


def test_quantum_angle_count() -> None:
    with pytest.raises(IncompatiblePayloadError):
        run_quantum_three_stage([0.1, 0.2], 0.3, bits("101"), None, rng())


@pytest.mark.parametrize(
    ("theta", "low", "high"),
    [
        (math.pi / 4, 0.48, 0.52),
        (0.0, 0.0, 0.0),
        (math.pi / 2, 0.0, 0.0),
    ],
)
def test_quantum_intercept_resend(
    theta: float, low: float, high: float
) -> None:
    g = rng(9)
    x = Payload.random(N_BITS, g)
    model = AdversaryModel.intercept_resend(links=[("A1", "B1")], stages=[1])
    tap = model.tap(rng(10))
    r = run_quantum_three_stage(theta, 0.7, x, tap, g)
    assert low <= r.bit_errors / N_BITS <= high
    assert len(tap.measured) == N_BITS


@pytest.mark.parametrize(
    ("variant", "figure", "family", "n"),
    [
        (Variant.THREE_STAGE, Figure.FIG2, Family.PAD, 8),
        (Variant.THREE_STAGE, Figure.FIG2, Family.MODEXP, 5),
        (Variant.THREE_STAGE, Figure.FIG3, Family.PAD, 8),
        (Variant.CHAIN_FORWARD, Figure.FIG4, Family.PAD, 8),
        (Variant.TWO_STAGE, Figure.FIG5, Family.PAD, 8),
        (Variant.TWO_STAGE, Figure.FIG5, Family.MODEXP, 5),
        (Variant.SPLIT_PATH, Figure.FIG6, Family.PAD, 8),
    ],
)
def test_round_trip(
    variant: Variant, figure: Figure, family: Family, n: int
) -> None:
    g = rng(12)
    t = build_figure(figure)
    expected = expected_stage_events(variant, n)
    for _ in range(N_ROUND_TRIP):
        ka = sample_key(family, g, n=n, p=23)
        kb = sample_key(family, g, n=n, p=23)
        if family == Family.MODEXP:
            x = modexp_payload(int(g.integers(1, 23)), 23)
        else:
            x = Payload.random(n, g)
        r = run_variant(variant, t, family, ka, kb, x)
        assert r.recovered == x
        assert len(r.transcript.stage_events()) == expected


def test_run_variant_quantum() -> None:
    with pytest.raises(FamilyMismatchError):
        run_variant(
            Variant.QUANTUM,
            build_figure(Figure.FIG2),
            Family.PAD,
            pad("1"),
            pad("0"),
            bits("1"),
        )


@pytest.mark.parametrize(
    ("variant", "expected"),
    [
        (Variant.THREE_STAGE, 3),
        (Variant.CHAIN_FORWARD, 3),
        (Variant.TWO_STAGE, 2),
        (Variant.SPLIT_PATH, 3),
        (Variant.QUANTUM, 24),
    ],
)
def test_expected_stage_events(variant: Variant, expected: int) -> None:
    assert expected_stage_events(variant, 8) == expected


def test_transcript_deterministic() -> None:
    def digest(seed: int) -> str:
        g = rng(seed)
        ka = sample_key(Family.PAD, g, n=16)
        kb = sample_key(Family.PAD, g, n=16)
        x = Payload.random(16, g)
        return run_three_stage(Family.PAD, ka, kb, x).transcript.digest()

    assert digest(42) == digest(42)
    assert digest(42) != digest(43)


def test_transcript_hides_secrets() -> None:
    r = run_three_stage(Family.PAD, pad("1100"), pad("0110"), bits("1010"))
    for rec in r.transcript.to_records():
        assert set(rec) == {
            "step",
            "link_from",
            "link_to",
            "secure",
            "observable",
            "note",
        }
    assert "1010" not in r.transcript.to_jsonl()
