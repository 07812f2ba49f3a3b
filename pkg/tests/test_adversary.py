# ---------------------------------------------------------------------
# Gufo Three-Stage: Test Adversary
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

# Python modules
import math
from typing import Any, Dict, List, Tuple

# Third-party modules
import pytest
from sympy import primerange

# Gufo Labs modules
from gufo.threestage.adversary import (
    AdversaryKind,
    AdversaryModel,
    Strategy,
    adversary_view,
    best_guess,
    intercept_resend,
    modexp_bruteforce,
    pad_passive_recover,
)
from gufo.threestage.error import AttackError, TopologyError
from gufo.threestage.leakage import mitm_multipath_detect
from gufo.threestage.payload import Payload
from gufo.threestage.protocols import (
    Variant,
    run_quantum_three_stage,
    run_split_path,
    run_three_stage,
)
from gufo.threestage.qubit import ONE, ZERO, QubitState
from gufo.threestage.topology import (
    Figure,
    LinkRef,
    build_figure,
    build_multipath,
)
from gufo.threestage.transforms import (
    Family,
    ModExpKey,
    PadKey,
    modexp_payload,
    sample_key,
)

from .util import as_str, rng

N_TRIALS = 10_000
N_DETECT = 200


def bits(s: str) -> Payload:
    return Payload.from_str(s)


def pad(s: str) -> PadKey:
    return PadKey(pad=bits(s))


def test_pad_passive_recover_worked() -> None:
    r = pad_passive_recover(bits("0110"), bits("0000"), bits("1100"))
    assert r == bits("1010")


def test_pad_passive_recover_zeros() -> None:
    z = Payload.zeros(4)
    assert pad_passive_recover(z, z, z) == z


def test_pad_passive_recover_length() -> None:
    with pytest.raises(ValueError):
        pad_passive_recover(bits("0110"), bits("000"), bits("1100"))


def test_pad_passive_recover_transcripts() -> None:
    g = rng(20)
    for _ in range(1000):
        n = int(g.integers(1, 33))
        ka = sample_key(Family.PAD, g, n=n)
        kb = sample_key(Family.PAD, g, n=n)
        x = Payload.random(n, g)
        r = run_three_stage(Family.PAD, ka, kb, x)
        c1, c2, c3 = (bits(e.observable) for e in r.transcript.insecure())
        assert pad_passive_recover(c1, c2, c3) == x


@pytest.mark.parametrize(
    ("p", "c1", "c3", "c2", "expected"),
    [
        (23, 17, 5, 20, 7),
        (23, 17, 5, None, 5),
        (5, 3, 3, 2, 2),
        (5, 3, 3, None, 2),
    ],
)
def test_modexp_bruteforce(
    p: int, c1: int, c3: int, c2: Any, expected: int
) -> None:
    r = modexp_bruteforce(
        p,
        modexp_payload(c1, p),
        modexp_payload(c3, p),
        None if c2 is None else modexp_payload(c2, p),
    )
    assert r.value == expected


@pytest.mark.parametrize("p", list(primerange(5, 102)))
def test_modexp_bruteforce_desk_scale(p: int) -> None:
    g = rng(p)
    units = [e for e in range(1, p - 1) if math.gcd(e, p - 1) == 1]
    for _ in range(3):
        ea = units[int(g.integers(0, len(units)))]
        eb = units[int(g.integers(0, len(units)))]
        for v in range(1, p):
            x = modexp_payload(v, p)
            r = run_three_stage(
                Family.MODEXP, ModExpKey(p=p, e=ea), ModExpKey(p=p, e=eb), x
            )
            c1, c2, c3 = (bits(e.observable) for e in r.transcript.insecure())
            assert modexp_bruteforce(p, c1, c3, c2) == x


@pytest.mark.parametrize(
    ("p", "c1", "c3"),
    [(10007, 2, 3), (25, 2, 3)],
)
def test_modexp_bruteforce_invalid(p: int, c1: int, c3: int) -> None:
    with pytest.raises(AttackError):
        modexp_bruteforce(p, modexp_payload(c1, p), modexp_payload(c3, p))


def test_modexp_bruteforce_inconsistent() -> None:
    # 1 has order 1, 5 is a primitive root modulo 23
    with pytest.raises(AttackError):
        modexp_bruteforce(23, modexp_payload(1, 23), modexp_payload(5, 23))


def test_intercept_resend_basis() -> None:
    g = rng(21)
    for _ in range(100):
        assert intercept_resend(ZERO, g) == ZERO
        assert intercept_resend(ONE, g) == ONE


def test_intercept_resend_frequency() -> None:
    g = rng(22)
    s = QubitState(math.sqrt(0.5), math.sqrt(0.5))
    zeros = sum(1 for _ in range(N_TRIALS) if intercept_resend(s, g) == ZERO)
    assert 0.47 <= zeros / N_TRIALS <= 0.53


def test_tap_qubit_follows_intercept_resend() -> None:
    s = QubitState(math.sqrt(0.5), math.sqrt(0.5))
    tap = AdversaryModel.intercept_resend(stages=[1]).tap(rng(31))
    g = rng(31)
    for i in range(50):
        got = tap.transmit_qubit(1, "A1", "B1", i, s)
        assert got == intercept_resend(s, g)
        assert tap.measured[i] == int(got == ONE)
    assert tap.transmit_qubit(2, "B1", "A1", 0, s) == s


@pytest.mark.parametrize(
    "cfg",
    [
        {"kind": AdversaryKind.PASSIVE, "strategy": Strategy.FLIP},
        {"kind": AdversaryKind.PASSIVE, "mask": Payload.zeros(2)},
        {"kind": AdversaryKind.MITM, "strategy": Strategy.SUBSTITUTE},
        {"kind": AdversaryKind.MITM, "strategy": Strategy.FLIP},
        {"kind": AdversaryKind.PASSIVE, "stages": (0,)},
    ],
    ids=as_str,
)
def test_invalid_model(cfg: Dict[str, Any]) -> None:
    with pytest.raises(AttackError):
        AdversaryModel(**cfg)


@pytest.mark.parametrize(
    ("model", "step", "link", "expected"),
    [
        (AdversaryModel.none(), 1, ("A1", "B1"), False),
        (AdversaryModel.passive(), 2, ("B1", "A1"), True),
        (AdversaryModel.passive([("A1", "B1")]), 1, ("A1", "B1"), True),
        (AdversaryModel.passive([("A1", "B1")]), 2, ("B1", "A1"), False),
        (AdversaryModel.passive(stages=[2]), 2, ("B1", "A1"), True),
        (AdversaryModel.passive(stages=[2]), 3, ("A1", "B1"), False),
    ],
)
def test_targets(
    model: AdversaryModel, step: int, link: LinkRef, expected: bool
) -> None:
    assert model.targets(step, *link) is expected


@pytest.mark.parametrize(
    "links", [[("A1", "A2")], [("A1", "C1")], [("B1", "A1")]]
)
def test_check_topology(links: List[LinkRef]) -> None:
    t = build_figure(Figure.FIG4)
    with pytest.raises(TopologyError):
        AdversaryModel.passive(links).check_topology(t)


def test_tap_flip() -> None:
    model = AdversaryModel.mitm([("A1", "B1")], Strategy.FLIP, mask=bits("10"))
    tap = model.tap(rng())
    assert tap.transmit(1, "A1", "B1", bits("01")) == bits("11")
    assert tap.transmit(2, "B1", "A1", bits("01")) == bits("01")
    assert tap.tampered
    with pytest.raises(AttackError):
        tap.transmit(3, "A1", "B1", bits("0110"))


def test_tap_substitute() -> None:
    model = AdversaryModel.mitm(
        [("A1", "B1")], Strategy.SUBSTITUTE, payload=bits("0000")
    )
    tap = model.tap(rng())
    assert tap.transmit(1, "A1", "B1", bits("1010")) == bits("0000")
    assert [str(o.sent) for o in tap.observations] == ["1010"]
    with pytest.raises(AttackError):
        tap.transmit(1, "A1", "B1", bits("101"))


def test_tap_relay() -> None:
    tap = AdversaryModel.mitm([("A1", "B1")]).tap(rng())
    assert tap.transmit(1, "A1", "B1", bits("1010")) == bits("1010")
    assert not tap.tampered


def test_passive_does_not_touch_qubits() -> None:
    tap = AdversaryModel.passive().tap(rng())
    s = QubitState(0.6, 0.8)
    assert tap.transmit_qubit(1, "A1", "B1", 0, s) is s
    assert tap.measured == {}


def test_adversary_view() -> None:
    r = run_three_stage(Family.PAD, pad("1100"), pad("0110"), bits("1010"))
    model = AdversaryModel.passive([("A1", "B1")])
    assert [e.observable for e in adversary_view(model, r.transcript)] == [
        "0110",
        "1100",
    ]
    assert adversary_view(AdversaryModel.none(), r.transcript) == []


def _guess(
    model: AdversaryModel, family: Family, seed: int
) -> Tuple[Payload, Payload]:
    g = rng(seed)
    if family == Family.MODEXP:
        ka = sample_key(family, g, p=23)
        kb = sample_key(family, g, p=23)
        x = modexp_payload(int(g.integers(1, 23)), 23)
    else:
        ka = sample_key(family, g, n=8)
        kb = sample_key(family, g, n=8)
        x = Payload.random(8, g)
    tap = model.tap(g)
    r = run_three_stage(family, ka, kb, x, tap)
    return best_guess(model, family, r.transcript, tap, g, n=8, p=23), x


@pytest.mark.parametrize("family", [Family.PAD, Family.MODEXP])
def test_best_guess_passive_all(family: Family) -> None:
    for seed in range(100):
        guess, x = _guess(AdversaryModel.passive(), family, seed)
        assert guess == x


def test_best_guess_stage1_only_is_uniform() -> None:
    model = AdversaryModel.passive(stages=[1])
    hits = 0
    for seed in range(1000):
        guess, x = _guess(model, Family.PAD, seed)
        hits += guess == x
    assert hits < 20


def test_best_guess_parity_reconstruction() -> None:
    t = build_multipath(senders=2, parity=True)
    model = AdversaryModel.passive([("A2", "B1"), ("A3", "B1"), ("B1", "A3")])
    g = rng(23)
    for _ in range(100):
        ka = sample_key(Family.PAD, g, n=8)
        kb = sample_key(Family.PAD, g, n=8)
        x = Payload.random(8, g)
        tap = model.tap(g)
        r = run_split_path(t, Family.PAD, ka, kb, x, tap)
        assert best_guess(model, Family.PAD, r.transcript, tap, g) == x


def test_best_guess_rotation_measured() -> None:
    model = AdversaryModel.intercept_resend(stages=[1])
    tap = model.tap(rng(24))
    x = bits("01101001")
    r = run_quantum_three_stage(0.0, 1.0, x, tap, rng(25))
    guess = best_guess(model, Family.ROTATION, r.transcript, tap, rng(26))
    assert guess == x
    assert r.success


def test_mitm_baseline_undetected() -> None:
    adversary = AdversaryModel.mitm(
        [("A1", "B1")], Strategy.SUBSTITUTE, payload=bits("01010101")
    )
    report = mitm_multipath_detect(
        build_figure(Figure.FIG2),
        Variant.THREE_STAGE,
        adversary,
        N_DETECT,
        rng(27),
    )
    assert report.trials == N_DETECT
    assert report.detection_rate == 0.0
    assert report.success_rate < 1.0


@pytest.mark.parametrize("link", [("A1", "B1"), ("A2", "B1"), ("A3", "B1")])
def test_mitm_multipath_every_flip_detected(link: LinkRef) -> None:
    t = build_multipath(senders=2, parity=True)
    for j in range(4):
        mask = Payload.zeros(4).flip(j)
        adversary = AdversaryModel.mitm(
            [link], Strategy.FLIP, stages=[1], mask=mask
        )
        report = mitm_multipath_detect(
            t, Variant.SPLIT_PATH, adversary, N_DETECT, rng(j)
        )
        assert report.detection_rate == 1.0


def test_mitm_multipath_substitute_detected() -> None:
    t = build_multipath(senders=2, parity=True)
    adversary = AdversaryModel.mitm(
        [("A1", "B1")], Strategy.SUBSTITUTE, stages=[1], payload=bits("0000")
    )
    report = mitm_multipath_detect(
        t, Variant.SPLIT_PATH, adversary, N_DETECT, rng(30)
    )
    assert 0 < report.tampered < N_DETECT
    assert report.tampered_detections == report.tampered
    assert report.detection_rate == 1.0


def test_mitm_multipath_relay() -> None:
    t = build_multipath(senders=2, parity=True)
    adversary = AdversaryModel.mitm([("A1", "B1")])
    report = mitm_multipath_detect(
        t, Variant.SPLIT_PATH, adversary, N_DETECT, rng(28)
    )
    assert report.detection_rate == 0.0
    assert report.success_rate == 1.0


@pytest.mark.parametrize(
    ("link", "expected"), [(("A1", "B1"), 0.0), (("A2", "B1"), 1.0)]
)
def test_mitm_disclosed_segment(link: LinkRef, expected: float) -> None:
    adversary = AdversaryModel.mitm(
        [link], Strategy.FLIP, stages=[1], mask=bits("0001")
    )
    report = mitm_multipath_detect(
        build_figure(Figure.FIG6),
        Variant.SPLIT_PATH,
        adversary,
        N_DETECT,
        rng(29),
        disclose=2,
    )
    assert report.detection_rate == expected


def test_mitm_unknown_link() -> None:
    adversary = AdversaryModel.mitm([("A9", "B1")])
    with pytest.raises(TopologyError):
        mitm_multipath_detect(
            build_figure(Figure.FIG2),
            Variant.THREE_STAGE,
            adversary,
            1,
            rng(),
        )
