# ---------------------------------------------------------------------
# Gufo Three-Stage: Scenario configuration
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""
Scenario configuration.

Scenario is a YAML document, field names follow `ScenarioConfig`:

``` yaml
variant: three_stage
family: pad
family_params:
  n: 8
topology:
  figure: fig2
adversary:
  kind: passive
  links: all
trials: 1000
seed: 42
```

`parse_config` reports every problem found, each with the line of
the offending key.
"""

# Python modules
import math
from dataclasses import dataclass, field
from typing import (
    Any,
    Dict,
    List,
    Optional,
    Set,
    Tuple,
    Type,
    TypeVar,
    Union,
)

# Third-party modules
import numpy as np
import yaml
from sympy import isprime

# Gufo Labs modules
from .adversary import AdversaryKind, AdversaryModel, Strategy
from .error import (
    AttackError,
    ConfigError,
    ConfigIssue,
    ThreeStageError,
    TopologyError,
)
from .payload import Payload
from .protocols import Variant, run_variant
from .topology import (
    MIN_CHAIN_LENGTH,
    MIN_SENDERS,
    Figure,
    Topology,
    build_figure,
    parse_link_ref,
    validate,
)
from .transforms import (
    MIN_PRIME,
    Family,
    modexp_payload,
    modexp_width,
    sample_key,
)

DEFAULT_TRIALS = 1000
DEFAULT_N = 8
DEFAULT_P = 23
MAX_SEED = 2**64 - 1
ALL_LINKS = "all"
UNIFORM = "uniform"

# Default figure goes first
FIGURES: Dict[Variant, Tuple[Figure, ...]] = {
    Variant.THREE_STAGE: (Figure.FIG2, Figure.FIG3),
    Variant.CHAIN_FORWARD: (Figure.FIG4,),
    Variant.TWO_STAGE: (Figure.FIG5,),
    Variant.SPLIT_PATH: (Figure.FIG6,),
    Variant.QUANTUM: (Figure.FIG2, Figure.FIG3, Figure.FIG4),
}

_TOP_KEYS = (
    "variant",
    "family",
    "family_params",
    "topology",
    "adversary",
    "coding",
    "trials",
    "seed",
    "per_bit_keys",
)

E = TypeVar("E", Variant, Family, Figure, AdversaryKind, Strategy)
Path = Tuple[str, ...]


@dataclass(frozen=True)
class FamilyParams(object):
    """
    Transform family parameters.

    Args:
        n: Payload bits (Pad) or qubits per trial (Rotation).
        p: Prime modulus (ModExp).
        angles: Fixed `(theta_a, theta_b)`, uniform random when None.
    """

    n: int = DEFAULT_N
    p: int = DEFAULT_P
    angles: Optional[Tuple[float, float]] = None


@dataclass(frozen=True)
class TopologyConfig(object):
    """
    Geometry selection.

    Args:
        figure: Reference geometry, None for custom topology.
        chain_length: FIG4 forward links.
        senders: FIG6 sending A-locations.
        receivers: FIG6 receiving B-locations.
        custom: Explicit topology.
    """

    figure: Optional[Figure] = None
    chain_length: int = MIN_CHAIN_LENGTH
    senders: int = MIN_SENDERS
    receivers: int = 1
    custom: Optional[Topology] = None


@dataclass(frozen=True)
class CodingConfig(object):
    """
    Multi-channel coding and check segment.

    Args:
        enabled: Send the parity share of the ciphertext parts.
        k: Number of data shares.
        disclose: Plaintext bits compared by the parties after the run.
    """

    enabled: bool = False
    k: int = MIN_SENDERS
    disclose: int = 0


@dataclass(frozen=True)
class ScenarioConfig(object):
    """
    Reproducible experiment.

    Args:
        variant: Protocol variant.
        family: Transform family.
        seed: Root of all trial randomness.
        family_params: Family parameters.
        topology: Geometry.
        adversary: Adversary model.
        coding: Coding settings.
        trials: Number of independent runs.
        per_bit_keys: Fresh key per bit.
    """

    variant: Variant
    family: Family
    seed: int
    family_params: FamilyParams = field(default_factory=FamilyParams)
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    adversary: AdversaryModel = field(default_factory=AdversaryModel)
    coding: CodingConfig = field(default_factory=CodingConfig)
    trials: int = DEFAULT_TRIALS
    per_bit_keys: bool = False

    @property
    def payload_bits(self: "ScenarioConfig") -> int:
        """Plaintext length of the single trial."""
        if self.family == Family.MODEXP:
            return modexp_width(self.family_params.p)
        return self.family_params.n

    def build_topology(self: "ScenarioConfig") -> Topology:
        """
        Build the scenario's topology.

        Returns:
            Custom topology, or the reference figure. FIG6 gets the
            parity link when coding is enabled.
        """
        tc = self.topology
        if tc.custom is not None:
            return tc.custom
        return build_figure(
            tc.figure or FIGURES[self.variant][0],
            chain_length=tc.chain_length,
            senders=tc.senders,
            parity=self.coding.enabled,
            receivers=tc.receivers,
        )


def _key_lines(
    node: Optional[yaml.Node], prefix: Path = ()
) -> Dict[Path, int]:
    """Map key paths to 1-based lines."""
    r: Dict[Path, int] = {}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = (*prefix, str(k.value))
            r[path] = k.start_mark.line + 1
            r.update(_key_lines(v, path))
    return r


class _Reader(object):
    """Collects issues while reading the plain structure."""

    def __init__(self: "_Reader", lines: Dict[Path, int]) -> None:
        self.lines = lines
        self.issues: List[ConfigIssue] = []

    def issue(self: "_Reader", path: Path, message: str) -> None:
        p = path
        while p and p not in self.lines:
            p = p[:-1]
        self.issues.append(ConfigIssue(self.lines.get(p, 0), message))

    def section(
        self: "_Reader", data: Dict[str, Any], key: str, known: Tuple[str, ...]
    ) -> Dict[str, Any]:
        value = data.get(key)
        if value is None:
            return {}
        if not isinstance(value, dict):
            self.issue((key,), f"{key} must be a mapping")
            return {}
        for k in value:
            if k not in known:
                self.issue((key, str(k)), f"unknown key {key}.{k}")
        return value

    def enum(
        self: "_Reader", path: Path, value: Any, kind: Type[E]
    ) -> Optional[E]:
        try:
            return kind(value)
        except ValueError:
            expected = ", ".join(x.value for x in kind)
            self.issue(
                path, f"unknown {path[-1]} {value!r}, expected: {expected}"
            )
            return None

    def integer(
        self: "_Reader", path: Path, value: Any, minimum: int, maximum: int
    ) -> Optional[int]:
        if isinstance(value, bool) or not isinstance(value, int):
            self.issue(path, f"{'.'.join(path)} must be integer")
            return None
        if not minimum <= value <= maximum:
            self.issue(
                path,
                f"{'.'.join(path)} must be in {minimum}..{maximum}, "
                f"got {value}",
            )
            return None
        return value

    def flag(self: "_Reader", path: Path, value: Any) -> bool:
        if not isinstance(value, bool):
            self.issue(path, f"{'.'.join(path)} must be true or false")
            return False
        return value

    def bits(self: "_Reader", path: Path, value: Any) -> Optional[Payload]:
        if not isinstance(value, str):
            self.issue(path, f"{'.'.join(path)}: quote the bit string")
            return None
        try:
            return Payload.from_str(value)
        except ThreeStageError as e:
            self.issue(path, f"{'.'.join(path)}: {e}")
            return None


def parse_config(text: str) -> ScenarioConfig:
    """
    Parse and validate scenario configuration.

    Args:
        text: YAML document.

    Returns:
        Validated ScenarioConfig with defaults filled in.

    Raises:
        ConfigError: with the list of all issues found.
    """
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else 0
        problem = getattr(e, "problem", None) or str(e)
        issue = ConfigIssue(line, f"malformed YAML: {problem}")
        raise ConfigError([issue]) from e
    if not isinstance(data, dict):
        raise ConfigError([ConfigIssue(1, "config must be a mapping")])
    reader = _Reader(_key_lines(root))
    config = _read(reader, data)
    if reader.issues or config is None:
        raise ConfigError(reader.issues)
    return config


def _read(r: _Reader, data: Dict[str, Any]) -> Optional[ScenarioConfig]:
    for k in data:
        if k not in _TOP_KEYS:
            r.issue((str(k),), f"unknown key {k}")
    variant = (
        r.enum(("variant",), data["variant"], Variant)
        if "variant" in data
        else None
    )
    if "variant" not in data:
        r.issue((), "variant required")
    family = _read_family(r, data, variant)
    seed: Optional[int] = None
    if data.get("seed") is None:
        r.issue((), "seed required (no wall-clock seeding)")
    else:
        seed = r.integer(("seed",), data["seed"], 0, MAX_SEED)
    trials = r.integer(
        ("trials",), data.get("trials", DEFAULT_TRIALS), 1, 2**31
    )
    per_bit_keys = r.flag(("per_bit_keys",), data.get("per_bit_keys", False))
    params = _read_family_params(r, data)
    topology = _read_topology(r, data, variant)
    coding = _read_coding(r, data, topology)
    adversary = _read_adversary(r, data)
    if (
        variant is None
        or family is None
        or seed is None
        or trials is None
        or params is None
        or topology is None
        or coding is None
        or adversary is None
    ):
        return None
    config = ScenarioConfig(
        variant=variant,
        family=family,
        seed=seed,
        family_params=params,
        topology=topology,
        adversary=adversary,
        coding=coding,
        trials=trials,
        per_bit_keys=per_bit_keys,
    )
    _check(r, config)
    return config


def _read_family(
    r: _Reader, data: Dict[str, Any], variant: Optional[Variant]
) -> Optional[Family]:
    if "family" in data:
        return r.enum(("family",), data["family"], Family)
    return Family.ROTATION if variant == Variant.QUANTUM else Family.PAD


def _read_family_params(
    r: _Reader, data: Dict[str, Any]
) -> Optional[FamilyParams]:
    s = r.section(data, "family_params", ("n", "p", "angles"))
    n = r.integer(("family_params", "n"), s.get("n", DEFAULT_N), 1, 2**20)
    p = r.integer(
        ("family_params", "p"), s.get("p", DEFAULT_P), MIN_PRIME, 2**31
    )
    if p is not None and not isprime(p):
        r.issue(("family_params", "p"), f"p must be prime, got {p}")
        p = None
    angles: Optional[Tuple[float, float]] = None
    raw = s.get("angles", UNIFORM)
    if raw != UNIFORM:
        if (
            isinstance(raw, list)
            and len(raw) == 2  # noqa: PLR2004
            and all(
                isinstance(x, (int, float))
                and not isinstance(x, bool)
                and math.isfinite(x)
                for x in raw
            )
        ):
            angles = (float(raw[0]), float(raw[1]))
        else:
            r.issue(
                ("family_params", "angles"),
                "angles must be 'uniform' or [theta_a, theta_b]",
            )
            return None
    if n is None or p is None:
        return None
    return FamilyParams(n=n, p=p, angles=angles)


def _read_topology(
    r: _Reader, data: Dict[str, Any], variant: Optional[Variant]
) -> Optional[TopologyConfig]:
    s = r.section(
        data,
        "topology",
        (
            "figure",
            "chain_length",
            "senders",
            "receivers",
            "name",
            "locations",
            "links",
        ),
    )
    if "locations" in s or "links" in s:
        try:
            custom = Topology.from_dict(s)
        except TopologyError as e:
            r.issue(("topology",), str(e))
            return None
        for v in validate(custom):
            r.issue(("topology",), f"{v.message} ({v.element})")
        return TopologyConfig(custom=custom)
    figure: Optional[Figure] = None
    if "figure" in s:
        figure = r.enum(("topology", "figure"), s["figure"], Figure)
        if figure is None:
            return None
    elif variant is not None:
        figure = FIGURES[variant][0]
    chain_length = r.integer(
        ("topology", "chain_length"),
        s.get("chain_length", MIN_CHAIN_LENGTH),
        MIN_CHAIN_LENGTH,
        2**10,
    )
    senders = r.integer(
        ("topology", "senders"),
        s.get("senders", MIN_SENDERS),
        MIN_SENDERS,
        2**10,
    )
    receivers = r.integer(
        ("topology", "receivers"), s.get("receivers", 1), 1, 2**10
    )
    if chain_length is None or senders is None or receivers is None:
        return None
    return TopologyConfig(
        figure=figure,
        chain_length=chain_length,
        senders=senders,
        receivers=receivers,
    )


def _read_coding(
    r: _Reader, data: Dict[str, Any], topology: Optional[TopologyConfig]
) -> Optional[CodingConfig]:
    s = r.section(data, "coding", ("enabled", "k", "disclose"))
    enabled = r.flag(("coding", "enabled"), s.get("enabled", False))
    senders = topology.senders if topology else MIN_SENDERS
    k = r.integer(("coding", "k"), s.get("k", senders), MIN_SENDERS, 2**10)
    disclose = r.integer(
        ("coding", "disclose"), s.get("disclose", 0), 0, 2**20
    )
    if k is None or disclose is None:
        return None
    return CodingConfig(enabled=enabled, k=k, disclose=disclose)


def _read_links(
    r: _Reader, raw: Any
) -> Tuple[bool, Optional[Tuple[Tuple[str, str], ...]]]:
    path = ("adversary", "links")
    if raw is None or raw == ALL_LINKS:
        return True, None
    if not isinstance(raw, list) or not raw:
        r.issue(path, "links must be 'all' or list of 'SRC->DST'")
        return False, None
    try:
        return True, tuple(parse_link_ref(str(x)) for x in raw)
    except TopologyError as e:
        r.issue(path, str(e))
        return False, None


def _read_adversary(
    r: _Reader, data: Dict[str, Any]
) -> Optional[AdversaryModel]:
    s = r.section(
        data,
        "adversary",
        ("kind", "links", "stages", "strategy", "payload", "mask"),
    )
    kind = r.enum(
        ("adversary", "kind"),
        s.get("kind", AdversaryKind.NONE.value),
        AdversaryKind,
    )
    ok, links = _read_links(r, s.get("links"))
    stages: Optional[Tuple[int, ...]] = None
    if s.get("stages") is not None:
        raw = s["stages"]
        if not isinstance(raw, list) or not raw:
            r.issue(("adversary", "stages"), "stages must be list of integers")
            ok = False
        else:
            parsed = [r.integer(("adversary", "stages"), x, 1, 3) for x in raw]
            ok = ok and None not in parsed
            stages = tuple(x for x in parsed if x is not None)
    strategy = r.enum(
        ("adversary", "strategy"),
        s.get("strategy", Strategy.RELAY.value),
        Strategy,
    )
    payload = (
        r.bits(("adversary", "payload"), s["payload"])
        if "payload" in s
        else None
    )
    mask = r.bits(("adversary", "mask"), s["mask"]) if "mask" in s else None
    ok = ok and (payload is not None or "payload" not in s)
    ok = ok and (mask is not None or "mask" not in s)
    if not ok or kind is None or strategy is None:
        return None
    try:
        return AdversaryModel(
            kind=kind,
            links=links,
            stages=stages,
            strategy=strategy,
            payload=payload,
            mask=mask,
        )
    except AttackError as e:
        r.issue(("adversary",), str(e))
        return None


def _check(r: _Reader, c: ScenarioConfig) -> None:
    """Cross-field compatibility rules."""
    v, f = c.variant, c.family
    if v == Variant.QUANTUM and f != Family.ROTATION:
        r.issue(
            ("family",), f"variant quantum requires rotation, got {f.value}"
        )
    if f == Family.ROTATION and v != Variant.QUANTUM:
        r.issue(("family",), "family rotation requires variant quantum")
    if f == Family.MODEXP and v in (Variant.SPLIT_PATH, Variant.CHAIN_FORWARD):
        r.issue(
            ("family",),
            f"family modexp is incompatible with variant {v.value}",
        )
    tc = c.topology
    if tc.figure is not None and tc.figure not in FIGURES[v]:
        allowed = ", ".join(x.value for x in FIGURES[v])
        r.issue(
            ("topology", "figure"),
            f"figure {tc.figure.value} does not fit variant {v.value}, "
            f"expected: {allowed}",
        )
        return
    if v == Variant.SPLIT_PATH and tc.custom is None:
        if c.payload_bits % tc.senders:
            r.issue(
                ("family_params", "n"),
                f"n={c.payload_bits} must be divisible by "
                f"senders={tc.senders}",
            )
        if tc.receivers > tc.senders:
            r.issue(
                ("topology", "receivers"),
                f"receivers={tc.receivers} exceeds senders={tc.senders}",
            )
    if c.coding.enabled:
        if v != Variant.SPLIT_PATH or f != Family.PAD:
            r.issue(
                ("coding", "enabled"),
                "coding requires pad family split_path variant",
            )
        elif tc.custom is None and c.coding.k != tc.senders:
            r.issue(
                ("coding", "k"),
                f"k={c.coding.k} must equal senders={tc.senders}",
            )
    if c.coding.disclose > c.payload_bits:
        r.issue(
            ("coding", "disclose"),
            f"disclose={c.coding.disclose} exceeds payload "
            f"of {c.payload_bits} bits",
        )
    _check_adversary(r, c)


def _check_adversary(r: _Reader, c: ScenarioConfig) -> None:
    adv = c.adversary
    quantum = c.variant == Variant.QUANTUM
    if adv.kind == AdversaryKind.INTERCEPT_RESEND and not quantum:
        r.issue(
            ("adversary", "kind"), "intercept_resend requires variant quantum"
        )
    if adv.kind == AdversaryKind.MITM and quantum:
        r.issue(("adversary", "kind"), "mitm requires classical variant")
    if adv.links:
        try:
            adv.check_topology(c.build_topology())
        except TopologyError as e:
            r.issue(("adversary", "links"), str(e))
            return
    if adv.kind == AdversaryKind.MITM and not quantum:
        _check_widths(r, c)


def _carried_widths(c: ScenarioConfig) -> Set[int]:
    """Payload widths on the targeted links in the honest run."""
    adv = c.adversary
    rng = np.random.default_rng(c.seed)
    tap = AdversaryModel.passive(adv.links, adv.stages).tap(rng)
    n, p = c.payload_bits, c.family_params.p
    if c.family == Family.MODEXP:
        x = modexp_payload(int(rng.integers(1, p)), p)
    else:
        x = Payload.random(n, rng)
    key_a = sample_key(c.family, rng, n=n, p=p)
    key_b = sample_key(c.family, rng, n=n, p=p)
    run_variant(c.variant, c.build_topology(), c.family, key_a, key_b, x, tap)
    return {len(o.sent) for o in tap.observations}


def _check_widths(r: _Reader, c: ScenarioConfig) -> None:
    adv = c.adversary
    if adv.strategy == Strategy.SUBSTITUTE:
        name, value = "payload", adv.payload
    elif adv.strategy == Strategy.FLIP:
        name, value = "mask", adv.mask
    else:
        return
    if value is None or r.issues:
        return
    try:
        widths = _carried_widths(c)
    except ThreeStageError:
        return
    if any(w != len(value) for w in widths):
        carried = ", ".join(str(w) for w in sorted(widths))
        r.issue(
            ("adversary", name),
            f"adversary.{name} has {len(value)} bits, "
            f"targeted links carry {carried}",
        )


def config_to_dict(c: ScenarioConfig) -> Dict[str, Any]:
    """
    Plain structure in the configuration schema.

    Args:
        c: Scenario config.
    """
    fp = c.family_params
    tc = c.topology
    topology: Dict[str, Any]
    if tc.custom is not None:
        topology = tc.custom.to_dict()
    else:
        topology = {
            "figure": (tc.figure or FIGURES[c.variant][0]).value,
            "chain_length": tc.chain_length,
            "senders": tc.senders,
            "receivers": tc.receivers,
        }
    adv = c.adversary
    adversary: Dict[str, Any] = {
        "kind": adv.kind.value,
        "links": ALL_LINKS
        if adv.links is None
        else [f"{src}->{dst}" for src, dst in adv.links],
    }
    if adv.stages is not None:
        adversary["stages"] = list(adv.stages)
    adversary["strategy"] = adv.strategy.value
    if adv.payload is not None:
        adversary["payload"] = str(adv.payload)
    if adv.mask is not None:
        adversary["mask"] = str(adv.mask)
    angles: Union[str, List[float]] = (
        UNIFORM if fp.angles is None else list(fp.angles)
    )
    return {
        "variant": c.variant.value,
        "family": c.family.value,
        "family_params": {"n": fp.n, "p": fp.p, "angles": angles},
        "topology": topology,
        "adversary": adversary,
        "coding": {
            "enabled": c.coding.enabled,
            "k": c.coding.k,
            "disclose": c.coding.disclose,
        },
        "trials": c.trials,
        "seed": c.seed,
        "per_bit_keys": c.per_bit_keys,
    }


def serialize_config(c: ScenarioConfig) -> str:
    """
    Serialize config to YAML.

    `parse_config(serialize_config(c)) == c` for every valid config.

    Args:
        c: Scenario config.

    Returns:
        YAML document.
    """
    return yaml.safe_dump(config_to_dict(c), sort_keys=False)


def load_config(path: str) -> ScenarioConfig:
    """
    Read and parse configuration file.

    Args:
        path: File path.

    Returns:
        ScenarioConfig instance.
    """
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError([ConfigIssue(0, f"cannot read {path}: {e}")]) from e
    return parse_config(text)
