# ---------------------------------------------------------------------
# Gufo Three-Stage: Topology
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""
Multi-located parties and the links between them.

A party is a set of locations joined by secure links. Links between
different parties are insecure. Locations of different parties
sharing the same `site` may hand data over locally.
"""

# Python modules
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Set, Tuple, Type

# Gufo Labs modules
from .error import TopologyError, UnknownLocationError

MIN_CHAIN_LENGTH = 3
MIN_SENDERS = 2

PARTY_A = "A"
PARTY_B = "B"


class Figure(str, Enum):
    """Reference geometries."""

    FIG2 = "fig2"
    FIG3 = "fig3"
    FIG4 = "fig4"
    FIG5 = "fig5"
    FIG6 = "fig6"


@dataclass(frozen=True)
class Location(object):
    """
    Physical location of a party.

    Args:
        id: Unique location id.
        owner: Party id.
        site: Optional physical site name.
    """

    id: str
    owner: str
    site: Optional[str] = None


@dataclass(frozen=True)
class Link(object):
    """
    Link between two locations.

    Args:
        src: Source location id.
        dst: Destination location id.
        secure: Secure link, not observable by adversaries.
        directed: Traffic flows from `src` to `dst` only.
    """

    src: str
    dst: str
    secure: bool = False
    directed: bool = True

    def allows(self: "Link", src: str, dst: str) -> bool:
        """Check the link carries traffic from `src` to `dst`."""
        if (self.src, self.dst) == (src, dst):
            return True
        return not self.directed and (self.dst, self.src) == (src, dst)

    def __str__(self: "Link") -> str:
        """Render as `A1->B1`, `A1<->B1`, or `A1<=>A2` for secure links."""
        if self.secure:
            arrow = "=>" if self.directed else "<=>"
        else:
            arrow = "->" if self.directed else "<->"
        return f"{self.src}{arrow}{self.dst}"


@dataclass(frozen=True)
class Violation(object):
    """
    Broken topology invariant.

    Args:
        code: Short machine-readable code.
        message: Human-readable description.
        element: Offending location, link, or party.
    """

    code: str
    message: str
    element: str


LinkRef = Tuple[str, str]


def _location_dict(loc: Location) -> Dict[str, Any]:
    r: Dict[str, Any] = {"id": loc.id, "owner": loc.owner}
    if loc.site:
        r["site"] = loc.site
    return r


def parse_link_ref(s: str) -> LinkRef:
    """
    Parse directed link reference.

    Args:
        s: Reference like `A1->B1`.

    Returns:
        Tuple of (`src`, `dst`).
    """
    src, sep, dst = (x.strip() for x in s.partition("->"))
    if not sep or not src or not dst or "->" in dst:
        msg = f"invalid link reference: {s!r}, expected 'SRC->DST'"
        raise TopologyError(msg)
    return src, dst


@dataclass(frozen=True)
class Topology(object):
    """
    Immutable graph of locations and links.

    Args:
        locations: All locations.
        links: All links.
        name: Optional geometry name.
    """

    locations: Tuple[Location, ...]
    links: Tuple[Link, ...]
    name: str = ""

    def location(self: "Topology", loc_id: str) -> Location:
        """
        Get location by id.

        Args:
            loc_id: Location id.

        Returns:
            Location instance.
        """
        for loc in self.locations:
            if loc.id == loc_id:
                return loc
        msg = f"unknown location: {loc_id}"
        raise UnknownLocationError(msg)

    def parties(self: "Topology") -> List[str]:
        """Sorted party ids."""
        return sorted({loc.owner for loc in self.locations})

    def party_locations(self: "Topology", owner: str) -> List[str]:
        """Sorted location ids of the party."""
        return sorted(loc.id for loc in self.locations if loc.owner == owner)

    def insecure_links(self: "Topology") -> List[Link]:
        """All insecure links."""
        return [x for x in self.links if not x.secure]

    def find_link(
        self: "Topology", src: str, dst: str, secure: bool = False
    ) -> Optional[Link]:
        """
        Find link carrying traffic from `src` to `dst`.

        Args:
            src: Source location id.
            dst: Destination location id.
            secure: Look for secure link when set, insecure otherwise.

        Returns:
            Link or None.
        """
        for link in self.links:
            if link.secure == secure and link.allows(src, dst):
                return link
        return None

    def insecure_out(self: "Topology", src: str) -> List[str]:
        """Sorted locations reachable from `src` by single insecure hop."""
        r: Set[str] = set()
        for link in self.insecure_links():
            for a, b in ((link.src, link.dst), (link.dst, link.src)):
                if a == src and link.allows(a, b):
                    r.add(b)
        return sorted(r)

    def insecure_in(self: "Topology", dst: str) -> List[str]:
        """Sorted locations sending to `dst` by single insecure hop."""
        return sorted(
            loc.id
            for loc in self.locations
            if loc.id != dst and self.find_link(loc.id, dst) is not None
        )

    def to_dict(self: "Topology") -> Dict[str, Any]:
        """Serialize to plain structure."""
        r: Dict[str, Any] = {}
        if self.name:
            r["name"] = self.name
        r["locations"] = [_location_dict(x) for x in self.locations]
        r["links"] = [
            {
                "from": x.src,
                "to": x.dst,
                "secure": x.secure,
                "directed": x.directed,
            }
            for x in self.links
        ]
        return r

    @classmethod
    def from_dict(cls: Type["Topology"], data: Dict[str, Any]) -> "Topology":
        """
        Deserialize from plain structure.

        Args:
            data: Structure produced by `to_dict`.

        Returns:
            Topology instance. Not validated.
        """
        try:
            locations = tuple(
                Location(
                    id=str(x["id"]),
                    owner=str(x["owner"]),
                    site=str(x["site"]) if x.get("site") else None,
                )
                for x in data["locations"]
            )
            links = tuple(
                Link(
                    src=str(x["from"]),
                    dst=str(x["to"]),
                    secure=bool(x.get("secure", False)),
                    directed=bool(x.get("directed", True)),
                )
                for x in data["links"]
            )
        except (KeyError, TypeError) as e:
            msg = f"malformed topology: {e}"
            raise TopologyError(msg) from e
        return cls(
            locations=locations, links=links, name=str(data.get("name", ""))
        )


def _secure_components(t: Topology, owner: str) -> int:
    """Count secure-connected components of the party."""
    ids = set(t.party_locations(owner))
    adj: Dict[str, Set[str]] = {x: set() for x in ids}
    for link in t.links:
        if link.secure and link.src in ids and link.dst in ids:
            adj[link.src].add(link.dst)
            adj[link.dst].add(link.src)
    seen: Set[str] = set()
    components = 0
    for start in sorted(ids):
        if start in seen:
            continue
        components += 1
        queue = deque([start])
        seen.add(start)
        while queue:
            for nxt in adj[queue.popleft()]:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return components


def validate(t: Topology) -> List[Violation]:
    """
    Check topology invariants.

    Args:
        t: Topology.

    Returns:
        List of violations, empty when the topology is valid.
    """
    r: List[Violation] = []
    owners: Dict[str, str] = {}
    for loc in t.locations:
        if loc.id in owners:
            r.append(
                Violation(
                    "duplicate_location", "duplicate location id", loc.id
                )
            )
        owners[loc.id] = loc.owner
    pairs: Set[Tuple[str, str]] = set()
    for link in t.links:
        label = str(link)
        if link.src not in owners or link.dst not in owners:
            r.append(Violation("unknown_location", "unknown location", label))
            continue
        if link.src == link.dst:
            r.append(Violation("self_loop", "link to itself", label))
            continue
        same = owners[link.src] == owners[link.dst]
        if link.secure and not same:
            r.append(
                Violation(
                    "secure_cross_party",
                    "secure link crosses party boundary",
                    label,
                )
            )
        elif not link.secure and same:
            r.append(
                Violation(
                    "insecure_inside_party",
                    "insecure link inside party",
                    label,
                )
            )
        elif not link.secure:
            pair = tuple(sorted((owners[link.src], owners[link.dst])))
            pairs.add((pair[0], pair[1]))
    parties = t.parties()
    for owner in parties:
        if _secure_components(t, owner) > 1:
            r.append(
                Violation(
                    "party_disconnected", "party not secure-connected", owner
                )
            )
    for i, a in enumerate(parties):
        for b in parties[i + 1 :]:
            if (a, b) not in pairs:
                r.append(
                    Violation(
                        "no_insecure_link",
                        "no insecure link between parties",
                        f"{a}-{b}",
                    )
                )
    return r


def insecure_paths(
    t: Topology, src: str, dst: str, max_len: int
) -> List[Tuple[str, ...]]:
    """
    Enumerate simple paths over insecure links.

    Args:
        t: Topology.
        src: Starting location id.
        dst: Final location id.
        max_len: Maximal number of links in path.

    Returns:
        Paths as location id tuples, in lexicographic order.
    """
    t.location(src)
    t.location(dst)
    r: List[Tuple[str, ...]] = []

    def walk(path: List[str]) -> None:
        if len(path) - 1 >= max_len:
            return
        for nxt in t.insecure_out(path[-1]):
            if nxt in path:
                continue
            if nxt == dst:
                r.append((*path, nxt))
                continue
            walk([*path, nxt])

    if src != dst:
        walk([src])
    return sorted(r)


def path_diversity(
    t: Topology, party_a: str, party_b: str, max_len: int
) -> int:
    """
    Count insecure paths from any location of one party to another.

    Args:
        t: Topology.
        party_a: Sending party.
        party_b: Receiving party.
        max_len: Maximal number of links in path.

    Returns:
        Number of distinct simple paths.
    """
    return sum(
        len(insecure_paths(t, a, b, max_len))
        for a in t.party_locations(party_a)
        for b in t.party_locations(party_b)
    )


def _secure_chain(ids: Iterable[str]) -> List[Link]:
    items = list(ids)
    return [
        Link(src=a, dst=b, secure=True, directed=False)
        for a, b in zip(items, items[1:])
    ]


def _secure_star(hub: str, ids: Iterable[str]) -> List[Link]:
    return [
        Link(src=hub, dst=x, secure=True, directed=False)
        for x in ids
        if x != hub
    ]


def build_chain(chain_length: int) -> Topology:
    """
    Build interlaced forward chain.

    Locations alternate between parties: `A1 -> B1 -> A2 -> B2 ...`.
    Each party's locations are joined by secure links. Three
    protocol stages occupy the first three forward links, further
    units are idle spares.

    Args:
        chain_length: Number of forward insecure links, at least 3.

    Returns:
        Topology instance.
    """
    if chain_length < MIN_CHAIN_LENGTH:
        msg = f"chain_length must be >= {MIN_CHAIN_LENGTH}, got {chain_length}"
        raise TopologyError(msg)
    ids: List[str] = []
    locations: List[Location] = []
    for i in range(chain_length + 1):
        owner = PARTY_A if i % 2 == 0 else PARTY_B
        loc_id = f"{owner}{i // 2 + 1}"
        ids.append(loc_id)
        locations.append(Location(id=loc_id, owner=owner))
    links = [Link(src=a, dst=b) for a, b in zip(ids, ids[1:])]
    links += _secure_chain(x for x in ids if x.startswith(PARTY_A))
    links += _secure_chain(x for x in ids if x.startswith(PARTY_B))
    return Topology(
        locations=tuple(locations),
        links=tuple(links),
        name=f"{Figure.FIG4.value}:{chain_length}",
    )


def build_multipath(
    senders: int = 2, parity: bool = False, receivers: int = 1
) -> Topology:
    """
    Build split-path geometry.

    `senders` locations of A (`A1..Ak`) send ciphertext parts to B.
    B is located at `B1..Bm`, sender `Ai` sends to `B((i-1) mod m + 1)`
    and the entry locations pass the parts to `B1` over B's secure
    links. `B1` replies to the return location `A(k+1)`. A1 is the
    secure hub of party A. With `parity` set the return location also
    gets an inbound link to B1 for the parity share and the completion
    leg.

    Args:
        senders: Number of sending A-locations, at least 2.
        parity: Add the parity/completion link.
        receivers: Number of receiving B-locations, `1..senders`.

    Returns:
        Topology instance.
    """
    if senders < MIN_SENDERS:
        msg = f"senders must be >= {MIN_SENDERS}, got {senders}"
        raise TopologyError(msg)
    if not 1 <= receivers <= senders:
        msg = f"receivers must be in range 1..{senders}, got {receivers}"
        raise TopologyError(msg)
    a_ids = [f"{PARTY_A}{i + 1}" for i in range(senders + 1)]
    b_ids = [f"{PARTY_B}{i + 1}" for i in range(receivers)]
    ret, rcv = a_ids[-1], b_ids[0]
    locations = [Location(id=x, owner=PARTY_A) for x in a_ids]
    locations += [Location(id=x, owner=PARTY_B) for x in b_ids]
    links = [
        Link(src=x, dst=b_ids[i % receivers])
        for i, x in enumerate(a_ids[:-1])
    ]
    links.append(Link(src=rcv, dst=ret))
    if parity:
        links.append(Link(src=ret, dst=rcv))
    links += _secure_star(a_ids[0], a_ids)
    links += _secure_star(rcv, b_ids)
    name = Figure.FIG6.value if senders == MIN_SENDERS else "multipath"
    name = f"{name}:{senders}"
    if receivers > 1:
        name = f"{name}x{receivers}"
    return Topology(
        locations=tuple(locations),
        links=tuple(links),
        name=f"{name}{'+parity' if parity else ''}",
    )


def build_figure(
    fig: Figure,
    *,
    chain_length: int = MIN_CHAIN_LENGTH,
    senders: int = MIN_SENDERS,
    parity: bool = False,
    satellites: int = 2,
    receivers: int = 1,
) -> Topology:
    """
    Build reference geometry.

    * `FIG2` - A1 and B1 joined by single bidirectional insecure link.
    * `FIG3` - FIG2 plus `satellites` secure agents per party at
      the party's site.
    * `FIG4` - interlaced forward chain, see `build_chain`.
    * `FIG5` - two forward links `A1 -> B1 -> A2`, A2 is co-located
      with B's agent B2 at site `S`.
    * `FIG6` - split-path geometry, see `build_multipath`.

    Args:
        fig: Figure.
        chain_length: FIG4 forward links.
        senders: FIG6 sending A-locations.
        parity: FIG6 parity/completion link.
        satellites: FIG3 agents per party.
        receivers: FIG6 receiving B-locations.

    Returns:
        Topology instance.
    """
    if fig == Figure.FIG2:
        return Topology(
            locations=(Location("A1", PARTY_A), Location("B1", PARTY_B)),
            links=(Link("A1", "B1", secure=False, directed=False),),
            name=fig.value,
        )
    if fig == Figure.FIG3:
        a_ids = [f"A{i + 1}" for i in range(satellites + 1)]
        b_ids = [f"B{i + 1}" for i in range(satellites + 1)]
        locations = [Location(x, PARTY_A, site=PARTY_A) for x in a_ids]
        locations += [Location(x, PARTY_B, site=PARTY_B) for x in b_ids]
        links = [Link("A1", "B1", secure=False, directed=False)]
        links += _secure_star("A1", a_ids) + _secure_star("B1", b_ids)
        return Topology(
            locations=tuple(locations), links=tuple(links), name=fig.value
        )
    if fig == Figure.FIG4:
        return build_chain(chain_length)
    if fig == Figure.FIG5:
        return Topology(
            locations=(
                Location("A1", PARTY_A),
                Location("B1", PARTY_B),
                Location("A2", PARTY_A, site="S"),
                Location("B2", PARTY_B, site="S"),
            ),
            links=(
                Link("A1", "B1"),
                Link("B1", "A2"),
                Link("A1", "A2", secure=True, directed=False),
                Link("B1", "B2", secure=True, directed=False),
            ),
            name=fig.value,
        )
    return build_multipath(
        senders=senders, parity=parity, receivers=receivers
    )
