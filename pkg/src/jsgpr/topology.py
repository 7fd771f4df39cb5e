"""Terrestrial network topologies read from Topology Zoo GraphML files.

A :class:`Topology` is an undirected simple graph whose nodes carry
geographic coordinates and whose links carry a length, a capacity and a
propagation delay. Lengths are taken from the file when present and derived
from the endpoint coordinates otherwise; delays always follow from lengths.
"""
from __future__ import annotations

import json
import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    DisconnectedGraph,
    DuplicateEdge,
    EmptyGraph,
    MalformedXml,
    MissingCoordinates,
    UnknownNode,
)

EARTH_RADIUS_KM = 6371.0
PROPAGATION_SPEED_MPS = 2e8
DEFAULT_FALLBACK_CAPACITY_MBPS = 100.0

_GRAPHML_NS = "{http://graphml.graphdrawing.org/xmlns}"
_LENGTH_KEYS = ("length_km", "LinkLength", "length", "Length", "distance")
_UNIT_SCALE_MBPS = {"": 1e-6, "k": 1e-3, "m": 1.0, "g": 1e3, "t": 1e6}
# carrier names seen in Zoo LinkLabel fields, in Mbps
_NAMED_RATES = {
    "t1": 1.544,
    "e1": 2.048,
    "t3": 44.736,
    "ds3": 44.736,
    "e3": 34.368,
    "oc3": 155.52,
    "stm1": 155.52,
    "oc12": 622.08,
    "stm4": 622.08,
    "oc48": 2488.32,
    "stm16": 2488.32,
    "oc192": 9953.28,
    "stm64": 9953.28,
}
_RATE_RE = re.compile(r"(\d+(?:\.\d+)?)\s*([kKmMgGtT]?)\s*(?:b(?:it)?p?s|bit/s|b/s|b\b)", re.I)


def haversine_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Great-circle distance between two ``(lat, lon)`` points in degrees."""
    lat1, lon1 = map(math.radians, a)
    lat2, lon2 = map(math.radians, b)
    h = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def link_delay_ms(length_km: float) -> float:
    """One-way propagation delay of a terrestrial link."""
    if length_km < 0:
        raise ValueError(f"negative link length {length_km}")
    return length_km * 1e3 / PROPAGATION_SPEED_MPS * 1e3


@dataclass(frozen=True)
class GeoNode:
    id: str
    label: str
    lat: float
    lon: float

    def __post_init__(self):
        if not (-90.0 <= self.lat <= 90.0 and -180.0 <= self.lon <= 180.0):
            raise MissingCoordinates(self.id, f"coordinates ({self.lat}, {self.lon}) out of range")

    @property
    def position(self) -> tuple[float, float]:
        return (self.lat, self.lon)


@dataclass(frozen=True)
class PhysLink:
    u: str
    v: str
    length_km: float
    capacity_mbps: float
    delay_ms: float = field(default=-1.0)

    def __post_init__(self):
        if self.u == self.v:
            raise ValueError(f"self-loop at {self.u!r}")
        if self.length_km < 0:
            raise ValueError(f"link {self.u}-{self.v}: negative length")
        if not self.capacity_mbps > 0:
            raise ValueError(f"link {self.u}-{self.v}: capacity must be positive")
        if self.delay_ms < 0:
            object.__setattr__(self, "delay_ms", link_delay_ms(self.length_km))

    @property
    def key(self) -> frozenset:
        return frozenset((self.u, self.v))


@dataclass(frozen=True)
class Topology:
    """Immutable undirected network.

    ``capacity_fallbacks`` names the links whose capacity came from the
    fallback default rather than from the file; ``dropped`` lists nodes or
    edges the parser discarded, with the reason.
    """

    nodes: tuple[GeoNode, ...]
    links: tuple[PhysLink, ...]
    name: str = ""
    capacity_fallbacks: tuple[tuple[str, str], ...] = ()
    dropped: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "links", tuple(self.links))
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("node ids must be unique")
        known = set(ids)
        seen = set()
        for link in self.links:
            for end in (link.u, link.v):
                if end not in known:
                    raise UnknownNode(f"link endpoint {end!r} is not a node")
            if link.key in seen:
                raise DuplicateEdge(link.u, link.v)
            seen.add(link.key)

    @cached_property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    @cached_property
    def index(self) -> dict[str, int]:
        return {nid: k for k, nid in enumerate(self.node_ids)}

    def node(self, node_id: str) -> GeoNode:
        return self.nodes[self.index[node_id]]

    @cached_property
    def incident(self) -> dict[str, tuple[int, ...]]:
        """Node id -> indices of the links touching it."""
        out: dict[str, list[int]] = {nid: [] for nid in self.node_ids}
        for k, link in enumerate(self.links):
            out[link.u].append(k)
            out[link.v].append(k)
        return {nid: tuple(ks) for nid, ks in out.items()}

    @cached_property
    def arcs(self) -> tuple[tuple[str, str, int], ...]:
        """Directed arcs ``(tail, head, link index)``, two per link."""
        out = []
        for k, link in enumerate(self.links):
            out.append((link.u, link.v, k))
            out.append((link.v, link.u, k))
        return tuple(out)

    def max_incident_capacity(self, node_id: str) -> float:
        caps = [self.links[k].capacity_mbps for k in self.incident[node_id]]
        return max(caps) if caps else 0.0

    def components(self) -> list[list[str]]:
        """Connected components, largest first, each in node order."""
        adj: dict[str, list[str]] = {nid: [] for nid in self.node_ids}
        for link in self.links:
            adj[link.u].append(link.v)
            adj[link.v].append(link.u)
        seen: set[str] = set()
        comps = []
        for start in self.node_ids:
            if start in seen:
                continue
            stack, comp = [start], set()
            seen.add(start)
            while stack:
                u = stack.pop()
                comp.add(u)
                for w in adj[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comps.append([nid for nid in self.node_ids if nid in comp])
        comps.sort(key=len, reverse=True)
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def relabel(self, mapping: dict[str, str]) -> "Topology":
        """Copy with node ids renamed through ``mapping`` (missing ids are kept)."""
        mapping = {nid: mapping.get(nid, nid) for nid in self.node_ids}
        nodes = [GeoNode(mapping[n.id], n.label, n.lat, n.lon) for n in self.nodes]
        links = [PhysLink(mapping[l.u], mapping[l.v], l.length_km, l.capacity_mbps, l.delay_ms) for l in self.links]
        fallbacks = tuple((mapping[u], mapping[v]) for u, v in self.capacity_fallbacks)
        return Topology(nodes, links, self.name, fallbacks, self.dropped)

    # serialization

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "nodes": [{"id": n.id, "label": n.label, "lat": n.lat, "lon": n.lon} for n in self.nodes],
            "links": [
                {
                    "u": l.u,
                    "v": l.v,
                    "length_km": l.length_km,
                    "capacity_mbps": l.capacity_mbps,
                    "delay_ms": l.delay_ms,
                }
                for l in self.links
            ],
            "capacity_fallbacks": [list(p) for p in self.capacity_fallbacks],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Topology":
        nodes = [GeoNode(str(n["id"]), n.get("label", str(n["id"])), float(n["lat"]), float(n["lon"])) for n in doc["nodes"]]
        links = [
            PhysLink(str(l["u"]), str(l["v"]), float(l["length_km"]), float(l["capacity_mbps"]), float(l.get("delay_ms", -1.0)))
            for l in doc["links"]
        ]
        fallbacks = tuple(tuple(p) for p in doc.get("capacity_fallbacks", ()))
        return cls(nodes, links, doc.get("name", ""), fallbacks)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Topology":
        return cls.from_dict(json.loads(text))

    def to_graphml(self) -> str:
        """Serialize in the Zoo GraphML dialect with explicit lengths and speeds."""
        root = ET.Element("graphml", xmlns=_GRAPHML_NS[1:-1])
        keys = [
            ("d0", "graph", "Network", "string"),
            ("d1", "node", "Latitude", "double"),
            ("d2", "node", "Longitude", "double"),
            ("d3", "node", "label", "string"),
            ("d4", "edge", "LinkSpeedRaw", "double"),
            ("d5", "edge", "length_km", "double"),
        ]
        for kid, target, name, typ in keys:
            ET.SubElement(root, "key", {"id": kid, "for": target, "attr.name": name, "attr.type": typ})
        graph = ET.SubElement(root, "graph", edgedefault="undirected")
        ET.SubElement(graph, "data", key="d0").text = self.name
        for n in self.nodes:
            el = ET.SubElement(graph, "node", id=n.id)
            ET.SubElement(el, "data", key="d1").text = repr(n.lat)
            ET.SubElement(el, "data", key="d2").text = repr(n.lon)
            ET.SubElement(el, "data", key="d3").text = n.label
        for l in self.links:
            el = ET.SubElement(graph, "edge", source=l.u, target=l.v)
            ET.SubElement(el, "data", key="d4").text = repr(l.capacity_mbps * 1e6)
            ET.SubElement(el, "data", key="d5").text = repr(l.length_km)
        ET.indent(root)
        return ET.tostring(root, encoding="unicode", xml_declaration=True)


def parse_capacity_mbps(attrs: dict[str, str]) -> float | None:
    """Best-effort bandwidth of a Zoo edge in Mbps, or ``None`` if absent."""
    raw = attrs.get("LinkSpeedRaw")
    if raw not in (None, ""):
        try:
            value = float(raw) / 1e6
            if value > 0:
                return value
        except ValueError:
            pass
    speed = attrs.get("LinkSpeed")
    if speed not in (None, ""):
        units = (attrs.get("LinkSpeedUnits") or "M").strip().lower()[:1]
        try:
            value = float(speed) * _UNIT_SCALE_MBPS.get(units, 1.0)
            if value > 0:
                return value
        except ValueError:
            pass
    for key in ("LinkLabel", "LinkNote", "capacity"):
        label = attrs.get(key)
        if not label:
            continue
        if key == "capacity":
            try:
                return float(label)
            except ValueError:
                pass
        m = _RATE_RE.search(label)
        if m:
            return float(m.group(1)) * _UNIT_SCALE_MBPS[m.group(2).lower()]
        compact = re.sub(r"[^a-z0-9]", "", label.lower())
        for name, rate in _NAMED_RATES.items():
            if re.search(rf"(?<![a-z0-9]){name}(?![0-9])", compact) or compact == name:
                return rate
    return None


def _read_keys(root) -> dict[str, tuple[str, str]]:
    keys = {}
    for key in root.iter(f"{_GRAPHML_NS}key"):
        keys[key.get("id")] = (key.get("for", "all"), key.get("attr.name", key.get("id")))
    return keys


def _data(el, keys) -> dict[str, str]:
    out = {}
    for d in el.findall(f"{_GRAPHML_NS}data"):
        name = keys.get(d.get("key"), (None, d.get("key")))[1]
        out[name] = (d.text or "").strip()
    return out


def _strip_namespace(root) -> None:
    # files without the GraphML namespace are common; normalize to it
    for el in root.iter():
        if not el.tag.startswith("{"):
            el.tag = _GRAPHML_NS + el.tag


def parse_graphml(
    text: str,
    *,
    name: str = "",
    fallback_capacity_mbps: float = DEFAULT_FALLBACK_CAPACITY_MBPS,
    multi_edges: str = "collapse",
    drop_uncoordinated: bool = False,
    require_connected: bool = True,
) -> Topology:
    """Parse Zoo-dialect GraphML text into a :class:`Topology`.

    ``multi_edges`` is ``"collapse"`` (sum capacities, keep the shortest
    length) or ``"error"`` (raise :class:`DuplicateEdge`). Nodes lacking
    coordinates raise :class:`MissingCoordinates` unless
    ``drop_uncoordinated`` is set, in which case they and their edges are
    dropped and listed in ``Topology.dropped``.
    """
    if multi_edges not in ("collapse", "error"):
        raise ValueError("multi_edges must be 'collapse' or 'error'")
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc
    _strip_namespace(root)
    keys = _read_keys(root)
    graph = root.find(f"{_GRAPHML_NS}graph")
    if graph is None:
        raise MalformedXml("no <graph> element")
    if not name:
        name = _data(graph, keys).get("Network", "") or _data(graph, keys).get("label", "")

    nodes: list[GeoNode] = []
    dropped: list[str] = []
    for el in graph.findall(f"{_GRAPHML_NS}node"):
        nid = el.get("id")
        if nid is None:
            raise MalformedXml("node without id")
        attrs = _data(el, keys)
        try:
            lat = float(attrs["Latitude"])
            lon = float(attrs["Longitude"])
            node = GeoNode(nid, attrs.get("label") or nid, lat, lon)
        except (KeyError, ValueError, MissingCoordinates) as exc:
            if drop_uncoordinated:
                dropped.append(f"node {nid}: no usable coordinates")
                continue
            if isinstance(exc, MissingCoordinates):
                raise
            raise MissingCoordinates(nid) from None
        nodes.append(node)
    if not nodes:
        raise EmptyGraph("no node elements")
    if len({n.id for n in nodes}) != len(nodes):
        raise MalformedXml("duplicate node id")
    by_id = {n.id: n for n in nodes}

    merged: dict[frozenset, dict] = {}
    order: list[frozenset] = []
    for el in graph.findall(f"{_GRAPHML_NS}edge"):
        u, v = el.get("source"), el.get("target")
        if u is None or v is None:
            raise MalformedXml("edge without source/target")
        if u not in by_id or v not in by_id:
            if drop_uncoordinated:
                dropped.append(f"edge {u}-{v}: endpoint dropped")
                continue
            raise UnknownNode(f"edge {u}-{v} references an unknown node")
        if u == v:
            dropped.append(f"edge {u}-{v}: self-loop")
            continue
        attrs = _data(el, keys)
        length = None
        for key in _LENGTH_KEYS:
            if attrs.get(key):
                try:
                    length = float(attrs[key])
                    break
                except ValueError:
                    pass
        if length is None:
            length = haversine_km(by_id[u].position, by_id[v].position)
        cap = parse_capacity_mbps(attrs)
        pair = frozenset((u, v))
        if pair in merged:
            if multi_edges == "error":
                raise DuplicateEdge(u, v)
            rec = merged[pair]
            rec["length"] = min(rec["length"], length)
            rec["caps"].append(cap)
        else:
            merged[pair] = {"u": u, "v": v, "length": length, "caps": [cap]}
            order.append(pair)

    links, fallbacks = [], []
    for pair in order:
        rec = merged[pair]
        caps = rec["caps"]
        if any(c is None for c in caps):
            fallbacks.append((rec["u"], rec["v"]))
        total = sum(fallback_capacity_mbps if c is None else c for c in caps)
        links.append(PhysLink(rec["u"], rec["v"], rec["length"], total))

    topo = Topology(tuple(nodes), tuple(links), name, tuple(fallbacks), tuple(dropped))
    if require_connected:
        comps = topo.components()
        if len(comps) > 1:
            raise DisconnectedGraph(comps)
    return topo


def load_graphml(path: str | Path, **kwargs) -> Topology:
    path = Path(path)
    kwargs.setdefault("name", "")
    topo = parse_graphml(path.read_text(encoding="utf-8"), **kwargs)
    if not topo.name:
        topo = Topology(topo.nodes, topo.links, path.stem, topo.capacity_fallbacks, topo.dropped)
    return topo


def bundled_topologies() -> dict[str, Path]:
    """The five Topology Zoo networks shipped with the package."""
    base = Path(__file__).parent / "data" / "topologyzoo"
    names = ["Sinet", "Ans", "Agis", "Digex", "BellCanada"]
    return {n: base / f"{n}.graphml" for n in names}


@dataclass(frozen=True)
class Finding:
    kind: str
    subject: tuple
    detail: str = ""


@dataclass
class ValidationReport:
    connected: bool
    isolated_nodes: list[str]
    findings: list[Finding]

    @property
    def ok(self) -> bool:
        return not any(f.kind in ("DisconnectedGraph", "IsolatedNode") for f in self.findings)

    def kinds(self) -> list[str]:
        return [f.kind for f in self.findings]


def validate(t: Topology) -> ValidationReport:
    """Structural checks; findings are reported, never raised."""
    findings: list[Finding] = []
    isolated = [nid for nid in t.node_ids if not t.incident[nid]]
    for nid in isolated:
        findings.append(Finding("IsolatedNode", (nid,), "node has no incident link"))
    comps = t.components()
    if len(comps) > 1:
        for comp in comps[1:]:
            findings.append(Finding("DisconnectedGraph", tuple(comp), f"component of {len(comp)} node(s) detached"))
    for u, v in t.capacity_fallbacks:
        cap = next(l.capacity_mbps for l in t.links if l.key == frozenset((u, v)))
        findings.append(Finding("FallbackCapacityApplied", (u, v), f"capacity set to {cap:g} Mbps"))
    for note in t.dropped:
        findings.append(Finding("Dropped", (), note))
    return ValidationReport(len(comps) <= 1, isolated, findings)


def make_topology(
    coords: dict[str, tuple[float, float]] | Sequence[tuple[float, float]],
    edges: Iterable[Sequence],
    *,
    capacity_mbps: float = 100.0,
    name: str = "",
) -> Topology:
    """Small-graph constructor for tests and demos.

    ``edges`` items are ``(u, v)``, ``(u, v, length_km)`` or
    ``(u, v, length_km, capacity_mbps)``; a missing length is the haversine
    distance between the endpoints.
    """
    if not isinstance(coords, dict):
        coords = {str(k): c for k, c in enumerate(coords)}
    nodes = [GeoNode(str(k), str(k), float(lat), float(lon)) for k, (lat, lon) in coords.items()]
    pos = {n.id: n.position for n in nodes}
    links = []
    for e in edges:
        u, v = str(e[0]), str(e[1])
        length = float(e[2]) if len(e) > 2 and e[2] is not None else haversine_km(pos[u], pos[v])
        cap = float(e[3]) if len(e) > 3 else capacity_mbps
        links.append(PhysLink(u, v, length, cap))
    return Topology(tuple(nodes), tuple(links), name)
