import math

import networkx as nx
import pytest

from jsgpr.errors import DisconnectedGraph, DuplicateEdge, EmptyGraph, MalformedXml, MissingCoordinates, UnknownNode
from jsgpr.topology import (
    Topology,
    bundled_topologies,
    haversine_km,
    link_delay_ms,
    make_topology,
    parse_capacity_mbps,
    parse_graphml,
    validate,
)


def graphml(nodes, edges, edge_keys=""):
    """Minimal Zoo-dialect GraphML document."""
    body = ['<?xml version="1.0"?>', '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
            '<key attr.name="Latitude" attr.type="double" for="node" id="d1"/>',
            '<key attr.name="Longitude" attr.type="double" for="node" id="d2"/>',
            '<key attr.name="label" attr.type="string" for="node" id="d3"/>',
            '<key attr.name="LinkLabel" attr.type="string" for="edge" id="e1"/>',
            '<key attr.name="LinkSpeedRaw" attr.type="string" for="edge" id="e2"/>',
            edge_keys, '<graph edgedefault="undirected">']
    for nid, lat, lon in nodes:
        data = ""
        if lat is not None:
            data += f'<data key="d1">{lat}</data><data key="d2">{lon}</data>'
        body.append(f'<node id="{nid}">{data}<data key="d3">N{nid}</data></node>')
    for e in edges:
        u, v, *rest = e
        extra = rest[0] if rest else ""
        body.append(f'<edge source="{u}" target="{v}">{extra}</edge>')
    body += ["</graph>", "</graphml>"]
    return "\n".join(body)


TRIANGLE = [("0", 45.0, 10.0), ("1", 45.0, 11.0), ("2", 46.0, 10.5)]


def test_haversine_known_distance():
    # one degree of longitude on the equator
    assert haversine_km((0, 0), (0, 1)) == pytest.approx(111.195, rel=1e-4)
    assert haversine_km((10, 20), (10, 20)) == 0.0
    assert haversine_km((0, 0), (0, 180)) == pytest.approx(math.pi * 6371.0)


def test_delay_uses_two_thirds_light_speed():
    assert link_delay_ms(200.0) == pytest.approx(1.0)


@pytest.mark.parametrize(
    "attrs, expected",
    [
        ({"LinkSpeedRaw": "10000000000"}, 10_000.0),
        ({"LinkSpeed": "2.5", "LinkSpeedUnits": "G"}, 2500.0),
        ({"LinkLabel": "OC-48"}, 2488.32),
        ({"LinkLabel": "45 Mbps"}, 45.0),
        ({"LinkLabel": "T3"}, 44.736),
        ({"LinkLabel": "backbone"}, None),
        ({}, None),
    ],
)
def test_capacity_parsing(attrs, expected):
    got = parse_capacity_mbps(attrs)
    if expected is None:
        assert got is None
    else:
        assert got == pytest.approx(expected)


def test_parse_minimal_graph():
    t = parse_graphml(graphml(TRIANGLE, [("0", "1", '<data key="e2">1000000000</data>'), ("1", "2"), ("2", "0")]))
    assert len(t.nodes) == 3 and len(t.links) == 3
    assert t.links[0].capacity_mbps == pytest.approx(1000.0)
    assert set(t.capacity_fallbacks) == {("1", "2"), ("2", "0")}
    assert all(l.capacity_mbps == 100.0 for l in t.links[1:])
    assert t.links[0].length_km == pytest.approx(haversine_km((45, 10), (45, 11)))


def test_fallback_capacity_is_configurable():
    t = parse_graphml(graphml(TRIANGLE, [("0", "1"), ("1", "2")]), fallback_capacity_mbps=1000.0)
    assert {l.capacity_mbps for l in t.links} == {1000.0}
    kinds = validate(t).kinds()
    assert kinds.count("FallbackCapacityApplied") == 2


def test_parallel_edges_collapse_or_raise():
    text = graphml(TRIANGLE, [("0", "1"), ("1", "0"), ("1", "2")])
    t = parse_graphml(text)
    assert len(t.links) == 2
    assert t.links[0].capacity_mbps == pytest.approx(200.0)
    with pytest.raises(DuplicateEdge):
        parse_graphml(text, multi_edges="error")


def test_self_loops_are_dropped():
    t = parse_graphml(graphml(TRIANGLE, [("0", "0"), ("0", "1"), ("1", "2")]))
    assert len(t.links) == 2
    assert any("self-loop" in d for d in t.dropped)


def test_missing_coordinates():
    nodes = TRIANGLE + [("3", None, None)]
    text = graphml(nodes, [("0", "1"), ("1", "2"), ("2", "3")])
    with pytest.raises(MissingCoordinates):
        parse_graphml(text)
    t = parse_graphml(text, drop_uncoordinated=True)
    assert len(t.nodes) == 3 and len(t.links) == 2
    assert len(t.dropped) == 2


def test_error_cases():
    with pytest.raises(MalformedXml):
        parse_graphml("<graphml><graph>")
    with pytest.raises(EmptyGraph):
        parse_graphml(graphml([], []))
    with pytest.raises(UnknownNode):
        parse_graphml(graphml(TRIANGLE, [("0", "9")]))
    with pytest.raises(DisconnectedGraph):
        parse_graphml(graphml(TRIANGLE, [("0", "1")]))
    t = parse_graphml(graphml(TRIANGLE, [("0", "1")]), require_connected=False)
    rep = validate(t)
    assert not rep.ok and rep.isolated_nodes == ["2"]


def test_namespace_free_documents_parse():
    text = graphml(TRIANGLE, [("0", "1"), ("1", "2")]).replace(' xmlns="http://graphml.graphdrawing.org/xmlns"', "")
    assert len(parse_graphml(text).links) == 2


def test_graphml_and_json_round_trip(square):
    back = parse_graphml(square.to_graphml())
    assert [n.id for n in back.nodes] == [n.id for n in square.nodes]
    for a, b in zip(back.links, square.links):
        assert (a.u, a.v) == (b.u, b.v)
        assert a.length_km == pytest.approx(b.length_km)
        assert a.capacity_mbps == pytest.approx(b.capacity_mbps)
    assert Topology.from_json(square.to_json()) == square


def test_arcs_and_incidence(square):
    arcs = square.arcs
    assert len(arcs) == 2 * len(square.links)
    assert ("a", "b", 0) in arcs and ("b", "a", 0) in arcs
    assert len(square.incident["a"]) == 3
    assert square.max_incident_capacity("a") == 100.0


def test_relabel_keeps_structure(square):
    r = square.relabel({"a": "A"})
    assert "A" in r.node_ids and "a" not in r.node_ids
    assert any({l.u, l.v} == {"A", "b"} for l in r.links)


def test_bundled_topologies_parse_and_agree_with_networkx(zoo):
    assert set(zoo) == set(bundled_topologies())
    for name, t in zoo.items():
        assert t.is_connected()
        g = nx.Graph([(l.u, l.v) for l in t.links])
        assert g.number_of_nodes() == len(t.nodes)
        assert g.number_of_edges() == len(t.links)


def test_make_topology_defaults_length_to_haversine():
    t = make_topology([(0, 0), (0, 1)], [(0, 1)])
    assert t.links[0].length_km == pytest.approx(111.195, rel=1e-4)
    t2 = make_topology([(0, 0), (0, 1)], [(0, 1, 50.0, 10.0)])
    assert (t2.links[0].length_km, t2.links[0].capacity_mbps) == (50.0, 10.0)
