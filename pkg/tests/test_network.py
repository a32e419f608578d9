import pytest

from casecart.network import GuidedPathNetwork, NetworkError, UnreachableError
from casecart.scenario import DATA_DIR


def _net(nodes, links, **extra):
    return GuidedPathNetwork.from_dict({"node": nodes, "link": links, **extra})


def _n(i, kind="intersection", floor=1):
    return {"id": i, "kind": kind, "floor": floor}


def _l(a, b, length=10.0, kind="uni", **kw):
    return {"a": a, "b": b, "length": length, "kind": kind, **kw}


def test_default_network_loads_and_has_roles():
    net = GuidedPathNetwork.load(DATA_DIR / "default_network.toml")
    assert len(net.homes()) >= 10
    assert net.node_id(net.core_for_or(1)) == "COREA"
    assert net.node_id(net.core_for_or(32)) == "COREB"
    soiled = net.shortest_route("COREA", "CSSD")
    assert soiled.elevator_legs == 1
    assert "SS" in [net.node_id(a.dst) for a in soiled.arcs]


def test_micro_route_lengths(micro_net):
    r = micro_net.shortest_route("MD", "CCSA")
    assert r.length == 120.0 and r.elevator_legs == 0
    assert r.travel_time(60.0, 0.0) == 2.0
    assert micro_net.route_length(micro_net.index["CCSA"], micro_net.index["P1"]) == 240.0
    assert micro_net.route_length(3, 3) == 0.0


def test_shortest_route_tie_breaks_on_link_ids():
    net = _net([_n("A", "spur-end"), _n("J"), _n("X"), _n("Y"), _n("K"), _n("B", "spur-end")],
               [_l("A", "J", kind="spur"), _l("J", "Y"), _l("J", "X"), _l("X", "K"), _l("Y", "K"),
                _l("K", "B", kind="spur"), _l("K", "J")])
    r = net.shortest_route("A", "B")
    assert [net.node_id(a.dst) for a in r.arcs] == ["J", "Y", "K", "B"]


def test_banned_link_forces_detour():
    net = _net([_n("A", "spur-end"), _n("J"), _n("X"), _n("Y"), _n("K"), _n("B", "spur-end")],
               [_l("A", "J", kind="spur"), _l("J", "Y"), _l("J", "X", 20.0), _l("X", "K"), _l("Y", "K"),
                _l("K", "B", kind="spur"), _l("K", "J")])
    assert net.shortest_route("A", "B").length == 40.0
    detour = net.shortest_route("A", "B", frozenset({1}))
    assert detour.length == 50.0


def test_elevator_route_counts_legs():
    net = _net([_n("A", "spur-end", 2), _n("J", floor=2), _n("E", floor=1), _n("B", "spur-end", 1)],
               [_l("A", "J", kind="spur"), _l("J", "E", 1.0, "elevator"), _l("E", "B", kind="spur")],
               elevator={"units": 2, "capacity": 2, "delay_min": 1.0})
    r = net.shortest_route("A", "B")
    assert r.elevator_legs == 1 and r.length == 20.0
    assert r.travel_time(60.0, 1.0) == pytest.approx(20 / 60 + 1.0)


@pytest.mark.parametrize("nodes,links,msg", [
    ([_n("A"), _n("B")], [_l("A", "B", 0.0)], "positive length"),
    ([_n("A"), _n("B")], [_l("A", "A")], "self-loop"),
    ([_n("A", floor=1), _n("B", floor=2)], [_l("A", "B")], "elevator"),
    ([_n("A"), _n("B")], [_l("A", "B", kind="elevator")], "floor"),
    ([_n("A"), _n("B")], [_l("A", "B", kind="spur")], "spur-end"),
    ([_n("A"), _n("A")], [], "duplicate"),
    ([_n("A")], [_l("A", "Z")], "unknown node"),
    ([_n("A", "bogus")], [], "unknown kind"),
])
def test_invalid_networks_rejected(nodes, links, msg):
    with pytest.raises(NetworkError, match=msg):
        _net(nodes, links)


def test_unreachable_station_reported():
    with pytest.raises(UnreachableError):
        _net([_n("A", "spur-end"), _n("J"), _n("K"), _n("B", "spur-end")],
             [_l("A", "J", kind="spur"), _l("J", "K"), _l("K", "B", kind="spur")])


def test_unknown_role_rejected():
    with pytest.raises(NetworkError, match="role"):
        _net([_n("A")], [], roles={"md": "nowhere"})
    with pytest.raises(NetworkError, match="OR core"):
        _net([_n("A")], [], roles={"or_cores": [{"id": "X", "ors": [1, 2]}]})


def test_missing_role_and_or_station(micro_net):
    with pytest.raises(NetworkError):
        micro_net.role("nope")
    with pytest.raises(NetworkError):
        micro_net.or_station(1)
