"""Network model: validation, IO round trips, zone and investment logic."""

import math

import pytest

from tepflow.netmodel import (
    Bus,
    Generator,
    Line,
    MissingFile,
    Network,
    Snapshot,
    ValidationError,
    apply_investment,
    load_network,
    save_network,
    synchronous_zones,
    validate_network,
)


def tiny_net(**overrides):
    parts = dict(
        buses=(Bus("a", (10.0,)), Bus("b", (0.0,))),
        lines=(Line("l1", "a", "b", 0.1, 100.0, "existing"),),
        generators=(Generator("g1", "b", 20.0, 1.0, math.inf, (1.0,), 0.1),),
        snapshots=(Snapshot(0, 100.0),),
    )
    parts.update(overrides)
    return Network(**parts)


def test_valid_network_passes():
    validate_network(tiny_net())


@pytest.mark.parametrize(
    "overrides, fragment",
    [
        (dict(buses=(Bus("a", (10.0,)), Bus("a", (0.0,)))), "duplicate id"),
        (dict(buses=(Bus("a", (10.0, 5.0)), Bus("b", (0.0,)))), "load profile"),
        (dict(buses=(Bus("a", (-1.0,)), Bus("b", (0.0,)))), "negative load"),
        (dict(lines=(Line("l1", "a", "a", 0.1, 100.0, "existing"),)), "self-loop"),
        (dict(lines=(Line("l1", "a", "zz", 0.1, 100.0, "existing"),)), "not a known bus"),
        (dict(lines=(Line("l1", "a", "b", 0.0, 100.0, "existing"),)), "reactance"),
        (dict(lines=(Line("l1", "a", "b", math.inf, 100.0, "existing"),)), "reactance"),
        (
            dict(lines=(Line("l1", "a", "b", 0.1, 100.0, "existing", capital_cost=5.0),)),
            "capital cost",
        ),
        (dict(lines=(Line("l1", "a", "b", 0.1, 100.0, "planned"),)), "unknown kind"),
        (dict(snapshots=(Snapshot(0, 0.0),)), "weight"),
        (
            dict(generators=(Generator("g1", "b", 20.0, 1.0, math.inf, (2.0,), 0.1),)),
            "availability",
        ),
        (dict(co2_budget=-1.0), "co2 budget"),
    ],
)
def test_validation_rejects(overrides, fragment):
    with pytest.raises(ValidationError, match=fragment):
        validate_network(tiny_net(**overrides))


def test_csv_round_trip_is_exact(fixture_nets, tmp_path):
    for name, net in fixture_nets.items():
        d = tmp_path / name.replace(".", "_")
        save_network(net, d, fmt="csv")
        assert load_network(d) == net


def test_json_round_trip_is_exact(fixture_nets, tmp_path):
    for name, net in fixture_nets.items():
        p = tmp_path / (name.replace(".", "_") + ".json")
        save_network(net, p, fmt="auto")
        assert load_network(p) == net


def test_round_trip_preserves_awkward_floats(tmp_path):
    # repr round-trip must survive values that %.g formatting would mangle
    net = tiny_net(
        buses=(Bus("a", (0.1 + 0.2,)), Bus("b", (1e-17,))),
        lines=(Line("l1", "a", "b", 1 / 3, math.inf, "existing"),),
    )
    save_network(net, tmp_path / "n", fmt="csv")
    again = load_network(tmp_path / "n")
    assert again.buses[0].load[0] == 0.1 + 0.2
    assert again.lines[0].x == 1 / 3
    assert again.lines[0].capacity == math.inf


def test_load_missing_path_raises():
    with pytest.raises(MissingFile):
        load_network("/nonexistent/really")


def test_zones_ignore_candidates(fixture_nets):
    zones = synchronous_zones(fixture_nets["C.3"])
    assert len(zones) == 3
    by_bus = {}
    for z in zones:
        for b in z.buses:
            by_bus[b] = z.id
    # candidates c1..c3 bridge the zones but must not merge them
    assert by_bus["u1"] == by_bus["u2"]
    assert by_bus["v1"] == by_bus["v2"]
    assert by_bus["u1"] != by_bus["v1"] != by_bus["w1"]


def test_each_zone_has_slack_bus(fixture_nets):
    for net in fixture_nets.values():
        for z in synchronous_zones(net):
            assert z.slack_bus in z.buses


def test_apply_investment_moves_lines(fixture_nets):
    net = fixture_nets["D.2"]
    built = apply_investment(net, ("c1", "c4"))
    kinds = {l.id: l.kind for l in built.lines}
    assert kinds["c1"] == "existing" and kinds["c4"] == "existing"
    assert "c2" not in kinds and "c6" not in kinds
    hardened = {l.id: l for l in built.lines}
    # hardened lines keep their physics but shed the capital charge
    assert hardened["c1"].x == net.line_by_id["c1"].x
    assert hardened["c1"].capital_cost == 0.0
    assert len(synchronous_zones(built)) == 1


def test_apply_investment_rejects_unknown(fixture_nets):
    with pytest.raises(ValidationError, match="not a candidate"):
        apply_investment(fixture_nets["D.2"], ("l0",))
