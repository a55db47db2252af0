"""Random instance generator: determinism, calibration promises, the suite."""

import math

import pytest

from tepflow import instancegen
from tepflow.formulation import CYCLE, FormulationConfig, analyze, build
from tepflow.graph import synchronous_zones
from tepflow.instancegen import (
    GenerationFailure,
    InstanceSpec,
    acceptance_suite,
    fixtures,
    generate,
)
from tepflow.netmodel import validate_network


def test_same_spec_same_network():
    spec = InstanceSpec(seed=91, n_buses=7, n_zones=2, intra_candidates=2, n_snapshots=2)
    assert generate(spec) == generate(spec)


def test_different_seed_different_network():
    a = generate(InstanceSpec(seed=1, n_buses=5))
    b = generate(InstanceSpec(seed=2, n_buses=5))
    assert a != b


@pytest.mark.parametrize(
    "kw",
    [
        dict(n_buses=1),
        dict(n_buses=4, n_zones=0),
        dict(n_buses=4, n_zones=5),
        dict(n_buses=4, n_snapshots=0),
        dict(n_buses=6, n_zones=2, zone_cycle=True),
        dict(n_buses=4, candidates_per_corridor=0),
        dict(n_buses=4, mesh_edges=-1),
        dict(n_buses=4, intra_candidates=-2),
        dict(n_buses=4, renewable_share=1.5),
    ],
)
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        InstanceSpec(seed=0, **kw)


def test_generated_networks_validate_and_match_their_spec():
    for spec in (
        InstanceSpec(seed=31, n_buses=6, n_zones=2, n_snapshots=3, intra_candidates=1),
        InstanceSpec(seed=32, n_buses=9, n_zones=3, candidates_per_corridor=2, intra_candidates=0),
        InstanceSpec(seed=33, n_buses=12, n_zones=4, mesh_edges=0, intra_candidates=2),
    ):
        net = generate(spec)
        validate_network(net)
        assert len(net.buses) == spec.n_buses
        assert net.n_snapshots == spec.n_snapshots
        zones = synchronous_zones(net)
        assert len(zones) == spec.n_zones


def test_zone_cycle_spec_defeats_the_angle_builder():
    net = generate(InstanceSpec(seed=77, n_buses=8, n_zones=3, zone_cycle=True, intra_candidates=0))
    from tepflow.formulation import ANGLE, AngleFormulationUnsupported

    with pytest.raises(AngleFormulationUnsupported):
        build(net, FormulationConfig(kind=ANGLE))
    build(net, FormulationConfig(kind=CYCLE))  # must still be expressible


def test_no_saturation_calibration():
    # every capacity strictly above total load: gated rows stay interior
    for seed in (41, 42, 43):
        net = generate(InstanceSpec(seed=seed, n_buses=8, n_zones=2, intra_candidates=1))
        total_load = float(net.load_matrix.sum(axis=0).max())
        for line in net.lines:
            assert line.capacity > total_load


def test_generation_failure_after_exhausted_retries(monkeypatch):
    monkeypatch.setattr(instancegen, "_audit", lambda net: "forced rejection")
    spec = InstanceSpec(seed=5, n_buses=4)
    with pytest.raises(GenerationFailure) as exc:
        generate(spec)
    assert exc.value.attempts == instancegen.AUDIT_ATTEMPTS
    assert exc.value.reason == "forced rejection"


def test_acceptance_suite_shape():
    specs = acceptance_suite()
    assert len(specs) >= 200
    assert len({s.seed for s in specs}) == len(specs)
    assert {s.n_zones for s in specs} == {1, 2, 3, 4}
    assert min(s.n_buses for s in specs) == 2
    assert max(s.n_buses for s in specs) == 12
    assert {s.n_snapshots for s in specs} <= {1, 2, 3}
    assert any(s.zone_cycle for s in specs)
    assert any(s.co2_limited for s in specs)


def test_suite_candidate_budget(suite_nets):
    # the stated cap: at most eight candidate lines anywhere in the suite
    counts = [len(net.candidate_lines) for _, net in suite_nets]
    assert max(counts) == 8
    assert min(counts) >= 1


def test_suite_instances_build_and_validate(suite_nets):
    for spec, net in suite_nets:
        validate_network(net)
        assert len(net.buses) == spec.n_buses
        p = build(net, FormulationConfig(kind=CYCLE))
        assert p.binary_columns


def test_fixture_inventory(fixture_nets):
    assert sorted(fixture_nets) == [
        "A.1",
        "A.2",
        "A.3",
        "B.1",
        "B.2",
        "C.1",
        "C.2",
        "C.3",
        "D.1",
        "D.2",
        "NEG.1",
    ]
    for name, net in fixture_nets.items():
        validate_network(net)
        assert math.isfinite(sum(b.load[0] for b in net.buses)), name


def test_co2_limited_carries_budget():
    net = generate(InstanceSpec(seed=200, n_buses=6, n_zones=2, co2_limited=True))
    assert net.co2_budget is not None and net.co2_budget > 0.0
    art = analyze(net, FormulationConfig(kind=CYCLE))
    p = build(net, FormulationConfig(kind=CYCLE))
    assert any(r.name == "co2" for r in p.rows)
