"""Structure of the built problems: rows, columns, gating coefficients."""

import math

import pytest

from tepflow.formulation import (
    ANGLE,
    CYCLE,
    AngleFormulationUnsupported,
    FormulationConfig,
    analyze,
    build,
    build_core,
)
from tepflow.graph import cycle_basis, synchronous_zones


def rows_by_name(p):
    return {r.name: r for r in p.rows}


def named_terms(p, row):
    return {p.columns[j].name: c for j, c in row.coeffs}


def test_core_columns_and_costs(fixture_nets):
    net = fixture_nets["B.2"]
    p = build_core(net)
    names = [c.name for c in p.columns]
    # capacity, dispatch, flow, investment: grouped in that order
    assert names[0].startswith("G:") and names[-1].startswith("i:")
    gcol = next(c for c in p.columns if c.name == "g:g1:1")
    assert gcol.cost == net.snapshots[1].weight * net.generators[0].marginal_cost
    fcol = next(c for c in p.columns if c.name == "f:l1:0")
    assert (fcol.lower, fcol.upper) == (-160.0, 160.0)
    icol = next(c for c in p.columns if c.name == "i:c1")
    assert icol.is_binary and icol.cost == net.line_by_id["c1"].capital_cost
    assert {c.name for c in p.columns if c.is_binary} == {"i:c1", "i:c2"}


def test_kcl_signs_and_rhs(fixture_nets):
    net = fixture_nets["A.2"]
    p = build_core(net)
    rows = rows_by_name(p)
    mid = named_terms(p, rows["kcl:a2:0"])
    # l1 ends at a2 (inflow +1), l2 leaves a2 (outflow -1)
    assert mid["f:l1:0"] == 1.0 and mid["f:l2:0"] == -1.0
    assert rows["kcl:a2:0"].rhs == 30.0
    assert rows["kcl:a3:0"].rhs == 70.0


def test_candidate_flow_gating_pair(fixture_nets):
    net = fixture_nets["A.2"]
    p = build_core(net)
    rows = rows_by_name(p)
    hi = named_terms(p, rows["flim:c1:0:hi"])
    lo = named_terms(p, rows["flim:c1:0:lo"])
    cap = net.line_by_id["c1"].capacity
    assert hi == {"f:c1:0": 1.0, "i:c1": -cap} and rows["flim:c1:0:hi"].sense == "<="
    assert lo == {"f:c1:0": 1.0, "i:c1": cap} and rows["flim:c1:0:lo"].sense == ">="


def test_co2_row_only_counts_emitters(fixture_nets):
    net = fixture_nets["C.2"]
    p = build_core(net)
    row = rows_by_name(p)["co2"]
    cols = named_terms(p, row)
    # g3 is emission-free renewable generation, it must not appear
    assert all(name.startswith("g:g1:") or name.startswith("g:g2:") for name in cols)
    assert row.sense == "<=" and row.rhs == net.co2_budget
    w0 = net.snapshots[0].weight
    g1 = next(g for g in net.generators if g.id == "g1")
    assert cols["g:g1:0"] == w0 * g1.emission_rate


def test_angle_adds_theta_and_voltage_rows(fixture_nets):
    net = fixture_nets["B.2"]
    p = build(net, FormulationConfig(kind=ANGLE))
    rows = rows_by_name(p)
    nT = len(net.buses) * net.n_snapshots
    core = build_core(net)
    assert len(p.columns) == len(core.columns) + nT

    kvl0 = named_terms(p, rows["kvl0:l1:0"])
    l1 = net.line_by_id["l1"]
    assert kvl0["f:l1:0"] == 1.0
    assert kvl0[f"theta:{l1.from_bus}:0"] == pytest.approx(-1 / l1.x)
    assert kvl0[f"theta:{l1.to_bus}:0"] == pytest.approx(1 / l1.x)
    assert rows["kvl0:l1:0"].sense == "==" and rows["kvl0:l1:0"].rhs == 0.0

    art = analyze(net, FormulationConfig(kind=ANGLE))
    m = art.bigms.kvl_angle["c1"]
    hi = named_terms(p, rows["kvl1:c1:0:hi"])
    assert hi["i:c1"] == pytest.approx(m) and rows["kvl1:c1:0:hi"].rhs == pytest.approx(m)
    lo = named_terms(p, rows["kvl1:c1:0:lo"])
    assert lo["i:c1"] == pytest.approx(-m) and rows["kvl1:c1:0:lo"].rhs == pytest.approx(-m)


def test_root_zone_reference_is_pinned(fixture_nets):
    net = fixture_nets["B.2"]
    p = build(net, FormulationConfig(kind=ANGLE))
    rows = rows_by_name(p)
    (zone,) = synchronous_zones(net)
    row = rows[f"slack:z{zone.id}:0"]
    assert row.sense == "==" and row.rhs == 0.0
    assert named_terms(p, row) == {f"theta:{zone.slack_bus}:0": 1.0}


def test_relaxed_zone_reference_is_gated(fixture_nets):
    net = fixture_nets["C.1"]
    cfg = FormulationConfig(kind=ANGLE)
    p = build(net, cfg)
    art = analyze(net, cfg)
    (relax,) = art.plan.relaxations
    rows = rows_by_name(p)
    hi = rows[f"slack:z{relax.zone}:0:hi"]
    lo = rows[f"slack:z{relax.zone}:0:lo"]
    m = art.bigms.slack["c1"]
    ref = next(z.slack_bus for z in art.zones if z.id == relax.zone)
    assert named_terms(p, hi) == {f"theta:{ref}:0": 1.0, "i:c1": -m}
    assert hi.sense == "<=" and hi.rhs == 0.0
    assert named_terms(p, lo) == {f"theta:{ref}:0": 1.0, "i:c1": m}
    assert lo.sense == ">=" and lo.rhs == 0.0


def test_cycle_rows_carry_signed_reactances(fixture_nets):
    net = fixture_nets["A.3"]
    p = build(net, FormulationConfig(kind=CYCLE))
    rows = rows_by_name(p)
    (basis_cycle,) = cycle_basis(net)
    row = rows[f"cyc:{basis_cycle.id}:0"]
    assert row.sense == "==" and row.rhs == 0.0
    terms = named_terms(p, row)
    for lid, sign in basis_cycle.entries:
        assert terms[f"f:{lid}:0"] == pytest.approx(sign * net.line_by_id[lid].x)


def test_candidate_cycle_gating_rhs_counts_gates(fixture_nets):
    net = fixture_nets["C.2"]
    cfg = FormulationConfig(kind=CYCLE)
    p = build(net, cfg)
    art = analyze(net, cfg)
    spec = next(c for c in art.candidate_cycles if c.gating_candidates)
    m = art.bigms.kvl_cycle[spec.id]
    n_gate = len(spec.gating_candidates)
    rows = rows_by_name(p)
    hi = rows[f"ccyc:{spec.id}:0:hi"]
    assert hi.rhs == pytest.approx(m * n_gate)
    terms = named_terms(p, hi)
    for cand in spec.gating_candidates:
        assert terms[f"i:{cand}"] == pytest.approx(m)
    lo = rows[f"ccyc:{spec.id}:0:lo"]
    assert lo.rhs == pytest.approx(-m * n_gate)


def test_column_identity_between_formulations(fixture_nets):
    for name in ("A.1", "A.2", "A.3", "B.1", "B.2", "C.1", "C.2", "C.3", "NEG.1"):
        net = fixture_nets[name]
        pa = build(net, FormulationConfig(kind=ANGLE))
        pc = build(net, FormulationConfig(kind=CYCLE))
        assert len(pa.columns) - len(pc.columns) == len(net.buses) * net.n_snapshots, name
        assert {c.name for c in pa.columns if c.is_binary} == {
            c.name for c in pc.columns if c.is_binary
        }, name


def test_angle_rejects_zone_cycles(fixture_nets):
    for name in ("D.1", "D.2"):
        with pytest.raises(AngleFormulationUnsupported) as exc:
            build(fixture_nets[name], FormulationConfig(kind=ANGLE))
        assert "cycle" in str(exc.value), name
        build(fixture_nets[name], FormulationConfig(kind=CYCLE))  # must not raise


def test_config_rejects_bad_values():
    with pytest.raises(ValueError, match="kind"):
        FormulationConfig(kind="hybrid")
    with pytest.raises(ValueError, match="mip_gap"):
        FormulationConfig(mip_gap=0.0)
    with pytest.raises(ValueError, match="bigm_slack_factor"):
        FormulationConfig(bigm_slack_factor=0.5)


def test_slack_factor_scales_gating_rows(fixture_nets):
    net = fixture_nets["A.2"]
    base = build(net, FormulationConfig(kind=ANGLE))
    wide = build(net, FormulationConfig(kind=ANGLE, bigm_slack_factor=2.0))
    r1 = rows_by_name(base)["kvl1:c1:0:hi"]
    r2 = rows_by_name(wide)["kvl1:c1:0:hi"]
    assert r2.rhs == pytest.approx(2 * r1.rhs)


def test_infinite_candidate_capacity_rejected(fixture_nets):
    net = fixture_nets["A.2"]
    from tepflow.netmodel import Line, Network

    lines = tuple(
        Line(l.id, l.from_bus, l.to_bus, l.x, math.inf, l.kind, l.capital_cost, l.corridor)
        if l.kind == "candidate"
        else l
        for l in net.lines
    )
    bad = Network(net.buses, lines, net.generators, net.snapshots, net.co2_budget)
    with pytest.raises(ValueError, match="finite capacity"):
        build_core(bad)
