"""Exhaustive gated-constraint audits and the halved-big-M negative control."""

import dataclasses

import pytest

from tepflow.formulation import ANGLE, CYCLE, AngleFormulationUnsupported, FormulationConfig, analyze
from tepflow.solver import TooManyBinaries
from tepflow.verify import AuditReport, oracle_audit, removal_objective, scaled_bigms


def test_fixture_audits_are_clean(fixture_nets):
    for name, net in fixture_nets.items():
        for kind in (ANGLE, CYCLE):
            if kind == ANGLE and name.startswith("D."):
                continue  # ringed zone graph, angle side refuses
            report = oracle_audit(net, kind=kind)
            assert report.ok, (name, kind, report.violations)
            assert len(report.results) == 2 ** len(net.candidate_lines)


def test_audit_covers_every_assignment(fixture_nets):
    report = oracle_audit(fixture_nets["C.3"], kind=CYCLE)
    seen = {r.built for r in report.results}
    cands = tuple(sorted(ln.id for ln in fixture_nets["C.3"].candidate_lines))
    assert len(seen) == 2 ** len(cands)
    assert () in seen and cands in seen


def test_audit_finds_oracle_optimum(fixture_nets):
    report = oracle_audit(fixture_nets["C.3"], kind=CYCLE)
    assert report.oracle_built == ("c1", "c3")
    assert report.oracle_objective == pytest.approx(137120.0)


def test_halved_bigm_is_caught_both_ways(fixture_nets):
    net = fixture_nets["NEG.1"]
    for kind in (ANGLE, CYCLE):
        assert oracle_audit(net, kind=kind).ok
        bad = oracle_audit(net, kind=kind, bigm_scale=0.5)
        assert not bad.ok, kind
        kinds_of_failure = {v.split(" ", 1)[0] for r in bad.results for v in r.violations}
        assert kinds_of_failure  # at least slack or objective complaints
        # the too-small constant must corrupt the gated optimum itself
        assert any("objective" in v or "slack" in v for r in bad.results for v in r.violations)


def test_scaled_bigms_identity_and_validation(fixture_nets):
    art = analyze(fixture_nets["B.2"], FormulationConfig(kind=CYCLE))
    same = scaled_bigms(art.bigms, 1.0)
    assert same == art.bigms
    doubled = scaled_bigms(art.bigms, 2.0)
    for table in ("kvl_angle", "slack", "kvl_cycle"):
        for key, value in getattr(art.bigms, table).items():
            assert getattr(doubled, table)[key] == pytest.approx(2.0 * value)
    for key, prov in art.bigms.provenance.items():
        assert doubled.provenance[key].value == pytest.approx(2.0 * prov.value)
        assert doubled.provenance[key].members == prov.members
    with pytest.raises(ValueError):
        scaled_bigms(art.bigms, 0.0)
    with pytest.raises(ValueError):
        scaled_bigms(art.bigms, -1.0)


def test_removal_objective_matches_hand_case(fixture_nets):
    # C.3: the audited optimum builds c1 and c3; physically removing the
    # other candidates must reproduce exactly that objective
    net = fixture_nets["C.3"]
    audit = oracle_audit(net, kind=CYCLE)
    status_best, val_best = removal_objective(net, audit.oracle_built)
    assert status_best == "optimal"
    assert val_best == pytest.approx(audit.oracle_objective, rel=1e-9)
    status_none, val_none = removal_objective(net, ())
    assert status_none == "optimal"
    assert val_none > val_best  # doing nothing is strictly worse here
    by_built = {r.built: r for r in audit.results}
    assert by_built[()].removal_objective == pytest.approx(val_none)
    assert by_built[audit.oracle_built].removal_objective == pytest.approx(val_best)


def test_enumeration_cap(fixture_nets):
    net = fixture_nets["D.2"]  # six candidates
    with pytest.raises(TooManyBinaries):
        oracle_audit(net, kind=CYCLE, cap=5)


def test_angle_side_refuses_ringed_zone_graph(fixture_nets):
    with pytest.raises(AngleFormulationUnsupported):
        oracle_audit(fixture_nets["D.1"], kind=ANGLE)


def test_report_properties(fixture_nets):
    report = oracle_audit(fixture_nets["B.1"], kind=CYCLE)
    assert isinstance(report, AuditReport)
    assert report.formulation == CYCLE
    assert report.bigm_scale == 1.0
    assert report.assignments == len(report.results)
    assert tuple(report.violations) == ()
    for r in report.results:
        if r.min_vacuous_slack is not None:
            assert r.min_vacuous_slack >= 1e-6
