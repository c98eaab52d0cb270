import pytest

from convergelab import seceval
from convergelab.protocol import Protocol
from convergelab.seceval import (
    Capability,
    Outcome,
    Scenario,
    evaluate_matrix,
    mismatches,
    reference_table,
    report_csv,
    run_attack,
)


@pytest.fixture(scope="module")
def reports():
    return {p: evaluate_matrix(p) for p in (Protocol.AKA, Protocol.ECDH_AKA)}


def test_aka_column(reports):
    assert reports[Protocol.AKA].verdicts() == {
        "identity_protection": False,
        "replay_resistant": True,
        "mitm_resistant": False,
        "pfs": False,
        "needs_sqn_sync": True,
    }


def test_proposed_column(reports):
    assert reports[Protocol.ECDH_AKA].verdicts() == {
        "identity_protection": True,
        "replay_resistant": True,
        "mitm_resistant": True,
        "pfs": True,
        "needs_sqn_sync": False,
    }


def test_reports_match_reference(reports):
    for r in reports.values():
        assert mismatches(r) == []
        assert len(r.seeds) >= 20


def test_evidence_present_for_every_property(reports):
    for r in reports.values():
        for p in seceval.PROPERTIES:
            assert r.evidence[p]


def test_reference_table_static_cells():
    t = reference_table()
    assert t.EAP_TLS.subscriber_management == "WLAN Provider"
    assert t.Proposed.cryptosystem == "Symmetric and ECDH"
    assert t.EAP_TTLS.identity_protection == "✓" and t.EAP_TTLS.mitm_resistant == "✗"
    assert t.EAP_SIM.needs_sqn_sync == "-"
    assert t.EAP_AKA.needs_sqn_sync == "✓"


@pytest.mark.parametrize("protocol", [Protocol.AKA, Protocol.ECDH_AKA])
@pytest.mark.parametrize("scenario", list(Scenario))
def test_outcomes_deterministic(protocol, scenario):
    assert run_attack(protocol, scenario, 3) == run_attack(protocol, scenario, 3)


def test_named_outcomes():
    assert str(run_attack(Protocol.AKA, Scenario.IDENTITY_CATCH, 0)) == "AttackerLearned(IMSI)"
    assert run_attack(Protocol.ECDH_AKA, Scenario.IDENTITY_CATCH, 0).kind is Outcome.NO_EFFECT
    assert str(run_attack(Protocol.AKA, Scenario.KEY_COMPROMISE_PFS, 0)) == "AttackerLearned(MSK)"
    assert run_attack(Protocol.ECDH_AKA, Scenario.KEY_COMPROMISE_PFS, 0).kind is Outcome.NO_EFFECT


def test_replay_never_teaches_attacker():
    for p in (Protocol.AKA, Protocol.ECDH_AKA):
        for seed in range(10):
            assert run_attack(p, Scenario.REPLAY_CHALLENGE, seed).kind is not Outcome.ATTACKER_LEARNED


def test_desync_costs(reports):
    assert all(n >= 2 for n in reports[Protocol.AKA].extra_messages)
    assert all(n == 0 for n in reports[Protocol.ECDH_AKA].extra_messages)


def test_server_key_spoof_caveat():
    # active substitution of the server key still exposes the identity
    o = run_attack(Protocol.ECDH_AKA, Scenario.SERVER_KEY_SPOOF, 0)
    assert str(o) == "AttackerLearned(IMSI)"


def test_relay_requires_eavesdrop_and_inject():
    with pytest.raises(ValueError):
        seceval.AdversaryModel(frozenset({Capability.ACTIVE_RELAY}))


def test_csv_shape(reports):
    text = report_csv(list(reports.values()))
    lines = text.splitlines()
    assert lines[0] == "protocol,property,verdict,seeds_passed"
    assert len(lines) == 11
    assert "aka,identity_protection,false,0" in lines
    assert "ecdh-aka,mitm_resistant,true,20" in lines
