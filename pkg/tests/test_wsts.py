from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mercury.gsp import supp
from mercury.specs import to_cnf
from mercury.wsts import (Coexistence, Ready, UpwardClosedSet, coverable,
                          error_basis, pred, wqo_leq)
from mercury.specs import resolve_leaf

from conftest import pipeline
from wsts_checks import compatibility_trials


def _sys(name="fig5_serializer_final"):
    return pipeline(name)[4]


counters = st.tuples(*[st.integers(0, 3)] * 6)  # six local states


@given(counters)
def test_order_reflexive(q):
    ready = Ready(_sys())
    assert wqo_leq(q, q, ready)


@given(counters, counters, counters)
@settings(max_examples=300)
def test_order_transitive(q, p, r):
    ready = Ready(_sys())
    if wqo_leq(q, p, ready) and wqo_leq(p, r, ready):
        assert wqo_leq(q, r, ready)


def test_order_transitive_non_vacuously():
    # the hypothesis filter above must actually hit chained pairs
    ready = Ready(_sys())
    rng = random.Random(7)
    hits = 0
    for _ in range(2000):
        q = tuple(rng.randint(0, 2) for _ in range(6))
        p = tuple(c + rng.randint(0, 1) for c in q)
        r = tuple(c + rng.randint(0, 1) for c in p)
        if wqo_leq(q, p, ready) and wqo_leq(p, r, ready):
            hits += 1
            assert wqo_leq(q, r, ready)
    assert hits > 100


@given(st.lists(counters, max_size=25))
@settings(max_examples=100)
def test_basis_stays_minimal_antichain(qs):
    ready = Ready(_sys())
    U = UpwardClosedSet(ready)
    for q in qs:
        U.add(q)
    for i, a in enumerate(U.basis):
        for j, b in enumerate(U.basis):
            if i != j:
                assert not wqo_leq(a, b, ready)


@given(st.lists(counters, max_size=25), counters)
@settings(max_examples=100)
def test_membership_matches_order(qs, probe):
    ready = Ready(_sys())
    U = UpwardClosedSet(ready)
    for q in qs:
        U.add(q)
    assert U.member(probe) == any(wqo_leq(b, probe, ready) for b in U.basis)


def test_error_basis_places_leaf_counts():
    ts, _, specs, *_ = pipeline("fig5_serializer_final")
    sys_ = _sys()
    rl = resolve_leaf(ts, to_cnf(specs[0])[0][0])
    basis = error_basis(sys_, rl)
    assert basis
    for q in basis:
        assert sum(q) == rl.m


def test_pred_of_empty_is_empty():
    sys_ = _sys()
    U = UpwardClosedSet(Ready(sys_))
    assert pred(U, sys_, frontier=[]) == []


def test_coexistence_is_sound_on_reachable_states():
    from test_equivalence import counter_reachable
    sys_ = pipeline("fig1_store")[4]
    coex = Coexistence(sys_)
    for q in counter_reachable(sys_, 3):
        assert coex.feasible(q)


COVER_EXPECT = {         # leaf-render -> result, per fast bundled model
    "fig5_serializer_final": {"atmost(1, Target)": "uncoverable"},
    "lock_service": {"atmost(1, Leader|Busy)": "uncoverable"},
    "robot_planner": {"atmost(1, Planning)": "uncoverable"},
    "distributed_register":
        {"forbid(Serve: val = 1 ; Serve: val = 2)": "uncoverable"},
    "fig1_store_mutant": {
        "atmost(1, Leader)": "coverable",
        "forbid(Leader ; Leader|Replica: stored = 1 ; "
        "Leader|Replica: stored = 2)": "uncoverable"},
}


@pytest.mark.parametrize("name", sorted(COVER_EXPECT))
def test_coverability_verdicts(name):
    ts, _, specs, _, sys_ = pipeline(name)
    seen = {}
    for spec in specs:
        for clause in to_cnf(spec):
            for leaf in clause:
                res = coverable(sys_, leaf, max_seconds=120)
                seen[leaf.render()] = res.result
                if res.result == "coverable":
                    assert res.witness is not None
                    assert supp(res.witness) == {sys_.init_idx}
    assert seen == COVER_EXPECT[name]


def test_step_cap_reports_resource_exceeded():
    ts, _, specs, _, sys_ = pipeline("fig1_store")
    leaf = to_cnf(specs[0])[0][0]
    res = coverable(sys_, leaf, step_cap=3)
    assert res.result == "resource_exceeded"


@pytest.mark.parametrize("name", ("fig5_serializer_final", "lock_service"))
def test_compatibility_spot_check(name):
    sys_ = pipeline(name)[4]
    checked, violations = compatibility_trials(sys_, 300)
    assert checked == 300 and violations == 0
