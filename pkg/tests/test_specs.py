from __future__ import annotations

import pytest

from mercury.diagnostics import MercuryError
from mercury.specs import (Leaf, SpecAnd, SpecOr, eval_spec, parse_spec_file,
                           resolve_leaf, to_cnf)

from conftest import pipeline


def _leaf(text: str) -> Leaf:
    (spec,) = parse_spec_file(text)
    assert isinstance(spec, Leaf)
    return spec


def test_atmost_renders_roundtrip():
    leaf = _leaf("atmost(1, Target)")
    assert leaf.m == 2
    assert leaf.render() == "atmost(1, Target)"


def test_forbid_distinct_targets():
    leaf = _leaf("forbid(Leader ; Leader|Replica: stored = 1)")
    assert leaf.m == 2
    assert len(leaf.targets) == 2


def test_multiple_lines_conjoined():
    specs = parse_spec_file("atmost(1, A)\n# comment\n\natmost(2, B)\n")
    assert len(specs) == 2


def test_boolean_structure_and_cnf():
    (spec,) = parse_spec_file("atmost(1,A) & (atmost(1,B) | atmost(1,C))")
    assert isinstance(spec, SpecAnd)
    cnf = to_cnf(spec)
    assert [len(c) for c in cnf] == [1, 2]


def test_cnf_clause_cap():
    # (a|b) & (a|b) & ... expands multiplicatively in DNF->CNF direction;
    # build an OR of ANDs that exceeds the cap
    line = " | ".join(f"(atmost(1,A{i}) & atmost(1,B{i}))" for i in range(8))
    (spec,) = parse_spec_file(line)
    with pytest.raises(MercuryError) as e:
        to_cnf(spec)
    assert e.value.diagnostics[0].code == "MER0403"


def test_bad_syntax_is_diagnosed():
    with pytest.raises(MercuryError) as e:
        parse_spec_file("atmost(, Target)")
    assert e.value.diagnostics[0].code == "MER0001"


def test_resolve_leaf_unknown_location():
    ts, *_ = pipeline("fig5_serializer_final")
    with pytest.raises(MercuryError) as e:
        resolve_leaf(ts, _leaf("atmost(1, Nowhere)"))
    assert e.value.diagnostics[0].code == "MER0002"


def test_resolve_leaf_with_condition():
    ts, *_ = pipeline("fig1_store")
    rl = resolve_leaf(ts, _leaf("atmost(0, Replica: stored = 1)"))
    (states, count), = rl.groups
    assert count == 1
    assert states
    for s in states:
        assert ts.states[s][0] == "Replica"


def test_eval_spec_counts():
    ts, *_ = pipeline("fig5_serializer_final")
    leaf = _leaf("atmost(1, Target)")
    target = ts.states_at({"Target"})

    def count_at(states, occupied):
        return sum(occupied.get(s, 0) for s in states)

    ok = eval_spec(ts, leaf, lambda ss: count_at(ss, {target[0]: 1}))
    bad = eval_spec(ts, leaf, lambda ss: count_at(ss, {target[0]: 2}))
    assert ok and not bad


def test_forbid_requires_distinct_processes():
    # one process satisfying both targets does not violate forbid(f1; f2)
    ts, *_ = pipeline("fig1_store")
    leaf = _leaf("forbid(Leader ; Leader)")
    leader = ts.states_at({"Leader"})
    one = {leader[0]: 1}
    two = {leader[0]: 2}
    assert eval_spec(ts, leaf, lambda ss: sum(one.get(s, 0) for s in ss))
    assert not eval_spec(ts, leaf, lambda ss: sum(two.get(s, 0) for s in ss))


def test_or_spec_evaluation():
    ts, *_ = pipeline("fig5_serializer_final")
    (spec,) = parse_spec_file("atmost(0, Target) | atmost(0, Prepare)")
    assert isinstance(spec, SpecOr)
    t, p = ts.states_at({"Target"})[0], ts.states_at({"Prepare"})[0]

    def at(occ):
        return lambda ss: sum(occ.get(s, 0) for s in ss)

    assert eval_spec(ts, spec, at({t: 1}))          # one disjunct holds
    assert not eval_spec(ts, spec, at({t: 1, p: 1}))
