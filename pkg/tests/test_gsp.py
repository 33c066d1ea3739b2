from __future__ import annotations

import json

from mercury.gsp import (alpha, can_fire, check_well_behaved, counter_step,
                         dump_json, supp)
from mercury.wsts import load_gsp_json

from conftest import pipeline


def _action(sys_, name):
    return next(a for a in sys_.actions if a.name == name)


def _sts(ts):
    return {ts.render_state(i): i for i in range(len(ts.states))}


def test_serializer_action_inventory():
    ts, *_, sys_ = pipeline("fig5_serializer_final")
    kinds = sorted((a.name, a.kind, a.arity) for a in sys_.actions)
    assert ("select#partition", "maximal", 2) in kinds
    senders = [k for k in kinds if k[1] == "sender" and k[0].startswith("br#")]
    assert [s[0] for s in senders] == ["br#getReady", "br#sequencer"]
    crashes = [k for k in kinds if k[0].startswith("crash#")]
    assert len(crashes) == 5  # every non-crash state may crash


def test_broadcast_rewrite_shape():
    ts, *_, sys_ = pipeline("fig5_serializer_final")
    s = _sts(ts)
    a = _action(sys_, "br#getReady")
    sel, idle, prep = s["(Selected,{})"], s["(Idle,{})"], s["(Prepare,{})"]
    assert a.slots == (((sel, prep),),)
    assert a.guard == {ts.crash_idx, sel, idle}
    assert a.recv_map[sel] == prep and a.recv_map[idle] == idle
    assert a.recv_map[ts.crash_idx] == ts.crash_idx


def test_partition_rewrite_is_k_maximal():
    ts, *_, sys_ = pipeline("fig5_serializer_final")
    s = _sts(ts)
    a = _action(sys_, "select#partition")
    start, sel, idle = s["(Start,{})"], s["(Selected,{})"], s["(Idle,{})"]
    assert a.kind == "maximal" and a.arity == 2
    assert all(slot == ((start, sel),) for slot in a.slots)
    assert a.recv_map[start] == idle  # losers


def test_initial_and_alpha():
    ts, *_, sys_ = pipeline("fig5_serializer_final")
    q0 = sys_.initial(3)
    assert q0[sys_.init_idx] == 3 and sum(q0) == 3
    assert alpha((1, 1, 1), sys_.n_states) == q0
    assert supp(q0) == {sys_.init_idx}


def test_counter_step_deterministic_order():
    _, *_, sys_ = pipeline("fig5_serializer_final")
    q0 = sys_.initial(2)
    steps = counter_step(q0, sys_)
    assert steps == sorted(steps)
    assert steps == counter_step(q0, sys_)


def test_maximal_action_takes_all_available_senders():
    # with 3 processes at Start and arity 2, exactly 2 win, never fewer
    _, *_, sys_ = pipeline("fig5_serializer_final")
    q0 = sys_.initial(3)
    outcomes = [q for name, q in counter_step(q0, sys_)
                if name == "select#partition"]
    a = _action(sys_, "select#partition")
    win = a.slots[0][0][1]
    assert outcomes and all(q[win] == 2 for q in outcomes)


def test_broadcast_blocks_on_unreceivable_remainder():
    # a process in Target is outside getReady's guard, so the action is
    # not enabled from any counter that occupies Target
    ts, *_, sys_ = pipeline("fig5_serializer_final")
    s = _sts(ts)
    q = [0] * sys_.n_states
    q[s["(Selected,{})"]] = 1
    q[s["(Target,{})"]] = 1
    names = {name for name, _ in counter_step(tuple(q), sys_)}
    assert not any(n == "br#getReady" for n in names)


def test_consensus_requires_majority_of_members():
    # store: vc consensus needs |Γ\F| > |F|; its D-variants carry a
    # participant floor of 2|D|+1
    _, *_, sys_ = pipeline("fig1_store")
    floors = {a.name: a.min_members() for a in sys_.actions
              if a.crash_slots}
    assert floors and all(f == 2 * 1 + 1 for f in floors.values())


def test_store_consensus_actions_cover_proposable_values():
    _, *_, sys_ = pipeline("fig1_store")
    decided = {a.name for a in sys_.actions if "#w=" in a.name}
    # value 3 is never proposable, so no action decides it
    assert decided and not any("w={3}" in n for n in decided)


def test_ledgered_warning_inventory():
    warned = {}
    for name in ("fig1_store", "fig5_serializer_final", "lock_service",
                 "robot_planner", "distributed_register"):
        *_, sys_ = pipeline(name)
        warned[name] = [d.code for d in check_well_behaved(sys_)]
    # one known conservative false positive; everything else clean
    assert warned.pop("robot_planner") == ["MER0602"]
    assert all(not v for v in warned.values())


def test_json_interchange_roundtrip():
    ts, *_, sys_ = pipeline("fig5_serializer_final")
    data = json.loads(dump_json(sys_))
    back = load_gsp_json(data)
    assert back.n_states == sys_.n_states
    assert sorted(a.name for a in back.actions) == \
        sorted(a.name for a in sys_.actions)
    q0 = sys_.initial(2)
    assert [s for s, _ in counter_step(q0, back)] == \
        [s for s, _ in counter_step(q0, sys_)]
