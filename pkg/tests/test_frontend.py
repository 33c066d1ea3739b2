from __future__ import annotations

import glob

import pytest

from mercury.core import core_to_program, lower_to_core
from mercury.diagnostics import EXPLANATIONS, MercuryError, Severity
from mercury.localts import build_local_ts
from mercury.parser import parse_program
from mercury.pretty import print_program
from mercury.validate import frontend_check

from conftest import MODELS, load


def test_parse_error_carries_code_and_span():
    with pytest.raises(MercuryError) as e:
        parse_program("process P\ninitial location A\n  on ??? do\n")
    d = e.value.diagnostics[0]
    assert d.code == "MER0001"
    assert d.span is not None and d.span.line == 3


def test_unknown_action_rejected():
    bad = """
process P
initial location A
  on _ do
    sendbr(nosuch)
    goto A
"""
    with pytest.raises(MercuryError) as e:
        frontend_check(parse_program(bad))
    assert any(d.code == "MER0002" for d in e.value.diagnostics)


def test_id_arithmetic_outside_fragment():
    bad = """
process P
vars
  x : int[0..2] = 0
initial location A
  on Partition<p>(All,1)
    win: goto A
    lose: goto A
  on _ if p.winS + 1 = 1 do
    goto A
"""
    with pytest.raises(MercuryError) as e:
        frontend_check(parse_program(bad))
    codes = {d.code for d in e.value.diagnostics}
    assert codes & {"MER0101", "MER0001", "MER0003"}


def test_sensor_network_rejected_as_fragment():
    text = (MODELS / "nonfragment" / "sensor_network.mer").read_text()
    with pytest.raises(MercuryError) as e:
        frontend_check(parse_program(text))
    assert all(d.severity is Severity.FRAGMENT for d in e.value.diagnostics)
    assert any(d.code in ("MER0103", "MER0104") for d in e.value.diagnostics)


@pytest.mark.parametrize("path", sorted(glob.glob(str(MODELS / "*.mer"))))
def test_pretty_print_roundtrip(path):
    text = open(path).read()
    printed = print_program(parse_program(text))
    assert print_program(parse_program(printed)) == printed


@pytest.mark.parametrize("path", sorted(glob.glob(str(MODELS / "*.mer"))))
def test_core_surface_roundtrip_preserves_structure(path):
    prog = parse_program(open(path).read())
    core = lower_to_core(prog)
    ts = build_local_ts(core)
    surfaced = print_program(core_to_program(core))
    prog2 = parse_program(surfaced)
    frontend_check(prog2)
    ts2 = build_local_ts(lower_to_core(prog2))
    assert len(ts2.states) == len(ts.states)
    assert len(ts2.transitions) == len(ts.transitions)


def test_every_emitted_code_is_explained():
    # grep-free contract: codes constructed anywhere must have a rationale
    import mercury.analysis, mercury.core, mercury.gsp, mercury.localts, \
        mercury.oracle, mercury.parser, mercury.specs, mercury.validate
    import inspect, re

    emitted = set()
    for mod in (mercury.analysis, mercury.core, mercury.gsp, mercury.localts,
                mercury.oracle, mercury.parser, mercury.specs,
                mercury.validate):
        emitted |= set(re.findall(r"MER\d{4}", inspect.getsource(mod)))
    missing = emitted - set(EXPLANATIONS)
    assert not missing, f"codes without explanations: {sorted(missing)}"


def test_models_build():
    for name in ("fig1_store", "fig5_serializer_final", "lock_service",
                 "robot_planner", "distributed_register"):
        text, _ = load(name)
        prog = parse_program(text)
        frontend_check(prog)
        build_local_ts(lower_to_core(prog))
