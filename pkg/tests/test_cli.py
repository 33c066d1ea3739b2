from __future__ import annotations

import json
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from mercury.cli import main

from conftest import MODELS, model_path

SCHEMAS = Path(__file__).resolve().parent.parent / "schemas"


def _validator(name: str) -> Draft202012Validator:
    resources = []
    for p in SCHEMAS.glob("*.schema.json"):
        schema = json.loads(p.read_text())
        resources.append((schema["$id"], Resource.from_contents(schema)))
    registry = Registry().with_resources(resources)
    root = json.loads((SCHEMAS / name).read_text())
    return Draft202012Validator(root, registry=registry)


def run(capsys, *argv) -> tuple[int, str]:
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_check_exit_codes(capsys):
    code, out = run(capsys, "check", str(model_path("fig1_store")))
    assert code == 0 and "cutoff = 3" in out
    code, out = run(capsys, "check", str(model_path("fig5_serializer_initial")))
    assert code == 2
    assert "needs a corresponding reacting transition on getReady" in out


def test_check_json_validates(capsys):
    code, out = run(capsys, "check", str(model_path("fig1_store")),
                    "--format", "json")
    assert code == 0
    _validator("check.schema.json").validate(json.loads(out))


def test_verify_text_format(capsys):
    code, out = run(capsys, "verify", str(model_path("fig1_store")))
    assert code == 0
    assert "phases: 2, cutoff: 3, result: SAFE (parameterized)" in out


def test_verify_unsafe_prints_trace(capsys):
    code, out = run(capsys, "verify", str(model_path("fig1_store_mutant")))
    assert code == 1
    assert "UNSAFE" in out and "elect#partition" in out


def test_verify_json_validates_and_matches_text(capsys):
    code, out = run(capsys, "verify", str(model_path("fig1_store")),
                    "--format", "json")
    data = json.loads(out)
    _validator("verify.schema.json").validate(data)
    assert code == 0 and data["verdict"]["result"] == "safe"
    code2, _ = run(capsys, "verify", str(model_path("fig1_store")))
    assert code2 == code


def test_verify_n_override(capsys):
    code, out = run(capsys, "verify", str(model_path("fig1_store")),
                    "--n", "2")
    assert code == 0 and "(n = 2)" in out


def test_phases_lists_states(capsys):
    code, out = run(capsys, "phases", str(model_path("fig5_serializer_final")))
    assert code == 0 and "3 phases" in out and "(Target,{})" in out


def test_translate_gsp_validates(capsys):
    code, out = run(capsys, "translate", str(model_path("fig1_store")),
                    "--emit", "gsp")
    assert code == 0
    _validator("gsp.schema.json").validate(json.loads(out))


def test_translate_core_reparses(capsys):
    from mercury.parser import parse_program
    code, out = run(capsys, "translate", str(model_path("lock_service")),
                    "--emit", "core")
    assert code == 0
    parse_program(out)


def test_cover_roundtrip_through_json(capsys, tmp_path):
    _, out = run(capsys, "translate",
                 str(model_path("fig5_serializer_final")), "--emit", "gsp")
    gsp = tmp_path / "m.gsp.json"
    gsp.write_text(out)
    spec = tmp_path / "m.spec"
    spec.write_text("atmost(1, Target)\n")
    code, out = run(capsys, "cover", str(gsp), "--spec", str(spec))
    assert code == 0 and "UNCOVERABLE" in out


def test_cover_mutant_coverable(capsys):
    code, out = run(capsys, "cover", str(model_path("fig1_store_mutant")))
    assert code == 1 and "COVERABLE" in out


def test_cover_json_validates(capsys):
    code, out = run(capsys, "cover", str(model_path("lock_service")),
                    "--format", "json")
    assert code == 0
    _validator("cover.schema.json").validate(json.loads(out))


def test_nonfragment_model_exits_2(capsys):
    code, out = run(capsys, "check",
                    str(MODELS / "nonfragment" / "sensor_network.mer"),
                    "--spec", str(MODELS / "fig1_store.spec"))
    assert code == 2


def test_missing_file_exits_3(capsys):
    assert main(["verify", "no_such_model.mer"]) == 3


def test_parse_error_exits_3(capsys, tmp_path):
    bad = tmp_path / "bad.mer"
    bad.write_text("process ???")
    (tmp_path / "bad.spec").write_text("atmost(1, X)")
    code, out = run(capsys, "check", str(bad))
    assert code == 3 and "MER0001" in out


def test_resource_cap_exits_4(capsys):
    code, _ = run(capsys, "verify", str(model_path("fig1_store")),
                  "--max-states", "5")
    assert code == 4


def test_explain_known_and_unknown(capsys):
    code, out = run(capsys, "explain", "MER0301")
    assert code == 0 and "Phase-compatibility" in out
    assert main(["explain", "MER9999"]) == 3


def test_diagnostics_json_validates(capsys, tmp_path):
    bad = tmp_path / "bad.mer"
    bad.write_text("process ???")
    code, out = run(capsys, "check", str(bad), "--format", "json",
                    "--spec", str(MODELS / "fig1_store.spec"))
    assert code == 3
    _validator("diagnostics.schema.json").validate(json.loads(out))
