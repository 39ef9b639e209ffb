import json
from pathlib import Path

import pytest

from fellmorita.errors import UnknownDemo
from fellmorita.scenario.demos import demo_names, generate_demo, write_demo
from fellmorita.scenario.runner import (
    EXIT_FAIL,
    EXIT_MALFORMED,
    EXIT_PASS,
    report_document,
    run_scenario,
)
from fellmorita.scripts import make_demo, run_scenario as run_script

BUNDLED = Path(__file__).resolve().parents[1] / "data" / "scenarios" / "group_algebra_z2.scn"

M2_UNITS = [
    [[1.0, 0.0], [0.0, 0.0]],
    [[0.0, 1.0], [0.0, 0.0]],
    [[0.0, 0.0], [1.0, 0.0]],
    [[0.0, 0.0], [0.0, 1.0]],
]


def _write(tmp_path: Path, doc: dict, name: str = "case.scn") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def test_bundled_scenario_passes():
    result = run_scenario(BUNDLED)
    assert result.exit_code == EXIT_PASS
    messages = [r.message for r in result.report.records]
    assert "watatani_index: 2" in messages


def test_main_prints_the_index(capsys):
    assert run_script.main([str(BUNDLED)]) == 0
    out = capsys.readouterr().out
    assert "watatani_index: 2" in out
    assert "overall: pass" in out


def test_undefined_reference_is_malformed(tmp_path):
    doc = json.loads(BUNDLED.read_text(encoding="utf-8"))
    doc["tasks"].append({"op": "index", "bundle": "CZ9"})
    result = run_scenario(_write(tmp_path, doc))
    assert result.exit_code == EXIT_MALFORMED
    rec = result.report.get("scenario.malformed")
    assert rec.status == "fail"
    assert "CZ9" in rec.message


@pytest.mark.parametrize(
    "text",
    [
        "{not json",
        json.dumps({"tasks": [{"op": "index"}]}),
        json.dumps({"groups": {"G": {"cyclic": 2, "symmetric": 2}}}),
        json.dumps({"tasks": [{"op": "no_such_op", "bundle": "B"}]}),
    ],
)
def test_malformed_documents(tmp_path, text):
    path = tmp_path / "bad.scn"
    path.write_text(text, encoding="utf-8")
    assert run_scenario(path).exit_code == EXIT_MALFORMED


def test_missing_file_is_malformed(tmp_path):
    assert run_scenario(tmp_path / "absent.scn").exit_code == EXIT_MALFORMED


def test_non_group_table_is_malformed(tmp_path):
    doc = {"groups": {"G": {"table": [[0, 1], [1, 1]]}}}
    assert run_scenario(_write(tmp_path, doc)).exit_code == EXIT_MALFORMED


def test_broken_involution_fails(tmp_path):
    doc = {
        "name": "transpose",
        "algebras": {"M2": {"basis": M2_UNITS}},
        "bimodules": {"X": {"left": "M2", "right": "M2", "basis": M2_UNITS}},
        "involutions": {"t": {"bimodule": "X", "kind": "transpose"}},
        "tasks": [{"op": "verify_involutive", "involution": "t"}],
    }
    result = run_scenario(_write(tmp_path, doc))
    assert result.exit_code == EXIT_FAIL
    assert any(r.id.endswith("natural.reverses_actions") and r.status == "fail" for r in result.report.records)


def test_task_errors_become_failed_records(tmp_path):
    doc = {
        "groups": {"Z2": {"cyclic": 2}},
        "bundles": {"Z": {"group": "Z2", "fibers": {"0": [[[1.0, 0.0], [0.0, 1.0]]]}, "size": 2}},
        "tasks": [{"op": "index", "bundle": "Z"}],
    }
    result = run_scenario(_write(tmp_path, doc))
    assert result.exit_code == EXIT_FAIL
    rec = result.report.get("t01.index.Z.error")
    assert rec is not None and rec.message.startswith("NotSaturated")


def test_check_prefix_and_tol_override():
    result = run_scenario(BUNDLED, tol=1e-7, check_prefix="t04.index")
    assert result.tol == 1e-7
    assert result.report.records
    assert all(r.id.startswith("t04.index") for r in result.report.records)


def test_runs_are_deterministic(tmp_path):
    path = write_demo("group_algebra_Z3", tmp_path)
    first = report_document(run_scenario(path), generated_at="-")
    second = report_document(run_scenario(path), generated_at="-")
    threaded = report_document(run_scenario(path, max_workers=4), generated_at="-")
    assert first == second
    assert first == threaded


def test_report_file(tmp_path):
    out = tmp_path / "reports" / "z2.json"
    assert run_script.main([str(BUNDLED), "--report", str(out), "--parallel", "2"]) == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["summary"]["exit_code"] == 0
    assert doc["summary"]["fail"] == 0
    assert "generated_at" in doc


@pytest.mark.parametrize("name", demo_names())
def test_demos_pass(tmp_path, name):
    path = write_demo(name, tmp_path)
    assert path.name == path.name.lower()
    result = run_scenario(path)
    assert result.exit_code == EXIT_PASS, [r.id for r in result.report.failures()]


def test_group_algebra_demo_names():
    assert generate_demo("group_algebra(S3)")["name"] == "group_algebra_S3"
    doc = generate_demo("group_algebra_Z2xZ2")
    assert list(doc["groups"]) == ["Z2", "Z2xZ2"]


@pytest.mark.parametrize("name", ["group_algebra_Q8", "nonsense"])
def test_unknown_demo(name):
    with pytest.raises(UnknownDemo):
        generate_demo(name)


def test_make_demo_script(tmp_path):
    assert make_demo.main(["--name", "group_algebra_Z3", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "group_algebra_z3.scn").exists()
    assert make_demo.main(["--name", "nonsense", "--out-dir", str(tmp_path)]) == 2


E11 = [[1.0, 0.0], [0.0, 0.0]]
E22 = [[0.0, 0.0], [0.0, 1.0]]
I2 = [[1.0, 0.0], [0.0, 1.0]]
SX = [[0.0, 1.0], [1.0, 0.0]]


def _flip_scenario(maps: dict) -> dict:
    # the coordinate swap on the diagonal algebra is an outer automorphism
    return {
        "name": "diagonal_flip",
        "groups": {"Z2": {"cyclic": 2}},
        "algebras": {"D2": {"basis": [E11, E22]}},
        "bimodules": {"X": {"left": "D2", "right": "D2", "basis": [E11, E22]}},
        "actions": {"flip": {"algebra": "D2", "group": "Z2", "maps": maps}},
        "bimodule_actions": {
            "lam": {
                "bimodule": "X",
                "left": "flip",
                "right": "flip",
                "left_unitaries": {"0": I2, "1": SX},
                "right_unitaries": {"0": I2, "1": SX},
            }
        },
        "tasks": [{"op": "verify_action", "alpha": "flip"}],
    }


def test_matrix_action_and_its_crossed_product(tmp_path):
    doc = _flip_scenario({"0": I2, "1": SX})
    doc["tasks"].append({"op": "crossed_product", "alpha": "flip", "beta": "flip", "lambda": "lam"})
    result = run_scenario(_write(tmp_path, doc))
    assert result.exit_code == EXIT_PASS, [r.id for r in result.report.failures()]
    assert result.report.get("t01.verify_action.flip.action.composition").status == "pass"


def test_realified_action_maps(tmp_path):
    realified = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
    identity = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    result = run_scenario(_write(tmp_path, _flip_scenario({"0": identity, "1": realified})))
    assert result.exit_code == EXIT_PASS


def test_non_automorphism_map_fails(tmp_path):
    result = run_scenario(_write(tmp_path, _flip_scenario({"0": I2, "1": [[1.0, 1.0], [0.0, 1.0]]})))
    assert result.exit_code == EXIT_FAIL
    assert result.report.get("t01.verify_action.flip.action.unital[1]").status == "fail"


@pytest.mark.parametrize(
    "maps",
    [
        {"0": I2},
        {"0": I2, "1": SX, "2": SX},
        {"0": I2, "1": [[1.0]]},
        {"0": I2, "1": [[1, 0, 0, -1], [0, 1, 1, 0], [0, 0, 1, 0], [0, 0, 0, 1]]},
    ],
)
def test_bad_action_maps_are_malformed(tmp_path, maps):
    result = run_scenario(_write(tmp_path, _flip_scenario(maps)))
    assert result.exit_code == EXIT_MALFORMED


def test_missing_unitary_is_malformed(tmp_path):
    doc = _flip_scenario({"0": I2, "1": SX})
    doc["bimodule_actions"]["lam"]["left_unitaries"] = {"0": I2}
    result = run_scenario(_write(tmp_path, doc))
    assert result.exit_code == EXIT_MALFORMED
    assert "missing [1]" in result.report.get("scenario.malformed").message


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), [0.0, float("-inf")]])
def test_non_finite_entries_are_malformed(tmp_path, bad):
    doc = {
        "groups": {"Z2": {"cyclic": 2}},
        "bundles": {"B": {"group": "Z2", "fibers": {"0": [[[1.0, 0.0], [0.0, bad]]]}}},
    }
    result = run_scenario(_write(tmp_path, doc))
    assert result.exit_code == EXIT_MALFORMED
    assert "finite" in result.report.get("scenario.malformed").message


def test_C_M_with_mismatched_dimensions_is_a_task_error(tmp_path):
    doc = {
        "algebras": {"D2": {"basis": [E11, E22]}},
        "bimodules": {
            "X": {"left": "D2", "right": "D2", "basis": [E11, E22]},
            "M": {"left": "D2", "right": "D2", "basis": [E11]},
        },
        "involutions": {"x": {"bimodule": "X"}},
        "tasks": [{"op": "build_C_M", "bimodule": "M", "involution": "x", "involution_y": "x"}],
    }
    result = run_scenario(_write(tmp_path, doc))
    assert result.exit_code == EXIT_FAIL
    assert result.report.get("t01.build_C_M.x.error").message.startswith("NotAnInvolutiveIsomorphism")
    assert result.report.get("t01.build_C_M.x.phi.bijective").status == "fail"
