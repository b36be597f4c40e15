import json
import subprocess
import sys
from pathlib import Path

import pytest

from shapegate import DriftReport, SchemaPolicy, load_schema, parse_schema, serialize_schema, validate
from shapegate.cli import main

FIXTURES = Path(__file__).parent / "fixtures" / "cli"
CASES = json.loads((FIXTURES / "cases.json").read_text())


def run(*args, cwd=FIXTURES):
    proc = subprocess.run([sys.executable, "-m", "shapegate", *args], capture_output=True, text=True, cwd=cwd)
    return proc.returncode, proc.stdout, proc.stderr


@pytest.mark.parametrize("case", CASES, ids=[c["name"] for c in CASES])
def test_golden(case):
    code, out, err = run(*case["args"])
    assert code == case["exit"], err
    for needle in case.get("contains", []):
        assert needle in out
    for needle in case.get("stderr", []):
        assert needle in err
    if code == 2:
        assert out == ""


SCHEMAS = sorted(p.name for p in FIXTURES.glob("*.json") if p.name not in ("cases.json", "malformed.json"))


@pytest.mark.parametrize("policy", [p.value for p in SchemaPolicy])
def test_diff_exit_equals_validate_verdict(policy, capsys):
    for left in SCHEMAS:
        for right in SCHEMAS:
            code = main(["diff", "--left", str(FIXTURES / left), "--right", str(FIXTURES / right), "--policy", policy])
            verdict = validate(load_schema(FIXTURES / left), load_schema(FIXTURES / right), SchemaPolicy.parse(policy))
            assert code == (0 if verdict is None else 1)
    capsys.readouterr()


def test_diff_header_names_direction(capsys):
    main(["diff", "--left", str(FIXTURES / "orders_extra.json"), "--right", str(FIXTURES / "orders.json"), "--policy", "forward"])
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("producer (left): ") and out[0].endswith("orders_extra.json")
    assert out[1].startswith("contract (right): ")
    assert out[2] == "policy: forward"
    assert out[3] == "ExtraField at debug: expected absent, actual string"


def test_json_report_round_trips(capsys):
    code = main(
        ["diff", "--left", str(FIXTURES / "orders_renamed.json"), "--right", str(FIXTURES / "orders.json"),
         "--policy", "exact", "--format", "json"]
    )
    payload = json.loads(capsys.readouterr().out)
    assert code == 1 and payload["status"] == "drift" and payload["policy"] == "exact"
    assert all(list(item) == ["kind", "path", "expected", "actual", "message"] for item in payload["items"])
    report = DriftReport.from_dict(payload)
    assert [i.to_dict() for i in report.items] == payload["items"]


def test_json_ok(capsys):
    main(["diff", "--left", str(FIXTURES / "orders.json"), "--right", str(FIXTURES / "orders.json"),
          "--policy", "full", "--format", "json"])
    payload = json.loads(capsys.readouterr().out)
    assert payload["status"] == "ok" and payload["items"] == []


def test_infer_prints_canonical_schema():
    code, out, _ = run("infer", "--data", "orders.jsonl")
    assert code == 0
    assert serialize_schema(parse_schema(out)) == out
    assert out == (FIXTURES / "data_contract.json").read_text()


def test_missing_file_is_usage_error():
    code, out, err = run("diff", "--left", "nope.json", "--right", "orders.json", "--policy", "exact")
    assert code == 2 and "nope.json" in err


def test_bench_invalid_suite_and_sizes():
    assert run("bench", "--suite", "gpu")[0] == 2
    assert run("bench", "--suite", "compile", "--sizes", "10,x")[0] == 2
    assert run("bench", "--suite", "compile", "--sizes", "0")[0] == 2
    code, _, err = run("bench", "--suite", "runtime", "--iterations", "0")
    assert code == 2 and "positive" in err


def test_check_command(tmp_path):
    good = tmp_path / "good.py"
    good.write_text(
        "from dataclasses import dataclass\nfrom shapegate import Policy, static_assert_conforms\n"
        "@dataclass\nclass A:\n    x: int\nW = static_assert_conforms(A, A, Policy.EXACT)\n"
    )
    assert run("check", str(good))[0] == 0
    bad = tmp_path / "bad.py"
    bad.write_text("def f(:\n")
    assert run("check", str(bad))[0] == 2


def test_usage_errors_exit_2():
    assert run()[0] == 2
    assert run("diff", "--left", "orders.json")[0] == 2
