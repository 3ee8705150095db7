import json
import subprocess

import jsonschema
import pytest


def load_schema(schema_dir, name):
    return json.loads((schema_dir / name).read_text())


@pytest.mark.parametrize("fixture", ["split_5050.exp", "split_7030.exp", "no_reflection.exp"])
def test_herald_json_matches_schema(cli, fixtures, schema_dir, fixture):
    out = subprocess.run([cli, "herald", "--json", str(fixtures / fixture)], check=True, capture_output=True, text=True)
    report = json.loads(out.stdout)
    jsonschema.validate(report, load_schema(schema_dir, "herald.schema.json"))


def test_montecarlo_summary_matches_schema(cli, fixtures, schema_dir, tmp_path):
    subprocess.run([cli, "montecarlo", "--out", str(tmp_path), str(fixtures / "split_6040.exp")], check=True,
                   capture_output=True)
    summary = json.loads((tmp_path / "summary.json").read_text())
    jsonschema.validate(summary, load_schema(schema_dir, "summary.schema.json"))
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert sorted(manifest["outputs"]) == sorted(p.name for p in tmp_path.iterdir() if p.name != "manifest.json")


def test_parse_error_exit_code(cli, tmp_path):
    bad = tmp_path / "bad.exp"
    bad.write_text("source spdc p1=0.5 nmax=4 visibility=1\nherald t1\n")
    out = subprocess.run([cli, "herald", str(bad)], capture_output=True, text=True)
    assert out.returncode == 2
    assert "p1=0.5" in out.stderr
