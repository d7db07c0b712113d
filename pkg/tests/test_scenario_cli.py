"""Scenario loading, the run pipeline, and the command line surface."""

import json
import re

import pytest

from spectral_bounds.cli import main
from spectral_bounds.scenario import (ScenarioError, default_jobs, emit,
                                      load_scenario, run_scenario)

BASE = {
    "label": "square",
    "domain": {"type": "box", "sides": [1.0, 1.0]},
    "spectrum": {"source": "exact-rectangle", "count": 40},
    "bounds": [{"kind": "kroger-avg", "k": [1, 5, 10]}],
    "seed": 0,
}


def write(tmp_path, data, name="scn.json"):
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data))
    return p


def scenario_with(tmp_path, **overrides):
    data = dict(BASE)
    data.update(overrides)
    return write(tmp_path, data)


def test_load_minimal_defaults(tmp_path):
    p = write(tmp_path, {"domain": {"type": "box", "sides": [1, 2]}},
              name="tiny.json")
    s = load_scenario(p)
    assert s.label == "tiny"
    assert s.grid_n == (64, 64)
    assert s.source == "fd"
    assert s.count == 16
    assert s.seed == 0
    assert s.bounds == ()
    assert re.fullmatch(r"[0-9a-f]{12}", s.digest())


BAD_CASES = [
    ("this is not json", "invalid JSON"),
    ([1, 2, 3], "must be an object"),
    ({}, "domain"),
    ({"domain": {"type": "pentagon"}}, "domain.type"),
    ({"domain": {"type": "box"}}, "domain.sides"),
    ({"domain": {"type": "torus", "e1": [1, 0]}}, "domain.e2"),
    ({**BASE, "grid": {"n": 1}}, "grid.n"),
    ({**BASE, "grid": {"n": "many"}}, "grid.n"),
    ({**BASE, "fields": {"w": "1 +"}}, "fields"),
    ({**BASE, "spectrum": {"source": "tarot"}}, "spectrum.source"),
    ({**BASE, "spectrum": {"source": "fd", "count": 0}}, "spectrum.count"),
    ({**BASE, "bounds": ["kroger-avg"]}, r"bounds\[0\]"),
    ({**BASE, "bounds": [{"kind": "bogus", "k": [1]}]}, r"bounds\[0\].kind"),
    ({**BASE, "bounds": [{"kind": "kroger-avg", "k": []}]}, "empty"),
    ({**BASE, "bounds": [{"kind": "kroger-avg"}]}, r"bounds\[0\].k"),
    ({**BASE, "seed": "zero"}, "seed"),
]


@pytest.mark.parametrize("content,match", BAD_CASES,
                         ids=[m for _, m in BAD_CASES])
def test_load_rejects_bad_documents(tmp_path, content, match):
    p = write(tmp_path, content if isinstance(content, str)
              else json.dumps(content))
    with pytest.raises(ScenarioError, match=match):
        load_scenario(p)


def test_load_checks_fd_count_covers_requests(tmp_path):
    p = scenario_with(
        tmp_path,
        spectrum={"source": "fd", "count": 16},
        bounds=[{"kind": "individual-sk", "k": [16]}])
    with pytest.raises(ScenarioError, match="needs 17"):
        load_scenario(p)


def test_exact_rectangle_requires_box(tmp_path):
    p = scenario_with(tmp_path, domain={"type": "disk", "radius": 1.0})
    s = load_scenario(p)
    with pytest.raises(ScenarioError, match="exact-rectangle"):
        run_scenario(s)


def test_run_report_contents(tmp_path):
    s = load_scenario(scenario_with(tmp_path))
    report = run_scenario(s)
    assert report.all_hold
    assert not report.errors
    assert report.label == "square"
    assert report.scenario_digest == s.digest()
    keys = [(r.kind, r.parameter) for r in report.reports]
    assert keys == sorted(keys)
    assert report.spectrum_summary["source"] == "exact-rectangle"
    assert report.spectrum_summary["count"] == 40
    assert report.spectrum_summary["first_values"][0] == 0.0
    text = report.to_json_text()
    assert text.endswith("\n")
    parsed = json.loads(text)
    assert set(parsed) == {"version", "label", "scenario_digest", "seed",
                           "spectrum", "bounds", "errors"}
    csv_text = report.to_csv_text()
    assert csv_text.splitlines()[0] == \
        "kind,parameter,bound,computed,slack,holds"
    assert len(csv_text.splitlines()) == 1 + len(report.reports)


def test_run_deterministic_across_jobs(tmp_path):
    cfg = scenario_with(
        tmp_path,
        bounds=[{"kind": "kroger-avg", "k": [1, 5, 10]},
                {"kind": "riesz-lower", "z": [40.0, 80.0, 120.0]},
                {"kind": "heat-lower", "t": [0.5, 1.0]},
                {"kind": "individual-sk", "k": [3, 7]}])
    serial = run_scenario(load_scenario(cfg), jobs=1)
    threaded = run_scenario(load_scenario(cfg), jobs=4)
    assert serial.to_json_text() == threaded.to_json_text()
    assert serial.to_csv_text() == threaded.to_csv_text()


def test_emit_writes_requested_formats(tmp_path):
    report = run_scenario(load_scenario(scenario_with(tmp_path)))
    out = tmp_path / "results"
    written = emit(report, out, fmt="both")
    assert [p.name for p in written] == ["square.json", "square.csv"]
    assert json.loads((out / "square.json").read_text())["label"] == "square"
    with pytest.raises(ValueError, match="format"):
        emit(report, out, fmt="yaml")


def test_cli_run_ok(tmp_path, capsys):
    cfg = scenario_with(tmp_path)
    code = main(["run", "--config", str(cfg), "--out",
                 str(tmp_path / "out"), "--format", "both"])
    captured = capsys.readouterr()
    assert code == 0
    assert "VIOLATED" not in captured.out
    assert "wrote" in captured.err
    assert (tmp_path / "out" / "square.json").exists()
    assert (tmp_path / "out" / "square.csv").exists()


def test_cli_run_flags_violation(tmp_path, capsys):
    # three eigenvalues cannot carry the t -> 0 heat trace: the truncated
    # trace drops below the Weyl floor, an honest holds=false
    cfg = scenario_with(
        tmp_path,
        spectrum={"source": "exact-rectangle", "count": 3},
        bounds=[{"kind": "heat-lower", "t": [0.01]}])
    code = main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    captured = capsys.readouterr()
    assert code == 1
    assert "VIOLATED" in captured.out
    assert "1 violations" in captured.err


def test_cli_run_flags_errors(tmp_path, capsys):
    # z beyond the enumerated cutoff cannot be evaluated
    cfg = scenario_with(
        tmp_path,
        spectrum={"source": "exact-rectangle", "count": 3},
        bounds=[{"kind": "riesz-lower", "z": [1.0e4]},
                {"kind": "kroger-avg", "k": [2]}])
    code = main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    captured = capsys.readouterr()
    assert code == 2
    assert "error: riesz-lower" in captured.err
    assert "kroger-avg" in captured.out


def test_run_with_no_bounds_is_spectrum_only(tmp_path, capsys):
    cfg = scenario_with(tmp_path, bounds=[])
    code = main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 0
    payload = json.loads((tmp_path / "o" / "square.json").read_text())
    assert payload["bounds"] == []
    assert payload["spectrum"]["count"] == 40


def test_cli_solver_failure_exits_cleanly(tmp_path, capsys):
    cfg = scenario_with(
        tmp_path,
        grid={"n": 24},
        spectrum={"source": "fd", "count": 4, "method": "iterative",
                  "tolerance": 1e-30},
        bounds=[{"kind": "kroger-avg", "k": [2]}])
    code = main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "solver error" in capsys.readouterr().err


def test_cli_scenario_error_exit(tmp_path, capsys):
    cfg = write(tmp_path, "{broken")
    code = main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "scenario error" in capsys.readouterr().err


def test_cli_run_byte_identical(tmp_path):
    cfg = scenario_with(tmp_path)
    assert main(["run", "--config", str(cfg), "--out",
                 str(tmp_path / "a"), "--format", "both"]) == 0
    assert main(["run", "--config", str(cfg), "--out",
                 str(tmp_path / "b"), "--format", "both"]) == 0
    for name in ("square.json", "square.csv"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


def test_cli_spectrum_text_and_json(tmp_path, capsys):
    cfg = scenario_with(tmp_path)
    assert main(["spectrum", "--config", str(cfg), "--count", "4"]) == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0].startswith("# source=exact-rectangle")
    assert len(lines) == 5
    assert lines[1] == "0\t0.0"

    assert main(["spectrum", "--config", str(cfg), "--count", "4",
                 "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["values"] == pytest.approx(
        [0.0, 9.869604401089358, 9.869604401089358, 19.739208802178716])


def test_cli_bound_subcommand(tmp_path, capsys):
    cfg = scenario_with(tmp_path)
    assert main(["bound", "--config", str(cfg), "--kind", "general-sum",
                 "--param", "5", "10"]) == 0
    out = capsys.readouterr().out
    assert out.count("general-sum") == 2
    assert "ok" in out
    assert main(["bound", "--config", str(cfg), "--kind", "astrology",
                 "--param", "1"]) == 2


def test_cli_selftest(capsys):
    assert main(["selftest", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert "OK: 5/5" in out
    assert out.count("PASS") == 5


def test_default_jobs_env(monkeypatch):
    monkeypatch.delenv("SPECTRAL_BOUNDS_JOBS", raising=False)
    assert default_jobs() == 1
    monkeypatch.setenv("SPECTRAL_BOUNDS_JOBS", "4")
    assert default_jobs() == 4
    monkeypatch.setenv("SPECTRAL_BOUNDS_JOBS", "junk")
    assert default_jobs() == 1
    monkeypatch.setenv("SPECTRAL_BOUNDS_JOBS", "0")
    assert default_jobs() == 1


def test_bundled_scenarios_load_and_run():
    import spectral_bounds

    root = spectral_bounds.__path__[0]
    from pathlib import Path

    files = sorted(Path(root, "scenarios").glob("*.json"))
    assert len(files) >= 2
    for f in files:
        s = load_scenario(f)
        report = run_scenario(s)
        assert report.all_hold, f.name
        assert not report.errors, f.name
