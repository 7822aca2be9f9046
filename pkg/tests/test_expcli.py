import csv
import hashlib
import io
import json

import pytest

from stabgeom import expcli as E


def run(argv):
    buf = io.StringIO()
    code = E.main(argv, buf)
    return code, buf.getvalue()


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_catalog_passes():
    code, text = run(["catalog"])
    assert code == 0
    assert text.strip().endswith("catalog checks passed")
    assert "FAIL" not in text


@pytest.mark.parametrize("argv", [
    ["hist", "--system", "5,1"],
    ["hist", "--samples", "0"],
    ["hist", "--system", "2,1", "--generator", "biased"],
    ["facet-audit", "--system", "2,1", "--samples", "2"],
    ["facets", "export", "nonsense"],
])
def test_usage_errors_exit_2(argv):
    assert run(argv)[0] == 2


def test_bad_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        E.main(["hist", "--system", "two"])
    assert exc.value.code == 2


def test_seeded_reruns_are_bit_exact(tmp_path):
    outs = []
    for k in range(2):
        p = tmp_path / f"run{k}.csv"
        assert run(["compare", "--system", "2,1", "--samples", "5", "--seed", "9", "--out", str(p)])[0] == 0
        outs.append(p)
    assert digest(outs[0]) == digest(outs[1])
    rows = list(csv.DictReader(outs[0].open()))
    assert [int(r["sample"]) for r in rows] == list(range(5))
    assert {"ntd", "rom", "gap", "status", "sre2"} <= set(rows[0])


def test_workers_do_not_change_results(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["threshold", "--system", "2,2", "--samples", "6", "--seed", "1", "--out", str(a)])
    run(["threshold", "--system", "2,2", "--samples", "6", "--seed", "1", "--workers", "2", "--out", str(b)])
    assert digest(a) == digest(b)


def test_json_output_round_trips(tmp_path):
    p = tmp_path / "audit.json"
    code, text = run(["facet-audit", "--generator", "hs", "--samples", "4", "--format", "json", "--out", str(p)])
    assert code == 0
    doc = json.loads(p.read_text())
    assert doc["summary"]["samples"] == 4
    assert "mean_violated_images" in doc["summary"]
    assert len(doc["rows"]) == 4 and "class_8" in doc["rows"][0]
    assert "mean_violated" in text


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"system": "2,3", "samples": 2, "seed": 4, "generator": "biased"}))
    out = tmp_path / "bell.csv"
    code, _ = run(["bell", "--config", str(cfg), "--samples", "3", "--out", str(out)])
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 3 and "mermin3" in rows[0]
    cfg.write_text(json.dumps({"colour": "blue"}))
    assert run(["bell", "--config", str(cfg)])[0] == 2


def test_resume_from_checkpoint(tmp_path, monkeypatch):
    monkeypatch.setattr(E, "CHECKPOINT_EVERY", 2)
    out = tmp_path / "h.csv"
    full = tmp_path / "full.csv"
    run(["hist", "--system", "2,1", "--samples", "5", "--out", str(full)])
    # fake an interrupted run that finished samples 0 and 1
    cfg = E.ExperimentConfig(system=(2, 1), samples=5, out=str(out)).validate()
    part = tmp_path / "h.csv.partial.jsonl"
    part.write_text("".join(json.dumps(E.run_sample("hist", cfg, i)) + "\n" for i in range(2)))
    run(["hist", "--system", "2,1", "--samples", "5", "--resume", "--out", str(out)])
    assert not part.exists()
    assert digest(out) == digest(full)


def test_walk_generator(tmp_path):
    out = tmp_path / "w.csv"
    assert run(["hist", "--system", "2,1", "--generator", "walk", "--step", "0.5",
                "--samples", "6", "--out", str(out)])[0] == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["vertex"] for r in rows] == ["0"] * 3 + ["1"] * 3
    assert float(rows[0]["ntd"]) == pytest.approx(0.2113, abs=2e-3)


def test_concentration_runs_clean():
    code, text = run(["concentration", "--system", "2,1", "--samples", "5"])
    assert code == 0


def test_entanglement_requires_qubit_pairs():
    assert run(["entanglement", "--system", "3,1", "--samples", "1"])[0] == 2
    assert run(["entanglement", "--system", "2,2", "--samples", "2"])[0] == 0


def test_hull_octahedron(tmp_path):
    code, text = run(["hull", "--projection", "octahedron"])
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "# const X Y Z"
    assert len([ln for ln in lines if not ln.startswith("#")]) == 8
    assert "6 points, 8 facets" in lines[-1]


def test_facets_export_import(tmp_path):
    p = tmp_path / "t1.txt"
    assert run(["facets", "export", "table1", "--out", str(p)])[0] == 0
    code, text = run(["facets", "import", str(p)])
    assert code == 0 and text.startswith("8 inequalities on 2 qubits")
    bad = tmp_path / "bad.txt"
    bad.write_text("# const XX\n-5 1\n")
    assert run(["facets", "import", str(bad)])[0] == 1


def test_export_vertices():
    code, text = run(["export-vertices", "--system", "3,1"])
    assert code == 0 and len(json.loads(text)["vertices"]) == 12


def test_csv_quoting_and_precision():
    text = E.rows_to_csv([{"a": 1 / 3, "b": "x,y"}, {"a": float("nan")}])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows == [["a", "b"], ["0.333333333333", "x,y"], ["nan", ""]]
