import json
from collections import Counter
from pathlib import Path

import pytest

from conftest import GENERIC, load_json
from discourse_mt.cli import main


def translate(fixture_dir, out, *extra):
    return main(["translate", "--config", str(fixture_dir / "config.json"), "--out", str(out), *extra])


def test_translate_writes_complete_records(fixture_dir, tmp_path, capsys):
    assert translate(fixture_dir, tmp_path / "run") == 0
    printed = capsys.readouterr().out
    assert "corpus: calls=76" in printed and "wall=" in printed and "cost=" in printed
    summary = load_json(tmp_path / "run" / "summary.json")
    assert [d["complete"] for d in summary["documents"]] == [True, True, True]
    for d in summary["documents"]:
        assert (tmp_path / "run" / d["dir"] / "document.txt").exists()


def test_two_document_corpus(fixture_dir, tmp_path):
    text = (fixture_dir / "corpus.txt").read_text(encoding="utf-8").split("\n\n")
    (fixture_dir / "two.txt").write_text("\n\n".join(text[:2]), encoding="utf-8")
    assert translate(fixture_dir, tmp_path / "run", "--input", str(fixture_dir / "two.txt")) == 0
    assert len(load_json(tmp_path / "run" / "summary.json")["documents"]) == 2


def test_invalid_ablation_is_a_config_error(fixture_dir, tmp_path, capsys):
    cfg = load_json(fixture_dir / "config.json")
    cfg["ablation"] = "everything"
    (fixture_dir / "config.json").write_text(json.dumps(cfg))
    assert translate(fixture_dir, tmp_path / "run") == 2
    assert "ablation" in capsys.readouterr().err
    assert not (tmp_path / "run").exists()


def test_usage_errors_exit_2(capsys):
    assert main(["translate"]) == 2
    assert main(["frobnicate"]) == 2


def test_rerun_uses_cache(fixture_dir, tmp_path, capsys):
    out = tmp_path / "run"
    translate(fixture_dir, out)
    capsys.readouterr()
    assert translate(fixture_dir, out) == 0
    assert "corpus: calls=76 backend_calls=0 cache_hits=76" in capsys.readouterr().out


def test_failed_document_exits_1(fixture_dir, tmp_path):
    script = [e for e in load_json(fixture_dir / "mock_script.json")
              if not (e["match"].get("doc") == "doc1" and e["match"]["agent"] == "translation")]
    (fixture_dir / "mock_script.json").write_text(json.dumps(script))
    assert translate(fixture_dir, tmp_path / "run") == 1
    summary = load_json(tmp_path / "run" / "summary.json")
    assert [d["complete"] for d in summary["documents"]] == [True, False, True]
    assert (tmp_path / "run" / "docs" / "doc1" / "error.json").exists()


def test_seed_and_backend_overrides(fixture_dir, tmp_path):
    cfg = load_json(fixture_dir / "config.json")
    cfg["segmentation"] = {"kind": "random"}
    cfg["edges"] = {"kind": "chain"}
    cfg["backend"] = {"kind": "http", "url": "http://unused.invalid"}
    (fixture_dir / "config.json").write_text(json.dumps(cfg))
    script = str(fixture_dir / "generic.json")
    (fixture_dir / "generic.json").write_text(json.dumps(GENERIC))
    assert translate(fixture_dir, tmp_path / "a", "--seed", "5", "--mock-script", script) == 0
    assert translate(fixture_dir, tmp_path / "b", "--seed", "5", "--mock-script", script) == 0
    seg = lambda d: load_json(d / "docs" / "doc0" / "segmentation.json")
    assert seg(tmp_path / "a") == seg(tmp_path / "b")
    assert load_json(tmp_path / "a" / "config.json")["segmentation"]["seed"] == 5
    assert translate(fixture_dir, tmp_path / "c", "--backend-url", "http://x", "--mock-script", script) == 2


def test_evaluate_identity_references(fixture_dir, tmp_path, capsys):
    out = tmp_path / "run"
    translate(fixture_dir, out)
    rc = main(["evaluate", "--run-dir", str(out), "--refs", str(fixture_dir / "references.txt"),
               "--lexicon", str(fixture_dir / "lexicon.json"), "--zp", str(fixture_dir / "zp.json")])
    assert rc == 0
    report = load_json(out / "metrics.json")
    assert report["corpus"]["d_bleu"]["value"] == 100.0
    assert all(d["d_bleu"]["value"] == 100.0 for d in report["documents"])
    assert report["corpus"]["azpt"]["value"] == 0.75
    assert report["corpus"]["ctt"]["value"] == 1.0
    assert (out / "metrics.md").read_text().startswith("# Metrics report")


def test_evaluate_without_inputs_reports_na(fixture_dir, tmp_path):
    out = tmp_path / "run"
    translate(fixture_dir, out)
    assert main(["evaluate", "--run-dir", str(out)]) == 0
    report = load_json(out / "metrics.json")
    for name in ("d_bleu", "ctt", "azpt"):
        assert report["corpus"][name]["value"] is None
        assert report["corpus"][name]["reason"]
    assert "n/a" in (out / "metrics.md").read_text()
    # CR histogram is present because the graphs have paths
    assert sum(report["corpus"]["paths"]["cr_histogram"].values()) == report["corpus"]["paths"]["paths"] > 0


def test_evaluate_missing_artifacts(tmp_path):
    assert main(["evaluate", "--run-dir", str(tmp_path)]) == 1
    assert main(["graph-stats", "--run-dir", str(tmp_path)]) == 1


def recount(run_dir: Path):
    """Independent recount of graph distributions from the raw JSON files."""
    summary = json.loads((run_dir / "summary.json").read_text())
    disc, sents, nonc = Counter(), Counter(), 0
    for d in summary["documents"]:
        spans = json.loads((run_dir / d["dir"] / "segmentation.json").read_text())
        edges = json.loads((run_dir / d["dir"] / "graph.json").read_text())["edges"]
        disc[len(spans)] += 1
        for lo, hi in spans:
            sents[hi - lo + 1] += 1
        nonc += sum(1 for a, b in edges if b - a > 1)
    return {str(k): v for k, v in sorted(disc.items())}, {str(k): v for k, v in sorted(sents.items())}, nonc


def test_graph_stats_matches_recount(fixture_dir, tmp_path, capsys):
    out = tmp_path / "run"
    translate(fixture_dir, out)
    capsys.readouterr()
    assert main(["graph-stats", "--run-dir", str(out), "--json"]) == 0
    stats = json.loads(capsys.readouterr().out)
    disc, sents, nonc = recount(out)
    assert stats["discourses_per_document"] == disc
    assert stats["sentences_per_discourse"] == sents
    assert stats["non_consecutive_edges_total"] == nonc == 1


def test_graph_stats_chain_run_has_no_long_edges(fixture_dir, tmp_path, capsys):
    cfg = load_json(fixture_dir / "config.json")
    cfg["edges"] = {"kind": "chain"}
    (fixture_dir / "config.json").write_text(json.dumps(cfg))
    translate(fixture_dir, tmp_path / "run")
    capsys.readouterr()
    main(["graph-stats", "--run-dir", str(tmp_path / "run"), "--json"])
    assert json.loads(capsys.readouterr().out)["non_consecutive_edges_total"] == 0


def test_translate_is_byte_reproducible(fixture_dir, tmp_path):
    translate(fixture_dir, tmp_path / "a")
    translate(fixture_dir, tmp_path / "b")
    files = lambda root: {p.relative_to(root).as_posix(): p.read_bytes() for p in root.rglob("*") if p.is_file()}
    assert files(tmp_path / "a") == files(tmp_path / "b")
