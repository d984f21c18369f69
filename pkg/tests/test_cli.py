from __future__ import annotations

import json

import pytest

from conftest import DEMO_DATA
from mock_server import MockProviderServer
from ragmt.cli import main
from ragmt.pipeline import ExperimentConfig
from ragmt.provider import ProviderConfig

CORPUS = str(DEMO_DATA / "corpus.tsv")
TEST = str(DEMO_DATA / "test.tsv")
DRAFTS = str(DEMO_DATA / "drafts.tsv")
LEXICON = str(DEMO_DATA / "lexicon.tsv")


def run_cli(capsys, *argv) -> tuple[int, str]:
    code = main(list(argv))
    return code, capsys.readouterr().out


class TestCorpusCommands:
    def test_validate(self, capsys):
        code, out = run_cli(capsys, "corpus", "validate", CORPUS)
        payload = json.loads(out)
        assert code == 0
        assert payload == {"file": CORPUS, "pairs": 40, "valid": True}

    def test_validate_rejects_malformed(self, tmp_path, capsys):
        bad = tmp_path / "bad.tsv"
        bad.write_text("only two\tcolumns\n", encoding="utf-8")
        with pytest.raises(Exception):
            main(["corpus", "validate", str(bad)])

    def test_split_writes_three_files(self, tmp_path, capsys):
        # the split needs NT pairs for train/validation and OT pairs for test
        combined = tmp_path / "combined.tsv"
        combined.write_text(
            (DEMO_DATA / "corpus.tsv").read_text(encoding="utf-8")
            + (DEMO_DATA / "test.tsv").read_text(encoding="utf-8"),
            encoding="utf-8",
        )
        code, out = run_cli(
            capsys, "corpus", "split", "--corpus", str(combined),
            "--train-frac", "0.8", "--test-book", "GEN", "--test-verses", "3",
            "--seed", "7", "--out-dir", str(tmp_path / "splits"),
        )
        payload = json.loads(out)
        assert code == 0
        assert payload["test"] == 3
        for name in ("train", "validation", "test"):
            assert (tmp_path / "splits" / f"{name}.tsv").exists()

    def test_leak_check_clean_vs_dirty(self, tmp_path, capsys):
        code, out = run_cli(capsys, "corpus", "leak-check", "--test", TEST,
                            "--aux", CORPUS)
        assert code == 0
        assert json.loads(out)["clean"] is True
        # an aux file containing a test verse must fail with exit code 1
        leaky = tmp_path / "leaky.tsv"
        test_lines = (DEMO_DATA / "test.tsv").read_text(encoding="utf-8").splitlines()
        leaky.write_text(test_lines[0] + "\n", encoding="utf-8")
        code, out = run_cli(capsys, "corpus", "leak-check", "--test", TEST,
                            "--aux", str(leaky))
        assert code == 1
        assert json.loads(out)["clean"] is False


class TestAnalyzeCommands:
    def test_oov(self, tmp_path, capsys):
        train = tmp_path / "train.txt"
        eval_file = tmp_path / "eval.txt"
        train.write_text("the lord spoke\nthe people heard\n", encoding="utf-8")
        eval_file.write_text("the lord created leviathan\n", encoding="utf-8")
        code, out = run_cli(capsys, "analyze", "oov", "--train", str(train),
                            "--eval", str(eval_file))
        payload = json.loads(out)
        assert code == 0
        assert payload["oov_rate_token"] == pytest.approx(0.5)
        assert 0.0 <= payload["oov_rate_type"] <= 1.0

    def test_termfreq_with_csv(self, tmp_path, capsys):
        corpus_file = tmp_path / "text.txt"
        corpus_file.write_text("sin and grace and sin\n", encoding="utf-8")
        terms = tmp_path / "terms.txt"
        terms.write_text("sin\ngrace\ncovenant\n", encoding="utf-8")
        csv_path = tmp_path / "tf.csv"
        code, out = run_cli(
            capsys, "analyze", "termfreq", "--terms-file", str(terms),
            "--corpus", str(corpus_file), "--label", "toy", "--csv", str(csv_path),
        )
        rows = json.loads(out)
        assert code == 0
        by_term = {r["term"]: r for r in rows}
        assert by_term["sin"]["raw_count"] == 2
        assert by_term["sin"]["count_per_10k"] == pytest.approx(4000.0)
        assert by_term["covenant"]["raw_count"] == 0
        assert csv_path.read_text(encoding="utf-8").startswith("term,")


class TestRetrieveCommand:
    @pytest.mark.parametrize("strategy", ["bm25", "chrf-cw", "fuzzy-word"])
    def test_offline_strategies(self, strategy, capsys):
        code, out = run_cli(
            capsys, "retrieve", "--strategy", strategy, "--corpus-file", CORPUS,
            "--query", "In the beginning was the Word", "--k", "3", "--n", "2",
        )
        results = json.loads(out)
        assert code == 0
        assert results
        assert all(r["score"] > 0 for r in results)
        assert all(r["target"] for r in results)

    def test_grammar_pool_flag(self, capsys):
        code, out = run_cli(
            capsys, "retrieve", "--strategy", "bm25", "--corpus-file", CORPUS,
            "--corpus", "nt+grammar", "--query", "I am eating rice", "--k", "3",
        )
        results = json.loads(out)
        assert any(r["id"].startswith("GRM.") for r in results)

    def test_dense_via_provider_config(self, tmp_path, capsys):
        with MockProviderServer() as server:
            provider_file = tmp_path / "provider.json"
            provider_file.write_text(json.dumps({
                "base_url": server.base_url,
                "model_name": "mock-chat",
                "embedding_model_name": "mock-embed",
                "cache_dir": str(tmp_path / "cache"),
            }), encoding="utf-8")
            code, out = run_cli(
                capsys, "retrieve", "--strategy", "dense", "--corpus-file", CORPUS,
                "--query", "light shines in darkness", "--k", "2",
                "--provider-config", str(provider_file),
            )
        results = json.loads(out)
        assert code == 0
        assert len(results) == 2


class TestPromptCommand:
    def test_render_direct(self, capsys):
        code, out = run_cli(capsys, "prompt", "render", "--mode", "direct",
                            "--source", "God is love.", "--dry-run")
        assert code == 0
        assert "--- system ---" in out
        assert "Source text (English): God is love." in out

    def test_render_postedit_includes_draft(self, capsys):
        code, out = run_cli(capsys, "prompt", "render", "--mode", "postedit",
                            "--source", "God is love.", "--draft", "Lamatua hia.")
        assert code == 0
        assert "Machine translation (Dhao): Lamatua hia." in out


class TestScoreCommand:
    def test_score_with_csv(self, tmp_path, capsys):
        hyp = tmp_path / "hyp.txt"
        ref = tmp_path / "ref.txt"
        hyp.write_text("the quick brown fox\nhello world\n", encoding="utf-8")
        ref.write_text("the quick brown fox\nhello there world\n", encoding="utf-8")
        csv_path = tmp_path / "scores.csv"
        code, out = run_cli(capsys, "score", "--hyp", str(hyp), "--ref", str(ref),
                            "--csv", str(csv_path))
        payload = json.loads(out)
        assert code == 0
        assert payload["bleu_label"] == "BLEU(whitespace)"
        assert len(payload["per_sentence"]) == 2
        assert payload["per_sentence"][0]["chrf"] == pytest.approx(100.0)
        lines = csv_path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "id,bleu,chrf"
        assert len(lines) == 3


class TestRunSweepCompare:
    def write_config(self, tmp_path, **overrides) -> str:
        data = dict(
            mode="NMT_ONLY",
            corpus_path=CORPUS,
            lexicon_path=LEXICON,
            test_path=TEST,
            draft_path=DRAFTS,
            output_dir=str(tmp_path / "runs"),
        )
        data.update(overrides)
        ExperimentConfig.from_dict(data)  # validate before writing
        path = tmp_path / "config.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    def test_run_nmt_only(self, tmp_path, capsys):
        config = self.write_config(tmp_path)
        code, out = run_cli(capsys, "run", "--config", config)
        payload = json.loads(out)
        assert code == 0
        assert payload["sentences"] == 10
        assert 0.0 < payload["corpus_chrf"] < 100.0

    def test_sweep_and_compare_round_trip(self, tmp_path, capsys):
        with MockProviderServer() as server:
            provider = vars(ProviderConfig(
                base_url=server.base_url, model_name="mock-chat",
                cache_dir=str(tmp_path / "cache"),
            )).copy()
            config = self.write_config(
                tmp_path, mode="POST_EDIT", context="BM25", k=1,
                provider=provider,
            )
            code, out = run_cli(capsys, "sweep", "--config", config,
                                "--values", "1,2",
                                "--csv", str(tmp_path / "sweep.csv"))
            assert code == 0
            rows = json.loads(out)
            assert [r["k_or_n"] for r in rows] == [1, 2]
            assert (tmp_path / "sweep.csv").exists()

        # compare the two reports the sweep produced
        runs = tmp_path / "runs"
        reports = sorted(runs.glob("report-*.json"))
        assert len(reports) == 2
        code, out = run_cli(capsys, "compare", str(reports[0]), str(reports[1]),
                            "--baseline", reports[0].stem)
        table = json.loads(out)
        assert code == 0
        baseline_row = next(r for r in table if r["label"] == reports[0].stem)
        assert baseline_row["delta_chrF++"] == "+0.00"


def test_unknown_command_exits():
    with pytest.raises(SystemExit):
        main(["no-such-command"])
