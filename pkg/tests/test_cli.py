"""End-to-end command-line pipeline tests on small synthetic corpora."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from wordtradeoff import cli
from wordtradeoff.cli import RunConfig, cmd_analyze, main
from wordtradeoff.corpus import parse_corpus
from wordtradeoff.measures import read_results_csv


def write_toy_corpus(path: Path, mode: str, seed: int, sentences: int = 25) -> None:
    code = main(
        [
            "synth", "toy",
            "--mode", mode,
            "--sentences", str(sentences),
            "--seed", str(seed),
            "--out", str(path),
        ]
    )
    assert code == 0


def write_two_book_corpus(path: Path, tid_hint: str = "x") -> None:
    lines = ["# language_code: toy"]
    words = ["mata", "kilo", "rena", "bopu", "sati", "dole", "figa"]
    for book_id in (40, 41):
        for verse in range(1, 13):
            text = " ".join(
                words[(book_id + verse + i) % len(words)] for i in range(6)
            )
            lines.append(f"{book_id}\t1\t{verse}\t{text}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestSynth:
    def test_toy_output_parses_as_tsv(self, tmp_path):
        out = tmp_path / "toy.tsv"
        write_toy_corpus(out, "positional", seed=3)
        tr = parse_corpus(out, "tsv")
        assert tr.language == "toy_positional"
        assert len(tr.books[1].verses) == 25

    def test_stream_output_parses_and_chunks(self, tmp_path):
        out = tmp_path / "stream.tsv"
        code = main(
            [
                "synth", "stream", "--kind", "iid", "--k", "3",
                "--n", "500", "--seed", "1", "--chunk", "40", "--out", str(out),
            ]
        )
        assert code == 0
        tr = parse_corpus(out, "tsv")
        total = sum(len(v.text) for v in tr.books[1].verses)
        assert total == 500
        assert all(len(v.text) <= 40 for v in tr.books[1].verses)

    def test_markov_stream_requires_transition(self, tmp_path, capsys):
        code = main(["synth", "stream", "--kind", "markov1", "--out", "-"])
        assert code == 1


class TestAnalyze:
    def _run(self, tmp_path, **overrides) -> tuple[int, Path]:
        corpus = tmp_path / "toy1.tsv"
        write_two_book_corpus(corpus)
        out_dir = tmp_path / "out"
        kwargs = dict(books=(40, 41), replicates=2)
        kwargs.update(overrides)
        config = RunConfig(
            inputs=(str(corpus),), fmt="tsv", out_dir=str(out_dir), **kwargs
        )
        return cmd_analyze(config), out_dir

    def test_row_count_and_exit_code(self, tmp_path):
        code, out_dir = self._run(tmp_path)
        assert code == 0
        rows = read_results_csv(out_dir / "results.csv")
        assert len(rows) == 2 * 2  # 2 books x 2 replicates
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["rows_written"] == 4
        assert manifest["version"]

    def test_rerun_byte_identical(self, tmp_path):
        code1, out_dir = self._run(tmp_path)
        first = (out_dir / "results.csv").read_bytes()
        first_manifest = (out_dir / "manifest.json").read_bytes()
        code2, _ = self._run(tmp_path)
        assert (code1, code2) == (0, 0)
        assert (out_dir / "results.csv").read_bytes() == first
        assert (out_dir / "manifest.json").read_bytes() == first_manifest

    def test_missing_book_reported_and_empty_results(self, tmp_path):
        corpus = tmp_path / "toy1.tsv"
        write_two_book_corpus(corpus)
        out_dir = tmp_path / "out"
        config = RunConfig(
            inputs=(str(corpus),),
            fmt="tsv",
            books=(42,),  # not present
            out_dir=str(out_dir),
        )
        assert cmd_analyze(config) == 1
        assert read_results_csv(out_dir / "results.csv") == []
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["missing_books"] == {"toy1": [42]}

    def test_unreadable_input_fatal(self, tmp_path):
        config = RunConfig(inputs=(str(tmp_path / "nope.tsv"),), fmt="tsv")
        assert cmd_analyze(config) == 1

    def test_per_book_error_isolated(self, tmp_path, monkeypatch):
        real = cli.measure_replicate

        def flaky(book, replicate, cfg):
            if book.book_id == 41:
                raise RuntimeError("injected failure")
            return real(book, replicate, cfg)

        monkeypatch.setattr(cli, "measure_replicate", flaky)
        code, out_dir = self._run(tmp_path)
        assert code == 2
        rows = read_results_csv(out_dir / "results.csv")
        assert {r.book_id for r in rows} == {40}
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert len(manifest["errors"]) == 2
        assert manifest["errors"][0]["error"] == "injected failure"

    def test_workers_parallel_same_bytes(self, tmp_path):
        code1, out1 = self._run(tmp_path)
        corpus = tmp_path / "toy1.tsv"
        out2 = tmp_path / "out2"
        config = RunConfig(
            inputs=(str(corpus),),
            fmt="tsv",
            books=(40, 41),
            replicates=2,
            workers=2,
            out_dir=str(out2),
        )
        assert cmd_analyze(config) == 0
        assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()

    def test_truncation_skipped_for_single_book(self, tmp_path):
        code, out_dir = self._run(tmp_path, books=(40,))
        assert code == 0
        rows = read_results_csv(out_dir / "results.csv")
        assert {r.book_id for r in rows} == {40}


class TestStats:
    def _results(self, tmp_path) -> Path:
        corpora = []
        for seed, mode in [(0, "positional"), (1, "positional"), (0, "affixal"), (1, "affixal")]:
            path = tmp_path / f"toy_{mode}_{seed}.tsv"
            write_toy_corpus(path, mode, seed=seed, sentences=30)
            corpora.append(str(path))
        out_dir = tmp_path / "out"
        config = RunConfig(
            inputs=tuple(corpora),
            fmt="tsv",
            books=(1,),
            replicates=1,
            truncate="off",
            out_dir=str(out_dir),
        )
        assert cmd_analyze(config) == 0
        return out_dir / "results.csv"

    def test_stats_outputs_written(self, tmp_path):
        results = self._results(tmp_path)
        code = main(["stats", str(results), "--group-by", "language"])
        assert code == 0
        out = results.parent
        assert (out / "fits.csv").exists()
        assert (out / "ranks.csv").exists()
        assert (out / "rank_hist.csv").exists()
        # single book: 12x12 matrix degenerates to 2x2, still written
        assert (out / "corr_matrix.csv").exists()
        # positional vs affixal language groups sit on opposite corners,
        # so the cross-group correlation must come out negative
        fit_line = (out / "fits.csv").read_text().splitlines()[1]
        r_s = float(fit_line.split(",")[-1])
        assert r_s < 0

    def test_single_translation_skips_corr_matrix(self, tmp_path):
        corpus = tmp_path / "only.tsv"
        write_toy_corpus(corpus, "positional", seed=5, sentences=30)
        out_dir = tmp_path / "solo"
        config = RunConfig(
            inputs=(str(corpus),), fmt="tsv", books=(1,), replicates=1,
            truncate="off", out_dir=str(out_dir),
        )
        assert cmd_analyze(config) == 0
        code = main(["stats", str(out_dir / "results.csv")])
        assert code == 0
        assert (out_dir / "ranks.csv").exists()
        assert not (out_dir / "corr_matrix.csv").exists()

    def test_missing_results_fatal(self, tmp_path):
        assert main(["stats", str(tmp_path / "none.csv")]) == 1

    def test_schema_violation_fatal(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        assert main(["stats", str(bad)]) == 1


class TestOracleCheckCommand:
    def test_small_pass(self, capsys):
        code = main(["oracle-check", "--count", "20", "--max-len", "200"])
        assert code == 0
        assert "PASS" in capsys.readouterr().out

    def test_zero_cases_vacuous_pass(self, capsys):
        code = main(["oracle-check", "--count", "0"])
        assert code == 0
        assert "vacuous" in capsys.readouterr().out


class TestRunConfig:
    def test_order_scope_flag_mapping(self):
        cfg = RunConfig(inputs=(), order_scope="book")
        assert cfg.measure_config().order_scope == "per_book"
        assert RunConfig(inputs=()).measure_config().order_scope == "per_verse"

    def test_no_verse_shuffle_mapping(self):
        cfg = RunConfig(inputs=(), verse_shuffle=False)
        assert not cfg.measure_config().verse_shuffle


class TestParser:
    def test_bad_flag_exits_1(self):
        with pytest.raises(SystemExit) as err:
            main(["analyze", "--format", "xml", "x.tsv"])
        assert err.value.code == 1

    def test_bad_book_list_exits_1(self):
        with pytest.raises(SystemExit) as err:
            main(["analyze", "--books", "forty", "x.tsv"])
        assert err.value.code == 1

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["--version"])
        assert err.value.code == 0
