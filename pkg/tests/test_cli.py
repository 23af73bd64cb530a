"""Tests for the command-line interface."""

import pytest

from src.pathwise import cli
from src.pathwise.utils.logger import setup_logger


@pytest.fixture(autouse=True)
def restore_logger():
    yield
    setup_logger(level="WARNING")


@pytest.fixture
def pathway_files(demo_files, tmp_path):
    """Demo KO table converted to pathways, plus its metadata."""
    table_path, meta_path = demo_files
    out = tmp_path / "pathways.tsv"
    assert cli.main(["convert", str(table_path), "-o", str(out), "--quiet"]) == 0
    return out, meta_path


class TestParsing:
    def test_version(self, capsys):
        assert cli.main(["--version"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("pathwise 0.1.0")
        assert "ko_pathway_map:" in out
        assert "annotations[KEGG_PATHWAY]:" in out

    def test_missing_command(self):
        assert cli.main([]) == 2

    def test_unknown_option(self):
        assert cli.main(["daa", "--bogus"]) == 2

    def test_common_options_before_subcommand(self, tmp_path):
        out = tmp_path / "demo"
        assert cli.main(["--quiet", "--output-dir", str(out), "demo"]) == 0
        assert (out / "demo_ko_abundance.tsv").is_file()

    def test_common_option_defaults(self):
        args = cli.parse_args(cli.build_parser(), ["demo"])
        assert (args.seed, args.output_dir, args.config, args.quiet, args.no_network) == (None, None, None, False, False)

    def test_common_options_in_both_positions(self, tmp_path):
        parser = cli.build_parser()
        args = cli.parse_args(parser, ["--seed", "3", "--no-network", "demo", "--output-dir", str(tmp_path)])
        assert args.seed == 3
        assert args.no_network is True
        assert args.output_dir == tmp_path
        assert cli.parse_args(parser, ["--seed", "1", "demo", "--seed", "2"]).seed == 2


class TestConvert:
    def test_stdout_and_report(self, demo_files, capsys):
        table_path, _ = demo_files
        assert cli.main(["convert", str(table_path), "--quiet"]) == 0
        captured = capsys.readouterr()
        assert captured.out.startswith("function\tS01\t")
        assert "ko05016" in captured.out
        assert "matched" in captured.err

    def test_missing_file(self, tmp_path):
        assert cli.main(["convert", str(tmp_path / "none.tsv"), "--quiet"]) == 2

    def test_custom_map(self, tmp_path, capsys):
        table = tmp_path / "ko.tsv"
        table.write_text("function\tS1\tS2\nK00001\t1\t2\nK00002\t3\t4\nK00411\t5\t5\n")
        custom = tmp_path / "custom.tsv"
        custom.write_text("# provenance: lab map\nko99999\tK00001,K00002\n")
        assert cli.main(["convert", str(table), "--map", str(custom), "--quiet"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "function\tS1\tS2"
        assert [line.split("\t")[0] for line in lines[1:]] == ["ko99999"]
        assert [float(v) for v in lines[1].split("\t")[1:]] == [4.0, 6.0]

    def test_invalid_utf8_is_input_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.tsv"
        bad.write_bytes(b"function\tS1\tS2\nK0\xff\xfe01\t1\t2\n")
        assert cli.main(["convert", str(bad), "--quiet"]) == 2
        err = " ".join(capsys.readouterr().err.split())
        assert "not valid UTF-8: byte 0xff at offset 17" in err


class TestDaa:
    def test_two_methods_write_consensus(self, pathway_files, tmp_path):
        table_path, meta_path = pathway_files
        out = tmp_path / "daa"
        code = cli.main(
            ["daa", str(table_path), str(meta_path), "--methods", "linda,welch_t", "--output-dir", str(out), "--quiet"]
        )
        assert code == 0
        assert sorted(p.name for p in out.iterdir()) == ["consensus.tsv", "daa_linda.tsv", "daa_welch_t.tsv"]
        header = (out / "consensus.tsv").read_text().splitlines()[0]
        assert header.endswith("adjusted_p_linda\tadjusted_p_welch_t")

    def test_aldex2_without_seed_is_reproducible(self, pathway_files, tmp_path):
        table_path, meta_path = pathway_files
        for name in ("a", "b"):
            args = ["daa", str(table_path), str(meta_path), "--methods", "aldex2", "--mc-instances", "8"]
            assert cli.main(args + ["--output-dir", str(tmp_path / name), "--quiet"]) == 0
        first = (tmp_path / "a" / "daa_aldex2.tsv").read_bytes()
        assert first == (tmp_path / "b" / "daa_aldex2.tsv").read_bytes()

    def test_unknown_method(self, pathway_files, tmp_path):
        table_path, meta_path = pathway_files
        args = ["daa", str(table_path), str(meta_path), "--methods", "deseq2", "--output-dir", str(tmp_path)]
        assert cli.main(args + ["--quiet"]) == 2

    def test_missing_group_column(self, pathway_files, tmp_path):
        table_path, meta_path = pathway_files
        args = ["daa", str(table_path), str(meta_path), "--group-column", "diet", "--output-dir", str(tmp_path)]
        assert cli.main(args + ["--quiet"]) == 2

    def test_invalid_utf8_metadata(self, pathway_files, tmp_path):
        table_path, _ = pathway_files
        meta = tmp_path / "meta.tsv"
        meta.write_bytes(b"sample\tgroup\nS01\tA\xe9\n")
        args = ["daa", str(table_path), str(meta), "--output-dir", str(tmp_path / "out")]
        assert cli.main(args + ["--quiet"]) == 2

    def test_internal_error_exit_code(self, pathway_files, tmp_path, monkeypatch):
        table_path, meta_path = pathway_files

        def explode(*args, **kwargs):
            raise RuntimeError("boom")

        monkeypatch.setattr(cli, "pathway_daa", explode)
        args = ["daa", str(table_path), str(meta_path), "--output-dir", str(tmp_path), "--quiet"]
        assert cli.main(args) == 1


class TestAnnotate:
    def test_idempotent(self, pathway_files, tmp_path):
        table_path, meta_path = pathway_files
        assert cli.main(["daa", str(table_path), str(meta_path), "--output-dir", str(tmp_path), "--quiet"]) == 0
        once, twice = tmp_path / "once.tsv", tmp_path / "twice.tsv"
        assert cli.main(["annotate", str(tmp_path / "daa_linda.tsv"), "-o", str(once), "--quiet"]) == 0
        assert cli.main(["annotate", str(once), "-o", str(twice), "--quiet"]) == 0
        assert once.read_bytes() == twice.read_bytes()
        assert "Huntington disease" in once.read_text()

    def test_kegg_rest_offline_falls_back(self, pathway_files, capsys):
        table_path, _ = pathway_files
        code = cli.main(["annotate", str(table_path), "--mode", "kegg_rest", "--no-network", "--quiet"])
        assert code == 0
        assert "Parkinson disease" in capsys.readouterr().out


class TestPlot:
    @pytest.fixture
    def results(self, pathway_files, tmp_path):
        table_path, meta_path = pathway_files
        assert cli.main(["daa", str(table_path), str(meta_path), "--output-dir", str(tmp_path), "--quiet"]) == 0
        return tmp_path / "daa_linda.tsv"

    def test_errorbar_and_bar(self, pathway_files, results, tmp_path):
        table_path, meta_path = pathway_files
        base = ["plot", "errorbar", str(table_path), str(meta_path), str(results), "--output-dir", str(tmp_path), "--quiet"]
        assert cli.main(base) == 0
        assert (tmp_path / "errorbar.svg").read_text().startswith("<svg")
        base[1] = "bar"
        assert cli.main(base) == 0
        assert 'class="whisker"' not in (tmp_path / "bar.svg").read_text()

    def test_unknown_family(self, pathway_files, results, tmp_path):
        table_path, meta_path = pathway_files
        args = ["plot", "errorbar", str(table_path), str(meta_path), str(results), "--family", "X,Y"]
        assert cli.main(args + ["--output-dir", str(tmp_path), "--quiet"]) == 2

    def test_pca(self, pathway_files, tmp_path):
        table_path, meta_path = pathway_files
        out = tmp_path / "p.svg"
        assert cli.main(["plot", "pca", str(table_path), str(meta_path), "-o", str(out), "--scale", "--quiet"]) == 0
        assert out.read_text().count('class="point"') == 20

    def test_pca_with_two_samples(self, tmp_path):
        table = tmp_path / "t.tsv"
        table.write_text("function\tS1\tS2\nko00010\t1\t2\nko00020\t3\t1\n")
        meta = tmp_path / "m.tsv"
        meta.write_text("sample\tgroup\nS1\tA\nS2\tB\n")
        assert cli.main(["plot", "pca", str(table), str(meta), "--output-dir", str(tmp_path), "--quiet"]) == 2

    def test_heatmap_from_results(self, pathway_files, results, tmp_path):
        table_path, meta_path = pathway_files
        args = ["plot", "heatmap", str(table_path), str(meta_path), "--results", str(results), "--max-features", "5"]
        assert cli.main(args + ["--output-dir", str(tmp_path), "--quiet"]) == 0
        cells = (tmp_path / "heatmap.svg").read_text().count('class="cell"')
        assert cells % 20 == 0 and 20 <= cells <= 5 * 20

    def test_heatmap_features(self, pathway_files, tmp_path):
        table_path, meta_path = pathway_files
        args = ["plot", "heatmap", str(table_path), str(meta_path), "--features", "ko05016,ko05012"]
        assert cli.main(args + ["--output-dir", str(tmp_path), "--quiet"]) == 0
        assert (tmp_path / "heatmap.svg").read_text().count('class="cell"') == 2 * 20

    def test_heatmap_needs_features(self, pathway_files, tmp_path):
        table_path, meta_path = pathway_files
        assert cli.main(["plot", "heatmap", str(table_path), str(meta_path), "--output-dir", str(tmp_path), "--quiet"]) == 2


class TestRunAndDemo:
    def test_demo_writes_inputs(self, tmp_path):
        assert cli.main(["demo", "--output-dir", str(tmp_path), "--quiet"]) == 0
        assert (tmp_path / "demo_ko_abundance.tsv").is_file()
        assert (tmp_path / "demo_metadata.tsv").read_text().startswith("sample_id\tgroup\n")

    def test_run_rejects_invalid_alpha(self, demo_files, tmp_path):
        table_path, meta_path = demo_files
        args = ["run", "--input", str(table_path), "--metadata", str(meta_path), "--alpha", "1.5"]
        assert cli.main(args + ["--output-dir", str(tmp_path / "out"), "--quiet"]) == 2
        assert not (tmp_path / "out").exists()

    def test_run_needs_input(self, tmp_path):
        assert cli.main(["run", "--output-dir", str(tmp_path), "--quiet"]) == 2
