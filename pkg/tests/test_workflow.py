"""Tests for the end-to-end pipeline and its configuration."""

import json
from dataclasses import fields

import pytest
from langgraph.graph import END
from pydantic import ValidationError

from src.pathwise.exceptions import ConfigError, MetadataError
from src.pathwise.graph import PipelineConfig, PipelineState, create_workflow, run_pipeline
from src.pathwise.graph.state import read_config_file
from src.pathwise.graph.workflow import LOCK_NAME, output_lock
from src.pathwise.utils.formatting import sha256_file

FAST_METHODS = ["linda", "welch_t"]
STAGES = ["parse", "align", "convert", "daa", "consensus", "annotate", "plot", "manifest"]


def make_config(demo_files, output_dir, **overrides) -> PipelineConfig:
    table_path, meta_path = demo_files
    values = {
        "input_path": table_path,
        "metadata_path": meta_path,
        "output_dir": output_dir,
        "methods": FAST_METHODS,
    }
    values.update(overrides)
    return PipelineConfig(**values)


class TestPipelineConfig:
    def test_defaults(self, demo_files, tmp_path):
        cfg = PipelineConfig(input_path=demo_files[0], metadata_path=demo_files[1])
        assert cfg.methods == ["linda", "aldex2", "welch_t", "wilcoxon"]
        assert cfg.alpha == 0.05 and cfg.seed == 42

    @pytest.mark.parametrize(
        "field, value",
        [
            ("alpha", 1.5),
            ("methods", "linda,linda"),
            ("methods", "deseq2"),
            ("p_adjust", "sidak"),
            ("sort_by", "name"),
            ("mc_instances", 1),
            ("width_px", 10),
        ],
    )
    def test_invalid(self, demo_files, tmp_path, field, value):
        with pytest.raises(ValidationError):
            make_config(demo_files, tmp_path, **{field: value})

    def test_unknown_field(self, demo_files, tmp_path):
        with pytest.raises(ValidationError):
            make_config(demo_files, tmp_path, colour="blue")

    def test_config_file_and_overrides(self, demo_files, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("# run settings\nalpha = 0.1\nmethods = linda, welch_t\noutput_dir = results\n")
        cfg = PipelineConfig.from_sources(
            path, {"input_path": demo_files[0], "metadata_path": demo_files[1], "alpha": None, "seed": 7}
        )
        assert cfg.alpha == 0.1
        assert cfg.methods == ["linda", "welch_t"]
        assert cfg.seed == 7
        assert cfg.output_dir == tmp_path / "results"

    def test_config_file_unknown_key(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("colour = blue\n")
        with pytest.raises(ConfigError, match="unknown key 'colour'"):
            read_config_file(path)

    def test_config_file_invalid_utf8(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_bytes(b"alpha = 0.1\ngroup_column = gr\xfcppe\n")
        with pytest.raises(ConfigError, match="not valid UTF-8"):
            read_config_file(path)


class TestStageGraph:
    def test_nodes_and_edges(self, demo_files, tmp_path):
        workflow = create_workflow(make_config(demo_files, tmp_path / "out"))
        assert set(workflow.graph.nodes) == set(STAGES)
        for name, next_name in zip(STAGES, STAGES[1:]):
            assert (name, next_name) in workflow.graph.edges
        assert ("manifest", END) in workflow.graph.edges
        assert workflow.compiled_graph is not None

    def test_state_fields_do_not_shadow_stages(self):
        assert not {f.name for f in fields(PipelineState)} & set(STAGES)


class TestRunPipeline:
    def test_artifact_set(self, demo_files, tmp_path):
        out = tmp_path / "out"
        state = run_pipeline(make_config(demo_files, out))
        assert state.success
        assert state.stage_history == STAGES
        assert sorted(p.name for p in out.iterdir()) == [
            "consensus.tsv",
            "conversion_report.tsv",
            "daa_annotated.tsv",
            "daa_linda.tsv",
            "daa_welch_t.tsv",
            "errorbar.svg",
            "heatmap.svg",
            "manifest.json",
            "pathway_abundance.tsv",
            "pca.svg",
        ]

    def test_manifest_checksums(self, demo_files, tmp_path):
        out = tmp_path / "out"
        run_pipeline(make_config(demo_files, out))
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["tool"]["name"] == "pathwise"
        assert manifest["seed"] == 42
        assert "snapshot" in manifest["reference_data"]["ko_pathway_map"]
        assert "annotations_KEGG_PATHWAY" in manifest["reference_data"]
        assert manifest["inputs"]["abundance_table"]["sha256"] == sha256_file(demo_files[0])
        for name, digest in manifest["artifacts"].items():
            assert sha256_file(out / name) == digest
        assert "manifest.json" not in manifest["artifacts"]

    def test_two_runs_identical(self, demo_files, tmp_path):
        first = run_pipeline(make_config(demo_files, tmp_path / "a", methods=["linda", "aldex2"], mc_instances=16))
        second = run_pipeline(make_config(demo_files, tmp_path / "b", methods=["linda", "aldex2"], mc_instances=16))
        a = json.loads(first.artifacts["manifest.json"].read_text())["artifacts"]
        b = json.loads(second.artifacts["manifest.json"].read_text())["artifacts"]
        assert a == b

    def test_single_method_has_no_consensus(self, demo_files, tmp_path):
        out = tmp_path / "out"
        run_pipeline(make_config(demo_files, out, methods=["linda"]))
        assert not (out / "consensus.tsv").exists()
        assert (out / "daa_annotated.tsv").is_file()

    def test_annotated_results_have_names(self, demo_files, tmp_path):
        out = tmp_path / "out"
        run_pipeline(make_config(demo_files, out))
        text = (out / "daa_annotated.tsv").read_text()
        assert text.splitlines()[0].endswith("pathway_name\tpathway_description\tpathway_class\tpathway_map")
        assert "Huntington disease" in text

    def test_failure_leaves_output_untouched(self, demo_files, tmp_path):
        out = tmp_path / "out"
        with pytest.raises(MetadataError):
            run_pipeline(make_config(demo_files, out, group_column="diet"))
        assert list(out.iterdir()) == []

    def test_lock_blocks_second_run(self, demo_files, tmp_path):
        out = tmp_path / "out"
        out.mkdir()
        (out / LOCK_NAME).write_text("12345")
        with pytest.raises(ConfigError, match="another run"):
            run_pipeline(make_config(demo_files, out))
        assert (out / LOCK_NAME).exists()

    def test_lock_released(self, tmp_path):
        with output_lock(tmp_path) as lock:
            assert lock.exists()
            with pytest.raises(ConfigError):
                with output_lock(tmp_path):
                    pass
        assert not lock.exists()

    def test_output_dir_is_a_file(self, demo_files, tmp_path):
        target = tmp_path / "file"
        target.write_text("x")
        with pytest.raises(ConfigError, match="not a directory"):
            run_pipeline(make_config(demo_files, target))
