"""End-to-end ``run`` pipeline."""

import io
import json
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Callable, Iterator

import pandas as pd
from langgraph.graph import END, StateGraph

from src.pathwise import __version__
from src.pathwise.annotation.annotate import annotate_features, write_table_frame
from src.pathwise.annotation.offline import load_annotation_table
from src.pathwise.annotation.records import ANNOTATION_FIELDS
from src.pathwise.exceptions import ConfigError
from src.pathwise.graph.state import PipelineConfig, PipelineState
from src.pathwise.kegg.mapping import ko2kegg_with_report, load_ko_map
from src.pathwise.methods.base import DaaConfig
from src.pathwise.methods.daa import (
    consensus_by_family,
    format_consensus,
    format_daa_results,
    pathway_daa,
    split_families,
)
from src.pathwise.profiles.metadata import align_samples, parse_metadata
from src.pathwise.profiles.tables import FeatureKind, parse_abundance_table, write_abundance_table
from src.pathwise.utils.formatting import atomic_write_text, sha256_file
from src.pathwise.utils.logger import get_logger
from src.pathwise.viz.errorbar import pathway_errorbar, select_records
from src.pathwise.viz.heatmap import pathway_heatmap
from src.pathwise.viz.options import PlotOptions
from src.pathwise.viz.pca_plot import pathway_pca
from src.pathwise.viz.svg import save_svg

logger = get_logger(__name__)

LOCK_NAME = ".pathwise.lock"
MANIFEST_NAME = "manifest.json"


@contextmanager
def output_lock(output_dir: Path) -> Iterator[Path]:
    """Exclusive lock file in ``output_dir``; a second holder gets ConfigError."""
    output_dir.mkdir(parents=True, exist_ok=True)
    lock = output_dir / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConfigError(
            f"another run holds {lock}; remove it if no run is active"
        ) from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield lock
    finally:
        lock.unlink(missing_ok=True)


class PipelineWorkflow:
    """
    LangGraph stage graph:

    parse -> align -> convert -> daa -> consensus -> annotate -> plot -> manifest

    Artifacts are written to a hidden temporary directory inside the output
    directory and moved into place only when every stage succeeded.
    """

    def __init__(self, pipeline_config: PipelineConfig):
        """
        Initialize the workflow.

        Args:
            pipeline_config: Validated run configuration
        """
        self.config = pipeline_config
        self.stages: list[tuple[str, Callable[[PipelineState], None]]] = [
            ("parse", self._parse_node),
            ("align", self._align_node),
            ("convert", self._convert_node),
            ("daa", self._daa_node),
            ("consensus", self._consensus_node),
            ("annotate", self._annotate_node),
            ("plot", self._plot_node),
            ("manifest", self._manifest_node),
        ]
        self.graph = self._build_graph()
        self.compiled_graph = self.graph.compile()

    def _build_graph(self) -> StateGraph:
        """
        Build the stage graph.

        Returns:
            StateGraph with one node per stage, chained in order to END
        """
        workflow = StateGraph(PipelineState)
        for name, node in self.stages:
            workflow.add_node(name, self._stage(name, node))

        workflow.set_entry_point(self.stages[0][0])
        for (name, _), (next_name, _) in zip(self.stages, self.stages[1:]):
            workflow.add_edge(name, next_name)
        workflow.add_edge(self.stages[-1][0], END)

        logger.bind(stages=len(self.stages)).debug("Pipeline graph built")
        return workflow

    @staticmethod
    def _stage(
        name: str, node: Callable[[PipelineState], None]
    ) -> Callable[[PipelineState], PipelineState]:
        def run_stage(state: PipelineState) -> PipelineState:
            state.enter_stage(name)
            node(state)
            return state

        run_stage.__name__ = f"{name}_node"
        return run_stage

    def _write(self, state: PipelineState, name: str, text: str) -> None:
        path = state.work_dir / name
        atomic_write_text(path, text)
        state.add_artifact(name, path)

    def _parse_node(self, state: PipelineState) -> None:
        cfg = self.config
        kind = FeatureKind.parse(cfg.feature_kind) if cfg.feature_kind else None
        state.table = parse_abundance_table(cfg.input_path, kind_hint=kind)
        state.meta = parse_metadata(cfg.metadata_path, cfg.group_column, cfg.covariates or None)

    def _align_node(self, state: PipelineState) -> None:
        state.table, state.meta = align_samples(state.table, state.meta)
        state.meta.require_groups(2)

    def _convert_node(self, state: PipelineState) -> None:
        if not self.config.convert_ko_to_kegg:
            return
        if state.table.kind not in (FeatureKind.KO, FeatureKind.UNKNOWN):
            logger.bind(kind=state.table.kind.value).info("Table is not KO-level; skipping conversion")
            return
        state.ko_map = load_ko_map(self.config.map_path)
        state.reference_data["ko_pathway_map"] = state.ko_map.provenance
        state.table, state.conversion_report = ko2kegg_with_report(state.table, state.ko_map)
        path = state.work_dir / "pathway_abundance.tsv"
        write_abundance_table(state.table, path)
        state.add_artifact(path.name, path)
        self._write(state, "conversion_report.tsv", state.conversion_report.to_tsv())

    def _daa_node(self, state: PipelineState) -> None:
        cfg = self.config
        for method in cfg.methods:
            daa_config = DaaConfig(
                method=method,
                p_adjust=cfg.p_adjust,
                seed=cfg.seed,
                mc_instances=cfg.mc_instances,
                reference_group=cfg.reference_group,
                covariates=tuple(cfg.covariates),
            )
            records = pathway_daa(state.table, state.meta, daa_config)
            state.results[method] = records
            self._write(state, f"daa_{method}.tsv", format_daa_results(records))

    def _consensus_node(self, state: PipelineState) -> None:
        if len(state.results) < 2:
            logger.info("Single method; no consensus table")
            return
        state.consensus_tables = consensus_by_family(state.results, self.config.alpha, self.config.min_agree)
        self._write(state, "consensus.tsv", format_consensus(state.consensus_tables))

    def _annotate_node(self, state: PipelineState) -> None:
        cfg = self.config
        kind = state.table.kind
        records = [r for method in cfg.methods for r in state.results[method]]
        frame = pd.read_csv(
            io.StringIO(format_daa_results(records)), sep="\t", dtype=str, keep_default_na=False
        )
        if kind == FeatureKind.UNKNOWN and cfg.annotation_table is None:
            logger.warning("Feature kind is unknown; results are written without annotations")
        else:
            unique = sorted(set(frame["feature"]))
            resolved = annotate_features(unique, kind, cfg.annotation_mode, cfg.annotation_table)
            state.annotations = dict(zip(unique, resolved))
            provenance = load_annotation_table(kind, cfg.annotation_table).provenance
            state.reference_data[f"annotations_{kind.value}"] = provenance

        for name in ANNOTATION_FIELDS:
            frame[name] = [
                getattr(state.annotations[fid], name) or "" if fid in state.annotations else ""
                for fid in frame["feature"]
            ]
        path = state.work_dir / "daa_annotated.tsv"
        write_table_frame(frame, path)
        state.add_artifact(path.name, path)

    def plot_options(self) -> PlotOptions:
        cfg = self.config
        return PlotOptions(
            width_px=cfg.width_px,
            height_px=cfg.height_px,
            max_features=cfg.max_features,
            sort_by=cfg.sort_by,
            alpha=cfg.alpha,
            pca_scale=cfg.pca_scale,
        )

    def _plot_node(self, state: PipelineState) -> None:
        options = self.plot_options()
        primary = state.results[self.config.methods[0]]
        family = next(iter(split_families(primary).values()))

        errorbar = pathway_errorbar(state.table, state.meta, family, state.annotations, options)
        state.add_artifact("errorbar.svg", save_svg(errorbar, state.work_dir / "errorbar.svg"))

        pca = pathway_pca(state.table, state.meta, options)
        state.add_artifact("pca.svg", save_svg(pca, state.work_dir / "pca.svg"))

        chosen, _ = select_records(family, state.annotations, options)
        features = [r.feature_id for r in chosen]
        heatmap = pathway_heatmap(state.table, state.meta, features, options, state.annotations)
        state.add_artifact("heatmap.svg", save_svg(heatmap, state.work_dir / "heatmap.svg"))

    def _manifest_node(self, state: PipelineState) -> None:
        cfg = self.config
        manifest = {
            "tool": {"name": "pathwise", "version": __version__},
            "reference_data": dict(sorted(state.reference_data.items())),
            "config": cfg.model_dump(mode="json"),
            "seed": cfg.seed,
            "inputs": {
                "abundance_table": {"path": str(cfg.input_path), "sha256": sha256_file(cfg.input_path)},
                "metadata": {"path": str(cfg.metadata_path), "sha256": sha256_file(cfg.metadata_path)},
            },
            "artifacts": {name: sha256_file(path) for name, path in sorted(state.artifacts.items())},
        }
        self._write(state, MANIFEST_NAME, json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    def _promote(self, state: PipelineState) -> None:
        output_dir = self.config.output_dir
        for name, path in list(state.artifacts.items()):
            target = output_dir / name
            os.replace(path, target)
            state.artifacts[name] = target

    def run(self) -> PipelineState:
        """
        Execute every stage.

        Returns:
            Final pipeline state with artifact paths in the output directory

        Raises:
            The first stage error; nothing is written to the output directory
        """
        self.config.check_output_dir()
        output_dir = self.config.output_dir
        state = PipelineState(config=self.config)

        with output_lock(output_dir):
            work_dir = Path(tempfile.mkdtemp(prefix=".pathwise-run-", dir=output_dir))
            state.work_dir = work_dir
            try:
                final = self.compiled_graph.invoke(state)
                state = final if isinstance(final, PipelineState) else PipelineState(**final)
                self._promote(state)
                state.success = True
            except Exception as e:
                state.add_error(str(e))
                raise
            finally:
                shutil.rmtree(work_dir, ignore_errors=True)

        logger.bind(artifacts=len(state.artifacts), output_dir=str(output_dir)).info(
            "Pipeline completed"
        )
        return state


def create_workflow(pipeline_config: PipelineConfig) -> PipelineWorkflow:
    """Factory for a PipelineWorkflow."""
    return PipelineWorkflow(pipeline_config)


def run_pipeline(pipeline_config: PipelineConfig) -> PipelineState:
    return create_workflow(pipeline_config).run()
