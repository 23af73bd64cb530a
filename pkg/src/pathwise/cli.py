"""Command-line interface for pathwise."""

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError
from rich.console import Console

from src.pathwise import __version__
from src.pathwise.annotation.annotate import (
    AnnotationMode,
    annotate_features,
    annotate_table,
    read_table_frame,
    write_table_frame,
)
from src.pathwise.annotation.offline import BUNDLED_TABLES, load_annotation_table
from src.pathwise.config import config
from src.pathwise.data.demo import write_demo_dataset
from src.pathwise.exceptions import ConfigError, InputError, PlotError
from src.pathwise.graph.state import DEFAULT_METHODS, PipelineConfig
from src.pathwise.graph.workflow import create_workflow
from src.pathwise.kegg.mapping import ko2kegg_with_report, load_ko_map
from src.pathwise.methods.base import DaaConfig, DaaMethodName
from src.pathwise.methods.daa import (
    consensus_by_family,
    pathway_daa,
    read_daa_results,
    split_families,
    write_consensus,
    write_daa_results,
)
from src.pathwise.profiles.metadata import align_samples, parse_metadata
from src.pathwise.profiles.tables import FeatureKind, parse_abundance_table
from src.pathwise.stats.multitest import PAdjustMethod
from src.pathwise.utils.formatting import atomic_write_text
from src.pathwise.utils.logger import get_logger, setup_logger
from src.pathwise.viz.errorbar import pathway_errorbar, select_records
from src.pathwise.viz.heatmap import pathway_heatmap
from src.pathwise.viz.options import PlotOptions, SortBy
from src.pathwise.viz.pca_plot import pathway_pca
from src.pathwise.viz.svg import save_svg

logger = get_logger(__name__)

console = Console(stderr=True)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2


def _comma_list(value: Optional[str]) -> Optional[list[str]]:
    if value is None:
        return None
    return [item.strip() for item in value.split(",") if item.strip()]


def provenance_lines() -> list[str]:
    """Provenance strings of the bundled reference data."""
    lines = [f"ko_pathway_map: {load_ko_map().provenance}"]
    for kind in BUNDLED_TABLES:
        lines.append(f"annotations[{kind.value}]: {load_annotation_table(kind).provenance}")
    return lines


class VersionAction(argparse.Action):
    def __init__(self, option_strings, dest=argparse.SUPPRESS, default=argparse.SUPPRESS, help=None):
        super().__init__(option_strings, dest=dest, default=default, nargs=0, help=help)

    def __call__(self, parser, namespace, values, option_string=None):
        print(f"pathwise {__version__}")
        for line in provenance_lines():
            print(line)
        parser.exit()


COMMON_DEFAULTS = {"seed": None, "output_dir": None, "config": None, "quiet": False, "no_network": False}


def _common_parser() -> argparse.ArgumentParser:
    """
    Options accepted before and after the subcommand.

    Defaults are suppressed so a subparser never overwrites a value given
    before the subcommand; :func:`parse_args` fills them in afterwards.
    """
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, help="Master seed for Monte Carlo methods")
    common.add_argument("--output-dir", type=Path, help="Directory for written files")
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors")
    common.add_argument("--no-network", action="store_true", help="Never contact KEGG")
    return common


def _add_plot_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--width", type=int, default=None, help="Figure width in px")
    parser.add_argument("--height", type=int, default=None, help="Figure height in px")
    parser.add_argument("--title", default=None)
    parser.add_argument("-o", "--output", type=Path, default=None, help="SVG file to write")


def build_parser() -> argparse.ArgumentParser:
    """Build the ``pathwise`` argument parser."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="pathwise",
        description="Differential abundance analysis, annotation and figures for PICRUSt2 profiles",
        parents=[common],
    )
    parser.add_argument("--version", action=VersionAction, help="Show version and reference data provenance")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    convert = sub.add_parser("convert", parents=[common], help="Convert KO abundances to KEGG pathway abundances")
    convert.add_argument("input", type=Path, help="KO abundance table")
    convert.add_argument("--map", type=Path, default=None, help="Custom KO to pathway map")
    convert.add_argument("-o", "--output", type=Path, default=None, help="Output TSV (stdout when omitted)")
    convert.set_defaults(handler=cmd_convert)

    daa = sub.add_parser("daa", parents=[common], help="Differential abundance analysis")
    daa.add_argument("input", type=Path, help="Abundance table")
    daa.add_argument("metadata", type=Path, help="Sample metadata")
    daa.add_argument("--group-column", default="group")
    daa.add_argument("--methods", default="linda", help=f"Comma list of {', '.join(m.value for m in DaaMethodName)}")
    daa.add_argument("--p-adjust", default=None, help=f"One of {', '.join(m.value for m in PAdjustMethod)}")
    daa.add_argument("--reference-group", default=None)
    daa.add_argument("--covariates", default=None, help="Comma list of numeric covariate columns (linda)")
    daa.add_argument("--mc-instances", type=int, default=None, help="Monte Carlo instances (aldex2)")
    daa.add_argument("--transform", choices=["relative_abundance", "clr"], default="relative_abundance")
    daa.add_argument("--alpha", type=float, default=None, help="Consensus significance threshold")
    daa.add_argument("--min-agree", type=int, default=None)
    daa.add_argument("--kind", default=None, help="Feature kind (inferred when omitted)")
    daa.set_defaults(handler=cmd_daa)

    annotate = sub.add_parser("annotate", parents=[common], help="Append annotation columns to a table")
    annotate.add_argument("input", type=Path, help="Abundance table or DA results TSV")
    annotate.add_argument("--mode", choices=[m.value for m in AnnotationMode], default="offline")
    annotate.add_argument("--kind", default=None, help="Feature kind (inferred when omitted)")
    annotate.add_argument("--table", type=Path, default=None, help="Custom offline annotation table")
    annotate.add_argument("-o", "--output", type=Path, default=None, help="Output TSV (stdout when omitted)")
    annotate.set_defaults(handler=cmd_annotate)

    plot = sub.add_parser("plot", help="Render SVG figures")
    plot_sub = plot.add_subparsers(dest="figure", metavar="figure")
    plot_sub.required = True
    for name, help_text in (("errorbar", "Error-bar panel"), ("bar", "Bar panel without error bars")):
        p = plot_sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("input", type=Path, help="Abundance table the results were computed on")
        p.add_argument("metadata", type=Path)
        p.add_argument("results", type=Path, help="DA results TSV")
        p.add_argument("--group-column", default="group")
        p.add_argument("--family", default=None, help="group1,group2 of the comparison to draw")
        p.add_argument("--max-features", type=int, default=None)
        p.add_argument("--sort-by", choices=[s.value for s in SortBy], default=SortBy.CLASS_THEN_P.value)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--mode", choices=[m.value for m in AnnotationMode], default="offline")
        _add_plot_options(p)
        p.set_defaults(handler=cmd_plot_errorbar, show_error_bars=(name == "errorbar"))

    pca = plot_sub.add_parser("pca", parents=[common], help="PCA with group densities")
    pca.add_argument("input", type=Path)
    pca.add_argument("metadata", type=Path)
    pca.add_argument("--group-column", default="group")
    pca.add_argument("--scale", action="store_true", help="Scale features to unit variance")
    _add_plot_options(pca)
    pca.set_defaults(handler=cmd_plot_pca)

    heatmap = plot_sub.add_parser("heatmap", parents=[common], help="Grouped z-score heatmap")
    heatmap.add_argument("input", type=Path)
    heatmap.add_argument("metadata", type=Path)
    heatmap.add_argument("--group-column", default="group")
    heatmap.add_argument("--features", default=None, help="Comma list of feature ids")
    heatmap.add_argument("--results", type=Path, default=None, help="Pick features from a DA results TSV")
    heatmap.add_argument("--max-features", type=int, default=None)
    _add_plot_options(heatmap)
    heatmap.set_defaults(handler=cmd_plot_heatmap)

    run = sub.add_parser("run", parents=[common], help="Full pipeline")
    run.add_argument("--input", dest="input_path", type=Path, default=None)
    run.add_argument("--metadata", dest="metadata_path", type=Path, default=None)
    run.add_argument("--group-column", default=None)
    run.add_argument("--kind", dest="feature_kind", default=None)
    run.add_argument("--no-convert", dest="convert_ko_to_kegg", action="store_const", const=False, default=None)
    run.add_argument("--map", dest="map_path", type=Path, default=None)
    run.add_argument("--methods", default=None, help=f"Comma list (default {','.join(DEFAULT_METHODS)})")
    run.add_argument("--p-adjust", default=None)
    run.add_argument("--alpha", type=float, default=None)
    run.add_argument("--min-agree", type=int, default=None)
    run.add_argument("--mc-instances", type=int, default=None)
    run.add_argument("--reference-group", default=None)
    run.add_argument("--covariates", default=None)
    run.add_argument("--annotation-mode", choices=[m.value for m in AnnotationMode], default=None)
    run.add_argument("--annotation-table", type=Path, default=None)
    run.add_argument("--max-features", type=int, default=None)
    run.add_argument("--sort-by", choices=[s.value for s in SortBy], default=None)
    run.add_argument("--width", dest="width_px", type=int, default=None)
    run.add_argument("--height", dest="height_px", type=int, default=None)
    run.add_argument("--pca-scale", action="store_const", const=True, default=None)
    run.set_defaults(handler=cmd_run)

    demo = sub.add_parser("demo", parents=[common], help="Write the demo KO table and metadata")
    demo.set_defaults(handler=cmd_demo)

    return parser


def parse_args(parser: argparse.ArgumentParser, argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    args = parser.parse_args(argv)
    for name, value in COMMON_DEFAULTS.items():
        if not hasattr(args, name):
            setattr(args, name, value)
    return args


def _output_dir(args) -> Path:
    return args.output_dir or Path(".")


def _load_aligned(args):
    table = parse_abundance_table(args.input, kind_hint=getattr(args, "kind", None))
    meta = parse_metadata(args.metadata, args.group_column, _comma_list(getattr(args, "covariates", None)))
    return align_samples(table, meta)


def _plot_options(args, **extra) -> PlotOptions:
    values = {
        "width_px": args.width,
        "height_px": args.height,
        "title": args.title,
        "max_features": getattr(args, "max_features", None),
        "alpha": getattr(args, "alpha", None),
    }
    values.update(extra)
    return PlotOptions(**{k: v for k, v in values.items() if v is not None})


def _annotations_for(ids: Sequence[str], kind: FeatureKind, mode: str = "offline") -> dict:
    if kind == FeatureKind.UNKNOWN:
        return {}
    ids = sorted(set(ids))
    return dict(zip(ids, annotate_features(ids, kind, mode)))


def _write_svg(document: str, args, default_name: str) -> Path:
    path = args.output or _output_dir(args) / default_name
    save_svg(document, path)
    console.print(f"[green]Wrote[/green] {path}")
    return path


def cmd_convert(args) -> int:
    table = parse_abundance_table(args.input)
    ko_map = load_ko_map(args.map)
    pathways, report = ko2kegg_with_report(table, ko_map)
    console.print(report.summary(), markup=False, highlight=False)
    if args.output is None:
        sys.stdout.write(pathways.to_tsv())
    else:
        atomic_write_text(args.output, pathways.to_tsv())
        console.print(f"[green]Wrote[/green] {args.output}")
    return EXIT_OK


def cmd_daa(args) -> int:
    methods = _comma_list(args.methods) or []
    if not methods:
        raise ConfigError("at least one DA method is required")
    methods = [DaaMethodName.parse(m).value for m in methods]
    seed = args.seed
    if seed is None:
        seed = config.daa.seed
        if DaaMethodName.ALDEX2.value in methods:
            logger.bind(seed=seed).warning("No --seed given for aldex2; using the default seed")

    table, meta = _load_aligned(args)
    out_dir = _output_dir(args)
    results = {}
    for method in methods:
        daa_config = DaaConfig(
            method=method,
            p_adjust=args.p_adjust or config.daa.p_adjust,
            seed=seed,
            mc_instances=args.mc_instances or config.daa.mc_instances,
            reference_group=args.reference_group,
            transform=args.transform,
            covariates=tuple(_comma_list(args.covariates) or ()),
        )
        results[method] = pathway_daa(table, meta, daa_config)
        path = write_daa_results(results[method], out_dir / f"daa_{method}.tsv")
        console.print(f"[green]Wrote[/green] {path}")

    if len(methods) >= 2:
        tables = consensus_by_family(results, args.alpha, args.min_agree)
        path = write_consensus(tables, out_dir / "consensus.tsv")
        flagged = sum(len(t.flagged()) for t in tables)
        console.print(f"[green]Wrote[/green] {path} ({flagged} consensus features)")
    return EXIT_OK


def cmd_annotate(args) -> int:
    frame = read_table_frame(args.input)
    annotated = annotate_table(frame, args.kind, args.mode, args.table)
    if args.output is None:
        sys.stdout.write(annotated.to_csv(sep="\t", index=False, lineterminator="\n"))
    else:
        write_table_frame(annotated, args.output)
        console.print(f"[green]Wrote[/green] {args.output}")
    return EXIT_OK


def cmd_plot_errorbar(args) -> int:
    table, meta = _load_aligned(args)
    records = read_daa_results(args.results)
    families = split_families(records)
    if args.family is not None:
        key = tuple(_comma_list(args.family) or ())
        if key not in families:
            available = "; ".join(",".join(k) for k in families)
            raise PlotError(f"comparison {args.family!r} not in results; available: {available}")
    else:
        key = next(iter(families), None)
    family = families.get(key, [])

    methods = {r.method for r in family}
    if len(methods) > 1:
        raise PlotError(f"results mix methods ({', '.join(sorted(methods))}); pass one method's file")
    annotations = _annotations_for([r.feature_id for r in family], table.kind, args.mode)
    options = _plot_options(args, sort_by=args.sort_by, show_error_bars=args.show_error_bars)
    document = pathway_errorbar(table, meta, family, annotations, options)
    _write_svg(document, args, "errorbar.svg" if args.show_error_bars else "bar.svg")
    return EXIT_OK


def cmd_plot_pca(args) -> int:
    table, meta = _load_aligned(args)
    document = pathway_pca(table, meta, _plot_options(args, pca_scale=args.scale))
    _write_svg(document, args, "pca.svg")
    return EXIT_OK


def cmd_plot_heatmap(args) -> int:
    table, meta = _load_aligned(args)
    options = _plot_options(args)
    annotations = _annotations_for(table.feature_ids, table.kind)
    if args.features:
        features = _comma_list(args.features)
    elif args.results:
        family = next(iter(split_families(read_daa_results(args.results)).values()), [])
        chosen, _ = select_records(family, annotations, options)
        features = [r.feature_id for r in chosen]
    else:
        raise ConfigError("heatmap needs --features or --results")
    document = pathway_heatmap(table, meta, features, options, annotations)
    _write_svg(document, args, "heatmap.svg")
    return EXIT_OK


_RUN_FIELDS = (
    "input_path", "metadata_path", "group_column", "feature_kind", "convert_ko_to_kegg",
    "map_path", "methods", "p_adjust", "alpha", "min_agree", "mc_instances", "reference_group",
    "covariates", "annotation_mode", "annotation_table", "max_features", "sort_by",
    "width_px", "height_px", "pca_scale", "seed", "output_dir",
)


def cmd_run(args) -> int:
    overrides = {name: getattr(args, name, None) for name in _RUN_FIELDS}
    pipeline_config = PipelineConfig.from_sources(args.config, overrides)
    state = create_workflow(pipeline_config).run()
    for name, path in sorted(state.artifacts.items()):
        console.print(f"[green]Wrote[/green] {path}")
    return EXIT_OK


def cmd_demo(args) -> int:
    directory = _output_dir(args)
    paths = write_demo_dataset(directory, **({"seed": args.seed} if args.seed is not None else {}))
    for path in paths:
        console.print(f"[green]Wrote[/green] {path}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point.

    Returns:
        0 on success, 2 for invalid input or configuration, 1 for internal errors
    """
    parser = build_parser()
    try:
        args = parse_args(parser, argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT

    if args.no_network:
        os.environ["PATHWISE_NO_NETWORK"] = "1"
    setup_logger(quiet=args.quiet)

    try:
        return args.handler(args)
    except (InputError, ValidationError) as e:
        console.print(f"[red]Error:[/red] {e}", highlight=False)
        return EXIT_INPUT
    except Exception as e:
        logger.opt(exception=e).debug("Internal error")
        console.print(f"[red]Internal error:[/red] {e}", highlight=False)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
