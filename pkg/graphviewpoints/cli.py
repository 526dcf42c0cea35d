# -*- coding: utf-8 -*-
"""
Command-line entry point.

    graphviewpoints sample        --dataset F --out D
    graphviewpoints score         --dataset F --ranges D --out D
    graphviewpoints fit           --scores D --method lr|sqp --k K [--filter layout=S] --out D
    graphviewpoints analyze       --scores D [--combined-k 5] --out D
    graphviewpoints optimize      --dataset F --weights W --graph G --top K --out D
    graphviewpoints export-sphere --dataset F --graph G --measure M --out D

Exit codes: 0 on success, 1 for data errors, 2 for usage errors.
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from . import constants as cnst
from . import utilities
from ._svg import write_sphere_heatmap
from ._symmetry import SymmetryConfig
from .analysis import (
    aggregate,
    correlation_matrix,
    first_component_accuracy,
    importance_table,
    pca_analysis,
    score_histograms,
)
from .exceptions import DomainException, GraphViewpointException, UsageException
from .fitting import (
    WeightVector,
    combined_scores,
    samples_from_frame,
    select_subset,
    solve_max_separation,
)
from .pipeline import RangeTable, evaluation_config, normalize_frame
from .projection import CameraConfig
from .study import ViewpointStudy

RANGES_FILE_NAME = "ranges.csv"
SCORES_FILE_NAME = "scores.csv"
CONFIG_ECHO_FILE_NAME = "config.json"

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
_FILTER_KEYS = ("layout", "size")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved settings of one command-line run."""

    camera: CameraConfig = field(default_factory=CameraConfig)
    sample_count: int = cnst.DEFAULT_SAMPLE_COUNT
    raster_resolution: int = cnst.DEFAULT_RASTER_RESOLUTION
    subset_sizes: Tuple[int, ...] = cnst.DEFAULT_SUBSET_SIZES
    output_dir: str = "."
    workers: int = 1
    symmetry: SymmetryConfig = field(default_factory=SymmetryConfig)
    l2: float = cnst.DEFAULT_L2

    def __post_init__(self) -> None:
        if self.sample_count < 2:
            raise UsageException(f"sample_count must be at least 2, got {self.sample_count}")
        if self.raster_resolution < cnst.MIN_RASTER_RESOLUTION:
            raise UsageException(f"raster_resolution must be at least {cnst.MIN_RASTER_RESOLUTION}, "
                                 f"got {self.raster_resolution}")
        sizes = tuple(int(k) for k in self.subset_sizes)
        if not sizes or any(not 1 <= k <= len(cnst.MEASURE_IDS) for k in sizes):
            raise UsageException(f"subset sizes must lie in [1, {len(cnst.MEASURE_IDS)}], got {list(sizes)}")
        object.__setattr__(self, "subset_sizes", sizes)
        if self.workers < 1:
            raise UsageException(f"workers must be at least 1, got {self.workers}")
        if self.l2 < 0:
            raise UsageException(f"l2 must be nonnegative, got {self.l2}")

    @property
    def config_hash(self) -> str:
        return utilities.config_hash(evaluation_config(self.camera, self.raster_resolution, self.symmetry))

    def to_dict(self) -> Dict[str, Any]:
        document = evaluation_config(self.camera, self.raster_resolution, self.symmetry)
        document.update({
            "sample_count": self.sample_count,
            "subset_sizes": list(self.subset_sizes),
            "output_dir": self.output_dir,
            "workers": self.workers,
            "l2": self.l2,
        })
        return document


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Resolve the run configuration: defaults, then the JSON file, then flags.

    Args:
        path:       Optional JSON config file.
        overrides:  Top-level keys from command-line flags; None values are ignored.

    Returns:
        The resolved RunConfig, also logged at INFO.
    """
    document: Dict[str, Any] = {}
    if path is not None:
        try:
            document = utilities.read_json(path)
        except (OSError, ValueError) as e:
            logging.error(f"Could not read config file {path}: {e}")
            raise UsageException(f"could not read config file {path}: {e}")
        if not isinstance(document, dict):
            raise UsageException(f"config file {path} must hold a JSON object")

    document.update({k: v for k, v in (overrides or {}).items() if v is not None})
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(document) - known)
    if unknown:
        raise UsageException(f"unknown config keys {unknown}")

    try:
        if "camera" in document:
            document["camera"] = CameraConfig(**_check_section(document["camera"], "camera"))
        if "symmetry" in document:
            document["symmetry"] = SymmetryConfig(**_check_section(document["symmetry"], "symmetry"))
        if "subset_sizes" in document:
            document["subset_sizes"] = tuple(document["subset_sizes"])
        config = RunConfig(**document)
    except (TypeError, ValueError) as e:
        logging.error(f"Invalid configuration: {e}")
        raise UsageException(f"invalid configuration: {e}")

    logging.info(f"Run configuration {config.config_hash}: {json.dumps(config.to_dict(), sort_keys=True)}")
    return config


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON config file")
    common.add_argument("--out", dest="output_dir", default=None, help="Output directory")
    common.add_argument("--sample-count", type=int, default=None, help="Viewpoints sampled per graph")
    common.add_argument("--resolution", dest="raster_resolution", type=int, default=None,
                        help="Raster resolution of edge/node overlap areas")
    common.add_argument("--workers", type=int, default=None, help="Worker processes for landscape sampling")
    common.add_argument("--l2", type=float, default=None, help="Logistic regression L2 penalty")
    common.add_argument("--log-level", choices=_LOG_LEVELS, default="WARNING")
    common.add_argument("--log-file", default=None, help="Write the log here instead of stderr")

    parser = argparse.ArgumentParser(prog="graphviewpoints",
                                     description="Evaluate, fit and explore viewpoints of 3D graph drawings.")
    commands = parser.add_subparsers(dest="command", required=True)

    sample = commands.add_parser("sample", parents=[common], help="Sample per-graph measure ranges")
    sample.add_argument("--dataset", required=True)

    score = commands.add_parser("score", parents=[common], help="Score every selected viewpoint")
    score.add_argument("--dataset", required=True)
    score.add_argument("--ranges", required=True, help="Range table file or the directory sample wrote")

    fit = commands.add_parser("fit", parents=[common], help="Fit measure weights to best/worst selections")
    fit.add_argument("--scores", required=True, help="Score table file or the directory score wrote")
    fit.add_argument("--method", choices=(cnst.METHOD_LR, cnst.METHOD_SQP), required=True)
    fit.add_argument("--k", type=int, action="append", default=None, help="Subset size (repeatable)")
    fit.add_argument("--filter", action="append", default=[], help="layout=<class> or size=<class>")
    fit.add_argument("--renormalize", action="store_true", help="Rescale scores within the filtered samples")
    fit.add_argument("--exhaustive", action="store_true", help="Search all k-subsets instead of elimination")
    fit.add_argument("--solver", choices=("closed-form", "slsqp"), default="closed-form")

    analyze = commands.add_parser("analyze", parents=[common], help="PCA, correlations and aggregate tables")
    analyze.add_argument("--scores", required=True)
    analyze.add_argument("--lr-weights", default=None, help="C-LR weight file (fitted if omitted)")
    analyze.add_argument("--sqp-weights", default=None, help="C-SQP weight file (fitted if omitted)")
    analyze.add_argument("--combined-k", type=int, default=cnst.DEFAULT_COMBINED_SUBSET_SIZE,
                         help="Subset size of the fitted C-LR and C-SQP weights")
    analyze.add_argument("--bins", type=int, default=10, help="Histogram bins")

    optimize = commands.add_parser("optimize", parents=[common], help="Best sampled viewpoints for a weighting")
    optimize.add_argument("--dataset", required=True)
    optimize.add_argument("--weights", required=True)
    optimize.add_argument("--graph", required=True)
    optimize.add_argument("--top", type=int, default=10)
    optimize.add_argument("--ranges", default=None, help="Range table to normalise against")

    sphere = commands.add_parser("export-sphere", parents=[common], help="Per-viewpoint sphere map of one measure")
    sphere.add_argument("--dataset", required=True)
    sphere.add_argument("--graph", required=True)
    sphere.add_argument("--measure", choices=cnst.MEASURE_IDS, required=True)
    sphere.add_argument("--ranges", default=None, help="Range table to normalise against")
    return parser


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv and run one subcommand.

    Returns:
        Process exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    _configure_logging(args.log_level, args.log_file)
    try:
        config = load_config(args.config, {
            "output_dir": args.output_dir,
            "sample_count": args.sample_count,
            "raster_resolution": args.raster_resolution,
            "workers": args.workers,
            "l2": args.l2,
        })
        os.makedirs(config.output_dir, exist_ok=True)
        _COMMANDS[args.command](args, config)
    except UsageException as e:
        print(f"graphviewpoints: usage error: {e}", file=sys.stderr)
        return 2
    except (GraphViewpointException, OSError) as e:
        print(f"graphviewpoints: {e}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_command())


# ------------------------------------------------------------------------
# ----------------------------- Subcommands ------------------------------
# ------------------------------------------------------------------------
def _sample(args: argparse.Namespace, config: RunConfig) -> None:
    study = _open_study(args.dataset, config)
    for graph_id in study.dataset.graph_ids:
        logging.info(f"Wrote ranges of {graph_id} to {study.save_ranges(graph_id)}")
    study.get_all_ranges().to_csv(os.path.join(config.output_dir, RANGES_FILE_NAME))
    utilities.write_json(config.to_dict(), os.path.join(config.output_dir, CONFIG_ECHO_FILE_NAME),
                         config.config_hash)


def _score(args: argparse.Namespace, config: RunConfig) -> None:
    ranges = RangeTable.from_csv(_artifact_path(args.ranges, RANGES_FILE_NAME))
    study = _open_study(args.dataset, config)
    if ranges.config_hash and ranges.config_hash != config.config_hash:
        logging.warning(f"Range table was sampled with config {ranges.config_hash}, scoring with {config.config_hash}")
    scores = study.score_selections(ranges)
    utilities.write_csv(scores, os.path.join(config.output_dir, SCORES_FILE_NAME), config.config_hash)


def _fit(args: argparse.Namespace, config: RunConfig) -> None:
    frame = _read_scores(args.scores)
    suffix = ""
    for expression in args.filter:
        frame, tag = _apply_filter(frame, expression)
        suffix += f"-{tag}"
    samples = samples_from_frame(frame)
    sizes = args.k or config.subset_sizes
    if any(not 1 <= k <= len(cnst.MEASURE_IDS) for k in sizes):
        raise UsageException(f"--k must lie in [1, {len(cnst.MEASURE_IDS)}], got {sizes}")

    for k in sizes:
        if args.method == cnst.METHOD_SQP and args.solver != "closed-form" and not args.exhaustive:
            report = _select_with_solver(samples, k, args.solver, args.renormalize)
        else:
            report = select_subset(samples, k, args.method, l2=config.l2, exhaustive=args.exhaustive,
                                   renormalize=args.renormalize)
        stem = os.path.join(config.output_dir, f"fit-{args.method}-k{k}{suffix}")
        report.weights.to_json(stem + ".weights.json", config.config_hash)
        utilities.write_csv(report.to_frame(), stem + ".report.csv", config.config_hash)
        utilities.write_json(report.summary(), stem + ".summary.json", config.config_hash)
        logging.info(f"{args.method} k={k}: active {list(report.weights.active_set)}, accuracy {report.accuracy:.3f}")


def _analyze(args: argparse.Namespace, config: RunConfig) -> None:
    frame = _read_scores(args.scores)
    samples = samples_from_frame(frame)
    out = config.output_dir
    digest = config.config_hash
    if not 1 <= args.combined_k <= len(cnst.MEASURE_IDS):
        raise UsageException(f"--combined-k must lie in [1, {len(cnst.MEASURE_IDS)}], got {args.combined_k}")

    lr_weights = _weights_or_fit(args.lr_weights, samples, cnst.METHOD_LR, args.combined_k, config)
    sqp_weights = _weights_or_fit(args.sqp_weights, samples, cnst.METHOD_SQP, args.combined_k, config)

    pca = pca_analysis(samples)
    utilities.write_csv(pca.components, os.path.join(out, "pca_components.csv"), digest, index=True)
    variance = pca.explained_variance_ratio.rename("explained_variance_ratio").to_frame()
    utilities.write_csv(variance, os.path.join(out, "pca_variance.csv"), digest, index=True)
    projections = pd.concat([frame[[cnst.GRAPH_FIELD_NAME, cnst.POLARITY_FIELD_NAME]].reset_index(drop=True),
                             pca.projections], axis=1)
    utilities.write_csv(projections, os.path.join(out, "pca_projections.csv"), digest)

    correlations = correlation_matrix(samples)
    utilities.write_csv(correlations, os.path.join(out, "correlation.csv"), digest, index=True)

    tables = {kind: aggregate(samples, kind, lr_weights, sqp_weights)
              for kind in (cnst.STRATA_ALL, cnst.STRATA_LAYOUT, cnst.STRATA_SIZE, cnst.STRATA_GRAPH)}
    aggregated = pd.concat(tables, names=[cnst.STRATUM_KIND_FIELD_NAME])
    utilities.write_csv(aggregated, os.path.join(out, "aggregate.csv"), digest, index=True)

    importance = importance_table(samples, config.subset_sizes, config.l2)
    utilities.write_csv(importance, os.path.join(out, "importance.csv"), digest, index=True)

    histograms = score_histograms(samples, args.bins, lr_weights, sqp_weights)
    utilities.write_csv(histograms, os.path.join(out, "histograms.csv"), digest, index=True)

    labels = {s.label for s in samples}
    utilities.write_json({
        "samples": len(samples),
        "first_component_accuracy": first_component_accuracy(samples, pca) if len(labels) == 2 else None,
        "constant_measures": correlations.attrs["constant_measures"],
        "combined_active_sets": {cnst.C_LR: list(lr_weights.active_set) if lr_weights is not None else None,
                                 cnst.C_SQP: list(sqp_weights.active_set) if sqp_weights is not None else None},
    }, os.path.join(out, "analysis_summary.json"), digest)


def _optimize(args: argparse.Namespace, config: RunConfig) -> None:
    if args.top < 1:
        raise UsageException(f"--top must be at least 1, got {args.top}")
    weights = WeightVector.from_json(args.weights)
    study = _open_study(args.dataset, config)
    landscape = study.get_landscape(args.graph)
    scores = normalize_frame(landscape, _graph_ranges(study, args), graph_id=args.graph)

    combined = combined_scores(weights, scores, "score")
    order = np.argsort(-combined.to_numpy(), kind="stable")[:args.top]
    top = landscape.iloc[order][list(cnst.VIEW_FIELD_NAMES)].copy()
    top["score"] = combined.to_numpy()[order]
    top = top.reset_index()
    top.insert(0, "rank", np.arange(1, len(top) + 1))
    utilities.write_csv(top, os.path.join(config.output_dir, f"optimize-{args.graph}.csv"),
                        config.config_hash)


def _export_sphere(args: argparse.Namespace, config: RunConfig) -> None:
    study = _open_study(args.dataset, config)
    landscape = study.get_landscape(args.graph)
    scores = normalize_frame(landscape, _graph_ranges(study, args), graph_id=args.graph)

    table = landscape[list(cnst.VIEW_FIELD_NAMES)].copy()
    table["raw"] = landscape[args.measure]
    table["score"] = scores[args.measure]
    stem = os.path.join(config.output_dir, f"sphere-{args.graph}-{args.measure}")
    utilities.write_csv(table.reset_index(), stem + ".csv", config.config_hash)

    selections = study.selections
    chosen = selections[selections[cnst.GRAPH_FIELD_NAME] == args.graph]
    views = {polarity: chosen.loc[chosen[cnst.POLARITY_FIELD_NAME] == polarity, list(cnst.VIEW_FIELD_NAMES)].to_numpy()
             for polarity in cnst.POLARITIES}
    write_sphere_heatmap(
        stem + ".svg",
        landscape[list(cnst.VIEW_FIELD_NAMES)].to_numpy(),
        table["score"].to_numpy(),
        f"{args.graph}: {cnst.MEASURE_NAMES[args.measure]} score",
        utilities.artifact_header(config.config_hash).lstrip("# "),
        best=views[cnst.BEST],
        worst=views[cnst.WORST],
    )


_COMMANDS = {
    "sample": _sample,
    "score": _score,
    "fit": _fit,
    "analyze": _analyze,
    "optimize": _optimize,
    "export-sphere": _export_sphere,
}


# Private utility functions
def _configure_logging(level: str, filename: Optional[str]) -> None:
    logging.basicConfig(filename=filename, level=getattr(logging, level),
                        format="%(asctime)s %(levelname)s %(message)s", force=True)


def _check_section(section: Any, name: str) -> dict:
    if not isinstance(section, dict):
        raise UsageException(f"config section '{name}' must be an object")
    return section


def _open_study(dataset: str, config: RunConfig) -> ViewpointStudy:
    return ViewpointStudy(dataset, config.camera, config.sample_count, config.raster_resolution,
                          config.symmetry, config.workers, cache_dir=config.output_dir)


def _artifact_path(path: str, default_name: str) -> str:
    return os.path.join(path, default_name) if os.path.isdir(path) else path


def _read_scores(path: str) -> pd.DataFrame:
    return utilities.read_csv(_artifact_path(path, SCORES_FILE_NAME),
                              dtype={cnst.GRAPH_FIELD_NAME: str, cnst.PARTICIPANT_FIELD_NAME: str})


def _apply_filter(frame: pd.DataFrame, expression: str) -> Tuple[pd.DataFrame, str]:
    key, _, value = expression.partition("=")
    if key not in _FILTER_KEYS or not value:
        raise UsageException(f"filter must be layout=<class> or size=<class>, got '{expression}'")
    if key == "layout":
        by_label = {label: name for name, label in cnst.LAYOUT_CLASS_LABELS.items()}
        value = by_label.get(value, value)
        if value not in cnst.LAYOUT_CLASSES:
            raise UsageException(f"unknown layout class '{value}'")
        column = cnst.LAYOUT_CLASS_FIELD_NAME
    else:
        if value not in cnst.SIZE_CLASSES:
            raise UsageException(f"unknown size class '{value}'")
        column = cnst.SIZE_CLASS_FIELD_NAME
    return frame[frame[column] == value], f"{key}_{value}"


def _select_with_solver(samples, k: int, solver: str, renormalize: bool):
    # Elimination runs on the closed form; the chosen subset is then re-solved
    report = select_subset(samples, k, cnst.METHOD_SQP, renormalize=renormalize)
    return solve_max_separation(samples, report.weights.active_set, solver=solver, renormalize=renormalize)


def _weights_or_fit(path: Optional[str], samples, method: str, k: int,
                    config: RunConfig) -> Optional[WeightVector]:
    if path is not None:
        return WeightVector.from_json(path)
    try:
        return select_subset(samples, k, method, l2=config.l2).weights
    except DomainException as e:
        logging.warning(f"No {method} weights for the combined columns: {e}")
        return None


def _graph_ranges(study: ViewpointStudy, args: argparse.Namespace) -> RangeTable:
    if args.ranges is not None:
        return RangeTable.from_csv(_artifact_path(args.ranges, RANGES_FILE_NAME))
    return study.get_ranges(args.graph)


if __name__ == "__main__":
    main()
