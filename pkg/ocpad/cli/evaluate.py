"""
Command for PAD metrics, score fusion and DET export.
"""

import argparse
import logging
from pathlib import Path
from typing import Dict, Optional

from ocpad.cli.common import common_parser, resolve_config
from ocpad.errors import UsageError
from ocpad.models.score_set import DetCurve
from ocpad.schemas.report import EvaluationReport
from ocpad.services.evaluation import (
    NormalizationStats,
    det_curve,
    evaluate,
    fuse,
    fusion_sweep,
    resolve_stats,
)
from ocpad.utils.csv_io import read_scores, write_det
from ocpad.utils.det_plot import plot_det

logger = logging.getLogger(__name__)


def _headline(report: EvaluationReport) -> str:
    points = ", ".join(f"APCER@{100 * p.target_bpcer:g}% {100 * p.apcer:.2f}%" for p in report.operating_points)
    worst = f", worst species {report.worst_species} {100 * report.worst_species_apcer:.2f}%" \
        if report.worst_species else ""
    return f"D-EER {100 * report.d_eer:.2f}%, pAUC@20 {report.pauc20:.2f}%, {points}{worst}"


def _reference(path: Optional[str]) -> Optional[NormalizationStats]:
    return NormalizationStats.of(read_scores(path)) if path else None


def _write(out: Path, document, curves: Dict[str, DetCurve], plot: bool) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(document.model_dump_json(indent=2) + "\n", encoding="utf-8")
    for name, curve in curves.items():
        write_det(curve, out / f"{name}.csv")
    if plot:
        if isinstance(document, EvaluationReport):
            pauc = {name: document.pauc20 for name in curves}
        else:
            pauc = {f"det_w{entry.weight:g}": entry.report.pauc20 for entry in document.entries}
        plot_det(curves, out / "det.svg", pauc)


def eval_scores(args: argparse.Namespace) -> int:
    """
    Evaluate one score CSV, a fixed-weight fusion of two, or a fusion weight sweep.
    """
    if args.w is not None and args.fuse is None:
        raise UsageError("--w needs --fuse")
    if (args.reference_a or args.reference_b) and args.fuse is None:
        raise UsageError("--reference-a/--reference-b need --fuse")
    out = Path(args.out)
    scores = read_scores(args.scores)

    if args.fuse is None:
        report = evaluate(scores, label=Path(args.scores).stem)
        _write(out, report, {"det": det_curve(scores)}, not args.no_plot)
        print(_headline(report))
        return 0

    other = read_scores(args.fuse)
    stats_a, stats_b, source = resolve_stats(scores, other, _reference(args.reference_a),
                                             _reference(args.reference_b))
    if args.w is not None:
        fused = fuse(scores, other, args.w, stats_a, stats_b)
        report = evaluate(fused, label=f"w={args.w:g}")
        report.notes.append(f"normalization stats: {source}")
        _write(out, report, {"det": det_curve(fused)}, not args.no_plot)
        print(_headline(report))
        return 0

    config = resolve_config(args)
    sweep = fusion_sweep(scores, other, config.fusion_weights(), stats_a, stats_b)
    sweep.stats_source = source
    curves = {f"det_w{entry.weight:g}": det_curve(fuse(scores, other, entry.weight, stats_a, stats_b))
              for entry in sweep.entries}
    _write(out, sweep, curves, not args.no_plot)
    for entry in sweep.entries:
        print(f"w={entry.weight:g}: {_headline(entry.report)}")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("eval", parents=[common_parser()], help="PAD metrics and score fusion")
    parser.add_argument("--scores", required=True, help="score CSV")
    parser.add_argument("--fuse", help="second score CSV; without --w the fusion weight is swept")
    parser.add_argument("--w", type=float, help="fixed weight of --scores in the fusion")
    parser.add_argument("--reference-a", help="validation score CSV giving the normalization range of --scores")
    parser.add_argument("--reference-b", help="validation score CSV giving the normalization range of --fuse")
    parser.add_argument("--no-plot", action="store_true", help="skip the DET SVG")
    parser.add_argument("--out", required=True, help="report directory")
    parser.set_defaults(handler=eval_scores)
