"""
Command for the one-class baseline classifiers.
"""

import argparse
import logging

import numpy as np

from ocpad.cli.common import common_parser, resolve_config
from ocpad.errors import DataContractError, UsageError
from ocpad.services.baselines import OneClassBaseline, select_baseline
from ocpad.utils.csv_io import read_features, write_scores

logger = logging.getLogger(__name__)


def fit_oc(args: argparse.Namespace) -> int:
    """
    Fit (or load) an OC-GMM / OC-SVM, then optionally save it and score a feature file.
    """
    if args.load is None and args.features is None:
        raise UsageError("fit-oc needs --features to fit or --load to reuse a fitted model")
    if (args.score is None) != (args.out is None):
        raise UsageError("--score and --out go together")
    config = resolve_config(args, gmm_components=args.components, svm_nu=args.nu, svm_gamma=args.gamma)

    if args.load is not None:
        baseline = OneClassBaseline.load(args.load)
        if baseline.kind != args.kind:
            raise UsageError(f"{args.load} holds a {baseline.kind} model, not {args.kind}")
    else:
        records, features = read_features(args.features)
        if records.is_attack.any():
            raise DataContractError(f"{args.features} contains attack samples; baselines are fitted on bona fide only")
        if args.select is not None:
            val_records, val_features = read_features(args.select)
            if val_records.is_attack.any():
                raise DataContractError(f"{args.select} contains attack samples; selection uses bona fide only")
            selection = select_baseline(
                args.kind, features, val_features, seed=config.seed, standardize=not args.no_standardize,
                component_grid=config.gmm_component_grid, gamma_factors=config.svm_gamma_factors,
                nu=config.svm_nu, max_iter=config.gmm_max_iter, tol=config.gmm_tol,
            )
            baseline = selection.baseline
            print(f"selected {selection.parameter} = {selection.value:g}")
        else:
            baseline = OneClassBaseline.fit(
                args.kind, features, seed=config.seed, standardize=not args.no_standardize,
                components=config.gmm_components, max_iter=config.gmm_max_iter, tol=config.gmm_tol,
                nu=config.svm_nu, gamma=config.svm_gamma,
            )
        logger.info(f"Fitted {args.kind} on {features.shape[0]} x {features.shape[1]} features")

    if args.save is not None:
        print(f"model written to {baseline.save(args.save)}")

    if args.score is not None:
        records, features = read_features(args.score)
        scores = records.with_scores(baseline.score(features))
        path = write_scores(scores, args.out)
        bona, attack = scores.bonafide_scores, scores.attack_scores
        summary = f"{len(scores)} scores written to {path}"
        if bona.size and attack.size:
            summary += f" (mean bona fide {np.mean(bona):.4f}, mean attack {np.mean(attack):.4f})"
        print(summary)
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("fit-oc", parents=[common_parser()], help="fit a one-class baseline")
    parser.add_argument("kind", choices=["gmm", "svm"])
    parser.add_argument("--features", help="bona fide training feature CSV")
    parser.add_argument("--score", help="feature CSV to score")
    parser.add_argument("--out", help="score CSV for --score")
    parser.add_argument("--save", help="write the fitted model as JSON")
    parser.add_argument("--load", help="reuse a saved model instead of fitting")
    parser.add_argument("--select", metavar="VAL_FEATURES",
                        help="bona fide validation feature CSV; sweep GMM components or SVM gamma on it")
    parser.add_argument("--components", type=int, help="GMM components")
    parser.add_argument("--nu", type=float, help="OC-SVM nu")
    parser.add_argument("--gamma", type=float, help="OC-SVM RBF gamma (default: 1 / (D * var))")
    parser.add_argument("--no-standardize", action="store_true", help="fit on raw features")
    parser.set_defaults(handler=fit_oc)
