"""
Commands for autoencoder training, scoring and latent extraction.
"""

import argparse
import logging
from pathlib import Path

from ocpad.cli.common import common_parser, container_path, jobs, modality_for_channels, output_path, resolve_config
from ocpad.models.score_set import ScoreSet
from ocpad.schemas.architecture import ARCH_ALIASES
from ocpad.schemas.loss import LOSS_ALIASES
from ocpad.services import autoencoder as ae
from ocpad.utils.container import load_container
from ocpad.utils.csv_io import write_features, write_loss_trace, write_scores

logger = logging.getLogger(__name__)


def train(args: argparse.Namespace) -> int:
    """
    Train on the train split of a generated directory, selecting on its validation split.
    """
    config = resolve_config(
        args,
        arch=ARCH_ALIASES.get(args.arch) if args.arch else None,
        loss=LOSS_ALIASES.get(args.loss) if args.loss else None,
        c=args.c, alpha=args.alpha, epochs=args.epochs, batch_size=args.batch_size, lr=args.lr,
        modality=args.modality, data_dir=args.data,
    )
    modality = config.modality
    train_set = load_container(container_path(config.data_dir, "train", modality))
    val_set = load_container(container_path(config.data_dir, "val", modality))

    model = ae.create_model(config.architecture(modality), config.loss_config(), seed=config.seed)
    model = ae.train(model, train_set, val_set, config.training())

    out = output_path(args.out, Path(config.output_dir) / "model.ocae")
    out.parent.mkdir(parents=True, exist_ok=True)
    ae.save_checkpoint(model, out)
    trace = write_loss_trace(model.metadata.train_losses, model.metadata.val_losses,
                             out.with_name(f"{out.stem}_loss.csv"))
    meta = model.metadata
    print(f"{config.arch} ({config.loss}) {modality}: validation loss {meta.initial_val_loss:.6f} -> "
          f"{meta.final_val_loss:.6f}, best {meta.best_val_loss:.6f} at epoch {meta.best_epoch}")
    print(f"checkpoint: {out}\nloss trace: {trace}")
    return 0


def _model_and_samples(args: argparse.Namespace, default_split: str):
    model = ae.load_checkpoint(args.model)
    modality = modality_for_channels(model.architecture.channels)
    samples = load_container(container_path(args.data, default_split, modality))
    return model, samples


def score(args: argparse.Namespace) -> int:
    model, samples = _model_and_samples(args, "test")
    scores = ScoreSet.for_samples(samples, ae.score_batch(model, samples.images, jobs(args)))
    path = write_scores(scores, args.out)
    logger.info(f"Scored {len(scores)} samples with {model.architecture.kind} ({model.loss.kind})")
    print(f"{len(scores)} scores written to {path}")
    return 0


def latent(args: argparse.Namespace) -> int:
    model, samples = _model_and_samples(args, args.split)
    features = ae.latent(model, samples.images)
    path = write_features(samples.sample_ids, samples.labels, samples.species, features, args.out)
    print(f"{features.shape[0]} x {features.shape[1]} latent features written to {path}")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", parents=[common_parser()], help="train a one-class autoencoder")
    parser.add_argument("--arch", choices=sorted(ARCH_ALIASES))
    parser.add_argument("--loss", choices=sorted(LOSS_ALIASES))
    parser.add_argument("--c", type=float, help="threshold multiplier of the pixel-masked loss")
    parser.add_argument("--alpha", type=float, help="quantile level of the sample-masked loss")
    parser.add_argument("--data", help="directory written by gen")
    parser.add_argument("--modality", choices=["swir", "laser"])
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--out", help="checkpoint path (default: <output_dir>/model.ocae)")
    parser.set_defaults(handler=train)

    parser = subparsers.add_parser("score", parents=[common_parser()], help="anomaly scores of a container")
    parser.add_argument("--model", required=True)
    parser.add_argument("--data", required=True, help="container file, or a gen directory (test split)")
    parser.add_argument("--out", required=True, help="score CSV")
    parser.set_defaults(handler=score)

    parser = subparsers.add_parser("latent", parents=[common_parser()], help="encoder features of a container")
    parser.add_argument("--model", required=True)
    parser.add_argument("--data", required=True, help="container file, or a gen directory")
    parser.add_argument("--split", choices=["train", "val", "test"], default="test",
                        help="split to read when --data is a directory")
    parser.add_argument("--out", required=True, help="feature CSV")
    parser.set_defaults(handler=latent)
