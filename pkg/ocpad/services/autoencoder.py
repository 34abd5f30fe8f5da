"""
Autoencoder construction, one-class training, scoring, latent extraction
and checkpoints.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from typing import List, Optional, Tuple

import numpy as np

from ocpad.errors import DataContractError, FormatError, NumericalError, UndercompletenessError
from ocpad.models.autoencoder import AEModel
from ocpad.models.sample_set import SampleSet
from ocpad.nn.losses import batch_loss, loss_and_grad, sample_score
from ocpad.nn.network import ParamStore, ceil_half, infer_shapes, parameter_shapes
from ocpad.nn.optim import RMSprop
from ocpad.schemas.architecture import AEArchitecture, ArchitectureKind
from ocpad.schemas.checkpoint import CheckpointHeader
from ocpad.schemas.layer import LayerSpec, conv, dense, layer
from ocpad.schemas.loss import LossConfig
from ocpad.schemas.training import TrainingConfig, TrainingMetadata
from ocpad.utils.checkpoint import read_checkpoint, write_checkpoint
from ocpad.utils.seeding import rng_for

logger = logging.getLogger(__name__)

# Forward passes at inference run in fixed-size chunks so results do not
# depend on the worker count.
SCORE_CHUNK = 64


def plan(arch: AEArchitecture) -> Tuple[List[LayerSpec], int]:
    """
    Layer chain for an architecture and the number of encoder layers.
    """
    d, height, width = arch.input_shape
    f, k = arch.filters, arch.kernel
    h2, w2 = ceil_half(height), ceil_half(width)
    crop = [layer("crop", [f, height, width])] if (h2 * 2, w2 * 2) != (height, width) else []
    head = [conv(d, k), layer("sigmoid")]

    if arch.kind == "conv_ae":
        encoder = [conv(f, k, stride=2), layer("relu")]
        decoder = [layer("upsample")] + crop + head
    elif arch.kind == "pooling_ae":
        encoder = [conv(f, k), layer("relu"), layer("maxpool")]
        decoder = [layer("upsample")] + crop + head
    elif arch.kind == "dense_ae":
        if arch.latent >= arch.input_dim:
            raise UndercompletenessError(
                f"latent width {arch.latent} is not smaller than the input dimension {arch.input_dim}"
            )
        encoder = [conv(f, k), layer("relu"), layer("maxpool"), layer("flatten"),
                   dense(arch.latent), layer("relu")]
        decoder = [dense(f * h2 * w2), layer("relu"), layer("reshape", [f, h2, w2]),
                   layer("upsample")] + crop + head
    else:
        raise DataContractError(f"unknown architecture {arch.kind!r}")

    encoded = f * h2 * w2 if arch.kind != "dense_ae" else arch.latent
    if encoded >= arch.input_dim:
        raise UndercompletenessError(
            f"{arch.kind} encoder width {encoded} is not smaller than the input dimension {arch.input_dim}"
        )
    return encoder + decoder, len(encoder)


def build_architecture(kind: ArchitectureKind, channels: int, height: int, width: int,
                       filters: int = 12, latent: int = 64, kernel: int = 3) -> List[LayerSpec]:
    arch = AEArchitecture(kind=kind, channels=channels, height=height, width=width,
                          filters=filters, latent=latent, kernel=kernel)
    return plan(arch)[0]


def create_model(arch: AEArchitecture, loss: Optional[LossConfig] = None, seed: int = 42) -> AEModel:
    specs, encoder_layers = plan(arch)
    params = ParamStore.initialize(specs, arch.input_shape, seed)
    logger.debug(f"Created {arch.kind} with {params.parameter_count()} parameters")
    return AEModel(architecture=arch, specs=specs, encoder_layers=encoder_layers, params=params,
                   loss=loss or LossConfig(), metadata=TrainingMetadata(seed=seed))


def _as_batch(model: AEModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float32)
    if x.ndim == 3:
        x = x[None]
    if x.ndim != 4 or tuple(x.shape[1:]) != model.input_shape:
        raise DataContractError(f"input shape {x.shape} does not match model input {model.input_shape}")
    return x


def _chunks(n: int, size: int = SCORE_CHUNK):
    return [slice(start, min(start + size, n)) for start in range(0, n, size)]


def reconstruct(model: AEModel, x: np.ndarray, params: Optional[ParamStore] = None) -> np.ndarray:
    """
    Reconstruction of one image (d, H, W) or a batch (B, d, H, W), same shape as x.
    """
    single = np.ndim(x) == 3
    batch = _as_batch(model, x)
    params = (params or model.params).params
    parts = [model.network.forward(params, batch[s])[0] for s in _chunks(len(batch))]
    out = np.concatenate(parts) if parts else np.zeros_like(batch)
    return out[0] if single else out


def score(model: AEModel, x: np.ndarray) -> float:
    """Anomaly score of one image under the model's loss."""
    x = _as_batch(model, x)
    if x.shape[0] != 1:
        raise DataContractError(f"score takes a single image, got a batch of {x.shape[0]}")
    return sample_score(x, reconstruct(model, x), model.loss)


def _score_chunk(model: AEModel, batch: np.ndarray) -> np.ndarray:
    recon = model.network.forward(model.params.params, batch)[0]
    return np.array([sample_score(batch[i:i + 1], recon[i:i + 1], model.loss) for i in range(len(batch))])


def score_batch(model: AEModel, images: np.ndarray, jobs: int = 1) -> np.ndarray:
    """
    Per-sample scores; identical for any ``jobs``.
    """
    batch = _as_batch(model, images)
    chunks = [batch[s] for s in _chunks(len(batch))]
    if jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(partial(_score_chunk, model), chunks))
    else:
        parts = [_score_chunk(model, c) for c in chunks]
    return np.concatenate(parts) if parts else np.zeros(0)


def latent(model: AEModel, x: np.ndarray) -> np.ndarray:
    """
    Flattened encoder output: (width,) for one image, (B, width) for a batch.
    """
    single = np.ndim(x) == 3
    batch = _as_batch(model, x)
    parts = [model.network.forward(model.params.params, batch[s], stop=model.encoder_layers)[0]
             for s in _chunks(len(batch))]
    out = np.concatenate(parts).reshape(len(batch), -1) if parts else np.zeros((0, model.latent_width), np.float32)
    return out[0] if single else out


class AutoencoderTrainer:
    """
    Bona-fide-only training with RMSprop and best-validation selection.
    """

    def __init__(self, config: Optional[TrainingConfig] = None):
        self.config = config or TrainingConfig()
        self.optimizer = RMSprop(lr=self.config.lr, rho=self.config.rho, eps=self.config.eps)

    @staticmethod
    def _check(model: AEModel, samples: SampleSet, name: str) -> np.ndarray:
        if samples.has_attacks():
            raise DataContractError(f"{name} set contains attack samples; training is one-class")
        if len(samples) == 0:
            raise DataContractError(f"{name} set has no bona fide samples")
        return _as_batch(model, samples.images)

    def validation_loss(self, model: AEModel, params: ParamStore, images: np.ndarray) -> float:
        """Loss over the whole validation set at once."""
        value = batch_loss(images, reconstruct(model, images, params), model.loss)
        if not np.isfinite(value):
            raise NumericalError("non-finite validation loss")
        return value

    def train(self, model: AEModel, train_set: SampleSet, val_set: SampleSet) -> AEModel:
        """
        Train a copy of ``model``; returns the parameters of the best validation epoch.
        """
        config = self.config
        train_images = self._check(model, train_set, "training")
        val_images = self._check(model, val_set, "validation")
        network = model.network
        store = model.params.copy()

        initial = self.validation_loss(model, store, val_images)
        best, best_loss, best_epoch = store.copy(), initial, 0
        train_losses, val_losses = [], [initial]
        logger.info(f"Training {model.architecture.kind} ({model.loss.kind}) on {len(train_set)} samples, "
                    f"initial validation loss {initial:.6f}")

        n = len(train_images)
        for epoch in range(1, config.epochs + 1):
            order = rng_for(config.seed, f"shuffle:epoch{epoch}").permutation(n)
            total = 0.0
            for start in range(0, n, config.batch_size):
                batch = train_images[order[start:start + config.batch_size]]
                out, caches = network.forward(store.params, batch)
                value, grad = loss_and_grad(batch, out, model.loss)
                if not np.isfinite(value):
                    raise NumericalError(f"non-finite training loss in epoch {epoch}")
                _, grads = network.backward(store.params, caches, grad, input_grad=False)
                self.optimizer.step(store, grads)
                total += value * len(batch)
            train_losses.append(total / n)
            val_loss = self.validation_loss(model, store, val_images)
            val_losses.append(val_loss)
            if val_loss < best_loss:
                best, best_loss, best_epoch = store.copy(), val_loss, epoch
            logger.debug(f"epoch {epoch}: train {train_losses[-1]:.6f} val {val_loss:.6f}")

        metadata = TrainingMetadata(
            seed=config.seed, epochs_run=config.epochs, best_epoch=best_epoch,
            initial_val_loss=initial, best_val_loss=best_loss, final_val_loss=val_losses[-1],
            train_losses=train_losses, val_losses=val_losses,
        )
        logger.info(f"Trained {config.epochs} epochs; best validation loss {best_loss:.6f} at epoch {best_epoch}")
        return AEModel(architecture=model.architecture, specs=model.specs, encoder_layers=model.encoder_layers,
                       params=best, loss=model.loss, metadata=metadata)


def train(model: AEModel, train_set: SampleSet, val_set: SampleSet,
          config: Optional[TrainingConfig] = None) -> AEModel:
    return AutoencoderTrainer(config).train(model, train_set, val_set)


def save_checkpoint(model: AEModel, path) -> None:
    header = CheckpointHeader(architecture=model.architecture, loss=model.loss,
                              training=model.metadata, parameter_count=model.parameter_count())
    write_checkpoint(path, header, model.params.arrays())


def load_checkpoint(path) -> AEModel:
    header, values = read_checkpoint(path)
    arch = header.architecture
    specs, encoder_layers = plan(arch)
    shapes = infer_shapes(specs, arch.input_shape)
    params, offset = [], 0
    for index, spec in enumerate(specs):
        entry = {}
        for name, shape in parameter_shapes(spec, shapes[index]).items():
            size = int(np.prod(shape))
            if offset + size > len(values):
                raise FormatError("checkpoint payload is shorter than its architecture needs")
            entry[name] = values[offset:offset + size].reshape(shape).copy()
            offset += size
        params.append(entry)
    if offset != len(values):
        raise FormatError(f"checkpoint holds {len(values)} values, architecture needs {offset}")
    accumulators = [{k: np.zeros_like(v) for k, v in entry.items()} for entry in params]
    store = ParamStore(params=params, accumulators=accumulators, seed=header.training.seed)
    return AEModel(architecture=arch, specs=specs, encoder_layers=encoder_layers, params=store,
                   loss=header.loss, metadata=header.training)
