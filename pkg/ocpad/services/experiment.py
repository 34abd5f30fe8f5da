"""
Experiment orchestration: architecture comparison, threshold-constant
sweep, modality fusion and the one-class baseline benchmark.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from ocpad.models.autoencoder import AEModel
from ocpad.models.sample_set import SampleSet
from ocpad.models.score_set import DetCurve, ScoreSet
from ocpad.schemas.architecture import ArchitectureKind
from ocpad.schemas.dataset import Modality
from ocpad.schemas.experiment import ExperimentConfig
from ocpad.schemas.loss import LossConfig
from ocpad.schemas.report import ExperimentRun, ExperimentSummary
from ocpad.services import autoencoder as ae
from ocpad.services.baselines import OneClassBaseline, select_baseline
from ocpad.services.dataset import container_name, generate_modalities, split_by_subject
from ocpad.services.evaluation import NormalizationStats, det_curve, evaluate, fuse, fusion_sweep, missed_overlap
from ocpad.utils.container import load_container
from ocpad.utils.csv_io import write_det, write_loss_trace, write_scores
from ocpad.utils.det_plot import plot_det

logger = logging.getLogger(__name__)

Splits = Tuple[SampleSet, SampleSet, SampleSet]


class ExperimentManager:
    """
    Runs the experiments of one configuration and writes their artifacts.

    Data comes from ``config.data_dir`` when it holds containers for the
    modality, otherwise it is generated and split in memory.
    """

    def __init__(self, config: ExperimentConfig, out_dir: Optional[Path] = None, jobs: int = 1):
        self.config = config
        self.out_dir = Path(out_dir or config.output_dir)
        self.jobs = jobs
        self._splits: Dict[Modality, Splits] = {}
        self._models: Dict[tuple, AEModel] = {}

    # Data

    def splits(self, modality: Modality) -> Splits:
        if modality not in self._splits:
            data_dir = Path(self.config.data_dir)
            paths = [data_dir / container_name(split, modality) for split in ("train", "val", "test")]
            if all(p.is_file() for p in paths):
                logger.info(f"Loading {modality} containers from {data_dir}")
                self._splits[modality] = tuple(load_container(p) for p in paths)
            else:
                generated = generate_modalities(self.config.dataset(), [modality], self.jobs)[modality]
                self._splits[modality] = split_by_subject(generated, seed=self.config.seed)
        return self._splits[modality]

    # Building blocks

    def train_model(self, modality: Modality, kind: ArchitectureKind, loss: LossConfig) -> AEModel:
        """
        Train once per (modality, architecture, loss); experiments sharing a
        configuration reuse the model.
        """
        key = (modality, kind, loss.kind, loss.c, loss.alpha)
        if key not in self._models:
            train_set, val_set, _ = self.splits(modality)
            model = ae.create_model(self.config.architecture(modality, kind), loss, seed=self.config.seed)
            self._models[key] = ae.train(model, train_set, val_set, self.config.training())
        else:
            logger.info(f"Reusing the {kind} {modality} model trained with {loss.kind}")
        return self._models[key]

    def score(self, model: AEModel, samples: SampleSet) -> ScoreSet:
        return ScoreSet.for_samples(samples, ae.score_batch(model, samples.images, self.jobs))

    def _record(self, name: str, scores: ScoreSet, model: Optional[AEModel] = None) -> Tuple[ExperimentRun, DetCurve]:
        curve = det_curve(scores)
        score_file = write_scores(scores, self.out_dir / f"{name}_scores.csv")
        det_file = write_det(curve, self.out_dir / f"{name}_det.csv")
        run = ExperimentRun(name=name, report=evaluate(scores, name),
                            score_file=score_file.name, det_file=det_file.name)
        if model is not None:
            run.initial_val_loss = model.metadata.initial_val_loss
            run.final_val_loss = model.metadata.final_val_loss
            write_loss_trace(model.metadata.train_losses, model.metadata.val_losses,
                             self.out_dir / f"{name}_loss.csv")
        return run, curve

    def _finish(self, summary: ExperimentSummary, curves: Dict[str, DetCurve]) -> ExperimentSummary:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        if curves:
            pauc = {run.name: run.report.pauc20 for run in summary.runs if run.name in curves}
            plot_det(curves, self.out_dir / f"{summary.experiment}_det.svg", pauc, title=summary.experiment)
        path = self.out_dir / f"{summary.experiment}_summary.json"
        path.write_text(summary.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info(f"Wrote {summary.experiment} summary to {path}")
        return summary

    def _run_autoencoder(self, name: str, modality: Modality, kind: ArchitectureKind, loss: LossConfig,
                         summary: ExperimentSummary, curves: Dict[str, DetCurve]) -> AEModel:
        model = self.train_model(modality, kind, loss)
        run, curve = self._record(name, self.score(model, self.splits(modality)[2]), model)
        summary.runs.append(run)
        curves[name] = curve
        return model

    # Experiments

    def compare_architectures(self) -> ExperimentSummary:
        """Conv-, Pooling- and Dense-AE with plain MSE on one split."""
        summary = ExperimentSummary(experiment="architectures", seed=self.config.seed)
        curves: Dict[str, DetCurve] = {}
        for kind in ("conv_ae", "pooling_ae", "dense_ae"):
            self._run_autoencoder(f"{kind}_{self.config.modality}", self.config.modality, kind,
                                  self.config.loss_config("mse"), summary, curves)
        return self._finish(summary, curves)

    def c_sweep(self, c_values: Optional[List[float]] = None) -> ExperimentSummary:
        """Dense-AE with MSE, then with the pixel-masked loss at each C."""
        summary = ExperimentSummary(experiment="c_sweep", seed=self.config.seed)
        curves: Dict[str, DetCurve] = {}
        modality = self.config.modality
        self._run_autoencoder(f"mse_{modality}", modality, self.config.arch,
                              self.config.loss_config("mse"), summary, curves)
        for c in c_values or self.config.c_values:
            self._run_autoencoder(f"wmse_c{c:g}_{modality}", modality, self.config.arch,
                                  self.config.loss_config("proposed_wmse", c), summary, curves)
        return self._finish(summary, curves)

    def fusion_experiment(self) -> ExperimentSummary:
        """
        One autoencoder per modality, fused over a weight sweep with
        normalization ranges taken from the validation scores, plus the
        overlap of the attacks each modality misses at BPCER 0.2%.
        """
        summary = ExperimentSummary(experiment="fusion", seed=self.config.seed)
        curves: Dict[str, DetCurve] = {}
        test_scores, stats = {}, {}
        for modality in ("swir", "laser"):
            model = self._run_autoencoder(f"{self.config.arch}_{modality}", modality, self.config.arch,
                                          self.config.loss_config(), summary, curves)
            stats[modality] = NormalizationStats.of(self.score(model, self.splits(modality)[1]))
            test_scores[modality] = self.score(model, self.splits(modality)[2])
        summary.fusion = fusion_sweep(test_scores["swir"], test_scores["laser"], self.config.fusion_weights(),
                                      stats["swir"], stats["laser"])
        summary.overlap = missed_overlap(test_scores["swir"], test_scores["laser"], ("swir", "laser"))
        return self._finish(summary, curves)

    def benchmark(self) -> ExperimentSummary:
        """
        Dense-AE scores against OC-GMM and OC-SVM fitted on its latents,
        per modality and fused across modalities. With ``select_baselines``
        the GMM size and SVM gamma come from a validation sweep.
        """
        config = self.config
        summary = ExperimentSummary(experiment="benchmark", seed=config.seed)
        curves: Dict[str, DetCurve] = {}
        per_method: Dict[str, Dict[Modality, Tuple[ScoreSet, NormalizationStats]]] = {}
        for modality in ("swir", "laser"):
            train_set, val_set, test_set = self.splits(modality)
            model = self._run_autoencoder(f"ae_{modality}", modality, "dense_ae",
                                          config.loss_config(), summary, curves)
            per_method.setdefault("ae", {})[modality] = (
                self.score(model, test_set), NormalizationStats.of(self.score(model, val_set)))

            train_latent = ae.latent(model, train_set.images)
            val_latent = ae.latent(model, val_set.images)
            test_latent = ae.latent(model, test_set.images)
            for kind in ("gmm", "svm"):
                chosen: Dict[str, float] = {}
                if config.select_baselines:
                    selection = select_baseline(
                        kind, train_latent, val_latent, seed=config.seed, component_grid=config.gmm_component_grid,
                        gamma_factors=config.svm_gamma_factors, nu=config.svm_nu,
                        max_iter=config.gmm_max_iter, tol=config.gmm_tol,
                    )
                    baseline, chosen = selection.baseline, {selection.parameter: selection.value}
                else:
                    baseline = OneClassBaseline.fit(
                        kind, train_latent, seed=config.seed, components=config.gmm_components,
                        max_iter=config.gmm_max_iter, tol=config.gmm_tol, nu=config.svm_nu, gamma=config.svm_gamma,
                    )
                scores = ScoreSet.for_samples(test_set, baseline.score(test_latent))
                val_scores = ScoreSet.for_samples(val_set, baseline.score(val_latent))
                run, curve = self._record(f"{kind}_{modality}", scores)
                run.hyperparameters = chosen
                summary.runs.append(run)
                curves[run.name] = curve
                per_method.setdefault(kind, {})[modality] = (scores, NormalizationStats.of(val_scores))

        for method, by_modality in per_method.items():
            (swir, swir_stats), (laser, laser_stats) = by_modality["swir"], by_modality["laser"]
            fused = fuse(swir, laser, 0.5, swir_stats, laser_stats)
            run, curve = self._record(f"{method}_fused", fused)
            summary.runs.append(run)
            curves[run.name] = curve
        return self._finish(summary, curves)

    def run(self, name: str) -> ExperimentSummary:
        experiments = {
            "architectures": self.compare_architectures,
            "c-sweep": self.c_sweep,
            "fusion": self.fusion_experiment,
            "benchmark": self.benchmark,
        }
        return experiments[name]()

