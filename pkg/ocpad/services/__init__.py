from ocpad.services.autoencoder import AutoencoderTrainer
from ocpad.services.baselines import OneClassBaseline
from ocpad.services.experiment import ExperimentManager

__all__ = ['AutoencoderTrainer', 'OneClassBaseline', 'ExperimentManager']
