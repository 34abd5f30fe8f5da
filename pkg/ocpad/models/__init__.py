from ocpad.models.sample_set import ATTACK, BONAFIDE, SampleSet
from ocpad.models.score_set import DetCurve, ScoreSet
from ocpad.models.autoencoder import AEModel
from ocpad.models.baselines import FeatureScaler, GmmModel, OcSvmModel

__all__ = ['ATTACK', 'BONAFIDE', 'SampleSet', 'DetCurve', 'ScoreSet', 'AEModel',
           'FeatureScaler', 'GmmModel', 'OcSvmModel']
