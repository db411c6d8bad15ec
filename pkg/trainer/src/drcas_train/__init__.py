"""DRCAS trainer: builds patch pairs through the primary compacq CLI, trains
the residual restoration network, and exports DRCS weight files the primary
inference engine loads.
"""

from .config import TrainConfig, load_config
from .dataset import PairRecord, build_pairs, load_pairs, save_pairs
from .evaluate import evaluate_through_primary
from .exporter import export_weights, import_weights
from .gradcheck import gradient_check, make_tiny_setup
from .model import DrcasNet
from .train import train

__version__ = "0.1.0"
