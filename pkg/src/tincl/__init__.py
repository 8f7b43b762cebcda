"""Contrastive pre-training for power control in interference networks."""
from .config import RunConfig
from .errors import ConfigError, NumericError
from .netsim import Dataset, NetworkConfig, full_reuse, generate_dataset, rates, sum_rate
from .neuralnet import MlpModel, MlpSpec
from .wmmse import WmmseSettings, binarize, exhaustive_binary_oracle, label_dataset, wmmse

__version__ = "0.1.0"
