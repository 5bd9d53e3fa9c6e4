"""
Slip classifiers: TCN, frequency-domain CNN and PSD-threshold detector
"""

from .freq_cnn import FreqCnnModel, freq_cnn_forward
from .model_store import load_model, save_model
from .psd_detector import PsdDetector, psd_features, psd_fit_threshold, welch_band_power
from .tcn import TcnArchitecture, TcnModel, parameter_count, tcn_default_architecture, tcn_forward

MODEL_KINDS = (TcnModel.kind, FreqCnnModel.kind, PsdDetector.kind)

__all__ = [
    "MODEL_KINDS",
    "FreqCnnModel",
    "PsdDetector",
    "TcnArchitecture",
    "TcnModel",
    "freq_cnn_forward",
    "load_model",
    "parameter_count",
    "psd_features",
    "psd_fit_threshold",
    "save_model",
    "tcn_default_architecture",
    "tcn_forward",
    "welch_band_power",
]
