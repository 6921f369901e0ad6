"""Rapid-intensification detection for tropical cyclones with LSTM classifiers
and LSTM-generated minority-class augmentation."""

__version__ = "0.1.0"
