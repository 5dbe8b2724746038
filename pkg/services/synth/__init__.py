"""
Synthetic data services
"""

from .synth_generator import SynthConfig, SynthDataset, generate, load_synth_config, write_synth_dataset

__all__ = [
    'SynthConfig',
    'SynthDataset',
    'generate',
    'load_synth_config',
    'write_synth_dataset',
]
