"""Signal synthesis: schemes, waveforms, channel, datasets, container I/O."""

from .schemes import CANONICAL_NAMES, SCHEMES, ModulationScheme, get_scheme
from .waveforms import ModulationError, analog_message, modulate, rrc_taps
from .channel import ChannelConfig, apply_channel, to_amplitude_phase
from .dataset import (
    Dataset,
    GenerationConfig,
    RadioSample,
    SPLIT_NAMES,
    generate_dataset,
    split_samples,
    synthesize_sample,
)
from .container import (
    BadMagicError,
    ContainerError,
    TruncatedPayloadError,
    VersionMismatchError,
    read_dataset,
    write_dataset,
)

__all__ = [
    "CANONICAL_NAMES",
    "SCHEMES",
    "ModulationScheme",
    "get_scheme",
    "ModulationError",
    "analog_message",
    "modulate",
    "rrc_taps",
    "ChannelConfig",
    "apply_channel",
    "to_amplitude_phase",
    "Dataset",
    "GenerationConfig",
    "RadioSample",
    "SPLIT_NAMES",
    "generate_dataset",
    "split_samples",
    "synthesize_sample",
    "BadMagicError",
    "ContainerError",
    "TruncatedPayloadError",
    "VersionMismatchError",
    "read_dataset",
    "write_dataset",
]
