"""Broad phonetic class transition detection and segmentation."""
from ._backend import NAME as BACKEND
from .bandpass import BandpassSpec, BpfSignal, apply_bandpass, filter_response
from .config import Config, load_config, parse_config, serialize_config
from .detector import (DetectorParams, Transition, detect_amplitude_transitions,
                       detect_si_transitions)
from .errors import BroadClassError
from .evaluation import (EvalReport, PhoneClassMap, accuracy_table, class_distribution,
                         evaluate_utterance, match_transitions, onset_accuracy)
from .features import (FeatureTrack, FrameFeatures, FramePlan, compute_track, extract_features,
                       select_extrema, silence_index)
from .merger import (ClassSegment, MergerParams, Segmentation, assign_classes,
                     merge_transitions)
from .pipeline import PipelineResult, segment_file, segment_samples, segment_utterance
from .signal_io import (RawAudio, ReferenceLabels, Utterance, load_audio, load_labels,
                        normalize, quantize_9bit)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BandpassSpec", "BpfSignal", "BroadClassError", "ClassSegment", "Config",
    "DetectorParams", "EvalReport", "FeatureTrack", "FrameFeatures", "FramePlan",
    "MergerParams", "PhoneClassMap", "PipelineResult", "RawAudio", "ReferenceLabels",
    "Segmentation", "Transition", "Utterance", "accuracy_table", "apply_bandpass",
    "assign_classes", "class_distribution", "compute_track", "detect_amplitude_transitions",
    "detect_si_transitions", "evaluate_utterance", "extract_features", "filter_response",
    "load_audio", "load_config", "load_labels", "match_transitions", "merge_transitions",
    "normalize", "onset_accuracy", "parse_config", "quantize_9bit", "segment_file",
    "segment_samples", "segment_utterance", "select_extrema", "serialize_config",
    "silence_index",
]
