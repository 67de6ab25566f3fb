"""End-to-end segmentation of one utterance."""
from __future__ import annotations

import os
from dataclasses import dataclass

from .bandpass import apply_bandpass
from .config import Config
from .detector import detect_amplitude_transitions, detect_si_transitions
from .features import compute_track
from .merger import assign_classes, merge_with_removed
from .signal_io import RawAudio, load_audio, normalize, quantize_9bit


@dataclass(frozen=True, eq=False)
class PipelineResult:
    segmentation: object
    track: object
    si_transitions: list
    amp_transitions: list
    utterance: object
    bpf: object


def segment_utterance(u, config=Config()):
    plan = config.plan
    params = config.detector
    bpf = apply_bandpass(u, config.band)
    q = quantize_9bit(u)
    track = compute_track(u, bpf, plan)
    si_t = detect_si_transitions(track, q, params, plan)
    amp_t = detect_amplitude_transitions(track, bpf, params, plan)
    kept, removed = merge_with_removed(si_t, amp_t, config.merger)
    hop = plan.to_samples(plan.hop_ms, u.sample_rate)
    seg = assign_classes(kept, u.duration, u.sample_rate, evidence=removed, track=track,
                         hop=hop, utterance_id=u.utterance_id,
                         window_ms=max(config.sn_hl_ms, config.amp_ns_ms))
    return PipelineResult(seg, track, si_t, amp_t, u, bpf)


def segment_samples(samples, sample_rate, config=Config(), utterance_id=""):
    return segment_utterance(normalize(RawAudio(samples, sample_rate), utterance_id), config)


def segment_file(path, config=Config(), utterance_id=None):
    raw = load_audio(path)
    if utterance_id is None:
        utterance_id = os.path.splitext(os.path.basename(path))[0]
    return segment_utterance(normalize(raw, utterance_id), config)
