import numpy as np
import pytest

from broadclass import Config, segment_file, segment_samples
from broadclass.detector import NS, SN
from broadclass.errors import DegenerateSignal
from broadclass.signal_io import write_wav

from conftest import FS, to_int16


def test_tone_in_silence_end_to_end(tone_in_silence):
    seg = segment_samples(tone_in_silence, FS).segmentation
    assert [t.kind for t in seg.transitions] == [SN, NS]
    assert [s.label for s in seg.segments] == ["S", "H", "S"]


def test_file_and_array_paths_agree(tmp_path, tone_in_silence):
    x = to_int16(tone_in_silence)
    write_wav(tmp_path / "u.wav", x, FS)
    a = segment_file(tmp_path / "u.wav").segmentation
    b = segment_samples(x, FS, utterance_id="u").segmentation
    assert a == b


def test_result_exposes_intermediates(tone_in_silence):
    r = segment_samples(tone_in_silence, FS)
    assert len(r.track) == 200
    assert len(r.bpf) == len(r.utterance) == tone_in_silence.size
    assert [t.kind for t in r.si_transitions] == [SN, NS]


def test_config_changes_behaviour(tone_in_silence):
    strict = Config(ade_threshold=10.0)
    r = segment_samples(tone_in_silence, FS, strict)
    assert r.amp_transitions == []


def test_eight_khz_input(tone_in_silence):
    x = tone_in_silence[::2]
    seg = segment_samples(x, 8000).segmentation
    assert seg.sample_rate == 8000 and seg.n_samples == x.size
    assert [t.kind for t in seg.transitions] == [SN, NS]


def test_degenerate_input():
    with pytest.raises(DegenerateSignal):
        segment_samples(np.zeros(1000), FS)
