"""Exception hierarchy.

Every error carries a machine-parsable ``code`` and the process exit status
the CLI maps it to (2 = IO, 3 = data, 4 = internal).
"""


class BroadClassError(Exception):
    code = "INTERNAL"
    exit_status = 4

    def __init__(self, message="", code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class AudioError(BroadClassError):
    exit_status = 2


class UnsupportedFormat(AudioError):
    code = "UNSUPPORTED_FORMAT"


class CorruptHeader(AudioError):
    code = "CORRUPT_HEADER"


class NonPcmEncoding(AudioError):
    code = "NON_PCM_ENCODING"


class LabelError(BroadClassError):
    exit_status = 3


class MalformedLine(LabelError):
    code = "MALFORMED_LINE"


class NonMonotonicSpans(LabelError):
    code = "NON_MONOTONIC_SPANS"


class DegenerateSignal(BroadClassError):
    code = "DEGENERATE_SIGNAL"
    exit_status = 3


class SpecInvalidForRate(BroadClassError):
    code = "SPEC_INVALID_FOR_RATE"
    exit_status = 3


class InsufficientZeroCrossings(BroadClassError):
    code = "INSUFFICIENT_ZERO_CROSSINGS"
    exit_status = 3


class NoExtrema(BroadClassError):
    code = "NO_EXTREMA"
    exit_status = 3


class InconsistentSequence(BroadClassError):
    """Two successive S-N (or N-S) transitions: a detector bug."""

    code = "INCONSISTENT_SEQUENCE"
    exit_status = 4


class ConfigError(BroadClassError):
    code = "CONFIG_INVALID"
    exit_status = 1
