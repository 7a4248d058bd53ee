"""Exception types shared across the package."""


class SeqRecError(Exception):
    """Base class for fatal library errors."""


class FormatError(SeqRecError):
    """Malformed or unreadable input data."""


class VocabularyError(SeqRecError):
    """Vocabulary construction produced no usable tokens."""


class LeakageError(SeqRecError):
    """A held-out sequence reached a training-side structure."""
