"""Exception types shared across the package."""


class ConstantInput(ValueError):
    """Waveform is constant after mean removal, so normalization is undefined.

    A constant decode signals a degenerate latent and must be visible to
    callers rather than silently mapped to silence.
    """


class NoPeak(ValueError):
    """No non-DC spectral peak above the detection floor."""


class TrainingDiverged(RuntimeError):
    """A training loss became non-finite (step size too large)."""


class ModelFormatError(ValueError):
    """Model file is malformed, has a bad version, or violates the dim chain."""


class BankFormatError(ValueError):
    """Bank file violates the binary container format."""


class BadMagic(BankFormatError):
    """Bank file does not start with the expected magic bytes."""


class VersionMismatch(BankFormatError):
    """Bank file declares an unsupported format version."""


class Truncated(BankFormatError):
    """Bank file ends before the declared payload is complete."""


class ScoreError(ValueError):
    """Score file is syntactically or semantically invalid."""


class EmptyScore(ScoreError):
    """Score file contains no note events."""
