"""Exception hierarchy shared by the library, the CLI and the HTTP service."""


class SafeError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = 3


class ConfigurationError(SafeError, ValueError):
    """A spec, config or argument is invalid."""

    exit_code = 2


class SeriesFormatError(ConfigurationError):
    """A series file cannot be ingested."""


class FeatureError(SafeError, ValueError):
    """Feature extraction received an unusable window."""


class StreamPoisonedError(SafeError):
    """The detector saw a non-finite sample and refuses further steps until reset."""


class TrainingDivergedError(SafeError):
    """A fit produced a non-finite loss; the predictor was rolled back."""


class AdaptationError(SafeError):
    """Replay assembly would have trained on data at or after the validation step."""


class AcceptanceError(SafeError):
    """An acceptance gate requested on the command line failed."""

    exit_code = 4
