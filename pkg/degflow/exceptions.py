EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_DATA_ERROR = 3
EXIT_NUMERICAL_ERROR = 4


class DegflowError(Exception):
    """Base class for all degflow errors."""

    exit_code = 1


class ConfigError(DegflowError):
    """The run configuration could not be parsed or validated."""

    exit_code = EXIT_CONFIG_ERROR

    def __init__(self, message: str, line_number: int | None = None):
        self.message = message
        self.line_number = line_number
        super().__init__(message)

    def __str__(self):
        if self.line_number is not None:
            return "line %d: %s" % (self.line_number, self.message)
        return self.message

    def __repr__(self):
        return "<ConfigError %s>" % self


class DataError(DegflowError):
    """Input data is missing or unusable."""

    exit_code = EXIT_DATA_ERROR


class ImageNotFoundError(DataError):
    """The image file does not exist."""

    pass


class UnsupportedImageError(DataError):
    """The image has a bit depth or mode other than 8-bit gray or RGB."""

    pass


class CorruptImageError(DataError):
    """The image stream could not be decoded."""

    pass


class ShapeError(DataError, ValueError):
    """Array dimensions do not satisfy an operation's contract."""

    pass


class CorpusEmptyError(DataError):
    """A corpus directory holds no usable images."""

    pass


class ManifestError(DataError):
    """A pair manifest is malformed or references missing files."""

    pass


class CheckpointError(DataError):
    """A checkpoint is missing, truncated or does not fit the network."""

    pass


class NumericalError(DegflowError):
    """A computation left the finite domain."""

    exit_code = EXIT_NUMERICAL_ERROR


class NonFiniteError(NumericalError):
    """NaN or Inf showed up in a tensor, gradient or integration state."""

    def __init__(self, what: str):
        self.what = what
        super().__init__(f"non-finite values in {what}")


class DivergenceError(NumericalError):
    """Training loss stayed far above its initial value."""

    def __init__(self, step: int, loss: float, initial_loss: float):
        self.step = step
        self.loss = loss
        self.initial_loss = initial_loss
        super().__init__(
            f"training diverged at step {step}: loss {loss:.6g} vs initial "
            f"{initial_loss:.6g}"
        )


class GraphError(DegflowError):
    """The autodiff tape was used in a way it does not support."""

    pass
