from enum import Enum, IntEnum


class FilterKind(str, Enum):
    BILINEAR = "bilinear"
    BICUBIC = "bicubic"
    LANCZOS3 = "lanczos3"


class StudyKind(str, Enum):
    DTLR = "dtlr"
    LAMBDA = "lambda"
    K = "K"
    FILTER = "filter"
    SWAP = "swap"


class Precision(str, Enum):
    FLOAT32 = "float32"
    FLOAT64 = "float64"


class Stream(IntEnum):
    """Named RNG stream indices, the second half of every Philox key."""

    DEFAULT = 0
    INIT = 1
    SAMPLE = 2
    PATCH = 3
    TIME = 4
    NOISE = 5
    CORPUS = 6
    SYNTH = 7
