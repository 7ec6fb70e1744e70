"""Latin squares, intercalates and the switchings that create or remove them."""

__version__ = "0.1.0"

from .core import (
    Box,
    CycleStructure,
    LatinRectangle,
    LatinSquare,
    cyclic_square,
    from_json,
    make_rectangle,
    parse_rectangle,
    sigma_row_pair,
    tau_column_pair,
    to_json,
    to_text,
)
from .errors import (
    CycleError,
    JoinPrecondition,
    LatinLabError,
    NotFlippable,
    RepeatError,
    ResourceError,
    ShapeError,
    SymbolError,
    TwistInvalid,
    ValidationError,
)
from .intercalates import census, intercalate_count, subsquare_count
from .oracle import enumerate_rectangles, enumerate_squares, exact_permanent
from .sampler import SampleConfig, sample, sample_exact_small
from .switchings import enumerate_single_joins, flip, is_flippable, join, rotate, turn, twist

__all__ = [
    "__version__",
    "Box",
    "CycleStructure",
    "LatinRectangle",
    "LatinSquare",
    "cyclic_square",
    "from_json",
    "make_rectangle",
    "parse_rectangle",
    "sigma_row_pair",
    "tau_column_pair",
    "to_json",
    "to_text",
    "CycleError",
    "JoinPrecondition",
    "LatinLabError",
    "NotFlippable",
    "RepeatError",
    "ResourceError",
    "ShapeError",
    "SymbolError",
    "TwistInvalid",
    "ValidationError",
    "census",
    "intercalate_count",
    "subsquare_count",
    "enumerate_rectangles",
    "enumerate_squares",
    "exact_permanent",
    "SampleConfig",
    "sample",
    "sample_exact_small",
    "enumerate_single_joins",
    "flip",
    "is_flippable",
    "join",
    "rotate",
    "turn",
    "twist",
]
