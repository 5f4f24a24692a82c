"""Pattern-colored Hamilton cycles in tuples of random graphs."""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    ColoredPath,
    ColorPattern,
    ColorSet,
    EdgeOrderedCycle,
    GraphTuple,
    Params,
    VertexSet,
    sample_tuple,
    split_tuple,
    verify_colored_cycle,
    verify_colored_path,
)
