"""Exception types raised across the package."""


class FerfuseError(Exception):
    """Base class for all package errors."""


class NonSymmetricError(FerfuseError):
    """Input matrix asymmetry exceeds the tolerated bound."""


class NoConvergenceError(FerfuseError):
    """Iterative solver hit its iteration cap before converging."""


class KTooLargeError(FerfuseError):
    """Requested neighbor/cluster count exceeds the number of points."""


class DisconnectedGraphError(FerfuseError):
    """Neighbor graph splits into several components.

    ``component_sizes`` lists the size of each connected component and
    ``labels`` maps every node to its component id so the caller can
    restrict to the largest one.
    """

    def __init__(self, component_sizes, labels):
        self.component_sizes = list(component_sizes)
        self.labels = labels
        super().__init__(
            f"graph has {len(self.component_sizes)} components "
            f"(sizes {self.component_sizes})"
        )


class MalformedRowError(FerfuseError):
    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class LabelOutOfRangeError(FerfuseError):
    pass


class ZeroStdError(FerfuseError):
    pass


class ImageTooSmallError(FerfuseError):
    pass


class LengthMismatchError(FerfuseError):
    pass


class BadMagicError(FerfuseError):
    pass


class TruncatedFileError(FerfuseError):
    pass


class DuplicateIdError(FerfuseError):
    pass


class EmptyClassError(FerfuseError):
    def __init__(self, class_index):
        self.class_index = class_index
        super().__init__(f"class {class_index} has no samples")


class DegenerateInputError(FerfuseError):
    pass


class PerplexityTooLargeError(FerfuseError):
    pass


class DimensionMismatchError(FerfuseError):
    pass


class SingleClassError(FerfuseError):
    pass


class EmptyMatrixError(FerfuseError):
    pass


class DimTooLargeError(FerfuseError):
    pass


class InconsistentGridError(FerfuseError):
    pass


class ConfigError(FerfuseError):
    """Invalid run configuration (missing files, no sources, bad values)."""
