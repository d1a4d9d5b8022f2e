"""Exception types shared across the package."""


class VadkitError(Exception):
    """Base class for all package errors."""


# --- container / dataset loading ---

class MissingFile(VadkitError):
    pass


class MagicMismatch(VadkitError):
    pass


class DimensionMismatch(VadkitError):
    pass


class UnsortedRecords(VadkitError):
    pass


class LabelLengthMismatch(VadkitError):
    pass


class ValidationError(VadkitError):
    """A dataset invariant does not hold."""


# --- synthetic data ---

class InvalidConfig(VadkitError):
    pass


# --- density models ---

class TooFewSamples(VadkitError):
    pass


class DegenerateComponent(VadkitError):
    pass


class EmptyIndex(VadkitError):
    pass


class EmptyInput(VadkitError):
    pass


class ModelKindMissing(VadkitError):
    pass


# --- fusion ---

class InvalidAlpha(VadkitError):
    pass


class NoSamples(VadkitError):
    pass


class ShapeMismatch(VadkitError):
    pass


class SingleClassWarning(UserWarning):
    """Training sample contains a single label; the model is still trained."""


# --- evaluation ---

class SingleClassError(VadkitError):
    """AUC is undefined without both a positive and a negative label."""


# --- manifests ---

class ClassMissing(VadkitError):
    pass


class InsufficientVideos(VadkitError):
    pass
