class ExtractError(Exception):
    """Base class for extraction failures."""


class InvalidConfig(ExtractError):
    pass


class ModelLoadError(ExtractError):
    pass


class DecodeError(ExtractError):
    pass
