"""Exception hierarchy shared by all fracbound modules."""


class FracboundError(Exception):
    """Base class for every error raised by this package."""


class EvalAtSingularity(FracboundError):
    pass


class NonIntegrableSpec(FracboundError):
    pass


class NotDifferentiable(FracboundError):
    pass


class InvalidOrder(FracboundError, ValueError):
    pass


class InvalidExponent(FracboundError, ValueError):
    pass


class GridTooCoarse(FracboundError, ValueError):
    pass


class ParamsOutOfScope(FracboundError, ValueError):
    """Raised when a check is called outside its theorem's hypothesis."""


class DegenerateFit(FracboundError):
    pass


class ConfigParseError(FracboundError):
    """Malformed run configuration; ``where`` names the offending field."""

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class MissingManifest(FracboundError, FileNotFoundError):
    pass
