"""Exception hierarchy shared across the toolkit."""


class HypersocialError(Exception):
    """Base class for all toolkit errors."""


class InputError(HypersocialError, ValueError):
    """Bad user-supplied data (files, configs, arguments). Maps to CLI exit code 2."""


class NodeNotFound(HypersocialError, KeyError):
    pass


class EmptyInput(InputError):
    pass


class InvalidValue(InputError):
    pass


class SchemaMismatch(InputError):
    pass


class MissingFeature(InputError):
    pass


class Undefined(HypersocialError, ValueError):
    """A measure is mathematically undefined for the given input."""


class NoMatchingArchetype(HypersocialError, LookupError):
    pass


class PrototypeUnavailable(HypersocialError, ValueError):
    pass


class LineGraphOverflow(HypersocialError, MemoryError):
    """Raised instead of silently truncating a hub's incidence list."""


class SpecError(InputError):
    """Infeasible synthetic fixture specification."""


class StageError(HypersocialError, RuntimeError):
    """A pipeline stage failed. Maps to CLI exit code 3."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")
