"""Error taxonomy shared by the library and the CLI exit-code mapping."""


class GraphonLabError(Exception):
    """Base class for all library errors."""


class InputError(GraphonLabError):
    """Malformed or out-of-contract input (CLI exit code 2)."""


class CapacityError(GraphonLabError):
    """Request exceeds a configured desk-scale cap (CLI exit code 3)."""


class InvariantError(GraphonLabError):
    """An internal cross-check failed; indicates a bug (CLI exit code 4)."""
