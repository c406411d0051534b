"""Exception hierarchy shared across the package."""


class SmockLabError(Exception):
    """Base class for all smocklab errors."""


class InvalidSpecError(SmockLabError):
    """A grid spec or pattern violates its invariants."""


class ConflictError(SmockLabError):
    """An edit or tiling would make two stitching lines share a vertex."""


class NotFoundError(SmockLabError):
    """A referenced stitching line or vertex does not exist."""


class ExtractionError(SmockLabError):
    """The smocked graph cannot be extracted from the pattern."""


class TriangulationError(SmockLabError):
    """Degenerate or contradictory input to the grid-free builder."""


class MergeError(SmockLabError):
    """Stitched vertex groups do not coincide when merging."""


class SchemaError(SmockLabError):
    """A pattern file violates the JSON schema.

    ``pointer`` is a JSON pointer to the offending element.
    """

    def __init__(self, pointer, message):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer
        self.message = message
