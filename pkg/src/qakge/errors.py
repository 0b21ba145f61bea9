"""Exception hierarchy shared across the package.

Two broad families matter to callers: :class:`InputError` covers anything
wrong with user-supplied data or arguments (bad files, bad flags, schema
violations) and maps to CLI exit code 1, while the remaining
:class:`QakgeError` subclasses signal operational failures (diverged
training, no baseline match) and map to exit code 2.
"""


class QakgeError(Exception):
    """Base class for all package errors."""


class InputError(QakgeError):
    """Invalid input data, arguments, or configuration."""


class CsvFormatError(InputError):
    """Malformed triple CSV: bad header, arity, or weight."""


class MalformedContextError(InputError):
    """Context subgraph missing required structure (schema, attribute types)."""


class CheckpointError(InputError):
    """Unreadable, corrupted, or version-incompatible checkpoint file."""


class VocabMismatchError(InputError):
    """Checkpoint vocabulary does not match the graph it is applied to."""


class ContextMismatchError(InputError):
    """Plans being compared do not reference the context they are scored against."""


class TrainingDiverged(QakgeError):
    """Loss became non-finite during training.

    Carries enough state to locate the blow-up: epoch, batch index within
    the epoch, and the vocab indices of the offending triples.
    """

    def __init__(self, epoch: int, batch: int, triple_rows: list[int]):
        self.epoch = epoch
        self.batch = batch
        self.triple_rows = triple_rows
        super().__init__(
            f"non-finite loss at epoch {epoch}, batch {batch}; "
            f"offending triple rows: {triple_rows[:10]}"
        )


class NoMatchError(QakgeError):
    """No stored context cleared the similarity threshold."""


class ZeroVectorError(QakgeError):
    """Cosine similarity undefined for a zero-norm embedding."""

    def __init__(self, node: str):
        self.node = node
        super().__init__(f"zero-norm embedding for node {node!r}")
