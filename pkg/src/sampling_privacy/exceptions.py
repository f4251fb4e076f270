class InvalidParameters(ValueError):
    """Mechanism or experiment parameters violate their constraints."""


class InfiniteLeakage(ArithmeticError):
    """An output is possible under one truthful value and impossible under another."""


class MalformedCounts(ValueError):
    """A count table does not have the shape an estimator expects."""


class DatasetError(ValueError):
    """A dataset stream is empty, unreadable, or too corrupted to use."""
