"""Exception types shared across the package."""


class DataError(Exception):
    """Malformed input, missing data, or an inconsistent artifact."""


class OOVWordError(DataError):
    """A query word is absent from the vocabulary or embedding store."""

    def __init__(self, word: str):
        super().__init__(f"word not available: {word!r}")
        self.word = word


class NumericError(Exception):
    """Training or evaluation hit a non-finite or diverging value."""
