"""Exception types shared across the package."""


class SourceError(ValueError):
    """Malformed or inconsistent source description."""


class UndefinedConditionalError(SourceError):
    """Conditioning on a history that has zero probability."""

    def __init__(self, history):
        self.history = tuple(history)
        super().__init__(f"undefined conditional: history {self.history} has zero probability")


class EnumerationGuardError(RuntimeError):
    """An enumeration would exceed the configured size limit."""

    def __init__(self, what, count, limit):
        self.count = count
        self.limit = limit
        super().__init__(f"{what}: {count} items exceeds enumeration limit {limit}")


class DensityMatrixError(ValueError):
    """Matrix is not Hermitian, not PSD, or not unit trace within tolerance."""


class OracleMismatchError(AssertionError):
    """Huffman and brute-force minimizers disagree."""


class DecodeError(ValueError):
    """Encoded message has weight outside the codeword span."""

    def __init__(self, residual_norm, message="message has amplitude outside the codeword span"):
        self.residual_norm = float(residual_norm)
        super().__init__(f"{message} (residual norm {self.residual_norm:.3e})")
