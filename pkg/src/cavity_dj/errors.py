"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operator and state (or two states) live on incompatible spaces."""


class NumericInvariantError(ArithmeticError):
    """A numerical guarantee (norm, unitarity, truncation bound) was violated."""


class TruncationError(NumericInvariantError):
    """The Fock cutoff is too small for the requested field state or evolution."""


class OracleClassError(ValueError):
    """Truth table is neither constant nor balanced."""

    def __init__(self, ones_count, size):
        self.ones_count = ones_count
        self.size = size
        super().__init__(
            f"oracle class violation: {ones_count} ones in a table of {size} "
            f"(need 0, {size // 2} or {size})"
        )


class OracleParseError(ValueError):
    """Malformed oracle file."""

    def __init__(self, message, line, column=None):
        self.line = line
        self.column = column
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")
