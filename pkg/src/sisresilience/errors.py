"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class SisResilienceError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSpecError(SisResilienceError, ValueError):
    """A topology, seeding, parameter or sweep specification violates its invariants."""


class DegenerateGraphError(SisResilienceError, ValueError):
    pass


class EmptyRecordError(SisResilienceError, ValueError):
    pass


class MissingSeriesError(SisResilienceError, ValueError):
    pass


class BracketError(SisResilienceError):
    """Survival at the bracket endpoints does not straddle 0.5."""

    def __init__(self, axis, lo, hi, survival_lo, survival_hi):
        self.axis = axis
        self.lo, self.hi = lo, hi
        self.survival_lo, self.survival_hi = survival_lo, survival_hi
        super().__init__(
            f"bracket ({lo}, {hi}) on axis {axis!r} does not straddle 0.5: "
            f"survival({lo})={survival_lo:.3f}, survival({hi})={survival_hi:.3f}"
        )


class ScenarioParseError(SisResilienceError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line, self.column = line, column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class ScenarioValidationError(SisResilienceError, ValueError):
    pass
