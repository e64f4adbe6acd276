"""Exception hierarchy shared across modules."""


class OistabError(Exception):
    """Base class for all package errors."""


class ExpansionLimitError(OistabError):
    """An intermediate expression exceeded the configured term budget."""


class EvaluationSingularity(OistabError, ZeroDivisionError):
    """A denominator vanished at the evaluation point."""


class AnnihilatorInfeasible(OistabError):
    """No F with F*Jbar + Jtilde = 0 exists."""


class ValidationError(OistabError):
    def __init__(self, errors, warnings=()):
        self.errors = list(errors)
        self.warnings = list(warnings)
        super().__init__("; ".join(self.errors))


class InversionUnavailable(OistabError):
    """The structure run did not terminate, so no left inverse exists."""


class UnreliableEstimate(OistabError):
    """Too many bound samples hit singular points."""


class ContractError(OistabError, ValueError):
    """A table argument violates its monotonicity contract."""


class ParseError(OistabError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
