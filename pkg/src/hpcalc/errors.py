"""Exception hierarchy shared by the analysis modules and the CLI."""


class HPCalcError(Exception):
    """Base class; ``code`` is the machine-readable tag printed by the CLI."""

    code = "E_INTERNAL"


class InputError(HPCalcError, ValueError):
    """Malformed input file or inconsistent arguments."""

    code = "E_INPUT"


class DimensionMismatch(InputError):
    code = "E_DIM"


class ParameterError(HPCalcError, ValueError):
    """A parameter is outside its admissible range."""

    code = "E_RANGE"


class SpectrumHit(HPCalcError, ArithmeticError):
    """The resolvent was requested at a point of the spectrum."""

    code = "E_SPECTRUM"


class AbscissaError(ParameterError):
    """Integration abscissa outside the strip between function domain and spectrum."""

    code = "E_ABSCISSA"


class TailBoundFailure(HPCalcError):
    """The integrand of a line integral does not decay fast enough."""

    code = "E_TAIL"


class IllConditionedWarning(RuntimeWarning):
    pass
