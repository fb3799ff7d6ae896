"""Exception hierarchy shared across the package."""


class ThinFilmError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(ThinFilmError):
    """Invalid experiment or integrator configuration."""


class DegeneracyError(ThinFilmError):
    """A film height reached zero or below where positivity is required."""


class SingularityError(ThinFilmError):
    """Evaluation of a quantity at a point where it is singular."""


class UndefinedQuotientError(ThinFilmError):
    """A quotient of functionals is undefined (constant state)."""


class InsufficientDataError(ThinFilmError):
    """A trajectory does not carry enough samples for the requested fit."""


class WrongRegimeError(ThinFilmError):
    """A fit was requested on a trajectory outside its regime of validity."""


class OracleFailureError(ThinFilmError):
    """An independent oracle failed to converge; the expected value must not
    be guessed."""


class NumericalBlowupError(ThinFilmError):
    """The integrator encountered a non-finite state.

    Carries the last time at which the state was still finite.
    """

    def __init__(self, message: str, last_good_time: float):
        super().__init__(message)
        self.last_good_time = last_good_time
