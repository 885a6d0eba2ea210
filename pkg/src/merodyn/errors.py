"""Exception hierarchy shared by every merodyn module."""


class MerodynError(Exception):
    """Base class for all library errors."""


class PoleError(MerodynError, ArithmeticError):
    """Raised when a map evaluation lands on (or within the guard of) the pole -1."""


class CriticalPointError(MerodynError, ArithmeticError):
    """Raised when the Schwarzian derivative is requested at a critical point."""


class ToleranceError(MerodynError, ValueError):
    """Raised when a requested root tolerance is below the float spacing."""


class NotAFixedPointError(MerodynError, ValueError):
    pass


class SeedIsPoleError(MerodynError, ValueError):
    pass


class OrbitEscapedError(MerodynError, ArithmeticError):
    pass


class PoleEncounteredError(MerodynError, ArithmeticError):
    """An iterate of a root-finding bracket crossed the pole."""


class ConfigError(MerodynError, ValueError):
    pass
