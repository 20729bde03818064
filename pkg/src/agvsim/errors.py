"""Exception types raised by agvsim."""


class AgvsimError(Exception):
    """Base class for all errors raised by this package."""


class InsufficientPoints(AgvsimError):
    pass


class DegenerateCalibration(AgvsimError):
    def __init__(self, rank: int, message: str | None = None):
        self.rank = rank
        super().__init__(message or f"design matrix has rank {rank}, need 4 "
                         "(are all ground points coplanar?)")


class SingularViewGeometry(AgvsimError):
    pass


class CoincidentPoints(AgvsimError):
    pass


class ConfigError(AgvsimError):
    """A configuration or data file could not be parsed or validated.

    ``path`` and ``line`` are filled in when known so that messages can
    point at the offending location.
    """

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        self.reason = message
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class RuleBaseError(ConfigError):
    pass


class ScenarioInvalid(ConfigError):
    pass
