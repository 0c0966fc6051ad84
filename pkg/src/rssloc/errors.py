"""Exception hierarchy for rssloc.

Every error raised by the library derives from :class:`RssLocError` so callers
can catch library failures in one place. The CLI maps these onto exit codes.
"""


class RssLocError(Exception):
    """Base class for all rssloc errors."""

    kind = "runtime"


class InvalidInputError(RssLocError):
    """Inputs are malformed: non-finite values, wrong shapes, bad parameters."""

    kind = "invalid-input"


class DegenerateGeometryError(RssLocError):
    """Sensor/source geometry makes the requested quantity undefined."""

    kind = "degenerate-geometry"


class InsufficientSensorsError(RssLocError):
    """Too few sensors for the requested geometric test or estimator."""

    kind = "insufficient-sensors"


class SingularGramError(RssLocError):
    """The least-squares Gram matrix is numerically singular.

    For the known-variance path this certifies the sensors are (nearly)
    cohyperplanar; for the unknown-variance path, (nearly) cohyperspherical.
    """

    kind = "singular-gram"


class SingularPointError(RssLocError):
    """An evaluation point coincides with a sensor location."""

    kind = "singular-point"


class DegenerateJacobianError(RssLocError):
    """The Gauss-Newton normal matrix J^T J is numerically singular."""

    kind = "degenerate-jacobian"


class NumericError(RssLocError):
    """A computation produced non-finite values."""

    kind = "numeric"


class InfiniteInformationError(RssLocError):
    """Fisher information is unbounded (noise-free measurements)."""

    kind = "infinite-information"


class ConfigError(RssLocError):
    """A configuration or input file violates its schema."""

    kind = "schema"
