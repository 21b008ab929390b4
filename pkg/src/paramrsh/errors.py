"""Exception hierarchy shared by all modules."""


class ParamRshError(Exception):
    pass


class ParameterOutOfRange(ParamRshError, ValueError):
    pass


class GraphError(ParamRshError, ValueError):
    pass


class EdgeInTree(GraphError):
    pass


class GeometryError(ParamRshError, ValueError):
    """Duplicate points or a collinear triple."""


class InvalidIndices(ParamRshError, IndexError):
    pass


class OracleUnavailable(ParamRshError):
    """An exact reference cannot be computed at this instance size."""


class InstanceTooLarge(OracleUnavailable):
    pass


class BudgetExceeded(ParamRshError, RuntimeError):
    pass


class EmptyInput(ParamRshError, ValueError):
    pass


class InsufficientPoints(ParamRshError, ValueError):
    pass


class ElementInSet(ParamRshError, ValueError):
    pass


class UnsupportedP(ParamRshError, ValueError):
    pass


class CollinearTriple(GeometryError):
    pass


class KTooLarge(ParameterOutOfRange):
    """Too many inner points for an exponential-size population or oracle."""
