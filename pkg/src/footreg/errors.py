"""Exception hierarchy shared by every stage."""


class FootregError(Exception):
    """Base class for all library errors."""


class GeometryError(FootregError, ValueError):
    pass


class InvalidRing(GeometryError):
    pass


class DegenerateChord(GeometryError):
    pass


class DegenerateAngle(GeometryError):
    pass


class NearParallel(GeometryError):
    pass


class AllCoincident(GeometryError):
    pass


class VerticalData(GeometryError):
    pass


class RingCollapsed(FootregError):
    pass


class RebuildFailed(FootregError):
    pass


class ShapeTooSmall(FootregError, ValueError):
    pass


class TooManyBurrs(FootregError, ValueError):
    pass


class SingularTransform(FootregError, ValueError):
    pass


class HorizonCrossing(FootregError, ValueError):
    pass


class ParseError(FootregError, ValueError):
    def __init__(self, message, line=None, position=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"byte {position}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.position = position


class UnsupportedGeometry(FootregError, ValueError):
    pass


class IoError(FootregError, OSError):
    pass
