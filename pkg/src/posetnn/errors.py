class Error(Exception):
    pass


class ParseError(Error):
    pass


class InvalidPosetError(Error):
    pass


class CycleError(InvalidPosetError):
    pass


class PointIndexError(Error, IndexError):
    pass


class ArityError(Error):
    pass


class SizeError(Error):
    pass


class DimensionError(Error):
    pass


class NotOrderPolytopeError(Error):
    pass


class NotLatticeError(Error):
    pass


class NegativeExponentError(Error):
    pass


class NotPosetPolynomialError(Error):
    pass


class SourceMissingError(Error):
    pass


class ShapeError(Error):
    pass


class FormatError(Error):
    pass


class FilterError(Error):
    pass
