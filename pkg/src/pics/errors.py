"""Exception hierarchy shared by all pics modules."""


class PicsError(Exception):
    """Base class for every error raised by this package."""


class TooFewKnots(PicsError):
    pass


class DegenerateKnots(PicsError):
    pass


class SingularTangent(PicsError):
    pass


class OutOfBounds(PicsError):
    pass


class DimensionMismatch(PicsError):
    pass


class InsufficientHistory(PicsError):
    pass


class InvalidEdit(PicsError):
    pass


class UnsupportedFormat(PicsError):
    pass


class CorruptFile(PicsError):
    pass


class SchemaVersionMismatch(PicsError):
    pass


class MalformedDocument(PicsError):
    pass


class UnknownFixture(PicsError):
    pass
