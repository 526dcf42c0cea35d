"""Exceptions raised by graphviewpoints."""


class GraphViewpointException(Exception):
    """Base class for all errors raised by this package"""
    pass


class DatasetParseException(GraphViewpointException):
    """Exception raised when a dataset file is not well-formed JSON or has the wrong shape"""
    pass


class DatasetValidationException(GraphViewpointException):
    """Exception raised when a dataset record violates an invariant"""
    pass


class DomainException(GraphViewpointException, ValueError):
    """Exception raised when an argument is outside an operation's domain"""
    pass


class DegeneratePoseException(GraphViewpointException):
    """Exception raised when a pose pair yields a zero-length view direction"""
    pass


class DegenerateLayoutException(GraphViewpointException):
    """Exception raised when a camera is requested for a layout with no extent"""
    pass


class ProjectionDomainException(GraphViewpointException):
    """Exception raised when a node lies on or behind the eye plane"""
    pass


class MissingRangeException(GraphViewpointException):
    """Exception raised when a range table has no row for a (graph, measure) pair"""
    pass


class UsageException(GraphViewpointException):
    """Exception raised for contradictory command-line or config values"""
    pass
