"""Exception hierarchy shared by every module.

Parse-level errors carry a ``path`` locating the offending element (a JSON
path such as ``$.joints[2].axis`` or an XML element description) so CLI
front-ends can report it verbatim.
"""

from __future__ import annotations


class ArtitwinError(Exception):
    """Base class for all package errors."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), "path": self.path}


# --- URDF / model -----------------------------------------------------------
class XmlSyntax(ArtitwinError):
    pass


class SchemaViolation(ArtitwinError):
    pass


class TreeViolation(ArtitwinError):
    pass


class InvariantViolation(ArtitwinError):
    pass


class MissingConfiguration(ArtitwinError):
    pass


class LimitViolation(ArtitwinError):
    pass


class DecompositionFailure(ArtitwinError):
    pass


# --- articulation JSON ------------------------------------------------------
class JsonSyntax(ArtitwinError):
    pass


class ConsistencyViolation(ArtitwinError):
    pass


class MissingMesh(ArtitwinError):
    pass


# --- geometry ---------------------------------------------------------------
class ParseError(ArtitwinError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, path)


class EmptyCloud(ArtitwinError):
    pass


class DegenerateGeometry(ArtitwinError):
    pass


class IoError(ArtitwinError):
    pass


# --- numerics / eval --------------------------------------------------------
class DimensionMismatch(ArtitwinError):
    pass


class IndexOutOfRange(ArtitwinError):
    pass


class ZeroAxis(ArtitwinError):
    pass


class KeyMismatch(ArtitwinError):
    pass


class InvalidCount(ArtitwinError):
    pass
