"""Exception hierarchy shared by all flexspan modules."""

from __future__ import annotations


class FlexspanError(Exception):
    """Base class for every error raised by the package."""


class DegenerateVertex(FlexspanError):
    pass


class DegenerateQuadratic(FlexspanError):
    pass


class NoRealRoot(FlexspanError):
    """The vertex quadratic has no real root.

    During sweeps this is the normal signal that the flexion value lies outside
    the range of the folding; ``vertex`` names the base vertex (1-indexed).
    """

    def __init__(self, vertex: int | None = None, discriminant: float | None = None):
        self.vertex = vertex
        self.discriminant = discriminant
        where = f" at vertex v{vertex}" if vertex is not None else ""
        super().__init__(f"no real root{where} (discriminant={discriminant!r})")


class OutOfRange(FlexspanError):
    pass


class Unsolvable(FlexspanError):
    pass


class TriangleViolation(FlexspanError):
    def __init__(self, face: str, detail: str = ""):
        self.face = face
        super().__init__(f"face {face} violates the triangle inequality {detail}".rstrip())


class NoCompletion(FlexspanError):
    pass


class RealizabilityFailure(NoCompletion):
    def __init__(self, stage: int):
        self.stage = stage
        super().__init__(f"no realizable root at recursion stage J={stage}")


class ModelMismatch(FlexspanError):
    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"embedding does not fit the coordinate model (rms residual {residual:.3e})")


class SingularDerivative(FlexspanError):
    pass


class NotFlexible(FlexspanError):
    pass


class DegenerateStar(FlexspanError):
    pass


class ParamError(FlexspanError):
    """Parameter file problem; carries the line number and/or field name."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        prefix = []
        if line is not None:
            prefix.append(f"line {line}")
        if field is not None:
            prefix.append(f"field '{field}'")
        super().__init__(f"{': '.join(prefix)}: {message}" if prefix else message)


class AliasWarning(UserWarning):
    """Trace sampled too coarsely to unwrap dihedrals unambiguously."""
