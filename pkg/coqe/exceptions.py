from .verdict import Verdict
from typing import Optional


class CoqeError(Exception):
    """Base class for every error raised by the coqe library."""
    pass


class ExprError(CoqeError):
    pass


class ParseError(ExprError):
    """ParseError is raised for text which does not conform to the
    expression grammar; offset is the byte offset of the offending token.
    """
    def __init__(self, msg: str, offset: int = 0):
        self.offset = offset
        super().__init__(f'{msg} (at byte {offset})')


class UnknownFunction(ParseError):
    pass


class UnknownSymbol(ParseError):
    pass


class UnboundSymbol(ExprError):
    pass


class AssumptionViolation(ExprError):
    pass


class GeometryError(CoqeError):
    pass


class NonInvertibleMetric(GeometryError):
    pass


class DimensionError(GeometryError):
    pass


class AsymmetricTensor(GeometryError):
    pass


class DegeneratePlane(GeometryError):
    pass


class DegenerateFrame(GeometryError):
    pass


class ZeroField(GeometryError):
    pass


class StructureError(CoqeError):
    pass


class DefinitionViolation(StructureError):
    pass


class UnverifiedStructure(StructureError):
    pass


class NonZeroTensorScalars(StructureError):
    pass


class NoExactFit(StructureError):
    """NoExactFit is raised when the Ricci tensor is not in the span of the
    decomposition; residual_norm is the minimal (least squares) residual at
    the sample point.
    """
    def __init__(self, msg: str, residual_norm: float):
        self.residual_norm = residual_norm
        super().__init__(msg)


class RankDeficient(StructureError):
    def __init__(self, msg: str, nullity: int):
        self.nullity = nullity
        super().__init__(msg)


class ManifestError(CoqeError):
    """ManifestError is raised for any problem with the input; the CLI exits
    with code 2.
    """
    def __init__(self, msg: str, location: Optional[str] = None):
        self.location = location
        super().__init__(msg if location is None else f'{location}: {msg}')


class CheckException(Exception):
    """CheckException is the basic check exception."""
    def __init__(
            self,
            msg: str,
            verdict: Verdict = Verdict.FAIL,
            result: Optional[dict] = None):
        assert msg, 'CheckException message must not be empty'
        self.verdict = verdict
        self.result = result
        super().__init__(msg)

    def to_dict(self):
        return {
            "error": self.__str__(),
            "verdict": self.verdict.value
        }


class FlaggedException(CheckException):
    """FlaggedException must be raised when a check result stands but carries
    discrepancies which need a human look; the result is kept and the check
    is reported as flagged.
    """
    def __init__(self, msg: str, result: dict):
        assert isinstance(result, dict)
        super().__init__(msg, verdict=Verdict.FLAGGED, result=result)
