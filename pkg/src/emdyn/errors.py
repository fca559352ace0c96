"""Exception hierarchy shared by all emdyn modules.

Everything derives from :class:`EmdynError` so callers can catch the whole
family at once.  :class:`ValidationError` covers bad inputs (wrong shapes,
non-Hermitian operators, unphysical rates); :class:`NumericalError` covers
failures detected during a computation that started from valid inputs.
"""
from __future__ import annotations


class EmdynError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(EmdynError):
    """Input fails a documented precondition."""


class DimMismatch(ValidationError):
    """Two objects that must share a dimension do not."""


class NotHermitian(ValidationError):
    """An operator required to be Hermitian is not, beyond tolerance."""


class NotDensityMatrix(ValidationError):
    """A state fails the density-matrix checks (trace, Hermiticity, positivity)."""


class BadFactorIndex(ValidationError):
    """A tensor-factor index is out of range or the keep-set is empty."""


class BadEigenindex(ValidationError):
    """An eigenvalue index does not address the (merged) spectrum."""


class RequiresNoPulse(ValidationError):
    """A closed-form evaluator was handed a task with a control pulse."""


class ZeroPrimaryCoupling(ValidationError):
    """The primary coupling strength of an elimination is zero."""


class TruncationTooSmall(ValidationError):
    """Estimated mode occupation is too large for the requested Fock cutoff."""


class NegativeToneFrequency(ValidationError):
    """A planned pump tone landed at a non-positive frequency."""


class DispersiveViolation(ValidationError):
    """A dispersive ratio exceeds the validity limit of the perturbative model."""


class NumericalError(EmdynError):
    """A numerical routine produced an unusable result."""


class NonPhysicalResult(NumericalError):
    """Propagation produced a state violating positivity beyond tolerance."""


class DegenerateFit(NumericalError):
    """A scaling fit cannot be performed (e.g. gaps at numerical floor)."""


class ParseError(EmdynError):
    """A scenario document could not be parsed.

    Carries optional ``line`` and ``field`` context for error reporting.
    """

    def __init__(self, message: str, *, line: int | None = None,
                 field: str | None = None):
        ctx = []
        if line is not None:
            ctx.append(f"line {line}")
        if field is not None:
            ctx.append(f"field '{field}'")
        if ctx:
            message = f"{message} ({', '.join(ctx)})"
        super().__init__(message)
        self.line = line
        self.field = field
