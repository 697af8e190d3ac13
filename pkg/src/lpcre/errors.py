"""Exception hierarchy.

Every error carries a stable ``code`` so the CLI can emit machine-readable
failures without string matching.
"""

from __future__ import annotations


class LPCREError(Exception):
    code = "LPCRE_ERROR"

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class AntisymmetryViolation(LPCREError):
    code = "ANTISYMMETRY_VIOLATION"


class JacobiViolation(LPCREError):
    code = "JACOBI_VIOLATION"


class NumericalFailure(LPCREError):
    code = "NUMERICAL_FAILURE"


class NotEMAdapted(LPCREError):
    code = "NOT_EM_ADAPTED"


class UnrecognizedForm(LPCREError):
    code = "UNRECOGNIZED_FORM"


class InvalidParameter(LPCREError, ValueError):
    code = "INVALID_PARAMETER"


class DomainViolation(LPCREError, ValueError):
    code = "DOMAIN_VIOLATION"


class HypothesisViolation(LPCREError, ValueError):
    code = "HYPOTHESIS_VIOLATION"


class NoConvergence(LPCREError):
    code = "NO_CONVERGENCE"

    def __init__(self, message: str, stats: dict | None = None):
        super().__init__(message)
        self.stats = stats or {}

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["stats"] = self.stats
        return d


class Blowup(LPCREError):
    code = "BLOWUP"


class ParseError(LPCREError):
    code = "PARSE_ERROR"


class SchemaError(LPCREError):
    code = "SCHEMA_ERROR"
