"""Error hierarchy. Every error knows its module and the CLI exit code it maps to."""

from typing import Any, Dict, Optional


class RoleAnalysisError(Exception):
    """Base class for all domain errors."""

    exit_code = 1
    module = "roleanalysis"

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None, module: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.context = dict(context or {})
        if module is not None:
            self.module = module

    def __str__(self) -> str:
        if not self.context:
            return self.message
        details = ", ".join(f"{key}={value}" for key, value in self.context.items())
        return f"{self.message} ({details})"


class InputValidationError(RoleAnalysisError, ValueError):
    """Bad input data or flags. Exit code 1."""


class ConfigError(InputValidationError):
    module = "config"


class GraphFormatError(InputValidationError):
    """Malformed manifest or matrix file; carries file/line context."""

    module = "relgraph-core"

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None, **context: Any):
        ctx: Dict[str, Any] = {}
        if path is not None:
            ctx["file"] = str(path)
        if line is not None:
            ctx["line"] = line
        ctx.update(context)
        super().__init__(message, ctx)
        self.path = path
        self.line = line


class PartitionError(InputValidationError):
    module = "relgraph-core"


class DimensionMismatchError(InputValidationError):
    module = "matrices"


class ClosureCapExceeded(InputValidationError):
    module = "semigroup"

    def __init__(self, elements: int, max_word_length: int, cap: int):
        super().__init__(
            f"Closure exceeded the cap of {cap} elements",
            {"elements_reached": elements, "longest_word_length": max_word_length},
        )
        self.elements = elements
        self.max_word_length = max_word_length
        self.cap = cap


class VerificationError(RoleAnalysisError):
    """A claimed property failed or its hypothesis does not hold. Exit code 2."""

    exit_code = 2
    module = "semigroup"


class HierarchyError(VerificationError, ValueError):
    module = "relgraph-core"


class NotPerfectError(VerificationError):
    pass


class HomomorphismViolation(VerificationError):
    pass
