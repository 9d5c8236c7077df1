from typing import Optional


class AbsforgeError(Exception):
    """Base class for all absforge errors."""


# PDDL

class PddlError(AbsforgeError):
    """Error in a PDDL source, reported as ``file:line:col: message``."""

    def __init__(self, message: str, line: int = 0, col: int = 0, source: str = "<pddl>"):
        self.message = message
        self.line = line
        self.col = col
        self.source = source
        super().__init__(f"{source}:{line}:{col}: {message}")

    def with_source(self, source: str) -> "PddlError":
        self.source = source
        self.args = (f"{source}:{self.line}:{self.col}: {self.message}",)
        return self


class PddlSyntaxError(PddlError):
    pass


class UnsupportedRequirement(PddlError):
    pass


class UndeclaredPredicate(PddlError):
    pass


class UndeclaredType(PddlError):
    pass


class UndeclaredObject(PddlError):
    pass


class ArityMismatch(PddlError):
    pass


class NegativeGoal(PddlError):
    pass


class TypeMismatch(PddlError):
    pass


class ActionNotApplicable(AbsforgeError):
    """A ground action was applied in a state that does not satisfy its precondition."""


class ResourceLimit(AbsforgeError):
    def __init__(self, message: str, budget: int = 0, expanded: int = 0):
        self.budget = budget
        self.expanded = expanded
        super().__init__(message)


# Feature language

class FormulaError(AbsforgeError):
    pass


class FormulaSyntaxError(FormulaError):
    pass


class UnknownPredicate(FormulaError):
    pass


class FormulaArityMismatch(FormulaError):
    pass


class UnboundVariable(FormulaError):
    pass


class UnknownType(FormulaError):
    pass


# QNP

class QnpError(AbsforgeError):
    pass


class NotApplicable(QnpError):
    """A QNP action was applied in a qstate that does not satisfy its precondition."""


class QnpFormatError(QnpError):
    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


# Refinement / reports

class UnknownHlAction(AbsforgeError):
    pass


class UnknownStage(AbsforgeError):
    pass


# Abstraction documents

class DocError(AbsforgeError):
    pass


class NoJsonFound(DocError):
    pass


class SchemaViolation(DocError):
    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class FormulaParseError(DocError):
    def __init__(self, message: str, feature: str = ""):
        self.feature = feature
        super().__init__(f"feature {feature}: {message}" if feature else message)


class EmptyTrainingSet(DocError):
    pass


# Proposers

class ProposerError(AbsforgeError):
    pass


class AuthError(ProposerError):
    pass


class LlmTimeout(ProposerError):
    pass


class ProtocolError(ProposerError):
    def __init__(self, status: int, excerpt: Optional[str] = None):
        self.status = status
        self.excerpt = excerpt or ""
        super().__init__(f"HTTP {status}: {self.excerpt[:200]}")


class ScriptExhausted(ProposerError):
    pass
