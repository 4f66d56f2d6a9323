"""
errors.py

Exception hierarchy shared by every workbench module.
The CLI maps these onto exit codes (see app.py).
"""

from typing import Optional

from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken


class WorkbenchError(Exception):
    """Base class for all workbench failures."""


class ParseError(WorkbenchError, ValueError):
    """
    Raised when formula or ordinal text does not conform to its grammar.

    `position` is a 0-based character offset into `text`.
    """

    def __init__(self, message: str, text: str = "", position: Optional[int] = None):
        self.text = text
        self.position = position
        self.reason = message
        if position is not None:
            message = f"{message} at offset {position}"
        super().__init__(message)

    @classmethod
    def from_lark(cls, exc: UnexpectedInput, text: str) -> "ParseError":
        """Translate a lark failure into a positioned ParseError."""
        if isinstance(exc, UnexpectedToken):
            token = exc.token
            if token.type == "$END" or token.start_pos is None:
                return cls("unexpected end of input", text, len(text))
            return cls(f"unexpected token {str(token)!r}", text, token.start_pos)
        if isinstance(exc, UnexpectedCharacters):
            return cls(f"unexpected character {text[exc.pos_in_stream]!r}", text, exc.pos_in_stream)
        if isinstance(exc, UnexpectedEOF):
            return cls("unexpected end of input", text, len(text))
        return cls(str(exc), text, getattr(exc, "pos_in_stream", None))


class ModalityRangeError(WorkbenchError, ValueError):
    """A formula uses a modality above the arity of the frame or space."""


class OrdinalError(WorkbenchError, ArithmeticError):
    pass


class OrdinalResourceError(OrdinalError):
    """A result would exceed the configured CNF term cap."""


class OrdinalDomainError(OrdinalError):
    """An ordinal operation was applied outside its domain."""


class FrameError(WorkbenchError, ValueError):
    """Invalid, unrooted or malformed J-frame input."""


class SpaceError(WorkbenchError, ValueError):
    """Invalid topology, arity mismatch, or enumeration beyond the configured cap."""


class SearchInconclusive(WorkbenchError):
    """
    An exhaustive search could not reach its completeness estimate.
    """

    def __init__(self, message: str, bound: int, estimate: int):
        self.bound = bound
        self.estimate = estimate
        super().__init__(message)


class UsageError(WorkbenchError):
    """Bad command-line arguments or unreadable @path input."""
