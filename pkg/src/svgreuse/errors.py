"""Exception types shared across the package."""


class SvgReuseError(Exception):
    """Base class for all package errors."""


class MalformedXml(SvgReuseError):
    def __init__(self, message, offset=None, line=None, column=None):
        super().__init__(message)
        self.offset = offset
        self.line = line
        self.column = column


class NotAnSvg(SvgReuseError):
    pass


class IdCollision(SvgReuseError):
    pass


class UnknownId(SvgReuseError):
    pass


class NonContiguousMembers(SvgReuseError):
    pass


class PathParseError(SvgReuseError):
    pass


class RendererUnavailable(SvgReuseError):
    """Non-fatal: signals that no raster thumbnail can be produced."""


class IrParseError(SvgReuseError):
    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class DslSyntaxError(SvgReuseError):
    def __init__(self, message, line=None, column=None):
        loc = f" (line {line})" if line is not None else ""
        super().__init__(message + loc)
        self.line = line
        self.column = column


class UnknownDirective(DslSyntaxError):
    pass


class DuplicateParam(DslSyntaxError):
    pass


class UnknownIdentifier(SvgReuseError):
    pass


class EvalError(SvgReuseError):
    def __init__(self, message, directive_index=None):
        if directive_index is not None:
            message = f"directive {directive_index}: {message}"
        super().__init__(message)
        self.directive_index = directive_index


class SynthesisFailed(SvgReuseError):
    def __init__(self, message, attempts=0, report=None):
        super().__init__(message)
        self.attempts = attempts
        self.report = report


class UnrecognizedStructure(SvgReuseError):
    """The deterministic decomposer cannot handle this document."""


class ChainStepFailed(SvgReuseError):
    def __init__(self, step, attempts, last_error):
        super().__init__(f"{step} failed after {attempts} attempts: {last_error}")
        self.step = step
        self.attempts = attempts
        self.last_error = last_error


class ReplayMiss(SvgReuseError):
    def __init__(self, digest):
        super().__init__(f"no transcript entry for request digest {digest}")
        self.digest = digest


class ProviderError(SvgReuseError):
    def __init__(self, message, status=0, body=""):
        super().__init__(message)
        self.status = status
        self.body = body


class RefinementRejected(SvgReuseError):
    def __init__(self, report):
        super().__init__(f"no refinement candidate validated: {report}")
        self.report = report


class UnknownCheckpoint(SvgReuseError):
    pass


class CsvParseError(SvgReuseError):
    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class RaggedRows(CsvParseError):
    pass


class MappingError(SvgReuseError):
    pass


class InvalidStateTransition(SvgReuseError):
    pass
