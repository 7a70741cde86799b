"""Error hierarchy shared by every module of the bounds app.

Each error carries a machine-readable ``code`` (written on stderr by the CLI)
and the process ``exit_status`` the CLI maps it to: 1 for usage problems,
2 for data and fitting problems.
"""


class TcsurvError(Exception):
    code = 'tcsurv_error'
    exit_status = 2

    def __init__(self, message, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def as_dict(self):
        payload = {'error': self.code, 'message': self.message}
        if self.context:
            payload['details'] = self.context
        return payload


class ConfigurationError(TcsurvError):
    """Invalid configuration, unknown setting id or bad command-line usage."""
    code = 'configuration_error'
    exit_status = 1


class SizeError(TcsurvError):
    code = 'size_error'


class SchemaError(TcsurvError):
    code = 'schema_error'


class ParseError(TcsurvError):
    """A CSV cell could not be parsed or violates a record invariant."""
    code = 'parse_error'

    def __init__(self, message, line=None, **context):
        super().__init__(message, line=line, **context)
        self.line = line


class DomainError(TcsurvError):
    code = 'domain_error'


class FitError(TcsurvError):
    """A nuisance fitter failed; ``diagnostics`` holds iteration details."""
    code = 'fit_error'

    def __init__(self, message, diagnostics=None):
        super().__init__(message, diagnostics=diagnostics or {})
        self.diagnostics = diagnostics or {}


class DegenerateCurveError(TcsurvError):
    code = 'degenerate_curve'


class NumericGuardError(TcsurvError):
    """A denominator of the influence function fell below the numeric floor."""
    code = 'numeric_guard'

    def __init__(self, message, w=None, u=None):
        super().__init__(message, w=w, u=u)
        self.w = w
        self.u = u


class NoSelectionError(TcsurvError):
    code = 'no_selection'


class OutputError(TcsurvError):
    code = 'output_error'

    def __init__(self, message, path=None):
        super().__init__(message, path=str(path) if path is not None else None)
        self.path = path
