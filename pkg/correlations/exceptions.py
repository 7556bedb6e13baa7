class NumericalError(RuntimeError):
    """Internal numeric failure, e.g. the eigensolver did not converge.

    Invalid input raises ``django.core.exceptions.ValidationError`` instead.
    """

    def __init__(self, message, **diagnostics):
        self.diagnostics = diagnostics
        super().__init__(message)
