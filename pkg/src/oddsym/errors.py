"""Exception types shared across the package.

Every error carries a short machine-readable ``code`` so the command line
front end can emit structured failures.
"""


class OddSymError(Exception):
    code = "ERROR"

    def __init__(self, message, code=None, **details):
        super().__init__(message)
        if code is not None:
            self.code = code
        self.details = details

    def to_dict(self):
        out = {"error": self.code, "message": str(self)}
        if self.details:
            out["details"] = {k: _plain(v) for k, v in self.details.items()}
        return out


class ContractError(OddSymError, ValueError):
    """Input violates a documented precondition."""

    code = "CONTRACT"


class NumericalError(OddSymError, RuntimeError):
    """A computation could not be resolved at the requested tolerance."""

    code = "NUMERICAL"


def _plain(value):
    try:
        import numpy as np

        if isinstance(value, np.generic):
            return value.item()
        if isinstance(value, np.ndarray):
            return value.tolist()
    except ImportError:  # pragma: no cover
        pass
    return value
