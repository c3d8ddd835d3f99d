
from typing import Dict, Optional


class UserError(RuntimeError):
    kind = "user_error"

    def __init__(self, fmt: str, *fmt_args: object):
        super().__init__()
        self.fmt = fmt
        self.fmt_args = fmt_args
        self.code = 1

    def __str__(self) -> str:
        return self.fmt % self.fmt_args

    def to_json(self) -> Dict[str, object]:
        return {"error": self.kind, "message": str(self), "code": self.code}


class FormulaError(UserError):
    kind = "formula"


class KernelSpecError(UserError):
    kind = "kernel_spec"


class NotPSDError(UserError):
    kind = "not_psd"


class BasisTooLargeError(UserError):
    kind = "basis_too_large"


class SingularCovarianceError(UserError):
    kind = "singular_covariance"


class ResponseError(UserError):
    kind = "response"


class DataError(UserError):
    kind = "data"


class ConfigError(UserError):
    kind = "config"


class InsufficientDrawsError(UserError):
    kind = "insufficient_draws"


class SamplingError(UserError):
    kind = "sampling"

    def __init__(self, fmt: str, *fmt_args: object,
                 diagnostics: Optional[Dict[str, object]] = None):
        super().__init__(fmt, *fmt_args)
        self.diagnostics = diagnostics or {}

    def to_json(self) -> Dict[str, object]:
        ret = super().to_json()
        ret["diagnostics"] = self.diagnostics
        return ret
