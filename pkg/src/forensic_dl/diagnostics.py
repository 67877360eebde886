from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    message: str
    severity: str = "error"  # error | warning
    line: int | None = None
    column: int | None = None
    code: str = "syntax"
    origin: str = "<kb>"

    def __str__(self) -> str:
        line = self.line if self.line is not None else 1
        col = self.column if self.column is not None else 1
        return f"{self.origin}:{line}:{col}: {self.severity}: {self.message}"

    @property
    def is_error(self) -> bool:
        return self.severity == "error"
