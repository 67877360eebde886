"""Exception types shared across the toolkit."""

from __future__ import annotations


class ForensicDLError(Exception):
    """Base class for every error raised by this package."""


class UnsupportedConstruct(ForensicDLError):
    """An axiom uses a construct outside the executable Horn fragment."""

    def __init__(self, construct: str, axiom: object = None, detail: str = ""):
        self.construct = construct
        self.axiom = axiom
        msg = f"unsupported construct {construct}"
        if axiom is not None:
            msg += f" in axiom {axiom}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class UnsupportedQuery(ForensicDLError):
    pass


class ResourceLimit(ForensicDLError):
    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"derived-fact count exceeded the cap of {cap}")


class NotDerived(ForensicDLError):
    pass


class ParseError(ForensicDLError):
    """Raised when a source document has error-severity diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        first = self.diagnostics[0] if self.diagnostics else None
        super().__init__(str(first) if first else "parse error")


class DanglingReference(ForensicDLError):
    def __init__(self, record_id: str, identifier: str):
        self.record_id = record_id
        self.identifier = identifier
        super().__init__(f"record {record_id!r} references undeclared identifier {identifier!r}")


class MalformedCoordinate(ForensicDLError):
    pass


class UnknownClass(ForensicDLError):
    pass


class NoHypothesis(ForensicDLError):
    pass


class NoGciForClass(ForensicDLError):
    pass
