"""Engine exceptions.  The CLI maps every :class:`EngineError` to exit code 2."""


class EngineError(Exception):
    code = "engine-error"


class OrderOverflow(EngineError):
    code = "order-overflow"

    def __init__(self, needed: int, cap: int, what: str = ""):
        self.needed = needed
        self.cap = cap
        detail = f" in {what}" if what else ""
        super().__init__(f"jet order {needed} exceeds cap {cap}{detail}")


class MalformedLift(EngineError):
    code = "malformed-lift"


class BianchiNonzero(EngineError):
    code = "bianchi-nonzero"


class ExtractionIncomplete(EngineError):
    code = "extraction-incomplete"

    def __init__(self, message: str, remainder=None):
        super().__init__(message)
        self.remainder = remainder


class NotInvariantWarning(UserWarning):
    """Emitted when a current is built from a Lagrangian that is not invariant."""
