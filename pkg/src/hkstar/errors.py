"""Exception types shared by the reference maps and the compiled kernels."""


class PreconditionError(ValueError):
    """Input outside a map's domain.  ``condition`` names the violated rule."""

    def __init__(self, condition: str, message: str):
        self.condition = condition
        super().__init__(f"[{condition}] {message}")


class InvariantViolation(RuntimeError):
    """A per-iteration monitor tripped.

    ``condition`` is the tag of the broken invariant (``"A3"``, ``"even:4"``,
    ``"odd:2"``, ...); ``witness`` carries the offending input when known.
    """

    def __init__(self, condition: str, message: str, witness=None):
        self.condition = condition
        self.witness = witness
        super().__init__(f"[{condition}] {message}")
