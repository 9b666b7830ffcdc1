"""Exception hierarchy. CLI maps SpecError to exit 2 and ModelError to exit 3."""


class LcgError(Exception):
    pass


class SpecError(LcgError, ValueError):
    """Malformed group or set specification."""


class GroupAxiomError(SpecError):
    """A multiplication table failed a group axiom."""

    def __init__(self, axiom: str, witness: tuple):
        self.axiom = axiom
        self.witness = witness
        super().__init__(f"{axiom} axiom fails at {witness}")


class ModelError(LcgError):
    """Operation not meaningful for the given model or arguments."""


class WindowError(ModelError):
    """A result left the model's carrier window."""

    def __init__(self, what: str, value):
        self.what = what
        self.value = value
        super().__init__(f"window overflow: {what} = {value}")


class NotApplicableError(ModelError, TypeError):
    """Law or operation called on an unsupported model."""
