"""Exception hierarchy shared by all modules.

Input problems (bad words, malformed files) derive from :class:`InputError`
so the command line front end can map them to a single exit code.
"""


class InputError(ValueError):
    """Malformed or out-of-range user input."""


class SizeLimitError(InputError):
    """A requested enumeration or construction exceeds a configured bound."""


class ValidationError(ValueError):
    """An object violates a structural invariant (e.g. not doubly stochastic)."""


class ConstructionError(ValueError):
    """An automaton cannot be built from the supplied solution."""


class SemanticsError(RuntimeError):
    """A simulation ended in a state the halting semantics forbids."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its declared tolerance."""


class UnboundedError(RuntimeError):
    """The linear program has an unbounded objective."""
