"""Exception hierarchy. Class names double as the error names printed by the CLI."""


class SolitaireError(ValueError):
    """Base class for every domain error raised by this package."""


# partitions
class NotSorted(SolitaireError):
    pass


class NonPositivePart(SolitaireError):
    pass


class NegativeX(SolitaireError):
    pass


class EmptyPartition(SolitaireError):
    pass


class CardOverflow(SolitaireError):
    """Pile size or card total does not fit in a signed 64-bit integer."""


# rules
class QOutOfRange(SolitaireError):
    pass


class SigmaExceedsPile(SolitaireError):
    pass


class PileTooLarge(SolitaireError):
    pass


class MissingLevelOne(SolitaireError):
    pass


class Unsorted(SolitaireError):
    pass


class NotWellBehaved(SolitaireError):
    pass


class NotConvex(SolitaireError):
    pass


# dynamics / stability / marked
class TooLarge(SolitaireError):
    pass


class SigmaBarDecreasing(SolitaireError):
    pass


class NotStable(SolitaireError):
    """Reference configuration is not a fixpoint of the rule."""


class MarkedInvariantBroken(SolitaireError):
    """Internal consistency failure of the marked solitaire; never expected."""


# shapes
class NonPositiveZ(SolitaireError):
    pass


class NonPositiveC(SolitaireError):
    pass


class NoConvergence(SolitaireError):
    pass


class NotConvexShape(SolitaireError):
    pass


class DerivativeNotMultipleOfC(SolitaireError):
    pass


class AreaExceedsOne(SolitaireError):
    pass


# cli
class UnknownSuite(SolitaireError):
    pass


class BoundViolation(SolitaireError):
    """A diagnostic bound (new-pile size, pile count) failed on a logged step."""
