"""Exception hierarchy for the package."""


class DCCSEError(Exception):
    """Base class for every error raised by dccse."""


class DivisionByZero(DCCSEError, ZeroDivisionError):
    pass


class DecodeError(DCCSEError, ValueError):
    pass


class OverrideUnsupported(DCCSEError):
    """Hash overrides requested on a backend that does not allow them."""


class EmptyReceiverSet(DCCSEError, ValueError):
    pass


class DuplicateReceiver(DCCSEError, ValueError):
    pass


class ReceiverNotInSet(DCCSEError, ValueError):
    pass


class DegenerateReceiverKey(DCCSEError, ValueError):
    pass


class ReceiverSetMismatch(DCCSEError, ValueError):
    pass


class InvalidBlind(DCCSEError, ValueError):
    pass


class InvalidChallenge(DCCSEError):
    pass


class OracleBudgetExceeded(DCCSEError):
    pass


class PhaseViolation(DCCSEError):
    pass


class CannotTest(DCCSEError):
    """The adversary holds a wrapped trapdoor and cannot run Test on it."""


class AuthenticationFailure(DCCSEError):
    pass


class UsageError(DCCSEError):
    pass
