"""Exception types shared across the package."""


class TlError(Exception):
    """Base class for all package errors."""


class ParseError(TlError):
    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = "%s (at position %d)" % (message, position)
        super().__init__(message)


class SingularPoint(TlError):
    """A point coincides with a singularity within tolerance."""


class ConnectionFound(TlError):
    """A connection (beta, alpha, n) of the IET was detected.

    ``T^n(u^b_beta) = u^t_alpha`` within tolerance.
    """

    def __init__(self, beta, alpha, n):
        self.beta = beta
        self.alpha = alpha
        self.n = n
        super().__init__("connection (%s, %s, %d)" % (beta, alpha, n))


class ConnectionStop(TlError):
    """Induction stopped: the two rightmost singularities coincide."""

    def __init__(self, step=0):
        self.step = step
        super().__init__("induction stopped at step %d" % step)


class NotSuspension(TlError):
    """The vector fails the suspension-cone inequalities."""


class Degenerate(TlError):
    """Degenerate data (e.g. sum of suspension heights vanishes)."""


class NormExceeded(TlError):
    """A minimal positive sub-path already has norm >= the packet bound."""


class NotPositive(TlError):
    """The path is not positive."""


class NotClosed(TlError):
    """The path is not a loop."""


class InsufficientWindow(TlError):
    """Not enough induction history to evaluate the requested inequality."""


class OutOfRange(TlError):
    """Argument outside the admissible range."""


class NotConnected(TlError):
    """The square permutations do not act transitively."""


class NotConnectedInEvenGraph(TlError):
    """Required vertices lie in different components of the even graph."""


class PrecisionExhausted(TlError):
    """Working precision cannot support the requested digit count."""
