"""Exception hierarchy.

Every failure raised by the library derives from :class:`CirclefolError`; the
CLI prints ``type(err).__name__`` and exits with status 1.
"""


class CirclefolError(Exception):
    pass


class InvalidRegularity(CirclefolError, ValueError):
    pass


class NotADiffeomorphism(CirclefolError):
    pass


# Raised by newton_step when the corrected internal map loses monotonicity.
NonDiffeo = NotADiffeomorphism


class NoConvergence(CirclefolError):
    pass


class OrderMismatch(CirclefolError, ValueError):
    pass


class SingularFrame(CirclefolError):
    pass


class DomainError(CirclefolError):
    pass


class NotContracting(CirclefolError):
    pass


class NonPositiveLambda(CirclefolError):
    pass


class SmallDivisorOverflow(CirclefolError):
    pass


class MaxItersExceeded(CirclefolError):
    def __init__(self, msg, history=None):
        super().__init__(msg)
        self.history = history if history is not None else []


class NoAttractorFound(CirclefolError):
    pass


class BundleIterationStalled(CirclefolError):
    pass


class StepTooSmall(CirclefolError):
    def __init__(self, msg, results=None):
        super().__init__(msg)
        self.results = results if results is not None else []


class InadmissibleTriple(CirclefolError):
    pass
