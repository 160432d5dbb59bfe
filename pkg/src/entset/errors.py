"""Exception types raised across the package."""


class EntsetError(ValueError):
    """Base class for all errors raised by entset."""


class NotSquare(EntsetError):
    pass


class NotHermitian(EntsetError):
    pass


class NotPSD(EntsetError):
    pass


class NotProjector(EntsetError):
    pass


class NotUnitary(EntsetError):
    pass


class NotNormalized(EntsetError):
    pass


class NotUnitSum(EntsetError):
    pass


class DimensionMismatch(EntsetError):
    pass


class RankTooSmall(EntsetError):
    pass


class ZeroProbability(EntsetError):
    pass


class IncompleteProtocol(EntsetError):
    pass


class RankDeficientReference(EntsetError):
    pass


class RankDeficientOutcome(EntsetError):
    pass


class InvalidCertificate(EntsetError):
    pass


class BadTargetSupport(EntsetError):
    pass


class NotFullRank(EntsetError):
    pass


class UnsupportedOperator(EntsetError):
    pass


class NotKEquivalent(EntsetError):
    pass


class EmptySet(EntsetError):
    pass


class NotEntangled(EntsetError):
    pass


class VerificationError(EntsetError):
    """A constructed object failed its own post-condition check."""


class SimilarityRefused(EntsetError):
    """No common scalar block of the requested size exists.

    ``best_k`` is the largest block size that *is* achievable (0 if none).
    """

    def __init__(self, requested_k: int, best_k: int, message: str | None = None):
        self.requested_k = requested_k
        self.best_k = best_k
        super().__init__(
            message
            or f"operators share no scalar block of size {requested_k}; best achievable is {best_k}"
        )
