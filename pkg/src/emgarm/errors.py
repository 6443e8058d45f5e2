"""Exception types shared across the pipeline."""


class EmgArmError(Exception):
    """Base class for all package errors."""


class IoFailure(EmgArmError):
    """Filesystem read/write failed."""


class FormatError(EmgArmError):
    """A file or wire payload violates its declared format."""


class EmptyScript(EmgArmError):
    """Gesture script contains no steps."""


class NonMonotonicTimestamp(EmgArmError):
    """Frame timestamps must strictly increase within a stream."""


class DimensionMismatch(EmgArmError):
    """Array dimensions do not match the model contract."""


class NonFiniteInput(EmgArmError):
    """NaN or infinity where finite values are required."""


class EmptyBatch(EmgArmError):
    """Loss/gradient requested for an empty batch."""


class EmptySplit(EmgArmError):
    """Evaluation requested on an empty dataset split."""


class InsufficientData(EmgArmError):
    """Dataset too small or missing a class entirely."""


class DivergedLoss(EmgArmError):
    """Training produced a non-finite loss."""


class ParseError(EmgArmError):
    """Wire frame could not be decoded."""


class OversizeLine(EmgArmError):
    """Wire line exceeds the protocol's 1024-byte limit."""


class AuthFailed(EmgArmError):
    """Server rejected the challenge-response handshake."""


class LinkTimeout(EmgArmError):
    """I/O deadline exceeded on the command link."""


class ConnectionLost(EmgArmError):
    """Peer closed the connection mid-session."""


class NonMonotonicSeq(EmgArmError):
    """Server rejected a gesture sequence number that did not increase."""


class BindFailure(EmgArmError):
    """Server could not bind its listen address."""
