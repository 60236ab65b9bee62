"""Exception hierarchy shared by every layer of the stack."""
from __future__ import annotations


class CvccError(Exception):
    """Base class for all errors raised by this package."""


# crypto layer

class LengthMismatch(CvccError, ValueError):
    pass


class FieldTooLong(CvccError, ValueError):
    pass


class InvalidElement(CvccError, ValueError):
    pass


class InvalidGroup(CvccError, ValueError):
    pass


class ZeroScalar(CvccError, ValueError):
    pass


class EmptyBatch(CvccError, ValueError):
    pass


class TagMismatch(CvccError):
    """Ciphertext authentication failed; no plaintext was released."""


class UnknownOpKind(CvccError, KeyError):
    pass


# protocol layer

class EmptyCredential(CvccError, ValueError):
    pass


class BadCredentials(CvccError):
    pass


class NotLoggedIn(CvccError):
    pass


class PayloadTooLong(CvccError, ValueError):
    pass


class FrameRejected(CvccError):
    """A received frame failed verification.

    Subclasses form the rejection taxonomy; ``reason`` is the stable name
    used in traces and reports.
    """

    @property
    def reason(self) -> str:
        return type(self).__name__


class MalformedFrame(FrameRejected):
    pass


class StaleTimestamp(FrameRejected):
    pass


class ReplayDetected(FrameRejected):
    pass


class BadAuthenticator(FrameRejected):
    pass


class BadCertificate(FrameRejected):
    pass


class ExpiredCertificate(FrameRejected):
    pass


class Revoked(FrameRejected):
    pass


class ConfirmMismatch(FrameRejected):
    pass


# Fixed evaluation order inside verify_request, followed by the
# post-verification checks.
REJECTION_REASONS = (
    "MalformedFrame",
    "StaleTimestamp",
    "ReplayDetected",
    "BadAuthenticator",
    "BadCertificate",
    "ExpiredCertificate",
    "Revoked",
    "ConfirmMismatch",
)


# vc store

class StoreError(CvccError):
    pass


class EmptyKeywords(StoreError, ValueError):
    pass


class MalformedUpload(StoreError, ValueError):
    pass


class DuplicateRecordId(StoreError):
    pass


class NotFound(StoreError, KeyError):
    pass


# simulation / configuration

class OutOfRange(CvccError):
    pass


class ConfigError(CvccError):
    pass


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    pass
