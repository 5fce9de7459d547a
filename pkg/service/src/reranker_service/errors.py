"""Exception taxonomy for the scoring service and its training tools."""

from __future__ import annotations


class ServiceError(Exception):
    """Base class for every error this package raises on purpose."""


class VocabularyError(ServiceError):
    """Marker extension violated a tokenizer precondition."""


class EncodingError(ServiceError):
    """A pair cannot be encoded within the sequence-length budget."""


class WireError(ServiceError):
    """A scoring request violates the wire protocol (answered with HTTP 400)."""


class CheckpointError(ServiceError):
    """A checkpoint directory is missing files or internally inconsistent."""


class InputDataError(ServiceError):
    """Corpus, qrels, run, or splits files are malformed or unusable."""


class TrainingDivergedError(ServiceError):
    """Training produced a non-finite loss."""
