"""Re-ranker input construction: the structured segment format with [S],
[D], [T] markers, the flat concatenation format, and segment-drop ablations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .corpus import Question
from .errors import DataError

SUBJECT_MARKER = "S"
DESCRIPTION_MARKER = "D"
TAGS_MARKER = "T"
MARKER_ORDER = (SUBJECT_MARKER, DESCRIPTION_MARKER, TAGS_MARKER)
MARKER_STRINGS = {name: f"[{name}]" for name in MARKER_ORDER}

FORMAT_FS = "fs"
FORMAT_CAT = "cat"
FORMATS = (FORMAT_FS, FORMAT_CAT)


class QuerySegment(NamedTuple):
    text: str
    marker: str | None


@dataclass(frozen=True)
class StructuredInput:
    """One query/answer pair ready for the scorer.

    Markers stay attached even to empty segment text so the model always
    sees the same structural skeleton.
    """

    query_segments: tuple[QuerySegment, ...]
    answer_text: str

    def __post_init__(self) -> None:
        if not self.query_segments:
            raise DataError("structured input needs at least one query segment")
        for segment in self.query_segments:
            if segment.marker is not None and segment.marker not in MARKER_STRINGS:
                raise DataError(f"unknown segment marker {segment.marker!r}")
            _reject_marker_text(segment.text)
        _reject_marker_text(self.answer_text)

    def render_query(self) -> str:
        """Query side as one string, markers surrounded by single spaces."""
        parts: list[str] = []
        for segment in self.query_segments:
            if segment.text:
                parts.append(segment.text)
            if segment.marker is not None:
                parts.append(MARKER_STRINGS[segment.marker])
        return " ".join(parts)


def _reject_marker_text(text: str) -> None:
    # Marker strings in field text would make rendering ambiguous.
    for marker in MARKER_STRINGS.values():
        if marker in text:
            raise DataError(f"text contains reserved marker {marker!r}")


@dataclass(frozen=True)
class AblationSpec:
    """Segments to remove, together with their markers."""

    drop: frozenset[str] = field(default_factory=frozenset)

    def __init__(self, drop: frozenset[str] | set[str] | tuple[str, ...] = ()) -> None:
        dropped = frozenset(drop)
        unknown = dropped - set(MARKER_ORDER)
        if unknown:
            raise DataError(f"unknown ablation segments {sorted(unknown)!r}")
        if dropped == set(MARKER_ORDER):
            raise DataError("ablation cannot drop all three segments")
        object.__setattr__(self, "drop", dropped)

    def keeps(self, marker: str) -> bool:
        return marker not in self.drop


def render_tags(tags: tuple[str, ...] | list[str]) -> str:
    """Tags joined by '; ' (semicolon + single space)."""
    for tag in tags:
        if ";" in tag:
            raise DataError(f"tag {tag!r} contains a semicolon")
    return "; ".join(tags)


def build_fs_input(
    question: Question, answer_text: str, ablation: AblationSpec | None = None
) -> StructuredInput:
    """Structured format: (subject, S), (description, D), (tags, T), minus
    any ablated segments.
    """
    ablation = ablation or AblationSpec()
    all_segments = (
        QuerySegment(question.subject, SUBJECT_MARKER),
        QuerySegment(question.description, DESCRIPTION_MARKER),
        QuerySegment(render_tags(question.tags), TAGS_MARKER),
    )
    kept = tuple(s for s in all_segments if ablation.keeps(s.marker))
    return StructuredInput(query_segments=kept, answer_text=answer_text)


def build_cat_input(
    question: Question, answer_text: str, include_tags: bool = True
) -> StructuredInput:
    """Flat format: one unmarked segment, subject + description (+ tags)."""
    parts = [question.subject, question.description]
    if include_tags and question.tags:
        parts.append(render_tags(question.tags))
    return StructuredInput(
        query_segments=(QuerySegment(" ".join(parts), None),),
        answer_text=answer_text,
    )


def build_input(
    question: Question,
    answer_text: str,
    format: str,
    ablation: AblationSpec | None = None,
) -> StructuredInput:
    if format == FORMAT_FS:
        return build_fs_input(question, answer_text, ablation)
    if format == FORMAT_CAT:
        if ablation is not None and ablation.drop:
            raise DataError("ablation applies to the fs format only")
        return build_cat_input(question, answer_text)
    raise DataError(f"unknown format {format!r}, expected one of {FORMATS}")
