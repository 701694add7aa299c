"""Temporal ordering and interval algebra over timeline-anchored annotations.

Intervals are half-open [start, end): two events sharing a boundary point
meet, they do not overlap. Point order is the ordinal order of the timeline;
numeric offsets never override it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from spokenkit.core.model import (
    SYNTHETIC_PREFIX,
    UNIT_SYMBOLIC,
    Annotation,
    Document,
    EventInterval,
    TimePoint,
    Timeline,
    UnknownIdError,
)

BEFORE = "before"
EQUAL = "equal"
AFTER = "after"


class IncomparableIntervalsError(ValueError):
    """Raised when two intervals do not live on the same timeline."""


def compare_points(timeline: Timeline, a: str, b: str) -> str:
    """Order two points of one timeline: 'before', 'equal' or 'after'.

    Ordering follows the ordinal index; contradictory offsets are a
    validation finding, not an ordering input.
    """
    ia = timeline.index_of(a)
    ib = timeline.index_of(b)
    if ia < ib:
        return BEFORE
    if ia > ib:
        return AFTER
    return EQUAL


class TemporalRelation(Enum):
    """The thirteen mutually exclusive relations between proper intervals."""

    BEFORE = "before"
    AFTER = "after"
    MEETS = "meets"
    MET_BY = "metBy"
    OVERLAPS = "overlaps"
    OVERLAPPED_BY = "overlappedBy"
    STARTS = "starts"
    STARTED_BY = "startedBy"
    DURING = "during"
    CONTAINS = "contains"
    FINISHES = "finishes"
    FINISHED_BY = "finishedBy"
    EQUALS = "equals"

    @property
    def inverse(self) -> "TemporalRelation":
        return _INVERSES[self]


_INVERSES = {
    TemporalRelation.BEFORE: TemporalRelation.AFTER,
    TemporalRelation.AFTER: TemporalRelation.BEFORE,
    TemporalRelation.MEETS: TemporalRelation.MET_BY,
    TemporalRelation.MET_BY: TemporalRelation.MEETS,
    TemporalRelation.OVERLAPS: TemporalRelation.OVERLAPPED_BY,
    TemporalRelation.OVERLAPPED_BY: TemporalRelation.OVERLAPS,
    TemporalRelation.STARTS: TemporalRelation.STARTED_BY,
    TemporalRelation.STARTED_BY: TemporalRelation.STARTS,
    TemporalRelation.DURING: TemporalRelation.CONTAINS,
    TemporalRelation.CONTAINS: TemporalRelation.DURING,
    TemporalRelation.FINISHES: TemporalRelation.FINISHED_BY,
    TemporalRelation.FINISHED_BY: TemporalRelation.FINISHES,
    TemporalRelation.EQUALS: TemporalRelation.EQUALS,
}

# Overlap in the inclusive sense: the relations with a non-empty shared span.
SHARING_RELATIONS = frozenset(
    {
        TemporalRelation.OVERLAPS,
        TemporalRelation.OVERLAPPED_BY,
        TemporalRelation.STARTS,
        TemporalRelation.STARTED_BY,
        TemporalRelation.DURING,
        TemporalRelation.CONTAINS,
        TemporalRelation.FINISHES,
        TemporalRelation.FINISHED_BY,
        TemporalRelation.EQUALS,
    }
)


def relation_by_index(s1: int, e1: int, s2: int, e2: int) -> TemporalRelation:
    """Classify two index pairs. Exactly one relation holds for proper intervals."""
    if s1 == s2 and e1 == e2:
        return TemporalRelation.EQUALS
    if e1 < s2:
        return TemporalRelation.BEFORE
    if s1 > e2:
        return TemporalRelation.AFTER
    if e1 == s2:
        return TemporalRelation.MEETS
    if s1 == e2:
        return TemporalRelation.MET_BY
    if s1 == s2:
        return TemporalRelation.STARTS if e1 < e2 else TemporalRelation.STARTED_BY
    if e1 == e2:
        return TemporalRelation.FINISHES if s1 > s2 else TemporalRelation.FINISHED_BY
    if s2 < s1 and e1 < e2:
        return TemporalRelation.DURING
    if s1 < s2 and e2 < e1:
        return TemporalRelation.CONTAINS
    if s1 < s2:
        return TemporalRelation.OVERLAPS
    return TemporalRelation.OVERLAPPED_BY


def relation(a: EventInterval, b: EventInterval, timeline: Timeline) -> TemporalRelation:
    """The temporal relation of interval a to interval b on one timeline."""
    if a.timeline != b.timeline:
        raise IncomparableIntervalsError(
            f"intervals on different timelines: {a.timeline!r} vs {b.timeline!r}"
        )
    if a.timeline != timeline.id:
        raise IncomparableIntervalsError(
            f"intervals reference timeline {a.timeline!r}, got {timeline.id!r}"
        )
    return relation_by_index(
        timeline.index_of(a.start),
        timeline.index_of(a.end),
        timeline.index_of(b.start),
        timeline.index_of(b.end),
    )


@dataclass(frozen=True)
class OverlapPair:
    """Two annotations with a non-empty shared interval."""

    a: str
    b: str
    shared: EventInterval


@dataclass(frozen=True)
class OverlapReport:
    pairs: tuple[OverlapPair, ...]
    skipped: int  # annotations without a resolvable event interval


def overlaps_report(doc: Document) -> OverlapReport:
    """All unordered pairs of event-ranged annotations that share time.

    Pairs merely meeting (shared boundary point only) are excluded.
    Annotations without a resolvable event interval are skipped and counted.
    Output order is deterministic: annotations sorted by (start index,
    end index, id), pairs in that iteration order.
    """
    resolved: list[tuple[int, int, str, Annotation, Timeline]] = []
    skipped = 0
    for ann in doc.annotations:
        rng = ann.range
        if not isinstance(rng, EventInterval):
            skipped += 1
            continue
        try:
            timeline = doc.timeline(rng.timeline)
            s = timeline.index_of(rng.start)
            e = timeline.index_of(rng.end)
        except UnknownIdError:
            skipped += 1
            continue
        resolved.append((s, e, ann.id, ann, timeline))

    resolved.sort(key=lambda item: (item[0], item[1], item[2]))
    pairs: list[OverlapPair] = []
    for i, (s1, e1, id1, ann1, tl1) in enumerate(resolved):
        for s2, e2, id2, ann2, tl2 in resolved[i + 1 :]:
            if tl1.id != tl2.id:
                continue
            start = max(s1, s2)
            end = min(e1, e2)
            if start < end:
                shared = EventInterval(tl1.points[start].id, tl1.points[end].id, tl1.id)
                pairs.append(OverlapPair(id1, id2, shared))
    return OverlapReport(tuple(pairs), skipped)


def sequence_implicit(doc: Document) -> Document:
    """Assign synthetic intervals to events that carry no explicit anchors.

    Unanchored events are taken in document order; each receives a fresh
    half-open interval strictly after the previous event's end, built from
    synthetic points appended to the document's timeline. Already anchored
    events are untouched, so the operation is idempotent. Synthetic points
    are flagged and only serialised on request.
    """
    if all(ann.range is not None for ann in doc.annotations):
        return doc

    if doc.timelines:
        timeline = doc.timelines[0]
    else:
        timeline = Timeline("~auto_timeline", UNIT_SYMBOLIC, (), implicit=True)

    points = list(timeline.points)
    counter = 1 + sum(1 for p in points if p.id.startswith(SYNTHETIC_PREFIX))

    def fresh_point() -> TimePoint:
        nonlocal counter
        point = TimePoint(f"{SYNTHETIC_PREFIX}{counter}", len(points), synthetic=True)
        counter += 1
        points.append(point)
        return point

    new_annotations: list[Annotation] = []
    for ann in doc.annotations:
        if ann.range is None:
            start = fresh_point()
            end = fresh_point()
            ann = replace(ann, range=EventInterval(start.id, end.id, timeline.id))
        new_annotations.append(ann)

    new_timeline = replace(timeline, points=tuple(points))
    if doc.timelines:
        timelines = (new_timeline,) + doc.timelines[1:]
    else:
        timelines = (new_timeline,)
    return replace(doc, annotations=tuple(new_annotations), timelines=timelines)
