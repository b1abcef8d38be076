"""Data model for point-line problems (PLPs).

A PLP describes an arrangement of world points and lines with prescribed
incidences, observed by ``m`` pinhole cameras.  Points are either free or
dependent (constrained to the line spanned by two earlier points); lines are
free (incident to no point), adjacent (incident to exactly one point) or
spanned (incident to two or more points, hence determined by them).

Instances are immutable.  Equivalence of instances is relabeling of points
and lines that preserves the incidence structure; ``canonical_key`` computes
a label that is equal exactly for equivalent instances.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field


FREE = "free"
DEP = "dep"
ADJ = "adj"
SPAN = "span"


@dataclass(frozen=True)
class Point:
    tag: str                  # "free" | "dep"
    a: int | None = None      # parent indices for dependent points
    b: int | None = None


@dataclass(frozen=True)
class Line:
    tag: str                  # "free" | "adj" | "span"
    a: int | None = None      # adj: attached point in `a`; span: both spanning points
    b: int | None = None


@dataclass(frozen=True)
class PlpInstance:
    """A concrete point-line problem for ``m`` views."""

    m: int
    points: tuple[Point, ...]
    lines: tuple[Line, ...]
    incidences: frozenset[tuple[int, int]]

    def to_json_dict(self) -> dict:
        pts = []
        for p in self.points:
            if p.tag == FREE:
                pts.append({"tag": "free"})
            else:
                pts.append({"tag": "dep", "a": p.a, "b": p.b})
        lns = []
        for l in self.lines:
            if l.tag == FREE:
                lns.append({"tag": "free"})
            elif l.tag == ADJ:
                lns.append({"tag": "adj", "p": l.a})
            else:
                lns.append({"tag": "span", "a": l.a, "b": l.b})
        return {
            "m": self.m,
            "points": pts,
            "lines": lns,
            "incidences": sorted([list(pair) for pair in self.incidences]),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))

    @staticmethod
    def from_json_dict(data: dict) -> "PlpInstance":
        pts = []
        for p in data["points"]:
            if p["tag"] == "free":
                pts.append(Point(FREE))
            elif p["tag"] == "dep":
                pts.append(Point(DEP, p["a"], p["b"]))
            else:
                raise ValueError(f"unknown point tag {p['tag']!r}")
        lns = []
        for l in data["lines"]:
            if l["tag"] == "free":
                lns.append(Line(FREE))
            elif l["tag"] == "adj":
                lns.append(Line(ADJ, l["p"]))
            elif l["tag"] == "span":
                lns.append(Line(SPAN, l["a"], l["b"]))
            else:
                raise ValueError(f"unknown line tag {l['tag']!r}")
        inc = frozenset((pair[0], pair[1]) for pair in data["incidences"])
        return PlpInstance(data["m"], tuple(pts), tuple(lns), inc)

    @staticmethod
    def from_json(text: str) -> "PlpInstance":
        return PlpInstance.from_json_dict(json.loads(text))

    # -- convenience accessors used across the package --

    def incident_points(self, line_idx: int) -> list[int]:
        return sorted(p for (p, l) in self.incidences if l == line_idx)

    def incident_lines(self, point_idx: int) -> list[int]:
        return sorted(l for (p, l) in self.incidences if p == point_idx)

    def adjacent_line_count(self, point_idx: int) -> int:
        return sum(1 for l in self.lines if l.tag == ADJ and l.a == point_idx)

    def spanned_triples(self) -> list[tuple[int, ...]]:
        """Point index tuples of spanned lines (each sorted ascending)."""
        return [tuple(self.incident_points(i))
                for i, l in enumerate(self.lines) if l.tag == SPAN]


@dataclass(frozen=True)
class PlpSignature:
    """Class label (m, pf, pd, lf, la) of a balanced family of PLPs."""

    m: int
    pf: int
    pd: int
    lf: int
    la: int

    def astuple(self) -> tuple[int, int, int, int, int]:
        return (self.m, self.pf, self.pd, self.lf, self.la)

    def __str__(self) -> str:
        return f"({self.m};{self.pf},{self.pd},{self.lf},{self.la})"

    @staticmethod
    def parse(text: str) -> "PlpSignature":
        """Parse "m,pf,pd,lf,la" as used by the CLI."""
        parts = [int(x) for x in text.replace(";", ",").split(",")]
        if len(parts) != 5:
            raise ValueError(f"expected 5 comma-separated integers, got {text!r}")
        return PlpSignature(*parts)


@dataclass
class ValidationReport:
    failures: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.failures

    def add(self, msg: str) -> None:
        self.failures.append(msg)


def validate(inst: PlpInstance) -> ValidationReport:
    """Check realizability, incidence completeness and dependency structure."""
    rep = ValidationReport()
    np_, nl = len(inst.points), len(inst.lines)

    if inst.m < 1:
        rep.add(f"view count m={inst.m} must be >= 1")

    for i, p in enumerate(inst.points):
        if p.tag == DEP:
            if p.a is None or p.b is None:
                rep.add(f"point {i}: dependent point without parents")
                continue
            if p.a == p.b:
                rep.add(f"point {i}: dependency malformed, identical parents")
            if not (0 <= p.a < i and 0 <= p.b < i):
                rep.add(f"point {i}: parents must be earlier point indices")
        elif p.tag != FREE:
            rep.add(f"point {i}: unknown tag {p.tag!r}")

    for (p, l) in inst.incidences:
        if not (0 <= p < np_ and 0 <= l < nl):
            rep.add(f"incidence ({p},{l}) out of range")
            return rep

    for j, l in enumerate(inst.lines):
        on = inst.incident_points(j)
        if l.tag == FREE:
            if on:
                rep.add(f"line {j}: tagged free but incident to {on}")
        elif l.tag == ADJ:
            if l.a is None or not (0 <= l.a < np_):
                rep.add(f"line {j}: adjacent line needs a valid attached point")
            elif on != [l.a]:
                rep.add(f"line {j}: adjacent to {l.a} but incidences say {on}")
        elif l.tag == SPAN:
            if l.a is None or l.b is None or l.a == l.b or \
                    not (0 <= l.a < np_ and 0 <= l.b < np_):
                rep.add(f"line {j}: spanned line needs two distinct points")
                continue
            if l.a not in on or l.b not in on:
                rep.add(f"line {j}: spanning points {l.a},{l.b} not incident")
            if len(on) > 3:
                rep.add(f"line {j}: {len(on)} incident points, "
                        "at most 3 collinear points are representable")
        else:
            rep.add(f"line {j}: unknown tag {l.tag!r}")

    # realizability: two distinct lines cannot share two distinct points
    for j1 in range(nl):
        on1 = set(inst.incident_points(j1))
        for j2 in range(j1 + 1, nl):
            if len(on1 & set(inst.incident_points(j2))) >= 2:
                rep.add(f"realizability: lines {j1},{j2} share two points")

    # completeness: a dependent point lies on the line spanned by its
    # parents, so any line through both parents must also pass through it
    for i, p in enumerate(inst.points):
        if p.tag != DEP or p.a is None or p.b is None:
            continue
        for j in range(nl):
            on = set(inst.incident_points(j))
            if p.a in on and p.b in on and i not in on:
                rep.add(f"completeness: point {i} (dependent on "
                        f"{p.a},{p.b}) missing from line {j}")

    return rep


def signature_of(inst: PlpInstance) -> PlpSignature:
    """Count free/dependent points and free/adjacent lines.

    Spanned lines are determined by the points and contribute to neither
    line count.
    """
    rep = validate(inst)
    if not rep.valid:
        raise ValueError("invalid instance: " + "; ".join(rep.failures))
    pf = sum(1 for p in inst.points if p.tag == FREE)
    pd = sum(1 for p in inst.points if p.tag == DEP)
    lf = sum(1 for l in inst.lines if l.tag == FREE)
    la = sum(1 for l in inst.lines if l.tag == ADJ)
    return PlpSignature(inst.m, pf, pd, lf, la)


# ---------------------------------------------------------------------------
# canonical labeling
# ---------------------------------------------------------------------------

def _point_profile(inst: PlpInstance) -> list[tuple[int, ...]]:
    """Permutation-invariant profile per point: sorted sizes of the
    incidence sets of the lines through it."""
    sizes = [len(inst.incident_points(j)) for j in range(len(inst.lines))]
    prof = []
    for i in range(len(inst.points)):
        prof.append(tuple(sorted(sizes[l] for l in inst.incident_lines(i))))
    return prof


def _structure_under(inst: PlpInstance, perm: tuple[int, ...]) -> tuple:
    """The incidence structure with points relabeled by ``perm``.

    Lines are order-free: each is reduced to its relabeled incidence set,
    and the multiset of those sets is sorted.  Which point of a supporting
    line is encoded as "dependent" is a parametrization choice, not part of
    the structure, so point tags are deliberately not included.
    """
    descs = []
    for j in range(len(inst.lines)):
        descs.append(tuple(sorted(perm[p] for p in inst.incident_points(j))))
    return (inst.m, len(inst.points), len(inst.lines), tuple(sorted(descs)))


def canonical_key(inst: PlpInstance) -> tuple:
    """Canonical label: minimal structure over all point relabelings.

    Two instances get equal labels iff one can be turned into the other by
    relabeling points and lines.  Brute-force over point permutations,
    pruned to permutations preserving the per-point incidence profile;
    instances here have at most 8 points, so this is cheap.
    """
    n = len(inst.points)
    prof = _point_profile(inst)

    # group point indices by profile; permutations only shuffle within groups
    groups: dict[tuple, list[int]] = {}
    for i, pr in enumerate(prof):
        groups.setdefault(pr, []).append(i)
    ordered_groups = [groups[k] for k in sorted(groups)]

    best = None
    slots = list(range(n))    # target labels, contiguous per profile group
    for parts in itertools.product(*(itertools.permutations(g) for g in ordered_groups)):
        images = [i for part in parts for i in part]
        perm = [0] * n
        for slot, old in zip(slots, images):
            perm[old] = slot
        cand = _structure_under(inst, tuple(perm))
        if best is None or cand < best:
            best = cand
    assert best is not None
    return best


def key_digest(key: tuple) -> str:
    """Short stable hex id of a canonical label (used in reports and data files)."""
    blob = repr(key).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def instance_key(inst: PlpInstance) -> str:
    return key_digest(canonical_key(inst))
