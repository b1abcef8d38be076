"""Candidate catalog: concrete problems for every balanced class.

A balanced class (m, pf, pd, lf, la) generally contains several
non-equivalent problems: the points can form different collinearity
patterns, and the adjacent lines can be attached to different points.
This module generates exactly the admissible point arrangements, expands
each class into its attachment variants, and carries the shipped table of
known verdicts and degrees.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .incidence import (ADJ, DEP, FREE, SPAN, Line, PlpInstance, PlpSignature,
                        Point, canonical_key, key_digest, validate)


def has_four_collinear(inst: PlpInstance) -> bool:
    return any(len(t) >= 4 for t in inst.spanned_triples())


def coplanar_closure(inst: PlpInstance, seed: tuple[int, int, int]) -> set[int]:
    """Points forced into the plane spanned by three non-collinear points.

    A spanned line with two incident points in the plane lies in the plane,
    dragging its remaining point along.
    """
    plane = set(seed)
    triples = inst.spanned_triples()
    changed = True
    while changed:
        changed = False
        for t in triples:
            inside = sum(1 for p in t if p in plane)
            if inside >= 2 and inside < len(t):
                plane.update(t)
                changed = True
    return plane


def has_coplanar_overload(inst: PlpInstance) -> bool:
    """True when some plane through three of the points contains at least
    three further points (which rules out reconstruction for >= 2 views).
    """
    n = len(inst.points)
    triples = [set(t) for t in inst.spanned_triples()]
    for seed in itertools.combinations(range(n), 3):
        if any(set(seed) <= t for t in triples):
            continue          # collinear seed spans no plane
        if len(coplanar_closure(inst, seed)) >= 6:
            return True
    return False


@dataclass(frozen=True)
class ArrangementTemplate:
    """A point arrangement: free point count plus dependency parent pairs.

    Dependent point k (0-based among dependents) sits on the line spanned
    by its two parents, which are earlier points.  Every dependency brings
    an explicit spanned line, so each collinear triple is visible in the
    incidence structure.
    """

    pf: int
    parents: tuple[tuple[int, int], ...]

    @property
    def pd(self) -> int:
        return len(self.parents)

    @property
    def n_points(self) -> int:
        return self.pf + self.pd

    def instance(self, m: int, lf: int = 0,
                 attachments: tuple[int, ...] = ()) -> PlpInstance:
        """Concrete problem: this arrangement, ``lf`` free lines, and one
        adjacent line per entry of ``attachments`` (point indices)."""
        points = [Point(FREE)] * self.pf
        lines: list[Line] = []
        inc: set[tuple[int, int]] = set()
        for k, (a, b) in enumerate(self.parents):
            d = self.pf + k
            points.append(Point(DEP, a, b))
            j = len(lines)
            lines.append(Line(SPAN, a, b))
            inc.update({(a, j), (b, j), (d, j)})
        for p in attachments:
            j = len(lines)
            lines.append(Line(ADJ, p))
            inc.add((p, j))
        for _ in range(lf):
            lines.append(Line(FREE))
        return PlpInstance(m, tuple(points), tuple(lines), frozenset(inc))


@lru_cache(maxsize=None)
def point_arrangements(pf: int, pd: int) -> tuple[ArrangementTemplate, ...]:
    """All admissible arrangements of ``pf`` free and ``pd`` dependent points.

    Enumerates parent choices for the dependent points and keeps the
    arrangements that avoid four collinear points and overloaded planes,
    deduplicated up to relabeling.  For at most 7 points this reproduces the
    known small catalogs (one generic arrangement per (pf, 0); one, two or
    zero collinear patterns otherwise).
    """
    if pd == 0:
        return (ArrangementTemplate(pf, ()),)
    if pf < 2:
        return ()
    out: list[ArrangementTemplate] = []
    seen: set[tuple] = set()
    choices = []
    for k in range(pd):
        idx = pf + k
        choices.append(list(itertools.combinations(range(idx), 2)))
    for parents in itertools.product(*choices):
        tpl = ArrangementTemplate(pf, tuple(parents))
        inst = tpl.instance(m=2)
        # parents already on a common spanned line would force a fourth
        # collinear point
        rep = validate(inst)
        if not rep.valid:
            continue
        if has_four_collinear(inst) or has_coplanar_overload(inst):
            continue
        key = canonical_key(inst)
        if key in seen:
            continue
        seen.add(key)
        out.append(tpl)
    out.sort(key=lambda t: canonical_key(t.instance(m=2)))
    return tuple(out)


def expand_candidates(sig: PlpSignature) -> list[PlpInstance]:
    """All non-equivalent problems in a balanced class.

    Every admissible point arrangement is combined with every attachment of
    the adjacent lines to points, up to relabeling.  Free lines carry no
    choice.  Results are deterministic: sorted by canonical label.
    """
    keyed: dict[tuple, PlpInstance] = {}
    for tpl in point_arrangements(sig.pf, sig.pd):
        n = tpl.n_points
        if sig.la > 0 and n == 0:
            continue
        for attach in itertools.combinations_with_replacement(range(n), sig.la):
            inst = tpl.instance(sig.m, sig.lf, attach)
            key = canonical_key(inst)
            if key not in keyed:
                keyed[key] = inst
    return [keyed[k] for k in sorted(keyed)]


def all_candidates(m_min: int = 3, m_max: int = 9) -> list[tuple[PlpSignature, PlpInstance]]:
    """Expansion of every finite balanced class in the given view range."""
    from .dimension import enumerate_balanced
    sigs, _ = enumerate_balanced(m_min, m_max)
    out = []
    for sig in sigs:
        for inst in expand_candidates(sig):
            out.append((sig, inst))
    return out


# ---------------------------------------------------------------------------
# shipped expected records
# ---------------------------------------------------------------------------

VERDICT_MINIMAL = "minimal"
VERDICT_CRITERIA = "nonminimal-criteria"
VERDICT_LEDGER = "nonminimal-elimination"


@dataclass(frozen=True)
class ExpectedRecord:
    key: str                      # canonical key digest
    signature: tuple[int, int, int, int, int]
    verdict: str
    degree: int | None = None     # only for minimal records
    detail: str = ""

    def __post_init__(self):
        if self.degree is not None and self.verdict != VERDICT_MINIMAL:
            raise ValueError("degree is only meaningful for minimal records")


@lru_cache(maxsize=1)
def _load_expected() -> dict[str, ExpectedRecord]:
    text = resources.files("plpatlas").joinpath("data").joinpath("expected_records.json").read_text()
    raw = json.loads(text)
    out = {}
    for r in raw["records"]:
        rec = ExpectedRecord(r["key"], tuple(r["signature"]), r["verdict"],
                             r.get("degree"), r.get("detail", ""))
        out[rec.key] = rec
    return out


def expected_record(inst: PlpInstance) -> ExpectedRecord | None:
    """Shipped verdict/degree for this problem, if its canonical key is known."""
    return _load_expected().get(key_digest(canonical_key(inst)))


def expected_records() -> dict[str, ExpectedRecord]:
    return dict(_load_expected())
