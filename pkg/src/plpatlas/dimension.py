"""Dimension bookkeeping and enumeration of balanced classes.

The joint camera map sends (cameras, world arrangement) modulo projective
coordinate changes to the per-view images.  A class is balanced when domain
and codomain have equal dimension; minimality requires balancedness, so the
balanced classes are the candidate search space.
"""

from __future__ import annotations

from dataclasses import dataclass

from .incidence import PlpSignature

CAMERA_DIM = 11        # projective 3x4 camera up to scale
PGL4_DIM = 15          # projective coordinate changes of 3-space


@dataclass(frozen=True)
class DimensionBudget:
    dim_world: int       # arrangement degrees of freedom
    dim_view: int        # image degrees of freedom, one view
    dim_domain: int      # (cameras x arrangement) / PGL4
    dim_codomain: int    # m views


@dataclass(frozen=True)
class FamilyDescriptor:
    """A balanced class valid for a whole range of view counts.

    ``m = 2`` admits every 7-point arrangement with arbitrarily many lines;
    four point-line count tuples stay balanced for every m.
    """

    name: str
    pf: int | None = None
    pd: int | None = None
    lf: int | None = None
    la: int | None = None
    note: str = ""

    def signature_at(self, m: int) -> PlpSignature:
        if self.pf is None:
            raise ValueError(f"family {self.name!r} does not fix point/line counts")
        return PlpSignature(m, self.pf, self.pd, self.lf, self.la)


M_INDEPENDENT_FAMILIES = (
    FamilyDescriptor("points-4f-3d", 4, 3, 0, 0),
    FamilyDescriptor("points-3f-4d-1adj", 3, 4, 0, 1),
    FamilyDescriptor("points-2f-5d-1free", 2, 5, 1, 0),
    FamilyDescriptor("points-2f-5d-2adj", 2, 5, 0, 2),
)

TWO_VIEW_FAMILY = FamilyDescriptor(
    "two-view-7-points",
    note="every arrangement of 7 points, together with any number of lines",
)


def budget(sig: PlpSignature) -> DimensionBudget:
    """Coordinate counts for a signature; requires m >= 2.

    Free points carry 3 coordinates, dependent points 1, free lines 4 and
    adjacent lines 2; in a view the counts are 2/1/2/1.  Two or more views
    pin down the full 15-dimensional group of coordinate changes.
    """
    if sig.m < 2:
        raise ValueError("budget needs m >= 2; single-view classes are "
                         "handled by single_view_balanced")
    dim_world = 3 * sig.pf + sig.pd + 4 * sig.lf + 2 * sig.la
    dim_view = 2 * sig.pf + sig.pd + 2 * sig.lf + sig.la
    dim_domain = CAMERA_DIM * sig.m + dim_world - PGL4_DIM
    return DimensionBudget(dim_world, dim_view, dim_domain, sig.m * dim_view)


def is_balanced(sig: PlpSignature) -> bool:
    """11m - 15 == (2m-3)pf + (m-1)pd + 2(m-2)lf + (m-2)la."""
    if sig.m < 2:
        raise ValueError("is_balanced needs m >= 2")
    m = sig.m
    return 11 * m - 15 == ((2 * m - 3) * sig.pf + (m - 1) * sig.pd
                           + 2 * (m - 2) * sig.lf + (m - 2) * sig.la)


def _solutions_for_m(m: int) -> list[PlpSignature]:
    """All balanced (pf, pd, lf, la) for a fixed m >= 3 with pf + pd <= 6.

    Solves the balance equation by direct scan.  A dependent point needs two
    free parents (pd >= 1 => pf >= 2) and an adjacent line needs a point to
    attach to (la >= 1 => pf >= 1; arrangements with pf >= 1 always expose a
    point).  Larger point counts only occur in the m-independent families
    and in the single 8-collinear-points class, handled by the caller.
    """
    target = 11 * m - 15
    out = []
    for pf in range(0, 7):
        for pd in range(0, 7 - pf):
            if pd >= 1 and pf < 2:
                continue
            rest = target - (2 * m - 3) * pf - (m - 1) * pd
            if rest < 0:
                continue
            for lf in range(0, rest // (2 * (m - 2)) + 1):
                rem = rest - 2 * (m - 2) * lf
                if rem % (m - 2) != 0:
                    continue
                la = rem // (m - 2)
                if la >= 1 and pf < 1:
                    continue
                out.append(PlpSignature(m, pf, pd, lf, la))
    return out


def enumerate_balanced(m_min: int, m_max: int) -> tuple[list[PlpSignature], list[FamilyDescriptor]]:
    """Balanced classes for every m in [m_min, m_max].

    Returns the finite classes, sorted lexicographically, plus family
    descriptors: the 7-point rule when m = 2 is in range, and the four
    m-independent tuples.  For 3 <= m <= 9 the finite classes consist of the
    direct solutions with at most 6 points plus the single 8-point class
    (2 free, 6 dependent) at m = 3; no balanced class exists for m >= 10.
    """
    if not (2 <= m_min <= m_max):
        raise ValueError(f"invalid range {m_min}..{m_max}")
    sigs: list[PlpSignature] = []
    families: list[FamilyDescriptor] = []
    if m_min == 2:
        families.append(TWO_VIEW_FAMILY)
    families.extend(M_INDEPENDENT_FAMILIES)
    for m in range(max(m_min, 3), min(m_max, 9) + 1):
        sigs.extend(_solutions_for_m(m))
        if m == 3:
            sigs.append(PlpSignature(3, 2, 6, 0, 0))
    sigs.sort(key=lambda s: s.astuple())
    return sigs, families


def single_view_balanced() -> list[PlpSignature]:
    """Balanced classes for one camera: pf + 2 lf + la = 4, no dependent
    points (they can be appended freely to any class with two free points).
    """
    out = []
    for pf in range(0, 5):
        for lf in range(0, 3):
            la = 4 - pf - 2 * lf
            if la < 0:
                continue
            if la >= 1 and pf < 1:
                continue
            out.append(PlpSignature(1, pf, 0, lf, la))
    out.sort(key=lambda s: s.astuple())
    return out


def signatures_to_csv(sigs: list[PlpSignature]) -> str:
    lines = ["m,pf,pd,lf,la"]
    for s in sigs:
        lines.append(f"{s.m},{s.pf},{s.pd},{s.lf},{s.la}")
    return "\n".join(lines) + "\n"
