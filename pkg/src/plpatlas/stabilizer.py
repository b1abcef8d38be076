"""Formal non-minimality certificates.

A sub-collection of points and lines of a problem is itself a problem, and
reconstructing it cannot need more data than the whole: if a problem is
minimal, every reduced subproblem must satisfy the camera-count inequality

    m * dim(C') + dim(X') >= m * dim(Y').

Each catalog row below fixes a subproblem shape (an anchor point carrying
the attached lines, some companion points, possibly a collinear triple),
its reduced camera dimension and its coordinate counts; the inequality then
bounds how many lines may be attached to the anchor.  Violations are hits:
formal proofs of non-minimality.  Nineteen problems violate no bound and
are settled by stored variable-elimination certificates (the ledger).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .algebra import DEFAULT_PRIME, PrimeField, TangentSpace, rank_mod_p
from .catalog import coplanar_closure
from .incidence import (ADJ, DEP, FREE, PlpInstance, instance_key)
from .jacobiancheck import (Certificate, VERDICT_MINIMAL, VERDICT_NONMINIMAL,
                            VERDICT_UNDETERMINED, certify)


def inequality_holds(m: int, dim_c: int, dim_x: int, dim_y: int) -> bool:
    """Camera-count inequality for a reduced subproblem."""
    if m < 2 or min(dim_c, dim_x, dim_y) < 0:
        raise ValueError("need m >= 2 and nonnegative dimensions")
    return m * dim_c + dim_x >= m * dim_y


@dataclass(frozen=True)
class CriterionRow:
    """One subproblem shape: an anchor carrying the attached lines,
    ``free_pts`` generic points in total, and ``dep_pts`` collinear-triple
    points of which ``normalized_deps`` are pinned by the normal form.
    ``normalized_lines`` attached lines are likewise pinned; each further
    one keeps 2 world coordinates.  ``stab_dim`` is the stabilizer dimension
    of the normal form; the reduced cameras complement it inside the
    11-dimensional camera space (dim_c + stab_dim == 11).
    """

    ident: str
    free_pts: int
    dep_pts: int
    normalized_deps: int
    dim_c: int
    stab_dim: int
    normalized_lines: int
    bounds: dict          # stored bounds {"3": b3, "4": b4, "5-8": b58}

    def dim_x(self, attached: int) -> int:
        return (self.dep_pts - self.normalized_deps
                + 2 * (attached - self.normalized_lines))

    def dim_y(self, attached: int) -> int:
        return 2 * self.free_pts + self.dep_pts + attached

    def derived_bound(self, m: int) -> int:
        """Largest attached-line count satisfying the inequality."""
        la = self.normalized_lines
        while inequality_holds(m, self.dim_c, self.dim_x(la + 1), self.dim_y(la + 1)):
            la += 1
        return la


@lru_cache(maxsize=1)
def criteria_rows() -> tuple[CriterionRow, ...]:
    text = resources.files("plpatlas").joinpath("data").joinpath("criteria.json").read_text()
    raw = json.loads(text)
    rows = []
    for r in raw["rows"]:
        rows.append(CriterionRow(r["id"], r["free_pts"], r["dep_pts"],
                                 r["normalized_deps"], r["dim_c"],
                                 r["stab_dim"], r["normalized_lines"],
                                 r["bounds"]))
    return tuple(rows)


def stored_bound(row: CriterionRow, m: int) -> int:
    if m == 3:
        return row.bounds["3"]
    if m == 4:
        return row.bounds["4"]
    if 5 <= m <= 8:
        return row.bounds["5-8"]
    raise ValueError(f"criteria bounds cover 3 <= m <= 8, not m={m}")


@dataclass(frozen=True)
class CriterionHit:
    criterion: str
    anchor: int | None
    entities: tuple[int, ...]
    attached: int
    bound: int

    def describe(self) -> str:
        if self.anchor is None:
            return f"criterion {self.criterion} on entities {self.entities}"
        return (f"criterion {self.criterion}: {self.attached} lines at point "
                f"{self.anchor} exceed bound {self.bound}")


# ---------------------------------------------------------------------------
# generic-position test for sub-collections of points
# ---------------------------------------------------------------------------

def _world_point_rows(inst: PlpInstance, p: int = DEFAULT_PRIME, seed: int = 7):
    """Exact Jacobian rows of each point's affine coordinates with respect
    to the arrangement parameters, at a random prime-field configuration.

    The rank of a row subset is the dimension of the corresponding
    sub-collection of points; comparing it against the unconstrained count
    tells whether the sub-collection is in generic position once supporting
    lines outside the subset are dropped.
    """
    fld = PrimeField(p)
    rng = np.random.default_rng(seed)
    n_params = sum(3 if pt.tag == FREE else 1 for pt in inst.points)
    space = TangentSpace(fld, n_params)
    rows: list[np.ndarray] = []
    off = 0
    pts = []
    for pt in inst.points:
        if pt.tag == FREE:
            vec = [space.variable(fld.random(rng), off + k) for k in range(3)]
            vec.append(space.constant(1))
            off += 3
        else:
            mu = space.variable(fld.random(rng), off)
            off += 1
            pa, pb = pts[pt.a], pts[pt.b]
            vec = [pa[c] + mu * pb[c] for c in range(4)]
        pts.append(vec)
        aff = [vec[c] / vec[3] for c in range(3)]
        rows.append(np.stack([a.d for a in aff]))
    return rows


def _subset_dim(rows, subset, p: int = DEFAULT_PRIME) -> int:
    mat = np.concatenate([rows[i] for i in subset])
    return rank_mod_p(mat, p)


# ---------------------------------------------------------------------------
# criteria scan
# ---------------------------------------------------------------------------

def scan_h1_h2(inst: PlpInstance) -> list[CriterionHit]:
    """Homography obstructions: four collinear points, or a plane spanned by
    three points containing three further ones."""
    hits = []
    for j, t in enumerate(inst.spanned_triples()):
        if len(t) >= 4:
            hits.append(CriterionHit("H1", None, tuple(t), len(t), 3))
    n = len(inst.points)
    triples = [set(t) for t in inst.spanned_triples()]
    for seed in itertools.combinations(range(n), 3):
        if any(set(seed) <= t for t in triples):
            continue
        closure = coplanar_closure(inst, seed)
        if len(closure) >= 6:
            hits.append(CriterionHit("H2", None, tuple(sorted(closure)), len(closure) - 3, 2))
            break
    return hits


def _anchor_patterns(inst: PlpInstance, rows, q: int):
    """Criterion rows applicable at anchor ``q``, by generic-position tests.

    Yields (row_id, witness entity tuple).  Patterns whose kept points carry
    constraints beyond the pattern's own (collinear companions, planes
    forced by dropped points) are skipped: for those the image of the full
    problem is not dense in the subproblem, so the inequality says nothing.
    """
    n = len(inst.points)
    others = [i for i in range(n) if i != q]
    triples = [tuple(t) for t in inst.spanned_triples() if len(t) == 3]

    best_free = 0
    free_witness: dict[int, tuple[int, ...]] = {}
    for k in range(1, min(4, n) + 1):
        found = None
        for comp in itertools.combinations(others, k - 1):
            subset = (q,) + comp
            if _subset_dim(rows, subset) == 3 * k:
                found = subset
                break
        if found is None:
            continue
        free_witness[k] = found
        best_free = k
    for k, wit in free_witness.items():
        yield (str(k), wit)

    for t in triples:
        if q in t:
            continue
        if _subset_dim(rows, (q,) + t) == 10:
            yield ("5", (q,) + t)
        for c in others:
            if c in t:
                continue
            if _subset_dim(rows, (q, c) + t) == 13:
                yield ("6", (q, c) + t)
                break
    for t1, t2 in itertools.combinations(triples, 2):
        if set(t1) & set(t2) != {q}:
            continue
        merged = tuple(sorted(set(t1) | set(t2)))
        if _subset_dim(rows, merged) == 11:
            yield ("7", merged)


def scan_criteria(inst: PlpInstance) -> list[CriterionHit]:
    """Every violated necessary condition for minimality.

    An empty list means no obstruction was found (it does not certify
    minimality).  The attached-line bounds apply for 3 <= m <= 8; at m = 2
    only the homography obstructions act, and at m >= 9 the only balanced
    class has no points, so the bounds are not applicable.
    """
    hits = scan_h1_h2(inst)
    m = inst.m
    if not (3 <= m <= 8):
        return hits
    rows_by_id = {r.ident: r for r in criteria_rows()}
    rows = _world_point_rows(inst)
    n = len(inst.points)

    for q in range(n):
        attached = inst.adjacent_line_count(q)
        if attached == 0:
            continue
        for ident, witness in _anchor_patterns(inst, rows, q):
            bound = stored_bound(rows_by_id[ident], m)
            if attached > bound:
                hits.append(CriterionHit(ident, q, witness, attached, bound))

    # five points in a plane, two of them dependent on the other three:
    # every line must touch one of the five
    triple_sets = [set(t) for t in inst.spanned_triples()]
    flagged = set()
    for seed in itertools.combinations(range(n), 3):
        if any(set(seed) <= t for t in triple_sets):
            continue
        closure = coplanar_closure(inst, seed)
        if len(closure) != 5:
            continue
        plane = frozenset(closure)
        if plane in flagged:
            continue
        flagged.add(plane)
        for j in range(len(inst.lines)):
            if not set(inst.incident_points(j)) & closure:
                hits.append(CriterionHit("8", None, tuple(sorted(closure)) + (j,),
                                         0, 0))
                break
    return hits


# ---------------------------------------------------------------------------
# elimination ledger
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LedgerEntry:
    key: str
    signature: tuple[int, int, int, int, int]
    subproblem: str
    note: str


@lru_cache(maxsize=1)
def _load_ledger() -> dict[str, LedgerEntry]:
    text = resources.files("plpatlas").joinpath("data").joinpath("ledger.json").read_text()
    raw = json.loads(text)
    out = {}
    for r in raw["entries"]:
        e = LedgerEntry(r["key"], tuple(r["signature"]), r["subproblem"], r["note"])
        out[e.key] = e
    return out


def elimination_ledger(inst: PlpInstance) -> LedgerEntry | None:
    """Stored elimination certificate for this problem, if it is one of the
    nineteen cases settled by explicit overconstrained subsystems."""
    return _load_ledger().get(instance_key(inst))


def ledger_entries() -> dict[str, LedgerEntry]:
    return dict(_load_ledger())


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def classify(inst: PlpInstance, trials: int = 3,
             primes: tuple[int, ...] | None = None,
             seed: int = 0) -> Certificate:
    """Full verdict: criteria scan, then Jacobian witness, then ledger."""
    from .algebra import SECOND_PRIME
    if primes is None:
        primes = (DEFAULT_PRIME, SECOND_PRIME)
    key = instance_key(inst)
    hits = scan_criteria(inst)
    if hits:
        hit = hits[0]
        return Certificate(key, VERDICT_NONMINIMAL, dim=-1,
                           criterion=hit.criterion, note=hit.describe())
    cert = certify(inst, trials=trials, primes=primes, seed=seed)
    if cert.verdict == VERDICT_MINIMAL:
        return cert
    entry = elimination_ledger(inst)
    if entry is not None:
        return Certificate(key, VERDICT_NONMINIMAL, dim=cert.dim,
                           ledger=entry.key, note=entry.note, trials=cert.trials)
    return cert
