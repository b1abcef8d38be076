"""Gauge-fixed joint camera map and Jacobian-rank certification.

The reconstruction map sends cameras and a world arrangement to the m views.
Projective coordinate changes of 3-space are removed by normalizing the
first camera to [I|0] and the second to a 7-parameter shape; the remaining
cameras keep 11 parameters each.  World and image entities live in explicit
affine charts, so the map goes between parameter vectors of equal length for
balanced problems.  A single full-rank Jacobian over a large prime field
certifies minimality; rank deficiency at random points is evidence (not
proof) of non-minimality, which the criteria and elimination ledger settle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (DEFAULT_PRIME, SECOND_PRIME, DegenerateSample,
                      ComplexField, PrimeField, ScalarSpace, TangentSpace,
                      cross3, mat_vec, rank_mod_p)
from .dimension import DimensionBudget, budget, is_balanced
from .incidence import (ADJ, DEP, FREE, SPAN, PlpInstance, canonical_key,
                        instance_key, key_digest, signature_of, validate)

MAX_RESAMPLES = 50


@dataclass(frozen=True)
class ChartSpec:
    """Parameter and coordinate layout of the gauge-fixed map.

    Parameters: 7 for camera 2, then 11 per further camera, then per point
    (free: 3 affine coordinates, dependent: 1 mixing weight along its
    parents) and per line (free: two spanning points on the reference planes
    {w=0, x=1} and {z=0, y=1}; adjacent: one spanning point on {w=0, x=1};
    spanned: none).  Image coordinates per view mirror this with counts
    2/1/2/1/0.
    """

    instance: PlpInstance
    n_params: int
    out_per_view: int
    dims: DimensionBudget
    point_offsets: tuple[int, ...]
    line_offsets: tuple[int, ...]

    @property
    def m(self) -> int:
        return self.instance.m

    @property
    def n_outputs(self) -> int:
        return self.m * self.out_per_view


def build_chart(inst: PlpInstance) -> ChartSpec:
    rep = validate(inst)
    if not rep.valid:
        raise ValueError("invalid instance: " + "; ".join(rep.failures))
    if inst.m < 2:
        raise ValueError("charts need at least two views")
    sig = signature_of(inst)
    if not is_balanced(sig):
        raise ValueError(f"signature {sig} is not balanced")
    b = budget(sig)
    off = 7 + 11 * (inst.m - 2)
    p_offsets = []
    for p in inst.points:
        p_offsets.append(off)
        off += 3 if p.tag == FREE else 1
    l_offsets = []
    for l in inst.lines:
        l_offsets.append(off)
        off += {FREE: 4, ADJ: 2, SPAN: 0}[l.tag]
    assert off == b.dim_domain, (off, b.dim_domain)
    return ChartSpec(inst, off, b.dim_view, b,
                     tuple(p_offsets), tuple(l_offsets))


def _build_cameras(chart: ChartSpec, u, space):
    one = space.constant(1)
    zero = space.constant(0)
    cams = [[[one, zero, zero, zero],
             [zero, one, zero, zero],
             [zero, zero, one, zero]]]
    cams.append([[zero, zero, zero, one],
                 [u[0], u[1], u[2], u[3]],
                 [u[4], u[5], one, u[6]]])
    for k in range(chart.m - 2):
        o = 7 + 11 * k
        cams.append([[one, u[o], u[o + 1], u[o + 2]],
                     [u[o + 3], u[o + 4], u[o + 5], u[o + 6]],
                     [u[o + 7], u[o + 8], u[o + 9], u[o + 10]]])
    return cams


def _build_world(chart: ChartSpec, u, space):
    inst = chart.instance
    one = space.constant(1)
    zero = space.constant(0)
    points = []
    for i, p in enumerate(inst.points):
        o = chart.point_offsets[i]
        if p.tag == FREE:
            points.append([u[o], u[o + 1], u[o + 2], one])
        else:
            mu = u[o]
            pa, pb = points[p.a], points[p.b]
            points.append([pa[c] + mu * pb[c] for c in range(4)])
    lines = []
    for j, l in enumerate(inst.lines):
        o = chart.line_offsets[j]
        if l.tag == FREE:
            lines.append(([one, u[o], u[o + 1], zero],
                          [u[o + 2], one, zero, u[o + 3]]))
        elif l.tag == ADJ:
            lines.append((points[l.a], [one, u[o], u[o + 1], zero]))
        else:
            lines.append((points[l.a], points[l.b]))
    return points, lines


def evaluate_map(chart: ChartSpec, values, space):
    """Image chart coordinates of the configuration given by ``values``.

    Raises DegenerateSample when a chart division hits zero; callers
    resample (up to MAX_RESAMPLES times).
    """
    inst = chart.instance
    u = [space.variable(v, i) for i, v in enumerate(values)]
    cams = _build_cameras(chart, u, space)
    points, lines = _build_world(chart, u, space)

    out = []
    for view in range(chart.m):
        P = cams[view]
        imgs = []
        for X in points:
            y = mat_vec(P, X)
            if all(y[c].ring.is_zero(y[c].v) for c in range(3)):
                raise DegenerateSample("point at camera center")
            imgs.append(y)
        for i, p in enumerate(inst.points):
            y = imgs[i]
            if p.tag == FREE:
                out.append(y[0] / y[2])
                out.append(y[1] / y[2])
            else:
                # y = y_a + mu * y_b; the image mixing weight relative to the
                # slot-normalized parent images is mu * y_b[2] / y_a[2]
                mu = u[chart.point_offsets[i]]
                out.append(mu * imgs[p.b][2] / imgs[p.a][2])
        for j, l in enumerate(inst.lines):
            if l.tag == SPAN:
                continue
            sa, sb = lines[j]
            if l.tag == ADJ:
                ya = imgs[l.a]
            else:
                ya = mat_vec(P, sa)
            yb = mat_vec(P, sb)
            ell = cross3(ya, yb)
            if all(ell[c].ring.is_zero(ell[c].v) for c in range(3)):
                raise DegenerateSample("line through camera center")
            if l.tag == FREE:
                out.append(ell[0] / ell[2])
                out.append(ell[1] / ell[2])
            else:
                out.append(ell[1] / ell[0])
    assert len(out) == chart.n_outputs
    return out


def evaluate_values(chart: ChartSpec, values, base_ring):
    """Plain (derivative-free) evaluation; returns raw ring values."""
    space = ScalarSpace(base_ring)
    return [w.v for w in evaluate_map(chart, values, space)]


def jacobian(chart: ChartSpec, values, base_ring) -> np.ndarray:
    """Jacobian of the map at ``values``: rows = image coords, cols = params."""
    space = TangentSpace(base_ring, chart.n_params)
    out = evaluate_map(chart, values, space)
    return np.stack([w.d for w in out])


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------

VERDICT_MINIMAL = "Minimal"
VERDICT_NONMINIMAL = "NonMinimal"
VERDICT_UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class Certificate:
    key: str
    verdict: str
    dim: int
    rank: int | None = None
    prime: int | None = None
    seed: int | None = None
    trials: int = 0
    criterion: str | None = None
    ledger: str | None = None
    note: str = ""

    def to_json_dict(self) -> dict:
        d = {"key": self.key, "verdict": self.verdict, "dim": self.dim,
             "trials": self.trials}
        for name in ("rank", "prime", "seed", "criterion", "ledger"):
            v = getattr(self, name)
            if v is not None:
                d[name] = v
        if self.note:
            d["note"] = self.note
        return d


def derive_seed(global_seed: int, key: str, salt: int = 0) -> int:
    """Stable per-instance RNG seed: global seed xor canonical key hash."""
    return (global_seed ^ int(key, 16) ^ (salt * 0x9E3779B97F4A7C15)) % 2**63


def sample_params(chart: ChartSpec, fld, rng) -> list:
    return [fld.random(rng) for _ in range(chart.n_params)]


def certify(inst: PlpInstance, trials: int = 3,
            primes: tuple[int, ...] = (DEFAULT_PRIME, SECOND_PRIME),
            seed: int = 0) -> Certificate:
    """Evaluate the Jacobian at random prime-field points; a full-rank
    witness certifies minimality.  Rank deficiency at every sample leaves
    the verdict Undetermined (one-sided test); the second prime guards
    against unlucky characteristic.
    """
    chart = build_chart(inst)
    key = instance_key(inst)
    dim = chart.dims.dim_domain
    used = 0
    best_rank = -1
    for pi, p in enumerate(primes):
        fld = PrimeField(p)
        rng = np.random.default_rng(derive_seed(seed, key, pi))
        for t in range(trials):
            for attempt in range(MAX_RESAMPLES):
                values = sample_params(chart, fld, rng)
                try:
                    J = jacobian(chart, values, fld)
                except DegenerateSample:
                    continue
                used += 1
                r = rank_mod_p(J, p)
                best_rank = max(best_rank, r)
                if r == dim:
                    return Certificate(key, VERDICT_MINIMAL, dim, rank=r,
                                       prime=p, seed=seed, trials=used)
                break
            else:
                return Certificate(key, VERDICT_UNDETERMINED, dim,
                                   trials=used,
                                   note="persistent degenerate samples")
        # a deficient rank at every sample of the first prime already makes
        # non-minimality likely; the loop still retries with the next prime
    return Certificate(key, VERDICT_UNDETERMINED, dim, rank=best_rank,
                       seed=seed, trials=used,
                       note="rank deficient at every sampled point")


def certify_family(family, m_samples, trials: int = 3,
                   primes: tuple[int, ...] = (DEFAULT_PRIME, SECOND_PRIME),
                   seed: int = 0, variant: str | None = None) -> list[Certificate]:
    """Sampled evidence for an m-independent family: run the Jacobian check
    at each requested view count.

    Only the two 7-point arrangements with three collinear triples admit a
    proof for every m (their reconstruction is linear); for the others this
    reports per-m verdicts.  The two families whose points are seven on a
    line cannot be represented here (more than three collinear points) and
    get a stored collinearity certificate instead.
    """
    out = []
    for m in m_samples:
        inst = family_instance(family, m, variant)
        if inst is None:
            out.append(Certificate(
                key=f"family:{family.name}:m={m}", verdict=VERDICT_NONMINIMAL,
                dim=-1, note="seven or more collinear points admit no "
                             "reconstruction (cross ratios obstruct)"))
            continue
        out.append(certify(inst, trials=trials, primes=primes, seed=seed))
    return out


def family_instance(family, m: int, variant: str | None = None) -> PlpInstance | None:
    """A concrete representative of an m-independent family at view count m.

    Returns None for the families with seven collinear points, which the
    instance model deliberately rejects.
    """
    from .catalog import ArrangementTemplate
    if (family.pf, family.pd) == (4, 3):
        parents = {"chain": ((0, 1), (1, 2), (2, 3)),
                   "star": ((0, 1), (0, 2), (0, 3))}[variant or "star"]
        return ArrangementTemplate(4, parents).instance(m)
    if (family.pf, family.pd) == (3, 4):
        # three coplanar triples plus one dependent point on a new line
        tpl = ArrangementTemplate(3, ((0, 1), (0, 2), (1, 2), (3, 4)))
        return tpl.instance(m, family.lf, (0,) * family.la)
    if (family.pf, family.pd) == (2, 5):
        return None
    raise ValueError(f"unknown family {family.name!r}")
