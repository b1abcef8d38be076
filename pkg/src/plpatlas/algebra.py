"""Scalar rings, forward-mode derivatives and small linear algebra.

Certification evaluates the joint camera map over a large prime field: an
invertible Jacobian there certifies invertibility over the rationals.
Degree computation evaluates the same map over the complex numbers.  Both
paths share one generic evaluator, so scalars come in three flavours: prime
field elements, machine complex numbers, and tangent numbers (value plus a
vector of partial derivatives) over either base.
"""

from __future__ import annotations

import numpy as np

DEFAULT_PRIME = 2**31 - 1
SECOND_PRIME = 2**31 - 19

COMPLEX_PIVOT_RTOL = 1e-10     # relative pivot threshold for complex rank
COMPLEX_DIV_EPS = 1e-14        # |denominator| below this counts as degenerate


class DegenerateSample(ArithmeticError):
    """A chart division hit zero; the caller should resample."""


# ---------------------------------------------------------------------------
# scalar rings
# ---------------------------------------------------------------------------

class PrimeField:
    """Arithmetic in Z/pZ for a prime p, elements as plain ints in [0, p)."""

    def __init__(self, p: int = DEFAULT_PRIME):
        self.p = p

    def from_int(self, n: int) -> int:
        return n % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise DegenerateSample("inverse of zero")
        return pow(a, -1, self.p)

    def div(self, a, b):
        return (a * self.inv(b)) % self.p

    def is_zero(self, a) -> bool:
        return a % self.p == 0

    def random(self, rng: np.random.Generator) -> int:
        return int(rng.integers(1, self.p))

    def d_zeros(self, width: int):
        return np.zeros(width, dtype=np.int64)

    def d_mul(self, scalar, vec):
        return (scalar * vec) % self.p

    def d_add(self, u, v):
        return (u + v) % self.p

    def d_sub(self, u, v):
        return (u - v) % self.p


class ComplexField:
    """Machine-precision complex scalars."""

    def from_int(self, n: int) -> complex:
        return complex(n)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if abs(a) < COMPLEX_DIV_EPS:
            raise DegenerateSample("division by (near-)zero")
        return 1.0 / a

    def div(self, a, b):
        return a * self.inv(b)

    def is_zero(self, a) -> bool:
        return abs(a) < COMPLEX_DIV_EPS

    def random(self, rng: np.random.Generator) -> complex:
        # unit-disk samples keep the start configurations well scaled
        r = np.sqrt(rng.uniform(0.1, 1.0))
        phi = rng.uniform(0, 2 * np.pi)
        return complex(r * np.cos(phi), r * np.sin(phi))

    def d_zeros(self, width: int):
        return np.zeros(width, dtype=np.complex128)

    def d_mul(self, scalar, vec):
        return scalar * vec

    def d_add(self, u, v):
        return u + v

    def d_sub(self, u, v):
        return u - v


class Tangent:
    """First-order jet: a value and its partials w.r.t. the chart parameters.

    Arithmetic follows the product and quotient rules exactly; over a prime
    field every step is reduced mod p, so Jacobians are exact.
    """

    __slots__ = ("ring", "v", "d")

    def __init__(self, ring, v, d):
        self.ring = ring
        self.v = v
        self.d = d

    def __add__(self, other):
        r = self.ring
        return Tangent(r, r.add(self.v, other.v), r.d_add(self.d, other.d))

    def __sub__(self, other):
        r = self.ring
        return Tangent(r, r.sub(self.v, other.v), r.d_sub(self.d, other.d))

    def __mul__(self, other):
        r = self.ring
        v = r.mul(self.v, other.v)
        d = r.d_add(r.d_mul(self.v, other.d), r.d_mul(other.v, self.d))
        return Tangent(r, v, d)

    def __truediv__(self, other):
        r = self.ring
        inv = r.inv(other.v)
        q = r.mul(self.v, inv)
        d = r.d_mul(inv, r.d_sub(self.d, r.d_mul(q, other.d)))
        return Tangent(r, q, d)

    def __neg__(self):
        r = self.ring
        return Tangent(r, r.neg(self.v), r.d_mul(r.from_int(-1), self.d))


class TangentSpace:
    """Ring adapter producing Tangent scalars of a fixed seed width."""

    def __init__(self, base, width: int):
        self.base = base
        self.width = width

    def constant(self, n: int) -> Tangent:
        return Tangent(self.base, self.base.from_int(n), self.base.d_zeros(self.width))

    def variable(self, value, index: int) -> Tangent:
        d = self.base.d_zeros(self.width)
        d[index] = self.base.from_int(1)
        return Tangent(self.base, value, d)

    def lift(self, value) -> Tangent:
        return Tangent(self.base, value, self.base.d_zeros(self.width))


class ScalarSpace:
    """Ring adapter for plain (derivative-free) evaluation."""

    def __init__(self, base):
        self.base = base

    def constant(self, n: int):
        return _Wrapped(self.base, self.base.from_int(n))

    def variable(self, value, index: int):
        return _Wrapped(self.base, value)

    def lift(self, value):
        return _Wrapped(self.base, value)


class _Wrapped:
    """Plain ring element with operator syntax, mirroring Tangent."""

    __slots__ = ("ring", "v")

    def __init__(self, ring, v):
        self.ring = ring
        self.v = v

    def __add__(self, other):
        return _Wrapped(self.ring, self.ring.add(self.v, other.v))

    def __sub__(self, other):
        return _Wrapped(self.ring, self.ring.sub(self.v, other.v))

    def __mul__(self, other):
        return _Wrapped(self.ring, self.ring.mul(self.v, other.v))

    def __truediv__(self, other):
        return _Wrapped(self.ring, self.ring.div(self.v, other.v))

    def __neg__(self):
        return _Wrapped(self.ring, self.ring.neg(self.v))


# ---------------------------------------------------------------------------
# vectors, cameras, lines
# ---------------------------------------------------------------------------

def mat_vec(rows, x):
    """Multiply a matrix given as rows of scalars by a scalar vector."""
    out = []
    for row in rows:
        acc = row[0] * x[0]
        for c in range(1, len(x)):
            acc = acc + row[c] * x[c]
        out.append(acc)
    return out


def cross3(a, b):
    return [a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0]]


def dot(a, b):
    acc = a[0] * b[0]
    for i in range(1, len(a)):
        acc = acc + a[i] * b[i]
    return acc


def project_point(camera_rows, X):
    """Image of a world point: P X, kept homogeneous.

    Raises DegenerateSample when the point sits at the camera center.
    """
    y = mat_vec(camera_rows, X)
    ring = y[0].ring
    if all(ring.is_zero(c.v) for c in y):
        raise DegenerateSample("world point at camera center")
    return y


def project_line(camera_rows, span_a, span_b):
    """Image line coefficients: cross product of the projected span points."""
    ya = project_point(camera_rows, span_a)
    yb = project_point(camera_rows, span_b)
    ell = cross3(ya, yb)
    ring = ell[0].ring
    if all(ring.is_zero(c.v) for c in ell):
        raise DegenerateSample("line projects to a point (passes through center)")
    return ell


# ---------------------------------------------------------------------------
# rank
# ---------------------------------------------------------------------------

def rank_mod_p(matrix: np.ndarray, p: int) -> int:
    """Row-echelon rank of an integer matrix over Z/pZ (exact)."""
    a = np.array(matrix, dtype=np.int64) % p
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pivots = np.nonzero(a[r:, c])[0]
        if pivots.size == 0:
            continue
        pr = r + int(pivots[0])
        if pr != r:
            a[[r, pr]] = a[[pr, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r] = (a[r] * inv) % p
        below = a[r + 1:, c].copy()
        if below.size:
            a[r + 1:] = (a[r + 1:] - np.outer(below, a[r])) % p
        r += 1
    return r


def rank_complex(matrix: np.ndarray, rtol: float = COMPLEX_PIVOT_RTOL) -> int:
    """Row-echelon rank with partial pivoting; pivots below ``rtol`` relative
    to the largest entry count as zero."""
    a = np.array(matrix, dtype=np.complex128)
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        return 0
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        col = np.abs(a[r:, c])
        pr = r + int(np.argmax(col))
        if abs(a[pr, c]) <= rtol * scale:
            continue
        if pr != r:
            a[[r, pr]] = a[[pr, r]]
        a[r] = a[r] / a[r, c]
        below = a[r + 1:, c].copy()
        if below.size:
            a[r + 1:] -= np.outer(below, a[r])
        r += 1
    return r


def rank(matrix: np.ndarray, p: int | None = None) -> int:
    """Rank over F_p when ``p`` is given, else over the complex numbers."""
    if p is not None:
        return rank_mod_p(matrix, p)
    return rank_complex(matrix)
