"""The projective quadric of signature (3, 4) and the left isoclinic group acting on it.

Points of the quadric are projective 7-tuples with
Q(X) = X0^2 + X1^2 + X2^2 - X3^2 - X4^2 - X5^2 - X6^2 = 0.  A unit quaternion g
acts by left multiplication on (X3, X4, X5, X6) read as a quaternion.  For the
base point p = (1, 0, 0, 1, 0, 0, 0) one gets B(p, g p) = 1 - Re(g), so no
g != 1 maps p to a point collinear with it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import cd_mul

SIGNATURE = np.array([1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0])
BASE_POINT = np.array([1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0])
DEFAULT_DELTA = 1e-3


class CoveringError(ValueError):
    pass


def Q(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.dot(SIGNATURE * x, x))


def bilinear_B(x, y) -> float:
    """Polarization of Q: B(x, y) = (Q(x + y) - Q(x) - Q(y)) / 2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.dot(SIGNATURE * x, y))


def _canonical(x: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    n = np.linalg.norm(x)
    if n < eps:
        raise CoveringError("zero vector is not a projective point")
    x = x / n
    for c in x:
        if abs(c) > 1e-9:
            return x if c > 0 else -x
    return x


@dataclass(frozen=True, eq=False)
class QuadricPoint:
    coords: np.ndarray

    @classmethod
    def of(cls, x, tol: float = 1e-9) -> QuadricPoint:
        x = np.asarray(x, dtype=float)
        if x.shape != (7,):
            raise CoveringError("quadric points have seven coordinates")
        c = _canonical(x)
        if abs(Q(c)) > tol:
            raise CoveringError(f"point is off the quadric (Q = {Q(c):.3g})")
        c.setflags(write=False)
        return cls(c)

    def same(self, other: QuadricPoint, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.coords - other.coords)) <= tol)

    def __repr__(self):
        return "QuadricPoint(" + ", ".join(f"{c:.4g}" for c in self.coords) + ")"


@dataclass(frozen=True, eq=False)
class IsoclinicElement:
    """A unit quaternion acting by left multiplication on the last four coordinates."""

    q: np.ndarray

    @classmethod
    def of(cls, q, tol: float = 1e-9) -> IsoclinicElement:
        q = np.asarray(q, dtype=float)
        if q.shape != (4,) or abs(np.dot(q, q) - 1.0) > tol:
            raise CoveringError("isoclinic elements are unit quaternions")
        q = q.copy()
        q.setflags(write=False)
        return cls(q)

    @classmethod
    def identity(cls) -> IsoclinicElement:
        return cls.of([1.0, 0.0, 0.0, 0.0])

    @classmethod
    def random(cls, rng: np.random.Generator) -> IsoclinicElement:
        g = rng.standard_normal(4)
        return cls.of(g / np.linalg.norm(g))

    def __mul__(self, other: IsoclinicElement) -> IsoclinicElement:
        return IsoclinicElement.of(cd_mul(self.q, other.q))

    def inverse(self) -> IsoclinicElement:
        return IsoclinicElement.of(self.q * np.array([1.0, -1.0, -1.0, -1.0]))

    @property
    def real_part(self) -> float:
        return float(self.q[0])


def act_raw(g: IsoclinicElement, x) -> np.ndarray:
    """Left isoclinic action on an unnormalized 7-tuple."""
    x = np.asarray(x, dtype=float)
    out = x.copy()
    out[3:] = cd_mul(g.q, x[3:])
    return out


def h_act(g: IsoclinicElement, p: QuadricPoint) -> QuadricPoint:
    return QuadricPoint.of(act_raw(g, p.coords))


def random_quadric_point(rng: np.random.Generator) -> QuadricPoint:
    s = rng.standard_normal(3)
    t = rng.standard_normal(4)
    return QuadricPoint.of(np.concatenate([s / np.linalg.norm(s), t / np.linalg.norm(t)]))


def random_isoclinic_away_from_one(
    rng: np.random.Generator, delta: float = DEFAULT_DELTA
) -> IsoclinicElement:
    """Random unit quaternion with real part at most 1 - delta."""
    while True:
        g = IsoclinicElement.random(rng)
        if g.real_part <= 1.0 - delta:
            return g


def sphere_normalized(p: QuadricPoint) -> np.ndarray:
    """Representative (s, t) of p with |s| = |t| = 1."""
    x = p.coords
    ns = np.linalg.norm(x[:3])
    if ns < 1e-12:
        raise CoveringError("point has zero sphere part")
    return x / ns


@dataclass
class FreenessReport:
    passed: bool
    samples: int
    min_abs_B: float
    max_formula_error: float
    max_q_error: float
    counterexample: str | None = None


def free_action_check(
    samples: int, rng: np.random.Generator, delta: float = DEFAULT_DELTA
) -> FreenessReport:
    """Sample (g, p) with Re(g) <= 1 - delta and check B(p, g p) stays away from 0.

    Each p = (s, t) is moved to the base point by h = conj(t) in H (and a
    rotation of the positive block, which does not affect B).  In that frame
    the value is B(p0, g' p0) = 1 - Re(g') with g' = h g h^-1, and Re(g') =
    Re(g).  The value computed directly at p is compared against it.
    """
    min_b, max_formula, max_q = np.inf, 0.0, 0.0
    bad = None
    conj4 = np.array([1.0, -1.0, -1.0, -1.0])
    for _ in range(samples):
        g = random_isoclinic_away_from_one(rng, delta)
        p = random_quadric_point(rng)
        x = sphere_normalized(p)
        h = IsoclinicElement.of(x[3:] * conj4)
        gc = h * g * h.inverse()
        b_base = bilinear_B(BASE_POINT, act_raw(gc, BASE_POINT))
        b_direct = bilinear_B(x, act_raw(g, x))
        max_q = max(max_q, abs(Q(act_raw(g, x)) - Q(x)))
        err = max(abs(b_base - (1.0 - g.real_part)), abs(b_direct - b_base))
        max_formula = max(max_formula, err)
        min_b = min(min_b, abs(b_direct))
        if abs(b_direct) < delta / 2 or err > 1e-9:
            bad = bad or f"g={g.q.tolist()} p={p.coords.tolist()} B={b_direct}"
    return FreenessReport(bad is None, samples, float(min_b), max_formula, max_q, bad)


def stabilizer_witness(p: QuadricPoint, g: IsoclinicElement, tol: float = 1e-9) -> bool:
    """True when g fixes the projective point p."""
    y = act_raw(g, p.coords)
    return QuadricPoint.of(y).same(p, tol)
