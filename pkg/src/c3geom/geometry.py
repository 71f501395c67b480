"""The flat C3 geometry built from a pair of composition algebras A <= B over k.

Points are k-lines <u> in Pu_k(A), lines are pairs [a, b] of unit pure elements
(a in A, b in B) up to a common unit scalar, and planes are k-algebra
embeddings A -> B.  A point <u> lies on [a, b] iff (u|a) = 0, a line lies in
a plane phi iff phi(a) = b, and every point lies in every plane.

Two lines [a, b], [c, d] are coplanar iff (a|c) = (b|d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    H,
    KC,
    KR,
    O,
    AlgebraElement,
    AlgebraError,
    AlgebraTag,
    Embedding,
    GroundField,
    embed,
    extend_to_automorphism,
    from_kcoords,
    hermitian,
    is_pure,
    kcoords,
    orthogonal_complement_unit,
    orthonormal_complete,
    orthonormal_frame,
    project_out,
    random_embedding,
    random_unit_pure,
    scale,
)

POINT, LINE, PLANE = 1, 2, 3

# coordinates below this modulus are skipped when fixing the canonical scalar
CANON_EPS = 1e-6
# smallest acceptable pivot (relative) in the residue solvers
PIVOT_EPS = 1e-7


class GeometryError(ValueError):
    """Raised when a geometric precondition fails."""


@dataclass(frozen=True)
class GeometryCase:
    name: str
    k: GroundField
    A: AlgebraTag
    B: AlgebraTag

    def __post_init__(self):
        if self.k.k_dimension(self.A) != 4:
            raise GeometryError("A must be four-dimensional over k")
        if self.k.k_dimension(self.B) < 4:
            raise GeometryError("B must contain A")

    @property
    def pure_dim_A(self) -> int:
        return self.k.k_dimension(self.A) - 1

    @property
    def pure_dim_B(self) -> int:
        return self.k.k_dimension(self.B) - 1

    def __repr__(self):
        return self.name


HH = GeometryCase("hh", KR, H, H)
HO = GeometryCase("ho", KR, H, O)
OO = GeometryCase("oo", KC, O, O)
CASES = {c.name: c for c in (HH, HO, OO)}


def get_case(name: str) -> GeometryCase:
    try:
        return CASES[name]
    except KeyError:
        raise GeometryError(f"unknown geometry case {name!r}") from None


def canonical_scalar(v: AlgebraElement, field: GroundField) -> complex:
    """Unit scalar s such that v s has its first significant k-coordinate positive real."""
    for c in kcoords(v, field):
        if abs(c) > CANON_EPS:
            s = c.conjugate() / abs(c)
            return complex(s.real) if field == KR else complex(s)
    raise GeometryError("cannot canonicalize a (near) zero element")


def _unit_pure(x: AlgebraElement, field: GroundField, what: str) -> AlgebraElement:
    if not is_pure(x, field, 1e-8):
        raise GeometryError(f"{what} is not k-pure")
    n = x.norm()
    if n < 1e-12:
        raise GeometryError(f"{what} is zero")
    return x / n


@dataclass(frozen=True, eq=False)
class Point:
    case: GeometryCase
    rep: AlgebraElement

    type = POINT

    @classmethod
    def of(cls, case: GeometryCase, u: AlgebraElement) -> Point:
        if u.tag != case.A:
            raise GeometryError("point representative must lie in A")
        u = _unit_pure(u, case.k, "point representative")
        return cls(case, scale(u, canonical_scalar(u, case.k), case.k))

    def canonical(self) -> Point:
        return Point.of(self.case, self.rep)

    def same(self, other, tol: float = DEFAULT_TOL) -> bool:
        if not isinstance(other, Point) or other.case != self.case:
            return False
        return abs(abs(hermitian(self.rep, other.rep, self.case.k)) - 1.0) <= tol

    def __repr__(self):
        return f"Point{_fmt(self.rep)}"


@dataclass(frozen=True, eq=False)
class Line:
    case: GeometryCase
    a: AlgebraElement
    b: AlgebraElement

    type = LINE

    @classmethod
    def of(cls, case: GeometryCase, a: AlgebraElement, b: AlgebraElement) -> Line:
        if a.tag != case.A or b.tag != case.B:
            raise GeometryError("line components must lie in A and B")
        na, nb = a.norm(), b.norm()
        if na < 1e-12 or abs(na - nb) > 1e-8 * max(1.0, na):
            raise GeometryError("line components must have equal nonzero norm")
        a = _unit_pure(a, case.k, "first line component")
        b = _unit_pure(b, case.k, "second line component")
        s = canonical_scalar(a, case.k)
        return cls(case, scale(a, s, case.k), scale(b, s, case.k))

    def canonical(self) -> Line:
        return Line.of(self.case, self.a, self.b)

    def same(self, other, tol: float = DEFAULT_TOL) -> bool:
        if not isinstance(other, Line) or other.case != self.case:
            return False
        k = self.case.k
        s = hermitian(self.a, other.a, k)  # other.a = self.a s when the lines agree
        if abs(abs(s) - 1.0) > tol:
            return False
        return scale(self.b, s, k).close(other.b, 10 * tol)

    def __repr__(self):
        return f"Line[{_fmt(self.a)}, {_fmt(self.b)}]"


@dataclass(frozen=True, eq=False)
class Plane:
    case: GeometryCase
    emb: Embedding

    type = PLANE

    def __post_init__(self):
        e = self.emb
        if e.source != self.case.A or e.target != self.case.B or e.field != self.case.k:
            raise GeometryError("plane embedding does not match the geometry case")

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        return self.emb(x)

    def same(self, other, tol: float = DEFAULT_TOL) -> bool:
        return isinstance(other, Plane) and other.case == self.case and self.emb.close(other.emb, tol)

    def __repr__(self):
        imgs = ", ".join(_fmt(b) for b in self.emb.basis_images[1:])
        return f"Plane({imgs})"


Vertex = Union[Point, Line, Plane]


def _fmt(x: AlgebraElement) -> str:
    return "(" + " ".join(f"{c:.4g}" for c in x.coeffs) + ")"


def vtype(v: Vertex) -> int:
    return v.type


def same_vertex(u: Vertex, v: Vertex, tol: float = DEFAULT_TOL) -> bool:
    return u.type == v.type and u.same(v, tol)


def incident(u: Vertex, v: Vertex, tol: float = DEFAULT_TOL) -> bool:
    """Symmetric incidence; vertices of equal type are incident only when equal."""
    if u.case != v.case:
        raise GeometryError("vertices belong to different geometry cases")
    if u.type > v.type:
        u, v = v, u
    if u.type == v.type:
        return u.same(v, tol)
    if u.type == POINT and v.type == PLANE:
        return True
    if u.type == POINT:
        return abs(hermitian(u.rep, v.a, u.case.k)) <= tol
    return v(u.a).close(u.b, tol)


def is_flag(vertices: Sequence[Vertex], tol: float = DEFAULT_TOL) -> bool:
    types = [v.type for v in vertices]
    if len(set(types)) != len(types):
        return False
    return all(
        incident(vertices[i], vertices[j], tol)
        for i in range(len(vertices))
        for j in range(i + 1, len(vertices))
    )


@dataclass(frozen=True)
class Flag:
    """A maximal flag (point, line, plane)."""

    point: Point
    line: Line
    plane: Plane

    def __post_init__(self):
        if not is_flag((self.point, self.line, self.plane), 1e-8):
            raise GeometryError("flag elements are not pairwise incident")

    def vertices(self) -> tuple[Point, Line, Plane]:
        return (self.point, self.line, self.plane)


# ---------------------------------------------------------------------------
# coplanarity and planes


def coplanar(L: Line, M: Line, tol: float = DEFAULT_TOL) -> bool:
    k = L.case.k
    return abs(hermitian(L.a, M.a, k) - hermitian(L.b, M.b, k)) <= tol


def plane_of(case: GeometryCase, emb: Embedding) -> Plane:
    return Plane(case, emb)


def common_plane(L: Line, M: Line, tol: float = DEFAULT_TOL) -> Plane:
    """The unique plane containing two distinct coplanar lines."""
    if not coplanar(L, M, tol):
        raise GeometryError("lines are not coplanar")
    k = L.case.k
    if abs(abs(hermitian(L.a, M.a, k)) - 1.0) <= 1e-9:
        if L.same(M, 1e-7):
            raise GeometryError("equal lines lie in many planes")
        raise GeometryError("proportional first components")
    try:
        emb = embed(L.a, M.a, L.b, M.b, k, tol=max(tol, 1e-9))
    except AlgebraError as exc:
        raise GeometryError(str(exc)) from exc
    return Plane(L.case, emb)


def plane_through(L: Line, avoid: Line | None = None) -> Plane:
    """A deterministic plane containing L; if given, one not containing ``avoid``."""
    case, k = L.case, L.case.k
    cs = orthonormal_complete([L.a], k)[1:]
    ds = orthonormal_complete([L.b], k)[1:]
    for c in cs:
        for d in ds:
            pi = Plane(case, embed(L.a, c, L.b, d, k))
            if avoid is None or not incident(avoid, pi, 1e-6):
                return pi
    raise GeometryError("no suitable plane found")


def line_in_plane(pi: Plane, c: AlgebraElement) -> Line:
    return Line.of(pi.case, c, pi(c))


def _null_vector(rows: np.ndarray, field: GroundField) -> tuple[np.ndarray, int]:
    """Null vector of an r x 3 system by elimination with partial pivoting on modulus.

    Returns (vector, rank); the rank counts pivots above PIVOT_EPS relative to
    the row scale.
    """
    m = np.array(rows, dtype=complex)
    m = m / np.maximum(np.linalg.norm(m, axis=1, keepdims=True), 1e-300)
    nrows, ncols = m.shape
    pivcols: list[int] = []
    r = 0
    for col in range(ncols):
        if r == nrows:
            break
        piv = r + int(np.argmax(np.abs(m[r:, col])))
        if abs(m[piv, col]) <= PIVOT_EPS:
            continue
        m[[r, piv]] = m[[piv, r]]
        m[r] = m[r] / m[r, col]
        for i in range(nrows):
            if i != r:
                m[i] = m[i] - m[i, col] * m[r]
        pivcols.append(col)
        r += 1
    free = [c for c in range(ncols) if c not in pivcols]
    x = np.zeros(ncols, dtype=complex)
    if free:
        f = free[0]
        x[f] = 1.0
        for i, pc in enumerate(pivcols):
            x[pc] = -m[i, f]
    if field == KR:
        x = x.real.astype(complex)
    return x, len(pivcols)


def orthogonal_point_vector(
    vs: Sequence[AlgebraElement], field: GroundField
) -> tuple[AlgebraElement, int]:
    """Unit pure u with (v|u) = 0 for the given pure v's (two of them in a 3-space)."""
    tag = vs[0].tag
    basis = field.pure_basis(tag)
    rows = [[hermitian(v, f, field) for f in basis] for v in vs]
    x, rank = _null_vector(np.array(rows), field)
    u = from_kcoords(x, tag, field)
    return u.normalized(), rank


def join_line(x: Point, y: Point, pi: Plane) -> Line:
    """The unique line of pi through two distinct points."""
    if x.same(y, 1e-9):
        raise GeometryError("points coincide")
    c, rank = orthogonal_point_vector([x.rep, y.rep], x.case.k)
    if rank != 2:
        raise GeometryError("degenerate join")
    return line_in_plane(pi, c)


def meet_point(L: Line, M: Line) -> Point:
    """The unique point on two lines with independent first components."""
    u, rank = orthogonal_point_vector([L.a, M.a], L.case.k)
    if rank != 2:
        raise GeometryError("lines have the same point shadow")
    return Point.of(L.case, u)


def gq_system(p: Point, pi: Plane, L: Line) -> np.ndarray:
    """Rows of the k-linear system {(u|c) = 0, (phi(a) - b | phi(c)) = 0} in the k-basis of Pu_k(A)."""
    k = p.case.k
    v = pi(L.a) - L.b
    basis = k.pure_basis(p.case.A)
    return np.array(
        [[hermitian(p.rep, f, k) for f in basis], [hermitian(v, pi(f), k) for f in basis]]
    )


def gq_project(p: Point, pi: Plane, L: Line, tol: float = DEFAULT_TOL) -> Line:
    """The unique line through p lying in pi and coplanar with L."""
    if not incident(p, L, tol):
        raise GeometryError("p is not on L")
    if incident(L, pi, tol):
        raise GeometryError("L already lies in pi")
    k = p.case.k
    x, rank = _null_vector(gq_system(p, pi, L), k)
    if rank != 2:
        raise GeometryError("ill-conditioned residue system (phi(a) close to b)")
    c = from_kcoords(x, p.case.A, k).normalized()
    return line_in_plane(pi, c)


def point_shadow(L: Line) -> tuple[AlgebraElement, AlgebraElement]:
    """Orthonormal k-basis of a-perp, the representatives of the points on L."""
    return tuple(orthonormal_complete([L.a], L.case.k)[1:])


def polar_line(p: Point) -> tuple[AlgebraElement, AlgebraElement]:
    """Orthonormal k-basis of u-perp, the points orthogonal to p."""
    return tuple(orthonormal_complete([p.rep], p.case.k)[1:])


# ---------------------------------------------------------------------------
# automorphisms


@dataclass(frozen=True)
class Automorphism:
    """A pair (alpha in Aut_k A, beta in Aut_k B) acting on the geometry."""

    case: GeometryCase
    alpha: Embedding
    beta: Embedding

    def __post_init__(self):
        for e, tag in ((self.alpha, self.case.A), (self.beta, self.case.B)):
            if e.source != tag or e.target != tag:
                raise GeometryError("automorphism components must be square")
            if e.norm_error() > 1e-7:
                raise GeometryError("automorphism component is not invertible isometrically")

    @classmethod
    def identity(cls, case: GeometryCase) -> Automorphism:
        return cls(case, Embedding.identity(case.A, case.k), Embedding.identity(case.B, case.k))

    def inverse(self) -> Automorphism:
        return Automorphism(self.case, self.alpha.inverse(), self.beta.inverse())

    def compose(self, inner: Automorphism) -> Automorphism:
        """self after inner."""
        return Automorphism(
            self.case, self.alpha.compose(inner.alpha), self.beta.compose(inner.beta)
        )

    def __call__(self, v: Vertex) -> Vertex:
        return apply_auto(self, v)


def apply_auto(g: Automorphism, v: Vertex) -> Vertex:
    if v.case != g.case:
        raise GeometryError("vertex and automorphism belong to different cases")
    if v.type == POINT:
        return Point.of(v.case, g.alpha(v.rep))
    if v.type == LINE:
        return Line.of(v.case, g.alpha(v.a), g.beta(v.b))
    return Plane(v.case, g.beta.compose(v.emb).compose(g.alpha.inverse()))


def _g2_between(case: GeometryCase, psi1: Embedding, psi2: Embedding) -> Embedding:
    """An automorphism beta of O with beta psi1 = psi2 (psi's are real H -> O)."""
    g1 = orthogonal_complement_unit(psi1.basis_images)
    g2 = orthogonal_complement_unit(psi2.basis_images)
    b1 = extend_to_automorphism(psi1, g1)
    b2 = extend_to_automorphism(psi2, g2)
    return b2.compose(b1.inverse())


def flag_transporter(F1: Flag, F2: Flag) -> Automorphism:
    """A group element mapping the maximal flag F1 onto F2."""
    case = F1.point.case
    k = case.k
    # align the point and the line's first component inside A
    alpha = embed(F1.point.rep, F1.line.a, F2.point.rep, F2.line.a, k, tol=1e-8)
    # the B-part must satisfy beta phi1 = phi2 alpha
    target = F2.plane.emb.compose(alpha)
    if case.B == case.A:
        beta = target.compose(F1.plane.emb.inverse())
    else:
        beta = _g2_between(case, F1.plane.emb, target)
    g = Automorphism(case, alpha, beta)
    for v, w in zip(F1.vertices(), F2.vertices()):
        if not apply_auto(g, v).same(w, 1e-7):
            raise GeometryError("transporter self-check failed")
    return g


def automorphism_between_pairs(
    case: GeometryCase,
    a1: tuple[AlgebraElement, AlgebraElement],
    a2: tuple[AlgebraElement, AlgebraElement],
    b1: tuple[AlgebraElement, AlgebraElement],
    b2: tuple[AlgebraElement, AlgebraElement],
) -> Automorphism:
    """(alpha, beta) with alpha: a1 -> a2 and beta: b1 -> b2 on orthonormal pairs."""
    k = case.k
    alpha = embed(a1[0], a1[1], a2[0], a2[1], k, tol=1e-8)
    if case.B == case.A:
        beta = embed(b1[0], b1[1], b2[0], b2[1], k, tol=1e-8)
    else:
        basis = k.pure_basis(H)
        psi1 = embed(basis[0], basis[1], b1[0], b1[1], k, tol=1e-8)
        psi2 = embed(basis[0], basis[1], b2[0], b2[1], k, tol=1e-8)
        beta = _g2_between(case, psi1, psi2)
    return Automorphism(case, alpha, beta)


# ---------------------------------------------------------------------------
# random elements


def random_point(case: GeometryCase, rng: np.random.Generator) -> Point:
    return Point.of(case, random_unit_pure(case.k, case.A, rng))


def random_perp(
    vs: Sequence[AlgebraElement], field: GroundField, rng: np.random.Generator
) -> AlgebraElement:
    """Random unit pure element orthogonal to the given ones."""
    tag = vs[0].tag
    frame = orthonormal_frame(list(vs), field)
    while True:
        w = project_out(random_unit_pure(field, tag, rng), frame, field)
        w = project_out(w, frame, field)
        if w.norm() > 1e-3:
            return w.normalized()


def random_line_through(p: Point, rng: np.random.Generator) -> Line:
    case = p.case
    return Line.of(case, random_perp([p.rep], case.k, rng), random_unit_pure(case.k, case.B, rng))


def random_line(case: GeometryCase, rng: np.random.Generator) -> Line:
    return Line.of(case, random_unit_pure(case.k, case.A, rng), random_unit_pure(case.k, case.B, rng))


def random_plane(case: GeometryCase, rng: np.random.Generator) -> Plane:
    return Plane(case, random_embedding(case.A, case.B, case.k, rng))


def random_plane_through(L: Line, rng: np.random.Generator) -> Plane:
    k = L.case.k
    c = random_perp([L.a], k, rng)
    d = random_perp([L.b], k, rng)
    return Plane(L.case, embed(L.a, c, L.b, d, k))


def random_point_on(L: Line, rng: np.random.Generator) -> Point:
    return Point.of(L.case, random_perp([L.a], L.case.k, rng))


def random_flag(case: GeometryCase, rng: np.random.Generator) -> Flag:
    p = random_point(case, rng)
    pi = random_plane(case, rng)
    a = random_perp([p.rep], case.k, rng)
    return Flag(p, line_in_plane(pi, a), pi)


def collinear_witness(p: Point, L: Line) -> tuple[Point, Line]:
    """A point q on L and a line through p and q (any two points are collinear here)."""
    case, k = p.case, p.case.k
    for u in point_shadow(L):
        q = Point.of(case, u)
        if not q.same(p, 1e-6):
            break
    c, rank = orthogonal_point_vector([p.rep, q.rep], k)
    if rank < 2:
        raise GeometryError("degenerate collinearity witness")
    return q, Line.of(case, c, k.pure_basis(case.B)[0])


# ---------------------------------------------------------------------------
# residue verification


@dataclass
class ResidueReport:
    name: str
    passed: bool
    samples: int
    max_error: float
    counterexample: str | None = None


def verify_residue(
    v: Vertex, samples: int, rng: np.random.Generator, tol: float = 1e-8
) -> ResidueReport:
    """Randomized check of the rank-two residue axioms of v."""
    case, k = v.case, v.case.k
    worst, bad = 0.0, None
    if v.type == PLANE:
        name = "plane residue is a projective plane"
        for _ in range(samples):
            x, y = random_point(case, rng), random_point(case, rng)
            _, rank = orthogonal_point_vector([x.rep, y.rep], k)
            J = join_line(x, y, v)
            err = max(abs(hermitian(x.rep, J.a, k)), abs(hermitian(y.rep, J.a, k)))
            err = max(err, (v(J.a) - J.b).norm())
            L, M = line_in_plane(v, random_unit_pure(k, case.A, rng)), line_in_plane(
                v, random_unit_pure(k, case.A, rng)
            )
            _, rank2 = orthogonal_point_vector([L.a, M.a], k)
            z = meet_point(L, M)
            err = max(err, abs(hermitian(z.rep, L.a, k)), abs(hermitian(z.rep, M.a, k)))
            worst = max(worst, err)
            if rank != 2 or rank2 != 2 or err > tol:
                bad = bad or f"points {x} {y} / lines {L} {M}"
    elif v.type == LINE:
        name = "line residue is a generalized digon"
        for _ in range(samples):
            p, pi = random_point_on(v, rng), random_plane_through(v, rng)
            err = max(abs(hermitian(p.rep, v.a, k)), (pi(v.a) - v.b).norm())
            worst = max(worst, err)
            if err > tol or not incident(p, pi):
                bad = bad or f"point {p} plane {pi}"
    else:
        name = "point residue is a generalized quadrangle"
        for _ in range(samples):
            pi = random_plane(case, rng)
            L = random_line_through(v, rng)
            if incident(L, pi, 1e-6):
                continue
            rows = gq_system(v, pi, L)
            rank = int(np.linalg.matrix_rank(rows, tol=1e-8))
            try:
                N = gq_project(v, pi, L)
            except GeometryError as exc:
                bad = bad or f"{exc}: plane {pi} line {L}"
                continue
            err = max(
                abs(hermitian(v.rep, N.a, k)),
                (pi(N.a) - N.b).norm(),
                abs(hermitian(N.a, L.a, k) - hermitian(N.b, L.b, k)),
            )
            worst = max(worst, err)
            if rank != 2 or err > tol:
                bad = bad or f"rank {rank}, plane {pi} line {L}"
    return ResidueReport(name, bad is None, samples, worst, bad)
