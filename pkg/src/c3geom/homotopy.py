"""Edge paths, elementary combinatorial deformations and audited homotopy macros.

An edge path is a sequence of vertices with consecutive ones incident.  The
four elementary deformations are

* insert_backtrack:  (u)       -> (u, w, u)
* remove_backtrack:  (u, w, u) -> (u)
* expand_edge:       (u, v)    -> (u, w, v)   with {u, w, v} a flag
* contract_edge:     (u, w, v) -> (u, v)      with {u, w, v} a flag

Every macro below works on a ``Deformer``, which applies moves to a path and
records them in a ``MoveLog``; logs can be replayed, inverted, shifted to
act on a subpath and transported by automorphisms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .algebra import (
    AlgebraElement,
    Embedding,
    embed,
    hermitian,
    orthonormal_complete,
    orthonormal_frame,
    project_out,
    random_unit_pure,
    scale,
)
from .geometry import (
    LINE,
    PLANE,
    POINT,
    Automorphism,
    GeometryCase,
    GeometryError,
    Line,
    Plane,
    Point,
    Vertex,
    apply_auto,
    automorphism_between_pairs,
    coplanar,
    common_plane,
    get_case,
    gq_project,
    incident,
    is_flag,
    join_line,
    line_in_plane,
    meet_point,
    orthogonal_point_vector,
    plane_through,
    point_shadow,
    random_line_through,
    random_perp,
    random_plane,
    random_plane_through,
    random_point,
    random_point_on,
    same_vertex,
)

INSERT = "insert_backtrack"
REMOVE = "remove_backtrack"
EXPAND = "expand_edge"
CONTRACT = "contract_edge"
KINDS = (INSERT, REMOVE, EXPAND, CONTRACT)
_INVERSE = {INSERT: REMOVE, REMOVE: INSERT, EXPAND: CONTRACT, CONTRACT: EXPAND}

# tolerance for incidence and vertex equality along paths
PATH_TOL = 1e-7


class HomotopyError(ValueError):
    """Raised when a macro's precondition fails."""


class BudgetExceeded(HomotopyError):
    """Raised when a move log would exceed its budget."""


class ContractionUnavailable(HomotopyError):
    """Raised when no constructive contraction of a primitive path is known."""


# ---------------------------------------------------------------------------
# paths and moves


@dataclass(frozen=True)
class EdgePath:
    vertices: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        if not self.vertices:
            raise HomotopyError("an edge path has at least one vertex")
        for u, v in zip(self.vertices, self.vertices[1:]):
            if u.type == v.type or not incident(u, v, PATH_TOL):
                raise HomotopyError(f"consecutive vertices {u} and {v} are not incident")

    @classmethod
    def _trusted(cls, vertices) -> EdgePath:
        obj = object.__new__(cls)
        object.__setattr__(obj, "vertices", tuple(vertices))
        return obj

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def case(self) -> GeometryCase:
        return self.vertices[0].case

    def __len__(self):
        return len(self.vertices)

    def __getitem__(self, i):
        return self.vertices[i]

    def __iter__(self) -> Iterator[Vertex]:
        return iter(self.vertices)

    def same(self, other: EdgePath, tol: float = PATH_TOL) -> bool:
        return len(self) == len(other) and all(
            same_vertex(u, v, tol) for u, v in zip(self.vertices, other.vertices)
        )

    def is_point_line(self) -> bool:
        return all(v.type != PLANE for v in self.vertices)

    def types(self) -> str:
        return "".join("pLP"[v.type - 1] for v in self.vertices)

    def __repr__(self):
        return f"EdgePath({self.types()}, length={self.length})"


@dataclass(frozen=True)
class Move:
    kind: str
    position: int
    witness: Vertex

    def __post_init__(self):
        if self.kind not in KINDS:
            raise HomotopyError(f"unknown move kind {self.kind!r}")

    def inverse(self) -> Move:
        return Move(_INVERSE[self.kind], self.position, self.witness)

    def shifted(self, offset: int) -> Move:
        return Move(self.kind, self.position + offset, self.witness)

    def transported(self, g: Automorphism) -> Move:
        return Move(self.kind, self.position, apply_auto(g, self.witness))


@dataclass
class MoveLog:
    moves: list = field(default_factory=list)
    budget: int | None = None

    def __len__(self):
        return len(self.moves)

    def __iter__(self) -> Iterator[Move]:
        return iter(self.moves)

    def append(self, m: Move) -> None:
        if self.budget is not None and len(self.moves) + 1 > self.budget:
            raise BudgetExceeded(f"move log exceeds its budget of {self.budget}")
        self.moves.append(m)

    def extend(self, moves: Iterable[Move]) -> None:
        for m in moves:
            self.append(m)

    def inverse(self) -> MoveLog:
        return MoveLog([m.inverse() for m in reversed(self.moves)])

    def shifted(self, offset: int) -> MoveLog:
        return MoveLog([m.shifted(offset) for m in self.moves])

    def transported(self, g: Automorphism) -> MoveLog:
        return MoveLog([m.transported(g) for m in self.moves])

    def counts(self) -> dict:
        out = {k: 0 for k in KINDS}
        for m in self.moves:
            out[m.kind] += 1
        return out

    def dumps(self, case: GeometryCase, source: EdgePath | None = None) -> str:
        """Line-delimited JSON: a header, then one (kind, position, witness) record per move."""
        head = {"case": case.name, "moves": len(self.moves)}
        if source is not None:
            head["source"] = path_to_record(source)["vertices"]
        lines = [json.dumps(head)]
        for m in self.moves:
            rec = {"kind": m.kind, "position": m.position, "witness": vertex_to_record(m.witness)}
            lines.append(json.dumps(rec))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> tuple[GeometryCase, MoveLog, EdgePath | None]:
        rows = [r for r in text.splitlines() if r.strip()]
        if not rows:
            raise HomotopyError("empty move log")
        head = json.loads(rows[0])
        case = get_case(head["case"])
        moves = []
        for r in rows[1:]:
            rec = json.loads(r)
            moves.append(Move(rec["kind"], int(rec["position"]), vertex_from_record(case, rec["witness"])))
        if len(moves) != head.get("moves", len(moves)):
            raise HomotopyError("move count in header does not match the records")
        source = None
        if "source" in head:
            source = path_from_record({"case": case.name, "vertices": head["source"]})
        return case, cls(moves), source


_TYPE_NAMES = {POINT: "point", LINE: "line", PLANE: "plane"}


def vertex_to_record(v: Vertex) -> dict:
    if v.type == POINT:
        coords = [v.rep.coeffs.tolist()]
    elif v.type == LINE:
        coords = [v.a.coeffs.tolist(), v.b.coeffs.tolist()]
    else:
        coords = [b.coeffs.tolist() for b in v.emb.basis_images]
    return {"type": _TYPE_NAMES[v.type], "coords": coords}


def vertex_from_record(case: GeometryCase, rec: dict) -> Vertex:
    t, c = rec["type"], rec["coords"]
    if t == "point":
        return Point(case, AlgebraElement(case.A, np.array(c[0])))
    if t == "line":
        return Line(case, AlgebraElement(case.A, np.array(c[0])), AlgebraElement(case.B, np.array(c[1])))
    if t == "plane":
        imgs = tuple(AlgebraElement(case.B, np.array(x)) for x in c)
        return Plane(case, Embedding(case.A, case.B, case.k, imgs))
    raise HomotopyError(f"unknown vertex type {t!r}")


def path_to_record(p: EdgePath) -> dict:
    return {"case": p.case.name, "vertices": [vertex_to_record(v) for v in p]}


def path_from_record(rec: dict) -> EdgePath:
    case = get_case(rec["case"])
    return EdgePath(tuple(vertex_from_record(case, v) for v in rec["vertices"]))


def apply_move(p: EdgePath, m: Move, tol: float = PATH_TOL) -> EdgePath:
    v, i, w = p.vertices, m.position, m.witness
    n = len(v)
    if m.kind == INSERT:
        if not 0 <= i < n:
            raise HomotopyError("position out of range")
        if w.type == v[i].type or not incident(v[i], w, tol):
            raise HomotopyError("backtrack witness is not incident with the vertex")
        return EdgePath._trusted(v[: i + 1] + (w, v[i]) + v[i + 1 :])
    if m.kind == REMOVE:
        if not 0 <= i <= n - 3:
            raise HomotopyError("position out of range")
        if not same_vertex(v[i], v[i + 2], tol) or not same_vertex(v[i + 1], w, tol):
            raise HomotopyError("no backtrack with this witness at the position")
        return EdgePath._trusted(v[: i + 1] + v[i + 3 :])
    if m.kind == EXPAND:
        if not 0 <= i <= n - 2:
            raise HomotopyError("position out of range")
        if not is_flag((v[i], w, v[i + 1]), tol):
            raise HomotopyError("expansion witness does not form a flag with the edge")
        return EdgePath._trusted(v[: i + 1] + (w,) + v[i + 1 :])
    if not 0 <= i <= n - 3:
        raise HomotopyError("position out of range")
    if not same_vertex(v[i + 1], w, tol) or not is_flag((v[i], v[i + 1], v[i + 2]), tol):
        raise HomotopyError("contraction does not remove the middle of a flag")
    return EdgePath._trusted(v[: i + 1] + v[i + 2 :])


def replay(p: EdgePath, log: MoveLog | Iterable[Move], tol: float = PATH_TOL) -> EdgePath:
    for m in log:
        p = apply_move(p, m, tol)
    return p


class Deformer:
    """A path together with the log of the moves applied to it."""

    def __init__(
        self,
        path: EdgePath | Sequence[Vertex],
        budget: int | None = None,
        k_costs: list | None = None,
    ):
        self.path = path if isinstance(path, EdgePath) else EdgePath(tuple(path))
        self.log = MoveLog(budget=budget)
        # moves spent by each line swap (the quantity bounded by K), shared with children
        self.k_costs = [] if k_costs is None else k_costs

    def child(self, path: EdgePath | Sequence[Vertex]) -> Deformer:
        return Deformer(path, k_costs=self.k_costs)

    def do(self, kind: str, position: int, witness: Vertex) -> None:
        m = Move(kind, position, witness)
        self.path = apply_move(self.path, m)
        self.log.append(m)

    def run(self, log: Iterable[Move], offset: int = 0) -> None:
        for m in log:
            self.do(m.kind, m.position + offset, m.witness)

    def __len__(self):
        return len(self.log)


# ---------------------------------------------------------------------------
# plane residues


def residue_connect(u: Vertex, w: Vertex, pi: Plane) -> list:
    """A shortest path from u to w inside the residue of pi (length at most 3)."""
    if u.type == PLANE or w.type == PLANE:
        raise HomotopyError("residue paths join points and lines")
    if u.type == POINT and w.type == POINT:
        return [u] if u.same(w, PATH_TOL) else [u, join_line(u, w, pi), w]
    if u.type == LINE and w.type == LINE:
        return [u] if u.same(w, PATH_TOL) else [u, meet_point(u, w), w]
    if u.type == LINE:
        return list(reversed(residue_connect(w, u, pi)))
    if incident(u, w, PATH_TOL):
        return [u, w]
    z = Point.of(u.case, point_shadow(w)[0])
    return [u, join_line(u, z, pi), z, w]


def _uncollapse(d: Deformer, start: int, target: Sequence[Vertex], pi: Plane) -> None:
    """(s, pi, t) at start -> target, using len(target) - 1 moves (one if s = t)."""
    l = len(target) - 1
    if l == 0:
        d.do(REMOVE, start, pi)
        return
    for j in range(l - 1, 0, -1):
        d.do(EXPAND, start + 1, target[j])
    d.do(CONTRACT, start, pi)


def residue_replace(d: Deformer, start: int, end: int, target: Sequence[Vertex], pi: Plane) -> None:
    """Replace the subpath d.path[start:end + 1] by target, both inside the residue of pi.

    Uses k + l moves for lengths k, l (a zero length costs one move).
    """
    if end == start and len(target) == 1:
        return
    if end == start:
        d.do(INSERT, start, pi)
    else:
        d.do(EXPAND, start, pi)
        for _ in range(end - start - 1):
            d.do(CONTRACT, start + 1, d.path[start + 2])
    _uncollapse(d, start, target, pi)


def eliminate_planes(p: EdgePath) -> tuple[EdgePath, MoveLog]:
    """Replace every interior (u, pi, w) by a residue path of length at most 3."""
    if p[0].type == PLANE or p[-1].type == PLANE:
        raise HomotopyError("paths starting or ending at a plane are not handled")
    d = Deformer(p)
    i = 1
    while i < len(d.path) - 1:
        v = d.path[i]
        if v.type != PLANE:
            i += 1
            continue
        target = residue_connect(d.path[i - 1], d.path[i + 1], v)
        _uncollapse(d, i - 1, target, v)
        i = i - 1 + len(target)
    return d.path, d.log


def eliminate_budget(k: int) -> int:
    return 3 * (k // 2)


# ---------------------------------------------------------------------------
# primitive paths


@dataclass(frozen=True)
class PrimitivePath:
    x: Point
    L: Line
    y: Point
    M: Line

    def __post_init__(self):
        if self.x.same(self.y, PATH_TOL):
            raise HomotopyError("primitive paths need two different points")
        if self.L.same(self.M, PATH_TOL):
            raise HomotopyError("primitive paths need two different lines")
        for pt in (self.x, self.y):
            for ln in (self.L, self.M):
                if not incident(pt, ln, PATH_TOL):
                    raise HomotopyError("primitive path incidence fails")

    @classmethod
    def from_path(cls, p: EdgePath) -> PrimitivePath:
        if len(p) != 5 or not same_vertex(p[0], p[4], PATH_TOL) or p.types() != "pLpLp":
            raise HomotopyError("not a closed path of the form (x, L, y, M, x)")
        return cls(p[0], p[1], p[2], p[3])

    def path(self) -> EdgePath:
        return EdgePath((self.x, self.L, self.y, self.M, self.x))

    @property
    def case(self) -> GeometryCase:
        return self.x.case


def _two_phase(
    d: Deformer,
    i: int,
    Lp: Line,
    yp: Point,
    N: Line,
    Mp: Line,
    pi1: Plane,
    pi2: Plane,
) -> None:
    """(x, L, y, M, z) at i -> (x, Lp, yp, Mp, z) through (x, Lp, yp, N, y, M, z).

    The first phase runs in the residue of pi1 (containing L, Lp, N), the
    second in the residue of pi2 (containing N, M, Mp).
    """
    x, y, z = d.path[i], d.path[i + 2], d.path[i + 4]
    residue_replace(d, i, i + 2, [x, Lp, yp, N, y], pi1)
    tail = [yp] if yp.same(z, PATH_TOL) else [yp, Mp, z]
    residue_replace(d, i + 2, i + 6, tail, pi2)


def orthogonalize_primitive(pp: PrimitivePath) -> tuple[PrimitivePath, MoveLog]:
    """Homotope (x, L, y, M, x) to a primitive path whose two points are orthogonal."""
    case, k = pp.case, pp.case.k
    d = Deformer(pp.path())
    if abs(hermitian(pp.x.rep, pp.y.rep, k)) <= 1e-12:
        return pp, d.log
    pi1 = plane_through(pp.L, avoid=pp.M)
    N = gq_project(pp.y, pi1, pp.M)
    pi2 = common_plane(pp.M, N)
    u, rank = orthogonal_point_vector([N.a, pp.x.rep], k)
    if rank != 2:
        raise HomotopyError("degenerate orthogonalization")
    yp = Point.of(case, u)
    c, _ = orthogonal_point_vector([pp.x.rep, yp.rep], k)
    Lp, Mp = line_in_plane(pi1, c), line_in_plane(pi2, c)
    _two_phase(d, 0, Lp, yp, N, Mp, pi1, pi2)
    return PrimitivePath(pp.x, Lp, yp, Mp), d.log


def frame_of(pp: PrimitivePath, tol: float = 1e-9) -> tuple[AlgebraElement, AlgebraElement, AlgebraElement]:
    """(a, a', a'' = a a') for orthogonal x = <a>, y = <a'>."""
    k = pp.case.k
    a, ap = pp.x.rep, pp.y.rep
    if abs(hermitian(a, ap, k)) > tol:
        raise HomotopyError("the points of the primitive path are not orthogonal")
    return a, ap, a * ap


def second_component(L: Line, app: AlgebraElement) -> AlgebraElement:
    """b with L = [a'', b]."""
    k = L.case.k
    t = hermitian(app, L.a, k)
    if abs(abs(t) - 1.0) > 1e-8:
        raise HomotopyError("line does not have a'' as first component")
    return scale(L.b, t.conjugate(), k)


def pl_invariant(pp: PrimitivePath) -> complex:
    """(b|c) for L = [a'', b], M = [a'', c] in the frame of the orthogonal points."""
    _, _, app = frame_of(pp)
    k = pp.case.k
    return hermitian(second_component(pp.L, app), second_component(pp.M, app), k)


def _first_orthonormal(b: AlgebraElement, field) -> AlgebraElement:
    return orthonormal_complete([b], field)[1]


def pl_reduce(pp: PrimitivePath, tol: float = 1e-9) -> tuple[PrimitivePath, MoveLog]:
    """Homotope a primitive path with unimodular non-real invariant l to one with invariant Re(l)."""
    case, k = pp.case, pp.case.k
    if k.name != "C":
        raise HomotopyError("unimodular non-real invariants only exist over C")
    a, ap, app = frame_of(pp)
    l = pl_invariant(pp)
    if abs(abs(l) - 1.0) > 1e-8 or abs(l - 1) <= 1e-8 or abs(l + 1) <= 1e-8:
        raise HomotopyError("invariant must be unimodular and different from +1 and -1")
    b = second_component(pp.L, app)
    bp = _first_orthonormal(b, k)
    bpp = b * bp
    phi = embed(a, ap, bp, bpp, k)
    psi = embed(a, ap, bp, scale(bpp, l.conjugate(), k), k)
    if not phi(app).close(b, 1e-8) or not psi(app).close(scale(b, l, k), 1e-8):
        raise HomotopyError("frame embeddings do not carry a'' to b and b l")
    N = Line.of(case, a, bp)
    r = 1.0 / math.sqrt(2.0)
    dvec = (ap + app) * r
    yp = Point.of(case, (ap - app) * r)
    pi1, pi2 = Plane(case, phi), Plane(case, psi)
    Lp, Mp = line_in_plane(pi1, dvec), line_in_plane(pi2, dvec)
    d = Deformer(pp.path())
    _two_phase(d, 0, Lp, yp, N, Mp, pi1, pi2)
    return PrimitivePath(pp.x, Lp, yp, Mp), d.log


# ---------------------------------------------------------------------------
# the directed graph of fixed inner product l


def _unit_perp(vs: Sequence[AlgebraElement], field) -> AlgebraElement:
    """First unit pure element (Gram-Schmidt in basis order) orthogonal to the given ones."""
    frame = orthonormal_frame(list(vs), field)
    return orthonormal_complete(frame, field)[len(frame)]


def diam_step(b: AlgebraElement, c: AlgebraElement, l: complex, field, tol: float = 1e-9) -> AlgebraElement:
    """d with (b|d) = l = (d|c), given (b|c) = l^2 and |l| < 1."""
    l = complex(l)
    if abs(l) >= 1.0:
        raise HomotopyError("diam_step needs |l| < 1")
    if abs(hermitian(b, c, field) - l * l) > tol:
        raise HomotopyError("diam_step needs (b|c) = l^2")
    m2 = abs(l) ** 2
    rho = math.sqrt(1.0 - m2 * m2)
    bp = (c - scale(b, l * l, field)) / rho
    bpp = _unit_perp([b, bp], field)
    beta = l.conjugate() * (1.0 - m2) / rho
    gamma = math.sqrt((1.0 - m2) / (1.0 + m2))
    d = scale(b, l, field) + scale(bp, beta, field) + bpp * gamma
    return d


def diam_exponent(l: complex) -> int:
    """First power of two n with 2 |l|^(2n) <= 1."""
    n, m = 1, abs(l)
    while 2.0 * m ** (2 * n) > 1.0:
        n *= 2
    return n


def _power_chain(b, c, l, m, field):
    if m == 1:
        return [b, c]
    d = diam_step(b, c, l ** (m // 2), field, tol=1e-8)
    return _power_chain(b, d, l, m // 2, field) + _power_chain(d, c, l, m // 2, field)[1:]


def _zero_chain(b, c, l, n, field):
    lam = complex(l) ** n
    bpp = _unit_perp([b, c], field)
    s = math.sqrt(max(0.0, 1.0 - 2.0 * abs(lam) ** 2))
    d = scale(b, lam, field) + scale(c, lam.conjugate(), field) + bpp * s
    return _power_chain(b, d, l, n, field) + _power_chain(d, c, l, n, field)[1:]


def diam_connect(
    b: AlgebraElement, c: AlgebraElement, l: complex, field, tol: float = 1e-9
) -> tuple[list, int]:
    """Chain b = v0, ..., vm = c with (v_i | v_i+1) = l and m <= 4n; returns (chain, n)."""
    l = complex(l)
    if abs(l) >= 1.0:
        raise HomotopyError("diam_connect needs |l| < 1")
    if field.name == "R" and abs(l.imag) > 0:
        raise HomotopyError("l must be real over k = R")
    n = diam_exponent(l)
    bc = hermitian(b, c, field)
    same = abs(abs(bc) - 1.0) <= tol and b.close(c, 1e-9)
    if not same:
        m = 1
        while m <= 4 * n:
            if abs(bc - l ** m) <= tol:
                return _power_chain(b, c, l, m, field), n
            m *= 2
        if abs(bc) <= tol:
            return _zero_chain(b, c, l, n, field), n
    e = _unit_perp([b, c], field) if not same else _first_orthonormal(b, field)
    return _zero_chain(b, e, l, n, field) + _zero_chain(e, c, l, n, field)[1:], n


# ---------------------------------------------------------------------------
# primitive contraction


def split_loop(d: Deformer, i: int, E: Line) -> None:
    """(x, L, y, M, x) at i -> (x, L, y, E, x, E, y, M, x) with E through x and y."""
    d.do(INSERT, i + 2, E)
    d.do(INSERT, i + 3, d.path[i])


def free_reduce_loop(d: Deformer, i: int) -> None:
    """(x, L, y, M, x, M, y, L, x) -> (x) in four backtrack removals."""
    d.do(REMOVE, i + 3, d.path[i + 4])
    d.do(REMOVE, i + 2, d.path[i + 3])
    d.do(REMOVE, i + 1, d.path[i + 2])
    d.do(REMOVE, i, d.path[i + 1])


@dataclass
class Seed:
    """An explicitly contractible primitive path and its contraction log."""

    path: PrimitivePath
    log: MoveLog
    invariant: complex

    @property
    def cost(self) -> int:
        return len(self.log)


def _seed_for(case: GeometryCase) -> Seed:
    from .seeds import build_seed

    return build_seed(case)


_SEEDS: dict = {}


def seed(case: GeometryCase) -> Seed:
    if case.name not in _SEEDS:
        _SEEDS[case.name] = _seed_for(case)
    return _SEEDS[case.name]


def _transport_seed(s: Seed, pp: PrimitivePath) -> MoveLog:
    """Seed contraction carried to an orthogonal primitive path of the same invariant."""
    case, k = pp.case, pp.case.k
    a0, ap0, app0 = frame_of(s.path)
    a, ap, app = frame_of(pp)
    b0, c0 = second_component(s.path.L, app0), second_component(s.path.M, app0)
    b, c = second_component(pp.L, app), second_component(pp.M, app)
    g = automorphism_between_pairs(case, (a0, ap0), (a, ap), (b0, c0), (b, c))
    for v, w in zip(s.path.path(), pp.path()):
        if not apply_auto(g, v).same(w, 1e-7):
            raise HomotopyError("seed transport does not reach the target path")
    return s.log.transported(g)


def contract_orthogonal(d: Deformer, i: int, pp: PrimitivePath) -> int:
    """Contract the orthogonal primitive loop at i to (x); returns the chain length used."""
    case, k = pp.case, pp.case.k
    s = seed(case)
    _, _, app = frame_of(pp)
    b, c = second_component(pp.L, app), second_component(pp.M, app)
    chain, _ = diam_connect(b, c, s.invariant, k, tol=1e-9)
    lines = [Line.of(case, app, v) for v in chain]
    lines[0], lines[-1] = pp.L, pp.M
    # split from the left: (x, L0, y, Lm, x) -> loop(L0, L1) loop(L1, Lm) -> ...
    for j in range(1, len(lines) - 1):
        split_loop(d, i + 4 * (j - 1), lines[j])
    for j in range(len(lines) - 1):
        piece = PrimitivePath(pp.x, lines[j], pp.y, lines[j + 1])
        d.run(_transport_seed(s, piece), offset=i)
    return len(lines) - 1


def contract_primitive(d: Deformer, i: int) -> None:
    """Contract the primitive loop (x, L, y, M, x) sitting at position i to (x)."""
    pp = PrimitivePath(d.path[i], d.path[i + 1], d.path[i + 2], d.path[i + 3])
    q, log = orthogonalize_primitive(pp)
    d.run(log, offset=i)
    contract_orthogonal(d, i, q)


def contraction_bound(case: GeometryCase) -> int:
    """Worst-case number of moves contract_primitive uses."""
    s = seed(case)
    m = 4 * diam_exponent(s.invariant)
    return 12 + 2 * (m - 1) + m * s.cost


def k_constant(case: GeometryCase) -> int:
    """Moves needed to turn (y, M, z) into (y, N, z): the constant K."""
    return 2 + contraction_bound(case)


# ---------------------------------------------------------------------------
# homotopy control


def swap_line(d: Deformer, i: int, N: Line) -> None:
    """(y, M, z) at i -> (y, N, z) for lines M, N through y and z."""
    y, M, z = d.path[i], d.path[i + 1], d.path[i + 2]
    if M.same(N, PATH_TOL):
        return
    if y.same(z, PATH_TOL):
        d.do(REMOVE, i, M)
        d.do(INSERT, i, N)
        return
    # (y, M, z) -> (y, M, z, N, y, N, z), then contract the loop (y, M, z, N, y)
    start = len(d.log)
    d.do(INSERT, i + 2, N)
    d.do(INSERT, i + 3, y)
    contract_primitive(d, i)
    d.k_costs.append(len(d.log) - start)


def pinch(gamma: EdgePath, Lp: Line) -> tuple[EdgePath, MoveLog]:
    """(x, L, y, M, z) -> (x, Lp, y', M', z) in twelve moves, for Lp != L through x coplanar with L."""
    d = Deformer(gamma)
    pinch_at(d, 0, Lp)
    return d.path, d.log


def pinch_at(d: Deformer, i: int, Lp: Line) -> None:
    x, L, y, M, z = (d.path[i + j] for j in range(5))
    if d.path.types()[i : i + 5] != "pLpLp":
        raise HomotopyError("pinching needs a subpath (x, L, y, M, z) of points and lines")
    if L.same(Lp, PATH_TOL):
        raise HomotopyError("the new line must differ from L")
    if not incident(x, Lp, PATH_TOL) or not coplanar(L, Lp, 1e-8):
        raise HomotopyError("the new line must pass through x and be coplanar with L")
    if x.same(y, PATH_TOL):
        raise HomotopyError("pinching needs y != x")
    if coplanar(L, M, 1e-9):
        raise HomotopyError("pinching needs L and M not coplanar")
    pi = common_plane(L, Lp, tol=1e-8)
    if incident(M, pi, PATH_TOL):
        N, xi = M, pi
    else:
        N = gq_project(y, pi, M)
        xi = common_plane(N, M, tol=1e-8)
    yp = meet_point(Lp, N)
    Mp = None if yp.same(z, PATH_TOL) else join_line(yp, z, xi)
    _two_phase(d, i, Lp, yp, N, Mp, pi, xi)


def _bridge_line(x: Point, L: Line, Lp: Line) -> Line:
    """A line through x coplanar with both L and Lp (both through x)."""
    pi = plane_through(Lp, avoid=L)
    return gq_project(x, pi, L)


def align_first_line(d: Deformer, i: int, Lp: Line) -> None:
    """Make the line after position i equal to Lp with at most two pinches (24 moves)."""
    L = d.path[i + 1]
    if L.same(Lp, PATH_TOL):
        return
    if coplanar(L, Lp, 1e-9):
        pinch_at(d, i, Lp)
        return
    pinch_at(d, i, _bridge_line(d.path[i], L, Lp))
    if d.path.types()[i : i + 5] == "pLpLp":
        pinch_at(d, i, Lp)
    else:
        raise HomotopyError("degenerate pinch")


def _free_reduce(d: Deformer) -> None:
    """Remove backtracks (u, w, u) until none is left."""
    changed = True
    while changed:
        changed = False
        v = d.path.vertices
        for i in range(len(v) - 2):
            if same_vertex(v[i], v[i + 2], PATH_TOL):
                d.do(REMOVE, i, v[i + 1])
                changed = True
                break


def shorten(p: EdgePath) -> tuple[EdgePath, MoveLog]:
    """Length 2l >= 6 point-line path -> length 2l - 2 with the same endpoints."""
    d = Deformer(p)
    shorten_at(d)
    return d.path, d.log


def shorten_at(d: Deformer) -> None:
    p = d.path
    if not p.is_point_line() or p[0].type != POINT:
        raise HomotopyError("shortening needs a point-line path starting at a point")
    if p.length < 6:
        raise HomotopyError("shortening needs length at least 6")
    x0, L3, x2 = p[0], p[5], p[4]
    # a point y on L3 other than x0 and x2, and the line M joining it to x0
    y = None
    for u in point_shadow(L3) + (None,):
        if u is None:
            break
        cand = Point.of(p.case, u)
        if not cand.same(x0, 1e-6) and not cand.same(x2, 1e-6):
            y = cand
            break
    if y is None:
        u0, u1 = point_shadow(L3)
        y = Point.of(p.case, (u0 + u1).normalized())
    c, _ = orthogonal_point_vector([x0.rep, y.rep], p.case.k)
    M = Line.of(p.case, c, p.case.k.pure_basis(p.case.B)[0])
    sub = d.child(EdgePath(p.vertices[:5]))
    bring(sub, EdgePath((x0, M, y, L3, x2)))
    d.run(sub.log)
    d.do(REMOVE, 3, d.path[4])


def _merge_coplanar(d: Deformer) -> bool:
    """Replace one (u, L, y, M, w) with L, M coplanar by a path in their plane (at most 6 moves)."""
    p = d.path
    t = p.types()
    for i in range(len(p) - 4):
        if t[i : i + 5] != "pLpLp":
            continue
        L, M = p[i + 1], p[i + 3]
        if L.same(M, PATH_TOL) or not coplanar(L, M, 1e-9):
            continue
        rho = common_plane(L, M, tol=1e-8)
        residue_replace(d, i, i + 4, residue_connect(p[i], p[i + 4], rho), rho)
        return True
    return False


def _normalize(d: Deformer) -> None:
    """Free-reduce, merge coplanar neighbours and shorten to length at most 4."""
    while True:
        _free_reduce(d)
        if _merge_coplanar(d):
            continue
        if d.path.length > 4:
            shorten_at(d)
            continue
        return


def bring(d: Deformer, target: EdgePath) -> None:
    """Transform d.path into target (point-line paths with the same endpoints)."""
    if not same_vertex(d.path[0], target[0], PATH_TOL) or not same_vertex(d.path[-1], target[-1], PATH_TOL):
        raise HomotopyError("paths do not share their endpoints")
    dt = d.child(target)
    _normalize(dt)
    _normalize(d)
    _compare_short(d, dt.path)
    d.run(dt.log.inverse())


def _compare_short(d: Deformer, t: EdgePath) -> None:
    """Both paths free-reduced, lengths in {0, 2, 4}, same endpoints."""
    lc, lt = d.path.length, t.length
    if lc == 0 and lt == 0:
        return
    if lt == 0:
        contract_primitive(d, 0)
        return
    if lc == 0:
        dt = d.child(t)
        contract_primitive(dt, 0)
        d.run(dt.log.inverse())
        return
    if lc == 2 and lt == 2:
        swap_line(d, 0, t[1])
        return
    if lc == 4 and lt == 2:
        compare_4_2(d, t)
        return
    if lc == 2 and lt == 4:
        dt = d.child(t)
        compare_4_2(dt, d.path)
        d.run(dt.log.inverse())
        return
    compare_4_4(d, t)


def compare_4_2(d: Deformer, t: EdgePath) -> None:
    """(x, L, y, M, z) -> (x, N, z)."""
    N = t[1]
    align_first_line(d, 0, N)
    p = d.path
    if p.length == 2:
        swap_line(d, 0, N)
        return
    y1 = p[2]
    if y1.same(p[4], PATH_TOL):
        d.do(REMOVE, 2, p[3])
        return
    swap_line(d, 2, N)
    d.do(REMOVE, 1, d.path[2])


def compare_4_4(d: Deformer, t: EdgePath) -> None:
    """(x, L, y, M, z) -> (x, L', y', M', z)."""
    Lp, yp = t[1], t[2]
    align_first_line(d, 0, Lp)
    p = d.path
    if p.length == 2:
        dt = d.child(t)
        compare_4_2(dt, p)
        d.run(dt.log.inverse())
        return
    if p[2].same(yp, PATH_TOL):
        swap_line(d, 2, t[3])
        return
    d.do(INSERT, 1, yp)
    sub = d.child(EdgePath(d.path.vertices[2:]))
    tail = EdgePath(t.vertices[2:])
    _normalize(sub)
    _compare_short(sub, tail)
    d.run(sub.log, offset=2)


def budget_C(k: int, K: int) -> int:
    """Moves sufficient to relate two point-line paths of length at most k."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k < 2:
        return 0
    if k < 4:
        return K
    if k < 6:
        return K + 55
    return (k - 4) * (K + 56) + K + 55


def budget_D(k: int, K: int) -> int:
    """Moves sufficient to relate two edge paths of length at most k."""
    return budget_C((3 * k) // 2, K) + 4 + 6 * ((k + 2) // 2)


def _anchor_point(v: Vertex) -> Point:
    case = v.case
    if v.type == LINE:
        return Point.of(case, point_shadow(v)[0])
    return Point.of(case, case.k.pure_basis(case.A)[0])


@dataclass
class ReduceResult:
    log: MoveLog
    stages: dict
    k_costs: list = field(default_factory=list)

    @property
    def k_emp(self) -> int:
        """Largest number of moves spent on a single line swap."""
        return max(self.k_costs, default=0)


def reduce(p: EdgePath, q: EdgePath, budget: int | None = None) -> ReduceResult:
    """A move log transforming p into q (same endpoints).

    Raises BudgetExceeded when the log would exceed ``budget`` and
    ContractionUnavailable when a primitive path cannot be contracted.
    """
    if not same_vertex(p[0], q[0], PATH_TOL) or not same_vertex(p[-1], q[-1], PATH_TOL):
        raise HomotopyError("paths do not share their endpoints")
    stages = {"endpoints": 0, "planes": 0, "point_line": 0}
    if p.same(q):
        return ReduceResult(MoveLog(budget=budget), stages)
    dp, dq = Deformer(p), Deformer(q)
    # endpoint normalization: make both paths start and end at a point
    for dd in (dp, dq):
        if dd.path[0].type != POINT:
            dd.do(INSERT, 0, _anchor_point(dd.path[0]))
        if dd.path[-1].type != POINT:
            dd.do(INSERT, len(dd.path) - 1, _anchor_point(dd.path[-1]))
    stages["endpoints"] = len(dp.log) + len(dq.log)
    head = 1 if p[0].type != POINT else 0
    tail = 1 if p[-1].type != POINT else 0
    ep, elog_p = eliminate_planes(EdgePath(dp.path.vertices[head : len(dp.path) - tail]))
    eq, elog_q = eliminate_planes(EdgePath(dq.path.vertices[head : len(dq.path) - tail]))
    stages["planes"] = len(elog_p) + len(elog_q)
    core = Deformer(ep)
    bring(core, eq)
    stages["point_line"] = len(core.log)
    total = MoveLog(budget=budget)
    total.extend(dp.log)
    total.extend(elog_p.shifted(head))
    total.extend(core.log.shifted(head))
    total.extend(elog_q.inverse().shifted(head))
    total.extend(dq.log.inverse())
    return ReduceResult(total, stages, list(core.k_costs))


# ---------------------------------------------------------------------------
# random instances


def random_neighbour(v: Vertex, rng: np.random.Generator, types: Sequence[int] = (POINT, LINE, PLANE)) -> Vertex:
    """A random vertex incident with v, of a random type in ``types`` other than v's."""
    case = v.case
    t = [s for s in types if s != v.type]
    choice = t[int(rng.integers(len(t)))]
    if v.type == POINT:
        return random_line_through(v, rng) if choice == LINE else random_plane(case, rng)
    if v.type == LINE:
        return random_point_on(v, rng) if choice == POINT else random_plane_through(v, rng)
    if choice == POINT:
        return random_point(case, rng)
    return line_in_plane(v, random_unit_pure(case.k, case.A, rng))


def _flag_completion(u: Vertex, v: Vertex, rng: np.random.Generator) -> Vertex:
    """A random w with {u, w, v} a flag."""
    if {u.type, v.type} == {POINT, LINE}:
        L = u if u.type == LINE else v
        return random_plane_through(L, rng)
    if {u.type, v.type} == {POINT, PLANE}:
        x, pi = (u, v) if u.type == POINT else (v, u)
        a = random_perp([x.rep], x.case.k, rng)
        return line_in_plane(pi, a)
    L = u if u.type == LINE else v
    return random_point_on(L, rng)


def random_loop(case: GeometryCase, length: int, rng: np.random.Generator, start: Point | None = None) -> EdgePath:
    """A random closed edge path at a point, of the given even length (at least 4)."""
    if length < 4 or length % 2:
        raise ValueError("loop length must be even and at least 4")
    x = start if start is not None else random_point(case, rng)
    vs = [x]
    while len(vs) < length - 1:
        vs.append(random_neighbour(vs[-1], rng))
    # close up: the second-to-last vertex must be incident with x and with vs[-1]
    last = vs[-1]
    if last.type == POINT:
        c, _ = orthogonal_point_vector([last.rep, x.rep], case.k)
        bridge = Line.of(case, c, random_unit_pure(case.k, case.B, rng)) if not last.same(x, 1e-6) else random_plane(case, rng)
    elif last.type == LINE:
        bridge = random_plane_through(last, rng)
    else:
        bridge = line_in_plane(last, random_perp([x.rep], case.k, rng))
    vs += [bridge, x]
    return EdgePath(tuple(vs))


def random_move(p: EdgePath, rng: np.random.Generator) -> Move:
    """A random applicable elementary deformation of p."""
    options = []
    v = p.vertices
    for i in range(len(v) - 2):
        if same_vertex(v[i], v[i + 2], PATH_TOL):
            options.append((REMOVE, i))
        elif is_flag(v[i : i + 3], PATH_TOL):
            options.append((CONTRACT, i))
    kinds = [INSERT, EXPAND] + ([options[int(rng.integers(len(options)))][0]] if options else [])
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == INSERT:
        i = int(rng.integers(len(v)))
        return Move(INSERT, i, random_neighbour(v[i], rng))
    if kind == EXPAND and len(v) > 1:
        i = int(rng.integers(len(v) - 1))
        return Move(EXPAND, i, _flag_completion(v[i], v[i + 1], rng))
    if kind == EXPAND:
        return Move(INSERT, 0, random_neighbour(v[0], rng))
    cands = [o for o in options if o[0] == kind]
    _, i = cands[int(rng.integers(len(cands)))]
    return Move(kind, i, v[i + 1])
