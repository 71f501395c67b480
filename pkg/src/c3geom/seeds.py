"""Explicit contractions of one primitive path per geometry case.

A y-move replaces (x, L, y, M, x) by (x, L', y', M', x) through a line N of
y coplanar with L and M (twelve moves, see ``homotopy._two_phase``).  For
case ho the four y-moves below, found by a numerical search and stored as raw
parameters, carry the loop with lines [l, b], [l, c] back to the same x, y
and L but with M replaced by [l, c'], where (c|c') = 0.  The primitive path
(x, [l, c], y, [l, c'], x) is then contractible: split it through L and undo
the y-moves on the second half.

No such chain is known for the other cases (see ``build_seed``).
"""

from __future__ import annotations

import math

import numpy as np

from .algebra import H, O, KR, AlgebraElement, embed, hermitian
from .geometry import GeometryCase, Line, Plane, Point, line_in_plane

# per y-move: 3 coordinates for n, 7 for the free part of f, 3 for y'
HO_CHAIN = (
    (-2.925348696116088, 0.6197855713792799, -2.2453527028383586, -1.0308641403012424,
     0.039522890578423966, -0.7925859665053578, 0.8085636241294417, -0.1320990928391565,
     1.8736652843947328, -0.08254519592233714, -1.0429461490471326, 0.7932415909219203,
     -2.963710348262585),
    (3.798921426444808, -0.7066009870221093, 1.8886084196712327, -0.2217809720416552,
     0.6136782846631084, -1.072840265336374, 1.9599113639185939, 0.9694841539493192,
     -1.0414320459848005, 0.35388857984287997, 1.5431347650514828, -1.4813912429729028,
     -0.5738828041120477),
    (3.479535266663538, -1.816355211478428, -0.587729305275389, -0.13737404646435533,
     0.26630096024670874, 0.6613434852098617, 0.351675547924944, 1.7755651428247958,
     0.6332668092765888, -0.7254898011163708, 3.569524771642653, -2.6531854570376705,
     3.6502496952758308),
    (-1.0419869378189335, -0.3030940844652294, -0.2138652576160686, -0.6103656021587353,
     -0.8335402857107065, 0.33994148154691534, -0.8048214658416067, 1.4501548058319365,
     -0.33099060512775336, 0.28443173388208737, 1.692709845374171, -0.8541499882863667,
     0.786947294178678),
)


def _pure(tag, raw) -> AlgebraElement:
    return AlgebraElement(tag, np.concatenate([[0.0], np.asarray(raw, dtype=float)]))


def _perp_unit(v: AlgebraElement, frame) -> AlgebraElement:
    for u in frame:
        v = v - u * float(np.dot(u.coeffs, v.coeffs))
    return v.normalized()


def _y_move_data(state, raw):
    """Vertices of one real y-move from the state (u, v, l, b1, b2)."""
    u, v, l, b1, b2 = state
    n = _perp_unit(_pure(H, raw[0:3]), [v])
    g = hermitian(l, n, KR).real
    r12 = hermitian(b1, b2, KR).real
    # f0 in span(b1, b2) with (b1|f0) = (b2|f0) = g
    s = g / (1.0 + r12)
    f0 = (b1 + b2) * s
    rest = 1.0 - f0.norm2()
    if rest < 0:
        raise ValueError("y-move parameters leave the admissible region")
    b2o = _perp_unit(b2, [b1])
    f1 = _perp_unit(_pure(O, raw[3:10]), [b1, b2o])
    f = f0 + f1 * math.sqrt(rest)
    p1, p2 = embed(l, n, b1, f, KR, tol=1e-8), embed(l, n, b2, f, KR, tol=1e-8)
    u2 = _perp_unit(_pure(H, raw[10:13]), [n])
    prod = (u * u2).coeffs.copy()
    prod[0] = 0.0
    c = AlgebraElement(H, prod).normalized()
    return (u, u2, c, p1(c), p2(c)), (n, f, p1, p2, u2, c)


def build_seed(case: GeometryCase):
    from .homotopy import (
        ContractionUnavailable,
        Deformer,
        EdgePath,
        INSERT,
        MoveLog,
        PrimitivePath,
        Seed,
        _two_phase,
        free_reduce_loop,
        pl_invariant,
    )

    if case.name == "hh":
        raise ContractionUnavailable(
            "case hh is covered by a building and is not simply connected; "
            "primitive paths are not contractible in general"
        )
    if case.name != "ho":
        raise ContractionUnavailable(
            f"no constructive contraction of primitive paths is known for case {case.name}"
        )
    e = lambda tag, i: AlgebraElement.basis(tag, i)
    state = (e(H, 1), e(H, 2), e(H, 3), e(O, 1), e(O, 2))
    x, y = Point.of(case, state[0]), Point.of(case, state[1])
    L0, M0 = Line.of(case, state[2], state[3]), Line.of(case, state[2], state[4])
    chain = Deformer(EdgePath((x, L0, y, M0, x)))
    for raw in HO_CHAIN:
        state, (n, f, p1, p2, u2, c) = _y_move_data(state, raw)
        pi1, pi2 = Plane(case, p1), Plane(case, p2)
        _two_phase(
            chain, 0, line_in_plane(pi1, c), Point.of(case, u2), Line.of(case, n, f),
            line_in_plane(pi2, c), pi1, pi2,
        )
    end = chain.path
    if not (end[1].same(L0, 1e-9) and end[2].same(y, 1e-9)):
        raise ContractionUnavailable("stored y-move chain does not close up")
    Mp = end[3]
    seed_path = PrimitivePath(x, M0, y, Mp)
    d = Deformer(seed_path.path())
    d.do(INSERT, 2, L0)
    d.do(INSERT, 3, x)
    d.run(chain.log.inverse(), offset=4)
    free_reduce_loop(d, 0)
    if len(d.path) != 1:
        raise ContractionUnavailable("seed contraction did not end at a point")
    log = MoveLog(list(d.log.moves))
    return Seed(seed_path, log, pl_invariant(seed_path))
