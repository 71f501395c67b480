import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from c3geom import homotopy as hp
from c3geom import suites
from c3geom.algebra import H, KC, O, AlgebraElement, hermitian, random_unit_pure, scale
from c3geom.geometry import (
    HH,
    HO,
    OO,
    Line,
    coplanar,
    incident,
    join_line,
    line_in_plane,
    random_line_through,
    random_plane,
    random_plane_through,
    random_point,
    random_point_on,
)

e = AlgebraElement.basis


def seeded(seed):
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# moves and logs


def test_insert_expand_contract(rng):
    x = random_point(HO, rng)
    L = random_line_through(x, rng)
    p = hp.apply_move(hp.EdgePath((x,)), hp.Move(hp.INSERT, 0, L))
    assert p.same(hp.EdgePath((x, L, x)))
    pi = random_plane_through(L, rng)
    q = hp.apply_move(hp.EdgePath((x, L)), hp.Move(hp.EXPAND, 0, pi))
    assert q.types() == "pPL"
    back = hp.apply_move(q, hp.Move(hp.CONTRACT, 0, pi))
    assert back.same(hp.EdgePath((x, L)))


def test_invalid_moves_rejected(rng):
    x, y = random_point(HO, rng), random_point(HO, rng)
    L = random_line_through(x, rng)
    with pytest.raises(hp.HomotopyError):
        hp.apply_move(hp.EdgePath((x, L, x)), hp.Move(hp.INSERT, 0, y))
    with pytest.raises(hp.HomotopyError):
        hp.apply_move(hp.EdgePath((x, L, x)), hp.Move(hp.REMOVE, 0, random_line_through(x, rng)))
    with pytest.raises(hp.HomotopyError):
        hp.Move("teleport", 0, x)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["hh", "ho", "oo"]))
def test_random_moves_are_invertible(seed, name):
    rng = seeded(seed)
    case = {"hh": HH, "ho": HO, "oo": OO}[name]
    p = hp.random_loop(case, 6, rng)
    log = hp.MoveLog()
    q = p
    for _ in range(6):
        m = hp.random_move(q, rng)
        log.append(m)
        q = hp.apply_move(q, m)
    assert q[0].same(p[0]) and q[-1].same(p[-1])
    assert hp.replay(q, log.inverse()).same(p)


def test_movelog_roundtrip(rng):
    p = hp.random_loop(OO, 6, rng)
    log = hp.MoveLog()
    q = p
    for _ in range(8):
        m = hp.random_move(q, rng)
        log.append(m)
        q = hp.apply_move(q, m)
    case, back, source = hp.MoveLog.loads(log.dumps(OO, p))
    assert case is OO and len(back) == len(log) and source.same(p)
    assert [m.kind for m in back] == [m.kind for m in log]
    assert hp.replay(source, back).same(q)


def test_movelog_budget():
    log = hp.MoveLog(budget=1)
    m = hp.Move(hp.INSERT, 0, Line.of(HO, e(H, 2), e(O, 1)))
    log.append(m)
    with pytest.raises(hp.BudgetExceeded):
        log.append(m)


# ---------------------------------------------------------------------------
# planes and residues


def test_eliminate_planes_noop(rng):
    p = hp.random_loop(HO, 6, rng)
    while not p.is_point_line():
        p = hp.random_loop(HO, 6, rng)
    out, log = hp.eliminate_planes(p)
    assert out.same(p) and len(log) == 0


def test_eliminate_single_plane(case, rng):
    x, y, pi = random_point(case, rng), random_point(case, rng), random_plane(case, rng)
    out, log = hp.eliminate_planes(hp.EdgePath((x, pi, y)))
    J = join_line(x, y, pi)
    assert out.same(hp.EdgePath((x, J, y))) and len(log) <= 3


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12))
def test_eliminate_planes_budget(seed, k):
    rng = seeded(seed)
    p = suites.random_path_with_planes(HO, k, rng)
    out, log = hp.eliminate_planes(p)
    assert out.is_point_line()
    assert len(log) <= 3 * (k // 2) and out.length <= (3 * k) // 2
    assert hp.replay(p, log).same(out)


def test_residue_paths(case, rng):
    chk = suites.residue_paths_check(case, rng, 20)
    assert chk.passed, chk.counterexample


# ---------------------------------------------------------------------------
# primitive paths


def test_orthogonalize_noop(case, rng):
    pp = suites.random_primitive(case, rng, orthogonal=True)
    q, log = hp.orthogonalize_primitive(pp)
    assert q is pp and len(log) == 0


def test_orthogonalize(case, rng):
    for _ in range(10):
        pp = suites.random_primitive(case, rng)
        q, log = hp.orthogonalize_primitive(pp)
        assert len(log) <= 12
        assert abs(hermitian(q.x.rep, q.y.rep, case.k)) < 1e-9
        assert hp.replay(pp.path(), log).same(q.path())


def test_pl_invariant_examples(case, rng):
    pp = suites.random_primitive(case, rng, orthogonal=True)
    _, _, app = hp.frame_of(pp)
    b = hp.second_component(pp.L, app)
    opp = hp.PrimitivePath(pp.x, pp.L, pp.y, Line.of(case, app, -b))
    assert abs(hp.pl_invariant(opp) + 1) < 1e-12
    with pytest.raises(hp.HomotopyError):
        hp.PrimitivePath(pp.x, pp.L, pp.y, pp.L)


def test_pl_reduce_i(rng):
    pp = suites.random_unimodular_primitive(OO, rng, 1j)
    out, log = hp.pl_reduce(pp)
    assert abs(hp.pl_invariant(out)) < 1e-9
    assert hp.replay(pp.path(), log).same(out.path())


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, math.pi - 0.05), st.integers(0, 2**32 - 1))
def test_pl_reduce_real_part(theta, seed):
    l = cmath.exp(1j * theta)
    pp = suites.random_unimodular_primitive(OO, seeded(seed), l)
    out, log = hp.pl_reduce(pp)
    assert abs(hp.pl_invariant(out) - math.cos(theta)) < 1e-9
    assert len(log) <= 12
    assert hp.replay(pp.path(), log).same(out.path())


# ---------------------------------------------------------------------------
# the directed graph walk


def test_diam_step_orthogonal():
    b, c = e(O, 2), e(O, 4)
    d = hp.diam_step(b, c, 0.0, KC)
    assert abs(hermitian(b, d, KC)) < 1e-15 and abs(hermitian(d, c, KC)) < 1e-15
    assert abs(d.norm() - 1) < 1e-15


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2 * math.pi), st.integers(0, 2**32 - 1))
def test_diam_step_half(phase, seed):
    rng = seeded(seed)
    l = 0.5 * cmath.exp(1j * phase)
    b = random_unit_pure(KC, O, rng)
    w = hp._unit_perp([b], KC)
    c = scale(b, l * l, KC) + w * math.sqrt(1 - abs(l) ** 4)
    d = hp.diam_step(b, c, l, KC)
    assert abs(hermitian(b, d, KC) - l) < 1e-12
    assert abs(hermitian(d, c, KC) - l) < 1e-12
    assert abs(d.norm() - 1) < 1e-12


def test_diam_step_rejects_unimodular():
    with pytest.raises(hp.HomotopyError):
        hp.diam_step(e(O, 2), e(O, 4), 1.0, KC)
    with pytest.raises(hp.HomotopyError):
        hp.diam_connect(e(O, 2), e(O, 4), 1j, KC)


def _check_chain(chain, b, c, l, n, field):
    assert chain[0].close(b, 1e-12) and chain[-1].close(c, 1e-12)
    assert 1 <= len(chain) - 1 <= 4 * n
    for u, v in zip(chain, chain[1:]):
        assert abs(hermitian(u, v, field) - l) < 1e-9


def test_diam_connect_cases(rng):
    l = 0.6 * cmath.exp(0.3j)
    b = e(O, 2)
    w = hp._unit_perp([b], KC)
    for power in (1, 2, 4):
        lp = l ** power
        c = scale(b, lp, KC) + w * math.sqrt(1 - abs(lp) ** 2)
        chain, n = hp.diam_connect(b, c, l, KC)
        _check_chain(chain, b, c, l, n, KC)
        if power == 2:
            assert len(chain) == 3
    chain, n = hp.diam_connect(b, w, l, KC)
    _check_chain(chain, b, w, l, n, KC)
    assert len(chain) - 1 <= 2 * n
    chain, n = hp.diam_connect(b, b, l, KC)
    _check_chain(chain, b, b, l, n, KC)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_diam_connect_random(seed):
    rng = seeded(seed)
    for case in (HO, OO):
        l = suites.random_scalar_in_disc(case.k, rng)
        b, c = random_unit_pure(case.k, case.B, rng), random_unit_pure(case.k, case.B, rng)
        chain, n = hp.diam_connect(b, c, l, case.k)
        _check_chain(chain, b, c, l, n, case.k)


def test_diam_exponent():
    assert hp.diam_exponent(0) == 1
    assert hp.diam_exponent(0.5) == 1
    l = 0.9
    n = hp.diam_exponent(l)
    assert 2 * l ** (2 * n) <= 1 < 2 * l ** n


# ---------------------------------------------------------------------------
# homotopy control


def test_pinch(case, rng):
    for _ in range(10):
        gamma, Lp = suites.random_pinch_instance(case, rng)
        out, log = hp.pinch(gamma, Lp)
        assert len(log) == 12
        assert out[1].same(Lp) and out[0].same(gamma[0]) and out[-1].same(gamma[-1])
        assert hp.replay(gamma, log).same(out)


def test_pinch_needs_new_line(rng):
    gamma, _ = suites.random_pinch_instance(HO, rng)
    with pytest.raises(hp.HomotopyError):
        hp.pinch(gamma, gamma[1])


def test_budget_closed_forms():
    for K in (0, 1, 236, 10**6):
        assert hp.budget_C(0, K) == 0
        assert hp.budget_C(2, K) == K
        assert hp.budget_C(4, K) == K + 55
        for k in range(6, 65):
            assert hp.budget_C(k, K) == (k - 4) * (K + 56) + K + 55
        for k in range(65):
            assert hp.budget_D(k, K) == hp.budget_C(math.floor(3 * k / 2), K) + 4 + 6 * math.floor((k + 2) / 2)
    assert suites.budget_arithmetic_check().passed


def test_seeds():
    s = hp.seed(HO)
    assert s.cost == 54 and abs(s.invariant) < 1e-9
    end = hp.replay(s.path.path(), s.log)
    assert len(end) == 1 and end[0].same(s.path.x)
    assert hp.contraction_bound(HO) == 234 and hp.k_constant(HO) == 236
    for case in (HH, OO):
        with pytest.raises(hp.ContractionUnavailable):
            hp.seed(case)


def test_contract_primitive(rng):
    for _ in range(3):
        pp = suites.random_primitive(HO, rng)
        d = hp.Deformer(pp.path())
        hp.contract_primitive(d, 0)
        assert len(d.path) == 1 and len(d.log) <= hp.contraction_bound(HO)
        assert hp.replay(pp.path(), d.log).same(d.path)


def test_shorten_go_and_return(rng):
    x = random_point(HO, rng)
    L1 = random_line_through(x, rng)
    y = random_point_on(L1, rng)
    L2 = random_line_through(y, rng)
    z = random_point_on(L2, rng)
    L3 = random_line_through(z, rng)
    w = random_point_on(L3, rng)
    p = hp.EdgePath((x, L1, y, L2, z, L3, w))
    out, log = hp.shorten(p)
    assert out.length == 4 and out[0].same(x) and out[-1].same(w)
    assert hp.replay(p, log).same(out)
    assert len(log) <= hp.k_constant(HO) + 56


def test_reduce_identity(rng):
    p = hp.random_loop(HO, 6, rng)
    assert len(hp.reduce(p, p).log) == 0


def test_reduce_perturbed(rng):
    p = hp.random_loop(HO, 6, rng)
    q = p
    for _ in range(5):
        q = hp.apply_move(q, hp.random_move(q, rng))
    k = max(p.length, q.length)
    r = hp.reduce(p, q, budget=hp.budget_D(k, hp.k_constant(HO)))
    assert hp.replay(p, r.log).same(q)
    assert r.k_emp <= hp.k_constant(HO)


def test_reduce_unavailable_without_seed(rng):
    p = hp.random_loop(OO, 4, rng)
    q = hp.random_loop(OO, 4, rng, start=p[0])
    with pytest.raises(hp.ContractionUnavailable):
        hp.reduce(p, q)


def test_line_in_plane_incident(case, rng):
    pi = random_plane(case, rng)
    L = line_in_plane(pi, random_point(case, rng).rep)
    assert incident(L, pi) and coplanar(L, L)
