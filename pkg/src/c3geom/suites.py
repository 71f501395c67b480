"""Randomized verification suites behind the command line harness.

Every check returns a ``Check`` record.  A check that raises is recorded as
failed with the exception text as counterexample, so one broken construction
does not hide the others.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import covering as cov
from .algebra import (
    C,
    H,
    KC,
    KR,
    O,
    R,
    TAGS,
    AlgebraElement,
    AlgebraError,
    cd_conj,
    cd_mul,
    embed,
    hermitian,
    hermitian_batch,
    k_decompose,
    random_element,
    random_orthonormal_pair,
    random_unit_pure,
    random_unit_scalar,
    scale,
)
from .geometry import (
    LINE,
    PLANE,
    POINT,
    GeometryCase,
    GeometryError,
    Line,
    Plane,
    Point,
    apply_auto,
    automorphism_between_pairs,
    collinear_witness,
    common_plane,
    coplanar,
    flag_transporter,
    gq_project,
    gq_system,
    incident,
    line_in_plane,
    orthogonal_point_vector,
    random_flag,
    random_line,
    random_line_through,
    random_perp,
    random_plane,
    random_plane_through,
    random_point,
    random_point_on,
    verify_residue,
    _null_vector,
)
from . import homotopy as hp


@dataclass
class Check:
    name: str
    passed: bool
    samples: int
    max_error: float
    counterexample: str | None = None


@dataclass
class SuiteResult:
    checks: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    # name -> (source path record, MoveLog) for side files
    logs: dict = field(default_factory=dict)


def sub_rng(seed: int, label: str) -> np.random.Generator:
    """Generator for one suite, derived from the global seed and a fixed label."""
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(label.encode())])


def _guard(name: str, samples: int, fn: Callable[[], Check]) -> Check:
    try:
        return fn()
    except (AlgebraError, GeometryError, hp.HomotopyError, cov.CoveringError, ValueError) as exc:
        return Check(name, False, samples, math.inf, f"{type(exc).__name__}: {exc}")


# ---------------------------------------------------------------------------
# algebra


def composition_law(tag, rng, n: int, tol: float = 1e-9) -> Check:
    x = rng.standard_normal((n, tag.real_dimension))
    y = rng.standard_normal((n, tag.real_dimension))
    nx, ny = np.sum(x * x, axis=1), np.sum(y * y, axis=1)
    nxy = np.sum(cd_mul(x, y) ** 2, axis=1)
    err = np.abs(nxy - nx * ny) / (1.0 + nx * ny)
    worst = int(np.argmax(err))
    bad = None if err[worst] <= tol else f"x={x[worst].tolist()} y={y[worst].tolist()}"
    return Check(f"composition_law[{tag.name}]", bad is None, n, float(err[worst]), bad)


def conj_reverses_products(tag, rng, n: int, tol: float = 1e-9) -> Check:
    x = rng.standard_normal((n, tag.real_dimension))
    y = rng.standard_normal((n, tag.real_dimension))
    err = np.max(np.abs(cd_conj(cd_mul(x, y)) - cd_mul(cd_conj(y), cd_conj(x))), axis=1)
    worst = int(np.argmax(err))
    bad = None if err[worst] <= tol else f"x={x[worst].tolist()} y={y[worst].tolist()}"
    return Check(f"conj_reverses_products[{tag.name}]", bad is None, n, float(err[worst]), bad)


def _unit_scalars(field, rng, n):
    if field == KR:
        return np.where(rng.random(n) < 0.5, 1.0, -1.0).astype(complex)
    return np.exp(1j * rng.uniform(0, 2 * math.pi, n))


def _scale_batch(x: np.ndarray, l: np.ndarray, field) -> np.ndarray:
    s = np.zeros_like(x)
    s[:, 0] = l.real
    if field == KC:
        s[:, 1] = l.imag
    return cd_mul(x, s)


def hermitian_properties(tag, field, rng, n: int, tol: float = 1e-9) -> Check:
    """Re(x|y) = <x, y>, (x|x) = |x|^2, Cauchy-Schwarz, equality for y = x l, sesquilinearity."""
    d = tag.real_dimension
    x = rng.standard_normal((n, d))
    y = rng.standard_normal((n, d))
    hxy = hermitian_batch(x, y, field)
    errs = [
        np.abs(hxy.real - np.sum(x * y, axis=1)),
        np.abs(hermitian_batch(x, x, field) - np.sum(x * x, axis=1)),
    ]
    nx, ny = np.linalg.norm(x, axis=1), np.linalg.norm(y, axis=1)
    errs.append(np.maximum(np.abs(hxy) - nx * ny, 0.0))
    # strict inequality for generic (independent) pairs
    gap = nx * ny - np.abs(hxy)
    l = _unit_scalars(field, rng, n) * rng.uniform(0.5, 2.0, n)
    xl = _scale_batch(x, l, field)
    errs.append(np.abs(np.abs(hermitian_batch(x, xl, field)) - nx * np.linalg.norm(xl, axis=1)))
    # conjugate-linear in the first slot, linear in the second
    errs.append(np.abs(hermitian_batch(x, xl, field) - hermitian_batch(x, x, field) * l))
    errs.append(np.abs(hermitian_batch(xl, y, field) - np.conj(l) * hxy))
    err = np.max(np.stack(errs), axis=0)
    worst = int(np.argmax(err))
    ok = err[worst] <= tol * max(1.0, float(np.max(nx * ny)))
    bad = None
    if not ok:
        bad = f"x={x[worst].tolist()} y={y[worst].tolist()}"
    elif np.min(gap) <= 0:
        ok, bad = False, "random independent pair attains Cauchy-Schwarz equality"
    return Check(f"hermitian_properties[{field.name},{tag.name}]", ok, n, float(err[worst]), bad)


def embed_multiplicative(A, B, field, rng, n: int, pairs: int = 100, tol: float = 1e-8) -> Check:
    worst, bad = 0.0, None
    for _ in range(n):
        a, c = random_unit_pure(field, A, rng), random_unit_pure(field, A, rng)
        b = random_unit_pure(field, B, rng)
        # d with (b|d) = (a|c): d = b (a|c) + w sqrt(1 - |(a|c)|^2), w a unit orthogonal to b
        ac = hermitian(a, c, field)
        w = random_perp([b], field, rng)
        d = scale(b, ac, field) + w * math.sqrt(max(0.0, 1.0 - abs(ac) ** 2))
        phi = embed(a, c, b, d, field, tol=1e-9)
        err = max(
            phi.multiplicativity_error(rng, pairs),
            (phi(a) - b).norm(),
            (phi(c) - d).norm(),
            phi.norm_error(),
        )
        if err > worst:
            worst = err
        if err > tol:
            bad = bad or f"a={a.coeffs.tolist()} c={c.coeffs.tolist()}"
    return Check(f"embed_multiplicative[{field.name},{A.name}->{B.name}]", bad is None, n, worst, bad)


def embed_rejects_proportional(A, B, field, rng, n: int) -> Check:
    bad = None
    for _ in range(n):
        a, b = random_unit_pure(field, A, rng), random_unit_pure(field, B, rng)
        l = random_unit_scalar(field, rng)
        try:
            embed(a, scale(a, l, field), b, scale(b, l, field), field)
            bad = bad or f"accepted a={a.coeffs.tolist()} and a l"
        except AlgebraError:
            pass
    return Check(f"embed_rejects_proportional[{field.name},{A.name}->{B.name}]", bad is None, n, 0.0, bad)


def k_decompose_idempotent(tag, field, rng, n: int, tol: float = 1e-12) -> Check:
    worst, bad = 0.0, None
    for _ in range(n):
        x = random_element(tag, rng)
        l, p = k_decompose(x, field)
        l2, p2 = k_decompose(p, field)
        recon = field.scalar(l, tag) + p
        err = max(abs(l2), (p2 - p).norm(), (recon - x).norm())
        worst = max(worst, err)
        if err > tol:
            bad = bad or f"x={x.coeffs.tolist()}"
    return Check(f"k_decompose_idempotent[{field.name},{tag.name}]", bad is None, n, worst, bad)


def scalar_commutation(rng, n: int, tol: float = 1e-12) -> Check:
    """l e = e conj(l) for l in C and e in Pu_C(O)."""
    worst = 0.0
    for _ in range(n):
        e = random_unit_pure(KC, O, rng)
        l = complex(*rng.standard_normal(2))
        lhs = KC.scalar(l, O) * e
        rhs = e * KC.scalar(l.conjugate(), O)
        worst = max(worst, (lhs - rhs).norm())
    return Check("scalar_commutation[C,O]", worst <= tol, n, worst, None if worst <= tol else "l e != e conj(l)")


def algebra_suite(case: GeometryCase, rng, n: int, tol: float) -> SuiteResult:
    res = SuiteResult()
    for tag in (R, C, H, O):
        res.checks.append(composition_law(tag, rng, n, tol))
        res.checks.append(conj_reverses_products(tag, rng, n, tol))
    k = case.k
    for tag in dict.fromkeys((case.A, case.B)):
        res.checks.append(hermitian_properties(tag, k, rng, n, tol))
        res.checks.append(k_decompose_idempotent(tag, k, rng, n))
    name = f"embed_multiplicative[{k.name},{case.A.name}->{case.B.name}]"
    res.checks.append(_guard(name, n, lambda: embed_multiplicative(case.A, case.B, k, rng, n)))
    res.checks.append(embed_rejects_proportional(case.A, case.B, k, rng, n))
    if k == KC:
        res.checks.append(scalar_commutation(rng, n))
    return res


# ---------------------------------------------------------------------------
# geometry


def coplanarity_criterion(case: GeometryCase, rng, n: int, tol: float = 1e-9, gap: float = 1e-3) -> Check:
    """Coplanar-by-criterion pairs get a common plane; pairs off by >= gap get none."""
    k = case.k
    worst, bad = 0.0, None
    for _ in range(n):
        pi = random_plane(case, rng)
        L = line_in_plane(pi, random_unit_pure(k, case.A, rng))
        M = line_in_plane(pi, random_unit_pure(k, case.A, rng))
        if not coplanar(L, M, tol):
            bad = bad or f"lines of one plane fail the criterion: {L} {M}"
            continue
        rho = common_plane(L, M, tol=1e-8)
        err = max((rho(L.a) - L.b).norm(), (rho(M.a) - M.b).norm())
        worst = max(worst, err)
        if err > 1e-8:
            bad = bad or f"common plane misses {L} or {M}"
        # a pair violating the criterion: no embedding can map (a, c) to (b, d)
        P, Q = random_line(case, rng), random_line(case, rng)
        diff = abs(hermitian(P.a, Q.a, k) - hermitian(P.b, Q.b, k))
        if diff < gap:
            continue
        if coplanar(P, Q, tol):
            bad = bad or f"criterion accepts {P} {Q}"
        try:
            common_plane(P, Q, tol=1e-8)
            bad = bad or f"plane built for non-coplanar {P} {Q}"
        except GeometryError:
            pass
        for _ in range(3):
            phi = random_plane_through(P, rng)
            if incident(Q, phi, 1e-6):
                bad = bad or f"plane through {P} contains {Q}"
    return Check("coplanarity_criterion", bad is None, n, worst, bad)


def gq_rank_two(case: GeometryCase, rng, n: int, tol: float = 1e-8) -> Check:
    k = case.k
    worst, bad, done = 0.0, None, 0
    while done < n:
        p = random_point(case, rng)
        pi = random_plane(case, rng)
        L = random_line_through(p, rng)
        if incident(L, pi, 1e-6):
            continue
        done += 1
        _, rank = _null_vector(gq_system(p, pi, L), k)
        N = gq_project(p, pi, L)
        err = max(
            abs(hermitian(p.rep, N.a, k)),
            (pi(N.a) - N.b).norm(),
            abs(hermitian(N.a, L.a, k) - hermitian(N.b, L.b, k)),
        )
        again = gq_project(p, pi, L)
        if not again.same(N, 1e-9):
            err = max(err, 1.0)
        worst = max(worst, err)
        if rank != 2 or err > tol:
            bad = bad or f"rank {rank} err {err:.3g} for p={p} L={L}"
    return Check("gq_rank_two", bad is None, n, worst, bad)


def residue_checks(case: GeometryCase, rng, n: int) -> list:
    out = []
    for label, make in (
        ("residue_plane", lambda: random_plane(case, rng)),
        ("residue_line", lambda: random_line(case, rng)),
        ("residue_point", lambda: random_point(case, rng)),
    ):
        rep = verify_residue(make(), n, rng)
        out.append(Check(label, rep.passed, rep.samples, rep.max_error, rep.counterexample))
    return out


def _random_auto(case: GeometryCase, rng):
    k = case.k
    a1 = random_orthonormal_pair(k, case.A, rng)
    b1 = random_orthonormal_pair(k, case.B, rng)
    basis_a = k.pure_basis(case.A)[:2]
    basis_b = k.pure_basis(case.B)[:2]
    return automorphism_between_pairs(case, basis_a, a1, basis_b, b1)


def auto_preserves_structure(case: GeometryCase, rng, n: int, tol: float = 1e-8) -> Check:
    k = case.k
    worst, bad = 0.0, None
    for _ in range(n):
        g = _random_auto(case, rng)
        F = random_flag(case, rng)
        img = [apply_auto(g, v) for v in F.vertices()]
        if not all(incident(img[i], img[j], tol) for i in range(3) for j in range(i + 1, 3)):
            bad = bad or f"flag {F} loses incidence"
        L, M = random_line(case, rng), random_line(case, rng)
        gL, gM = apply_auto(g, L), apply_auto(g, M)
        err = abs(abs(hermitian(gL.a, gM.a, k)) - abs(hermitian(L.a, M.a, k)))
        err = max(err, abs(abs(hermitian(gL.b, gM.b, k)) - abs(hermitian(L.b, M.b, k))))
        if coplanar(L, M, 1e-9) != coplanar(gL, gM, 1e-9):
            bad = bad or "coplanarity changes"
        back = apply_auto(g.inverse(), gL)
        if not back.same(L, tol):
            err = max(err, 1.0)
        worst = max(worst, err)
        if err > tol:
            bad = bad or f"inner products change for {L} {M}"
    return Check("auto_preserves_structure", bad is None, n, worst, bad)


def flag_transport(case: GeometryCase, rng, n: int) -> Check:
    bad = None
    for _ in range(n):
        F1, F2 = random_flag(case, rng), random_flag(case, rng)
        flag_transporter(F1, F2)  # self-checks its output
    return Check("flag_transporter", bad is None, n, 0.0, bad)


def canonical_forms(case: GeometryCase, rng, n: int) -> Check:
    k = case.k
    bad = None
    for _ in range(n):
        p, L = random_point(case, rng), random_line(case, rng)
        l = random_unit_scalar(k, rng)
        if not (Point.of(case, scale(p.rep, l, k)).rep.close(p.rep, 1e-9)):
            bad = bad or f"point {p} not canonical"
        L2 = Line.of(case, scale(L.a, l, k), scale(L.b, l, k))
        if not (L2.a.close(L.a, 1e-9) and L2.b.close(L.b, 1e-9)):
            bad = bad or f"line {L} not canonical"
        M = random_line(case, rng)
        M2 = Line.of(case, scale(M.a, l, k), scale(M.b, l, k))
        if coplanar(L, M, 1e-9) != coplanar(L2, M2, 1e-9):
            bad = bad or "coplanarity depends on the representative"
        q, J = collinear_witness(p, L)
        if not (incident(q, L, 1e-8) and incident(p, J, 1e-8) and incident(q, J, 1e-8)):
            bad = bad or f"no collinearity witness for {p} and {L}"
    return Check("canonical_forms", bad is None, n, 0.0, bad)


def geometry_suite(case: GeometryCase, rng, n: int, tol: float) -> SuiteResult:
    res = SuiteResult()
    res.checks.append(_guard("coplanarity_criterion", n, lambda: coplanarity_criterion(case, rng, n)))
    res.checks.append(_guard("gq_rank_two", n, lambda: gq_rank_two(case, rng, n)))
    res.checks.extend(residue_checks(case, rng, n))
    res.checks.append(_guard("auto_preserves_structure", n, lambda: auto_preserves_structure(case, rng, n)))
    res.checks.append(_guard("flag_transporter", n, lambda: flag_transport(case, rng, n)))
    res.checks.append(_guard("canonical_forms", n, lambda: canonical_forms(case, rng, n)))
    return res


# ---------------------------------------------------------------------------
# covering


def covering_suite(case: GeometryCase, rng, n: int, tol: float) -> SuiteResult:
    res = SuiteResult()
    rep = cov.free_action_check(n, rng)
    res.checks.append(
        Check("free_action", rep.passed, rep.samples, rep.max_formula_error, rep.counterexample)
    )
    res.checks.append(
        Check("quadric_preserved", rep.max_q_error <= 1e-12, rep.samples, rep.max_q_error, None)
    )
    worst, bad = 0.0, None
    for _ in range(n):
        g = cov.random_isoclinic_away_from_one(rng)
        b = cov.bilinear_B(cov.BASE_POINT, cov.act_raw(g, cov.BASE_POINT))
        err = abs(b - (1.0 - g.real_part))
        worst = max(worst, err)
        if err > tol or b < cov.DEFAULT_DELTA:
            bad = bad or f"g={g.q.tolist()} B={b}"
        p = cov.random_quadric_point(rng)
        h = cov.IsoclinicElement.random(rng)
        lhs = cov.h_act(g, cov.h_act(h, p))
        if not lhs.same(cov.h_act(g * h, p), 1e-9) or not cov.h_act(g.inverse(), cov.h_act(g, p)).same(p, 1e-9):
            bad = bad or "action law fails"
    res.checks.append(Check("base_point_formula", bad is None, n, worst, bad))
    res.stats["min_abs_B"] = rep.min_abs_B
    return res


# ---------------------------------------------------------------------------
# homotopy


def random_primitive(case: GeometryCase, rng, orthogonal: bool = False) -> hp.PrimitivePath:
    k = case.k
    x = random_point(case, rng)
    y = Point.of(case, random_perp([x.rep], k, rng)) if orthogonal else random_point(case, rng)
    c, _ = orthogonal_point_vector([x.rep, y.rep], k)
    L = Line.of(case, c, random_unit_pure(k, case.B, rng))
    M = Line.of(case, c, random_unit_pure(k, case.B, rng))
    return hp.PrimitivePath(x, L, y, M)


def random_path_with_planes(case: GeometryCase, length: int, rng) -> hp.EdgePath:
    """A random path starting and ending at points or lines."""
    while True:
        vs = [random_point(case, rng) if rng.random() < 0.5 else random_line(case, rng)]
        while len(vs) < length + 1:
            vs.append(hp.random_neighbour(vs[-1], rng))
        if vs[-1].type != PLANE:
            return hp.EdgePath(tuple(vs))


def eliminate_planes_check(case, rng, n: int) -> Check:
    worst, bad = 0, None
    for _ in range(n):
        k = int(rng.integers(2, 11))
        p = random_path_with_planes(case, k, rng)
        out, log = hp.eliminate_planes(p)
        worst = max(worst, len(log))
        if len(log) > 3 * (k // 2) or out.length > (3 * k) // 2 or not out.is_point_line():
            bad = bad or f"length {k}: log {len(log)}, output length {out.length}"
        if not hp.replay(p, log).same(out):
            bad = bad or "replay mismatch"
    return Check("eliminate_planes_budget", bad is None, n, float(worst), bad)


def orthogonalize_check(case, rng, n: int) -> Check:
    k = case.k
    worst, bad = 0.0, None
    for _ in range(n):
        pp = random_primitive(case, rng)
        q, log = hp.orthogonalize_primitive(pp)
        err = abs(hermitian(q.x.rep, q.y.rep, k))
        worst = max(worst, err)
        if len(log) > 12 or err > 1e-9 or not hp.replay(pp.path(), log).same(q.path()):
            bad = bad or f"log {len(log)} err {err:.3g}"
    return Check("orthogonalize_at_most_12", bad is None, n, worst, bad)


def random_pinch_instance(case: GeometryCase, rng):
    k = case.k
    while True:
        x, y, z = random_point(case, rng), random_point(case, rng), random_point(case, rng)
        c1, _ = orthogonal_point_vector([x.rep, y.rep], k)
        c2, _ = orthogonal_point_vector([y.rep, z.rep], k)
        L = Line.of(case, c1, random_unit_pure(k, case.B, rng))
        M = Line.of(case, c2, random_unit_pure(k, case.B, rng))
        if coplanar(L, M, 1e-6):
            continue
        pi = random_plane_through(L, rng)
        Lp = line_in_plane(pi, random_perp([x.rep], k, rng))
        return hp.EdgePath((x, L, y, M, z)), Lp


def pinch_check(case, rng, n: int) -> Check:
    bad = None
    for _ in range(n):
        gamma, Lp = random_pinch_instance(case, rng)
        out, log = hp.pinch(gamma, Lp)
        ok = (
            len(log) == 12
            and out[1].same(Lp)
            and out[0].same(gamma[0])
            and out[-1].same(gamma[-1])
            and hp.replay(gamma, log).same(out)
        )
        if not ok:
            bad = bad or f"log {len(log)} output {out.types()}"
    return Check("pinch_exactly_12", bad is None, n, 0.0, bad)


def pl_invariant_check(case, rng, n: int) -> Check:
    k = case.k
    worst, bad = 0.0, None
    for _ in range(n):
        pp = random_primitive(case, rng, orthogonal=True)
        g = _random_auto(case, rng)
        img = hp.PrimitivePath(*(apply_auto(g, v) for v in (pp.x, pp.L, pp.y, pp.M)))
        l0, l1 = hp.pl_invariant(pp), hp.pl_invariant(img)
        err = abs(l0 - l1)
        if abs(l0) > 1 + 1e-9:
            err = max(err, abs(l0) - 1)
        worst = max(worst, err)
        if err > 1e-8:
            bad = bad or f"invariant {l0} vs {l1}"
    return Check("pl_invariant_frame_independent", bad is None, n, worst, bad)


def random_unimodular_primitive(case: GeometryCase, rng, l: complex) -> hp.PrimitivePath:
    """Orthogonal primitive path with PL-invariant l, |l| = 1."""
    k = case.k
    pp = random_primitive(case, rng, orthogonal=True)
    _, _, app = hp.frame_of(pp)
    b = hp.second_component(pp.L, app)
    return hp.PrimitivePath(pp.x, pp.L, pp.y, Line.of(case, app, scale(b, l, k)))


def pl_reduce_check(case, rng, n: int, tol: float = 1e-9) -> Check:
    worst, bad = 0.0, None
    for i in range(n):
        l = 1j if i == 0 else complex(np.exp(1j * rng.uniform(0.05, math.pi - 0.05) * rng.choice([-1, 1])))
        pp = random_unimodular_primitive(case, rng, l)
        out, log = hp.pl_reduce(pp)
        err = abs(hp.pl_invariant(out) - l.real)
        worst = max(worst, err)
        if err > tol or len(log) > 12 or not hp.replay(pp.path(), log).same(out.path()):
            bad = bad or f"l={l}: invariant {hp.pl_invariant(out)}"
    return Check("pl_reduce_real_part", bad is None, n, worst, bad)


def random_scalar_in_disc(field, rng, rmax: float = 0.95) -> complex:
    r = rng.uniform(0.0, rmax)
    return complex(r * random_unit_scalar(field, rng))


def diam_connect_check(case, rng, n: int, tol: float = 1e-9) -> tuple[Check, int]:
    k = case.k
    worst, bad, nmax = 0.0, None, 0
    for i in range(n):
        l = random_scalar_in_disc(k, rng)
        b = random_unit_pure(k, case.B, rng)
        c = b if i % 10 == 0 else random_unit_pure(k, case.B, rng)
        chain, nexp = hp.diam_connect(b, c, l, k)
        nmax = max(nmax, nexp)
        errs = [abs(hermitian(u, v, k) - l) for u, v in zip(chain, chain[1:])]
        errs += [abs(u.norm() - 1.0) for u in chain]
        err = max(errs)
        worst = max(worst, err)
        ends = chain[0].close(b, 1e-12) and chain[-1].close(c, 1e-12)
        if err > tol or len(chain) - 1 > 4 * nexp or len(chain) < 2 or not ends:
            bad = bad or f"l={l}: chain of length {len(chain) - 1}, n={nexp}, err {err:.3g}"
    return Check("diam_connect_chain", bad is None, n, worst, bad), nmax


def residue_paths_check(case, rng, n: int) -> Check:
    """Two point-line paths (lengths k, l >= 1) inside one plane residue are joined by at most k + l moves."""
    k = case.k
    bad, worst = None, 0
    for _ in range(n):
        pi = random_plane(case, rng)

        def walk(start, length):
            vs = [start]
            for _ in range(length):
                v = vs[-1]
                if v.type == POINT:
                    vs.append(line_in_plane(pi, random_perp([v.rep], k, rng)))
                else:
                    vs.append(random_point_on(v, rng))
            return vs

        x = random_point(case, rng)
        src = walk(x, int(rng.integers(1, 5)))
        end = src[-1]
        tgt = walk(x, int(rng.integers(1, 4)))
        tgt = tgt + hp.residue_connect(tgt[-1], end, pi)[1:]
        d = hp.Deformer(hp.EdgePath(tuple(src)))
        budget = (len(src) - 1) + (len(tgt) - 1)
        hp.residue_replace(d, 0, len(src) - 1, tgt, pi)
        used = len(d.log)
        worst = max(worst, used - budget)
        if used > budget or not d.path.same(hp.EdgePath(tuple(tgt))):
            bad = bad or f"{used} moves for lengths {len(src) - 1}, {len(tgt) - 1}"
    return Check("residue_paths_k_plus_l", bad is None, n, float(worst), bad)


def budget_arithmetic_check(kmax: int = 64) -> Check:
    """C and D as affine functions of K, compared with their closed forms."""
    bad = None
    for k in range(kmax + 1):
        c0, c1 = hp.budget_C(k, 0), hp.budget_C(k, 1)
        slope, const = c1 - c0, c0
        if k < 2:
            want = (0, 0)
        elif k < 4:
            want = (1, 0)
        elif k < 6:
            want = (1, 55)
        else:
            want = (k - 3, (k - 4) * 56 + 55)
        if (slope, const) != want:
            bad = bad or f"C({k}) = {slope} K + {const}"
        for K in (0, 1, 17, 236):
            d = hp.budget_D(k, K)
            if d != hp.budget_C((3 * k) // 2, K) + 4 + 6 * ((k + 2) // 2):
                bad = bad or f"D({k}) with K={K}"
    return Check("budget_arithmetic", bad is None, kmax + 1, 0.0, bad)


def reduce_experiments(case, rng, n: int, k_budget: int, res: SuiteResult, max_length: int = 8) -> list:
    """Random loop pairs and move-perturbed pairs, reduced within D(k)."""
    done, failures, longest, k_emp = 0, [], 0, 0
    comparisons = []
    for i in range(n):
        length = 2 * int(rng.integers(2, max_length // 2 + 1))
        p = hp.random_loop(case, length, rng)
        if i % 2 == 0:
            q = hp.random_loop(case, length, rng, start=p[0])
        else:
            q = p
            for _ in range(5):
                q = hp.apply_move(q, hp.random_move(q, rng))
        k = max(p.length, q.length)
        bound = hp.budget_D(k, k_budget)
        try:
            r = hp.reduce(p, q, budget=bound)
            if not hp.replay(p, r.log).same(q):
                raise hp.HomotopyError("replay does not reach the target")
        except hp.HomotopyError as exc:
            failures.append(f"experiment {i} (k={k}): {type(exc).__name__}: {exc}")
            comparisons.append((k, -1, bound))
            continue
        done += 1
        longest = max(longest, len(r.log))
        k_emp = max(k_emp, r.k_emp)
        comparisons.append((k, len(r.log), bound))
        res.logs[f"reduce_{i:03d}"] = (p, r.log)
    res.stats["reduce_experiments"] = n
    res.stats["reduce_successes"] = done
    res.stats["reduce_max_log_length"] = longest
    res.stats["K_emp"] = k_emp
    res.stats["K_budget"] = k_budget
    res.stats["D_comparisons"] = comparisons
    checks = [
        Check("reduce_within_D", not failures, n, float(longest), failures[0] if failures else None),
        Check(
            "K_emp_within_budget",
            k_emp <= k_budget and not failures,
            n,
            float(k_emp),
            None if k_emp <= k_budget and not failures else f"K_emp={k_emp}, K_budget={k_budget}",
        ),
    ]
    return checks


def default_k_budget(case: GeometryCase) -> int:
    try:
        return hp.k_constant(case)
    except hp.ContractionUnavailable:
        return hp.k_constant(hp.get_case("ho"))


def homotopy_suite(case: GeometryCase, rng, n: int, tol: float, k_budget: int) -> SuiteResult:
    res = SuiteResult()
    add = res.checks.append
    add(_guard("eliminate_planes_budget", n, lambda: eliminate_planes_check(case, rng, n)))
    add(_guard("orthogonalize_at_most_12", n, lambda: orthogonalize_check(case, rng, n)))
    add(_guard("pinch_exactly_12", n, lambda: pinch_check(case, rng, n)))
    add(_guard("pl_invariant_frame_independent", n, lambda: pl_invariant_check(case, rng, n)))
    if case.k == KC:
        add(_guard("pl_reduce_real_part", n, lambda: pl_reduce_check(case, rng, n, tol)))
    try:
        chk, nmax = diam_connect_check(case, rng, n, tol)
        res.stats["diam_n_max"] = nmax
    except (AlgebraError, hp.HomotopyError) as exc:
        chk = Check("diam_connect_chain", False, n, math.inf, str(exc))
    add(chk)
    add(_guard("residue_paths_k_plus_l", n, lambda: residue_paths_check(case, rng, n)))
    add(budget_arithmetic_check())
    try:
        s = hp.seed(case)
        res.stats["seed_cost"] = s.cost
        res.stats["K_constructive"] = hp.k_constant(case)
    except hp.ContractionUnavailable as exc:
        res.stats["seed"] = str(exc)
    experiments = max(1, n // 10)
    res.checks.extend(reduce_experiments(case, rng, experiments, k_budget, res))
    return res


SUITES = ("algebra", "geometry", "covering", "homotopy")
