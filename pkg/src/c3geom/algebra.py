"""Real composition algebras R, C, H, O built by Cayley-Dickson doubling.

Elements are real coefficient vectors in the basis e0 = 1, e1, ..., e_{n-1}.
The doubling rule

    (x + y e)(u + v e) = (x u - conj(v) y) + (v x + y conj(u)) e

applied to R -> C -> H -> O is the only multiplication table in the package;
with it i j = k in H and e4 e1 = -e5 in O.

A ground field k (R or C) sits inside an algebra as span{e0} or span{e0, e1}.
Algebras are right k-vector spaces, scalars are Python ``complex`` values and
the Hermitian form (x|y) is the k-part of conj(x) y: conjugate-linear in the
first slot, linear in the second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9

_DIMS = {"R": 1, "C": 2, "H": 4, "O": 8}


class AlgebraError(ValueError):
    """Raised when an algebraic precondition fails."""


@dataclass(frozen=True)
class AlgebraTag:
    name: str

    def __post_init__(self):
        if self.name not in _DIMS:
            raise AlgebraError(f"unknown algebra {self.name!r}")

    @property
    def real_dimension(self) -> int:
        return _DIMS[self.name]

    def __repr__(self):
        return self.name


R = AlgebraTag("R")
C = AlgebraTag("C")
H = AlgebraTag("H")
O = AlgebraTag("O")
TAGS = {t.name: t for t in (R, C, H, O)}


def _cd_mul_doubling(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cayley-Dickson product by recursive doubling along the last axis."""
    n = x.shape[-1]
    if n == 1:
        return x * y
    h = n // 2
    a, b = x[..., :h], x[..., h:]
    c, d = y[..., :h], y[..., h:]
    return np.concatenate(
        [
            _cd_mul_doubling(a, c) - _cd_mul_doubling(cd_conj(d), b),
            _cd_mul_doubling(d, a) + _cd_mul_doubling(b, cd_conj(c)),
        ],
        axis=-1,
    )


def cd_conj(x: np.ndarray) -> np.ndarray:
    out = -x
    out[..., 0] = x[..., 0]
    return out


@lru_cache(maxsize=None)
def structure_constants(dim: int) -> np.ndarray:
    """table[i, j] is the coefficient vector of e_i e_j."""
    eye = np.eye(dim)
    table = _cd_mul_doubling(eye[:, None, :], eye[None, :, :])
    table.setflags(write=False)
    return table


def cd_mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cayley-Dickson product along the last axis (broadcasts over the rest).

    Evaluated through the structure constants of the doubling formula.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[-1]
    x, y = np.broadcast_arrays(x, y)
    outer = (x[..., :, None] * y[..., None, :]).reshape(x.shape[:-1] + (n * n,))
    return outer @ structure_constants(n).reshape(n * n, n)


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    tag: AlgebraTag
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (self.tag.real_dimension,):
            raise AlgebraError(
                f"{self.tag} needs {self.tag.real_dimension} coefficients, got shape {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def basis(cls, tag: AlgebraTag, i: int) -> AlgebraElement:
        c = np.zeros(tag.real_dimension)
        c[i] = 1.0
        return cls(tag, c)

    @classmethod
    def zero(cls, tag: AlgebraTag) -> AlgebraElement:
        return cls(tag, np.zeros(tag.real_dimension))

    @classmethod
    def one(cls, tag: AlgebraTag) -> AlgebraElement:
        return cls.basis(tag, 0)

    def _check(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.tag != self.tag:
            raise AlgebraError(f"tag mismatch: {self.tag} vs {other.tag}")
        return other

    def __add__(self, other):
        other = self._check(other)
        return AlgebraElement(self.tag, self.coeffs + other.coeffs)

    def __sub__(self, other):
        other = self._check(other)
        return AlgebraElement(self.tag, self.coeffs - other.coeffs)

    def __neg__(self):
        return AlgebraElement(self.tag, -self.coeffs)

    def __mul__(self, other):
        # element * element is the algebra product; element * number scales over R
        if isinstance(other, AlgebraElement):
            return mul(self, other)
        if isinstance(other, (int, float, np.floating)):
            return AlgebraElement(self.tag, self.coeffs * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return AlgebraElement(self.tag, self.coeffs * float(other))
        return NotImplemented

    def __truediv__(self, other):
        return AlgebraElement(self.tag, self.coeffs / float(other))

    def conj(self) -> AlgebraElement:
        return conj(self)

    def norm2(self) -> float:
        return norm2(self)

    def norm(self) -> float:
        return math.sqrt(norm2(self))

    def normalized(self) -> AlgebraElement:
        n = self.norm()
        if n == 0.0:
            raise AlgebraError("cannot normalize the zero element")
        return self / n

    def close(self, other: AlgebraElement, tol: float = DEFAULT_TOL) -> bool:
        return self.tag == other.tag and bool(np.max(np.abs(self.coeffs - other.coeffs)) <= tol)

    def __repr__(self):
        terms = [f"{c:+.6g}e{i}" for i, c in enumerate(self.coeffs) if abs(c) > 1e-15]
        return f"{self.tag}({' '.join(terms) or '0'})"


def mul(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    if x.tag != y.tag:
        raise AlgebraError(f"tag mismatch: {x.tag} vs {y.tag}")
    return AlgebraElement(x.tag, cd_mul(x.coeffs, y.coeffs))


def conj(x: AlgebraElement) -> AlgebraElement:
    return AlgebraElement(x.tag, cd_conj(x.coeffs))


def norm2(x: AlgebraElement) -> float:
    return float(np.dot(x.coeffs, x.coeffs))


def bilinear(x: AlgebraElement, y: AlgebraElement) -> float:
    if x.tag != y.tag:
        raise AlgebraError(f"tag mismatch: {x.tag} vs {y.tag}")
    return float(np.dot(x.coeffs, y.coeffs))


@dataclass(frozen=True)
class GroundField:
    """The ground field k, embedded as span{e0} (R) or span{e0, e1} (C)."""

    name: str

    def __post_init__(self):
        if self.name not in ("R", "C"):
            raise AlgebraError(f"ground field must be R or C, got {self.name!r}")

    @property
    def dimension(self) -> int:
        return 1 if self.name == "R" else 2

    def check_tag(self, tag: AlgebraTag) -> None:
        if tag.real_dimension < self.dimension:
            raise AlgebraError(f"k={self.name} does not embed in {tag}")

    def k_dimension(self, tag: AlgebraTag) -> int:
        self.check_tag(tag)
        return tag.real_dimension // self.dimension

    def scalar(self, l: complex, tag: AlgebraTag) -> AlgebraElement:
        """The element of ``tag`` representing the scalar ``l``."""
        self.check_tag(tag)
        l = complex(l)
        if self.name == "R" and l.imag != 0.0:
            raise AlgebraError("non-real scalar over k=R")
        c = np.zeros(tag.real_dimension)
        c[0] = l.real
        if self.name == "C":
            c[1] = l.imag
        return AlgebraElement(tag, c)

    def pure_basis(self, tag: AlgebraTag) -> tuple[AlgebraElement, ...]:
        """Fixed orthonormal k-basis of Pu_k: (e1, ..., e_{n-1}) over R, (e2, e4, ...) over C."""
        self.check_tag(tag)
        step = self.dimension
        return tuple(
            AlgebraElement.basis(tag, i) for i in range(step, tag.real_dimension, step)
        )

    def __repr__(self):
        return f"k={self.name}"


KR = GroundField("R")
KC = GroundField("C")
FIELDS = {"R": KR, "C": KC}


def _to_complex(parts: np.ndarray, field: GroundField) -> np.ndarray:
    if field.name == "R":
        return parts[..., 0].astype(complex)
    return parts[..., 0] + 1j * parts[..., 1]


def k_part(x: AlgebraElement, field: GroundField) -> complex:
    field.check_tag(x.tag)
    return complex(_to_complex(x.coeffs, field))


def k_decompose(x: AlgebraElement, field: GroundField) -> tuple[complex, AlgebraElement]:
    """Split x = l + p with l in k and p in Pu_k."""
    field.check_tag(x.tag)
    c = x.coeffs.copy()
    l = complex(_to_complex(c, field))
    c[: field.dimension] = 0.0
    return l, AlgebraElement(x.tag, c)


def scale(x: AlgebraElement, l: complex, field: GroundField) -> AlgebraElement:
    """Right scalar multiplication x * l."""
    return mul(x, field.scalar(l, x.tag))


def is_pure(x: AlgebraElement, field: GroundField, tol: float = DEFAULT_TOL) -> bool:
    return bool(np.all(np.abs(x.coeffs[: field.dimension]) <= tol))


def hermitian(x: AlgebraElement, y: AlgebraElement, field: GroundField) -> complex:
    """(x|y): the k-part of conj(x) y."""
    if x.tag != y.tag:
        raise AlgebraError(f"tag mismatch: {x.tag} vs {y.tag}")
    field.check_tag(x.tag)
    return complex(_to_complex(cd_mul(cd_conj(x.coeffs), y.coeffs), field))


def hermitian_batch(x: np.ndarray, y: np.ndarray, field: GroundField) -> np.ndarray:
    """Vectorized (x|y) over the leading axes of coefficient arrays."""
    return _to_complex(cd_mul(cd_conj(x), y), field)


def kcoords(x: AlgebraElement, field: GroundField) -> np.ndarray:
    """Coordinates of the pure part of x in the fixed k-basis of Pu_k."""
    basis = field.pure_basis(x.tag)
    return np.array([hermitian(f, x, field) for f in basis], dtype=complex)


def from_kcoords(v: Sequence[complex], tag: AlgebraTag, field: GroundField) -> AlgebraElement:
    basis = field.pure_basis(tag)
    if len(v) != len(basis):
        raise AlgebraError(f"expected {len(basis)} k-coordinates, got {len(v)}")
    out = AlgebraElement.zero(tag)
    for f, c in zip(basis, v):
        out = out + scale(f, complex(c), field)
    return out


def random_unit_pure(field: GroundField, tag: AlgebraTag, rng: np.random.Generator) -> AlgebraElement:
    """Unit pure element from normalized Gaussian coordinates on Pu_k."""
    field.check_tag(tag)
    if field.k_dimension(tag) < 2:
        raise AlgebraError(f"Pu_{field.name}({tag}) is zero")
    c = np.zeros(tag.real_dimension)
    g = rng.standard_normal(tag.real_dimension - field.dimension)
    c[field.dimension :] = g / np.linalg.norm(g)
    return AlgebraElement(tag, c)


def random_element(tag: AlgebraTag, rng: np.random.Generator) -> AlgebraElement:
    return AlgebraElement(tag, rng.standard_normal(tag.real_dimension))


def random_unit_scalar(field: GroundField, rng: np.random.Generator) -> complex:
    if field.name == "R":
        return 1.0 if rng.random() < 0.5 else -1.0
    return complex(np.exp(1j * rng.uniform(0.0, 2.0 * math.pi)))


def project_out(
    v: AlgebraElement, frame: Iterable[AlgebraElement], field: GroundField
) -> AlgebraElement:
    """v minus its components along an orthonormal k-frame."""
    for u in frame:
        v = v - scale(u, hermitian(u, v, field), field)
    return v


def orthonormal_complete(
    partial: Sequence[AlgebraElement],
    field: GroundField,
    tag: AlgebraTag | None = None,
    tol: float = DEFAULT_TOL,
) -> tuple[AlgebraElement, ...]:
    """Extend an orthonormal list in Pu_k to a full orthonormal k-basis.

    Gram-Schmidt runs over the fixed basis order, so the result is
    deterministic in its input.
    """
    if tag is None:
        if not partial:
            raise AlgebraError("tag required when the partial list is empty")
        tag = partial[0].tag
    out: list[AlgebraElement] = []
    for u in partial:
        if u.tag != tag or not is_pure(u, field, tol):
            raise AlgebraError("partial list must consist of pure elements of one algebra")
        if abs(u.norm2() - 1.0) > tol or any(abs(hermitian(w, u, field)) > tol for w in out):
            raise AlgebraError("partial list is not orthonormal (or is linearly dependent)")
        out.append(u)
    n = field.k_dimension(tag) - 1
    for f in field.pure_basis(tag):
        if len(out) == n:
            break
        w = project_out(f, out, field)
        w = project_out(w, out, field)  # second pass for stability
        if w.norm() > 1e-6:
            out.append(w.normalized())
    return tuple(out)


def orthonormal_frame(
    vectors: Sequence[AlgebraElement], field: GroundField, tol: float = 1e-12
) -> tuple[AlgebraElement, ...]:
    """Gram-Schmidt on arbitrary vectors, dropping dependent ones."""
    out: list[AlgebraElement] = []
    for v in vectors:
        w = project_out(project_out(v, out, field), out, field)
        if w.norm() > tol:
            out.append(w.normalized())
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Embedding:
    """A k-algebra morphism given by the images of the source's fixed k-basis.

    The fixed k-basis of the source is (1,) + field.pure_basis(source); for a
    four-dimensional source this is (1, a0, a1, a0 a1).
    """

    source: AlgebraTag
    target: AlgebraTag
    field: GroundField
    basis_images: tuple[AlgebraElement, ...]
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        basis = source_basis(self.source, self.field)
        if len(self.basis_images) != len(basis):
            raise AlgebraError("wrong number of basis images")
        if any(b.tag != self.target for b in self.basis_images):
            raise AlgebraError("basis images must live in the target algebra")
        object.__setattr__(self, "basis_images", tuple(self.basis_images))
        # image of e_j is sum over the k-basis f of phi(f) (f|e_j)
        herm = hermitian_batch(
            np.array([f.coeffs for f in basis])[:, None, :],
            np.eye(self.source.real_dimension)[None, :, :],
            self.field,
        )
        imgs = np.array([b.coeffs for b in self.basis_images]).T
        m = imgs @ herm.real
        if self.field.name == "C":
            unit = np.zeros(self.target.real_dimension)
            unit[1] = 1.0
            m = m + cd_mul(imgs.T, unit).T @ herm.imag
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(
        cls, source: AlgebraTag, target: AlgebraTag, field: GroundField, matrix: np.ndarray
    ) -> Embedding:
        basis = source_basis(source, field)
        return cls(
            source, target, field, tuple(AlgebraElement(target, matrix @ f.coeffs) for f in basis)
        )

    @classmethod
    def identity(cls, tag: AlgebraTag, field: GroundField) -> Embedding:
        return cls(tag, tag, field, source_basis(tag, field))

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        if x.tag != self.source:
            raise AlgebraError(f"embedding expects {self.source}, got {x.tag}")
        return AlgebraElement(self.target, self.matrix @ x.coeffs)

    def apply_batch(self, coeffs: np.ndarray) -> np.ndarray:
        return coeffs @ self.matrix.T

    def compose(self, inner: Embedding) -> Embedding:
        """self after inner."""
        if inner.target != self.source:
            raise AlgebraError("composition tag mismatch")
        return Embedding.from_matrix(inner.source, self.target, self.field, self.matrix @ inner.matrix)

    @property
    def is_square(self) -> bool:
        return self.source == self.target

    def inverse(self, tol: float = 1e-8) -> Embedding:
        if not self.is_square:
            raise AlgebraError("only automorphisms are invertible")
        m = self.matrix
        if np.max(np.abs(m.T @ m - np.eye(m.shape[0]))) > tol:
            raise AlgebraError("map is not orthogonal, hence not an automorphism")
        return Embedding.from_matrix(self.target, self.source, self.field, m.T)

    def close(self, other: Embedding, tol: float = DEFAULT_TOL) -> bool:
        return (
            self.source == other.source
            and self.target == other.target
            and bool(np.max(np.abs(self.matrix - other.matrix)) <= tol)
        )

    def multiplicativity_error(self, rng: np.random.Generator, samples: int = 100) -> float:
        """Max |phi(xy) - phi(x)phi(y)| over random pairs, relative to |x||y|."""
        x = rng.standard_normal((samples, self.source.real_dimension))
        y = rng.standard_normal((samples, self.source.real_dimension))
        lhs = self.apply_batch(cd_mul(x, y))
        rhs = cd_mul(self.apply_batch(x), self.apply_batch(y))
        scale_ = np.linalg.norm(x, axis=1) * np.linalg.norm(y, axis=1)
        return float(np.max(np.linalg.norm(lhs - rhs, axis=1) / scale_))

    def norm_error(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.T @ m - np.eye(m.shape[1]))))


def source_basis(tag: AlgebraTag, field: GroundField) -> tuple[AlgebraElement, ...]:
    return (AlgebraElement.one(tag),) + field.pure_basis(tag)


def _check_unit_pure(x: AlgebraElement, field: GroundField, tol: float, what: str) -> None:
    if not is_pure(x, field, tol):
        raise AlgebraError(f"{what} is not k-pure")
    if abs(x.norm2() - 1.0) > tol:
        raise AlgebraError(f"{what} does not have unit norm")


def embed(
    a: AlgebraElement,
    c: AlgebraElement,
    b: AlgebraElement,
    d: AlgebraElement,
    field: GroundField,
    tol: float = DEFAULT_TOL,
) -> Embedding:
    """The k-algebra morphism A -> B sending a to b and c to d.

    a, c are unit k-pure in a four-dimensional (over k) algebra A; b, d unit
    k-pure in B with (a|c) = (b|d) and a k != c k.
    """
    if a.tag != c.tag or b.tag != d.tag:
        raise AlgebraError("a, c must share one algebra and b, d another")
    src, tgt = a.tag, b.tag
    if field.k_dimension(src) != 4:
        raise AlgebraError(f"{src} is not four-dimensional over k={field.name}")
    if field.k_dimension(tgt) < 4:
        raise AlgebraError(f"{tgt} is smaller than {src} over k={field.name}")
    for x, name in ((a, "a"), (c, "c"), (b, "b"), (d, "d")):
        _check_unit_pure(x, field, tol, name)
    ac = hermitian(a, c, field)
    bd = hermitian(b, d, field)
    if abs(ac - bd) > tol:
        raise AlgebraError(f"(a|c) = {ac} differs from (b|d) = {bd}")
    residual = c - scale(a, ac, field)
    rn = residual.norm()
    if rn <= math.sqrt(tol):
        raise AlgebraError("proportional pair: a k = c k")
    c_perp = residual / rn
    d_perp = (d - scale(b, bd, field)) / rn
    frame_a = (a, c_perp, a * c_perp)
    frame_b = (b, d_perp, b * d_perp)
    images = [AlgebraElement.one(tgt)]
    for f in field.pure_basis(src):
        img = AlgebraElement.zero(tgt)
        for u, v in zip(frame_a, frame_b):
            img = img + scale(v, hermitian(u, f, field), field)
        images.append(img)
    return Embedding(src, tgt, field, tuple(images))


def extend_to_automorphism(
    phi: Embedding, g: AlgebraElement, tol: float = DEFAULT_TOL
) -> Embedding:
    """Extend phi: H -> O (over R) to psi: O -> O by psi(x + y e4) = phi(x) + phi(y) g."""
    if phi.source != H or phi.target != O or phi.field != KR:
        raise AlgebraError("extension is defined for real embeddings H -> O")
    if abs(g.norm2() - 1.0) > tol:
        raise AlgebraError("g must have unit norm")
    for img in phi.basis_images:
        if abs(bilinear(g, img)) > tol:
            raise AlgebraError("g is not orthogonal to the image of phi")
    cols = []
    for j in range(8):
        e = np.zeros(8)
        e[j] = 1.0
        x, y = AlgebraElement(H, e[:4]), AlgebraElement(H, e[4:])
        cols.append((phi(x) + phi(y) * g).coeffs)
    return Embedding.from_matrix(O, O, KR, np.array(cols).T)


def orthogonal_complement_unit(images: Sequence[AlgebraElement]) -> AlgebraElement:
    """First unit vector (in basis order) orthogonal over R to all given elements."""
    tag = images[0].tag
    frame = orthonormal_frame(images, KR)
    for j in range(tag.real_dimension):
        w = project_out(AlgebraElement.basis(tag, j), frame, KR)
        w = project_out(w, frame, KR)
        if w.norm() > 1e-6:
            return w.normalized()
    raise AlgebraError("images span the whole algebra")


def random_orthonormal_pair(
    field: GroundField, tag: AlgebraTag, rng: np.random.Generator
) -> tuple[AlgebraElement, AlgebraElement]:
    u = random_unit_pure(field, tag, rng)
    while True:
        v = project_out(random_unit_pure(field, tag, rng), [u], field)
        if v.norm() > 1e-3:
            return u, v.normalized()


def random_embedding(
    source: AlgebraTag, target: AlgebraTag, field: GroundField, rng: np.random.Generator
) -> Embedding:
    basis = field.pure_basis(source)
    b, d = random_orthonormal_pair(field, target, rng)
    return embed(basis[0], basis[1], b, d, field)


def random_automorphism(tag: AlgebraTag, field: GroundField, rng: np.random.Generator) -> Embedding:
    """Random element of Aut_k(tag), built from embed (and doubling for G2)."""
    if field.k_dimension(tag) == 4:
        return random_embedding(tag, tag, field, rng)
    if tag == O and field == KR:
        phi = random_embedding(H, O, KR, rng)
        g = orthogonal_complement_unit(phi.basis_images)
        # rotate g randomly inside the complement of im(phi)
        frame = orthonormal_frame(list(phi.basis_images), KR)
        v = project_out(random_element(O, rng), frame, KR)
        v = project_out(v, frame, KR)
        g = v.normalized() if v.norm() > 1e-6 else g
        return extend_to_automorphism(phi, g)
    if field.k_dimension(tag) == 1:
        return Embedding.identity(tag, field)
    raise AlgebraError(f"no automorphism generator for {tag} over k={field.name}")
