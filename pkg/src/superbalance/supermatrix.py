"""Graded matrices over a Grassmann algebra.

A ``SuperMatrix`` with block dims ``(p, q)`` is a ``(p+q) x (p+q)`` array of
multivectors; rows/columns ``0..p-1`` are even and ``p..p+q-1`` odd.  It is
homogeneous (an even supermatrix) when the diagonal blocks hold even
elements and the off-diagonal blocks odd ones.

The adjoint puts ``-i`` on the off-diagonal blocks,

    dagger((a, alpha), (beta, b)) = ((conj a, -i conj beta), (-i conj alpha, conj b)),

which for (1|1) is exactly the unitary-group adjoint preserving
``z zbar + i theta thetabar``.  For larger blocks the same rule is applied
blockwise; it stays anti-multiplicative on homogeneous matrices.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grassmann import (
    AlgebraContext,
    ContextMismatch,
    GrassmannError,
    Multivector,
    NonInvertible,
    ParityError,
    conjugate,
    invert,
    require_odd,
)


class ShapeMismatch(GrassmannError, ValueError):
    code = "shape_mismatch"


@dataclass(frozen=True, eq=False)
class SuperMatrix:
    context: AlgebraContext
    p: int
    q: int
    entries: tuple

    def __post_init__(self):
        n = self.p + self.q
        rows = tuple(tuple(r) for r in self.entries)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ShapeMismatch(f"expected {n}x{n} entries for block dims ({self.p}|{self.q})")
        for r in rows:
            for e in r:
                if not isinstance(e, Multivector):
                    raise TypeError("entries must be Multivector instances")
                if e.context != self.context:
                    raise ContextMismatch("entry context differs from matrix context")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_rows(cls, p: int, q: int, rows: Sequence[Sequence], context: AlgebraContext | None = None):
        """Build from rows whose items may be multivectors or plain numbers."""
        if context is None:
            context = next(e.context for r in rows for e in r if isinstance(e, Multivector))
        conv = [[e if isinstance(e, Multivector) else context.scalar(e) for e in r] for r in rows]
        return cls(context, p, q, conv)

    @classmethod
    def identity(cls, context: AlgebraContext, p: int, q: int):
        n = p + q
        return cls.from_rows(p, q, [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)], context)

    @property
    def size(self) -> int:
        return self.p + self.q

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def is_odd_index(self, i: int) -> bool:
        return i >= self.p

    def is_homogeneous(self) -> bool:
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                want = self.is_odd_index(i) != self.is_odd_index(j)
                if e.is_zero():
                    continue
                if e.parity() != int(want):
                    return False
        return True

    def block(self, name: str) -> list[list[Multivector]]:
        p, n = self.p, self.size
        rows, cols = {"A": (range(p), range(p)), "B": (range(p), range(p, n)),
                      "C": (range(p, n), range(p)), "D": (range(p, n), range(p, n))}[name]
        return [[self.entries[i][j] for j in cols] for i in rows]

    def body(self) -> np.ndarray:
        return np.array([[e.body() for e in r] for r in self.entries], dtype=complex).reshape(self.size, self.size)

    def max_abs_diff(self, other: SuperMatrix) -> float:
        _check_compatible(self, other)
        return max(((a - b).max_abs() for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb)),
                   default=0.0)

    def __matmul__(self, other):
        return matmul(self, other)


def _check_compatible(g1: SuperMatrix, g2: SuperMatrix):
    if g1.context != g2.context:
        raise ContextMismatch("supermatrices live over different algebras")
    if (g1.p, g1.q) != (g2.p, g2.q):
        raise ShapeMismatch(f"block dims ({g1.p}|{g1.q}) vs ({g2.p}|{g2.q})")


def _matmul_entries(a, b, ctx):
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    zero = ctx.zero()
    return [[sum((a[i][l] * b[l][j] for l in range(k)), zero) for j in range(m)] for i in range(n)]


def matmul(g1: SuperMatrix, g2: SuperMatrix) -> SuperMatrix:
    _check_compatible(g1, g2)
    return SuperMatrix(g1.context, g1.p, g1.q, _matmul_entries(g1.entries, g2.entries, g1.context))


# --------------------------------------------------------------------------
# determinants over the (commutative) even subalgebra


def _det_cofactor(m, ctx):
    n = len(m)
    if n == 0:
        return ctx.one()
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    out = ctx.zero()
    for j in range(n):
        if m[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det_cofactor(minor, ctx)
        out = out + term if j % 2 == 0 else out - term
    return out


def _det_bird(m, ctx):
    """Division-free determinant (R. Bird, 2011) for commutative entries."""
    n = len(m)
    x = [row[:] for row in m]
    for _ in range(n - 1):
        mu = [[ctx.zero()] * n for _ in range(n)]
        acc = ctx.zero()
        for i in range(n - 1, -1, -1):
            mu[i][i] = -acc
            acc = acc + x[i][i]
            for j in range(i + 1, n):
                mu[i][j] = x[i][j]
        x = _matmul_entries(mu, m, ctx)
    return x[0][0] if n % 2 == 1 else -x[0][0]


def even_det(m: Sequence[Sequence[Multivector]], ctx: AlgebraContext) -> Multivector:
    """Determinant of a square matrix of even elements."""
    for row in m:
        for e in row:
            if not e.is_even():
                raise ParityError("determinant requires even entries")
    m = [list(r) for r in m]
    if len(m) <= 4:
        return _det_cofactor(m, ctx)
    return _det_bird(m, ctx)


def even_inverse(m: Sequence[Sequence[Multivector]], ctx: AlgebraContext):
    """Inverse of a square Grassmann-valued matrix with invertible body matrix.

    Neumann series ``sum_k (-D0^-1 N)^k D0^-1`` on the body/soul split; the
    series stops once a power vanishes.
    """
    n = len(m)
    d0 = np.array([[e.body() for e in r] for r in m], dtype=complex).reshape(n, n)
    if n and abs(np.linalg.det(d0)) <= ctx.zero_tolerance:
        raise NonInvertible("odd-odd block has singular body; Berezinian undefined")
    d0inv = np.linalg.inv(d0) if n else d0
    inv0 = [[ctx.scalar(d0inv[i, j]) for j in range(n)] for i in range(n)]
    soul = [[m[i][j].soul() for j in range(n)] for i in range(n)]
    step = [[-x for x in row] for row in _matmul_entries(inv0, soul, ctx)]
    total = [[ctx.one() if i == j else ctx.zero() for j in range(n)] for i in range(n)]
    power = [r[:] for r in total]
    while True:
        power = _matmul_entries(power, step, ctx)
        if all(e.is_zero() for r in power for e in r):
            break
        total = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(total, power)]
    return _matmul_entries(total, inv0, ctx)


def berezinian(g: SuperMatrix) -> Multivector:
    """Superdeterminant ``det(A - B D^-1 C) / det(D)``.

    For (1|1) this is ``z1/z2 - theta1 theta2 / z2**2``, the multiplicative
    choice.
    """
    ctx = g.context
    a, b, c, d = (g.block(k) for k in "ABCD")
    dinv = even_inverse(d, ctx)
    if g.p:
        bdc = _matmul_entries(_matmul_entries(b, dinv, ctx), c, ctx) if g.q else [[ctx.zero()] * g.p for _ in range(g.p)]
        schur = [[a[i][j] - bdc[i][j] for j in range(g.p)] for i in range(g.p)]
        top = even_det(schur, ctx)
    else:
        top = ctx.one()
    return top * invert(even_det(d, ctx))


def dagger(g: SuperMatrix) -> SuperMatrix:
    n = g.size
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            e = conjugate(g.entries[j][i])
            if g.is_odd_index(i) != g.is_odd_index(j):
                e = e * -1j
            row.append(e)
        rows.append(row)
    return SuperMatrix(g.context, g.p, g.q, rows)


@dataclass(frozen=True)
class UnitarityReport:
    residual: float
    unitary: bool


def is_unitary(g: SuperMatrix, tol: float = 1e-12) -> UnitarityReport:
    res = matmul(dagger(g), g).max_abs_diff(SuperMatrix.identity(g.context, g.p, g.q))
    return UnitarityReport(residual=res, unitary=res <= tol)


def u11_element(psi: float, gamma: Multivector) -> SuperMatrix:
    """Element of U(1|1) parametrised by a real phase and an odd element.

    ``((1 - i/2 g gbar, i e^{i psi} gbar), (g, e^{i psi}(1 + i/2 g gbar)))``.
    The upper-right sign is the one for which ``dagger(U) U = 1``.
    """
    require_odd(gamma, "gamma")
    ctx = gamma.context
    gg = gamma * conjugate(gamma)
    ph = cmath.exp(1j * float(psi))
    rows = [[1 - 0.5j * gg, conjugate(gamma) * (1j * ph)],
            [gamma, (1 + 0.5j * gg) * ph]]
    return SuperMatrix(ctx, 1, 1, rows)


@dataclass(frozen=True)
class SL11Report:
    berezinian: Multivector
    berezinian_residual: float
    constraint_residual: float
    member: bool


def sl11_check(g: SuperMatrix, tol: float = 1e-12) -> SL11Report:
    """Membership test for SL(1|1).

    Reports ``|Ber(g) - 1|`` and the equivalent polynomial constraint
    ``z1 - z2 - theta1 theta2 / z2``.
    """
    if (g.p, g.q) != (1, 1):
        raise ShapeMismatch("sl11_check needs a (1|1) matrix")
    ber = berezinian(g)
    z1, t1 = g.entries[0]
    t2, z2 = g.entries[1]
    constraint = z1 - z2 - t1 * t2 * invert(z2)
    r1 = (ber - 1).max_abs()
    r2 = constraint.max_abs()
    return SL11Report(ber, r1, r2, max(r1, r2) <= tol)


def act(g: SuperMatrix, pt):
    """Linear action of a ``(p+1|q)`` supermatrix on homogeneous coordinates."""
    from .projective import ProjectivePoint

    if g.context != pt.context:
        raise ContextMismatch("matrix and point live over different algebras")
    if (g.p, g.q) != (pt.p + 1, pt.q):
        raise ShapeMismatch(f"need a ({pt.p + 1}|{pt.q}) matrix for a point of P^{pt.p}|{pt.q}")
    coords = list(pt.even) + list(pt.odd)
    zero = g.context.zero()
    new = [sum((g.entries[i][j] * coords[j] for j in range(g.size)), zero) for i in range(g.size)]
    return ProjectivePoint(g.context, new[: g.p], new[g.p:])
