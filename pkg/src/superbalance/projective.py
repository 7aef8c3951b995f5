"""Points of super projective space ``P^{p|q}`` over a Grassmann algebra.

A point is a tuple of ``p+1`` even and ``q`` odd homogeneous coordinates,
at least one even coordinate having non-zero body, taken modulo rescaling
by invertible even elements.  Affine charts are derived views obtained by
dividing by an invertible coordinate.
"""
from __future__ import annotations

from dataclasses import dataclass

from .grassmann import (
    AlgebraContext,
    ContextMismatch,
    GrassmannError,
    Multivector,
    NonInvertible,
    ParityError,
    conjugate,
    invert,
)
from .supermatrix import SuperMatrix

PROJECTIVE_TOLERANCE = 1e-10


class InvalidPoint(GrassmannError, ValueError):
    code = "invalid_point"


class ChartUndefined(NonInvertible):
    code = "chart_undefined"


def _coerce(ctx, values):
    return tuple(v if isinstance(v, Multivector) else ctx.scalar(v) for v in values)


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    context: AlgebraContext
    even: tuple
    odd: tuple
    check: bool = True

    def __post_init__(self):
        even = _coerce(self.context, self.even)
        odd = _coerce(self.context, self.odd)
        object.__setattr__(self, "even", even)
        object.__setattr__(self, "odd", odd)
        if any(v.context != self.context for v in even + odd):
            raise ContextMismatch("coordinate context differs from point context")
        if not self.check:
            return
        if not even:
            raise InvalidPoint("need at least one even coordinate")
        for v in even:
            if not v.is_even():
                raise ParityError("even homogeneous coordinates must be even elements")
        for v in odd:
            if not v.is_odd():
                raise ParityError("odd homogeneous coordinates must be odd elements")
        if not self.has_invertible_coordinate():
            raise InvalidPoint("all even coordinates lie in the non-invertible set B")

    @property
    def p(self) -> int:
        return len(self.even) - 1

    @property
    def q(self) -> int:
        return len(self.odd)

    def has_invertible_coordinate(self) -> bool:
        tol = self.context.zero_tolerance
        return any(abs(z.body()) > tol for z in self.even)

    def scaled(self, lam: Multivector) -> ProjectivePoint:
        return ProjectivePoint(self.context, [lam * z for z in self.even], [lam * t for t in self.odd], check=False)

    def best_chart(self) -> int:
        bodies = [abs(z.body()) for z in self.even]
        return max(range(len(bodies)), key=bodies.__getitem__)


@dataclass(frozen=True, eq=False)
class AffineChartPoint:
    """Affine coordinates in chart ``chart``; ``xi[chart]`` is identically 1."""

    context: AlgebraContext
    chart: int
    xi: tuple
    theta: tuple

    def to_projective(self) -> ProjectivePoint:
        return ProjectivePoint(self.context, self.xi, self.theta)

    def max_abs_diff(self, other: AffineChartPoint) -> float:
        if self.chart != other.chart or len(self.xi) != len(other.xi) or len(self.theta) != len(other.theta):
            return float("inf")
        pairs = list(zip(self.xi, other.xi)) + list(zip(self.theta, other.theta))
        return max(((a - b).max_abs() for a, b in pairs), default=0.0)


def normalize(pt: ProjectivePoint, i: int) -> AffineChartPoint:
    """Divide all homogeneous coordinates by ``z_i``."""
    zi = pt.even[i]
    try:
        inv = invert(zi)
    except NonInvertible as exc:
        raise ChartUndefined(f"chart {i} undefined: z_{i} has zero body") from exc
    xi = [z * inv for z in pt.even]
    xi[i] = pt.context.one()
    return AffineChartPoint(pt.context, i, tuple(xi), tuple(t * inv for t in pt.odd))


def change_chart(ap: AffineChartPoint, j: int) -> AffineChartPoint:
    """``Xi^(j)_l = Xi^(i)_l / Xi^(i)_j`` and ``Theta^(j) = Theta^(i) / Xi^(i)_j``."""
    try:
        inv = invert(ap.xi[j])
    except NonInvertible as exc:
        raise ChartUndefined(f"cannot pass from chart {ap.chart} to chart {j}: pivot not invertible") from exc
    xi = [x * inv for x in ap.xi]
    xi[j] = ap.context.one()
    return AffineChartPoint(ap.context, j, tuple(xi), tuple(t * inv for t in ap.theta))


def projectively_equal(a: ProjectivePoint, b: ProjectivePoint, tol: float = PROJECTIVE_TOLERANCE) -> bool:
    """True iff ``b = lam * a`` for some invertible even ``lam``."""
    if a.context != b.context:
        raise ContextMismatch("points live over different algebras")
    if (a.p, a.q) != (b.p, b.q):
        return False
    if not (a.has_invertible_coordinate() and b.has_invertible_coordinate()):
        return False
    i = a.best_chart()
    try:
        na, nb = normalize(a, i), normalize(b, i)
    except ChartUndefined:
        return False
    return na.max_abs_diff(nb) <= tol


def super_norm(pt: ProjectivePoint) -> Multivector:
    """``sum z_i conj(z_i) + i sum theta_A conj(theta_A)``; real for every point."""
    out = pt.context.zero()
    for z in pt.even:
        out = out + z * conjugate(z)
    for t in pt.odd:
        out = out + (t * conjugate(t)) * 1j
    return out


def evaluate_constraint(pt: ProjectivePoint, r) -> Multivector:
    return super_norm(pt) - r


def fs_b_matrix(pt: ProjectivePoint) -> SuperMatrix:
    """Matrix of ``s_A conj(s_B) / |s|^2`` with an extra ``i`` in the odd-odd block.

    Entries are ordered even coordinates first.  Under the conjugation
    convention of :mod:`grassmann` both diagonal blocks are Hermitian, so
    ``i * sum_I B_II`` enters the trace with the right sign:
    ``sum_i B_ii + sum_I B_II = 1``.
    """
    norm = super_norm(pt)
    if norm.body().real <= 0:
        raise InvalidPoint("super norm must have positive body")
    inv = invert(norm)
    coords = list(pt.even) + list(pt.odd)
    conj = [conjugate(c) for c in coords]
    n_even = len(pt.even)
    rows = []
    for i, ci in enumerate(coords):
        row = []
        for k, ck in enumerate(conj):
            e = ci * ck * inv
            if i >= n_even and k >= n_even:
                e = e * 1j
            row.append(e)
        rows.append(row)
    return SuperMatrix(pt.context, n_even, len(pt.odd), rows)


def fs_potential(ap: AffineChartPoint) -> Multivector:
    """Kahler potential ``sum_l |Xi_l|^2 + i sum Theta conj(Theta)`` (with ``Xi_chart = 1``)."""
    return super_norm(ProjectivePoint(ap.context, ap.xi, ap.theta))


def _as_projective(pt) -> ProjectivePoint:
    return pt.to_projective() if isinstance(pt, AffineChartPoint) else pt


def veronese_map(m: int, pt) -> ProjectivePoint:
    """Evaluate the degree-``m`` section basis of ``P^{1|2}``.

    Even outputs: ``z0^a z1^(m-a)`` for ``a = 0..m``, then
    ``z0^a z1^(m-a-2) theta1 theta2`` for ``a = 0..m-2``.  Odd outputs:
    ``z0^a z1^(m-a-1) theta_I`` for ``a = 0..m-1`` and ``I = 1, 2``.
    The image lies in ``P^{2m-1|2m}``.
    """
    pt = _as_projective(pt)
    if m < 2:
        raise ValueError("veronese_map needs m >= 2")
    if (pt.p, pt.q) != (1, 2):
        raise ValueError("veronese_map is defined on P^{1|2}")
    z0, z1 = pt.even
    t1, t2 = pt.odd
    ctx = pt.context

    def mono(a, b):
        return (z0 ** a) * (z1 ** b)

    even = [mono(a, m - a) for a in range(m + 1)]
    t12 = t1 * t2
    even += [mono(a, m - a - 2) * t12 for a in range(m - 1)]
    odd = []
    for a in range(m):
        base = mono(a, m - a - 1)
        odd += [base * t1, base * t2]
    return ProjectivePoint(ctx, even, odd, check=pt.check)


def section_fs_potential(m: int, pt) -> Multivector:
    """Potential ``sum |even sections|^2 + i sum |odd sections|^2`` of the degree-``m`` embedding."""
    return super_norm(veronese_map(m, pt))
