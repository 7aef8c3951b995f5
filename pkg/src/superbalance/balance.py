"""Moment-map matrices and balancing for point and Calabi-Yau embeddings.

Point case: a morphism ``C^{0|n} -> P^{1|n}`` is given by even ``X_0, X_1``
and odd ``Theta_1..Theta_n`` in the algebra generated by ``eta_i`` and
``etabar_i``.  Its moment matrix is the Berezin integral of
``X_i conj(X_j) / (|X_0|^2 + |X_1|^2 + i sum Theta conj(Theta))``.

Calabi-Yau case: the degree-``m`` monomial sections of P^{1|2}, each with a
positive scaling, are integrated against the super Calabi-Yau measure
(see :mod:`integrate`).

In both cases the trace of the B-matrix is identically 1, whose Berezin
integral is 0, so a balanced embedding with as many even as odd sections
must have ``lam = -eta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grassmann import (
    AlgebraContext,
    GrassmannError,
    Multivector,
    MultivectorArray,
    NonInvertible,
    conjugate,
    invert,
)
from .integrate import (
    CY_CONTEXT,
    DEFAULT_SPEC,
    QuadratureSpec,
    berezin_point_integrate,
    cy_top_component,
    density_factor,
    plane_quadrature,
)


class BalanceError(GrassmannError, ValueError):
    code = "balance_error"


WEIGHTS = ("none", "exp")


# --------------------------------------------------------------------------
# point embeddings


@dataclass(frozen=True, eq=False)
class PointEmbedding:
    n: int
    X: tuple
    Theta: tuple

    def __post_init__(self):
        X, Theta = tuple(self.X), tuple(self.Theta)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Theta", Theta)
        if len(X) != 2:
            raise BalanceError("a point embedding has exactly two even coordinates")
        if len(Theta) != self.n:
            raise BalanceError(f"expected {self.n} odd coordinates, got {len(Theta)}")
        ctx = X[0].context
        if ctx.n_pairs != self.n or any(v.context != ctx for v in X + Theta):
            raise BalanceError("coordinates must live in the algebra with n conjugate pairs")
        if not all(x.is_even() for x in X) or not all(t.is_odd() for t in Theta):
            raise BalanceError("X must be even and Theta odd")
        if all(abs(x.body()) <= ctx.zero_tolerance for x in X):
            raise NonInvertible("both X have zero body; the point lies in B")

    @property
    def context(self) -> AlgebraContext:
        return self.X[0].context

    @classmethod
    def from_parameters(cls, alpha, alpha_tilde=(0.0, 0.0), sigma=None, n: int = 2):
        """``X_I = alpha_I + alpha_tilde_I eta_1 eta_2`` and ``Theta_i = sum_j sigma_ij eta_j``."""
        ctx = AlgebraContext(n)
        sigma = np.zeros((n, n)) if sigma is None else np.asarray(sigma, dtype=complex)
        if sigma.shape != (n, n):
            raise BalanceError(f"sigma must be {n}x{n}")
        if n >= 2:
            u = ctx.eta(1) * ctx.eta(2)
        elif any(a != 0 for a in alpha_tilde):
            raise BalanceError("alpha_tilde needs n >= 2")
        else:
            u = ctx.zero()
        X = [ctx.scalar(a) + u * complex(at) for a, at in zip(alpha, alpha_tilde)]
        Theta = [sum((ctx.eta(j + 1) * sigma[i, j] for j in range(n)), ctx.zero()) for i in range(n)]
        return cls(n, X, Theta)

    def alpha(self) -> np.ndarray:
        return np.array([x.body() for x in self.X])

    def alpha_tilde(self) -> np.ndarray:
        mask = 0b11  # eta_1 eta_2
        return np.array([x.coefficient(mask) for x in self.X])

    def sigma(self) -> np.ndarray:
        """Linear part of Theta; raises if Theta has higher-order terms."""
        n = self.n
        out = np.zeros((n, n), dtype=complex)
        for i, t in enumerate(self.Theta):
            for mask, c in t.items():
                if mask >= (1 << n) or bin(mask).count("1") != 1:
                    raise BalanceError("Theta is not linear in eta")
                out[i, mask.bit_length() - 1] = c
        return out

    def with_phase(self, phase: complex) -> PointEmbedding:
        return PointEmbedding(self.n, self.X, [t * phase for t in self.Theta])


def _point_denominator_inverse(e: PointEmbedding) -> Multivector:
    d = e.context.zero()
    for x in e.X:
        d = d + x * conjugate(x)
    for t in e.Theta:
        d = d + (t * conjugate(t)) * 1j
    if d.body().real <= 0:
        raise NonInvertible("denominator |X|^2 + i Theta conj(Theta) has zero body")
    return invert(d)


def point_b_matrix(e: PointEmbedding) -> list[list[Multivector]]:
    """The 2x2 Grassmann-valued integrand before Berezin integration."""
    inv = _point_denominator_inverse(e)
    return [[xi * conjugate(xj) * inv for xj in e.X] for xi in e.X]


def _check_weight(weight):
    if weight not in WEIGHTS:
        raise BalanceError(f"unknown weight {weight!r}; expected one of {WEIGHTS}")


def moment_matrix_point(e: PointEmbedding, weight: str = "none") -> np.ndarray:
    _check_weight(weight)
    b = point_b_matrix(e)
    return np.array([[berezin_point_integrate(b[i][j], weight, e.Theta) for j in range(2)] for i in range(2)])


def su_block_point(e: PointEmbedding, k: int, l: int, weight: str = "none") -> complex:
    """Odd-block entry ``int i Theta_k conj(Theta_l) / (...)``."""
    _check_weight(weight)
    inv = _point_denominator_inverse(e)
    f = e.Theta[k] * conjugate(e.Theta[l]) * inv * 1j
    return berezin_point_integrate(f, weight, e.Theta)


def su_block_matrix(e: PointEmbedding, weight: str = "none") -> np.ndarray:
    return np.array([[su_block_point(e, k, l, weight) for l in range(e.n)] for k in range(e.n)])


@dataclass
class BalanceReport:
    even_block: np.ndarray
    odd_block: np.ndarray
    mixed_max: float
    lam: complex
    eta: complex
    even_residual: float
    odd_residual: float
    even_hermiticity: float
    odd_hermiticity: float
    odd_antipattern: float
    equal_counts: bool
    lam_plus_eta: complex | None
    converged: bool | None = None
    iterations: int | None = None
    trace: list = field(default_factory=list)
    note: str = ""

    @property
    def residual(self) -> float:
        return max(self.even_residual, self.odd_residual)

    def to_dict(self) -> dict:
        def cplx(a):
            a = np.asarray(a)
            return {"re": a.real.tolist(), "im": a.imag.tolist()}

        out = {
            "even_block": cplx(self.even_block),
            "odd_block": cplx(self.odd_block),
            "mixed_max": self.mixed_max,
            "lambda": cplx(self.lam),
            "eta": cplx(self.eta),
            "even_residual": self.even_residual,
            "odd_residual": self.odd_residual,
            "residual": self.residual,
            "even_hermiticity": self.even_hermiticity,
            "odd_hermiticity": self.odd_hermiticity,
            "odd_antipattern": self.odd_antipattern,
            "equal_counts": self.equal_counts,
            "lambda_plus_eta": None if self.lam_plus_eta is None else cplx(self.lam_plus_eta),
        }
        if self.converged is not None:
            out["converged"] = self.converged
            out["iterations"] = self.iterations
            out["trace"] = self.trace
        if self.note:
            out["note"] = self.note
        return out


def _fit(block: np.ndarray):
    n = block.shape[0]
    if n == 0:
        return 0j, 0.0
    lam = complex(np.mean(np.diag(block)))
    return lam, float(np.max(np.abs(block - lam * np.eye(n))))


def make_report(even: np.ndarray, odd: np.ndarray, mixed_max: float = 0.0) -> BalanceReport:
    """Fit ``lam``, ``eta`` by diagonal means and measure deviations.

    ``odd`` carries the factor ``i``; the anti-pattern ``conj(M_IK) = -M_KI``
    is checked on ``-i * odd``.
    """
    even = np.asarray(even, dtype=complex)
    odd = np.asarray(odd, dtype=complex)
    lam, er = _fit(even)
    eta, orr = _fit(odd)
    stripped = -1j * odd
    equal = even.shape[0] == odd.shape[0]
    return BalanceReport(
        even_block=even,
        odd_block=odd,
        mixed_max=float(mixed_max),
        lam=lam,
        eta=eta,
        even_residual=er,
        odd_residual=orr,
        even_hermiticity=float(np.max(np.abs(even - even.conj().T), initial=0.0)),
        odd_hermiticity=float(np.max(np.abs(odd - odd.conj().T), initial=0.0)),
        odd_antipattern=float(np.max(np.abs(stripped.conj() + stripped.T), initial=0.0)),
        equal_counts=equal,
        lam_plus_eta=lam + eta if equal else None,
    )


def balance_residual_points(es: Sequence[PointEmbedding], weight: str = "none") -> BalanceReport:
    es = list(es)
    if not es:
        raise BalanceError("need at least one point")
    n = es[0].n
    if any(e.n != n for e in es):
        raise BalanceError("all points must share the odd dimension n")
    even = sum(moment_matrix_point(e, weight) for e in es)
    odd = sum(su_block_matrix(e, weight) for e in es)
    return make_report(even, odd)


@dataclass
class PointSolution:
    embedding: PointEmbedding
    alpha_tilde: np.ndarray
    det_sigma_sq: float
    report: BalanceReport


def solve_point_balance(e0: PointEmbedding, tol: float = 1e-10) -> PointSolution:
    """Balance a single ``n = 2`` point at ``[1:0]`` by choosing ``alpha_tilde``.

    Exact expansion at ``alpha = (a0, 0)`` gives a diagonal matrix
    ``diag(u|at1|^2 - 2u^2 d, -u|at1|^2)`` with ``u = 1/|a0|^2`` and
    ``d = |det sigma|^2``, so balance forces ``|at1|^2 = u d`` and
    ``lam = -u^2 d``; ``at0`` drops out.  We take ``at0 = sqrt(d)``, which
    also satisfies the published condition ``Re(at0^2) = d``, and
    ``at1 = sqrt(u d)``, both real and non-negative.
    """
    if e0.n != 2:
        raise BalanceError("solve_point_balance handles n = 2 only")
    alpha = e0.alpha()
    if abs(alpha[1]) > e0.context.zero_tolerance or abs(alpha[0]) <= e0.context.zero_tolerance:
        raise BalanceError("point must be [a0 : 0] with a0 != 0")
    sigma = e0.sigma()
    d = float(abs(np.linalg.det(sigma)) ** 2)
    ups = 1.0 / abs(alpha[0]) ** 2
    at = np.array([math.sqrt(d), math.sqrt(ups * d)])
    e = PointEmbedding.from_parameters(alpha, at, sigma)
    report = balance_residual_points([e])
    report.converged = report.even_residual <= tol
    report.iterations = 0
    if not report.converged:
        report.note = "exact-oracle verification failed"
    return PointSolution(e, at, d, report)


# --------------------------------------------------------------------------
# Calabi-Yau blocks on P^{1|2}


@dataclass(frozen=True)
class SectionScaling:
    """Positive multipliers for the degree-``m`` sections.

    ``even`` lists the ``m+1`` pure monomials then the ``m-1``
    ``theta1 theta2`` monomials; ``odd`` lists ``z0^a z1^(m-a-1) theta_I``
    ordered by ``a`` then ``I``.
    """

    m: int
    even: tuple
    odd: tuple

    def __post_init__(self):
        even = tuple(float(c) for c in self.even)
        odd = tuple(float(c) for c in self.odd)
        object.__setattr__(self, "even", even)
        object.__setattr__(self, "odd", odd)
        if self.m < 2:
            raise BalanceError("m must be >= 2")
        if len(even) != 2 * self.m or len(odd) != 2 * self.m:
            raise BalanceError(f"m={self.m} needs {2 * self.m} even and {2 * self.m} odd scalings")
        if any(not c > 0 for c in even + odd):
            raise BalanceError("scalings must be positive")

    @classmethod
    def unit(cls, m: int):
        return cls(m, [1.0] * (2 * m), [1.0] * (2 * m))

    def to_dict(self):
        return {"m": self.m, "even": list(self.even), "odd": list(self.odd)}


def cy_sections(s: SectionScaling, z: np.ndarray):
    """Scaled sections on the chart ``z0 = 1`` as arrays over the nodes ``z``."""
    m = s.m
    ctx = CY_CONTEXT
    t1, t2 = ctx.generator(0), ctx.generator(1)
    t12 = t1 * t2

    def field_(power, coeff, mv=None):
        vals = coeff * z ** power
        if mv is None:
            return MultivectorArray.scalar_field(ctx, vals)
        return MultivectorArray.constant(mv, z.shape) * vals

    even = [field_(m - a, s.even[a]) for a in range(m + 1)]
    even += [field_(m - a - 2, s.even[m + 1 + a], t12) for a in range(m - 1)]
    odd = []
    for a in range(m):
        for i, t in enumerate((t1, t2)):
            odd.append(field_(m - a - 1, s.odd[2 * a + i], t))
    return even, odd


def _cy_entry_fields(s: SectionScaling, z, pairs):
    even, odd = cy_sections(s, z)
    secs = even + odd
    n_even = len(even)
    norm = MultivectorArray.scalar_field(CY_CONTEXT, np.zeros(z.shape))
    for sec in even:
        norm = norm + sec * sec.conjugate()
    for sec in odd:
        norm = norm + (sec * sec.conjugate()) * 1j
    inv = norm.invert()
    scaled = {}
    out = []
    for a, b in pairs:
        if a not in scaled:
            scaled[a] = secs[a] * inv
        e = scaled[a] * secs[b].conjugate()
        if a >= n_even and b >= n_even:
            e = e * 1j
        out.append(e)
    return out


def cy_entries(s: SectionScaling, pairs, spec: QuadratureSpec = DEFAULT_SPEC, density: str = "invariant"):
    """Integrated B-matrix entries for the listed index pairs."""
    pairs = list(pairs)

    def f(z):
        fields = _cy_entry_fields(s, z, pairs)
        dens = density_factor(z, density)
        return np.stack([cy_top_component(fl) * dens for fl in fields])

    return np.asarray(plane_quadrature(f, spec), dtype=complex).reshape(len(pairs))


def mv_blocks_cy(m: int = 2, s: SectionScaling | None = None, spec: QuadratureSpec = DEFAULT_SPEC,
                 density: str = "invariant") -> BalanceReport:
    s = SectionScaling.unit(m) if s is None else s
    if s.m != m:
        raise BalanceError("scaling was built for a different m")
    n = 4 * m
    ne = 2 * m
    vals = cy_entries(s, [(a, b) for a in range(n) for b in range(n)], spec, density)
    full = vals.reshape(n, n)
    mixed = max(np.max(np.abs(full[:ne, ne:])), np.max(np.abs(full[ne:, :ne])))
    return make_report(full[:ne, :ne], full[ne:, ne:], mixed)


def _diag_values(s, spec, density):
    n = 4 * s.m
    return cy_entries(s, [(a, a) for a in range(n)], spec, density).real


def solve_cy_balance(m: int = 2, spec: QuadratureSpec = DEFAULT_SPEC, scaling: SectionScaling | None = None,
                     max_iter: int = 500, tol: float = 1e-6, density: str = "invariant"):
    """Fixed-point rescaling ``c_l <- c_l / sqrt(|B_ll| / mean_block |B|)``.

    Stops when the block residual is below ``tol``, after ``max_iter``
    steps, or once the scalings stop moving (a fixed point of the update
    that is not balanced, e.g. when a block's diagonal has mixed signs).
    Returns ``(scaling, report)``; non-convergence is reported, not raised.
    """
    s = SectionScaling.unit(m) if scaling is None else scaling
    ne = 2 * m
    trace = []
    converged = False
    reason = "max_iter"
    it = 0
    while True:
        diag = _diag_values(s, spec, density)
        de, do = diag[:ne], diag[ne:]
        res = max(float(np.max(np.abs(de - de.mean()))), float(np.max(np.abs(do - do.mean()))))
        trace.append({"iteration": it, "residual": res,
                      "even_diag": de.tolist(), "odd_diag": do.tolist()})
        if res <= tol:
            converged = True
            reason = "converged"
            break
        if it >= max_iter:
            break
        ce = np.array(s.even) / np.sqrt(np.abs(de) / np.mean(np.abs(de)))
        co = np.array(s.odd) / np.sqrt(np.abs(do) / np.mean(np.abs(do)))
        norm = ce[0]
        ce, co = ce / norm, co / norm
        step = max(np.max(np.abs(np.log(ce / np.array(s.even)))), np.max(np.abs(np.log(co / np.array(s.odd)))))
        s = SectionScaling(m, ce, co)
        it += 1
        if step <= 1e-13:
            reason = "stalled"
            diag = _diag_values(s, spec, density)
            de, do = diag[:ne], diag[ne:]
            res = max(float(np.max(np.abs(de - de.mean()))), float(np.max(np.abs(do - do.mean()))))
            trace.append({"iteration": it, "residual": res, "even_diag": de.tolist(), "odd_diag": do.tolist()})
            converged = res <= tol
            break
    report = mv_blocks_cy(m, s, spec, density)
    report.converged = converged
    report.iterations = it
    report.trace = trace
    if not converged:
        report.note = (f"no balanced scaling found ({reason}); final diagonal residual {trace[-1]['residual']:.3e}")
    return s, report
