"""Berezin extraction combined with quadrature over the complex plane.

Plane integrals use the substitution ``t = r^2/(1+r^2)``, so that
``dA = r dr dphi = dt dphi / (2 (1-t)^2)``, with Gauss-Legendre nodes in
``t`` and the periodic trapezoid rule in ``phi``.  The trapezoid rule with
``n`` nodes integrates ``e^{ik phi}`` exactly for ``|k| < n``, which is what
makes off-diagonal phases vanish to rounding.

Convention constants used for the P^{1|2} measure (chart ``z0 = 1``):

* odd generators ``theta1, theta2, conj(theta1), conj(theta2)`` are
  generators 0, 1, 2, 3 of a two-pair algebra;
* ``eps_12 = +1``, so the contracted fourth derivative equals
  ``4 * berezin(F, [theta1, theta2, thetabar1, thetabar2])``;
* ``dz ^ dzbar`` is replaced by Lebesgue ``dA``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .grassmann import (
    AlgebraContext,
    GrassmannError,
    Multivector,
    MultivectorArray,
    analytic_apply,
    berezin,
    conjugate,
)

CY_CONTEXT = AlgebraContext(2)
CY_BEREZIN_ORDER = (0, 1, 2, 3)
EPSILON_12 = 1
CY_CONTRACTION_FACTOR = 4.0  # (eps d d)(eps dbar dbar) with eps_12 = +1

DENSITIES = ("invariant", "literal")


class QuadratureError(GrassmannError, ArithmeticError):
    code = "quadrature_failed"

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


@dataclass(frozen=True)
class QuadratureSpec:
    radial: int = 64
    angular: int = 64
    tol: float = 1e-8
    max_refinements: int = 3
    mapping: str = "t=r^2/(1+r^2)"

    def __post_init__(self):
        if self.radial < 4 or self.angular < 4:
            raise ValueError("node counts must be >= 4")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.max_refinements < 1:
            raise ValueError("need at least one refinement to estimate the error")

    def to_dict(self):
        return {"radial": self.radial, "angular": self.angular, "tol": self.tol}


DEFAULT_SPEC = QuadratureSpec()


def _nodes(nr: int, na: int):
    x, w = leggauss(nr)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w
    r = np.sqrt(t / (1.0 - t))
    jac = wt / (2.0 * (1.0 - t) ** 2)
    phi = 2.0 * np.pi * np.arange(na) / na
    z = r[:, None] * np.exp(1j * phi)[None, :]
    weights = jac[:, None] * np.full(na, 2.0 * np.pi / na)[None, :]
    return z, weights


def _rule(f, nr, na):
    z, w = _nodes(nr, na)
    vals = np.asarray(f(z), dtype=complex)
    return np.tensordot(vals, w, axes=([-2, -1], [0, 1])) if vals.ndim > 2 else np.sum(vals * w)


def _tail(f, na):
    # integrand mass beyond t = 1 - eps, estimated from the last strip
    phi = 2.0 * np.pi * np.arange(na) / na
    worst = 0.0
    for eps in (1e-10, 1e-12):
        t = 1.0 - eps
        r = math.sqrt(t / (1.0 - t))
        z = (r * np.exp(1j * phi))[None, :]
        vals = np.asarray(f(z), dtype=complex)
        g = np.mean(vals, axis=-1) * 2.0 * np.pi / (2.0 * eps ** 2)
        worst = max(worst, float(np.max(np.abs(g * eps))))
    return worst


def plane_quadrature(f: Callable, spec: QuadratureSpec = DEFAULT_SPEC, full_output: bool = False):
    """Integrate ``f`` over the complex plane against Lebesgue measure.

    ``f`` maps an array of complex points to values of the same shape, or to
    a stack ``(k, *shape)`` for several integrands at once.  Node counts are
    doubled until two successive results agree to ``spec.tol``.
    """
    trace = []
    tail = _tail(f, spec.angular)
    nr, na = spec.radial, spec.angular
    prev = _rule(f, nr, na)
    for _ in range(spec.max_refinements):
        nr, na = 2 * nr, 2 * na
        cur = _rule(f, nr, na)
        diff = float(np.max(np.abs(cur - prev)))
        trace.append({"radial": nr, "angular": na, "change": diff})
        if diff <= spec.tol and tail <= spec.tol:
            value = cur if np.ndim(cur) else complex(cur)
            info = {"error_estimate": diff, "tail_estimate": tail, "trace": trace}
            return (value, info) if full_output else value
        prev = cur
    raise QuadratureError(
        f"tolerance {spec.tol:g} not reached (last change {trace[-1]['change']:.3e}, tail {tail:.3e})", trace)


@dataclass
class SuperIntegrand:
    """Grassmann-valued function of the affine coordinate ``z``.

    ``func(z)`` receives a complex ndarray and returns a ``MultivectorArray``
    over :data:`CY_CONTEXT` with that batch shape (or a ``Multivector``,
    which is then taken as constant in ``z``).
    """

    func: Callable
    weight: str = "none"
    context: AlgebraContext = field(default=CY_CONTEXT)

    def __call__(self, z):
        out = self.func(z)
        if isinstance(out, Multivector):
            out = MultivectorArray.constant(out, np.shape(z))
        return out


def cy_top_component(values: MultivectorArray):
    """Contracted fourth theta-derivative at ``theta = 0``, as a scalar field."""
    return CY_CONTRACTION_FACTOR * values.berezin(CY_BEREZIN_ORDER).body()


def density_factor(z, density: str):
    if density == "invariant":
        return np.ones(np.shape(z))
    if density == "literal":
        return np.abs(z) ** 2
    raise ValueError(f"unknown density {density!r}; expected one of {DENSITIES}")


def cy_integrate_p12(F: SuperIntegrand | Callable, spec: QuadratureSpec = DEFAULT_SPEC, density: str = "invariant"):
    """Integrate a super-function over P^{1|2} with the Calabi-Yau measure.

    ``density="invariant"`` uses the chart density that is unchanged by
    ``z -> 1/z, theta -> theta/z``; ``"literal"`` multiplies by ``|z|^2``.
    """
    if not isinstance(F, SuperIntegrand):
        F = SuperIntegrand(F)
    density_factor(0.0, density)

    def scalar(z):
        return cy_top_component(F(z)) * density_factor(z, density)

    return plane_quadrature(scalar, spec)


def point_berezin_order(n: int) -> list[int]:
    """``[eta_1, etabar_1, ..., eta_n, etabar_n]`` as generator indices."""
    return [g for i in range(n) for g in (i, i + n)]


def exp_weight(theta: Sequence[Multivector]) -> Multivector:
    """``exp(i sum_j Theta_j conj(Theta_j))``."""
    ctx = theta[0].context
    s = ctx.zero()
    for t in theta:
        s = s + t * conjugate(t)
    return analytic_apply("exp", s * 1j)


def berezin_point_integrate(F: Multivector, weight: str = "none", theta: Sequence[Multivector] | None = None):
    """Top-monomial extraction over ``prod_i d eta_i d etabar_i``."""
    ctx = F.context
    if weight == "exp":
        if not theta:
            raise ValueError("weight 'exp' needs the odd coordinates Theta")
        F = exp_weight(theta) * F
    elif weight != "none":
        raise ValueError(f"unknown weight {weight!r}")
    return berezin(F, point_berezin_order(ctx.n_pairs)).body()
