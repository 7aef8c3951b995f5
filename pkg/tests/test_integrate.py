import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from superbalance.grassmann import AlgebraContext, MultivectorArray, monomial
from superbalance.integrate import (
    CY_CONTEXT,
    DEFAULT_SPEC,
    QuadratureError,
    QuadratureSpec,
    SuperIntegrand,
    berezin_point_integrate,
    cy_integrate_p12,
    plane_quadrature,
)

TOP = monomial(CY_CONTEXT, [0, 1, 2, 3])


def radial_beta(a, k):
    # int |z|^(2a) / (1+|z|^2)^k dA = pi * B(a+1, k-a-1)
    return math.pi * math.gamma(a + 1) * math.gamma(k - a - 1) / math.gamma(k)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(radial=2)
    with pytest.raises(ValueError):
        QuadratureSpec(tol=0)


def test_reference_integrals():
    assert abs(plane_quadrature(lambda z: 1 / (1 + abs(z) ** 2) ** 2) - math.pi) <= 1e-8
    assert abs(plane_quadrature(lambda z: abs(z) ** 2 / (1 + abs(z) ** 2) ** 3) - math.pi / 2) <= 1e-8
    assert abs(plane_quadrature(lambda z: z / (1 + abs(z) ** 2) ** 3)) <= 1e-12


@pytest.mark.parametrize("a,k", [(0, 2), (0, 3), (1, 3), (1, 4), (2, 5)])
def test_five_radial_integrals(a, k):
    got = plane_quadrature(lambda z: abs(z) ** (2 * a) / (1 + abs(z) ** 2) ** k, DEFAULT_SPEC)
    assert abs(got - radial_beta(a, k)) <= 1e-8


def test_non_rational_but_decaying_integrand():
    got = plane_quadrature(lambda z: np.exp(-abs(z) ** 2))
    assert abs(got - math.pi) <= 1e-8


@pytest.mark.parametrize("a,b", [(1, 0), (0, 1), (2, 1), (3, 0), (2, 4)])
def test_angular_selection_rule(a, b):
    got = plane_quadrature(lambda z: z ** a * np.conj(z) ** b / (1 + abs(z) ** 2) ** (max(a, b) + 2))
    assert abs(got) <= 1e-12


def test_divergent_integral_reports_trace():
    with pytest.raises(QuadratureError) as info:
        plane_quadrature(lambda z: 1 / (1 + abs(z) ** 2))
    assert len(info.value.trace) == DEFAULT_SPEC.max_refinements


def test_vector_valued_integrand():
    got = plane_quadrature(lambda z: np.stack([1 / (1 + abs(z) ** 2) ** 2, abs(z) ** 2 / (1 + abs(z) ** 2) ** 3]))
    assert np.allclose(got, [math.pi, math.pi / 2], atol=1e-12)


def test_full_output_has_estimates():
    value, info = plane_quadrature(lambda z: 1 / (1 + abs(z) ** 2) ** 2, full_output=True)
    assert info["error_estimate"] <= 1e-8 and info["tail_estimate"] <= 1e-8 and info["trace"]


def test_cy_constant_integrand_vanishes():
    assert cy_integrate_p12(SuperIntegrand(lambda z: CY_CONTEXT.scalar(2.0))) == 0


def test_cy_top_monomial_profile():
    def F(z):
        return MultivectorArray.constant(TOP, z.shape) * (1 / (1 + abs(z) ** 2) ** 4)

    # 4 from the epsilon contraction, pi/3 from int dA/(1+|z|^2)^4
    assert abs(cy_integrate_p12(F) - 4 * math.pi / 3) <= 1e-8
    # the printed |z|^2 density: 4 * pi * int t/(1+t)^4 dt = 4 * pi/6
    assert abs(cy_integrate_p12(F, density="literal") - 4 * math.pi / 6) <= 1e-8


def test_cy_unknown_density():
    with pytest.raises(ValueError):
        cy_integrate_p12(lambda z: TOP, density="flat")


def _rand_field(rng):
    coeffs = rng.normal(size=(16, 3)) + 1j * rng.normal(size=(16, 3))
    powers = rng.integers(0, 2, size=(16, 2))

    def F(z):
        out = np.zeros((16, *z.shape), dtype=complex)
        for m in range(16):
            pa, pb = powers[m]
            out[m] = (coeffs[m, 0] + coeffs[m, 1] * z ** pa * np.conj(z) ** pb) / (1 + abs(z) ** 2) ** 4
        return MultivectorArray(CY_CONTEXT, out)

    return F


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cy_linear_and_conjugation_compatible(seed):
    rng = np.random.default_rng(seed)
    F, G = _rand_field(rng), _rand_field(rng)
    c = complex(rng.normal(), rng.normal())
    lhs = cy_integrate_p12(lambda z: F(z) * c + G(z))
    rhs = c * cy_integrate_p12(F) + cy_integrate_p12(G)
    assert abs(lhs - rhs) <= 1e-9
    assert abs(cy_integrate_p12(lambda z: F(z).conjugate()) - np.conj(cy_integrate_p12(F))) <= 1e-9


def test_cy_theta_section_entry_against_closed_form_and_brute_force():
    # the theta1 theta2 section at unit scalings for m = 2: 4 * int dA / (1 + |z|^2 + |z|^4)
    from superbalance.balance import SectionScaling, cy_entries

    got = cy_entries(SectionScaling.unit(2), [(3, 3)])[0]
    assert abs(got - 8 * math.pi ** 2 / (3 * math.sqrt(3))) <= 1e-8
    # brute force: midpoint rule in t = r^2 on a fine lattice after mapping [0, inf) to [0, 1)
    n = 400000
    s = (np.arange(n) + 0.5) / n
    t = s / (1 - s)
    brute = 4 * math.pi * np.sum(1 / (1 + t + t ** 2) / (1 - s) ** 2) / n
    assert abs(got - brute) <= 1e-6


def test_point_berezin_examples():
    ctx = AlgebraContext(2)
    top = ctx.eta(1) * ctx.etabar(1) * ctx.eta(2) * ctx.etabar(2)
    assert berezin_point_integrate(top) == 1
    assert berezin_point_integrate(ctx.scalar(3.0)) == 0
    c1 = AlgebraContext(1)
    got = berezin_point_integrate(c1.scalar(2.0), "exp", [c1.eta(1)])
    # exp(i eta etabar) = 1 + i eta etabar; the top coefficient is extracted with sign -1
    assert got == -2j
    with pytest.raises(ValueError):
        berezin_point_integrate(c1.scalar(1.0), "exp")
    with pytest.raises(ValueError):
        berezin_point_integrate(c1.scalar(1.0), "gauss")
