import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from superbalance.grassmann import AlgebraContext, Multivector  # noqa: E402
from superbalance.supermatrix import SuperMatrix  # noqa: E402


def rand_c(rng):
    return complex(rng.normal(), rng.normal())


def rand_element(ctx, rng, parity=None, body=None, density=0.6, scale=1.0):
    """Random multivector; ``body=None`` gives a body near 2 so it is invertible."""
    terms = {}
    for mask in range(1 << ctx.n_generators):
        k = bin(mask).count("1")
        if parity is not None and k % 2 != parity:
            continue
        if mask == 0:
            terms[0] = rand_c(rng) + 2.0 if body is None else body
        elif rng.random() < density:
            terms[mask] = scale * rand_c(rng)
    return Multivector(ctx, terms)


def rand_point_coords(ctx, rng, p, q):
    """Even coordinates with bodies of modulus in [0.5, 2] and souls of size ~0.5."""
    even = [rand_element(ctx, rng, 0, body=rng.uniform(0.5, 2.0) * np.exp(2j * np.pi * rng.random()), scale=0.5)
            for _ in range(p + 1)]
    odd = [rand_element(ctx, rng, 1, scale=0.5) for _ in range(q)]
    return even, odd


def rand_gl11(ctx, rng, conditioned=False):
    """Random GL(1|1); ``conditioned`` keeps diagonal bodies in modulus [0.5, 2] and souls ~0.5."""
    if not conditioned:
        return SuperMatrix(ctx, 1, 1, [[rand_element(ctx, rng, 0), rand_element(ctx, rng, 1)],
                                       [rand_element(ctx, rng, 1), rand_element(ctx, rng, 0)]])
    (a, d), (b, c) = rand_point_coords(ctx, rng, 1, 2)
    return SuperMatrix(ctx, 1, 1, [[a, b], [c, d]])


@pytest.fixture
def ctx2():
    return AlgebraContext(2)


@pytest.fixture
def exact2():
    # no pruning, so residuals are the raw floating-point values
    return AlgebraContext(2, 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)
