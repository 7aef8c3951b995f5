"""Exact arithmetic in a complex Grassmann algebra with paired generators.

The algebra has ``G = 2N`` odd generators.  Generator ``i`` (``0 <= i < N``)
is paired with its conjugate ``i + N``; in the point-embedding code these are
``eta_{i+1}`` and ``etabar_{i+1}``.  A basis monomial is stored as a bitmask
with its generators multiplied in ascending index order.

Conventions fixed here and used throughout the package:

* Conjugation is an antilinear algebra homomorphism without reversal of
  factors, ``conj(ab) = conj(a) conj(b)``.  With this choice ``i*theta*thetabar``
  is real.
* ``berezin(a, [g1, g2, ..., gk])`` is ``d/dg1 d/dg2 ... d/dgk a`` with left
  derivatives, so the last listed generator is differentiated first.  For the
  paired order ``[eta1, etabar1, eta2, etabar2, ...]`` the top monomial
  ``eta1 etabar1 eta2 etabar2 ...`` integrates to ``+1``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from numbers import Number
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

MAX_GENERATORS = 64
DEFAULT_TOLERANCE = 1e-13


class GrassmannError(Exception):
    """Base class for domain errors raised by the algebra kernel."""

    code = "grassmann_error"


class ContextMismatch(GrassmannError, ValueError):
    code = "context_mismatch"


class NonInvertible(GrassmannError, ZeroDivisionError):
    code = "non_invertible"


class ParityError(GrassmannError, ValueError):
    code = "parity"


class DomainError(GrassmannError, ValueError):
    code = "domain"


@dataclass(frozen=True)
class AlgebraContext:
    """Grassmann algebra with ``n_pairs`` conjugate pairs of generators."""

    n_pairs: int
    zero_tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.n_pairs < 0 or 2 * self.n_pairs > MAX_GENERATORS:
            raise ValueError(f"need 0 <= 2*n_pairs <= {MAX_GENERATORS}, got n_pairs={self.n_pairs}")
        if not self.zero_tolerance >= 0:
            raise ValueError("zero_tolerance must be non-negative")

    @property
    def n_generators(self) -> int:
        return 2 * self.n_pairs

    def scalar(self, c) -> Multivector:
        return Multivector(self, {0: c})

    def zero(self) -> Multivector:
        return Multivector(self, {})

    def one(self) -> Multivector:
        return Multivector(self, {0: 1.0})

    def generator(self, index: int) -> Multivector:
        """The bare generator with the given index (0-based, conjugates at ``N..2N-1``)."""
        if not 0 <= index < self.n_generators:
            raise IndexError(f"generator {index} out of range for {self.n_generators} generators")
        return Multivector(self, {1 << index: 1.0})

    def eta(self, i: int) -> Multivector:
        """``eta_i`` for 1-based ``i``."""
        return self.generator(i - 1)

    def etabar(self, i: int) -> Multivector:
        """``etabar_i`` for 1-based ``i``."""
        return self.generator(i - 1 + self.n_pairs)

    def paired_order(self) -> list[int]:
        """Generator list ``[eta1, etabar1, eta2, etabar2, ...]`` used for point integrals."""
        order = []
        for i in range(self.n_pairs):
            order += [i, i + self.n_pairs]
        return order

    def generator_name(self, index: int) -> str:
        if index < self.n_pairs:
            return f"e{index + 1}"
        return f"E{index - self.n_pairs + 1}"


def _popcount(x: int) -> int:
    return bin(x).count("1")


def reorder_sign(a: int, b: int) -> int:
    """Sign of ``mono(a) * mono(b)`` relative to the ascending monomial ``mono(a | b)``.

    Counts, for every generator of ``b``, how many generators of ``a`` sit to
    its right in the merged order.  Assumes ``a & b == 0``.
    """
    a >>= 1
    swaps = 0
    while a:
        swaps += _popcount(a & b)
        a >>= 1
    return -1 if swaps & 1 else 1


def _conjugate_mask(mask: int, n: int) -> tuple[int, int]:
    low_bits = (1 << n) - 1
    low = mask & low_bits
    high = mask >> n
    # every mapped low generator lands above every mapped high generator
    sign = -1 if (_popcount(low) * _popcount(high)) & 1 else 1
    return (low << n) | high, sign


def _as_complex(c) -> complex:
    c = complex(c)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise DomainError(f"non-finite coefficient {c!r}")
    return c


class Multivector:
    """Sparse element ``sum_I c_I theta^I`` of a Grassmann algebra.

    Values are immutable; every arithmetic operation returns a new instance
    and prunes coefficients whose magnitude is at most the context tolerance.
    """

    __slots__ = ("_context", "_terms")

    def __init__(self, context: AlgebraContext, terms: Mapping[int, complex] | None = None):
        tol = context.zero_tolerance
        limit = 1 << context.n_generators
        clean = {}
        for mask, c in (terms or {}).items():
            mask = int(mask)
            if not 0 <= mask < limit:
                raise ValueError(f"mask {mask} outside algebra with {context.n_generators} generators")
            c = _as_complex(c)
            if abs(c) > tol:
                clean[mask] = c
        self._context = context
        self._terms = dict(sorted(clean.items()))

    @property
    def context(self) -> AlgebraContext:
        return self._context

    @property
    def terms(self) -> Mapping[int, complex]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, mask: int) -> complex:
        return self._terms.get(mask, 0j)

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def body(self) -> complex:
        return self._terms.get(0, 0j)

    def soul(self) -> Multivector:
        return Multivector(self._context, {m: c for m, c in self._terms.items() if m})

    def parity(self) -> int | None:
        """0 for even, 1 for odd, ``None`` for mixed.  Zero counts as even."""
        parities = {_popcount(m) & 1 for m in self._terms}
        if not parities:
            return 0
        if len(parities) == 1:
            return parities.pop()
        return None

    def is_even(self) -> bool:
        return self.parity() == 0

    def is_odd(self) -> bool:
        return self.parity() == 1 or self.is_zero()

    def even_part(self) -> Multivector:
        return Multivector(self._context, {m: c for m, c in self._terms.items() if not _popcount(m) & 1})

    def odd_part(self) -> Multivector:
        return Multivector(self._context, {m: c for m, c in self._terms.items() if _popcount(m) & 1})

    def max_abs(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def _coerce(self, other) -> Multivector:
        if isinstance(other, Multivector):
            if other._context != self._context:
                raise ContextMismatch(f"{other._context} vs {self._context}")
            return other
        if isinstance(other, Number):
            return Multivector(self._context, {0: other})
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0j) + c
        return Multivector(self._context, out)

    __radd__ = __add__

    def __neg__(self):
        return Multivector(self._context, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, Number):
            return Multivector(self._context, {m: c * other for m, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Number):
            return self * (1.0 / complex(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * invert(other)

    def __rtruediv__(self, other):
        if isinstance(other, Number):
            return invert(self) * other
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = self._context.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Number):
            other = Multivector(self._context, {0: other})
        if not isinstance(other, Multivector):
            return NotImplemented
        return self._context == other._context and self._terms == other._terms

    __hash__ = None

    def allclose(self, other, tol: float = 1e-12) -> bool:
        return max_abs_diff(self, other) <= tol

    def conjugate(self) -> Multivector:
        return conjugate(self)

    def invert(self) -> Multivector:
        return invert(self)

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for m, c in self._terms.items():
            gens = [self._context.generator_name(b) for b in range(self._context.n_generators) if m >> b & 1]
            parts.append(f"({c:.6g})" + ("*" + "*".join(gens) if gens else ""))
        return " + ".join(parts)


def max_abs_diff(a: Multivector, b) -> float:
    """Largest coefficient magnitude of ``a - b``."""
    return (a - b).max_abs()


def _check_same(a: Multivector, b: Multivector):
    if a.context != b.context:
        raise ContextMismatch(f"{a.context} vs {b.context}")


def mul(a: Multivector, b: Multivector) -> Multivector:
    """Grassmann product; duplicated generators annihilate the term."""
    _check_same(a, b)
    out: dict[int, complex] = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            if ma & mb:
                continue
            m = ma | mb
            out[m] = out.get(m, 0j) + reorder_sign(ma, mb) * ca * cb
    return Multivector(a.context, out)


def conjugate(a: Multivector) -> Multivector:
    n = a.context.n_pairs
    out = {}
    for m, c in a.items():
        cm, sign = _conjugate_mask(m, n)
        out[cm] = sign * c.conjugate()
    return Multivector(a.context, out)


def body(a: Multivector) -> complex:
    return a.body()


def require_even(a: Multivector, what: str = "element") -> Multivector:
    if not a.is_even():
        raise ParityError(f"{what} must be even")
    return a


def require_odd(a: Multivector, what: str = "element") -> Multivector:
    if not a.is_odd():
        raise ParityError(f"{what} must be odd")
    return a


def _soul_powers(soul: Multivector) -> list[Multivector]:
    """``[1, s, s^2, ...]`` up to the last non-vanishing power."""
    powers = [soul.context.one()]
    while True:
        nxt = powers[-1] * soul
        if nxt.is_zero():
            return powers
        powers.append(nxt)


def invert(a: Multivector) -> Multivector:
    """Two-sided inverse ``b^-1 sum_k (-s/b)^k`` of ``a = b + s``.

    Any element with non-zero body is invertible; the inverse of an even
    element is even.  Raises :class:`NonInvertible` for elements of the non-invertible set
    ``B = Gamma0 minus (Gamma0)*`` (zero body).
    """
    b = a.body()
    if abs(b) <= a.context.zero_tolerance:
        raise NonInvertible("element has zero body: it lies in the non-invertible set B = Gamma0 \\ (Gamma0)*")
    ratio = a.soul() * (-1.0 / b)
    out = a.context.one()
    term = a.context.one()
    while True:
        term = term * ratio
        if term.is_zero():
            break
        out = out + term
    return out * (1.0 / b)


class AnalyticFunction:
    """Scalar function given by its derivative sequence ``[f(x), f'(x), ...]``."""

    def __init__(self, name: str, derivatives: Callable[[complex, int], Sequence[complex]]):
        self.name = name
        self._derivatives = derivatives

    def derivatives(self, x: complex, n: int) -> list[complex]:
        return list(self._derivatives(x, n))

    def __repr__(self):
        return f"AnalyticFunction({self.name!r})"


def _exp_derivs(x, n):
    v = cmath.exp(x)
    return [v] * (n + 1)


def _log_derivs(x, n):
    if x == 0:
        raise DomainError("log is undefined at body 0")
    out = [cmath.log(x)]
    for k in range(1, n + 1):
        out.append((-1) ** (k - 1) * math.factorial(k - 1) / x**k)
    return out


def _reciprocal_derivs(x, n):
    if x == 0:
        raise DomainError("reciprocal is undefined at body 0")
    return [(-1) ** k * math.factorial(k) / x ** (k + 1) for k in range(n + 1)]


def power(p: float) -> AnalyticFunction:
    """``x -> x**p`` (principal branch)."""

    def derivs(x, n):
        if x == 0 and not (float(p).is_integer() and p >= 0):
            raise DomainError(f"x**{p} is not analytic at body 0")
        out = []
        coef = 1.0
        for k in range(n + 1):
            out.append(coef * (complex(x) ** (p - k) if coef else 0.0))
            coef *= p - k
        return out

    return AnalyticFunction(f"power({p})", derivs)


EXP = AnalyticFunction("exp", _exp_derivs)
LOG = AnalyticFunction("log", _log_derivs)
RECIPROCAL = AnalyticFunction("reciprocal", _reciprocal_derivs)
BUILTIN_FUNCTIONS = {"exp": EXP, "log": LOG, "reciprocal": RECIPROCAL}


def analytic_apply(f, a: Multivector) -> Multivector:
    """Formal Taylor expansion ``sum_k f^(k)(body) soul^k / k!`` of an even element."""
    require_even(a, "argument of analytic_apply")
    if isinstance(f, str):
        f = BUILTIN_FUNCTIONS[f]
    powers = _soul_powers(a.soul())
    derivs = f.derivatives(a.body(), len(powers) - 1) if isinstance(f, AnalyticFunction) else list(f(a.body(), len(powers) - 1))
    out = a.context.zero()
    for k, pk in enumerate(powers):
        out = out + pk * (derivs[k] / math.factorial(k))
    return out


def _generator_index(ctx: AlgebraContext, g) -> int:
    if isinstance(g, Multivector):
        if len(g) != 1 or g.coefficient(next(iter(g.terms))) != 1 or _popcount(next(iter(g.terms))) != 1:
            raise ValueError("expected a bare generator")
        return next(iter(g.terms)).bit_length() - 1
    g = int(g)
    if not 0 <= g < ctx.n_generators:
        raise IndexError(f"generator {g} out of range")
    return g


def left_derivative(a: Multivector, g: int) -> Multivector:
    out = {}
    bit = 1 << g
    below = bit - 1
    for m, c in a.items():
        if m & bit:
            sign = -1 if _popcount(m & below) & 1 else 1
            out[m ^ bit] = sign * c
    return Multivector(a.context, out)


def berezin(a: Multivector, gens: Iterable) -> Multivector:
    """Iterated left derivatives ``d/dg1 ... d/dgk a`` then ``g1..gk -> 0``."""
    idx = [_generator_index(a.context, g) for g in gens]
    if len(set(idx)) != len(idx):
        raise ValueError("Berezin generators must be distinct")
    for g in reversed(idx):
        a = left_derivative(a, g)
    listed = sum(1 << g for g in idx)
    return Multivector(a.context, {m: c for m, c in a.items() if not m & listed})


def monomial(ctx: AlgebraContext, gens: Sequence[int], coeff: complex = 1.0) -> Multivector:
    """Product of the listed generators in the listed order, times ``coeff``."""
    out = ctx.scalar(coeff)
    for g in gens:
        out = out * ctx.generator(g)
    return out


# --------------------------------------------------------------------------
# dense batched representation used by the quadrature code


@lru_cache(maxsize=None)
def _product_table(n_generators: int):
    size = 1 << n_generators
    rows, cols, targets, signs = [], [], [], []
    for i in range(size):
        for j in range(size):
            if i & j:
                continue
            rows.append(i)
            cols.append(j)
            targets.append(i | j)
            signs.append(reorder_sign(i, j))
    return (np.array(rows), np.array(cols), np.array(targets), np.array(signs, dtype=float))


@lru_cache(maxsize=None)
def _conjugation_table(n_pairs: int):
    size = 1 << (2 * n_pairs)
    perm = np.empty(size, dtype=int)
    signs = np.empty(size)
    for m in range(size):
        cm, s = _conjugate_mask(m, n_pairs)
        perm[m] = cm
        signs[m] = s
    return perm, signs


class MultivectorArray:
    """A batch of multivectors with dense coefficient array of shape ``(2**G, *batch)``.

    No pruning is applied; intended for small algebras evaluated on many
    quadrature nodes at once.
    """

    MAX_DENSE_GENERATORS = 12

    def __init__(self, context: AlgebraContext, coeffs):
        if context.n_generators > self.MAX_DENSE_GENERATORS:
            raise ValueError("dense representation limited to 12 generators")
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape[0] != 1 << context.n_generators:
            raise ValueError("leading axis must have length 2**G")
        self.context = context
        self.coeffs = coeffs

    @property
    def batch_shape(self):
        return self.coeffs.shape[1:]

    @classmethod
    def constant(cls, mv: Multivector, batch_shape=()):
        coeffs = np.zeros((1 << mv.context.n_generators, *batch_shape), dtype=complex)
        for m, c in mv.items():
            coeffs[m] = c
        return cls(mv.context, coeffs)

    @classmethod
    def scalar_field(cls, context: AlgebraContext, values, mask: int = 0):
        values = np.asarray(values, dtype=complex)
        coeffs = np.zeros((1 << context.n_generators, *values.shape), dtype=complex)
        coeffs[mask] = values
        return cls(context, coeffs)

    @classmethod
    def stack(cls, items: Sequence[Multivector]):
        ctx = items[0].context
        coeffs = np.zeros((1 << ctx.n_generators, len(items)), dtype=complex)
        for k, mv in enumerate(items):
            if mv.context != ctx:
                raise ContextMismatch("stacked multivectors must share a context")
            for m, c in mv.items():
                coeffs[m, k] = c
        return cls(ctx, coeffs)

    def item(self, index) -> Multivector:
        if not isinstance(index, tuple):
            index = (index,)
        col = self.coeffs[(slice(None), *index)]
        return Multivector(self.context, {m: c for m, c in enumerate(col) if c != 0})

    def _coerce(self, other):
        if isinstance(other, MultivectorArray):
            if other.context != self.context:
                raise ContextMismatch(f"{other.context} vs {self.context}")
            return other
        if isinstance(other, Multivector):
            if other.context != self.context:
                raise ContextMismatch(f"{other.context} vs {self.context}")
            return MultivectorArray.constant(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            out = self.coeffs.copy()
            out[0] = out[0] + other
            return MultivectorArray(self.context, out)
        a, b = np.broadcast_arrays(self.coeffs, o.coeffs)
        return MultivectorArray(self.context, a + b)

    __radd__ = __add__

    def __neg__(self):
        return MultivectorArray(self.context, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            # scalar or array broadcasting over the batch axes
            return MultivectorArray(self.context, self.coeffs * np.asarray(other)[None, ...])
        rows, cols, targets, signs = _product_table(self.context.n_generators)
        a, b = self.coeffs, o.coeffs
        shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
        out = np.zeros((a.shape[0], *shape), dtype=complex)
        nz_a = np.flatnonzero(np.any(a.reshape(a.shape[0], -1) != 0, axis=1))
        nz_b = np.flatnonzero(np.any(b.reshape(b.shape[0], -1) != 0, axis=1))
        keep = np.isin(rows, nz_a) & np.isin(cols, nz_b)
        for i, j, t, s in zip(rows[keep], cols[keep], targets[keep], signs[keep]):
            out[t] += s * a[i] * b[j]
        return MultivectorArray(self.context, out)

    def __rmul__(self, other):
        o = self._coerce(other)
        if o is None:
            return self * other
        return o * self

    def body(self):
        return self.coeffs[0]

    def soul(self):
        out = self.coeffs.copy()
        out[0] = 0
        return MultivectorArray(self.context, out)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def conjugate(self):
        perm, signs = _conjugation_table(self.context.n_pairs)
        out = np.empty_like(self.coeffs)
        out[perm] = (signs.reshape(-1, *([1] * (self.coeffs.ndim - 1)))) * self.coeffs.conj()
        return MultivectorArray(self.context, out)

    def invert(self):
        b = self.body()
        if np.any(b == 0):
            raise NonInvertible("element has zero body at some batch entry")
        ratio = self.soul() * (-1.0 / b)
        out = MultivectorArray.scalar_field(self.context, np.ones(b.shape))
        term = out
        while True:
            term = term * ratio
            if term.is_zero():
                break
            out = out + term
        return out * (1.0 / b)

    def berezin(self, gens: Iterable[int]):
        idx = [int(g) for g in gens]
        coeffs = self.coeffs
        for g in reversed(idx):
            bit = 1 << g
            new = np.zeros_like(coeffs)
            for m in range(coeffs.shape[0]):
                if m & bit:
                    sign = -1 if _popcount(m & (bit - 1)) & 1 else 1
                    new[m ^ bit] = sign * coeffs[m]
            coeffs = new
        listed = sum(1 << g for g in idx)
        keep = np.array([not m & listed for m in range(coeffs.shape[0])])
        coeffs = coeffs * keep.reshape(-1, *([1] * (coeffs.ndim - 1)))
        return MultivectorArray(self.context, coeffs)
