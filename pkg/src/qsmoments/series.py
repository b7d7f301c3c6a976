"""Exact rational scalars and truncated formal power series.

A :class:`TruncatedSeries` of order ``N`` holds the coefficients
``c_0 .. c_N`` of a power series modulo ``u**(N+1)``.  Coefficients are
:class:`fractions.Fraction` values, which are always stored in lowest terms
with a positive denominator.

Products are exact.  Internally both operands are brought to a common
denominator and the integer numerators are convolved by Kronecker
substitution (pack into one big integer, multiply, unpack), which is
exact and much faster than a coefficient-by-coefficient Fraction loop once
denominators grow to thousands of digits.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

import gmpy2

ExactRational = Fraction
Scalar = Union[int, Fraction]

# below this length the quadratic integer loop beats packing overhead
_KRONECKER_CUTOFF = 24


def format_rational(x: Scalar) -> str:
    """Render an exact rational as ``"p/q"`` (or ``"p"`` when ``q == 1``)."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


# ---------------------------------------------------------------------------
# integer convolution kernels
# ---------------------------------------------------------------------------


def convolve_naive(a: Sequence[int], b: Sequence[int], length: int) -> list[int]:
    """First ``length`` coefficients of the Cauchy product, quadratic loop."""
    out = []
    for n in range(length):
        lo = max(0, n - len(b) + 1)
        hi = min(n, len(a) - 1)
        acc = 0
        for i in range(lo, hi + 1):
            acc += a[i] * b[n - i]
        out.append(acc)
    return out


def _pack(values: Iterable[int], nbytes: int) -> int:
    return int.from_bytes(
        b"".join(v.to_bytes(nbytes, "little") for v in values), "little"
    )


def _signed_pack(values: Sequence[int], nbytes: int) -> int:
    pos = _pack((v if v > 0 else 0 for v in values), nbytes)
    neg = _pack((-v if v < 0 else 0 for v in values), nbytes)
    return pos - neg


def convolve_kronecker(a: Sequence[int], b: Sequence[int], length: int) -> list[int]:
    """Same result as :func:`convolve_naive`, via one big-integer product."""
    a = list(a[:length])
    b = list(b[:length])
    if not a or not b:
        return [0] * length
    bits_a = max(abs(v).bit_length() for v in a)
    bits_b = max(abs(v).bit_length() for v in b)
    if bits_a == 0 or bits_b == 0:
        return [0] * length
    # each packed digit must hold |c_n| < 2**(width-1)
    width = bits_a + bits_b + min(len(a), len(b)).bit_length() + 2
    nbytes = (width + 7) // 8
    width = 8 * nbytes

    prod = int(gmpy2.mpz(_signed_pack(a, nbytes)) * gmpy2.mpz(_signed_pack(b, nbytes)))
    half = 1 << (width - 1)
    bias = _pack([half] * length, nbytes)
    # bias keeps every digit in [0, 2**width), so no borrows cross slots
    raw = ((prod + bias) & ((1 << (width * length)) - 1)).to_bytes(
        nbytes * length, "little"
    )
    return [
        int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") - half
        for i in range(length)
    ]


def convolve(a: Sequence[int], b: Sequence[int], length: int) -> list[int]:
    if min(len(a), len(b), length) <= _KRONECKER_CUTOFF:
        return convolve_naive(a, b, length)
    return convolve_kronecker(a, b, length)


def _common_denominator(coeffs: Sequence[Fraction]) -> tuple[list[int], int]:
    den = math.lcm(*(c.denominator for c in coeffs)) if coeffs else 1
    return [c.numerator * (den // c.denominator) for c in coeffs], den


# ---------------------------------------------------------------------------
# TruncatedSeries
# ---------------------------------------------------------------------------


class TruncatedSeries:
    """Power series ``c_0 + c_1 u + ... + c_N u^N + O(u^(N+1))``.

    Immutable.  Binary operations truncate to the smaller order.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coefficients: Iterable[Scalar]):
        coeffs = tuple(Fraction(c) for c in coefficients)
        if not coeffs:
            raise ValueError("a truncated series needs at least one coefficient")
        self._coeffs = coeffs

    @classmethod
    def _wrap(cls, coeffs: tuple[Fraction, ...]) -> "TruncatedSeries":
        obj = cls.__new__(cls)
        obj._coeffs = coeffs
        return obj

    @classmethod
    def zero(cls, order: int) -> "TruncatedSeries":
        return cls._wrap((Fraction(0),) * (order + 1))

    @classmethod
    def monomial(cls, k: int, order: int, coefficient: Scalar = 1) -> "TruncatedSeries":
        coeffs = [Fraction(0)] * (order + 1)
        if k <= order:
            coeffs[k] = Fraction(coefficient)
        return cls._wrap(tuple(coeffs))

    @property
    def order(self) -> int:
        return len(self._coeffs) - 1

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return self._coeffs

    def __getitem__(self, n: int) -> Fraction:
        return self._coeffs[n]

    def __len__(self) -> int:
        return len(self._coeffs)

    def __iter__(self):
        return iter(self._coeffs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(self._coeffs)

    def __repr__(self) -> str:
        shown = ", ".join(format_rational(c) for c in self._coeffs[:8])
        more = ", ..." if len(self._coeffs) > 8 else ""
        return f"TruncatedSeries(order={self.order}, [{shown}{more}])"

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ValueError(f"cannot raise order {self.order} to {order}")
        return self._wrap(self._coeffs[: order + 1])

    def scale(self, c: Scalar) -> "TruncatedSeries":
        c = Fraction(c)
        return self._wrap(tuple(x * c for x in self._coeffs))

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by ``u**k``; the order grows by ``k``."""
        if k < 0:
            raise ValueError("shift must be non-negative")
        return self._wrap((Fraction(0),) * k + self._coeffs)

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return series_add(self, other)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return series_add(self, other.scale(-1))

    def __neg__(self) -> "TruncatedSeries":
        return self.scale(-1)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def derivative(self, k: int = 1) -> "TruncatedSeries":
        return series_derivative(self, k)


def series_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return TruncatedSeries._wrap(tuple(x + y for x, y in zip(a.coefficients, b.coefficients)))


def series_sum(terms: Sequence[TruncatedSeries]) -> TruncatedSeries:
    """Sum of several series, accumulated over a common denominator."""
    if not terms:
        raise ValueError("empty sum has no order")
    length = min(len(t) for t in terms)
    packed = [_common_denominator(t.coefficients[:length]) for t in terms]
    den = math.lcm(*(d for _, d in packed))
    acc = [0] * length
    for nums, d in packed:
        f = den // d
        for i, v in enumerate(nums):
            acc[i] += v * f
    return TruncatedSeries._wrap(tuple(Fraction(v, den) for v in acc))


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Exact Cauchy product truncated at ``min(a.order, b.order)``."""
    length = min(len(a), len(b))
    na, da = _common_denominator(a.coefficients[:length])
    nb, db = _common_denominator(b.coefficients[:length])
    den = da * db
    return TruncatedSeries._wrap(tuple(Fraction(v, den) for v in convolve(na, nb, length)))


def series_derivative(a: TruncatedSeries, k: int = 1) -> TruncatedSeries:
    """``k``-th formal derivative; the order drops by ``k``."""
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    if k > a.order:
        raise ValueError(f"derivative of order {k} exceeds series order {a.order}")
    if k == 0:
        return a
    c = a.coefficients
    # [u^n] a^(k) = (n+k)_k * c_{n+k}
    return TruncatedSeries._wrap(
        tuple(falling_factorial(n + k, k) * c[n + k] for n in range(a.order - k + 1))
    )


def falling_factorial(x: int, k: int) -> int:
    """``x (x-1) ... (x-k+1)``; zero when ``0 <= x < k``."""
    if k == 0:
        return 1
    if 0 <= x < k:
        return 0
    return math.perm(x, k) if x >= 0 else math.prod(range(x, x - k, -1))


def log_inv_series(order: int) -> TruncatedSeries:
    """``L(u) = log(1/(1-u)) = sum_{m>=1} u^m / m``."""
    if order < 0:
        raise ValueError("order must be non-negative")
    return TruncatedSeries._wrap((Fraction(0),) + tuple(Fraction(1, m) for m in range(1, order + 1)))


def binomial_pow_series(alpha: int, order: int) -> TruncatedSeries:
    """``(1-u)**(-alpha)``, with ``[u^n] = C(n+alpha-1, alpha-1)``."""
    if alpha < 1:
        raise ValueError("alpha must be a positive integer")
    if order < 0:
        raise ValueError("order must be non-negative")
    return TruncatedSeries._wrap(
        tuple(Fraction(math.comb(n + alpha - 1, alpha - 1)) for n in range(order + 1))
    )


def coeff_exact(alpha: int, beta: int, n: int) -> Fraction:
    """Exact ``[u^n] L(u)**beta * (1-u)**(-alpha)``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if alpha < 1 or beta < 0:
        raise ValueError("need alpha >= 1 and beta >= 0")
    acc = binomial_pow_series(alpha, n)
    if beta:
        log = log_inv_series(n)
        for _ in range(beta):
            acc = series_mul(acc, log)
    return acc[n]
