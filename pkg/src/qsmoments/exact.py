"""Exact comparison-count distribution and moments of randomized quicksort.

Three independent routes reach the factorial moments
``beta_s(n) = E[(C_n)_s]``:

* the probability generating functions ``G_n(z)`` built bottom-up and
  read off as a :class:`ComparisonDistribution`;
* a Leibniz-rule recurrence obtained by differentiating the PGF
  recurrence ``s`` times at ``z = 1`` (no degree ``n^2/2`` polynomials);
* the generating functions ``f_s(u) = sum_n beta_s(n) u^n`` obtained by
  solving, coefficient by coefficient, the linear ODE
  ``(1-u) f_s' - 2 f_s = (1-u) p_s``.

:func:`brute_force_distribution` enumerates every permutation and runs the
instrumented sort; it is the oracle for all of the above.
"""

from __future__ import annotations

import enum
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import mpmath

from .series import (
    TruncatedSeries,
    binomial_pow_series,
    convolve,
    falling_factorial,
    series_derivative,
    series_mul,
    series_sum,
)

BRUTE_FORCE_MAX_N = 9

# fixed-point scale for float mode: 192 bits is about 57 decimal digits
FLOAT_PREC_BITS = 192


class InvariantError(RuntimeError):
    """Raised when an internal consistency check fails (an implementation bug)."""


class PivotCostModel(enum.Enum):
    """Comparisons charged for partitioning a subarray of length ``m >= 2``.

    Subarrays of length 0 or 1 are never partitioned and cost nothing.
    """

    N_MINUS_1 = "n-1"
    N_PLUS_1 = "n+1"

    def cost(self, m: int) -> int:
        if m < 2:
            return 0
        return m - 1 if self is PivotCostModel.N_MINUS_1 else m + 1

    def max_comparisons(self, n: int) -> int:
        return sum(self.cost(m) for m in range(2, n + 1))


DEFAULT_MODEL = PivotCostModel.N_MINUS_1


class Mode(enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PGFPolynomial:
    """``G_n(z)``: coefficient ``k`` is the probability of exactly ``k`` comparisons."""

    n: int
    coefficients: tuple[Fraction, ...]

    @property
    def degree(self) -> int:
        for k in range(len(self.coefficients) - 1, -1, -1):
            if self.coefficients[k]:
                return k
        return 0

    def __call__(self, z: Union[int, Fraction]) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * z + c
        return acc


@dataclass(frozen=True)
class ComparisonDistribution:
    """Number of permutations of size ``n`` that need exactly ``k`` comparisons."""

    n: int
    counts: dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def probability(self, k: int) -> Fraction:
        return Fraction(self.counts.get(k, 0), math.factorial(self.n))

    def items(self):
        return sorted(self.counts.items())


@dataclass
class MomentTable:
    """``beta_s(n)`` for ``0 <= s <= s_max`` and ``0 <= n <= n_max``.

    In exact mode values are :class:`Fraction`; in float mode they are
    :class:`mpmath.mpf` carrying ``FLOAT_PREC_BITS`` bits.
    """

    n_max: int
    s_max: int
    mode: Mode
    rows: list[list] = field(repr=False)
    model: PivotCostModel = DEFAULT_MODEL

    def get(self, n: int, s: int):
        if not (0 <= s <= self.s_max and 0 <= n <= self.n_max):
            raise ValueError(
                f"moment table covers n <= {self.n_max}, s <= {self.s_max}; "
                f"asked for n={n}, s={s}"
            )
        return self.rows[s][n]

    def __getitem__(self, key: tuple[int, int]):
        n, s = key
        return self.get(n, s)


# ---------------------------------------------------------------------------
# the instrumented sort and its exhaustive oracle
# ---------------------------------------------------------------------------


def _check_distinct(perm: Sequence) -> None:
    if len(set(perm)) != len(perm):
        raise ValueError("quicksort_count requires distinct values")


def quicksort_count(perm: Sequence[int], model: PivotCostModel = DEFAULT_MODEL) -> int:
    """Comparisons used to sort ``perm`` with a first-element pivot.

    The remaining elements are split stably into the smaller block followed
    by the larger block, which keeps both subarrays uniformly random when
    ``perm`` is.
    """
    _check_distinct(perm)
    total = 0
    stack = [list(perm)]
    while stack:
        arr = stack.pop()
        if len(arr) < 2:
            continue
        total += model.cost(len(arr))
        pivot = arr[0]
        stack.append([x for x in arr[1:] if x < pivot])
        stack.append([x for x in arr[1:] if x > pivot])
    return total


def partition_stages(perm: Sequence[int]) -> int:
    """Number of partitioning steps (subarrays of length >= 2) while sorting ``perm``."""
    _check_distinct(perm)
    stages = 0
    stack = [list(perm)]
    while stack:
        arr = stack.pop()
        if len(arr) < 2:
            continue
        stages += 1
        pivot = arr[0]
        stack.append([x for x in arr[1:] if x < pivot])
        stack.append([x for x in arr[1:] if x > pivot])
    return stages


def brute_force_distribution(
    n: int, model: PivotCostModel = DEFAULT_MODEL
) -> ComparisonDistribution:
    if not 1 <= n <= BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force enumeration needs 1 <= n <= {BRUTE_FORCE_MAX_N}, got {n}")
    tally = Counter(quicksort_count(p, model) for p in itertools.permutations(range(1, n + 1)))
    return ComparisonDistribution(n, dict(sorted(tally.items())))


# ---------------------------------------------------------------------------
# moments from a distribution
# ---------------------------------------------------------------------------


def factorial_moment_from_distribution(dist: ComparisonDistribution, s: int) -> Fraction:
    if s < 0:
        raise ValueError("moment order must be non-negative")
    num = sum(falling_factorial(k, s) * c for k, c in dist.counts.items())
    return Fraction(num, math.factorial(dist.n))


def stirling2(s: int, j: int) -> int:
    """Stirling number of the second kind ``S(s, j)``."""
    if s == j:
        return 1
    if j == 0 or j > s:
        return 0
    row = [1] + [0] * j
    for i in range(1, s + 1):
        for k in range(min(i, j), 0, -1):
            row[k] = k * row[k] + row[k - 1]
        row[0] = 0
    return row[j]


def raw_moments(table: MomentTable, n: int, s: int):
    """``E[C_n^s] = sum_j S(s, j) beta_j(n)``."""
    if s < 0:
        raise ValueError("moment order must be non-negative")
    return sum(stirling2(s, j) * table.get(n, j) for j in range(s + 1))


def variance(table: MomentTable, n: int):
    b1 = table.get(n, 1)
    return table.get(n, 2) + b1 - b1 * b1


def mean_closed_form(n: int) -> Fraction:
    """``2 (n+1) H_n - 4 n``, the classical expected comparison count."""
    h = sum((Fraction(1, k) for k in range(1, n + 1)), Fraction(0))
    return 2 * (n + 1) * h - 4 * n


# ---------------------------------------------------------------------------
# engine
# ---------------------------------------------------------------------------


def _leibniz_terms(s: int):
    """``(a, b, c, s!/(a! b! c!))`` for every composition ``a + b + c = s``."""
    fs = math.factorial(s)
    for a in range(s + 1):
        for b in range(s - a + 1):
            c = s - a - b
            yield a, b, c, fs // (math.factorial(a) * math.factorial(b) * math.factorial(c))


def _reduce(nums: list[int], den: int) -> tuple[list[int], int]:
    g = math.gcd(den, *nums)
    if g > 1:
        nums = [v // g for v in nums]
        den //= g
    return nums, den


class QuicksortEngine:
    """Memoizing calculator for one pivot-cost model.

    Caches ``G_0 .. G_n`` and the lower-order series ``f_j`` it has built.
    Not safe for concurrent writers; finished results are immutable.
    """

    def __init__(self, model: PivotCostModel = DEFAULT_MODEL):
        self.model = model
        # G_m stored as (integer numerators, common denominator)
        self._pgf: list[tuple[list[int], int]] = [([1], 1)]
        self._series: dict[int, list[TruncatedSeries]] = {}

    # -- PGF route ----------------------------------------------------------

    def _extend_pgf(self, n: int) -> None:
        while len(self._pgf) <= n:
            m = len(self._pgf)
            terms = []
            for j in range(1, m + 1):
                na, da = self._pgf[m - j]
                nb, db = self._pgf[j - 1]
                terms.append((convolve(na, nb, len(na) + len(nb) - 1), da * db))
            den = math.lcm(*(d for _, d in terms))
            width = max(len(t) for t, _ in terms)
            acc = [0] * width
            for nums, d in terms:
                f = den // d
                for i, v in enumerate(nums):
                    acc[i] += v * f
            shift = self.model.cost(m)
            self._pgf.append(_reduce([0] * shift + acc, den * m))

    def pgf(self, n: int) -> PGFPolynomial:
        if n < 0:
            raise ValueError("n must be non-negative")
        self._extend_pgf(n)
        nums, den = self._pgf[n]
        return PGFPolynomial(n, tuple(Fraction(v, den) for v in nums))

    def distribution(self, n: int) -> ComparisonDistribution:
        if n < 0:
            raise ValueError("n must be non-negative")
        self._extend_pgf(n)
        nums, den = self._pgf[n]
        nfact = math.factorial(n)
        counts = {}
        for k, v in enumerate(nums):
            q, r = divmod(v * nfact, den)
            if r:
                raise InvariantError(f"n! * P(C_{n} = {k}) is not an integer")
            if q:
                counts[k] = q
        if sum(counts.values()) != nfact:
            raise InvariantError(f"counts for n={n} do not sum to n!")
        return ComparisonDistribution(n, counts)

    # -- Leibniz recurrence route -------------------------------------------

    def factorial_moments_recurrence(
        self, n_max: int, s_max: int, mode: Union[Mode, str] = Mode.EXACT
    ) -> MomentTable:
        """Fill ``beta_s(n)`` from

            n beta_s(n) = sum_{a+b+c=s} s!/(a!b!c!) (cost(n))_a
                           * sum_{i<n} beta_b(i) beta_c(n-1-i)

        The inner sums pairing ``beta_s`` with ``beta_0 = 1`` are running
        prefix sums; every other pairing only involves lower orders and is
        computed as a whole convolution before the sweep over ``n``.
        """
        mode = Mode(mode)
        if n_max < 0 or s_max < 1:
            raise ValueError("need n_max >= 0 and s_max >= 1")
        if mode is Mode.EXACT:
            rows = self._recurrence_exact(n_max, s_max)
        else:
            rows = self._recurrence_fixed_point(n_max, s_max)
        return MomentTable(n_max, s_max, mode, rows, self.model)

    def _recurrence_exact(self, n_max: int, s_max: int) -> list[list[Fraction]]:
        length = n_max + 1
        rows = [[Fraction(1)] * length]
        seq = [TruncatedSeries(rows[0])]
        conv: dict[tuple[int, int], TruncatedSeries] = {}
        for s in range(1, s_max + 1):
            for b in range(s):
                for c in range(b, min(s, s - b + 1)):
                    if (b, c) not in conv:
                        conv[b, c] = series_mul(seq[b], seq[c])
            row = [Fraction(0)] * length
            prefix = Fraction(0)
            for n in range(length):
                if n >= 2:
                    cost = self.model.cost(n)
                    acc = 2 * prefix
                    for a, b, c, mult in _leibniz_terms(s):
                        if b == s or c == s:
                            continue
                        ff = falling_factorial(cost, a)
                        if ff:
                            acc += mult * ff * conv[min(b, c), max(b, c)][n - 1]
                    row[n] = acc / n
                prefix += row[n]
            rows.append(row)
            seq.append(TruncatedSeries(row))
        return rows

    def _recurrence_fixed_point(self, n_max: int, s_max: int) -> list[list]:
        P = FLOAT_PREC_BITS
        one = 1 << P
        length = n_max + 1
        fixed = [[one] * length]
        conv: dict[tuple[int, int], list[int]] = {}
        for s in range(1, s_max + 1):
            for b in range(s):
                for c in range(b, min(s, s - b + 1)):
                    if (b, c) not in conv:
                        # products carry scale 2**(2P)
                        conv[b, c] = convolve(fixed[b], fixed[c], length)
            row = [0] * length
            prefix = 0
            for n in range(length):
                if n >= 2:
                    cost = self.model.cost(n)
                    acc = (2 * prefix) << P
                    for a, b, c, mult in _leibniz_terms(s):
                        if b == s or c == s:
                            continue
                        ff = falling_factorial(cost, a)
                        if ff:
                            acc += mult * ff * conv[min(b, c), max(b, c)][n - 1]
                    d = n << P
                    row[n] = (acc + d // 2) // d
                prefix += row[n]
            fixed.append(row)
        with mpmath.workprec(P + 64):
            return [[mpmath.ldexp(mpmath.mpf(v), -P) for v in r] for r in fixed]

    # -- ODE series route ----------------------------------------------------

    def moment_series(self, s: int, order: int) -> TruncatedSeries:
        """``f_s(u) = sum_n beta_s(n) u^n`` modulo ``u^(order+1)``.

        Only defined for the (n-1) cost model, where ``f_s`` satisfies
        ``f_s' - 2 f_s / (1-u) = p_s`` with ``p_s`` built from ``f_0..f_{s-1}``.
        """
        if self.model is not PivotCostModel.N_MINUS_1:
            raise ValueError("moment_series is derived for the (n-1) cost model only")
        if s < 0 or order < 0:
            raise ValueError("need s >= 0 and order >= 0")
        fs = self._series.setdefault(order, [binomial_pow_series(1, order)])
        while len(fs) <= s:
            fs.append(self._solve_next(fs, order))
        return fs[s]

    @staticmethod
    def _solve_next(fs: list[TruncatedSeries], order: int) -> TruncatedSeries:
        s = len(fs)

        def weighted(j: int, k: int) -> TruncatedSeries:
            # u^k f_j^(k) / (j! k!)
            if k > order:
                return TruncatedSeries.zero(order)
            term = series_derivative(fs[j], k).shift(k)
            return term.scale(Fraction(1, math.factorial(j) * math.factorial(k)))

        # grouped[w] = sum over j + k = w, j < s
        grouped = [series_sum([weighted(j, w - j) for j in range(min(w, s - 1) + 1)]) for w in range(s + 1)]
        halves = []
        for w in range(s // 2 + 1):
            prod = series_mul(grouped[w], grouped[s - w])
            halves.append(prod if 2 * w == s else prod.scale(2))
        p = series_sum(halves).scale(math.factorial(s)).coefficients

        # (1-u) f' - 2 f = (1-u) p  =>  (n+1) f_{n+1} = (n+2) f_n + p_n - p_{n-1}
        out = [Fraction(0)] * (order + 1)
        prev_p = Fraction(0)
        for n in range(order):
            out[n + 1] = ((n + 2) * out[n] + p[n] - prev_p) / (n + 1)
            prev_p = p[n]
        return TruncatedSeries(out)


_ENGINES: dict[PivotCostModel, QuicksortEngine] = {}


def engine(model: PivotCostModel = DEFAULT_MODEL) -> QuicksortEngine:
    """Shared per-model engine used by the module-level helpers."""
    if model not in _ENGINES:
        _ENGINES[model] = QuicksortEngine(model)
    return _ENGINES[model]


def pgf(n: int, model: PivotCostModel = DEFAULT_MODEL) -> PGFPolynomial:
    return engine(model).pgf(n)


def distribution(n: int, model: PivotCostModel = DEFAULT_MODEL) -> ComparisonDistribution:
    return engine(model).distribution(n)


def factorial_moments_recurrence(
    n_max: int,
    s_max: int,
    mode: Union[Mode, str] = Mode.EXACT,
    model: PivotCostModel = DEFAULT_MODEL,
) -> MomentTable:
    return engine(model).factorial_moments_recurrence(n_max, s_max, mode)


def moment_series(s: int, order: int) -> TruncatedSeries:
    return engine(DEFAULT_MODEL).moment_series(s, order)
