"""Coefficient asymptotics for ``L(u)^beta (1-u)^(-alpha)`` and the moment asymptote.

Real arithmetic here uses mpmath at ``WORK_DPS`` decimal digits.  The
polygamma values at positive integers need only exact harmonic sums plus
one zeta constant, so the constants are embedded as literals.  Logarithms
are natural throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import mpmath

from .exact import MomentTable
from .series import (
    TruncatedSeries,
    binomial_pow_series,
    falling_factorial,
    log_inv_series,
    series_add,
    series_mul,
)

WORK_DPS = 40

EULER_GAMMA = "0.5772156649015328606065120900824024310422"

# zeta(2) .. zeta(12), 40 significant digits
ZETA = {
    2: "1.644934066848226436472415166646025189219",
    3: "1.202056903159594285399738161511449990765",
    4: "1.082323233711138191516003696541167902775",
    5: "1.036927755143369926331365486457034168057",
    6: "1.017343061984449139714517929790920527902",
    7: "1.008349277381922826839797549849796759600",
    8: "1.004077356197944339378685238508652465259",
    9: "1.002008392826082214417852769232412060486",
    10: "1.000994575127818085337145958900319017006",
    11: "1.000494188604119464558702282526469936469",
    12: "1.000246086553308048298637998047739670960",
}
MAX_POLYGAMMA_ORDER = max(ZETA) - 1

Real = Union[float, mpmath.mpf]


def euler_gamma() -> mpmath.mpf:
    return mpmath.mpf(EULER_GAMMA)


def to_mpf(x) -> mpmath.mpf:
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def harmonic(s: int, r: int = 1) -> Fraction:
    """Generalized harmonic number ``sum_{k=1}^{s} k^(-r)`` (``H_0 = 0``)."""
    if s < 0 or r < 1:
        raise ValueError("need s >= 0 and r >= 1")
    return sum((Fraction(1, k**r) for k in range(1, s + 1)), Fraction(0))


def polygamma_at_integer(r: int, m: int) -> mpmath.mpf:
    """``psi^(r)(m)`` for a positive integer ``m``."""
    if m < 1:
        raise ValueError("polygamma is evaluated at positive integers only")
    if not 0 <= r <= MAX_POLYGAMMA_ORDER:
        raise ValueError(f"polygamma order must lie in 0..{MAX_POLYGAMMA_ORDER}")
    with mpmath.workdps(WORK_DPS):
        if r == 0:
            return to_mpf(harmonic(m - 1)) - euler_gamma()
        tail = mpmath.mpf(ZETA[r + 1]) - to_mpf(harmonic(m - 1, r + 1))
        return (-1) ** (r + 1) * math.factorial(r) * tail


def reciprocal_gamma_derivatives(alpha: int, K: int) -> list[mpmath.mpf]:
    """``C_k = (alpha-1)! * (d/dx)^k [1/Gamma(x)]`` at ``x = alpha`` for ``k = 0..K``.

    With ``1/Gamma = exp(h)``, ``h = -log Gamma``, the derivatives follow the
    complete Bell polynomial recursion
    ``g^(k) = sum_{j<k} C(k-1, j) h^(j+1) g^(k-1-j)``, where
    ``h^(j+1)(alpha) = -psi^(j)(alpha)``.  Normalizing ``g(alpha)`` to 1
    absorbs the factor ``(alpha-1)!/Gamma(alpha) = 1``.
    """
    if alpha < 1 or K < 0:
        raise ValueError("need alpha >= 1 and K >= 0")
    with mpmath.workdps(WORK_DPS):
        h = [-polygamma_at_integer(j, alpha) for j in range(K)]
        g = [mpmath.mpf(1)]
        for k in range(1, K + 1):
            g.append(mpmath.fsum(math.comb(k - 1, j) * h[j] * g[k - 1 - j] for j in range(k)))
        return g


@dataclass(frozen=True)
class TransferExpansion:
    """Descending-log expansion of ``[u^n] L(u)^beta (1-u)^(-alpha)``."""

    alpha: int
    beta: int
    C: tuple[mpmath.mpf, ...]

    @property
    def K(self) -> int:
        return len(self.C) - 1

    @classmethod
    def build(cls, alpha: int, beta: int, K: Optional[int] = None) -> "TransferExpansion":
        if K is None:
            K = min(beta, 3)
        if K > beta:
            raise ValueError(
                f"K={K} exceeds beta={beta}: terms beyond k = beta vanish "
                "because of the falling factorial (beta)_k"
            )
        return cls(alpha, beta, tuple(reciprocal_gamma_derivatives(alpha, K)))

    def __call__(self, n: int, K: Optional[int] = None) -> mpmath.mpf:
        if n < 2:
            raise ValueError("the expansion needs n >= 2")
        K = self.K if K is None else K
        if K > self.K:
            raise ValueError(f"expansion only carries terms up to K={self.K}")
        with mpmath.workdps(WORK_DPS):
            logn = mpmath.log(n)
            corr = mpmath.fsum(
                self.C[k] / math.factorial(k) * falling_factorial(self.beta, k) / logn**k
                for k in range(K + 1)
            )
            return mpmath.mpf(n) ** (self.alpha - 1) / math.factorial(self.alpha - 1) * logn**self.beta * corr


def transfer_coeff_asymptotic(alpha: int, beta: int, n: int, K: Optional[int] = None) -> mpmath.mpf:
    if n < 2:
        raise ValueError("the expansion needs n >= 2")
    return TransferExpansion.build(alpha, beta, K)(n)


@dataclass(frozen=True)
class MomentAsymptote:
    """``2^s n^s log^s n + 2^s s (gamma - 2) n^s log^(s-1) n``."""

    s: int

    @property
    def leading(self) -> int:
        return 2**self.s

    @property
    def second(self) -> mpmath.mpf:
        with mpmath.workdps(WORK_DPS):
            return 2**self.s * self.s * (euler_gamma() - 2)

    @property
    def remainder_exponents(self) -> tuple[int, int]:
        return self.s, self.s - 2

    def __call__(self, n: int, terms: int = 2) -> mpmath.mpf:
        if n < 2:
            raise ValueError("the asymptote needs n >= 2")
        if terms not in (1, 2):
            raise ValueError("terms must be 1 or 2")
        with mpmath.workdps(WORK_DPS):
            logn = mpmath.log(n)
            ns = mpmath.mpf(n) ** self.s
            value = self.leading * ns * logn**self.s
            if terms == 2:
                value += self.second * ns * logn ** (self.s - 1)
            return value


def moment_asymptotic(s: int, n: int, terms: int = 2) -> mpmath.mpf:
    if s < 1:
        raise ValueError("moment order must be >= 1")
    return MomentAsymptote(s)(n, terms)


def residual_diagnostic(
    table: MomentTable, s: int, grid: Iterable[int]
) -> list[tuple[int, mpmath.mpf]]:
    """``(beta_s(n) - asymptote) / (n^s log^(s-2) n)`` at each grid size."""
    out = []
    for n in grid:
        beta = table.get(n, s)
        with mpmath.workdps(WORK_DPS):
            scale = mpmath.mpf(n) ** s * mpmath.log(n) ** (s - 2)
            out.append((n, (to_mpf(beta) - moment_asymptotic(s, n)) / scale))
    return out


@dataclass(frozen=True)
class FsLeadingForm:
    """Two leading terms of ``f_s(u)`` near ``u = 1``:

    ``first * L^s (1-u)^-(s+1) + second * L^(s-1) (1-u)^-(s+1)``.
    """

    s: int
    first: Fraction
    second: Fraction

    def series(self, order: int) -> TruncatedSeries:
        """The two-term form expanded exactly to ``u^order``."""
        pole = binomial_pow_series(self.s + 1, order)
        log = log_inv_series(order)
        powers = [pole]
        for _ in range(self.s):
            powers.append(series_mul(powers[-1], log))
        out = powers[self.s].scale(self.first)
        if self.s >= 1 and self.second:
            out = series_add(out, powers[self.s - 1].scale(self.second))
        return out


def fs_leading_terms(s: int) -> FsLeadingForm:
    if s < 0:
        raise ValueError("s must be non-negative")
    first = Fraction(2**s * math.factorial(s))
    return FsLeadingForm(s, first, s * (harmonic(s) - 2) * first)


def harmonic_weighted_identity_check(s: int) -> bool:
    """Check ``sum_{k<s} k H_k == s (s-1)/2 * (H_s - 1/2)`` exactly."""
    if s < 2:
        raise ValueError("identity is stated for s >= 2")
    lhs = sum((k * harmonic(k) for k in range(1, s)), Fraction(0))
    rhs = Fraction(s * (s - 1), 2) * (harmonic(s) - Fraction(1, 2))
    return lhs == rhs


def relative_error(approx: Real, exact) -> mpmath.mpf:
    with mpmath.workdps(WORK_DPS):
        ex = to_mpf(exact)
        return abs(to_mpf(approx) - ex) / abs(ex)


def cross_check_c1(alphas: Sequence[int]) -> float:
    """Largest ``|C_1(alpha) - (gamma - H_{alpha-1})|`` over ``alphas``."""
    worst = mpmath.mpf(0)
    with mpmath.workdps(WORK_DPS):
        for a in alphas:
            c1 = reciprocal_gamma_derivatives(a, 1)[1]
            worst = max(worst, abs(c1 - (euler_gamma() - to_mpf(harmonic(a - 1)))))
    return float(worst)
