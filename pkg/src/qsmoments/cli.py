"""Command-line front end: ``qsmoments <command> [flags]``.

Every command produces a table rendered as CSV (one header line) or as
JSON ``{"columns": [...], "rows": [[...]], "meta": {...}}``.  Exact
rationals render as ``"p/q"`` strings, reals as 17-significant-digit
decimal strings, integers as integers.

Exit status: 0 on success, 1 on an invariant failure, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import mpmath

from . import __version__
from .asymptotics import (
    TransferExpansion,
    cross_check_c1,
    harmonic,
    harmonic_weighted_identity_check,
    moment_asymptotic,
    reciprocal_gamma_derivatives,
    relative_error,
    residual_diagnostic,
    to_mpf,
)
from .exact import (
    InvariantError,
    Mode,
    PivotCostModel,
    brute_force_distribution,
    distribution,
    factorial_moment_from_distribution,
    factorial_moments_recurrence,
    mean_closed_form,
    moment_series,
    pgf,
    raw_moments,
    variance,
)
from .series import coeff_exact, format_rational
from .simulate import RNG_ID, SimConfig, simulate

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE = 0, 1, 2

# largest n for which `simulate` reports z-scores against exact moments
Z_SCORE_MAX_N = 1000


class UsageError(Exception):
    pass


def render_cell(value):
    if value is None:
        return None
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, str):
        return value
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return mpmath.nstr(to_mpf(value), 17)


@dataclass
class OutputTable:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, *cells) -> None:
        if len(cells) != len(self.columns):
            raise InvariantError(f"row has {len(cells)} cells, header has {len(self.columns)}")
        self.rows.append(list(cells))

    def rendered_rows(self) -> list[list]:
        return [[render_cell(c) for c in row] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rendered_rows():
            writer.writerow(["" if c is None else c for c in row])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"columns": self.columns, "rows": self.rendered_rows(), "meta": self.meta}
        return json.dumps(doc, indent=2) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def _meta(args, **extra) -> dict:
    meta = {"version": __version__, "command": args.command, "mode": args.mode, "seed": None, "rng_id": None}
    meta.update(extra)
    return meta


def _model(args) -> PivotCostModel:
    return PivotCostModel(getattr(args, "model", "n-1"))


def _grid(text: str) -> list[int]:
    if not text.strip():
        return []
    try:
        sizes = [int(part) for part in text.split(",")]
    except ValueError:
        raise UsageError(f"grid must be comma-separated integers, got {text!r}")
    if any(n < 2 for n in sizes):
        raise UsageError("grid sizes must be >= 2")
    return sizes


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_dist(args) -> OutputTable:
    if args.n < 0:
        raise UsageError("--n must be >= 0")
    dist = distribution(args.n, _model(args))
    table = OutputTable(["k", "count", "probability"], meta=_meta(args, n=args.n, model=args.model))
    for k, c in dist.items():
        table.add(k, c, dist.probability(k))
    return table


def cmd_moments(args) -> OutputTable:
    if args.n_max < 0 or args.s_max < 1:
        raise UsageError("need --n-max >= 0 and --s-max >= 1")
    tab = factorial_moments_recurrence(args.n_max, args.s_max, args.mode, _model(args))
    table = OutputTable(["n", "s", "factorial_moment", "raw_moment", "variance"], meta=_meta(args, model=args.model))
    for n in range(args.n_max + 1):
        for s in range(1, args.s_max + 1):
            var = variance(tab, n) if s == 2 else None
            table.add(n, s, tab.get(n, s), raw_moments(tab, n, s), var)
    return table


def cmd_series(args) -> OutputTable:
    if args.s < 0 or args.order < 0:
        raise UsageError("need --s >= 0 and --order >= 0")
    f = moment_series(args.s, args.order)
    table = OutputTable(["n", "coefficient"], meta=_meta(args, s=args.s, order=args.order))
    for n, c in enumerate(f):
        table.add(n, c)
    return table


def cmd_compare(args) -> OutputTable:
    if args.s < 1:
        raise UsageError("--s must be >= 1")
    grid = _grid(args.grid)
    table = OutputTable(
        ["n", "factorial_moment", "asymptote", "relative_error", "scaled_residual"],
        meta=_meta(args, s=args.s, terms=args.terms),
    )
    if not grid:
        return table
    tab = factorial_moments_recurrence(max(grid), args.s, args.mode)
    residuals = dict(residual_diagnostic(tab, args.s, grid))
    for n in grid:
        beta = tab.get(n, args.s)
        asym = moment_asymptotic(args.s, n, args.terms)
        table.add(n, beta, asym, relative_error(asym, beta), residuals[n])
    return table


def cmd_transfer(args) -> OutputTable:
    if args.alpha < 1 or args.beta < 0 or args.n < 2:
        raise UsageError("need --alpha >= 1, --beta >= 0, --n >= 2")
    K = min(args.beta, 3) if args.k is None else args.k
    if K < 0:
        raise UsageError("--k must be >= 0")
    if K > args.beta:
        raise UsageError(
            f"--k {K} exceeds --beta {args.beta}: terms beyond k = beta vanish "
            "because of the falling factorial (beta)(beta-1)..."
        )
    expansion = TransferExpansion.build(args.alpha, args.beta, K)
    exact = coeff_exact(args.alpha, args.beta, args.n)
    table = OutputTable(
        ["k", "asymptotic", "exact", "relative_error"],
        meta=_meta(args, alpha=args.alpha, beta=args.beta, n=args.n),
    )
    for k in range(K + 1):
        approx = expansion(args.n, k)
        table.add(k, approx, exact, relative_error(approx, exact))
    return table


def cmd_simulate(args) -> OutputTable:
    try:
        config = SimConfig(args.n, args.trials, args.seed, _model(args), args.shards)
    except ValueError as exc:
        raise UsageError(str(exc))
    result = simulate(config)
    info = result.to_dict()
    exact = None
    if args.n <= Z_SCORE_MAX_N:
        exact = factorial_moments_recurrence(args.n, 4, Mode.EXACT, config.model)

    columns = ["n", "trials", "seed", "rng_id", "shards", "mean", "variance", "stderr"]
    cells = [info[c] for c in columns]
    for s in range(1, 5):
        columns += [f"beta_hat_{s}", f"stderr_{s}", f"exact_{s}", f"z_{s}"]
        est, se = result.beta_hat(s), result.beta_stderr(s)
        z = ex = None
        if exact is not None:
            ex = exact.get(args.n, s)
            if se > 0:
                z = (est - float(ex)) / se
            elif Fraction(result.power_sums[s], result.trials) == ex:
                z = 0.0
        cells += [est, se, ex, z]
    table = OutputTable(columns, meta=_meta(args, seed=args.seed, rng_id=RNG_ID, model=args.model))
    table.add(*cells)
    return table


# ---------------------------------------------------------------------------
# self test
# ---------------------------------------------------------------------------


def _check_oracle():
    for n in range(1, 9):
        if distribution(n).counts != brute_force_distribution(n).counts:
            return False, f"n={n}"
    return True, "n=1..8"


def _check_three_routes():
    tab = factorial_moments_recurrence(40, 4)
    series = [moment_series(s, 40) for s in range(5)]
    for n in range(41):
        dist = distribution(n)
        for s in range(1, 5):
            a = factorial_moment_from_distribution(dist, s)
            if not a == tab.get(n, s) == series[s][n]:
                return False, f"n={n}, s={s}"
    return True, "s=1..4, n=0..40"


def _check_known_values():
    tab = factorial_moments_recurrence(4, 2)
    expected = [
        (tab.get(3, 1), Fraction(8, 3)),
        (tab.get(4, 1), Fraction(29, 6)),
        (tab.get(3, 2), Fraction(14, 3)),
        (variance(tab, 3), Fraction(2, 9)),
    ]
    if any(a != b for a, b in expected) or distribution(4).counts != {4: 12, 5: 4, 6: 8}:
        return False, "small-n values"
    for n in range(1, 41):
        if distribution(n).counts.get(n * (n - 1) // 2) != 2 ** (n - 1):
            return False, f"worst-case tail n={n}"
    return True, "beta_1(3), beta_1(4), beta_2(3), var(3), a_4, tails n<=40"


def _check_mean_closed_form():
    tab = factorial_moments_recurrence(200, 1)
    bad = [n for n in range(201) if tab.get(n, 1) != mean_closed_form(n)]
    return not bad, f"first mismatch n={bad[0]}" if bad else "n<=200"


def _check_pgf_normalization():
    bad = [n for n in range(41) if pgf(n)(1) != 1]
    return not bad, f"n={bad}" if bad else "G_n(1)=1, n<=40"


def _check_harmonic_identity():
    bad = [s for s in range(2, 51) if not harmonic_weighted_identity_check(s)]
    return not bad, f"s={bad}" if bad else "s=2..50"


def _check_series_kernel():
    bad = [n for n in range(0, 201, 20) if coeff_exact(1, 1, n) != harmonic(n)]
    return not bad, f"n={bad}" if bad else "[u^n] L/(1-u) = H_n"


def _check_c1():
    err = cross_check_c1(range(2, 12))
    return err < 1e-10, f"max error {err:.3g}"


def _check_ck_finite_difference():
    h = 1e-4

    def rg(x):
        return 1.0 / math.gamma(x)

    worst = 0.0
    for alpha in (2, 3, 4):
        fd1 = (rg(alpha + h) - rg(alpha - h)) / (2 * h)
        fd2 = (rg(alpha + h) - 2 * rg(alpha) + rg(alpha - h)) / h**2
        c = reciprocal_gamma_derivatives(alpha, 2)
        scale = math.factorial(alpha - 1)
        worst = max(worst, abs(float(c[1]) - scale * fd1), abs(float(c[2]) - scale * fd2))
    return worst < 1e-6, f"max deviation {worst:.3g}"


SELFTEST_CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("oracle equivalence", _check_oracle),
    ("three-route agreement", _check_three_routes),
    ("known values", _check_known_values),
    ("mean closed form", _check_mean_closed_form),
    ("pgf normalization", _check_pgf_normalization),
    ("harmonic identity", _check_harmonic_identity),
    ("series kernel", _check_series_kernel),
    ("C_1 digamma check", _check_c1),
    ("C_k finite-difference check", _check_ck_finite_difference),
]


def cmd_selftest(args) -> OutputTable:
    table = OutputTable(["check", "status", "detail"], meta=_meta(args))
    for name, check in SELFTEST_CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # a crash is a failed invariant, report and continue
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        table.add(name, "PASS" if ok else "FAIL", detail)
    table.meta["passed"] = all(row[1] == "PASS" for row in table.rows)
    return table


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--mode", choices=("exact", "float"), default="exact")
    common.add_argument("--out", default=None, help="output path (default: stdout)")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--model", choices=("n-1", "n+1"), default="n-1",
                       help="comparisons charged per partition of a subarray of length n")

    parser = argparse.ArgumentParser(
        prog="qsmoments",
        description="Exact and asymptotic moments of quicksort comparison counts.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", parents=[common, model], help="exact distribution a_{n,k}")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("moments", parents=[common, model], help="factorial and raw moments")
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--s-max", type=int, required=True)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("series", parents=[common], help="coefficients of f_s(u)")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--order", type=int, required=True)
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("compare", parents=[common], help="exact moments vs the two-term asymptote")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--grid", required=True, help="comma-separated sizes, e.g. 100,1000,10000")
    p.add_argument("--terms", type=int, choices=(1, 2), default=2)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("transfer", parents=[common], help="[u^n] L^beta (1-u)^-alpha, exact vs expansion")
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--beta", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None, help="truncation depth (default min(beta, 3))")
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("simulate", parents=[common, model], help="Monte Carlo moment estimates")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shards", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("selftest", parents=[common], help="run the invariant suite")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        table = args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"qsmoments {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantError as exc:
        print(f"qsmoments {args.command}: invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT

    text = table.render(args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    if args.command == "selftest" and not table.meta["passed"]:
        failed = ", ".join(row[0] for row in table.rows if row[1] == "FAIL")
        print(f"selftest failed: {failed}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
