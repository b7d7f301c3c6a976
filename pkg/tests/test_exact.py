import itertools
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsmoments.exact import (
    InvariantError,
    Mode,
    PivotCostModel,
    QuicksortEngine,
    brute_force_distribution,
    distribution,
    factorial_moment_from_distribution,
    factorial_moments_recurrence,
    mean_closed_form,
    moment_series,
    partition_stages,
    pgf,
    quicksort_count,
    raw_moments,
    stirling2,
    variance,
)

N_PLUS_1 = PivotCostModel.N_PLUS_1


def recursive_sort_count(arr):
    """Textbook recursive version, kept separate from the library's stack loop."""
    if len(arr) < 2:
        return 0
    pivot, rest = arr[0], arr[1:]
    return len(rest) + recursive_sort_count([x for x in rest if x < pivot]) + recursive_sort_count(
        [x for x in rest if x > pivot]
    )


class TestQuicksortCount:
    def test_single(self):
        assert quicksort_count([1]) == 0

    def test_hand_trace(self):
        assert quicksort_count([2, 1, 3]) == 2

    @pytest.mark.parametrize("n", [1, 2, 5, 30, 400])
    def test_sorted_input_is_worst_case(self, n):
        assert quicksort_count(list(range(n))) == n * (n - 1) // 2

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            quicksort_count([1, 2, 2])

    @given(st.permutations(list(range(12))))
    def test_matches_recursive_version(self, perm):
        assert quicksort_count(perm) == recursive_sort_count(perm)

    @given(st.permutations(list(range(10))))
    def test_n_plus_1_adds_two_per_stage(self, perm):
        assert quicksort_count(perm, N_PLUS_1) == quicksort_count(perm) + 2 * partition_stages(perm)


class TestPGF:
    def test_empty_array(self):
        assert pgf(0).coefficients == (1,)

    def test_two(self):
        g = pgf(2)
        assert g.coefficients == (0, 1)

    def test_three(self):
        assert pgf(3).coefficients == (0, 0, Fraction(1, 3), Fraction(2, 3))

    @pytest.mark.parametrize("n", [0, 1, 2, 5, 17, 40])
    def test_normalized(self, n):
        assert pgf(n)(1) == 1

    @pytest.mark.parametrize("n", [1, 2, 6, 25])
    def test_degree(self, n):
        assert pgf(n).degree == n * (n - 1) // 2

    def test_coefficients_nonnegative(self):
        assert all(c >= 0 for c in pgf(20).coefficients)


class TestDistribution:
    def test_three(self):
        assert distribution(3).counts == {2: 2, 3: 4}

    def test_four(self):
        assert distribution(4).counts == {4: 12, 5: 4, 6: 8}

    def test_one(self):
        assert distribution(1).counts == {0: 1}

    def test_four_by_independent_enumeration(self):
        tally = {}
        for p in itertools.permutations(range(4)):
            k = recursive_sort_count(list(p))
            tally[k] = tally.get(k, 0) + 1
        assert tally == {4: 12, 5: 4, 6: 8}

    @pytest.mark.parametrize("n", range(1, 8))
    def test_oracle_equivalence(self, n):
        assert distribution(n).counts == brute_force_distribution(n).counts

    @pytest.mark.parametrize("n", range(1, 7))
    def test_oracle_equivalence_n_plus_1(self, n):
        assert distribution(n, N_PLUS_1).counts == brute_force_distribution(n, N_PLUS_1).counts

    def test_normalization_and_tail(self):
        for n in range(1, 41):
            d = distribution(n)
            assert d.total == math.factorial(n)
            assert d.counts[n * (n - 1) // 2] == 2 ** (n - 1)

    def test_integrality_violation_is_loud(self):
        eng = QuicksortEngine()
        eng.pgf(3)
        nums, den = eng._pgf[3]
        eng._pgf[3] = (nums, den * 7)
        with pytest.raises(InvariantError):
            eng.distribution(3)


class TestBruteForce:
    def test_two(self):
        assert brute_force_distribution(2).counts == {1: 2}

    def test_three(self):
        assert brute_force_distribution(3).counts == {2: 2, 3: 4}

    @pytest.mark.parametrize("n", [0, 10])
    def test_guard(self, n):
        with pytest.raises(ValueError):
            brute_force_distribution(n)


class TestMomentsFromDistribution:
    def test_mean_three(self):
        assert factorial_moment_from_distribution(distribution(3), 1) == Fraction(8, 3)

    def test_second_three(self):
        assert factorial_moment_from_distribution(distribution(3), 2) == Fraction(14, 3)

    @pytest.mark.parametrize("n", [0, 1, 5, 12])
    def test_zeroth_is_one(self, n):
        assert factorial_moment_from_distribution(distribution(n), 0) == 1


@pytest.fixture(scope="module")
def table60():
    return factorial_moments_recurrence(60, 4)


@pytest.fixture(scope="module")
def table10():
    return factorial_moments_recurrence(10, 4)


class TestRecurrence:
    def test_known_values(self, table60):
        assert table60[4, 1] == Fraction(29, 6)
        assert table60[3, 2] == Fraction(14, 3)
        assert table60[2, 1] == 1

    def test_boundary_rows(self, table60):
        for s in range(1, 5):
            assert table60[0, s] == table60[1, s] == 0
        assert all(table60[n, 0] == 1 for n in range(61))

    def test_nonnegative(self, table60):
        assert all(table60[n, s] >= 0 for n in range(61) for s in range(5))

    def test_matches_distribution_route(self, table60):
        for n in range(25):
            d = distribution(n)
            for s in range(1, 5):
                assert table60[n, s] == factorial_moment_from_distribution(d, s)

    def test_missing_entry(self, table60):
        with pytest.raises(ValueError):
            table60.get(61, 1)
        with pytest.raises(ValueError):
            table60.get(3, 5)

    def test_float_mode_precision(self):
        exact = factorial_moments_recurrence(400, 3)
        approx = factorial_moments_recurrence(400, 3, Mode.FLOAT)
        assert approx.mode is Mode.FLOAT
        worst = 0
        with mpmath.workdps(60):
            for n in range(2, 401):
                for s in range(1, 4):
                    ex = exact[n, s]
                    if ex:
                        ref = mpmath.mpf(ex.numerator) / ex.denominator
                        worst = max(worst, abs(approx[n, s] - ref) / ref)
        assert worst < 1e-30

    def test_n_plus_1_model_matches_its_distribution(self):
        tab = factorial_moments_recurrence(12, 3, model=N_PLUS_1)
        for n in range(13):
            d = distribution(n, N_PLUS_1)
            for s in range(1, 4):
                assert tab[n, s] == factorial_moment_from_distribution(d, s)

    def test_pivot_cost_model_consistency(self):
        plus = factorial_moments_recurrence(6, 1, model=N_PLUS_1)
        minus = factorial_moments_recurrence(6, 1)
        for n in range(1, 7):
            perms = list(itertools.permutations(range(n)))
            stages = Fraction(sum(partition_stages(p) for p in perms), len(perms))
            assert plus[n, 1] - minus[n, 1] == 2 * stages


class TestMeanClosedForm:
    def test_against_brute_force(self):
        for n in range(1, 9):
            assert mean_closed_form(n) == factorial_moment_from_distribution(brute_force_distribution(n), 1)

    def test_recurrence_up_to_200(self):
        tab = factorial_moments_recurrence(200, 1)
        assert all(tab[n, 1] == mean_closed_form(n) for n in range(201))


class TestMomentSeries:
    def test_first_moment(self):
        assert moment_series(1, 4).coefficients == (0, 0, 1, Fraction(8, 3), Fraction(29, 6))

    def test_second_moment_at_three(self):
        assert moment_series(2, 6)[3] == Fraction(14, 3)

    def test_zeroth_is_geometric(self):
        assert moment_series(0, 5).coefficients == (1,) * 6

    def test_tiny_order(self):
        # derivatives beyond the order vanish rather than fail
        assert moment_series(3, 1).coefficients == (0, 0)

    def test_three_routes(self):
        tab = factorial_moments_recurrence(40, 4)
        for s in range(1, 5):
            f = moment_series(s, 40)
            for n in range(41):
                assert f[n] == tab[n, s]

    def test_rejects_other_model(self):
        with pytest.raises(ValueError):
            QuicksortEngine(N_PLUS_1).moment_series(1, 5)


class TestRawMoments:
    def test_second_raw(self, table10):
        assert raw_moments(table10, 3, 2) == Fraction(22, 3)

    def test_variance(self, table10):
        assert variance(table10, 3) == Fraction(2, 9)

    def test_first_raw_is_mean(self, table10):
        assert raw_moments(table10, 9, 1) == table10[9, 1]

    def test_raw_moments_by_enumeration(self, table10):
        d = distribution(7)
        for s in range(5):
            direct = Fraction(sum(k**s * c for k, c in d.counts.items()), math.factorial(7))
            assert raw_moments(table10, 7, s) == direct

    def test_missing(self, table10):
        with pytest.raises(ValueError):
            raw_moments(table10, 11, 2)

    def test_stirling(self):
        assert [stirling2(4, j) for j in range(5)] == [0, 1, 7, 6, 1]
        assert stirling2(0, 0) == 1
