import io

import numpy as np
import pytest
from numpy.random import PCG64, Generator

from pooled_annuity.fund import (
    FundParams,
    IncomePath,
    StabilityCriterion,
    simulate_income_path,
    simulate_income_path_explicit,
    stable_prefix_deaths,
    write_trace_csv,
)
from pooled_annuity.lifetable import LifeTableError, annuity_factor, survival_period_grid


def _params(n=50, age=90, rate=0.004):
    return FundParams(n_members=n, entry_age=age, initial_wealth=1e5, rate_per_period=rate)


class TestValidation:
    def test_fund_params(self):
        with pytest.raises(ValueError):
            FundParams(n_members=1, entry_age=70, initial_wealth=1.0, rate_per_period=0.0)
        with pytest.raises(ValueError):
            FundParams(n_members=10, entry_age=70, initial_wealth=0.0, rate_per_period=0.0)
        with pytest.raises(ValueError):
            FundParams(n_members=10, entry_age=70, initial_wealth=1.0, rate_per_period=-1.0)
        with pytest.raises(ValueError):
            FundParams(n_members=10, entry_age=70, initial_wealth=1.0, rate_per_period=0.0, periods_per_year=0)

    def test_stability_criterion(self):
        with pytest.raises(ValueError):
            StabilityCriterion(eps_lower=0.0)
        with pytest.raises(ValueError):
            StabilityCriterion(eps_lower=0.1, eps_upper=0.0)
        with pytest.raises(ValueError):
            StabilityCriterion(eps_lower=0.1, beta=1.0)

    def test_entry_age_must_be_covered(self, toy_table):
        rng = Generator(PCG64(0))
        with pytest.raises(LifeTableError):
            simulate_income_path(_params(age=89), toy_table, rng)


class TestSimulatorAgreement:
    def test_recursion_matches_explicit(self, toy_table):
        for seed in range(50):
            a = simulate_income_path(_params(), toy_table, Generator(PCG64(seed)))
            b = simulate_income_path_explicit(_params(), toy_table, Generator(PCG64(seed)))
            assert np.array_equal(a.survivors, b.survivors)
            assert np.array_equal(a.death_times, b.death_times)
            assert np.allclose(a.income, b.income, rtol=1e-9, atol=0.0)

    def test_agreement_on_full_table(self, gompertz_table):
        p = _params(n=100, age=70)
        a = simulate_income_path(p, gompertz_table, Generator(PCG64(11)))
        b = simulate_income_path_explicit(p, gompertz_table, Generator(PCG64(11)))
        assert np.allclose(a.income, b.income, rtol=1e-9, atol=0.0)

    def test_both_consume_one_draw_per_member(self, toy_table):
        r1 = Generator(PCG64(7))
        simulate_income_path(_params(), toy_table, r1)
        r2 = Generator(PCG64(7))
        simulate_income_path_explicit(_params(), toy_table, r2)
        assert r1.random() == r2.random()


class TestPathStructure:
    def test_death_times_sorted_and_complete(self, toy_table):
        path = simulate_income_path(_params(), toy_table, Generator(PCG64(3)))
        assert path.n_members == 50
        assert np.all(np.diff(path.death_times) >= 0.0)
        assert path.death_times[-1] <= 5 * 12  # table exhausts after five years

    def test_survivors_match_death_periods(self, toy_table):
        path = simulate_income_path(_params(), toy_table, Generator(PCG64(3)))
        per_period = np.bincount(
            np.floor(path.death_times).astype(int), minlength=len(path.survivors) - 1
        )
        assert np.array_equal(-np.diff(path.survivors), per_period[: len(path.survivors) - 1])

    def test_survivors_end_at_extinction(self, toy_table):
        path = simulate_income_path(_params(), toy_table, Generator(PCG64(9)))
        assert path.survivors[0] == 50
        assert path.survivors[-1] == 0
        assert np.all(path.survivors[:-1] > 0)
        assert len(path.income) == len(path.survivors) - 1

    def test_initial_income_is_wealth_over_annuity(self, toy_table):
        path = simulate_income_path_explicit(_params(), toy_table, Generator(PCG64(5)))
        a0 = annuity_factor(toy_table, 90 * 12, 0.004)
        assert path.wealth[0] == 1e5
        assert path.income[0] == pytest.approx(1e5 / a0, rel=1e-12)


class TestFundMechanics:
    def test_conservation_of_fund_value(self, toy_table):
        # survivors * account must grow at exactly (1+R) on the post-payment
        # balance: longevity credits move money between accounts, never create it
        path = simulate_income_path_explicit(_params(), toy_table, Generator(PCG64(21)))
        for s in range(len(path.income) - 1):
            before = path.survivors[s] * (path.wealth[s] - path.income[s]) * 1.004
            after = path.survivors[s + 1] * path.wealth[s + 1]
            assert after == pytest.approx(before, rel=1e-12)

    def test_credits_never_negative(self, toy_table):
        for seed in range(10):
            path = simulate_income_path_explicit(_params(), toy_table, Generator(PCG64(seed)))
            assert np.all(path.wealth >= path.income)

    def test_income_ratio_independent_of_rate(self, toy_table):
        a = simulate_income_path(_params(rate=0.0), toy_table, Generator(PCG64(13)))
        b = simulate_income_path(_params(rate=0.004), toy_table, Generator(PCG64(13)))
        assert np.allclose(a.income / a.income[0], b.income / b.income[0], rtol=1e-9, atol=0.0)

    def test_zero_death_period_scales_income_by_survival(self, gompertz_table):
        p = _params(n=10, age=70)
        path = simulate_income_path(p, gompertz_table, Generator(PCG64(2)))
        s = survival_period_grid(gompertz_table, 70)
        assert path.survivors[1] == 10  # no first-month deaths at this seed
        assert path.income[1] / path.income[0] == pytest.approx(s[1], rel=1e-12)


def _path(income, survivors):
    return IncomePath(
        death_times=np.zeros(survivors[0]),
        survivors=np.asarray(survivors),
        income=np.asarray(income, dtype=float),
    )


class TestStablePrefix:
    def test_lower_breach_counts_prior_deaths(self):
        path = _path([100.0, 96.0, 91.0, 89.0], [10, 9, 8, 6, 0])
        assert stable_prefix_deaths(path, StabilityCriterion(eps_lower=0.1)) == 4
        assert stable_prefix_deaths(path, StabilityCriterion(eps_lower=0.05)) == 2

    def test_upper_breach(self):
        path = _path([100.0, 104.0, 107.0], [10, 9, 8, 0])
        crit = StabilityCriterion(eps_lower=0.5, eps_upper=0.05)
        assert stable_prefix_deaths(path, crit) == 2
        # without an upper threshold the rise is not a breach
        assert stable_prefix_deaths(path, StabilityCriterion(eps_lower=0.5)) == 10

    def test_band_edges_are_inclusive(self):
        path = _path([100.0, 90.0, 110.0], [10, 9, 8, 0])
        crit = StabilityCriterion(eps_lower=0.1, eps_upper=0.1)
        assert stable_prefix_deaths(path, crit) == 10

    def test_wide_band_reaches_full_membership(self, toy_table):
        crit = StabilityCriterion(eps_lower=0.999999)
        for seed in range(5):
            path = simulate_income_path(_params(), toy_table, Generator(PCG64(seed)))
            assert stable_prefix_deaths(path, crit) == 50

    def test_hairline_band_breaks_at_first_move(self, toy_table):
        crit = StabilityCriterion(eps_lower=1e-9, eps_upper=1e-9)
        for seed in range(5):
            path = simulate_income_path(_params(), toy_table, Generator(PCG64(seed)))
            assert stable_prefix_deaths(path, crit) == 50 - path.survivors[1]


class TestTraceCsv:
    def test_row_shape_and_blank_terminal_income(self, toy_table):
        path = simulate_income_path(_params(n=5), toy_table, Generator(PCG64(4)))
        buf = io.StringIO()
        write_trace_csv(path, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "period,survivors,income"
        assert len(lines) == 1 + len(path.survivors)
        assert lines[-1].endswith(",0,")
        period, survivors, income = lines[1].split(",")
        assert (period, survivors) == ("0", "5")
        assert float(income) == path.income[0]
