"""Rank correlation, permutation tests, reciprocal fits, rank tables."""

from __future__ import annotations

import io
import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings, strategies as st

from wordtradeoff.measures import AggregateMeasurement
from wordtradeoff.stats import (
    BookFit,
    CorrelationMatrix,
    InsufficientDataError,
    correlation_matrix,
    exact_perm_test,
    fit_reciprocal,
    rank_books,
    rank_histograms,
    spearman,
    write_corr_matrix_csv,
    write_fits_csv,
    write_rank_hist_csv,
    write_ranks_csv,
)

# Rankings of n=6 with sum(d^2) = 10 (r_s = 5/7) and 8 (r_s = 27/35).
X6 = (1, 2, 3, 4, 5, 6)
Y_D2_10 = (3, 2, 1, 4, 6, 5)
Y_D2_8 = (3, 1, 2, 5, 4, 6)


def agg(group, book_id, d_order, d_structure, count=1):
    return AggregateMeasurement(
        group=group,
        book_id=book_id,
        mean_d_order=d_order,
        mean_d_structure=d_structure,
        std_d_order=None,
        std_d_structure=None,
        count=count,
    )


class TestSpearman:
    def test_identical_rankings(self):
        assert spearman([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)

    def test_reversed_rankings(self):
        assert spearman([1, 2, 3, 4], [8, 6, 4, 2]) == pytest.approx(-1.0)

    def test_sum_d2_10_case(self):
        assert sum((a - b) ** 2 for a, b in zip(X6, Y_D2_10)) == 10
        assert spearman(X6, Y_D2_10) == pytest.approx(0.714286, abs=1e-6)

    def test_matches_closed_formula_without_ties(self):
        x = [3, 1, 4, 1.5, 5, 9, 2.6]
        y = [2, 7, 1, 8, 2.8, 0.5, 9]
        n = len(x)
        rx = scipy.stats.rankdata(x)
        ry = scipy.stats.rankdata(y)
        d2 = float(np.sum((rx - ry) ** 2))
        assert spearman(x, y) == pytest.approx(1 - 6 * d2 / (n * (n * n - 1)))

    @given(
        st.lists(
            st.floats(min_value=-100, max_value=100, allow_nan=False),
            min_size=3,
            max_size=25,
        ),
        st.randoms(use_true_random=False),
    )
    @settings(max_examples=150, deadline=None)
    def test_agrees_with_scipy_including_ties(self, xs, rnd):
        ys = xs[:]
        rnd.shuffle(ys)
        if len(set(xs)) < 2:
            return
        expected = scipy.stats.spearmanr(xs, ys).statistic
        assert spearman(xs, ys) == pytest.approx(expected, abs=1e-12)

    def test_monotone_transform_invariance(self):
        x = [0.3, 1.9, 0.01, 7.4, 2.2]
        y = [5.0, 1.2, 9.9, 0.4, 3.3]
        base = spearman(x, y)
        assert spearman([math.exp(v) for v in x], y) == pytest.approx(base)
        assert spearman(x, [v**3 for v in y]) == pytest.approx(base)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            spearman([1, 2], [1, 2, 3])

    def test_zero_variance(self):
        with pytest.raises(ValueError, match="zero-variance"):
            spearman([1.0, 1.0, 1.0], [1, 2, 3])


class TestExactPermTest:
    def test_d2_10_gives_49_of_720(self):
        result = exact_perm_test(X6, Y_D2_10, alternative="greater")
        assert result.r_s == pytest.approx(5 / 7)
        assert result.p_value == Fraction(49, 720)
        assert result.extreme_count == 49
        assert result.n_permutations == 720

    def test_d2_8_gives_37_of_720(self):
        result = exact_perm_test(X6, Y_D2_8, alternative="greater")
        assert result.r_s == pytest.approx(27 / 35)
        assert result.p_value == Fraction(37, 720)

    def test_perfect_agreement_is_1_of_720(self):
        result = exact_perm_test(X6, X6, alternative="greater")
        assert result.p_value == Fraction(1, 720)

    def test_less_alternative_mirrors(self):
        reversed_y = tuple(reversed(X6))
        result = exact_perm_test(X6, reversed_y, alternative="less")
        assert result.p_value == Fraction(1, 720)

    def test_two_sided_doubles_symmetric_tail(self):
        greater = exact_perm_test(X6, X6, alternative="greater")
        two_sided = exact_perm_test(X6, X6, alternative="two_sided")
        assert two_sided.p_value == 2 * greater.p_value

    def test_distribution_symmetric_about_zero(self):
        # P(r_s >= t) must equal P(r_s <= -t): compare a statistic with
        # its mirror image.
        y = (2, 1, 4, 3, 6, 5)
        mirrored = tuple(7 - v for v in y)
        p_hi = exact_perm_test(X6, y, alternative="greater")
        p_lo = exact_perm_test(X6, mirrored, alternative="less")
        assert p_hi.p_value == p_lo.p_value
        assert p_hi.r_s == pytest.approx(-p_lo.r_s)

    def test_arbitrary_monotone_values_are_ranked(self):
        result = exact_perm_test((0.1, 0.5, 0.9), (10, 50, 90))
        assert result.r_s == pytest.approx(1.0)
        assert result.p_value == Fraction(1, 6)

    def test_n_too_large(self):
        with pytest.raises(ValueError, match="too large"):
            exact_perm_test(tuple(range(11)), tuple(range(11)))

    def test_ties_rejected(self):
        with pytest.raises(ValueError, match="tie-free"):
            exact_perm_test((1, 1, 2), (1, 2, 3))

    def test_unknown_alternative(self):
        with pytest.raises(ValueError):
            exact_perm_test(X6, Y_D2_10, alternative="sideways")


class TestFitReciprocal:
    def test_exact_recovery(self):
        xs = [0.2, 0.4, 0.5, 0.8, 1.0, 1.6]
        points = [(x, 2.0 + 3.0 / x) for x in xs]
        fit = fit_reciprocal(points)
        assert fit.beta0 == pytest.approx(2.0, abs=1e-9)
        assert fit.beta1 == pytest.approx(3.0, abs=1e-9)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_constrained_recovers_proportionality_constant(self):
        xs = [0.25, 0.5, 1.0, 2.0]
        points = [(x, 3.0 / x) for x in xs]
        fit = fit_reciprocal(points, constrained=True)
        assert fit.constrained
        assert fit.beta0 == 0.0
        assert fit.beta1 == pytest.approx(3.0, abs=1e-12)

    def test_residual_orthogonality(self):
        rng = np.random.default_rng(0)
        xs = rng.uniform(0.3, 1.5, size=40)
        ys = 1.0 + 0.5 / xs + rng.normal(0, 0.1, size=40)
        fit = fit_reciprocal(list(zip(xs, ys)))
        res = np.asarray(fit.residuals)
        assert float(res.sum()) == pytest.approx(0.0, abs=1e-9)
        assert float(res @ (1.0 / xs)) == pytest.approx(0.0, abs=1e-9)

    def test_zero_d_order_rejected_with_diagnostic(self):
        with pytest.raises(ValueError, match="index\\(es\\) \\[1\\]"):
            fit_reciprocal([(0.5, 1.0), (0.0, 2.0), (1.0, 3.0)])

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_reciprocal([(1.0, 1.0)])
        fit = fit_reciprocal([(1.0, 2.5)], constrained=True)
        assert fit.beta1 == pytest.approx(2.5)

    def test_identical_regressors_rejected(self):
        with pytest.raises(ValueError, match="identical"):
            fit_reciprocal([(2.0, 1.0), (2.0, 3.0)])

    def test_predict(self):
        fit = fit_reciprocal([(x, 1.0 + 2.0 / x) for x in (0.5, 1.0, 2.0)])
        assert fit.predict(4.0) == pytest.approx(1.5)


class TestCorrelationMatrix:
    def _rows(self, n_groups=5, books=(40, 41)):
        rng = np.random.default_rng(3)
        rows = []
        for g in range(n_groups):
            for b in books:
                d_order = float(rng.uniform(0.1, 1.0))
                rows.append(agg(f"lang{g}", b, d_order, 1.0 / d_order))
        return rows

    def test_diagonal_is_exactly_one_and_symmetric(self):
        m = correlation_matrix(self._rows())
        assert np.array_equal(m.values, m.values.T)
        assert np.all(np.diag(m.values) == 1.0)
        assert np.all(np.abs(m.values) <= 1.0 + 1e-12)

    def test_labels_cover_books_times_dimensions(self):
        m = correlation_matrix(self._rows(books=(40, 41, 42, 43, 44, 66)))
        assert len(m.labels) == 12
        assert m.labels[0] == "d_order:40"
        assert m.labels[6] == "d_structure:40"

    def test_entry_lookup(self):
        m = correlation_matrix(self._rows())
        assert m.entry("d_order:40", "d_order:40") == 1.0

    def test_incomplete_groups_dropped(self):
        rows = self._rows(n_groups=3)
        rows.append(agg("partial", 40, 0.5, 2.0))  # missing book 41
        m = correlation_matrix(rows, book_ids=(40, 41))
        assert len(m.labels) == 4

    def test_insufficient_groups(self):
        with pytest.raises(InsufficientDataError):
            correlation_matrix([agg("only", 40, 0.5, 2.0)], book_ids=(40,))


class TestRankBooks:
    def test_descending_values_rank_in_order(self):
        # (Re, Jn, Mr, Mt, Lk, Ac) with d_order .5,.4,.3,.2,.15,.1
        values = {66: 0.5, 43: 0.4, 41: 0.3, 40: 0.2, 42: 0.15, 44: 0.1}
        rows = [agg("t1", b, v, 1.0 - v) for b, v in values.items()]
        tables, excluded = rank_books(rows)
        assert excluded == {}
        t = tables[0]
        assert t.order_ranks == {66: 1, 43: 2, 41: 3, 40: 4, 42: 5, 44: 6}
        # structure values are reversed, so ranks invert
        assert t.structure_ranks == {44: 1, 42: 2, 40: 3, 41: 4, 43: 5, 66: 6}

    def test_tie_broken_by_canonical_order_and_flagged(self):
        rows = [agg("t1", 41, 0.5, 0.1), agg("t1", 40, 0.5, 0.2)]
        tables, _ = rank_books(rows)
        assert tables[0].order_ranks == {40: 1, 41: 2}
        assert tables[0].has_ties

    def test_missing_book_excludes_translation_with_report(self):
        rows = [agg("t1", 40, 0.5, 0.1), agg("t2", 40, 0.4, 0.2), agg("t2", 41, 0.3, 0.3)]
        tables, excluded = rank_books(rows, book_ids=(40, 41))
        assert [t.translation_id for t in tables] == ["t2"]
        assert excluded == {"t1": (41,)}

    def test_rank_value_consistency(self):
        rng = np.random.default_rng(8)
        values = {b: float(rng.uniform(0, 1)) for b in (40, 41, 42, 43, 44, 66)}
        rows = [agg("t", b, v, v) for b, v in values.items()]
        (table,), _ = rank_books(rows)
        for a in values:
            for b in values:
                if values[a] > values[b]:
                    assert table.order_ranks[a] < table.order_ranks[b]


class TestRankHistograms:
    def _tables(self, specs):
        rows = []
        for tid, orders in specs.items():
            for b, d_order in orders.items():
                rows.append(agg(tid, b, d_order, 1.0 - d_order))
        tables, _ = rank_books(rows)
        return tables

    def test_single_translation_all_mass_in_one_bin(self):
        tables = self._tables({"t1": {40: 0.3, 41: 0.2, 42: 0.1}})
        hist = rank_histograms(tables)
        assert hist.n_tables == 1
        assert hist.order_counts[40] == (1, 0, 0)
        assert hist.percent(1) == 100.0

    def test_bivariate_margins_match(self):
        tables = self._tables(
            {
                "t1": {40: 0.3, 41: 0.2, 42: 0.1},
                "t2": {40: 0.1, 41: 0.3, 42: 0.2},
                "t3": {40: 0.25, 41: 0.05, 42: 0.4},
            }
        )
        hist = rank_histograms(tables)
        for b in hist.book_ids:
            joint = np.asarray(hist.joint_counts[b])
            assert tuple(joint.sum(axis=1)) == hist.order_counts[b]
            assert tuple(joint.sum(axis=0)) == hist.structure_counts[b]
            assert joint.sum() == hist.n_tables

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            rank_histograms([])


class TestCsvWriters:
    def test_fits_csv(self):
        fit = fit_reciprocal([(x, 2 + 3 / x) for x in (0.5, 1.0, 2.0)])
        buf = io.StringIO()
        write_fits_csv([BookFit(book_id=40, fit=fit, r_s=-0.9)], buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "book_id,beta0,beta1,r_squared,n,r_s"
        assert lines[1].startswith("40,2,3,1,3,-0.9")

    def test_corr_matrix_csv_roundtrip_shape(self):
        m = CorrelationMatrix(
            labels=("d_order:40", "d_structure:40"),
            values=np.array([[1.0, -0.5], [-0.5, 1.0]]),
        )
        buf = io.StringIO()
        write_corr_matrix_csv(m, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == ",d_order:40,d_structure:40"
        assert lines[1] == "d_order:40,1,-0.5"

    def test_ranks_csv_includes_exclusions(self):
        rows = [agg("t1", 40, 0.5, 0.1), agg("t1", 41, 0.4, 0.2)]
        tables, excluded = rank_books(rows + [agg("t2", 40, 0.3, 0.3)], (40, 41))
        buf = io.StringIO()
        write_ranks_csv(tables, buf, excluded)
        text = buf.getvalue()
        assert "t1,40,1,2,0" in text
        assert "excluded: missing [41]" in text

    def test_rank_hist_csv_exact_fractions(self):
        rows = [
            agg("t1", 40, 0.5, 0.5), agg("t1", 41, 0.4, 0.6),
            agg("t2", 40, 0.1, 0.2), agg("t2", 41, 0.9, 0.1),
            agg("t3", 40, 0.7, 0.2), agg("t3", 41, 0.1, 0.8),
        ]
        tables, _ = rank_books(rows)
        buf = io.StringIO()
        write_rank_hist_csv(rank_histograms(tables), buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "book_id,kind,order_rank,structure_rank,count,total,fraction,percent"
        assert any(",2/3," in line for line in lines)
        assert any(line.endswith("66.6667") for line in lines)
