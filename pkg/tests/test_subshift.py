import numpy as np
import pytest

from mixgrowth.errors import CertificationError, InputError
from mixgrowth.gauges import LogGauge
from mixgrowth.metricspace import DimensionFit, greedy_net
from mixgrowth.subshift import (
    RS_PROJECTION,
    ShiftSpace,
    Substitution,
    SymbolSequence,
    complexity,
    correlation,
    generator_cross_check,
    language,
    observable_lipschitz,
    rudin_shapiro_prefix,
    rudin_shapiro_substitution,
    shift_growth,
    window_metric_space,
    word_frequency,
)


@pytest.fixture(scope="module")
def rs4():
    return SymbolSequence.fixed_point(rudin_shapiro_substitution(), "A")


@pytest.fixture(scope="module")
def rs_pm1():
    seq = SymbolSequence.rudin_shapiro()
    seq.prefix(2**22 + 64)
    return seq


# -- substitution basics -------------------------------------------------------

def test_iterate_one_step():
    assert rudin_shapiro_substitution().iterate("A", 1) == "AB"


def test_iterate_zero_steps():
    assert rudin_shapiro_substitution().iterate("BDC", 0) == "BDC"


def test_iterate_three_steps_fixed_prefix():
    assert rudin_shapiro_substitution().iterate("A", 3) == "ABACABDB"


def test_iterate_rejects_unknown_symbol():
    with pytest.raises(InputError):
        rudin_shapiro_substitution().iterate("AX", 1)


def test_primitivity_and_seed():
    subst = rudin_shapiro_substitution()
    assert subst.is_primitive()
    assert subst.is_valid_seed("A") and subst.is_valid_seed("D")
    assert not subst.is_valid_seed("B")


def test_non_primitive_detected():
    assert not Substitution({"A": "AA", "B": "BB"}).is_primitive()


def test_fixed_point_prefix_stability(rs4):
    subst = rudin_shapiro_substitution()
    prefix = subst.decode(rs4.prefix(64))
    image = subst.iterate(prefix, 1)
    assert image.startswith(prefix)


def test_rules_file_roundtrip(tmp_path):
    path = tmp_path / "rules.txt"
    path.write_text("# rudin-shapiro\nA -> AB\nB -> AC\nC -> DB\nD -> DC\n")
    subst = Substitution.from_rules_file(path)
    assert subst.rules == rudin_shapiro_substitution().rules


# -- the +-1 sequence ----------------------------------------------------------

def test_rs_first_terms():
    assert rudin_shapiro_prefix(1).tolist() == [1]
    assert rudin_shapiro_prefix(8).tolist() == [1, 1, 1, -1, 1, 1, -1, 1]


def test_rs_recurrence_holds():
    v = rudin_shapiro_prefix(4096)
    n = np.arange(1, 2048)
    assert np.array_equal(v[2 * n], v[n])
    signs = np.where(n % 2 == 0, 1, -1)
    assert np.array_equal(v[2 * n + 1], signs * v[n])


def test_generator_cross_check_small():
    assert generator_cross_check(16)


def test_generator_cross_check_large():
    assert generator_cross_check(2**20)


# -- language, frequency, correlation -------------------------------------------

def test_language_counts_four_letter(rs4):
    assert len(language(rs4, 2, 4096)) == 8
    assert len(language(rs4, 10, 4096)) == 72


def test_language_single_letters(rs4):
    words = language(rs4, 1, 4096)
    assert len(words) == 4


def test_language_requires_scan(rs4):
    with pytest.raises(InputError):
        language(rs4, 10, 5)


def test_complexity_exact_eight_n_minus_one(rs4):
    for length in range(2, 65):
        assert complexity(rs4, length) == 8 * (length - 1)


def test_complexity_stable_under_doubling(rs4):
    for length in (3, 17, 33):
        assert complexity(rs4, length, 64 * length) == complexity(rs4, length, 128 * length)


def test_word_frequency_single_letter(rs_pm1):
    freq = word_frequency(rs_pm1, [1], 2**20)
    assert 0.0 < freq < 1.0


def test_word_frequency_absent_word(rs4):
    # AA never occurs in the four-letter fixed point
    assert word_frequency(rs4, rudin_shapiro_substitution().encode("AA"), 2**16) == 0.0


def test_word_frequency_whole_prefix(rs_pm1):
    n = 4096
    assert word_frequency(rs_pm1, rs_pm1.prefix(n), n) == pytest.approx(1.0 / n)


def test_word_frequency_cauchy_under_doubling(rs_pm1):
    word = rs_pm1.prefix(3)
    values = [word_frequency(rs_pm1, word, 2**j) for j in range(14, 21)]
    diffs = [abs(b - a) for a, b in zip(values, values[1:])]
    assert diffs[-1] < 1e-3 and diffs[-1] <= diffs[0] * 2


def test_correlation_lag_zero_exact(rs_pm1):
    assert correlation(rs_pm1, 0, 2**22) == 1.0


def test_correlation_small_for_all_lags(rs_pm1):
    for lag in range(1, 65):
        assert abs(correlation(rs_pm1, lag, 2**22)) <= 0.01


def test_correlation_decreases_under_doubling(rs_pm1):
    for lag in (1, 7, 64):
        values = [abs(correlation(rs_pm1, lag, 2**j)) for j in range(16, 23)]
        for prev, nxt, n_prev in zip(values, values[1:], range(16, 23)):
            assert nxt <= max(2 * prev, 64.0 / 2**n_prev)


def test_correlation_nondyadic_scan(rs_pm1):
    assert abs(correlation(rs_pm1, 5, 3 * 2**20 + 12345)) <= 0.01


# -- window spaces ---------------------------------------------------------------

def test_window_space_k2_has_16_points(rs4):
    space = window_metric_space(rs4, LogGauge(1), 2)
    assert space.n == 16


def test_window_space_k1_two_points(rs_pm1):
    space = window_metric_space(rs_pm1, LogGauge(1), 1)
    assert space.n == 2
    assert space.dist(0, 1) == pytest.approx(1.0)  # exp(-u(0)) = 1


def test_window_space_separation_and_cover(rs4):
    shift = ShiftSpace.build(rs4, LogGauge(1), 4)
    ms = shift.metric_space()
    k = shift.k
    d_min = math_inf = float("inf")
    for i in range(ms.n):
        row = ms.row(i)
        d_min = min(d_min, min(row[j] for j in range(ms.n) if j != i))
    # pairwise distances >= exp(-u(k-1))
    assert d_min >= math_inf * 0 + float(np.exp(-float(shift.gauge.value(k - 1)))) - 1e-12


def test_net_counts_match_class_counts(rs4):
    shift = ShiftSpace.build(rs4, LogGauge(1), 8)
    ms = shift.metric_space()
    for j in (1, 2, 4):
        eps = 2.0 * shift.distance_table()[j]
        assert greedy_net(ms, eps).count == shift.class_count(j)


def test_net_count_linear_in_scale(rs4):
    # with u = log t (d = 1) the net at eps = 2/j has about const * j points
    shift = ShiftSpace.build(rs4, LogGauge(1), 24)
    counts = {j: shift.class_count(j) for j in (2, 4, 8, 16)}
    for j in (2, 4, 8):
        assert counts[2 * j] / counts[j] == pytest.approx(2.0, rel=0.35)


def test_dimension_fit_on_rs_windows_d1(rs4):
    shift = ShiftSpace.build(rs4, LogGauge(1), 48)
    fit = DimensionFit.from_samples(shift.net_samples(range(2, 41)))
    assert fit.slope == pytest.approx(1.0, rel=0.15)


def test_dimension_fit_on_rs_windows_d2(rs4):
    shift = ShiftSpace.build(rs4, LogGauge(2), 160)
    fit = DimensionFit.from_samples(shift.net_samples(range(2, 150, 4)))
    assert fit.slope == pytest.approx(2.0, rel=0.15)


def test_certification_error_on_tiny_scan():
    # a scan too short to exhaust the language must raise, not lie
    seq = SymbolSequence.fixed_point(rudin_shapiro_substitution(), "A")
    with pytest.raises(CertificationError):
        ShiftSpace.build(seq, LogGauge(1), 64, scan_factor=1)


# -- shift growth ------------------------------------------------------------------

def test_shift_growth_identity_row(rs4):
    shift = ShiftSpace.build(rs4, LogGauge(1), 16)
    rows = shift_growth(shift, 8)
    assert rows[0] == (0, 1.0, 1.0)


def test_shift_growth_upper_is_power_law(rs4):
    for d in (1, 2):
        shift = ShiftSpace.build(rs4, LogGauge(d), 16)
        rows = shift_growth(shift, 12)
        for n, _, upper in rows[1:]:
            assert upper == pytest.approx(n ** (1.0 / d))


def test_shift_growth_lower_below_upper(rs4):
    shift = ShiftSpace.build(rs4, LogGauge(1), 32)
    rows = shift_growth(shift, 24)
    assert all(lo <= up + 1e-12 for _, lo, up in rows)


def test_shift_growth_monotone(rs4):
    shift = ShiftSpace.build(rs4, LogGauge(2), 32)
    rows = shift_growth(shift, 24)
    lows = [lo for _, lo, _ in rows]
    ups = [up for _, _, up in rows]
    assert all(b >= a for a, b in zip(lows, lows[1:]))
    assert all(b >= a for a, b in zip(ups, ups[1:]))


def test_shift_growth_range_check(rs4):
    shift = ShiftSpace.build(rs4, LogGauge(1), 8)
    with pytest.raises(InputError):
        shift_growth(shift, 8)


def test_observable_lipschitz_pm1(rs4):
    shift = ShiftSpace.build(rs4, LogGauge(1), 8)
    values = [RS_PROJECTION[a] for a in rudin_shapiro_substitution().alphabet]
    # |f(x)-f(y)| <= 2 at distance exp(-u(0)) = 1
    assert observable_lipschitz(shift, values=values) == pytest.approx(2.0)
