import math

import numpy as np
import pytest

from mixgrowth.errors import InputError, ResourceError
from mixgrowth.metricspace import (
    DimensionFit,
    FiniteMetricSpace,
    box_dimension,
    d_bound,
    exact_covering_number,
    greedy_net,
    holder_transform,
    kt_bound,
    kt_oracle_check,
    lipschitz_grid_functions,
    sup_metric_space,
    tau,
    theta,
)


def line_space(n, spacing=1.0):
    return FiniteMetricSpace.from_points(np.arange(n) * spacing)


# -- nets and exact covers ---------------------------------------------------

def test_greedy_one_point():
    space = FiniteMetricSpace.from_points([0.0])
    for eps in (0.1, 1.0, 10.0):
        assert greedy_net(space, eps).count == 1


def test_greedy_eps_above_diameter():
    space = line_space(5)
    assert greedy_net(space, 2 * space.diameter() + 1).count == 1


def test_exact_two_points():
    space = line_space(2)
    assert exact_covering_number(space, 3.0) == 1
    assert exact_covering_number(space, 0.5) == 2


def test_exact_five_on_a_line():
    assert exact_covering_number(line_space(5), 2.0) == 2


def test_exact_budget():
    with pytest.raises(ResourceError):
        exact_covering_number(line_space(25), 1.0)


def test_greedy_sandwiched_by_exact():
    rng = np.random.default_rng(5)
    for _ in range(20):
        pts = rng.uniform(0, 1, size=(12, 2))
        space = FiniteMetricSpace.from_points(pts)
        for eps in (0.1, 0.3, 0.8):
            g = greedy_net(space, eps).count
            assert exact_covering_number(space, eps) <= g
            assert g <= exact_covering_number(space, eps / 2)


def test_greedy_covers_everything():
    rng = np.random.default_rng(9)
    pts = rng.uniform(0, 1, size=(60, 3))
    space = FiniteMetricSpace.from_points(pts)
    prof = greedy_net(space, 0.4)
    mind = np.min(np.vstack([space.row(c) for c in prof.centers]), axis=0)
    assert (mind <= 0.2 + 1e-12).all()


# -- kt bound and its oracle --------------------------------------------------

def test_kt_bound_values():
    assert kt_bound(1, 7) == 1
    assert kt_bound(3, 2) == 9
    assert kt_bound(10, 10) == 10**10


def test_kt_oracle_two_point_base():
    # 2-point space A at distance 1, Y = [-1, 1] grid of step eps/8, R = 1, eps = 1
    grid = np.linspace(-1, 1, 17)
    res = kt_oracle_check(base_dists=[[0, 1], [1, 0]], y_values=grid, R=1.0, epsilon=1.0)
    assert res["ok"]
    assert res["measured"] >= 1


# -- capacity functions --------------------------------------------------------

def test_d_bound_boundary_r0():
    for c in (1.0, 2.5, 10.0):
        assert d_bound(0.0, 1.4, c, 1.0, 1.0) == pytest.approx(
            math.log(math.floor(c / 0.7) + 1))


def test_d_bound_zero_c():
    assert d_bound(1.0, 1.4, 0.0, 1.0, 1.0) == 0.0


def test_d_bound_closed_form():
    # kappa (eps/4R)^-d * log(floor(4C/eps) + 1) at R=1, eps=1.4, C=1:
    # (1.4/4)^-1 = 20/7 and floor(4/1.4) + 1 = 3
    assert d_bound(1.0, 1.4, 1.0, 1.0, 1.0) == pytest.approx((20 / 7) * math.log(3))


def test_tau_boundary_is_zero():
    # for C in [0.35, 0.7) the boundary t is 1 and the sup collapses to 0
    assert tau(1.0, 0.5) == pytest.approx(0.0, abs=1e-6)


def test_tau_rejects_below_boundary():
    with pytest.raises(InputError):
        tau(1.0, 1.0)


def test_tau_matches_analytic_inversion():
    # d=1: R* solves (4R/1.4) log 3 = log t
    t = 1e6
    assert tau(t, 1.0) == pytest.approx(1.4 * math.log(t) / (4 * math.log(3)), rel=1e-4)


def test_tau_doubling_exponent():
    for d in (1.0, 2.0):
        r1 = tau(1e3, 1.0, kappa=1.0, d=d)
        r2 = tau(1e6, 1.0, kappa=1.0, d=d)
        assert r2 / r1 == pytest.approx(2 ** (1 / d), rel=0.2)


def test_tau_monotonicity():
    values = [tau(t, 1.0) for t in (10, 100, 1000, 10000)]
    assert all(b > a for a, b in zip(values, values[1:]))
    by_c = [tau(1e4, c) for c in (1.0, 2.0, 4.0)]
    assert all(b <= a + 1e-9 for a, b in zip(by_c, by_c[1:]))


def test_theta_boundary_small():
    eps = 1e-4
    base = (eps / 4) ** (-1.0)
    assert theta(base, eps) <= 1e-3


def test_theta_rejects_below_boundary():
    with pytest.raises(InputError):
        theta(1.0, 0.5)


def test_theta_monotone_in_t():
    eps = 0.1
    vals = [theta(t, eps) for t in (1e3, 1e4, 1e6, 1e9)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_theta_matches_closed_form():
    eps, kappa, d = 0.2, 2.0, 1.5
    base = kappa * (eps / 4) ** (-d)
    t = 1e8
    expected = (eps / 4) * (math.log(t) / (kappa * math.log(base))) ** (1 / d)
    assert theta(t, eps, kappa, d) == pytest.approx(expected, rel=1e-4)


def test_theta_epsilon_scaling():
    # theta(t, eps)/eps stays bounded once the log(1/eps)^{1/d} factor is divided out
    t = 1e12
    ratios = []
    for eps in (0.2, 0.05, 0.01, 0.002):
        ratios.append(theta(t, eps) / eps * math.log(4 / eps))
    assert max(ratios) / min(ratios) < 3.0


# -- Hölder transform and dimension fits ---------------------------------------

def test_holder_identity():
    space = line_space(6)
    same = holder_transform(space, 1.0)
    assert np.allclose(same.matrix(), space.matrix())


def test_holder_two_points():
    space = FiniteMetricSpace(2, matrix=[[0.0, 4.0], [4.0, 0.0]])
    assert holder_transform(space, 0.5).dist(0, 1) == pytest.approx(2.0)


def test_holder_rejects_bad_beta():
    with pytest.raises(InputError):
        holder_transform(line_space(3), 1.5)


def test_box_dimension_uniform_grid():
    space = line_space(1000, spacing=1 / 999.0)
    eps = np.geomspace(0.3, 0.005, 8)
    fit = box_dimension(space, eps)
    assert fit.slope == pytest.approx(1.0, rel=0.10)


def test_box_dimension_single_point():
    space = FiniteMetricSpace.from_points([0.0])
    fit = box_dimension(space, [0.01, 0.1, 1.0])
    assert fit.slope == pytest.approx(0.0, abs=1e-9)


def test_box_dimension_needs_decade():
    with pytest.raises(InputError):
        box_dimension(line_space(10), [0.5, 0.4, 0.3])


def test_dimension_fit_json():
    fit = DimensionFit.from_samples([(1.0, 1), (0.1, 10), (0.01, 100)])
    assert fit.slope == pytest.approx(1.0)
    payload = fit.to_json()
    assert '"slope"' in payload and '"residual"' in payload


def test_holder_doubles_fitted_slope():
    space = line_space(1000, spacing=1 / 999.0)
    base = box_dimension(space, np.geomspace(0.3, 0.005, 8))
    snow = box_dimension(holder_transform(space, 0.5), np.geomspace(0.55, 0.05, 8))
    assert snow.slope == pytest.approx(2 * base.slope, rel=0.15)


# -- misc ----------------------------------------------------------------------

def test_from_csv_roundtrip(tmp_path):
    m = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.5], [2.0, 1.5, 0.0]])
    path = tmp_path / "dist.csv"
    np.savetxt(path, m, delimiter=",")
    space = FiniteMetricSpace.from_csv(path)
    assert space.n == 3 and space.dist(0, 2) == pytest.approx(2.0)


def test_lipschitz_grid_functions_count():
    # one base point: every grid value is 1-Lipschitz
    funcs = lipschitz_grid_functions([[0.0]], [-1, 0, 1], R=1.0)
    assert funcs.shape == (3, 1)
    sup = sup_metric_space(funcs)
    assert sup.dist(0, 2) == pytest.approx(2.0)
