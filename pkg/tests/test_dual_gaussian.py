import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from canodual import dual_gaussian as dg
from canodual.errors import DomainError, RegimeError, SingularityError
from canodual.oracle import fd_check
from canodual.primal import ProblemParams, eval_P, hess_P
from canodual.solver import find_dual_criticals
from canodual.verification import ALPHA, THETA1, THETA2, pole_free_sample_intervals

G_ROOT = (-1 + math.sqrt(1.2)) / 2  # Theta1/Theta2 geometry


def test_G_values():
    assert dg.G(THETA1, -0.5) == pytest.approx(0.6, rel=1e-15)
    assert dg.G(THETA1, 0.0) == pytest.approx(0.1, rel=1e-15)


def test_g_roots():
    roots = dg.g_roots(THETA1)
    assert len(roots) == 1
    assert roots[0] == pytest.approx(G_ROOT, rel=1e-14)
    assert roots[0] == pytest.approx(0.047723, abs=1e-6)
    assert dg.G(THETA1, roots[0]) == pytest.approx(0.0, abs=1e-15)


def test_g_roots_tiny_beta_is_accurate():
    p = ProblemParams(x=1.0, y=1.0, w=2.0, alpha=ALPHA, beta=1e-14)
    (r,) = dg.g_roots(p)
    # u = y + alpha**2 beta / y to first order
    assert r == pytest.approx(0.5e-14, rel=1e-8)


@pytest.mark.parametrize("sigma, expected", [(0.0, 0.0), (-1.0, 0.0), (-0.5, 0.5)])
def test_F_values(sigma, expected):
    assert dg.F(THETA1, sigma) == pytest.approx(expected, abs=1e-15)


def test_recover_c_values():
    assert dg.recover_c(THETA1, 0.0) == 0.0
    assert dg.recover_c(THETA1, -0.5) == pytest.approx(0.833333, abs=1e-6)


def test_recover_c_near_boundary_theta2():
    root = min(find_dual_criticals(THETA2), key=lambda r: r.offset)
    assert root.sigma == pytest.approx(-0.999999, abs=1e-4)
    assert dg.recover_c(THETA2, root.sigma, offset=root.offset) == pytest.approx(0.00002, abs=5e-5)


def test_Pd_matches_primal_at_critical_points():
    k = THETA1.kernel
    for root in find_dual_criticals(THETA1):
        if abs(2 * root.sigma + 1) <= 1e-8:
            continue
        c = dg.recover_c(THETA1, root.sigma, offset=root.offset)
        pd = dg.Pd(THETA1, root.sigma, offset=root.offset)
        assert abs(pd - eval_P(THETA1, k, c)) <= 1e-8 * (1 + abs(pd))


def test_Pd_at_upper_end_is_finite():
    sigma = 1.0
    expected = (-0.5 * dg.F(THETA1, sigma) ** 2 / dg.G(THETA1, sigma) + 0.5 * sigma**2
                - THETA1.x**2 * (sigma**2 + sigma) / (2 * ALPHA**2))
    assert dg.Pd(THETA1, sigma) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("f", [0.0, 0.05, -0.3])
def test_Pd_limit_at_lower_end(f):
    p = ProblemParams(x=1.0, y=1.0, w=2.0, alpha=ALPHA, beta=0.1, f=f)
    limit = 0.5 * p.y**2 - 0.5 * f**2 / p.beta
    assert dg.Pd(p, -1.0, offset=1e-200) == pytest.approx(limit, rel=1e-12)


def test_Pd_prime_diverges_at_lower_end():
    slopes = [dg.Pd_prime(THETA1, -1.0, offset=u) for u in (1e-4, 1e-40, 1e-300)]
    assert slopes[0] > slopes[1] > slopes[2]
    assert slopes[2] < -600


def test_offset_keeps_precision_where_sigma_cannot():
    u = 1e-28
    assert -1.0 + u == -1.0
    assert dg.s_of(THETA1, -1.0, offset=u) == pytest.approx(u / 2, rel=1e-15)
    with pytest.raises(DomainError):
        dg.Pd(THETA1, -1.0)


def test_Pd_prime_zero_at_pseudo_point():
    for p in (THETA1, THETA2, ProblemParams(x=2.0, y=0.7, w=1.5, alpha=0.9, beta=0.3, f=0.2)):
        assert dg.Pd_prime(p, -0.5 * p.y) == 0.0


def test_Pd_prime_brackets_theta2_boundary_root():
    assert dg.Pd_prime(THETA2, -1.0, offset=1e-7) * dg.Pd_prime(THETA2, -1.0, offset=1e-6) < 0


def test_Pd_second_at_pseudo_point():
    g_f = 0.1 + 0.25 / ALPHA**2
    expected = -(2 * math.log(0.25) + (0.1 / g_f) ** 2 / ALPHA**2)
    assert dg.Pd_second(THETA1, -0.5) == pytest.approx(expected, rel=1e-13)
    assert dg.Pd_second(THETA1, -0.5) == pytest.approx(2.7170, abs=1e-4)


def test_relation_at_theta1_criticals():
    k = THETA1.kernel
    for root in find_dual_criticals(THETA1):
        if abs(2 * root.sigma + 1) <= 1e-8:
            continue
        c = dg.recover_c(THETA1, root.sigma)
        rhs = -(2 * root.sigma + 1) / (dg.G(THETA1, root.sigma) * (root.sigma + 1)) * hess_P(THETA1, k, c)
        assert dg.Pd_second(THETA1, root.sigma) == pytest.approx(rhs, rel=1e-6)


@pytest.mark.parametrize("params", [THETA1, THETA2])
def test_derivatives_match_finite_differences(params):
    for a, b in pole_free_sample_intervals(params):
        assert fd_check(lambda s: dg.Pd(params, s), lambda s: dg.Pd_prime(params, s), (a, b), 100) <= 1e-6
        assert fd_check(lambda s: dg.Pd_prime(params, s), lambda s: dg.Pd_second(params, s), (a, b), 100) <= 1e-5
        assert fd_check(
            lambda s: dg.critical_factor(params, s), lambda s: dg.critical_factor_prime(params, s), (a, b), 50
        ) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(-1.0, 1.0))
def test_Pd_prime_factorization(t, f):
    p = ProblemParams(x=2.5, y=1.0, w=2.0, alpha=ALPHA, beta=0.2, f=f)
    sigma = -0.98 + 1.96 * t
    if any(abs(sigma - r) < 1e-3 for r in dg.g_roots(p)):
        return
    h = 1e-6
    fd = (dg.Pd(p, sigma + h) - dg.Pd(p, sigma - h)) / (2 * h)
    d = dg.Pd_prime(p, sigma)
    assert abs(fd - d) <= 1e-6 * (1 + abs(d))


def test_pole_guard():
    r = dg.g_roots(THETA1)[0]
    for fn in (dg.Pd, dg.Pd_prime, dg.Pd_second, dg.recover_c):
        with pytest.raises(SingularityError):
            fn(THETA1, r)
    dg.Pd(THETA1, r + 1e-6)


@pytest.mark.parametrize("sigma", [-1.0, -1.2, 1.0 + 1e-12, 2.0])
def test_domain_guard(sigma):
    with pytest.raises(DomainError):
        dg.Pd(THETA1, sigma)


def test_vectorized():
    s = np.linspace(-0.9, -0.1, 9)
    out = dg.Pd(THETA1, s)
    assert out.shape == (9,)
    assert out[4] == pytest.approx(dg.Pd(THETA1, float(s[4])), rel=1e-15)


def test_u_star_form():
    sigma = 0.2
    u = sigma + 1
    assert dg.u_star(THETA1, sigma) == pytest.approx(u * (math.log(u / 2) - 1))


def test_partition_theta1():
    part = dg.partition(THETA1)
    assert part.s_a == (-1.0, 1.0)
    assert part.s_plus == ((-1.0, pytest.approx(G_ROOT)),)
    assert part.s_minus == ((pytest.approx(G_ROOT), 1.0),)
    assert part.s_sharp == ((-0.5, pytest.approx(G_ROOT)),)
    assert part.s_flat == ((-1.0, -0.5),)
    assert part.in_plus(-0.5) and not part.in_minus(-0.5)
    assert not part.in_sharp(-0.5) and not part.in_flat(-0.5)
    assert part.in_minus(0.5) and part.in_flat(-0.9) and part.in_sharp(0.0)


def test_partition_large_beta_has_empty_minus():
    p = ProblemParams(x=1.0, y=1.0, w=2.0, alpha=ALPHA, beta=5.0)
    part = dg.partition(p)
    assert part.s_minus == ()
    assert part.s_plus == ((-1.0, 1.0),)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.2, 1.5), st.floats(1.6, 3.0), st.floats(0.4, 1.2), st.floats(0.01, 2.0))
def test_partition_covers_feasible_interval(y, w, alpha, beta):
    p = ProblemParams(x=1.0, y=y, w=w, alpha=alpha, beta=beta)
    part = dg.partition(p)
    pieces = sorted(part.s_plus + part.s_minus)
    assert pieces[0].lo == -y and pieces[-1].hi == pytest.approx(w - y)
    for a, b in zip(pieces[:-1], pieces[1:]):
        assert a.hi == b.lo and a.hi in part.g_roots
    assert part.in_plus(-0.5 * y)
    for s in np.linspace(-y, w - y, 101)[1:-1]:
        if any(abs(s - r) < 1e-9 for r in part.g_roots):
            continue
        assert part.in_plus(s) == (dg.G(p, s) > 0)
        assert part.in_minus(s) == (dg.G(p, s) < 0)


def test_partition_requires_normalized_regime():
    p = ProblemParams(x=1.0, y=-1.0, w=2.0, alpha=ALPHA, beta=0.1)
    with pytest.raises(RegimeError):
        dg.partition(p)


def test_x_o_values():
    assert dg.x_o(THETA1) == pytest.approx(math.sqrt(math.log(4)), rel=1e-15)
    assert dg.x_o(THETA1) == pytest.approx(1.177410, abs=1e-6)
    y = 2 * 2.0 * math.exp(-1 / (2 * ALPHA**2))
    p = ProblemParams(x=1.0, y=y, w=2.0, alpha=ALPHA, beta=0.1)
    assert dg.x_o(p) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("y", [4.0, 5.0])
def test_x_o_undefined(y):
    with pytest.raises(DomainError):
        dg.x_o(ProblemParams(x=1.0, y=y, w=2.0, alpha=ALPHA, beta=0.1))


def test_landscape():
    land = dg.landscape(THETA1)
    assert land.sigma_f == -0.5
    assert land.x_o == pytest.approx(1.17741, abs=1e-5)
