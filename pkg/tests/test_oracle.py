import math

import numpy as np
import pytest

from canodual.kernel import GaussianKernel
from canodual.oracle import (
    OracleConfig,
    OracleWarning,
    conjugate_roundtrip,
    default_c_range,
    duality_gap_audit,
    fd_check,
    primal_criticals_bruteforce,
    v_roundtrip,
)
from canodual.primal import ProblemParams, eval_P, grad_P, hess_P
from canodual.solver import find_dual_criticals
from canodual.verification import ALPHA, THETA1, THETA2, THETA3, THETA4

XO = math.sqrt(math.log(4))


@pytest.mark.parametrize("params, count", [(THETA1, 3), (THETA2, 5), (THETA3, 3)])
def test_counts(params, count):
    assert len(primal_criticals_bruteforce(params, params.kernel)) == count


def test_theta2_has_point_near_zero():
    cs = [pc.c for pc in primal_criticals_bruteforce(THETA2, THETA2.kernel)]
    assert min(abs(c - 0.00002) for c in cs) <= 5e-5


@pytest.mark.parametrize("params", [THETA1, THETA2, THETA3, THETA4])
def test_grid_doubling_is_stable(params):
    a = primal_criticals_bruteforce(params, params.kernel, OracleConfig(grid_n=200_001))
    b = primal_criticals_bruteforce(params, params.kernel, OracleConfig(grid_n=400_001))
    assert [pc.kind for pc in a] == [pc.kind for pc in b]
    np.testing.assert_allclose([pc.c for pc in a], [pc.c for pc in b], atol=1e-9)


def test_w_zero_is_pure_quadratic():
    p = ProblemParams(x=1.0, y=1.0, w=0.0, alpha=ALPHA, beta=0.4, f=0.3)
    (pc,) = primal_criticals_bruteforce(p, p.kernel)
    assert pc.c == pytest.approx(0.75, abs=1e-11)
    assert pc.kind == "Min"


def test_points_are_stationary_and_classified():
    for pc in primal_criticals_bruteforce(THETA2, THETA2.kernel):
        assert abs(grad_P(THETA2, THETA2.kernel, pc.c)) <= 1e-8
        assert pc.p_value == eval_P(THETA2, THETA2.kernel, pc.c)
        assert (pc.kind == "Min") == (hess_P(THETA2, THETA2.kernel, pc.c) > 0)


def test_edge_warning_and_widening():
    # the S- maximum at c = 1.025693... sits inside the last grid cell
    cfg = OracleConfig(c_range=(-1.0, 1.025693173374 + 5e-6))
    with pytest.warns(OracleWarning):
        pts = primal_criticals_bruteforce(THETA1, THETA1.kernel, cfg)
    assert len(pts) == 3


def test_requires_positive_beta():
    p = ProblemParams(x=1.0, y=1.0, w=2.0, alpha=ALPHA, beta=0.0)
    with pytest.raises(ValueError):
        primal_criticals_bruteforce(p, p.kernel)


@pytest.mark.parametrize("grid_n", [1000, 1001 + 1, 11])
def test_config_grid_validation(grid_n):
    with pytest.raises(ValueError):
        OracleConfig(grid_n=grid_n)


def test_config_range_must_contain_zero_and_x():
    with pytest.raises(ValueError):
        OracleConfig(c_range=(0.5, 3.0)).range_for(THETA1)


def test_default_range_covers_both_wells():
    for p in (THETA1, THETA2, THETA4):
        lo, hi = default_c_range(p)
        assert lo < min(0.0, p.x) - 3 and hi > max(0.0, p.x) + 3


@pytest.mark.parametrize("params, matched", [(THETA1, 3), (THETA2, 5)])
def test_gap_audit(params, matched):
    audit = duality_gap_audit(params, find_dual_criticals(params),
                              primal_criticals_bruteforce(params, params.kernel))
    assert audit.ok
    assert sum(e.matched_c is not None for e in audit.entries) == matched
    pseudo = [e for e in audit.entries if e.pseudo]
    assert len(pseudo) == 1 and pseudo[0].matched_c is None
    assert not audit.pseudo_matched


def test_gap_audit_accepts_plain_floats():
    sigmas = [r.sigma for r in find_dual_criticals(THETA1)]
    audit = duality_gap_audit(THETA1, sigmas, primal_criticals_bruteforce(THETA1, THETA1.kernel))
    assert audit.ok


def test_gap_audit_reports_missing_points():
    roots = find_dual_criticals(THETA1)
    primal = primal_criticals_bruteforce(THETA1, THETA1.kernel)
    audit = duality_gap_audit(THETA1, roots[:2], primal)
    assert not audit.ok and len(audit.unmatched_primal) == 2
    audit = duality_gap_audit(THETA1, roots, primal[:1])
    assert not audit.ok and audit.unmatched_dual


def test_gap_audit_matches_pseudo_point_under_critf():
    x = 0.6 * XO / 0.1
    p = ProblemParams(x=x, y=1.0, w=2.0, alpha=ALPHA, beta=0.1)
    audit = duality_gap_audit(p, find_dual_criticals(p), primal_criticals_bruteforce(p, p.kernel))
    assert audit.ok and audit.pseudo_matched
    (pseudo,) = [e for e in audit.entries if e.pseudo]
    assert pseudo.matched_c == pytest.approx(x - XO, abs=1e-9)


def test_fd_check_examples():
    k = THETA1.kernel
    assert fd_check(lambda c: eval_P(THETA1, k, c), lambda c: grad_P(THETA1, k, c), (-3, 4), 200) <= 1e-6
    assert fd_check(lambda c: grad_P(THETA1, k, c), lambda c: hess_P(THETA1, k, c), (-3, 4), 200) <= 1e-5


def test_fd_check_catches_wrong_derivative():
    assert fd_check(np.sin, lambda t: np.cos(t) + 1e-3, (0, 3), 20) > 1e-4


def test_conjugate_roundtrips():
    k = GaussianKernel(ALPHA)
    assert conjugate_roundtrip(k, 2.0, np.linspace(0, 6, 61)) <= 1e-5
    assert conjugate_roundtrip(k, 2.0, [0.0]) <= 1e-5
    assert v_roundtrip(1.0, np.linspace(-0.9, 0.9, 37)) <= 1e-8


def test_conjugate_roundtrip_requires_positive_w():
    with pytest.raises(ValueError):
        conjugate_roundtrip(GaussianKernel(ALPHA), -1.0, [0.5])
