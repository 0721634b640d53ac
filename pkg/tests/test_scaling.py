import math

import numpy as np
import pytest

from rarehit import (
    TailDistribution,
    cylinder,
    errors,
    hitting_tail,
    scaling,
    uniform_iid,
)
from rarehit.scaling import (
    compute_lambda,
    lambda_trajectory,
    scale_certificate,
    scale_search,
    verify,
    verify_exponential_bound,
)

UNIFORM2 = uniform_iid(2)


def test_large_set_is_trivial_regime():
    # A = {1}, n = 1: d = 2 * 1/2 + 0 = 1, delta = 3 >= 1/4, sqrt(d) = 1
    tail = hitting_tail(UNIFORM2, cylinder([1]), 16)
    cert = scale_search(tail, 1, 0.0)
    assert cert.regime == "trivial"
    assert cert.d == pytest.approx(1.0, abs=1e-12)
    assert cert.s is None
    cert = compute_lambda(tail, cert)
    assert cert.lam == 1.0 and cert.nominal


def test_deep_cylinder_quantitative():
    cert, tail = scale_certificate(UNIFORM2, cylinder([1] * 12))
    assert cert.regime == "quantitative"
    assert cert.delta < 0.25
    assert cert.s == 498  # frozen after brute-force-verified run
    assert all(cert.checks.values())
    # scale inequalities recomputed from the tail
    F = 1.0 - tail.values
    sd = math.sqrt(cert.d)
    assert F[cert.s] <= sd + 2 * cert.d + 1e-12
    assert F[cert.s - 2 * cert.n] >= sd
    assert F[cert.s - 2 * cert.n - 1] < sd
    assert (F[2 * cert.n] + 0.0) / F[cert.s - 2 * cert.n] <= sd + 1e-12


def test_synthetic_tail_scale_by_hand():
    # H(k) = exp(-k/1000), n = 5, alpha = 0:
    # sqrt(d) = sqrt(2 (1 - e^{-5/1000})), s = ceil(-1000 ln(1 - sqrt(d))) + 10
    H = np.exp(-np.arange(0, 2001) / 1000.0)
    tail = TailDistribution("hitting", H, 0.001, "exact")
    cert = scale_search(tail, 5, 0.0)
    sd = math.sqrt(2.0 * (1.0 - math.exp(-5 / 1000)))
    s_hand = math.ceil(-1000.0 * math.log(1.0 - sd)) + 10
    assert cert.s == s_hand == 116


def test_compute_lambda_formula():
    # H(8) = 2^-8, s = 10, n = 1, mu = 1/2 -> lambda = 8 ln2 / 5
    H = np.ones(12)
    H[1:] = 2.0 ** -np.arange(1, 12)
    tail = TailDistribution("hitting", H, 0.5, "exact")
    cert = scaling.ScaleCertificate(1, 0.001, 3 * math.sqrt(0.001), "quantitative",
                                    10, None, False, 0.5, {})
    out = compute_lambda(tail, cert)
    assert out.lam == pytest.approx(8 * math.log(2) / 5, rel=1e-12)


def test_lambda_exponential_tail():
    # H(k) = exp(-mu k) exactly gives lambda = (s - 2n)/s, approaching 1
    # as the scale grows relative to the rank
    mu = 0.01
    n = 3
    H = np.exp(-mu * np.arange(0, 2001))
    tail = TailDistribution("hitting", H, mu, "exact")
    for s in (40, 400, 2000):
        cert = scaling.ScaleCertificate(n, 1e-4, 0.03, "quantitative", s, None,
                                        False, mu, {})
        out = compute_lambda(tail, cert)
        assert out.lam == pytest.approx((s - 2 * n) / s, rel=1e-12)
    assert abs(out.lam - 1.0) <= 2 * n / 2000


def test_zero_tail_error():
    H = np.ones(20)
    H[1:] = 0.0
    tail = TailDistribution("hitting", H, 0.5, "exact")
    cert = scaling.ScaleCertificate(1, 0.001, 0.095, "quantitative", 10, None,
                                    False, 0.5, {})
    with pytest.raises(errors.ZeroTailError):
        compute_lambda(tail, cert)


def test_horizon_too_short_raised():
    tail = hitting_tail(UNIFORM2, cylinder([1] * 12), 20)
    with pytest.raises(errors.HorizonTooShortError):
        scale_search(tail, 12, 0.0)


def test_verify_trivial_regime_passes():
    cert, report, _ = verify(UNIFORM2, cylinder([1]))
    assert report.bound >= 3.0  # vacuous statement
    assert report.passed


def test_verify_deep_cylinder_frozen_sup_dev():
    cert, report, _ = verify(UNIFORM2, cylinder([1] * 12))
    assert report.passed
    assert report.sup_dev == pytest.approx(0.01744451267206415, abs=1e-10)
    assert report.sup_dev < report.bound


def test_verify_requires_long_horizon():
    cert, tail = scale_certificate(UNIFORM2, cylinder([1] * 8))
    with pytest.raises(errors.HorizonTooShortError):
        verify_exponential_bound(tail.truncated(20), cert.lam, cert.mu_A, cert)


def test_lambda_trajectory_periodic_point():
    certs = lambda_trajectory(UNIFORM2, "0", range(2, 13))
    lams = [c.lam for c in certs]
    # short-return deflation at the fixed point: lambda near 1/2
    assert lams[-1] == pytest.approx(0.47762752781383117, abs=1e-10)
    for c in certs:
        if c.regime == "quantitative":
            assert c.lam <= 1.0 / (1.0 - c.delta) <= 2.0


def test_lambda_trajectory_aperiodic_point():
    point = "01101110010111011110001"
    certs = lambda_trajectory(UNIFORM2, point, range(2, 13))
    assert certs[-1].lam > 0.9  # near 1 away from periodicity
    assert all(c.lam > 0 for c in certs)


def test_certificate_json():
    cert, _ = scale_certificate(UNIFORM2, cylinder([1] * 12))
    d = cert.to_dict()
    assert d["regime"] == "quantitative"
    assert isinstance(d["checks"]["minimality"], bool)
    import json
    json.loads(cert.to_json())
