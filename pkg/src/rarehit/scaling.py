"""Scale selection, the normalizing constant lambda(A), and the explicit
exponential-approximation bound.

Quantities, from the hitting tail H and the mixing bound at gap n:

    d     = 2*mu(tau_A <= n) + alpha(n)
    delta = 3*sqrt(d)
    s     = smallest integer > 2n with mu(tau_A <= s-2n) >= sqrt(d)
    lambda(A) = -ln H(s-2n) / (s * mu(A))

For delta >= 1/4 the explicit bound exceeds 3 and nothing is asserted; a
nominal lambda = 1 is emitted so downstream rescaling stays total.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import HorizonTooShortError, ZeroTailError
from .exact import TailDistribution, hitting_tail
from .process import ProcessModel, alpha_bound
from .targets import TargetSet, measure

DELTA_QUANTITATIVE = 0.25
MAX_TAIL_STEPS = 10 ** 8
TRUNCATION_TARGET = 1e-4
_CHECK_SLACK = 1e-12


@dataclass(frozen=True)
class ScaleCertificate:
    n: int
    d: float
    delta: float
    regime: str  # "quantitative" or "trivial"
    s: int | None
    lam: float | None
    nominal: bool
    mu_A: float
    checks: dict

    @property
    def sqrt_d(self) -> float:
        return math.sqrt(self.d)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "d": self.d, "delta": self.delta, "regime": self.regime,
            "s": self.s, "lambda": self.lam, "nominal": self.nominal,
            "mu_A": self.mu_A, "checks": dict(self.checks),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class VerificationReport:
    sup_dev: float
    bound: float
    truncation: float
    passed: bool
    residuals: np.ndarray

    def to_dict(self) -> dict:
        return {"sup_dev": self.sup_dev, "bound": self.bound,
                "truncation": self.truncation, "passed": self.passed}


def scale_search(tail: TailDistribution, n: int, alpha_n: float) -> ScaleCertificate:
    """Select the scale s from a hitting tail; lambda is left unset.

    Raises HorizonTooShortError when the tail table ends before the
    defining threshold crossing (or before s itself, which the
    certificate checks need).
    """
    if tail.kind != "hitting":
        raise ValueError("scale_search needs a hitting tail")
    H = tail.values
    if tail.horizon < n:
        raise HorizonTooShortError(f"horizon {tail.horizon} < n={n}")
    F = 1.0 - H  # F[j] = mu(tau <= j)
    d = float(2.0 * F[n] + alpha_n)
    delta = 3.0 * math.sqrt(d)
    regime = "quantitative" if delta < DELTA_QUANTITATIVE else "trivial"
    sd = math.sqrt(d)
    if regime == "trivial" and sd >= 1.0:
        # The defining threshold is unreachable; nothing pins lambda down.
        return ScaleCertificate(n, d, delta, regime, None, None, False,
                                tail.mu_A, {})
    above = np.nonzero(F >= sd)[0]
    if above.size == 0:
        raise HorizonTooShortError("threshold sqrt(d) not reached within horizon")
    j = int(above[0])  # smallest j with mu(tau <= j) >= sqrt(d); j >= 1 since F[0]=0
    s = j + 2 * n
    if tail.horizon < s:
        raise HorizonTooShortError(f"horizon {tail.horizon} < s={s}")
    checks = {
        "s_gt_2n": bool(s > 2 * n),
        "threshold": bool(F[j] >= sd),
        "minimality": bool(F[j - 1] < sd),
        "mu_tau_le_s": bool(F[s] <= sd + 2.0 * d + _CHECK_SLACK),
        "ratio": bool((F[2 * n] + alpha_n) <= sd * F[j] + _CHECK_SLACK),
    }
    return ScaleCertificate(n, d, delta, regime, s, None, False,
                            tail.mu_A, checks)


def compute_lambda(tail: TailDistribution, cert: ScaleCertificate,
                   mu_A: float | None = None) -> ScaleCertificate:
    """Fill in lambda(A) = -ln H(s-2n) / (s*mu_A) on a certificate."""
    if mu_A is None:
        mu_A = cert.mu_A
    if cert.s is None:
        # Threshold unreachable (delta >= 1/4 and sqrt(d) >= 1): the
        # explicit bound exceeds 3, so any lambda satisfies it.
        return replace(cert, lam=1.0, nominal=True)
    Hval = float(tail.values[cert.s - 2 * cert.n])
    if Hval <= 0.0:
        raise ZeroTailError("H(s-2n) = 0; lambda undefined")
    lam = -math.log(Hval) / (cert.s * mu_A)
    checks = dict(cert.checks)
    checks["lambda_positive"] = lam > 0.0
    if cert.regime == "quantitative":
        checks["lambda_le_inv_1_minus_delta"] = lam <= 1.0 / (1.0 - cert.delta) + _CHECK_SLACK
    return replace(cert, lam=lam, nominal=cert.regime == "trivial", checks=checks)


def scale_certificate(model: ProcessModel, target: TargetSet,
                      alpha_n: float | None = None,
                      max_steps: int = MAX_TAIL_STEPS,
                      ) -> tuple[ScaleCertificate, TailDistribution]:
    """Full pipeline: exact hitting tail with auto-extended horizon, scale
    search, and lambda.  The horizon doubles until the search succeeds."""
    n = target.n
    if alpha_n is None:
        alpha_n = alpha_bound(model, n)
    mu_A = measure(model, target)
    K = max(4 * n, 64)
    while True:
        tail = hitting_tail(model, target, K)
        try:
            cert = scale_search(tail, n, alpha_n)
            break
        except HorizonTooShortError:
            if K >= max_steps:
                raise
            K = min(2 * K, max_steps)
    cert = compute_lambda(tail, cert, mu_A)
    return cert, tail


def extend_for_verification(model: ProcessModel, target: TargetSet,
                            tail: TailDistribution, lam: float,
                            target_residual: float = TRUNCATION_TARGET,
                            max_steps: int = MAX_TAIL_STEPS) -> TailDistribution:
    """Grow the hitting tail until both H(K) and exp(-lam*mu*K) fall below
    the truncation target."""
    mu = tail.mu_A
    K = tail.horizon
    while tail.values[-1] > target_residual or math.exp(-lam * mu * K) > target_residual:
        if K >= max_steps:
            raise HorizonTooShortError(f"needed horizon exceeds cap {max_steps}")
        K = min(2 * K, max_steps)
        tail = hitting_tail(model, target, K)
    return tail


def verify_exponential_bound(tail: TailDistribution, lam: float, mu_A: float,
                         cert: ScaleCertificate,
                         empirical_slack: float = 0.0) -> VerificationReport:
    """Check sup_k |H(k) - exp(-lam*mu*k)| <= 12*sqrt(d) up to the horizon,
    reporting the unchecked-tail contribution as a truncation residual."""
    K = tail.horizon
    exp_tail = math.exp(-lam * mu_A * K)
    if tail.values[-1] > TRUNCATION_TARGET or exp_tail > TRUNCATION_TARGET:
        raise HorizonTooShortError(
            "horizon too short: extend until H(K) and exp(-lam*mu*K) <= 1e-4")
    k = np.arange(K + 1)
    residuals = np.abs(tail.values - np.exp(-lam * mu_A * k))
    sup_dev = float(residuals.max())
    truncation = max(float(tail.values[-1]), exp_tail)
    bound = 12.0 * math.sqrt(cert.d) + empirical_slack
    passed = sup_dev <= bound + truncation
    return VerificationReport(sup_dev, bound, truncation, passed, residuals)


def verify(model: ProcessModel, target: TargetSet,
           alpha_n: float | None = None,
           ) -> tuple[ScaleCertificate, VerificationReport, TailDistribution]:
    """Certificate + explicit-bound verification on exact tails."""
    cert, tail = scale_certificate(model, target, alpha_n=alpha_n)
    tail = extend_for_verification(model, target, tail, cert.lam)
    report = verify_exponential_bound(tail, cert.lam, cert.mu_A, cert)
    return cert, report, tail


def lambda_trajectory(model: ProcessModel, point, n_range,
                      ) -> list[ScaleCertificate]:
    """Certificates along the cylinder prefixes of a point.

    ``point`` is a finite word recycled periodically (so "0" is the fixed
    point 000..., "01" the 2-periodic point, and a long aperiodic prefix
    stands for itself up to max(n_range)).
    """
    from .targets import cylinder
    if isinstance(point, str):
        point = point.split(",") if "," in point else list(point)
    p = [int(s) for s in point]
    out = []
    for n in n_range:
        word = [p[i % len(p)] for i in range(n)]
        cert, _ = scale_certificate(model, cylinder(word))
        out.append(cert)
    return out
