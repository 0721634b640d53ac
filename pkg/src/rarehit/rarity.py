"""Why rare events do not appear too soon.

Computable bounds on mu(tau_A <= n) for targets built from at most kappa_n
rank-n cylinders whose exponential counting rate stays below the entropy of
the source, the closed-form Hamming-ball cardinality bound and its critical
matching fraction D0, and topological-entropy-style cardinality rates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import EnumerationTooLargeError, RateExceedsEntropyError
from .exact import hitting_tail
from .process import ProcessModel, entropy
from .targets import TargetSet, measure, union

AEP_ENUMERATION_CAP = 2 * 10 ** 7
_D0_SCAN_POINTS = 10 ** 4


@dataclass(frozen=True)
class RarityBound:
    """Assembled bound mu(tau <= n) <= epsilon_n = k*(m*kappa_n*e^{-(n-m)h} + deficiency)."""

    n: int
    kappa_n: int
    h: float
    k: int
    m: int
    aep_deficiency: float
    epsilon_n: float
    surrogate: bool

    def __post_init__(self):
        assert self.m * self.k >= self.n
        assert self.epsilon_n >= 0.0


def _aep_deficiency(model: ProcessModel, N: int, h: float,
                    cap: int = AEP_ENUMERATION_CAP) -> float:
    """Total measure of length-N words with mu([w]) > e^{-N h}.

    Single-N proxy for the full almost-sure event, hence a lower bound on
    the true deficiency; callers flag results built on it as surrogate.
    """
    q = model.alphabet_size
    if q ** N > cap:
        raise EnumerationTooLargeError(f"{q ** N} words exceeds AEP cap {cap}")
    thresh = math.exp(-N * h)
    powers = q ** np.arange(N - 1, -1, -1, dtype=np.int64)
    idx = np.arange(q ** N, dtype=np.int64)
    arr = (idx[:, None] // powers[None, :]) % q
    if model.kind == "iid":
        w = np.prod(model.iid_probs[arr], axis=1)
    else:
        w = model.stationary[arr[:, 0]]
        for i in range(N - 1):
            w = w * model.transition[arr[:, i], arr[:, i + 1]]
    return float(w[w > thresh].sum())


def epsilon_bound(model: ProcessModel, kappa_n: int, n: int) -> RarityBound:
    """Bound mu(tau_{A_n} <= n) <= epsilon_n for any union of at most
    kappa_n rank-n cylinders, valid whenever (1/n) ln kappa_n < h_mu.

    The free choices are pinned deterministically: h is the midpoint of
    ((1/n) ln kappa_n, h_mu) and k the smallest integer with
    (1/n) ln kappa_n < (1 - 1/k) h.
    """
    h_mu = entropy(model)
    h0n = math.log(kappa_n) / n
    if h0n >= h_mu:
        raise RateExceedsEntropyError(
            f"(1/n) ln kappa_n = {h0n:.6g} >= h_mu = {h_mu:.6g}")
    h = 0.5 * (h0n + h_mu)
    r = h0n / h
    k = 2 if h0n == 0.0 else math.floor(1.0 / (1.0 - r)) + 1
    while h0n >= (1.0 - 1.0 / k) * h:
        k += 1
    m = math.ceil(n / k)
    if model.is_uniform_iid:
        # Uniform cylinders have measure q^{-N} <= e^{-N h} for every N
        # since h < ln q, so the good set is everything.
        deficiency = 0.0
        surrogate = False
    else:
        deficiency = _aep_deficiency(model, n - m, h)
        surrogate = True
    eps = k * (m * kappa_n * math.exp(-(n - m) * h) + deficiency)
    return RarityBound(n, kappa_n, h, k, m, deficiency, eps, surrogate)


def hamming_kappa_bound(n: int, D: float, q: int) -> float:
    """Closed-form upper bound ((1 + D(q-1)) / D^D)^n on the number of words
    within Hamming distance D*n of a fixed word."""
    if not 0.0 < D < 1.0:
        raise ValueError("D must lie in (0, 1)")
    base = (1.0 + D * (q - 1)) / D ** D
    return base ** n


def solve_D0(q: int, h: float, tol: float = 1e-6) -> float:
    """Smallest D in (0,1) with (1 + D(q-1)) / D^D = e^h.

    Scan-then-bisect, in log space; the left limit of the left-hand side is
    1 < e^h.  Returns 1.0 when no crossing exists (D unconstrained).
    """
    if h <= 0:
        raise ValueError("entropy level must be positive")

    def g(D: float) -> float:
        return math.log1p(D * (q - 1)) - D * math.log(D) - h

    grid = np.linspace(0.0, 1.0, _D0_SCAN_POINTS + 1)[1:]
    vals = np.array([g(D) for D in grid])
    crossing = np.nonzero(vals >= 0.0)[0]
    if crossing.size == 0:
        return 1.0
    i = int(crossing[0])
    if i == 0:
        return float(grid[0])
    lo, hi = float(grid[i - 1]), float(grid[i])
    return float(brentq(g, lo, hi, xtol=tol * 1e-2))


def cardinality_rate(kappa_table: dict[int, int]) -> float:
    """Finite-sample limsup surrogate of (1/n) ln kappa_n: the maximum over
    the largest-n half of the table."""
    ns = sorted(kappa_table)
    if not ns or any(kappa_table[n] < 1 for n in ns):
        raise ValueError("need kappa_n >= 1 for a non-empty table")
    half = ns[len(ns) // 2:]
    return max(math.log(kappa_table[n]) / n for n in half)


@dataclass(frozen=True)
class MixedUnionRow:
    n: int
    n_mu_A0: float
    tau_term_A1: float
    bound: float
    true_value: float


def mixed_union_check(model: ProcessModel,
                      a0_by_n: dict[int, TargetSet | None],
                      a1_by_n: dict[int, TargetSet | None],
                      n_range) -> list[MixedUnionRow]:
    """Per-n check of mu(tau_{A0 u A1} <= n) <= n*mu(A0) + mu(tau_{A1} <= n)."""
    rows = []
    for n in n_range:
        a0 = a0_by_n.get(n)
        a1 = a1_by_n.get(n)
        term0 = n * measure(model, a0) if a0 is not None else 0.0
        term1 = 0.0
        if a1 is not None:
            term1 = 1.0 - hitting_tail(model, a1, n).values[n]
        parts = [t for t in (a0, a1) if t is not None]
        if not parts:
            raise ValueError(f"no target at n={n}")
        combined = parts[0] if len(parts) == 1 else union(parts)
        true_value = 1.0 - hitting_tail(model, combined, n).values[n]
        bound = term0 + term1
        if true_value > bound + 1e-10:
            raise AssertionError(
                f"union bound violated at n={n}: {true_value} > {bound}")
        rows.append(MixedUnionRow(n, term0, term1, bound, true_value))
    return rows


def write_rarity_csv(fp, model: ProcessModel, rows: list[tuple[RarityBound, float]]) -> None:
    """Rows pair a RarityBound with the measured mu(tau <= n)."""
    fp.write("n,kappa,h,k,m,epsilon_n,mu_tau_le_n,surrogate\n")
    for rb, mu_tau in rows:
        fp.write(f"{rb.n},{rb.kappa_n},{rb.h!r},{rb.k},{rb.m},"
                 f"{rb.epsilon_n!r},{mu_tau!r},{int(rb.surrogate)}\n")
