"""Seed-deterministic Monte Carlo estimation of hitting and return tails.

Trajectories are generated symbol by symbol; window membership is tested
with the occurrence automaton for explicit targets or with a sliding-window
predicate for implicit ones, so memory per trajectory is O(1) resp. O(n).

Per-trajectory seeds are derived from (master seed, trajectory index) by a
fixed splitmix-style mix, so serial and parallel schedules produce
identical batches.  The derivation below is part of the external contract.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import HorizonMismatchError, RejectionBudgetExceededError
from .exact import TailDistribution, build_automaton
from .process import ProcessModel, cylinder_measure
from .targets import TargetSet, measure

_MASK64 = (1 << 64) - 1
DEFAULT_REJECTION_BUDGET = 10 ** 7


def derive_seed(master: int, index: int) -> int:
    """Stable per-trajectory seed: splitmix64 finalizer of
    master + (index+1) * golden-gamma, all mod 2^64."""
    z = (master + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


@dataclass(frozen=True)
class SampleBatch:
    kind: str  # "hitting" or "return"
    N: int
    seed: int
    times: np.ndarray      # time of hit, or censor_cap when censored
    censored: np.ndarray   # boolean
    censor_cap: int

    @property
    def n_censored(self) -> int:
        return int(self.censored.sum())


class _SymbolStream:
    """Buffered per-trajectory symbol source."""

    def __init__(self, model: ProcessModel, rng: np.random.Generator):
        self.rng = rng
        self.q = model.alphabet_size
        self.cum_first = np.cumsum(model.next_probs(None))
        if model.kind == "markov":
            self.cum_rows = np.cumsum(model.transition, axis=1)
        else:
            self.cum_rows = None
        self.last: int | None = None
        self._buf = rng.random(256)
        self._pos = 0

    def _u(self) -> float:
        if self._pos == self._buf.size:
            self._buf = self.rng.random(256)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def next(self) -> int:
        if self.cum_rows is None or self.last is None:
            cum = self.cum_first
        else:
            cum = self.cum_rows[self.last]
        s = int(np.searchsorted(cum, self._u(), side="right"))
        if s >= self.q:  # guard against u == 1.0 edge
            s = self.q - 1
        self.last = s
        return s


class _AutomatonMatcher:
    __slots__ = ("goto", "accepting", "state")

    def __init__(self, aut):
        self.goto = aut.goto
        self.accepting = aut.accepting
        self.state = 0

    def feed(self, sym: int) -> bool:
        self.state = self.goto[self.state, sym]
        return bool(self.accepting[self.state])


class _PredicateMatcher:
    __slots__ = ("pred", "n", "window")

    def __init__(self, pred):
        self.pred = pred
        self.n = pred.n
        self.window = deque(maxlen=pred.n)

    def feed(self, sym: int) -> bool:
        self.window.append(sym)
        return len(self.window) == self.n and self.pred(self.window)


def _matcher_factory(model: ProcessModel, target):
    if isinstance(target, TargetSet):
        aut = build_automaton(target, model.alphabet_size)
        return target.n, (lambda: _AutomatonMatcher(aut))
    if hasattr(target, "n") and callable(target):
        return target.n, (lambda: _PredicateMatcher(target))
    raise TypeError("target must be a TargetSet or a window predicate with .n")


def default_censor_cap(model: ProcessModel, target) -> int:
    """50 expected hits at the crude rate guess lambda = 1."""
    if not isinstance(target, TargetSet):
        raise ValueError("censor_cap must be given explicitly for predicate targets")
    return max(1, math.ceil(50.0 / measure(model, target)))


def _scan(model, matcher, stream, n, cap, warmup_word=None):
    """Feed the first window, then count steps to the first later match."""
    if warmup_word is not None:
        for sym in warmup_word:
            matcher.feed(sym)
            stream.last = sym
    else:
        for _ in range(n):
            matcher.feed(stream.next())
    for k in range(1, cap + 1):
        if matcher.feed(stream.next()):
            return k, False
    return cap, True


def sample_hitting(model: ProcessModel, target, N: int, seed: int,
                   censor_cap: int | None = None) -> SampleBatch:
    """N independent stationary trajectories scanned for the first window
    match at position >= 1, right-censored at the cap."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if censor_cap is None:
        censor_cap = default_censor_cap(model, target)
    n, make_matcher = _matcher_factory(model, target)
    times = np.empty(N, dtype=np.int64)
    cens = np.zeros(N, dtype=bool)
    for i in range(N):
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, i)))
        stream = _SymbolStream(model, rng)
        times[i], cens[i] = _scan(model, make_matcher(), stream, n, censor_cap)
    return SampleBatch("hitting", N, seed, times, cens, censor_cap)


def sample_return(model: ProcessModel, target, N: int, seed: int,
                  censor_cap: int | None = None,
                  rejection_budget: int = DEFAULT_REJECTION_BUDGET) -> SampleBatch:
    """As sample_hitting, with the initial window drawn from the conditional
    law on A: directly for explicit targets, by rejection for predicates."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if censor_cap is None:
        censor_cap = default_censor_cap(model, target)
    n, make_matcher = _matcher_factory(model, target)
    explicit = isinstance(target, TargetSet)
    if explicit:
        weights = np.array([cylinder_measure(model, w) for w in target.words])
        cum = np.cumsum(weights / weights.sum())
    rejections = 0
    times = np.empty(N, dtype=np.int64)
    cens = np.zeros(N, dtype=bool)
    for i in range(N):
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, i)))
        stream = _SymbolStream(model, rng)
        matcher = make_matcher()
        if explicit:
            j = int(np.searchsorted(cum, stream._u(), side="right"))
            word = target.words[min(j, len(target.words) - 1)]
        else:
            while True:
                word = [stream.next() for _ in range(n)]
                probe = make_matcher()
                hit = False
                for s in word:
                    hit = probe.feed(s)
                if hit:
                    break
                rejections += 1
                if rejections > rejection_budget:
                    raise RejectionBudgetExceededError(
                        f"more than {rejection_budget} rejected initial windows")
                stream.last = None
        times[i], cens[i] = _scan(model, matcher, stream, n, censor_cap,
                                  warmup_word=word)
    return SampleBatch("return", N, seed, times, cens, censor_cap)


def empirical_tail(batch: SampleBatch, K: int | None = None) -> TailDistribution:
    """H_emp(k) = fraction of samples > k; censored samples count as > cap."""
    if K is None:
        K = batch.censor_cap
    if K > batch.censor_cap:
        raise HorizonMismatchError("K beyond the censoring cap is unobserved")
    t_eff = np.where(batch.censored, np.inf, batch.times.astype(float))
    k = np.arange(K + 1)
    H = (t_eff[None, :] > k[:, None]).mean(axis=1)
    return TailDistribution(batch.kind, H, float("nan"),
                            f"empirical(N={batch.N},seed={batch.seed})")


def ks_distance(tail_a: TailDistribution, tail_b: TailDistribution) -> float:
    """Sup-norm distance between two tails on their common grid."""
    if tail_a.horizon != tail_b.horizon:
        raise HorizonMismatchError(
            f"horizons differ: {tail_a.horizon} vs {tail_b.horizon}")
    return float(np.max(np.abs(tail_a.values - tail_b.values)))


def write_batch_csv(fp, batch: SampleBatch) -> None:
    fp.write(f"# seed={batch.seed}\n")
    fp.write(f"# kind={batch.kind}\n")
    fp.write(f"# censor_cap={batch.censor_cap}\n")
    fp.write("trajectory_index,time,censored\n")
    for i in range(batch.N):
        fp.write(f"{i},{batch.times[i]},{int(batch.censored[i])}\n")
