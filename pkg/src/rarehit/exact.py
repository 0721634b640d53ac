"""Exact hitting/return tail distributions via a pattern-occurrence automaton.

The event {window of length n starting at position k lies in A} is tracked
with a multi-pattern failure-link automaton (all patterns share length n, so
the accepting states are exactly the word-terminal trie nodes).  The
automaton is composed with the source memory (last emitted symbol, which is
all a first-order Markov chain needs) and the state distribution is pushed
one symbol at a time, moving mass that enters acceptance into an absorbing
class.  A brute-force enumeration oracle provides an independent check.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    EnumerationTooLargeError,
    HorizonNonPositiveError,
    SingularSystemError,
    ZeroMeasureSetError,
)
from .process import ProcessModel, cylinder_measure
from .targets import TargetSet, measure

BRUTE_FORCE_CAP = 2 * 10 ** 7
_DENSE_LIMIT = 600  # composed-state count below which dense matrices win
_MONOTONE_SLACK = 1e-12


@dataclass(frozen=True)
class TailDistribution:
    """Tail table H(k) = mu(tau_A > k) for k = 0..horizon.

    ``kind`` is "hitting" or "return"; for returns the measure is the
    conditional one on A.  ``source`` records how the table was produced.
    """

    kind: str
    values: np.ndarray
    mu_A: float
    source: str

    def __post_init__(self):
        v = self.values
        if v.ndim != 1 or v.size < 1:
            raise HorizonNonPositiveError("tail needs at least H(0)")
        if abs(v[0] - 1.0) > 1e-9:
            raise ValueError(f"H(0) must be 1, got {v[0]!r}")
        if np.any(np.diff(v) > _MONOTONE_SLACK):
            raise ValueError("tail must be non-increasing")

    @property
    def horizon(self) -> int:
        return self.values.size - 1

    def truncated(self, K: int) -> "TailDistribution":
        if K > self.horizon:
            raise HorizonNonPositiveError(f"cannot truncate to {K} > horizon {self.horizon}")
        return TailDistribution(self.kind, self.values[:K + 1].copy(), self.mu_A, self.source)


class OccurrenceAutomaton:
    """Deterministic total automaton accepting exactly when the last n read
    symbols form a word of the target set."""

    def __init__(self, target: TargetSet, q: int):
        words = target.words
        # Trie construction.
        children: list[dict[int, int]] = [{}]
        depth = [0]
        terminal = [False]
        for w in words:
            s = 0
            for sym in w:
                nxt = children[s].get(sym)
                if nxt is None:
                    nxt = len(children)
                    children[s][sym] = nxt
                    children.append({})
                    depth.append(depth[s] + 1)
                    terminal.append(False)
                s = nxt
            terminal[s] = True
        S = len(children)
        goto = np.zeros((S, q), dtype=np.int64)
        fail = [0] * S
        # Breadth-first failure links; goto is made total on the fly.
        queue = deque()
        for c in range(q):
            nxt = children[0].get(c)
            if nxt is not None:
                goto[0, c] = nxt
                fail[nxt] = 0
                queue.append(nxt)
        while queue:
            s = queue.popleft()
            for c in range(q):
                nxt = children[s].get(c)
                if nxt is None:
                    goto[s, c] = goto[fail[s], c]
                else:
                    goto[s, c] = nxt
                    fail[nxt] = goto[fail[s], c]
                    queue.append(nxt)
        self.q = q
        self.n = target.n
        self.num_states = S
        self.goto = goto
        self.accepting = np.asarray(terminal, dtype=bool)

    def run(self, word, state: int = 0) -> int:
        for sym in word:
            state = self.goto[state, sym]
        return int(state)


def build_automaton(target: TargetSet, q: int) -> OccurrenceAutomaton:
    return OccurrenceAutomaton(target, q)


class _ComposedChain:
    """Markov chain over (automaton state, last symbol) pairs.

    ``full`` is the one-step kernel; ``surv`` drops every transition into an
    accepting automaton state, so pushing with it loses exactly the mass
    absorbed by the event.  Kernels are stored transposed so a push is a
    single matrix-vector product.
    """

    def __init__(self, model: ProcessModel, aut: OccurrenceAutomaton):
        q = model.alphabet_size
        S = aut.num_states
        size = S * q
        if model.kind == "iid":
            R = np.tile(model.iid_probs, (q, 1))
        else:
            R = model.transition
        idx = np.arange(size)
        s_idx = idx // q
        a_idx = idx % q
        cols = aut.goto[s_idx] * q + np.arange(q)[None, :]  # (size, q)
        data_full = R[a_idx]                                # (size, q)
        into_accept = aut.accepting[aut.goto[s_idx]]        # (size, q)
        data_surv = np.where(into_accept, 0.0, data_full)
        rows = np.repeat(idx, q)
        self.size = size
        self.q = q
        self.aut = aut
        self.model = model
        self.dense = size <= _DENSE_LIMIT
        if self.dense:
            Mf = np.zeros((size, size))
            Ms = np.zeros((size, size))
            Mf[rows, cols.ravel()] = data_full.ravel()
            Ms[rows, cols.ravel()] = data_surv.ravel()
            self.fullT = Mf.T.copy()
            self.survT = Ms.T.copy()
            self._surv = Ms
        else:
            shape = (size, size)
            Mf = sp.csr_matrix((data_full.ravel(), (rows, cols.ravel())), shape=shape)
            Ms = sp.csr_matrix((data_surv.ravel(), (rows, cols.ravel())), shape=shape)
            self.fullT = Mf.T.tocsr()
            self.survT = Ms.T.tocsr()
            self._surv = Ms

    def initial_hitting(self) -> np.ndarray:
        """Distribution after emitting the first symbol from stationarity."""
        v = np.zeros(self.size)
        first = self.model.next_probs(None)
        for s in range(self.q):
            v[self.aut.goto[0, s] * self.q + s] += first[s]
        return v

    def initial_return(self, target: TargetSet, mu_A: float) -> np.ndarray:
        """Conditional law on {window 0 in A}, mapped to composed states."""
        v = np.zeros(self.size)
        for w in target.words:
            p = cylinder_measure(self.model, w)
            if p > 0.0:
                v[self.aut.run(w) * self.q + w[-1]] += p / mu_A
        return v

    def push_full(self, v: np.ndarray) -> np.ndarray:
        return self.fullT @ v

    def push_surv(self, v: np.ndarray) -> np.ndarray:
        return self.survT @ v

    def expected_absorption_times(self) -> np.ndarray:
        """Solve t = 1 + M_surv t (expected steps to first acceptance)."""
        if self.dense:
            A = np.eye(self.size) - self._surv
            try:
                return np.linalg.solve(A, np.ones(self.size))
            except np.linalg.LinAlgError as e:
                raise SingularSystemError(str(e)) from e
        A = sp.identity(self.size, format="csc") - self._surv.tocsc()
        t = spla.spsolve(A, np.ones(self.size))
        if not np.all(np.isfinite(t)):
            raise SingularSystemError("absorption-time system is singular")
        return t


def _absorbing_tail(chain: _ComposedChain, v: np.ndarray, K: int) -> np.ndarray:
    H = np.empty(K + 1)
    H[0] = 1.0
    for k in range(1, K + 1):
        v = chain.push_surv(v)
        H[k] = v.sum()
    # Clamp float dust so monotonicity holds exactly.
    np.minimum.accumulate(H, out=H)
    np.clip(H, 0.0, 1.0, out=H)
    return H


def hitting_tail(model: ProcessModel, target: TargetSet, K: int) -> TailDistribution:
    """Exact H(k) = mu(tau_A > k), k = 0..K.

    The first n symbols are pushed without absorption (the window at position
    0 does not count for hitting), then each further symbol completes the
    window at the next position and absorbs the mass that matched.
    """
    if K < 1:
        raise HorizonNonPositiveError("K must be >= 1")
    aut = build_automaton(target, model.alphabet_size)
    chain = _ComposedChain(model, aut)
    v = chain.initial_hitting()
    for _ in range(target.n - 1):
        v = chain.push_full(v)
    H = _absorbing_tail(chain, v, K)
    return TailDistribution("hitting", H, measure(model, target), "exact")


def return_tail(model: ProcessModel, target: TargetSet, K: int) -> TailDistribution:
    """Exact mu(tau_A > k | A), k = 0..K."""
    if K < 1:
        raise HorizonNonPositiveError("K must be >= 1")
    mu_A = measure(model, target)
    if mu_A <= 0.0:
        raise ZeroMeasureSetError("target has zero measure")
    aut = build_automaton(target, model.alphabet_size)
    chain = _ComposedChain(model, aut)
    v = chain.initial_return(target, mu_A)
    H = _absorbing_tail(chain, v, K)
    return TailDistribution("return", H, mu_A, "exact")


def return_expectation(model: ProcessModel, target: TargetSet) -> float:
    """E[tau_A | A], by linear solve on the composed chain (Kac: = 1/mu(A))."""
    mu_A = measure(model, target)
    if mu_A <= 0.0:
        raise ZeroMeasureSetError("target has zero measure")
    aut = build_automaton(target, model.alphabet_size)
    chain = _ComposedChain(model, aut)
    v = chain.initial_return(target, mu_A)
    t = chain.expected_absorption_times()
    return float(v @ t)


def _enumerate_measures(model: ProcessModel, arr: np.ndarray) -> np.ndarray:
    if model.kind == "iid":
        return np.prod(model.iid_probs[arr], axis=1)
    w = model.stationary[arr[:, 0]]
    for i in range(arr.shape[1] - 1):
        w = w * model.transition[arr[:, i], arr[:, i + 1]]
    return w


def brute_force_tail(model: ProcessModel, target: TargetSet, K: int, kind: str = "hitting",
                     cap: int = BRUTE_FORCE_CAP) -> TailDistribution:
    """Independent oracle: enumerate all words of length K+n with their
    measures and locate window matches directly."""
    if K < 1:
        raise HorizonNonPositiveError("K must be >= 1")
    if kind not in ("hitting", "return"):
        raise ValueError(f"kind must be hitting or return, got {kind!r}")
    q = model.alphabet_size
    n = target.n
    L = K + n
    total = q ** L
    if total > cap:
        raise EnumerationTooLargeError(f"{total} words exceeds cap {cap}")
    word_codes = np.sort(np.array(
        [sum(s * q ** (n - 1 - j) for j, s in enumerate(w)) for w in target.words],
        dtype=np.int64))
    powers = q ** np.arange(L - 1, -1, -1, dtype=np.int64)
    mod = q ** (n - 1)
    H = np.zeros(K + 1)
    norm = 0.0
    chunk = 1 << 16
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        arr = (idx[:, None] // powers[None, :]) % q
        w = _enumerate_measures(model, arr)
        code = arr[:, :n] @ powers[L - n:]  # base-q code of window 0
        # windows k = 0..K by sliding the base-q code
        member0 = np.isin(code, word_codes)
        if kind == "return":
            w = np.where(member0, w, 0.0)
        norm += w.sum()
        H[0] += w.sum()
        alive = w.copy()
        for k in range(1, K + 1):
            code = (code % mod) * q + arr[:, n - 1 + k]
            alive = np.where(np.isin(code, word_codes), 0.0, alive)
            H[k] += alive.sum()
    if norm <= 0.0:
        raise ZeroMeasureSetError("conditioning event has zero measure")
    H /= norm
    np.minimum.accumulate(H, out=H)
    return TailDistribution(kind, H, measure(model, target), "brute_force")


def write_tails_csv(fp, hit: TailDistribution | None, ret: TailDistribution | None) -> None:
    """Tail export: columns k, H_hit, H_ret with metadata header lines."""
    ref = hit or ret
    if ref is None:
        raise ValueError("need at least one tail")
    if hit is not None and ret is not None and hit.horizon != ret.horizon:
        raise ValueError("tails must share a horizon for joint export")
    fp.write(f"# mu_A={ref.mu_A!r}\n")
    fp.write(f"# source={ref.source}\n")
    fp.write("k,H_hit,H_ret\n")
    for k in range(ref.horizon + 1):
        a = repr(float(hit.values[k])) if hit is not None else ""
        b = repr(float(ret.values[k])) if ret is not None else ""
        fp.write(f"{k},{a},{b}\n")
