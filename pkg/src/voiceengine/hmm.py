"""Discrete-emission HMMs: scaled forward-backward, Viterbi, Baum-Welch."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModel, EmptyTrainingSet, InvalidObservation

NEG_INF = -math.inf


@dataclass(frozen=True)
class HMMConfig:
    n_states: int = 5
    max_iters: int = 40
    tol: float = 1e-4
    floor_a: float = 1e-8
    floor_b: float = 1e-6


@dataclass(frozen=True, eq=False)
class Hmm:
    pi: np.ndarray    # (N,)
    A: np.ndarray     # (N, N)
    B: np.ndarray     # (N, M)
    topology_mask: np.ndarray = None  # (N, N) bool; defaults to A > 0

    def __post_init__(self):
        pi = np.array(self.pi, dtype=float)
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float)
        n = pi.size
        if A.shape != (n, n) or B.ndim != 2 or B.shape[0] != n:
            raise ValueError("inconsistent HMM shapes")
        mask = A > 0 if self.topology_mask is None else np.array(self.topology_mask, dtype=bool)
        if mask.shape != (n, n):
            raise ValueError("topology mask must be N x N")
        if np.any(A[~mask] != 0):
            raise ValueError("transition outside the topology mask")
        for arr in (pi, A, B, mask):
            arr.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "topology_mask", mask)

    @property
    def N(self):
        return self.pi.size

    @property
    def M(self):
        return self.B.shape[1]

    def to_dict(self):
        return {"N": self.N, "M": self.M,
                "pi": self.pi.tolist(), "A": self.A.tolist(), "B": self.B.tolist(),
                "topology_mask": self.topology_mask.tolist()}

    @classmethod
    def from_dict(cls, d):
        h = cls(d["pi"], d["A"], d["B"], d["topology_mask"])
        if h.N != d["N"] or h.M != d["M"]:
            raise ValueError("declared N/M disagree with array shapes")
        return h

    def same_as(self, other, atol=0.0):
        return (self.N == other.N and self.M == other.M
                and np.array_equal(self.topology_mask, other.topology_mask)
                and all(np.allclose(x, y, rtol=0, atol=atol)
                        for x, y in ((self.pi, other.pi), (self.A, other.A), (self.B, other.B))))


@dataclass(frozen=True, eq=False)
class ForwardResult:
    log_likelihood: float
    scaled_alpha: np.ndarray  # (T, N), rows sum to 1
    scale_factors: np.ndarray  # (T,)


def bakis_mask(n):
    """Self loop, next state and skip-one arcs."""
    mask = np.zeros((n, n), dtype=bool)
    for i in range(n):
        mask[i, i:min(i + 3, n)] = True
    return mask


def init_left_right(N: int, M: int, seed: int = 0) -> Hmm:
    if N < 1 or M < 1:
        raise ValueError("need N >= 1 and M >= 1")
    mask = bakis_mask(N)
    A = mask / mask.sum(axis=1, keepdims=True)
    pi = np.zeros(N)
    pi[0] = 1.0
    rng = np.random.default_rng(seed)
    B = (1.0 + rng.uniform(-0.01, 0.01, size=(N, M))) / M
    B /= B.sum(axis=1, keepdims=True)
    return Hmm(pi, A, B, mask)


def _check_obs(h, obs):
    obs = np.asarray(obs, dtype=np.int64).reshape(-1)
    if obs.size == 0:
        raise InvalidObservation("observation sequence is empty")
    if obs.min() < 0 or obs.max() >= h.M:
        raise InvalidObservation(f"symbols must lie in [0, {h.M})")
    return obs


def forward(h: Hmm, obs) -> ForwardResult:
    """Scaled forward pass.

    An impossible sequence gives ``log_likelihood = -inf``; rows of the
    scaled alpha from the vanishing step on are left at zero.
    """
    obs = _check_obs(h, obs)
    T, N = obs.size, h.N
    alpha = np.zeros((T, N))
    scale = np.zeros(T)
    cur = h.pi * h.B[:, obs[0]]
    for t in range(T):
        if t:
            cur = (alpha[t - 1] @ h.A) * h.B[:, obs[t]]
        s = cur.sum()
        if s <= 0.0:
            return ForwardResult(NEG_INF, alpha, scale)
        scale[t] = s
        alpha[t] = cur / s
    return ForwardResult(float(np.sum(np.log(scale))), alpha, scale)


def backward(h: Hmm, obs, scale_factors) -> np.ndarray:
    """Scaled backward pass sharing the forward scale factors.

    With these conventions sum_i alpha_t(i) * beta_t(i) * c_t = 1 for every t.
    """
    obs = _check_obs(h, obs)
    scale = np.asarray(scale_factors, dtype=float)
    T = obs.size
    beta = np.zeros((T, h.N))
    if np.any(scale <= 0):
        return beta
    beta[T - 1] = 1.0 / scale[T - 1]
    for t in range(T - 2, -1, -1):
        beta[t] = h.A @ (h.B[:, obs[t + 1]] * beta[t + 1]) / scale[t]
    return beta


def log_likelihood(h: Hmm, obs) -> float:
    return forward(h, obs).log_likelihood


def viterbi(h: Hmm, obs):
    """Most likely state path and its log probability.

    Ties go to the lowest state index, both for the final state and at
    every backtracking step. Returns ``-inf`` when no path is possible.
    """
    obs = _check_obs(h, obs)
    T, N = obs.size, h.N
    with np.errstate(divide="ignore"):
        log_pi, log_A, log_B = np.log(h.pi), np.log(h.A), np.log(h.B)
    delta = log_pi + log_B[:, obs[0]]
    back = np.zeros((T, N), dtype=np.int64)
    for t in range(1, T):
        cand = delta[:, None] + log_A
        back[t] = np.argmax(cand, axis=0)
        delta = cand[back[t], np.arange(N)] + log_B[:, obs[t]]
    path = np.zeros(T, dtype=np.int64)
    if np.all(np.isneginf(delta)):
        # every path ties at -inf, so the tie rule picks state 0 throughout
        return path.tolist(), -math.inf
    path[-1] = int(np.argmax(delta))
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path.tolist(), float(delta[path[-1]])


def _floored_rows(counts, allowed, floor):
    """Row-wise maximizer of sum(c * log p) with p >= floor on allowed entries.

    Entries whose share would drop below the floor are pinned at it and the
    remaining mass is split in proportion to the counts. Disallowed entries
    stay exactly zero.
    """
    out = np.zeros_like(counts)
    for i in range(counts.shape[0]):
        idx = np.flatnonzero(allowed[i])
        c = counts[i, idx]
        if floor * idx.size >= 1.0:
            out[i, idx] = 1.0 / idx.size
            continue
        pinned = np.zeros(idx.size, dtype=bool)
        while True:
            free = ~pinned
            mass = 1.0 - floor * pinned.sum()
            total = c[free].sum()
            vals = mass * c[free] / total if total > 0 else np.full(free.sum(), mass / free.sum())
            low = vals < floor
            if not low.any():
                break
            pinned[np.flatnonzero(free)[low]] = True
        p = np.full(idx.size, float(floor))
        p[free] = vals
        out[i, idx] = p
    return out


def expected_counts(h: Hmm, obs):
    """E-step for one sequence: (log-likelihood, gamma_0, transition counts, emission counts)."""
    obs = _check_obs(h, obs)
    fw = forward(h, obs)
    if not math.isfinite(fw.log_likelihood):
        return fw.log_likelihood, None, None, None
    alpha, scale = fw.scaled_alpha, fw.scale_factors
    beta = backward(h, obs, scale)
    gamma = alpha * beta * scale[:, None]
    # sum over t of outer(alpha_t, b(o_{t+1}) * beta_{t+1}), masked by A
    xi = (alpha[:-1].T @ (h.B[:, obs[1:]].T * beta[1:])) * h.A
    emit = np.zeros((h.N, h.M))
    np.add.at(emit.T, obs, gamma)
    return fw.log_likelihood, gamma[0], xi, emit


def baum_welch(h: Hmm, training, max_iters: int = 40, tol: float = 1e-4,
               floor_b: float = 1e-6, floor_a: float = 1e-8, on_iteration=None):
    """Re-estimate ``h`` on several observation sequences.

    Returns the trained model and the total training log-likelihood of each
    model visited, starting with ``h`` itself. Iteration stops when the
    relative improvement falls below ``tol`` or after ``max_iters`` updates.
    Flooring is done inside the M-step as a constrained maximization, so the
    likelihood sequence stays non-decreasing.

    ``on_iteration(i, model, total)`` is called for every evaluated model.
    """
    training = [_check_obs(h, o) for o in training]
    if not training:
        raise EmptyTrainingSet("baum_welch needs at least one sequence")

    history = []
    model = h
    for it in range(max_iters + 1):
        total = 0.0
        pi_acc = np.zeros(model.N)
        trans = np.zeros((model.N, model.N))
        emit = np.zeros((model.N, model.M))
        used = 0
        for obs in training:
            ll, g0, xi, em = expected_counts(model, obs)
            total += ll
            if g0 is None:
                continue
            used += 1
            pi_acc += g0
            trans += xi
            emit += em
        history.append(total)
        if on_iteration is not None:
            on_iteration(it, model, total)
        if it == max_iters or used == 0:
            break
        if it > 0:
            prev = history[-2]
            if math.isfinite(prev) and (total - prev) < tol * max(abs(prev), 1e-300):
                break
        model = _m_step(model, pi_acc / used, trans, emit, floor_a, floor_b)
    return model, history


def _m_step(h, pi, trans, emit, floor_a, floor_b):
    A = h.A.copy()
    B = h.B.copy()
    occupied = emit.sum(axis=1) > 0
    if not occupied.all():
        warnings.warn(f"states {np.flatnonzero(~occupied).tolist()} received no expected "
                      "occupancy; their parameters are kept", DegenerateModel, stacklevel=3)
    leaving = trans.sum(axis=1) > 0
    if leaving.any():
        A[leaving] = _floored_rows(trans[leaving], h.topology_mask[leaving], floor_a)
    if occupied.any():
        B[occupied] = _floored_rows(emit[occupied], np.ones_like(emit[occupied], dtype=bool), floor_b)
    pi = np.where(h.pi > 0, pi, 0.0)
    return Hmm(pi / pi.sum(), A, B, h.topology_mask)
