"""Data-generating Markov chains and their analytic machinery.

Two families of chains are supported:

* a Gaussian autoregressive chain ``X_{t+1} = sqrt(1-eps^2) X_t + eps G_{t+1}``
  with ``G ~ N(0, I/d)``, whose stationary law is ``N(0, I/d)``;
* finite-state chains given by an explicit row-stochastic transition matrix
  over a list of state vectors, with an optional deterministic per-state
  output rule.

Besides single-step simulation the module computes stationary distributions,
stationary covariances, total-variation mixing times and the KL divergence
between the laws of stationary trajectories.  It also provides the standard
constructor chains used throughout the test-suite and the experiment harness
(two-state chain, clique walk, signed clique walk, two-point output-bias
chain).

Randomness is driven by counter-based Philox generators (``numpy.random``),
so sample paths are reproducible bit-for-bit for a fixed seed within one
release.  Normal variates use numpy's documented ziggurat sampler.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

__all__ = [
    "GaussianARSpec",
    "FiniteChainSpec",
    "GaussianStationaryLaw",
    "MixingReport",
    "step",
    "stationary",
    "stationary_covariance",
    "mixing_time",
    "total_variation_curve",
    "trajectory_kl",
    "make_mc3",
    "make_mc0",
    "make_mci",
    "make_agnostic_bias_chain",
    "make_iid_chain",
    "chain_to_json",
    "chain_from_json",
    "run_generators",
    "GaussianPathCursor",
    "FinitePathCursor",
    "make_cursor",
]

_ROW_SUM_TOL = 1e-12
_STATIONARY_TOL = 1e-12
_STATIONARY_CAP = 10**6


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GaussianARSpec:
    """Gaussian AR chain ``X_{t+1} = sqrt(1-eps^2) X_t + eps G_{t+1}``.

    ``G_t`` are iid ``N(0, I/d)`` vectors, so the stationary covariance is
    ``I/d`` and the condition number of the regression problem equals ``d``.
    """

    dim: int
    epsilon: float

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if not (0.0 < self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def decay(self) -> float:
        """Per-step correlation factor ``sqrt(1 - eps^2)``."""
        return math.sqrt(max(0.0, 1.0 - self.epsilon**2))


@dataclass(frozen=True)
class FiniteChainSpec:
    """Finite-state chain: state vectors, transition matrix, optional outputs.

    ``states`` has one row per state (each with norm at most 1), ``transition``
    is row-stochastic, and ``outputs`` is either ``None`` (the observation
    model supplies labels, e.g. regression with independent noise) or one
    deterministic output value per state.
    """

    states: np.ndarray
    transition: np.ndarray
    outputs: np.ndarray | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=float))
        P = np.asarray(self.transition, dtype=float)
        n = states.shape[0]
        if P.shape != (n, n):
            raise ValueError(f"transition must be {n}x{n}, got {P.shape}")
        if np.any(P < 0):
            raise ValueError("transition entries must be nonnegative")
        row_err = np.abs(P.sum(axis=1) - 1.0).max()
        if row_err > _ROW_SUM_TOL:
            raise ValueError(f"transition rows must sum to 1 (max error {row_err:.3e})")
        norms = np.linalg.norm(states, axis=1)
        if np.any(norms > 1.0 + 1e-12):
            raise ValueError("every state must have norm at most 1")
        if not _is_irreducible(P):
            raise ValueError("chain is not irreducible")
        outputs = self.outputs
        if outputs is not None:
            outputs = np.asarray(outputs, dtype=float)
            if outputs.shape != (n,):
                raise ValueError(f"outputs must have shape ({n},), got {outputs.shape}")
            object.__setattr__(self, "outputs", _frozen_array(outputs))
        object.__setattr__(self, "states", _frozen_array(states))
        object.__setattr__(self, "transition", _frozen_array(P))

    @property
    def num_states(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def state_index(self, state) -> int:
        """Index of ``state`` among the chain's state vectors."""
        state = np.asarray(state, dtype=float)
        if state.shape != (self.dim,):
            raise ValueError(f"state must have shape ({self.dim},), got {state.shape}")
        matches = np.where(np.all(np.isclose(self.states, state, atol=1e-12), axis=1))[0]
        if matches.size == 0:
            raise ValueError("state is not one of the chain's states")
        return int(matches[0])

    def __eq__(self, other):
        if not isinstance(other, FiniteChainSpec):
            return NotImplemented
        return (
            np.array_equal(self.states, other.states)
            and np.array_equal(self.transition, other.transition)
            and (
                (self.outputs is None and other.outputs is None)
                or (
                    self.outputs is not None
                    and other.outputs is not None
                    and np.array_equal(self.outputs, other.outputs)
                )
            )
        )

    def __hash__(self):
        return hash((self.states.tobytes(), self.transition.tobytes()))


# A chain spec is either variant; operations dispatch on the type.
ChainSpec = GaussianARSpec | FiniteChainSpec


def _is_irreducible(P: np.ndarray) -> bool:
    """Reachability check on the support graph of ``P``."""
    n = P.shape[0]
    adj = P > 0
    reach = np.eye(n, dtype=bool)
    frontier = reach.copy()
    while frontier.any():
        nxt = (frontier @ adj) & ~reach
        reach |= nxt
        frontier = nxt
    return bool(reach.all())


@dataclass(frozen=True)
class GaussianStationaryLaw:
    """Descriptor of the ``N(0, I/d)`` stationary law of the Gaussian AR chain."""

    dim: int

    @property
    def mean(self) -> np.ndarray:
        return np.zeros(self.dim)

    @property
    def covariance(self) -> np.ndarray:
        return np.eye(self.dim) / self.dim


@dataclass(frozen=True)
class MixingReport:
    """Mixing time plus the total-variation curve used to certify it."""

    tau_mix: int
    dmix_curve: tuple
    method: str  # "numeric-finite" | "gaussian-ar-proxy"


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------


def step(spec: ChainSpec, state, rng: np.random.Generator):
    """Advance the chain one step from ``state`` using ``rng``.

    Gaussian case: returns ``sqrt(1-eps^2) * state + eps * g`` with
    ``g ~ N(0, I/d)``.  Finite case: samples the next state from the
    transition row of ``state``.
    """
    state = np.asarray(state, dtype=float)
    if isinstance(spec, GaussianARSpec):
        if state.shape != (spec.dim,):
            raise ValueError(f"state must have shape ({spec.dim},), got {state.shape}")
        g = rng.standard_normal(spec.dim) / math.sqrt(spec.dim)
        return spec.decay * state + spec.epsilon * g
    idx = spec.state_index(state)
    row = np.cumsum(spec.transition[idx])
    row = row / row[-1]
    nxt = int(np.searchsorted(row, rng.random(), side="right"))
    nxt = min(nxt, spec.num_states - 1)
    return spec.states[nxt].copy()


def stationary(spec: ChainSpec):
    """Stationary law: probability vector (finite) or ``N(0, I/d)`` descriptor.

    The finite case runs power iteration on the transposed transition matrix
    (tolerance 1e-12, capped at 1e6 iterations).
    """
    if isinstance(spec, GaussianARSpec):
        return GaussianStationaryLaw(spec.dim)
    P = spec.transition
    n = spec.num_states
    pi = np.full(n, 1.0 / n)
    for _ in range(_STATIONARY_CAP):
        nxt = pi @ P
        nxt /= nxt.sum()
        if np.abs(nxt - pi).max() <= _STATIONARY_TOL:
            return nxt
        pi = nxt
    raise RuntimeError(
        "power iteration did not converge within 1e6 iterations "
        "(is the chain periodic?)"
    )


def stationary_covariance(spec: ChainSpec) -> np.ndarray:
    """Second-moment matrix ``A = E_{X~pi}[X X^T]`` of the stationary law."""
    if isinstance(spec, GaussianARSpec):
        return np.eye(spec.dim) / spec.dim
    pi = stationary(spec)
    A = (spec.states * pi[:, None]).T @ spec.states
    return 0.5 * (A + A.T)  # symmetrize away roundoff


def total_variation_curve(spec: FiniteChainSpec, t_max: int) -> np.ndarray:
    """Worst-case TV distance to stationarity, ``d_mix(t)`` for t = 1..t_max."""
    if not isinstance(spec, FiniteChainSpec):
        raise TypeError("total_variation_curve requires a finite chain")
    pi = stationary(spec)
    M = spec.transition.copy()
    out = np.empty(t_max)
    for t in range(t_max):
        out[t] = 0.5 * np.abs(M - pi).sum(axis=1).max()
        if t + 1 < t_max:
            M = M @ spec.transition
    return out


def mixing_time(spec: ChainSpec, cap: int = 10**7) -> MixingReport:
    """Mixing time ``tau_mix = min{t : d_mix(t) <= 1/4}``.

    Finite chains are handled numerically by matrix powering.  For the
    Gaussian AR chain the total-variation curve has no convenient closed
    form, so we return the proxy ``ceil(ln(4 sqrt(d)) / -ln(1-eps^2))`` --
    the smallest t with ``(1-eps^2)^t <= 1/(4 sqrt(d))`` -- tagged with
    method "gaussian-ar-proxy".  The proxy matches the known
    ``Theta(log(d)/eps^2)`` rate.
    """
    if isinstance(spec, GaussianARSpec):
        if spec.epsilon >= 1.0:
            tau = 1
        else:
            rate = -math.log1p(-spec.epsilon**2)
            tau = max(1, math.ceil(math.log(4.0 * math.sqrt(spec.dim)) / rate))
        decay2 = 1.0 - spec.epsilon**2
        curve = []
        t = 1
        while t < tau:
            curve.append((t, min(1.0, math.sqrt(spec.dim) * decay2**t)))
            t *= 2
        curve.append((tau, min(1.0, math.sqrt(spec.dim) * decay2**tau)))
        return MixingReport(tau_mix=tau, dmix_curve=tuple(curve), method="gaussian-ar-proxy")

    pi = stationary(spec)
    M = spec.transition.copy()
    curve = []
    for t in range(1, cap + 1):
        d = 0.5 * np.abs(M - pi).sum(axis=1).max()
        curve.append((t, float(d)))
        if d <= 0.25:
            return MixingReport(tau_mix=t, dmix_curve=tuple(curve), method="numeric-finite")
        M = M @ spec.transition
    raise TimeoutError(f"d_mix(t) did not reach 1/4 within the cap of {cap} steps")


def trajectory_kl(specJ: FiniteChainSpec, specI: FiniteChainSpec, horizon: int) -> float:
    """KL divergence between the laws of length-``horizon`` stationary paths.

    Uses the chain-rule identity
    ``KL(pi_J || pi_I) + (T-1) * sum_a pi_J(a) KL(P_J(a,.) || P_I(a,.))``,
    valid for chains on a common state set differing in any number of rows.
    Returns ``inf`` when the path law of J is not absolutely continuous with
    respect to that of I.
    """
    if not isinstance(specJ, FiniteChainSpec) or not isinstance(specI, FiniteChainSpec):
        raise TypeError("trajectory_kl requires finite chains")
    if not np.array_equal(specJ.states, specI.states):
        raise ValueError("chains must share one state set")
    if int(horizon) != horizon or horizon < 1:
        raise ValueError(f"horizon must be a positive integer, got {horizon}")
    piJ = stationary(specJ)
    piI = stationary(specI)

    def _kl(p, q):
        mask = p > 0
        if np.any(q[mask] <= 0):
            return math.inf
        return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))

    total = _kl(piJ, piI)
    if horizon > 1:
        rows = sum(
            piJ[a] * _kl(specJ.transition[a], specI.transition[a])
            for a in range(specJ.num_states)
        )
        total += (horizon - 1) * rows
    return max(0.0, total) if math.isfinite(total) else math.inf


# ---------------------------------------------------------------------------
# Constructor chains
# ---------------------------------------------------------------------------


def make_mc3(kappa: float, delta: float) -> FiniteChainSpec:
    """Two-state chain with transition ``[[1-eps, eps], [delta, 1-delta]]``.

    ``eps = delta/(kappa-1)``, states ``e1, e2`` in R^2; the stationary mass
    of the first state is ``delta/(delta+eps) = 1 - 1/kappa``.
    """
    if kappa < 2:
        raise ValueError(f"kappa must be at least 2, got {kappa}")
    if not (0.0 < delta <= 0.5):
        raise ValueError(f"delta must lie in (0, 1/2], got {delta}")
    eps = delta / (kappa - 1.0)
    P = np.array([[1.0 - eps, eps], [delta, 1.0 - delta]])
    states = np.eye(2)
    return FiniteChainSpec(
        states, P, meta={"family": "mc3", "kappa": float(kappa), "delta": float(delta)}
    )


def make_mc0(d: int, epsilon: float) -> FiniteChainSpec:
    """Symmetric clique walk on ``e_1..e_d``: stay w.p. 1-eps, else jump uniformly."""
    if d < 2:
        raise ValueError(f"d must be at least 2, got {d}")
    if not (0.0 < epsilon <= 1.0):
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    P = np.full((d, d), epsilon / (d - 1.0))
    np.fill_diagonal(P, 1.0 - epsilon)
    return FiniteChainSpec(np.eye(d), P, meta={"family": "mc0", "epsilon": float(epsilon)})


def make_mci(d: int, epsilon: float, delta: float, bits: Sequence[int]) -> FiniteChainSpec:
    """Signed clique walk on ``{e_i} U {-e_i}`` keyed by a bit pattern.

    States are ``a_i = e_i`` for i < d and ``a_{d+i} = -e_i``.  Rows with
    ``bits[i] = 1`` leave ``e_i`` with total probability ``eps + delta``
    (spread uniformly over the 2d-1 other states); all other rows leave with
    probability ``eps``.  Every state outputs 1.
    """
    bits = np.asarray(bits, dtype=int)
    if bits.shape != (d,) or np.any((bits != 0) & (bits != 1)):
        raise ValueError(f"bits must be a 0/1 vector of length {d}")
    if epsilon <= 0 or delta < 0:
        raise ValueError("epsilon must be positive and delta nonnegative")
    if epsilon + delta > 1.0:
        raise ValueError(f"epsilon + delta must not exceed 1, got {epsilon + delta}")
    n = 2 * d
    eye = np.eye(d)
    states = np.vstack([eye, -eye])
    leave = np.where(np.concatenate([bits, np.zeros(d, dtype=int)]) == 1, epsilon + delta, epsilon)
    P = np.empty((n, n))
    for i in range(n):
        P[i] = leave[i] / (n - 1.0)
        P[i, i] = 1.0 - leave[i]
    return FiniteChainSpec(
        states,
        P,
        outputs=np.ones(n),
        meta={
            "family": "mci",
            "epsilon": float(epsilon),
            "delta": float(delta),
            "bits": [int(b) for b in bits],
        },
    )


def make_agnostic_bias_chain(epsilon: float) -> FiniteChainSpec:
    """Two-point chain in R^1 with states 1/2 and -1, both outputting 1/2.

    Each state is held with probability ``1 - eps``.  The stationary law is
    uniform and the population least-squares optimum is ``w* = -1/5``,
    exposed in ``meta["optimum"]``.
    """
    if not (0.0 < epsilon <= 0.5):
        raise ValueError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    states = np.array([[0.5], [-1.0]])
    P = np.array([[1.0 - epsilon, epsilon], [epsilon, 1.0 - epsilon]])
    return FiniteChainSpec(
        states,
        P,
        outputs=np.array([0.5, 0.5]),
        meta={"family": "agnostic_bias", "epsilon": float(epsilon), "optimum": -0.2},
    )


def make_iid_chain(spec: FiniteChainSpec) -> FiniteChainSpec:
    """Memoryless companion chain: every transition row equals ``stationary(spec)``.

    Sampling a path of this chain yields iid draws from the original chain's
    stationary law, which is the reference point for data-drop comparisons.
    """
    pi = stationary(spec)
    P = np.tile(pi, (spec.num_states, 1))
    meta = dict(spec.meta, iid_of=spec.meta.get("family", "finite"))
    return FiniteChainSpec(spec.states, P, outputs=spec.outputs, meta=meta)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def chain_to_json(spec: ChainSpec) -> dict:
    """Structured JSON document for a chain spec."""
    if isinstance(spec, GaussianARSpec):
        return {"kind": "gaussian_ar", "dim": spec.dim, "epsilon": spec.epsilon}
    doc = {
        "kind": "finite",
        "states": spec.states.tolist(),
        "transition": spec.transition.tolist(),
        "outputs": None if spec.outputs is None else spec.outputs.tolist(),
    }
    if spec.meta:
        doc["meta"] = json.loads(json.dumps(spec.meta))
    return doc


def chain_from_json(doc: dict) -> ChainSpec:
    """Inverse of :func:`chain_to_json`; also accepts constructor shorthands.

    Besides ``kind: "gaussian_ar" | "finite"``, the shorthand kinds
    ``"mc3" | "mc0" | "mci" | "agnostic_bias"`` expand through the
    corresponding constructor.
    """
    kind = doc.get("kind")
    if kind == "gaussian_ar":
        dim = doc.get("dim", doc.get("d"))
        if dim is None:
            raise ValueError("gaussian_ar chain needs a dimension field ('dim')")
        return GaussianARSpec(dim=int(dim), epsilon=float(doc["epsilon"]))
    if kind == "finite":
        return FiniteChainSpec(
            states=np.array(doc["states"], dtype=float),
            transition=np.array(doc["transition"], dtype=float),
            outputs=None if doc.get("outputs") is None else np.array(doc["outputs"], dtype=float),
            meta=dict(doc.get("meta", {})),
        )
    if kind == "mc3":
        return make_mc3(doc["kappa"], doc["delta"])
    if kind == "mc0":
        return make_mc0(int(doc["d"]), doc["epsilon"])
    if kind == "mci":
        return make_mci(int(doc["d"]), doc["epsilon"], doc["delta"], doc["bits"])
    if kind == "agnostic_bias":
        return make_agnostic_bias_chain(doc["epsilon"])
    raise ValueError(f"unknown chain kind {kind!r}")


# ---------------------------------------------------------------------------
# Sample-path cursors
# ---------------------------------------------------------------------------
#
# All simulation code -- the single-run reference runners and the batched
# multi-run engines -- draws sample paths through the cursors below, so the
# two code paths consume identical random streams and produce bitwise
# identical paths for equal seeds.
#
# Per-run randomness contract: a run with seed s owns four Philox child
# generators spawned from SeedSequence(s), in order
#   (chain path, observation noise, algorithm-internal draws, initial points).


def run_generators(seed) -> tuple[np.random.Generator, ...]:
    """The four per-run Philox generators (chain, noise, algorithm, init)."""
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
    elif isinstance(seed, np.random.Generator):
        raise TypeError("pass an integer seed or SeedSequence, not a Generator")
    else:
        ss = np.random.SeedSequence(int(seed))
    return tuple(np.random.Generator(np.random.Philox(child)) for child in ss.spawn(4))


class GaussianPathCursor:
    """Streams Gaussian AR paths for a batch of runs, one column per run.

    ``take(n)`` returns the next ``n`` states with shape ``(n, R, d)``.  The
    first state of the path is ``X_1 = G_1`` (a stationary start) unless an
    explicit ``start`` point is given.  The linear recursion runs through a
    first-order IIR filter, which evaluates ``X_t = c X_{t-1} + eps G_t``
    step for step, so a path is bit-identical however the ``take`` calls
    slice it.
    """

    def __init__(self, spec: GaussianARSpec, rngs: Sequence[np.random.Generator], start=None):
        self.spec = spec
        self._rngs = list(rngs)
        self._scale = 1.0 / math.sqrt(spec.dim)
        self._emit_start = start is not None
        if start is None:
            self._x = None  # first innovation becomes X_1
        else:
            start = np.asarray(start, dtype=float)
            if start.shape != (spec.dim,):
                raise ValueError(f"start must have shape ({spec.dim},)")
            self._x = np.tile(start, (len(self._rngs), 1))

    @property
    def num_runs(self) -> int:
        return len(self._rngs)

    def take(self, n: int, with_innovations: bool = False):
        """Next ``n`` states, shape (n, R, d); optionally also the innovations.

        The 1/sqrt(d) innovation scale is folded into the filter coefficient,
        so the raw normals are only rescaled when innovations are requested.
        """
        eps = self.spec.epsilon
        c = self.spec.decay
        G = np.stack([rng.standard_normal((n, self.spec.dim)) for rng in self._rngs], axis=1)
        X = np.empty_like(G)
        lo = 0
        if self._x is None:
            np.multiply(G[0], self._scale, out=X[0])
            lo = 1
        elif self._emit_start:
            # the explicit start is the path's first state; G[0] is drawn but
            # discarded, keeping the stream layout of the stationary case
            X[0] = self._x
            self._emit_start = False
            lo = 1
        x = X[0] if lo else self._x
        if lo < n:
            X[lo:], _ = lfilter([eps * self._scale], [1.0, -c], G[lo:], axis=0, zi=(c * x)[None])
        self._x = X[-1].copy()
        if with_innovations:
            G *= self._scale
            return X, G
        return X


class FinitePathCursor:
    """Streams finite-chain state indices for a batch of runs.

    ``take(n)`` returns the next ``n`` state indices with shape ``(n, R)``.
    Without an explicit start the first state is drawn from the stationary
    law, consuming one uniform; every subsequent state consumes one uniform
    per run.
    """

    def __init__(self, spec: FiniteChainSpec, rngs: Sequence[np.random.Generator], start=None):
        self.spec = spec
        self._rngs = list(rngs)
        cum = np.cumsum(spec.transition, axis=1)
        cum /= cum[:, -1:]
        cum[:, -1] = 1.0
        self._cum = cum
        if start is None:
            self._start_idx = None
        else:
            self._start_idx = int(
                start if isinstance(start, (int, np.integer)) else spec.state_index(start)
            )
        self._emitted_first = False
        self._state: np.ndarray | None = None
        cpi = np.cumsum(stationary(spec))
        cpi[-1] = 1.0
        self._cum_pi = cpi

    @property
    def num_runs(self) -> int:
        return len(self._rngs)

    def take(self, n: int) -> np.ndarray:
        """Next ``n`` state indices, shape (n, R); always n uniforms per run."""
        R = len(self._rngs)
        U = np.stack([rng.random(n) for rng in self._rngs], axis=1)
        out = np.empty((n, R), dtype=np.int64)
        lo = 0
        if not self._emitted_first:
            if self._start_idx is None:
                out[0] = np.searchsorted(self._cum_pi, U[0], side="right")
            else:
                out[0] = self._start_idx  # U[0] is discarded for layout parity
            self._emitted_first = True
            lo = 1
        state = out[0] if lo else self._state
        cum = self._cum
        S = cum.shape[0]
        # next state = #{j : u >= cum[state, j]}, i.e. inverse-CDF sampling;
        # buffered ufunc forms of the same expression keep the scan cheap
        if S == 2:
            thresh = np.ascontiguousarray(cum[:, 0])  # u >= thresh means "move up"
            fbuf = np.empty(R)
            for t in range(lo, n):
                thresh.take(state, out=fbuf, mode="clip")
                np.greater_equal(U[t], fbuf, out=out[t], casting="unsafe")
                state = out[t]
        else:
            gbuf = np.empty((R, S))
            bbuf = np.empty((R, S), dtype=bool)
            for t in range(lo, n):
                cum.take(state, axis=0, out=gbuf, mode="clip")
                np.greater_equal(U[t][:, None], gbuf, out=bbuf)
                np.add.reduce(bbuf, axis=1, out=out[t])
                state = out[t]
        self._state = out[-1].copy()
        return out


def make_cursor(spec: ChainSpec, rngs: Sequence[np.random.Generator], start=None):
    """Path cursor for either chain family."""
    if isinstance(spec, GaussianARSpec):
        return GaussianPathCursor(spec, rngs, start=start)
    return FinitePathCursor(spec, rngs, start=start)
