"""Edge-count birth-death chain: the scalar reduction of the graph model.

Dropping all topological detail and tracking only the edge count ``i`` in
``0..N`` (``N = n(n-1)/2`` pairs) gives a birth-death process.  Births occur
at rate

    lam_i = N * [ c1*(1 - i/N) + c3*(1 - i/N)*(i/N)*((i-1)/N) ]

(spontaneous births plus triadic closure under the assumption that edges are
spread uniformly at random), and deaths at rate ``mu_i = c2 * i``.  The chain
admits a closed-form stationary distribution via the product of rate ratios,
evaluated here in log space so any ``N`` is safe, and mean exit times via
tridiagonal linear solves on the generator.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import logsumexp

from .errors import ReducibleChainError, SingularSystemError
from .model import Equilibria, ModelParams, Regime, equilibrium_densities
from .records import Observable, PathRecord, resolve_stride, time_grid
from .rng import DrawBuffer, as_generator


@dataclass(frozen=True)
class BDChain:
    """Birth/death rate tables for states 0..N.

    ``lam[i]`` is the birth rate out of state i (``lam[N] = 0``) and
    ``mu[i]`` the death rate (``mu[0] = 0``).
    """

    params: ModelParams
    N: int
    lam: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        if len(self.lam) != self.N + 1 or len(self.mu) != self.N + 1:
            raise ValueError("rate tables must have length N + 1")


@dataclass
class Distribution:
    """A probability vector over states 0..N."""

    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.ndim != 1:
            raise ValueError("probs must be one-dimensional")
        if not np.all(np.isfinite(self.probs)) or np.any(self.probs < 0):
            raise ValueError("probs must be finite and nonnegative")
        if abs(self.probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"probs must sum to 1 within 1e-12, got {self.probs.sum()!r}")

    def __len__(self) -> int:
        return len(self.probs)


class Modality(enum.Enum):
    UNIMODAL = "unimodal"
    BIMODAL = "bimodal"
    OTHER = "other"


@dataclass(frozen=True)
class ModalityReport:
    """Locations of the local extrema of a distribution over 0..N."""

    local_maxima: tuple[int, ...]
    local_minima: tuple[int, ...]
    classification: Modality


def build_chain(params: ModelParams) -> BDChain:
    """Rate tables from the model parameters (exact formulas, no cutoffs)."""
    N = params.pair_count
    i = np.arange(N + 1, dtype=float)
    x = i / N
    lam = N * (params.c1 * (1.0 - x)
               + params.c3 * (1.0 - x) * x * ((i - 1.0) / N))
    lam[N] = 0.0
    mu = params.c2 * i
    return BDChain(params=params, N=N, lam=lam, mu=mu)


def stationary_distribution(chain: BDChain) -> Distribution:
    """Closed-form stationary distribution of the chain.

    State j carries weight ``prod_{i<j} lam_i / prod_{i<=j} mu_i`` relative
    to state 0; the cumulative sums of log rates are exponentiated after
    shifting by their maximum, so the computation cannot overflow even for
    N in the thousands.
    """
    N = chain.N
    if np.any(chain.lam[:N] <= 0) or np.any(chain.mu[1:] <= 0):
        raise ReducibleChainError(
            "a zero interior rate makes the chain reducible; the stationary "
            "product formula needs lam_i > 0 for i < N and mu_i > 0 for i >= 1"
        )
    log_ratio = np.log(chain.lam[:N]) - np.log(chain.mu[1:])
    log_pi = np.concatenate(([0.0], np.cumsum(log_ratio)))
    log_pi -= logsumexp(log_pi)
    probs = np.exp(log_pi)
    probs /= probs.sum()
    return Distribution(probs=probs)


def modality(dist: Distribution, chain: BDChain) -> ModalityReport:
    """Locate local maxima/minima of the probability sequence.

    Runs of up to 2 exactly equal adjacent values count as a single extremum
    reported at the lower index; a longer plateau forces the ``OTHER``
    classification.  Minima are only reported in the interior.
    """
    p = dist.probs
    # Compress into runs of equal values.
    change = np.nonzero(np.diff(p) != 0)[0]
    starts = np.concatenate(([0], change + 1))
    lengths = np.diff(np.concatenate((starts, [len(p)])))
    values = p[starts]

    maxima: list[int] = []
    minima: list[int] = []
    long_plateau = False
    for k in range(len(starts)):
        left = values[k - 1] if k > 0 else None
        right = values[k + 1] if k + 1 < len(starts) else None
        is_max = (left is None or left < values[k]) and (right is None or right < values[k])
        is_min = left is not None and right is not None and left > values[k] and right > values[k]
        if (is_max or is_min) and lengths[k] > 2:
            long_plateau = True
        if is_max:
            maxima.append(int(starts[k]))
        elif is_min:
            minima.append(int(starts[k]))

    if long_plateau:
        classification = Modality.OTHER
    elif len(maxima) == 1 and not minima:
        classification = Modality.UNIMODAL
    elif (len(maxima) == 2 and len(minima) == 1
          and maxima[0] < minima[0] < maxima[1]):
        classification = Modality.BIMODAL
    else:
        classification = Modality.OTHER
    return ModalityReport(local_maxima=tuple(maxima), local_minima=tuple(minima),
                          classification=classification)


# --------------------------------------------------------------------------
# path simulation


def simulate_macro_path(chain: BDChain, initial_state: int, t_end: float, *,
                        record_every: int | None = None, record_dt: float | None = None,
                        seed=0, observable: Observable = Observable.DENSITY) -> PathRecord:
    """SSA path of the chain started from ``initial_state``.

    The waiting time in state i is exponential with rate ``lam_i + mu_i``
    and the move is up with probability ``lam_i / (lam_i + mu_i)``.
    Recording follows the same stride conventions as the graph simulator.
    """
    if not 0 <= initial_state <= chain.N:
        raise ValueError(f"initial state must lie in [0, {chain.N}], got {initial_state}")
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    record_every, record_dt = resolve_stride(t_end, record_every, record_dt)
    lam = chain.lam.tolist()
    mu = chain.mu.tolist()
    draws = DrawBuffer(as_generator(seed))
    scale = 1.0 / chain.N if observable is Observable.DENSITY else 1.0
    i = int(initial_state)

    if record_dt is not None:
        grid = time_grid(t_end, record_dt)
        values = np.empty(len(grid))
        g = 0
        t = 0.0
        while g < len(grid):
            up = lam[i]
            down = mu[i]
            a = up + down
            t_next = t + draws.exp() / a
            val = i * scale
            while g < len(grid) and grid[g] < t_next:
                values[g] = val
                g += 1
            if g == len(grid):
                break
            i += 1 if draws.unif() * a < up else -1
            t = t_next
        return PathRecord(times=grid, values=values, observable=observable)

    times = [0.0]
    values = [i * scale]
    t = 0.0
    count = 0
    while t < t_end:
        up = lam[i]
        down = mu[i]
        a = up + down
        t += draws.exp() / a
        i += 1 if draws.unif() * a < up else -1
        count += 1
        if count % record_every == 0:
            times.append(t)
            values.append(i * scale)
    return PathRecord(times=np.array(times), values=np.array(values), observable=observable)


def occupancy_histogram(chain: BDChain, initial_state: int, t_end: float,
                        seed=0) -> np.ndarray:
    """Time spent in each state over [0, t_end] along one path."""
    if not 0 <= initial_state <= chain.N:
        raise ValueError(f"initial state must lie in [0, {chain.N}], got {initial_state}")
    lam = chain.lam.tolist()
    mu = chain.mu.tolist()
    draws = DrawBuffer(as_generator(seed))
    weights = np.zeros(chain.N + 1)
    i = int(initial_state)
    t = 0.0
    while True:
        up = lam[i]
        down = mu[i]
        a = up + down
        dt = draws.exp() / a
        remaining = t_end - t
        if dt >= remaining:
            weights[i] += remaining
            return weights
        weights[i] += dt
        t += dt
        i += 1 if draws.unif() * a < up else -1


def mc_hitting_times(chain: BDChain, start: int, target: int, n_paths: int,
                     seed=0) -> np.ndarray:
    """Monte Carlo sample of first hitting times of ``target`` from ``start``."""
    if start == target:
        return np.zeros(n_paths)
    lam = chain.lam.tolist()
    mu = chain.mu.tolist()
    draws = DrawBuffer(as_generator(seed))
    out = np.empty(n_paths)
    for k in range(n_paths):
        i = int(start)
        t = 0.0
        while i != target:
            up = lam[i]
            down = mu[i]
            a = up + down
            t += draws.exp() / a
            i += 1 if draws.unif() * a < up else -1
        out[k] = t
    return out


# --------------------------------------------------------------------------
# exit times


def mean_exit_times(chain: BDChain, target: int) -> np.ndarray:
    """Mean first time to reach ``target`` from every other state.

    Solves the generator's linear system with row and column ``target``
    removed against -1.  Removing that state splits the tridiagonal system
    into independent blocks below and above the target, each solved directly
    in O(N).  Entry ``target`` of the result is 0.
    """
    N = chain.N
    if not 0 <= target <= N:
        raise ValueError(f"target must lie in [0, {N}], got {target}")
    lam, mu = chain.lam, chain.mu
    tau = np.zeros(N + 1)

    def solve_block(states: np.ndarray) -> np.ndarray:
        # Couplings into the deleted target column vanish; the diagonals keep
        # their full -(lam + mu), which is what makes the block nonsingular.
        size = len(states)
        diag = -(lam[states] + mu[states])
        upper = np.zeros(size)
        lower = np.zeros(size)
        upper[1:] = lam[states[:-1]]     # banded layout: upper[k] couples row k-1 to k
        lower[:-1] = mu[states[1:]]
        ab = np.vstack((upper, diag, lower))
        rhs = -np.ones(size)
        try:
            return scipy.linalg.solve_banded((1, 1), ab, rhs)
        except scipy.linalg.LinAlgError as exc:  # pragma: no cover - irreducible chains
            raise SingularSystemError(f"exit-time system is singular: {exc}") from exc

    if target >= 1:
        below = np.arange(0, target)
        tau[below] = solve_block(below)
    if target <= N - 1:
        above = np.arange(target + 1, N + 1)
        tau[above] = solve_block(above)

    others = np.concatenate((tau[:target], tau[target + 1:]))
    if np.any(others <= 0) or not np.all(np.isfinite(others)):
        raise SingularSystemError("exit-time solve produced nonpositive or nonfinite times")
    return tau


@dataclass(frozen=True)
class TransitionTimeTable:
    """Mean times between the stationary modes as the system grows.

    For each node count: the mean time from the low-density peak state to
    the trough state, from the high-density peak state to the trough state,
    and their ratio.  Peak/trough states are ``floor(root * N)``.
    """

    n_values: np.ndarray
    low_to_mid: np.ndarray
    high_to_mid: np.ndarray
    ratio: np.ndarray


def transition_time_curve(c1: float, c2: float, c3: float, n_values,
                          roots: Equilibria | None = None) -> TransitionTimeTable:
    """Mean peak-to-trough switching times for a family of system sizes."""
    n_values = np.asarray(sorted(int(v) for v in n_values), dtype=int)
    if roots is None:
        roots = equilibrium_densities(ModelParams(int(n_values[0]), c1, c2, c3))
    if roots.regime is not Regime.BISTABLE:
        raise ValueError("transition times need the bistable regime (three drift roots)")
    low = np.empty(len(n_values))
    high = np.empty(len(n_values))
    for k, n in enumerate(n_values):
        params = ModelParams(int(n), c1, c2, c3)
        chain = build_chain(params)
        N = chain.N
        s_low = int(np.floor(roots.low * N))
        s_mid = int(np.floor(roots.mid * N))
        s_high = int(np.floor(roots.high * N))
        tau = mean_exit_times(chain, s_mid)
        low[k] = tau[s_low]
        high[k] = tau[s_high]
    return TransitionTimeTable(n_values=n_values, low_to_mid=low, high_to_mid=high,
                               ratio=low / high)
