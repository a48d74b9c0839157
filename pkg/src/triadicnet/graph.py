"""Exact stochastic simulation of the edge-reaction system on the full graph.

State is the symmetric adjacency matrix of a simple graph on ``n`` nodes.
Three reaction channels act on node pairs: spontaneous birth of a missing
edge (rate ``c1`` each), spontaneous death of an existing edge (rate ``c2``
each), and triadic closure of a missing edge at rate ``c3/(n-2)`` per common
neighbor of its endpoints.  Events are sampled exactly with the stochastic
simulation algorithm using class-level propensities: first the waiting time,
then the reaction class, then the pair within the class.

The expensive quantity is the triadic propensity, proportional to the total
open-wedge weight ``W = sum over missing edges (i,j) of |common neighbors of
i and j|``.  Both the common-neighbor matrix and ``W`` are maintained
incrementally in O(n) per edge flip; coherence against a full recomputation
is enforced by the test suite.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import StuckStateError
from .model import ModelParams
from .records import Observable, PathRecord, resolve_stride, time_grid
from .rng import DrawBuffer, as_generator, path_stream


class EventKind(enum.Enum):
    BIRTH = "birth"
    DEATH = "death"
    TRIADIC = "triadic"


_KINDS = (EventKind.DEATH, EventKind.BIRTH, EventKind.TRIADIC)


class Event(NamedTuple):
    kind: EventKind
    i: int
    j: int


@dataclass(frozen=True)
class ClassPropensities:
    """Aggregate reaction rates by class; ``total`` drives the waiting time."""

    birth: float
    death: float
    triadic: float
    total: float


# --------------------------------------------------------------------------
# initial conditions


@dataclass(frozen=True)
class ErdosRenyi:
    """Each pair gets an edge independently with probability ``p``."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"edge probability must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class ExactEdges:
    """Exactly ``m`` edges, placed uniformly at random."""

    m: int

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"edge count must be nonnegative, got {self.m}")


@dataclass(frozen=True)
class HalfEdges:
    """round(N/2) edges, placed uniformly at random."""


InitialCondition = ErdosRenyi | ExactEdges | HalfEdges


class GraphState:
    """Adjacency state plus the caches needed for O(n) reaction updates.

    Maintains, besides the 0/1 adjacency matrix: per-pair common-neighbor
    counts (the off-diagonal of the squared adjacency matrix), node degrees,
    the edge count, the total open-wedge weight, and a present/absent
    partition of the pair indices supporting O(1) uniform sampling.
    """

    __slots__ = (
        "n", "pair_count", "_A", "_cn", "_deg", "_m", "_W",
        "_pair_i", "_pair_j", "_present", "_absent", "_pos", "_side",
    )

    def __init__(self, adjacency: np.ndarray):
        A = np.asarray(adjacency)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        n = A.shape[0]
        if n < 3:
            raise ValueError(f"need at least 3 nodes, got {n}")
        if not np.array_equal(A, A.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(A) != 0):
            raise ValueError("adjacency must have a zero diagonal")
        if not np.all((A == 0) | (A == 1)):
            raise ValueError("adjacency entries must be 0 or 1")

        self.n = n
        self.pair_count = n * (n - 1) // 2
        self._A = A.astype(np.int64)
        self._cn = self._A @ self._A
        np.fill_diagonal(self._cn, 0)
        self._deg = self._A.sum(axis=1)
        iu, ju = np.triu_indices(n, k=1)
        self._pair_i = iu.astype(np.int64)
        self._pair_j = ju.astype(np.int64)
        upper = self._A[iu, ju]
        self._m = int(upper.sum())
        self._W = int((self._cn[iu, ju] * (1 - upper)).sum())
        self._side = upper.astype(bool)
        order = np.argsort(~self._side, kind="stable")  # present pairs first
        self._present = np.empty(self.pair_count, dtype=np.int64)
        self._absent = np.empty(self.pair_count, dtype=np.int64)
        self._pos = np.empty(self.pair_count, dtype=np.int64)
        self._present[: self._m] = order[: self._m]
        self._absent[: self.pair_count - self._m] = order[self._m:]
        self._pos[self._present[: self._m]] = np.arange(self._m)
        self._pos[self._absent[: self.pair_count - self._m]] = np.arange(self.pair_count - self._m)

    # -- constructors ------------------------------------------------------

    @classmethod
    def empty(cls, n: int) -> "GraphState":
        return cls(np.zeros((n, n), dtype=np.int64))

    @classmethod
    def complete(cls, n: int) -> "GraphState":
        A = np.ones((n, n), dtype=np.int64)
        np.fill_diagonal(A, 0)
        return cls(A)

    @classmethod
    def erdos_renyi(cls, n: int, p: float, seed) -> "GraphState":
        """Independent edge presence with probability ``p``; deterministic per seed."""
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"edge probability must lie in [0, 1], got {p}")
        gen = as_generator(seed)
        n_pairs = n * (n - 1) // 2
        mask = gen.random(n_pairs) < p
        return cls._from_pair_mask(n, mask)

    @classmethod
    def with_edge_count(cls, n: int, m: int, seed) -> "GraphState":
        """Exactly ``m`` edges placed uniformly at random."""
        n_pairs = n * (n - 1) // 2
        if not 0 <= m <= n_pairs:
            raise ValueError(f"edge count must lie in [0, {n_pairs}], got {m}")
        gen = as_generator(seed)
        chosen = gen.permutation(n_pairs)[:m]
        mask = np.zeros(n_pairs, dtype=bool)
        mask[chosen] = True
        return cls._from_pair_mask(n, mask)

    @classmethod
    def half_edges(cls, n: int, seed) -> "GraphState":
        """round(N/2) edges placed uniformly at random."""
        n_pairs = n * (n - 1) // 2
        return cls.with_edge_count(n, round(n_pairs / 2), seed)

    @classmethod
    def from_initial_condition(cls, n: int, initial: InitialCondition, seed) -> "GraphState":
        if isinstance(initial, ErdosRenyi):
            return cls.erdos_renyi(n, initial.p, seed)
        if isinstance(initial, ExactEdges):
            return cls.with_edge_count(n, initial.m, seed)
        if isinstance(initial, HalfEdges):
            return cls.half_edges(n, seed)
        raise TypeError(f"unknown initial condition {initial!r}")

    @classmethod
    def _from_pair_mask(cls, n: int, mask: np.ndarray) -> "GraphState":
        iu, ju = np.triu_indices(n, k=1)
        A = np.zeros((n, n), dtype=np.int64)
        A[iu[mask], ju[mask]] = 1
        A[ju[mask], iu[mask]] = 1
        return cls(A)

    # -- views -------------------------------------------------------------

    @property
    def adjacency(self) -> np.ndarray:
        """Copy of the 0/1 adjacency matrix."""
        return self._A.copy()

    @property
    def common_neighbors(self) -> np.ndarray:
        """Copy of the common-neighbor count matrix (zero diagonal)."""
        return self._cn.copy()

    @property
    def edge_count(self) -> int:
        return self._m

    @property
    def wedge_total(self) -> int:
        """Total open-wedge weight: closure opportunities over missing edges."""
        return self._W

    @property
    def density(self) -> float:
        return self._m / self.pair_count

    def present_mask(self) -> np.ndarray:
        """Boolean presence per pair index (upper triangle, row-major)."""
        return self._side.copy()

    def wedge_weight(self, i: int, j: int) -> int:
        """Number of closure opportunities for pair (i, j): the common-neighbor
        count if the edge is missing, else 0."""
        if i == j:
            raise ValueError("wedge weight needs two distinct nodes")
        if self._A[i, j]:
            return 0
        return int(self._cn[i, j])

    def edge_pairs(self) -> np.ndarray:
        """Present edges as a (m, 2) array of 1-indexed (i, j) with i < j,
        sorted lexicographically."""
        mask = self._side
        return np.column_stack((self._pair_i[mask] + 1, self._pair_j[mask] + 1))

    def edge_lines(self) -> list[str]:
        """Edge list in the text snapshot format: one ``"i j"`` per line."""
        return [f"{i} {j}" for i, j in self.edge_pairs()]

    def copy(self) -> "GraphState":
        new = object.__new__(GraphState)
        new.n = self.n
        new.pair_count = self.pair_count
        new._A = self._A.copy()
        new._cn = self._cn.copy()
        new._deg = self._deg.copy()
        new._m = self._m
        new._W = self._W
        new._pair_i = self._pair_i
        new._pair_j = self._pair_j
        new._present = self._present.copy()
        new._absent = self._absent.copy()
        new._pos = self._pos.copy()
        new._side = self._side.copy()
        return new

    def caches_consistent(self) -> bool:
        """Recompute every cache from the adjacency matrix and compare exactly."""
        cn = self._A @ self._A
        np.fill_diagonal(cn, 0)
        if not np.array_equal(cn, self._cn):
            return False
        if not np.array_equal(self._A.sum(axis=1), self._deg):
            return False
        upper = self._A[self._pair_i, self._pair_j]
        if int(upper.sum()) != self._m:
            return False
        if int((cn[self._pair_i, self._pair_j] * (1 - upper)).sum()) != self._W:
            return False
        if not np.array_equal(upper.astype(bool), self._side):
            return False
        n_abs = self.pair_count - self._m
        if set(self._present[: self._m]) != set(np.nonzero(self._side)[0]):
            return False
        if set(self._absent[:n_abs]) != set(np.nonzero(~self._side)[0]):
            return False
        return True

    # -- mutation ----------------------------------------------------------

    def _flip(self, e: int, add: bool) -> None:
        i = self._pair_i[e]
        j = self._pair_j[e]
        A = self._A
        cn = self._cn
        s = 1 if add else -1
        a_old = A[i, j]
        self._W += s * int(self._deg[i] + self._deg[j] - 3 * cn[i, j] - 2 * a_old)
        row_i = A[i]
        row_j = A[j]
        if add:
            cn[i] += row_j
            cn[:, i] += row_j
            cn[j] += row_i
            cn[:, j] += row_i
        else:
            cn[i] -= row_j
            cn[:, i] -= row_j
            cn[j] -= row_i
            cn[:, j] -= row_i
        cn[i, i] = 0
        cn[j, j] = 0
        A[i, j] = A[j, i] = 1 if add else 0
        self._deg[i] += s
        self._deg[j] += s
        pos = self._pos
        if add:
            n_abs_last = self.pair_count - self._m - 1
            k = pos[e]
            moved = self._absent[n_abs_last]
            self._absent[k] = moved
            pos[moved] = k
            self._present[self._m] = e
            pos[e] = self._m
            self._m += 1
            self._side[e] = True
        else:
            m_last = self._m - 1
            k = pos[e]
            moved = self._present[m_last]
            self._present[k] = moved
            pos[moved] = k
            self._absent[self.pair_count - self._m] = e
            pos[e] = self.pair_count - self._m
            self._m -= 1
            self._side[e] = False

    def _pick_open_wedge(self, draws: DrawBuffer) -> int:
        """Missing-edge pair index drawn with probability proportional to its
        common-neighbor count (single pass over absent pairs)."""
        n_abs = self.pair_count - self._m
        cand = self._absent[:n_abs]
        weights = self._cn[self._pair_i[cand], self._pair_j[cand]]
        cum = np.cumsum(weights)
        target = draws.unif() * self._W
        k = int(np.searchsorted(cum, target, side="right"))
        if k >= n_abs:  # guard against float round-off at the top end
            k = n_abs - 1
        return int(cand[k])


# --------------------------------------------------------------------------
# propensities and stepping


def wedge_weight(state: GraphState, i: int, j: int) -> int:
    """Module-level alias of :meth:`GraphState.wedge_weight`."""
    return state.wedge_weight(i, j)


def class_propensities(state: GraphState, params: ModelParams) -> ClassPropensities:
    """Aggregate rates: births over missing edges, deaths over edges, triadic
    closure over open wedges."""
    birth = params.c1 * (state.pair_count - state.edge_count)
    death = params.c2 * state.edge_count
    triadic = params.wedge_rate * state.wedge_total
    return ClassPropensities(birth=birth, death=death, triadic=triadic,
                             total=birth + death + triadic)


def _draw_event(state: GraphState, c1: float, c2: float, wedge_rate: float,
                draws: DrawBuffer) -> tuple[float, int, int]:
    """Sample (waiting time, class index, pair index) without mutating state.

    Class index: 0 = death, 1 = birth, 2 = triadic.
    """
    m = state._m
    n_abs = state.pair_count - m
    a_death = c2 * m
    a_birth = c1 * n_abs
    a_triadic = wedge_rate * state._W
    a_sum = a_death + a_birth + a_triadic
    if a_sum <= 0.0:
        raise StuckStateError(
            "total propensity is zero; no reaction can fire from this state"
        )
    dt = draws.exp() / a_sum
    u = draws.unif() * a_sum
    if u < a_death:
        k = int(draws.unif() * m)
        if k >= m:
            k = m - 1
        return dt, 0, int(state._present[k])
    if u < a_death + a_birth:
        k = int(draws.unif() * n_abs)
        if k >= n_abs:
            k = n_abs - 1
        return dt, 1, int(state._absent[k])
    return dt, 2, state._pick_open_wedge(draws)


def ssa_step(state: GraphState, params: ModelParams, draws: DrawBuffer) -> tuple[float, Event]:
    """Advance the state by one exact SSA event.

    Returns the waiting time and the event that fired; the state is updated
    in place (edge flipped, caches adjusted incrementally).
    """
    dt, cls, e = _draw_event(state, params.c1, params.c2, params.wedge_rate, draws)
    state._flip(e, add=cls != 0)
    return dt, Event(_KINDS[cls], int(state._pair_i[e]), int(state._pair_j[e]))


# --------------------------------------------------------------------------
# trajectories


def simulate_path(initial: GraphState, params: ModelParams, t_end: float, *,
                  record_every: int | None = None, record_dt: float | None = None,
                  seed=0, observable: Observable = Observable.DENSITY) -> PathRecord:
    """Run the SSA from a copy of ``initial`` until time ``t_end``.

    Recording is either every ``record_every`` events or on a fixed
    ``record_dt`` grid holding the piecewise-constant state (default: a
    1000-point grid).  The first record is at t = 0.  Identical seeds give
    bit-identical records.
    """
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    record_every, record_dt = resolve_stride(t_end, record_every, record_dt)
    state = initial.copy()
    draws = DrawBuffer(as_generator(seed))
    c1, c2, wr = params.c1, params.c2, params.wedge_rate
    scale = 1.0 / state.pair_count if observable is Observable.DENSITY else 1.0

    if record_dt is not None:
        grid = time_grid(t_end, record_dt)
        values = np.empty(len(grid))
        g = 0
        t = 0.0
        while g < len(grid):
            dt, cls, e = _draw_event(state, c1, c2, wr, draws)
            t_next = t + dt
            val = state._m * scale
            while g < len(grid) and grid[g] < t_next:
                values[g] = val
                g += 1
            if g == len(grid):
                break
            state._flip(e, add=cls != 0)
            t = t_next
        return PathRecord(times=grid, values=values, observable=observable)

    times = [0.0]
    values = [state._m * scale]
    t = 0.0
    count = 0
    while t < t_end:
        dt, cls, e = _draw_event(state, c1, c2, wr, draws)
        state._flip(e, add=cls != 0)
        t += dt
        count += 1
        if count % record_every == 0:
            times.append(t)
            values.append(state._m * scale)
    return PathRecord(times=np.array(times), values=np.array(values), observable=observable)


def occupancy_histogram(initial: GraphState, params: ModelParams, t_end: float,
                        seed=0) -> np.ndarray:
    """Time-weighted occupancy of each edge count over [0, t_end].

    Entry ``m`` is the total time the path spent with exactly ``m`` edges;
    the array sums to ``t_end``.
    """
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    state = initial.copy()
    draws = DrawBuffer(as_generator(seed))
    c1, c2, wr = params.c1, params.c2, params.wedge_rate
    weights = np.zeros(state.pair_count + 1)
    t = 0.0
    while True:
        dt, cls, e = _draw_event(state, c1, c2, wr, draws)
        remaining = t_end - t
        if dt >= remaining:
            weights[state._m] += remaining
            return weights
        weights[state._m] += dt
        state._flip(e, add=cls != 0)
        t += dt


def snapshots_at(initial: GraphState, params: ModelParams,
                 snapshot_times: Sequence[float], seed=0) -> list[tuple[float, GraphState]]:
    """States observed at the given times along one path (piecewise-constant
    convention: the state at time s is the one set by the last event <= s)."""
    ts = sorted(float(t) for t in snapshot_times)
    if not ts or ts[0] < 0:
        raise ValueError("snapshot times must be nonnegative and nonempty")
    state = initial.copy()
    draws = DrawBuffer(as_generator(seed))
    c1, c2, wr = params.c1, params.c2, params.wedge_rate
    out: list[tuple[float, GraphState]] = []
    g = 0
    t = 0.0
    while g < len(ts):
        dt, cls, e = _draw_event(state, c1, c2, wr, draws)
        t_next = t + dt
        while g < len(ts) and ts[g] < t_next:
            out.append((ts[g], state.copy()))
            g += 1
        if g == len(ts):
            break
        state._flip(e, add=cls != 0)
        t = t_next
    return out


# --------------------------------------------------------------------------
# ensemble edge-probability estimation


@dataclass
class EdgeProbabilities:
    """Monte Carlo estimates of per-pair edge presence probabilities.

    ``p_hat[g, e]`` estimates the probability that pair ``e`` (upper
    triangle, row-major; endpoints ``pair_i[e] < pair_j[e]``, 0-indexed) is
    an edge at ``times[g]``.  ``mean[g]`` averages over pairs.
    """

    times: np.ndarray
    p_hat: np.ndarray
    mean: np.ndarray
    pair_i: np.ndarray
    pair_j: np.ndarray
    n_paths: int


def _pij_counts(n: int, params: ModelParams, initial: InitialCondition,
                times: np.ndarray, seed: int, start: int, stop: int) -> np.ndarray:
    """Presence counts over paths [start, stop) on the shared time grid."""
    counts = np.zeros((len(times), n * (n - 1) // 2), dtype=np.int64)
    t_last = times[-1]
    for index in range(start, stop):
        gen = path_stream(seed, index)
        state = GraphState.from_initial_condition(n, initial, gen)
        draws = DrawBuffer(gen)
        c1, c2, wr = params.c1, params.c2, params.wedge_rate
        g = 0
        t = 0.0
        while g < len(times):
            dt, cls, e = _draw_event(state, c1, c2, wr, draws)
            t_next = t + dt
            while g < len(times) and times[g] < t_next:
                counts[g] += state._side
                g += 1
            if g == len(times) or t_next > t_last:
                break
            state._flip(e, add=cls != 0)
            t = t_next
    return counts


def estimate_edge_probabilities(n: int, params: ModelParams, initial: InitialCondition,
                                times, n_paths: int, seed: int = 0, *,
                                threads: int = 1) -> EdgeProbabilities:
    """Estimate every pair's presence probability on a time grid.

    Runs ``n_paths`` independent SSA paths (path k uses the stream derived
    from ``(seed, k)``, and samples its own initial graph) and reports, per
    grid time and pair, the fraction of paths in which that edge exists.
    The reduction sums integer counts, so results are identical for any
    ``threads`` value.
    """
    if n_paths < 1:
        raise ValueError(f"n_paths must be at least 1, got {n_paths}")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0 or np.any(np.diff(times) <= 0) or times[0] < 0:
        raise ValueError("times must be a nonempty strictly increasing grid of nonnegative reals")
    if threads > 1 and n_paths > 1:
        from concurrent.futures import ProcessPoolExecutor

        workers = min(threads, n_paths)
        bounds = np.linspace(0, n_paths, workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                _pij_counts_star,
                [(n, params, initial, times, seed, int(a), int(b))
                 for a, b in zip(bounds[:-1], bounds[1:])],
            )
            counts = sum(parts)
    else:
        counts = _pij_counts(n, params, initial, times, seed, 0, n_paths)
    p_hat = counts / n_paths
    iu, ju = np.triu_indices(n, k=1)
    return EdgeProbabilities(times=times, p_hat=p_hat, mean=p_hat.mean(axis=1),
                             pair_i=iu, pair_j=ju, n_paths=n_paths)


def _pij_counts_star(args) -> np.ndarray:
    return _pij_counts(*args)
