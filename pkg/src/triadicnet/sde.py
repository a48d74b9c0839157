"""Diffusion approximation of the edge density, and its mean passage times.

The density ``y`` follows the Ito SDE ``dy = mu(y) dt + beta(y) dW`` where
``mu`` is the shared drift cubic and the three reaction channels contribute
independent noise terms whose squared amplitudes sum to

    sigma2(y) = (c1*(1-y) + c2*y + c3*(1-y)*y**2) / N.

Per Euler step the three Gaussian increments aggregate exactly into one
Gaussian of variance ``sigma2(y)*dt``, so the integrator draws a single
variate.  Paths are folded back into [0, 1] if a step exits (which for
realistic sizes essentially never happens); how often that triggered is
reported alongside the path.

Mean first passage times solve ``mu(y) T' + sigma2(y)/2 T'' = -1`` with one
absorbing and one reflecting end, discretized with central differences
(first-order upwinding of the drift term where the cell Peclet number
exceeds 2) and a second-order one-sided stencil for the reflecting end.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SingularSystemError
from .model import Equilibria, ModelParams, Regime, drift, equilibrium_densities
from .records import Observable, PathRecord
from .rng import as_generator

#: Switch the drift term to first-order upwinding above this cell Peclet number.
PECLET_LIMIT = 2.0


@dataclass(frozen=True)
class SdeSpec:
    """Drift and squared noise amplitude of the density diffusion."""

    params: ModelParams

    def drift(self, y):
        """Shared drift cubic; identical to the deterministic model's."""
        return drift(y, self.params)

    def diffusion_sq(self, y):
        """sigma^2(y): summed squared noise amplitudes of the three channels."""
        p = self.params
        return (p.c1 * (1.0 - y) + p.c2 * y + p.c3 * (1.0 - y) * y * y) / p.pair_count

    def noise_amplitudes(self, y):
        """Per-channel noise amplitudes (birth, death, closure).

        Kept for validation: the sum of squares equals ``diffusion_sq``.
        """
        p = self.params
        root_n = np.sqrt(p.pair_count)
        return (np.sqrt(p.c1 * (1.0 - y)) / root_n,
                -np.sqrt(p.c2 * y) / root_n,
                np.sqrt(p.c3 * (1.0 - y) * y * y) / root_n)

    def max_stable_dt(self) -> float:
        """Conservative explicit-step guard: dt must stay below this."""
        p = self.params
        return 1.0 / (p.c1 + p.c2 + p.c3)


@dataclass
class EmPath:
    """An Euler-Maruyama path plus how often boundary folding triggered."""

    record: PathRecord
    reflections: int


def _fold(y: float) -> tuple[float, int]:
    """Reflect into [0, 1] by folding; returns (value, number of folds)."""
    folds = 0
    while y < 0.0 or y > 1.0:
        y = -y if y < 0.0 else 2.0 - y
        folds += 1
    return y, folds


def em_path(spec: SdeSpec, y0: float, t_end: float, dt: float, seed=0, *,
            record_every: int = 1, zero_noise: bool = False,
            force_dt: bool = False) -> EmPath:
    """Euler-Maruyama path of the density diffusion.

    One Gaussian increment of variance ``sigma2(y) dt`` per step (exact
    aggregation of the three channel noises); fold-reflection keeps the path
    in [0, 1].  ``zero_noise=True`` integrates the drift alone, the
    infinite-size limit.  Steps at or above ``1/(c1+c2+c3)`` are rejected
    unless ``force_dt=True``.
    """
    if not 0.0 <= y0 <= 1.0:
        raise ValueError(f"y0 must lie in [0, 1], got {y0}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if dt >= spec.max_stable_dt() and not force_dt:
        raise ValueError(
            f"dt = {dt} is at or above the stability guard {spec.max_stable_dt():g} "
            "= 1/(c1+c2+c3); pass force_dt=True to override"
        )
    if record_every < 1:
        raise ValueError(f"record_every must be >= 1, got {record_every}")
    n_steps = int(np.ceil(t_end / dt - 1e-12))
    gen = as_generator(seed)
    noise = np.zeros(n_steps) if zero_noise else gen.standard_normal(n_steps)
    params = spec.params
    c1, c2, c3 = params.c1, params.c2, params.c3
    inv_n = 1.0 / params.pair_count
    y = float(y0)
    reflections = 0
    times = [0.0]
    values = [y]
    for k in range(n_steps):
        mu = (1.0 - y) * (c1 + c3 * y * y) - c2 * y
        sig2 = (c1 * (1.0 - y) + c2 * y + c3 * (1.0 - y) * y * y) * inv_n
        y = y + mu * dt + np.sqrt(sig2 * dt) * noise[k]
        y, folds = _fold(y)
        reflections += folds
        if (k + 1) % record_every == 0:
            times.append((k + 1) * dt)
            values.append(y)
    record = PathRecord(times=np.array(times), values=np.array(values),
                        observable=Observable.DENSITY)
    return EmPath(record=record, reflections=reflections)


def em_ensemble_mean(spec: SdeSpec, y0: float, t_end: float, dt: float,
                     n_paths: int, seed=0, *, record_every: int = 1) -> PathRecord:
    """Mean over ``n_paths`` Euler-Maruyama paths, advanced in lockstep."""
    if not dt > 0 or n_paths < 1:
        raise ValueError("dt must be positive and n_paths >= 1")
    if dt >= spec.max_stable_dt():
        raise ValueError(f"dt = {dt} violates the stability guard {spec.max_stable_dt():g}")
    n_steps = int(np.ceil(t_end / dt - 1e-12))
    gen = as_generator(seed)
    y = np.full(n_paths, float(y0))
    times = [0.0]
    values = [float(y.mean())]
    for k in range(n_steps):
        mu = spec.drift(y)
        sig2 = spec.diffusion_sq(y)
        y = y + mu * dt + np.sqrt(sig2 * dt) * gen.standard_normal(n_paths)
        np.abs(y, out=y)                       # fold at 0
        np.minimum(y, 2.0 - y, out=y)          # fold at 1
        if (k + 1) % record_every == 0:
            times.append((k + 1) * dt)
            values.append(float(y.mean()))
    return PathRecord(times=np.array(times), values=np.array(values),
                      observable=Observable.DENSITY)


def em_hitting_times(spec: SdeSpec, y0: float, absorb_at: float, dt: float,
                     n_paths: int, seed=0, *, max_time: float = 1e9) -> np.ndarray:
    """First times at which lockstep EM paths cross ``absorb_at``.

    Paths started below the threshold reflect at 0 and absorb on crossing
    upward; paths started above reflect at 1 and absorb on crossing
    downward.  Raises if any path is still alive at ``max_time``.
    """
    if y0 == absorb_at:
        return np.zeros(n_paths)
    upward = y0 < absorb_at
    gen = as_generator(seed)
    y = np.full(n_paths, float(y0))
    hit = np.full(n_paths, np.nan)
    alive = np.ones(n_paths, dtype=bool)
    t = 0.0
    while np.any(alive):
        if t >= max_time:
            raise RuntimeError(f"paths not absorbed after t = {max_time:g}")
        ya = y[alive]
        step = spec.drift(ya) * dt + np.sqrt(spec.diffusion_sq(ya) * dt) * gen.standard_normal(ya.size)
        ya = ya + step
        if upward:
            np.abs(ya, out=ya)
        else:
            np.minimum(ya, 2.0 - ya, out=ya)
        t += dt
        crossed = ya >= absorb_at if upward else ya <= absorb_at
        idx = np.nonzero(alive)[0]
        hit[idx[crossed]] = t
        y[idx] = ya
        alive[idx[crossed]] = False
    return hit


# --------------------------------------------------------------------------
# mean first passage time boundary value problem


class BoundaryKind(enum.Enum):
    #: reflecting at 0, absorbing at the right endpoint b
    REFLECT_LEFT_ABSORB_RIGHT = "reflect_left_absorb_right"
    #: absorbing at the left endpoint a, reflecting at 1
    ABSORB_LEFT_REFLECT_RIGHT = "absorb_left_reflect_right"


@dataclass(frozen=True)
class MfptProblem:
    """Interval, boundary configuration, and grid size for the MFPT solve."""

    interval: tuple[float, float]
    boundary_kind: BoundaryKind
    grid_points: int

    def __post_init__(self):
        a, b = self.interval
        if not 0.0 <= a < b <= 1.0:
            raise ValueError(f"need 0 <= a < b <= 1, got ({a}, {b})")
        if self.boundary_kind is BoundaryKind.REFLECT_LEFT_ABSORB_RIGHT and a != 0.0:
            raise ValueError("reflecting-left problems run on [0, b]; set a = 0")
        if self.boundary_kind is BoundaryKind.ABSORB_LEFT_REFLECT_RIGHT and b != 1.0:
            raise ValueError("reflecting-right problems run on [a, 1]; set b = 1")
        if self.grid_points < 3:
            raise ValueError(f"grid_points must be at least 3, got {self.grid_points}")


@dataclass
class MfptSolution:
    """Mean passage time on a uniform grid, linearly interpolable."""

    x: np.ndarray
    values: np.ndarray

    def __call__(self, q):
        return np.interp(q, self.x, self.values)


def solve_mfpt_operator(mu_fn, sigma_sq_fn, interval: tuple[float, float],
                        boundary_kind: BoundaryKind, grid_points: int) -> MfptSolution:
    """Finite-difference solve of ``mu T' + sigma^2/2 T'' = -1``.

    Central second differences throughout; the drift term switches to
    first-order upwinding wherever ``|mu| h / (sigma^2 / 2) > PECLET_LIMIT``,
    which keeps the scheme robust when the noise is tiny.  The reflecting
    end uses the second-order one-sided stencil, the absorbing end is an
    exact Dirichlet row.
    """
    a, b = interval
    M = grid_points
    x = np.linspace(a, b, M)
    h = (b - a) / (M - 1)
    adv = np.asarray(mu_fn(x), dtype=float)
    dif = 0.5 * np.asarray(sigma_sq_fn(x), dtype=float)
    if np.any(dif <= 0):
        raise SingularSystemError("sigma^2 must be positive on the whole interval")

    # Row i couples columns i-1, i, i+1; assemble as (lower, diag, upper).
    lower = np.zeros(M)
    diag = np.zeros(M)
    upper = np.zeros(M)
    rhs = np.full(M, -1.0)

    interior = np.arange(1, M - 1)
    d = dif[interior] / (h * h)
    v = adv[interior]
    use_upwind = np.abs(v) * h / dif[interior] > PECLET_LIMIT
    central = ~use_upwind
    up_pos = use_upwind & (v > 0)
    up_neg = use_upwind & (v <= 0)

    lo = np.where(central, d - v / (2 * h),
                  np.where(up_pos, d, d - v / h))
    di = np.where(central, -2 * d,
                  np.where(up_pos, -2 * d - v / h, -2 * d + v / h))
    hi = np.where(central, d + v / (2 * h),
                  np.where(up_neg, d, d + v / h))
    lower[interior] = lo
    diag[interior] = di
    upper[interior] = hi

    reflect_left = boundary_kind is BoundaryKind.REFLECT_LEFT_ABSORB_RIGHT
    extra_band = np.zeros(M)  # second superdiagonal (left reflect) or subdiagonal (right)
    if reflect_left:
        # (-3 T0 + 4 T1 - T2) / (2h) = 0
        diag[0] = -3.0 / (2 * h)
        upper[0] = 4.0 / (2 * h)
        extra_band[0] = -1.0 / (2 * h)
        diag[M - 1] = 1.0
        rhs[0] = 0.0
        rhs[M - 1] = 0.0
    else:
        diag[0] = 1.0
        # (3 T_{M-1} - 4 T_{M-2} + T_{M-3}) / (2h) = 0
        diag[M - 1] = 3.0 / (2 * h)
        lower[M - 1] = -4.0 / (2 * h)
        extra_band[M - 1] = 1.0 / (2 * h)
        rhs[0] = 0.0
        rhs[M - 1] = 0.0

    # scipy banded layout: ab[u + i - j, j] = A[i, j]
    ab = np.zeros((4, M))
    if reflect_left:
        ab[0, 2] = extra_band[0]     # A[0, 2], the one-sided stencil tail
        ab[1, 1:] = upper[:-1]
        ab[2, :] = diag
        ab[3, :-1] = lower[1:]
        bands = (1, 2)
    else:
        ab[0, 1:] = upper[:-1]
        ab[1, :] = diag
        ab[2, :-1] = lower[1:]
        ab[3, M - 3] = extra_band[M - 1]  # A[M-1, M-3]
        bands = (2, 1)
    try:
        values = scipy.linalg.solve_banded(bands, ab, rhs)
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystemError(f"MFPT discretization is singular: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise SingularSystemError("MFPT solve produced nonfinite values")
    if values.min() < -1e-8 * max(1.0, values.max()):
        raise SingularSystemError("MFPT solve produced materially negative times")
    return MfptSolution(x=x, values=np.maximum(values, 0.0))


def solve_mfpt(spec: SdeSpec, problem: MfptProblem) -> MfptSolution:
    """Mean time for the diffusion to reach the absorbing end of ``problem``."""
    return solve_mfpt_operator(spec.drift, spec.diffusion_sq, problem.interval,
                               problem.boundary_kind, problem.grid_points)


@dataclass(frozen=True)
class MfptCurve:
    """Diffusion analogue of the chain's transition-time table."""

    n_values: np.ndarray
    low_to_mid: np.ndarray
    high_to_mid: np.ndarray
    ratio: np.ndarray


def mfpt_curve(c1: float, c2: float, c3: float, n_values, *,
               grid_points: int = 4097, roots: Equilibria | None = None) -> MfptCurve:
    """Mean passage times from each stable density to the unstable one,
    for a family of system sizes."""
    n_values = np.asarray(sorted(int(v) for v in n_values), dtype=int)
    if roots is None:
        roots = equilibrium_densities(ModelParams(int(n_values[0]), c1, c2, c3))
    if roots.regime is not Regime.BISTABLE:
        raise ValueError("the MFPT curve needs the bistable regime (three drift roots)")
    low = np.empty(len(n_values))
    high = np.empty(len(n_values))
    for k, n in enumerate(n_values):
        spec = SdeSpec(ModelParams(int(n), c1, c2, c3))
        up = solve_mfpt(spec, MfptProblem((0.0, roots.mid),
                                          BoundaryKind.REFLECT_LEFT_ABSORB_RIGHT,
                                          grid_points))
        down = solve_mfpt(spec, MfptProblem((roots.mid, 1.0),
                                            BoundaryKind.ABSORB_LEFT_REFLECT_RIGHT,
                                            grid_points))
        low[k] = up(roots.low)
        high[k] = down(roots.high)
    return MfptCurve(n_values=n_values, low_to_mid=low, high_to_mid=high,
                     ratio=low / high)
