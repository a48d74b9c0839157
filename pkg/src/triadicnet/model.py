"""Model parameters, the density drift, and its equilibrium analysis.

The network evolves by three reaction channels: spontaneous edge birth at rate
``c1`` per missing edge, spontaneous edge death at rate ``c2`` per edge, and
triadic closure at rate ``c3 / (n - 2)`` per open wedge (a missing edge whose
endpoints share a common neighbor).  At the level of the edge density
``p``, the net drift is

    drift(p) = (1 - p) * (c1 + c3 * p**2) - c2 * p,

a cubic whose roots in (0, 1) are the equilibrium densities.  Depending on
the rate constants there is either a single equilibrium (monostable) or three
(bistable: low and high stable densities separated by an unstable one).
Every other module builds on the quantities defined here.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRegimeError

#: Residual tolerance for polished roots, relative to the coefficient scale.
ROOT_RESIDUAL_REL = 1e-12

#: Two roots closer than this are treated as a repeated root (regime boundary).
DEGENERATE_TOL = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Rate constants and system size.

    Attributes
    ----------
    n:
        Number of nodes, at least 3 (the closure reaction needs three
        distinct nodes).
    c1:
        Spontaneous birth rate per missing edge, > 0.
    c2:
        Spontaneous death rate per edge, > 0.
    c3:
        Size-independent triadic closure constant, >= 0.  The per-wedge rate
        is ``c3 / (n - 2)``, which keeps closure comparable to the
        spontaneous channels as the network grows.
    """

    n: int
    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ValueError(f"n must be an integer, got {self.n!r}")
        if self.n < 3:
            raise ValueError(f"n must be at least 3, got {self.n}")
        if not self.c1 > 0:
            raise ValueError(f"c1 must be positive, got {self.c1}")
        if not self.c2 > 0:
            raise ValueError(f"c2 must be positive, got {self.c2}")
        if not self.c3 >= 0:
            raise ValueError(f"c3 must be nonnegative, got {self.c3}")

    @property
    def pair_count(self) -> int:
        """Number of node pairs n*(n-1)/2, i.e. the maximum edge count."""
        return self.n * (self.n - 1) // 2

    @property
    def wedge_rate(self) -> float:
        """Per-wedge triadic closure rate, c3 / (n - 2)."""
        return self.c3 / (self.n - 2)


class Regime(enum.Enum):
    MONOSTABLE = "monostable"
    BISTABLE = "bistable"


@dataclass(frozen=True)
class Equilibria:
    """Real roots of the drift cubic in (0, 1), sorted ascending.

    One root means a single globally attracting density (monostable); three
    roots mean two stable densities separated by an unstable one (bistable).
    """

    roots: tuple[float, ...]
    regime: Regime

    def __post_init__(self):
        if len(self.roots) not in (1, 3):
            raise ValueError(f"expected 1 or 3 roots, got {len(self.roots)}")
        expected = Regime.MONOSTABLE if len(self.roots) == 1 else Regime.BISTABLE
        if self.regime is not expected:
            raise ValueError(f"regime {self.regime} inconsistent with {len(self.roots)} roots")
        if any(not (0.0 < r < 1.0) for r in self.roots):
            raise ValueError(f"roots must lie strictly in (0, 1): {self.roots}")
        if any(a >= b for a, b in zip(self.roots, self.roots[1:])):
            raise ValueError(f"roots must be strictly increasing: {self.roots}")

    @property
    def low(self) -> float:
        """Lower stable density (bistable) or the unique density (monostable)."""
        return self.roots[0]

    @property
    def mid(self) -> float:
        """Unstable separating density; bistable regime only."""
        if self.regime is not Regime.BISTABLE:
            raise ValueError("mid equilibrium requires the bistable regime")
        return self.roots[1]

    @property
    def high(self) -> float:
        """Upper stable density (bistable) or the unique density (monostable)."""
        return self.roots[-1]


def drift(p, params: ModelParams):
    """Net growth rate of the edge density at density ``p``.

    Accepts scalars or numpy arrays.  ``drift(0) = c1 > 0`` and
    ``drift(1) = -c2 < 0``, so the flow always points into [0, 1].
    """
    return (1.0 - p) * (params.c1 + params.c3 * p * p) - params.c2 * p


def drift_derivative(p, params: ModelParams):
    """d(drift)/dp, used for Newton polishing and stability classification."""
    return -params.c1 - params.c2 + params.c3 * (2.0 * p - 3.0 * p * p)


def birth_death_balance(p, params: ModelParams):
    """Per-pair birth pressure divided by the death rate constant.

    Defined for 0 < p <= 1 as ``(1 - p) * (c1 + c3 * p**2) / c2``.  Its fixed
    points coincide with the zeros of :func:`drift`, and the stationary
    distribution of the edge-count chain climbs or falls at state ``j``
    according to whether this map evaluated at ``j/N`` is above or below
    ``j/N``.
    """
    return (1.0 - p) * (params.c1 + params.c3 * p * p) / params.c2


def _polish_root(r: float, params: ModelParams) -> float:
    """A few damped Newton iterations on the drift cubic."""
    x = r
    for _ in range(8):
        f = drift(x, params)
        if f == 0.0:
            break
        d = drift_derivative(x, params)
        if d == 0.0:
            break
        step = f / d
        # Damp if the full step would throw the iterate far outside [0, 1].
        while abs(step) > 0.5:
            step *= 0.5
        x -= step
        if abs(step) < 1e-16:
            break
    return x


def equilibrium_densities(params: ModelParams, *, allow_degenerate: bool = False) -> Equilibria:
    """Solve the drift cubic and classify the parameter regime.

    Roots are found from the companion matrix of the cubic and polished with
    damped Newton iterations, giving residuals below
    ``1e-12 * (c1 + c2 + c3)``.

    Raises
    ------
    DegenerateRegimeError
        If two roots coincide within ``DEGENERATE_TOL`` (the boundary between
        regimes).  With ``allow_degenerate=True`` the tangential (repeated)
        pair is dropped instead and the remaining crossing is reported as
        monostable.
    """
    c1, c2, c3 = params.c1, params.c2, params.c3
    scale = c1 + c2 + c3
    if c3 == 0.0:
        candidates = [c1 / (c1 + c2)]
    else:
        # drift(p) = -c3 p^3 + c3 p^2 - (c1 + c2) p + c1
        all_roots = np.roots([-c3, c3, -(c1 + c2), c1])
        # A nearly repeated real root can surface as a complex pair with a
        # tiny imaginary part; keep those as degeneracy candidates.
        candidates = [float(r.real) for r in all_roots if abs(r.imag) <= 1e-7 * max(1.0, abs(r))]
    roots = sorted(_polish_root(r, params) for r in candidates)

    deduped: list[list[float]] = []
    for r in roots:
        if deduped and r - deduped[-1][-1] < DEGENERATE_TOL:
            deduped[-1].append(r)
        else:
            deduped.append([r])
    if any(len(cluster) > 1 for cluster in deduped):
        if not allow_degenerate:
            raise DegenerateRegimeError(
                f"repeated drift root within {DEGENERATE_TOL:g} for "
                f"(c1, c2, c3) = ({c1}, {c2}, {c3}); parameters sit on the "
                "regime boundary (pass allow_degenerate=True to treat the "
                "tangential root as absent)"
            )
        # Even-multiplicity clusters are tangencies, not crossings: drop them.
        # A triple root is a crossing and collapses to one representative.
        kept = [cluster[0] for cluster in deduped if len(cluster) % 2 == 1]
        roots = kept
    if len(roots) == 2:
        # Two isolated real roots cannot happen for this cubic (drift has
        # opposite signs at 0 and 1); treat as a borderline repeated pair.
        raise DegenerateRegimeError(
            f"ambiguous root configuration {roots} for (c1, c2, c3) = ({c1}, {c2}, {c3})"
        )

    for r in roots:
        if not (0.0 < r < 1.0):
            raise DegenerateRegimeError(
                f"root {r} outside (0, 1); parameters ({c1}, {c2}, {c3}) are degenerate"
            )
        residual = abs(drift(r, params))
        if residual > ROOT_RESIDUAL_REL * scale:
            raise AssertionError(
                f"root polishing failed: |drift({r})| = {residual:g} exceeds "
                f"{ROOT_RESIDUAL_REL * scale:g}"
            )
    regime = Regime.MONOSTABLE if len(roots) == 1 else Regime.BISTABLE
    return Equilibria(roots=tuple(roots), regime=regime)


def exact_wedge_rate_identity(params: ModelParams) -> bool:
    """Check c3/(n-2) * (n-2) == c3 in exact rational arithmetic."""
    from fractions import Fraction

    k = params.n - 2
    return Fraction(params.c3) / k * k == Fraction(params.c3)
