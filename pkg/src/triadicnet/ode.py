"""Deterministic density dynamics: the thermodynamic-limit ODE and the
unit-step Euler iteration it reduces to.

``dy/dt = drift(y)`` shares its right-hand side with the diffusion model, so
its fixed points are exactly the equilibrium densities.  The classic
fixed-step fourth-order Runge-Kutta scheme is plenty for a smooth scalar
field; every integration is re-run at half the step and the terminal values
compared as a built-in accuracy check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError
from .model import ModelParams, drift
from .records import Observable, PathRecord

#: Maximum allowed terminal discrepancy between a run and its half-step rerun.
STEP_HALVING_TOL = 1e-8


@dataclass
class OdeRun:
    """A fixed-step integration of the density ODE."""

    y0: float
    t_end: float
    step: float
    trace: PathRecord


def _rk4_terminal(params: ModelParams, y0: float, t_end: float, step: float) -> float:
    y = float(y0)
    t = 0.0
    while t < t_end - 1e-15:
        h = min(step, t_end - t)
        k1 = drift(y, params)
        k2 = drift(y + 0.5 * h * k1, params)
        k3 = drift(y + 0.5 * h * k2, params)
        k4 = drift(y + h * k3, params)
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
    return y


def integrate(params: ModelParams, y0: float, t_end: float, step: float) -> OdeRun:
    """RK4 trace of ``dy/dt = drift(y)`` from ``y0`` over [0, t_end].

    The recorded times are multiples of ``step`` (plus a shorter final step
    to land exactly on ``t_end``).  Raises :class:`AccuracyError` if the
    half-step rerun disagrees at ``t_end`` by more than ``STEP_HALVING_TOL``.
    """
    if not 0.0 <= y0 <= 1.0:
        raise ValueError(f"y0 must lie in [0, 1], got {y0}")
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    times = [0.0]
    values = [float(y0)]
    y = float(y0)
    t = 0.0
    while t < t_end - 1e-15:
        h = min(step, t_end - t)
        k1 = drift(y, params)
        k2 = drift(y + 0.5 * h * k1, params)
        k3 = drift(y + 0.5 * h * k2, params)
        k4 = drift(y + h * k3, params)
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        times.append(t)
        values.append(y)
    check = _rk4_terminal(params, y0, t_end, step / 2.0)
    if abs(check - y) > STEP_HALVING_TOL:
        raise AccuracyError(
            f"step-halving check failed: terminal values differ by {abs(check - y):g} "
            f"(> {STEP_HALVING_TOL:g}); reduce step={step}"
        )
    values_arr = np.array(values)
    # The field points inward at both ends; trim float-level excursions only.
    if values_arr.min() < -1e-12 or values_arr.max() > 1.0 + 1e-12:
        raise AccuracyError("ODE trace left [0, 1]; step too large for these rates")
    np.clip(values_arr, 0.0, 1.0, out=values_arr)
    return OdeRun(y0=y0, t_end=t_end, step=step,
                  trace=PathRecord(times=np.array(times), values=values_arr,
                                   observable=Observable.DENSITY))


@dataclass
class MeanFieldRun:
    """Unit-step Euler iterates of the density ODE.

    ``clamped`` reports whether any iterate left [0, 1] and was pulled back;
    comparisons against the stochastic models should treat such runs with
    suspicion.
    """

    values: np.ndarray
    clamped: bool


def mean_field_euler(params: ModelParams, y0: float, n_steps: int) -> MeanFieldRun:
    """Iterate ``y <- y + drift(y)`` (Euler with unit stepsize) ``n_steps`` times."""
    if not 0.0 <= y0 <= 1.0:
        raise ValueError(f"y0 must lie in [0, 1], got {y0}")
    if n_steps < 0:
        raise ValueError(f"n_steps must be nonnegative, got {n_steps}")
    values = np.empty(n_steps + 1)
    values[0] = y0
    y = float(y0)
    clamped = False
    for k in range(1, n_steps + 1):
        y = y + drift(y, params)
        if y < 0.0 or y > 1.0:
            clamped = True
            y = min(max(y, 0.0), 1.0)
        values[k] = y
    return MeanFieldRun(values=values, clamped=clamped)
