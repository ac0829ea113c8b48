"""Stride-map analysis: periodic orbits, contraction estimates, sweeps.

The walker's steady gait is a fixed point of the *stride map* — the return
map taking one pre-impact state to the next.  The controller makes that map
contractive near the orbit, so plain iteration both finds the fixed point
and certifies its stability: the empirical contraction ratio
``rho_hat`` (median of successive distance ratios) below one is the
numerical stability certificate.  No Jacobian or eigenvalue analysis is
attempted; the certificate is deliberately the same evidence a batch of
simulations provides.

Distances between pre-impact states use the plain Euclidean norm over the
six mechanical coordinates — radians and radians per second with unit
weights.

:func:`run_sweep` runs independent perturbed copies of a base configuration
(plant perturbed, controller model held fixed) concurrently and merges
results by sample index, so the output order is deterministic.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import GaitAbortError, NoConvergenceError, WalkerError
from .params import SimConfig, SweepSpec
from .simulate import GaitSummary, run_gait, step

#: A gait's step times count as converged when the last five span less than
#: this range (s) — an order of magnitude looser than a settled orbit's
#: spread, an order tighter than step-to-step transient variation.
STEP_TIME_CONVERGENCE_RANGE = 5e-3

#: Distances below this are roundoff noise; ratios across them are dropped.
_DISTANCE_FLOOR = 1e-13


def contraction_ratio(distances) -> float:
    """Median of successive distance ratios; below one means contracting.

    NaN when fewer than two usable distances exist (nothing to certify).
    """
    d = np.asarray(distances, dtype=float)
    if len(d) < 2:
        return float("nan")
    num, den = d[1:], d[:-1]
    keep = den > _DISTANCE_FLOOR
    if not np.any(keep):
        return float("nan")
    return float(np.median(num[keep] / den[keep]))


def stride_map(x_pre, cfg: SimConfig, omega_I=None) -> np.ndarray:
    """One application of the return map: pre-impact state to the next.

    ``omega_I`` is the controller integrator entering the impact (zeros when
    omitted).  The mechanical return map is well defined only jointly with
    the integrator state; for fixed-point work use
    :func:`find_periodic_orbit`, which carries it.

    Raises:
        WalkerError subclasses when the step cannot complete.
    """
    omega_i = np.zeros(2) if omega_I is None else np.asarray(omega_I, dtype=float)
    _, _, x_next, _ = step(np.asarray(x_pre, dtype=float), omega_i, 0.0, cfg)
    return x_next


@dataclass(frozen=True)
class PeriodicOrbit:
    """A converged fixed point of the stride map.

    Attributes:
        x_star: pre-impact state of the periodic gait (6 values).
        omega_I_star: settled integrator state at the impact.
        step_time: swing duration of the periodic step (s).
        rho_hat: empirical contraction ratio of the approach (< 1 = stable).
        iterations: stride-map applications used.
        distances: successive pre-impact distances of the iteration.
    """

    x_star: np.ndarray
    omega_I_star: np.ndarray
    step_time: float
    rho_hat: float
    iterations: int
    distances: np.ndarray


def find_periodic_orbit(cfg: SimConfig, x_guess=None, tol: float = 1e-6,
                        max_iters: int = 200) -> PeriodicOrbit:
    """Iterate the stride map to a fixed point and certify contraction.

    Iteration carries the controller integrator across steps exactly as a
    long gait would, so the fixed point is the gait the closed loop actually
    settles into.  Success is ``|x_{k+1} - x_k| < tol``.

    Raises:
        NoConvergenceError: ``max_iters`` applications without convergence.
        GaitAbortError: a step failed during the iteration.
    """
    cfg.validate()
    x = np.asarray(cfg.initial_state if x_guess is None else x_guess, dtype=float)
    omega_i = np.zeros(2)
    distances: list[float] = []
    for k in range(max_iters):
        try:
            record, _, x_next, omega_i = step(x, omega_i, 0.0, cfg, step_index=k)
        except GaitAbortError:
            raise
        except WalkerError as exc:
            raise GaitAbortError(
                f"gait aborted at stride-map iterate {k}: "
                f"{type(exc).__name__}: {exc}") from exc
        distances.append(float(np.linalg.norm(x_next - x)))
        x = x_next
        if distances[-1] < tol:
            return PeriodicOrbit(
                x_star=x, omega_I_star=omega_i,
                step_time=float(record.step_time),
                rho_hat=contraction_ratio(distances),
                iterations=k + 1, distances=np.array(distances))
    raise NoConvergenceError(
        f"stride map not converged after {max_iters} iterations; "
        f"last distance {distances[-1]:.3e} (tol {tol:.3e})")


@dataclass(frozen=True)
class SweepSample:
    """Outcome of one sweep sample.

    ``converged`` means: every step completed, the contraction ratio is
    below one, and the last five step times span less than
    :data:`STEP_TIME_CONVERGENCE_RANGE`.
    """

    index: int
    axis: str
    value: float
    completed_steps: int
    aborted: bool
    abort_reason: str | None
    converged: bool
    step_time: float
    rho_hat: float
    worst_z_delta: float


def summarize_gait(summary: GaitSummary, index: int = 0, axis: str = "",
                   value: float = float("nan")) -> SweepSample:
    """Collapse a gait run into the sweep-table row for it."""
    times = summary.step_times
    rho = contraction_ratio(summary.convergence_distances())
    z = summary.z_deltas
    settled = bool(len(times) >= 5
                   and float(np.ptp(times[-5:])) < STEP_TIME_CONVERGENCE_RANGE)
    converged = bool(not summary.aborted
                     and summary.completed_steps == summary.config.n_steps
                     and np.isfinite(rho) and rho < 1.0 and settled)
    return SweepSample(
        index=index, axis=axis, value=value,
        completed_steps=summary.completed_steps,
        aborted=summary.aborted,
        abort_reason=summary.abort_reason,
        converged=converged,
        step_time=float(times[-1]) if len(times) else float("nan"),
        rho_hat=rho,
        worst_z_delta=float(np.max(z[1:])) if len(z) > 1 else float("nan"),
    )


def run_sweep(spec: SweepSpec, max_workers: int | None = None) -> list[SweepSample]:
    """Run every sweep sample and return rows in sample order.

    Samples are independent simulations executed on a thread pool; results
    are merged by index, so the table is deterministic regardless of
    scheduling.
    """
    spec.validate()
    values = spec.sample_values()

    def one(index: int) -> SweepSample:
        summary = run_gait(spec.sample_config(index))
        return summarize_gait(summary, index=index, axis=spec.axis,
                              value=values[index])

    if len(values) == 1:
        return [one(0)]
    workers = max_workers or min(len(values), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(len(values))))
