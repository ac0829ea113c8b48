"""Posture controller: feedback regularization plus a geometric PID.

The control law has two layers.

**Regularization** cancels the model's own velocity and gravity forces on
the output channel and re-inserts the covariant velocity term, so that in
closed loop the output error obeys a bare double integrator on the error
group::

    I_e @ (d(omega_e)/dt + Gamma_e @ omega_e) = tau_pid + disturbance

Any mismatch between the controller's model (``ControllerConfig.model``,
``incline_assumed``) and the true plant shows up only as the disturbance
term — which is exactly what the integral action is there to absorb.

**PID** acts on that regularized error system::

    tau_pid = -I_e @ (kp * eta + kd * omega_e + ki * omega_I)

where ``omega_I`` is an integral state transported by the error-space
connection (``d(omega_I)/dt = eta - Gamma_e @ omega_I``) so that the
integral remains geometrically consistent while the shape angles move.

Two conventions for the proportional error ``eta`` are supported
(``ControllerConfig.error_weighting``):

* ``"raw"`` (default): ``eta = (sin(q3 - q3_ref), sin(q1 + q2))``.  The
  proportional torque is then ``-kp * I_e @ eta``, giving both error
  channels the same slow closed-loop pole ``-kp/kd``.  This is the
  convention that produces the reference gait at the documented gains.
* ``"inertia"``: ``eta = I_e^{-1} @ (sin, sin)`` — the gradient of the
  navigation potential with respect to the error-space metric
  (:func:`error_potential_gradient`).  The proportional torque is then the
  bare sine vector, whose per-channel pole ``-kp/(kd * I_e)`` is an order
  of magnitude slower at the documented gains; kept for ablation studies.

Everything here reads only :class:`~triped.params.ControllerConfig` — the
controller can never see the true plant parameters or the true slope.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ActuationSingularityError
from .params import ControllerConfig, GaitTargets, RobotParams
from .reduced import (ReducedState, input_matrix_e, quadratic_bracket,
                      reduced_forces, reduced_inertias, to_reduced)

__all__ = [
    "ControllerState", "ControlAction", "error_sines",
    "error_potential_gradient", "connection_matrix_e", "pid_torque",
    "integrator_rate", "regularize", "allocate", "control_action",
    "zeta_distance", "static_stability", "max_static_incline",
]


@dataclass(frozen=True)
class ControllerState:
    """Controller configuration plus its only dynamic state, ``omega_I``."""

    config: ControllerConfig = field(default_factory=ControllerConfig)
    omega_I: np.ndarray = field(default_factory=lambda: np.zeros(2))


def error_sines(rs: ReducedState) -> np.ndarray:
    """Unweighted error vector ``(sin(q3 - q3_ref), sin(q1 + q2))``.

    Vanishes exactly on the zero-dynamics manifold and is the unique zero in
    the working range ``|q_e| < pi/2``.
    """
    return np.sin(rs.q_e)


def error_potential_gradient(rs: ReducedState, model: RobotParams) -> np.ndarray:
    """Metric gradient of the error potential: ``I_e^{-1} @ error_sines``."""
    i_e, _ = reduced_inertias(rs, model)
    return error_sines(rs) / np.diag(i_e)


def _error_vector(rs: ReducedState, cfg: ControllerConfig) -> np.ndarray:
    if cfg.error_weighting == "inertia":
        return error_potential_gradient(rs, cfg.model)
    return error_sines(rs)


def connection_matrix_e(rs: ReducedState, model: RobotParams) -> np.ndarray:
    """Error-space connection ``Gamma_e = I_e^{-1} @ quadratic_bracket`` (2x2).

    Linear in the shape rates; the unique connection compatible with the
    output inertia (``d(I_e)/dt - 2 I_e Gamma_e`` skew-symmetric).
    """
    i_e, _ = reduced_inertias(rs, model)
    return quadratic_bracket(rs, model) / np.diag(i_e)[:, None]


def pid_torque(rs: ReducedState, cs: ControllerState) -> np.ndarray:
    """Shaped PID torque ``-I_e @ (kp eta + kd omega_e + ki omega_I)``."""
    cfg = cs.config
    g = cfg.gains
    i_e, _ = reduced_inertias(rs, cfg.model)
    mix = g.kp * _error_vector(rs, cfg) + g.kd * rs.omega_e + g.ki * cs.omega_I
    return -(i_e @ mix)


def integrator_rate(rs: ReducedState, cs: ControllerState) -> np.ndarray:
    """Covariant integrator flow ``d(omega_I)/dt = eta - Gamma_e @ omega_I``.

    With ``eta == 0`` this is parallel transport: the ``I_e``-norm of
    ``omega_I`` is preserved along any shape motion.
    """
    gamma_e = connection_matrix_e(rs, cs.config.model)
    return _error_vector(rs, cs.config) - gamma_e @ cs.omega_I


def regularize(rs: ReducedState, model: RobotParams, incline_assumed: float,
               tau_tilde) -> np.ndarray:
    """Output-channel torque that reduces the error dynamics to the PID law.

    Returns ``tau_tilde + tau_e + tau_g_e - I_e Gamma_e omega_e`` evaluated
    from the controller's model and assumed slope.  Substituted into the
    output channel of the matched plant this leaves exactly
    ``I_e (d(omega_e)/dt + Gamma_e omega_e) = tau_tilde``; on a mismatched
    plant the leftover model error enters as an additive disturbance.
    """
    tau_e, _, tau_g_e, _ = reduced_forces(rs, model, incline_assumed)
    bracket = quadratic_bracket(rs, model)
    return np.asarray(tau_tilde, dtype=float) + tau_e + tau_g_e - bracket @ rs.omega_e


def allocate(tau_ue, rs: ReducedState, model: RobotParams,
             det_floor: float = 1e-6) -> np.ndarray:
    """Solve ``B_e @ u = tau_ue`` for the two hip torques.

    Raises:
        ActuationSingularityError: ``|det B_e|`` at or below ``det_floor``.
    """
    b_e, _ = input_matrix_e(rs, model)
    det = b_e[0, 0] * b_e[1, 1] - b_e[0, 1] * b_e[1, 0]
    if abs(det) <= det_floor:
        raise ActuationSingularityError(
            f"torque allocation singular: |det B_e| = {abs(det):.3e} "
            f"<= {det_floor:.3e}")
    return np.linalg.solve(b_e, np.asarray(tau_ue, dtype=float))


@dataclass(frozen=True)
class ControlAction:
    """One controller evaluation.

    Attributes:
        u: hip torques (stance-hip, swing-hip).
        omega_I_rate: time derivative of the covariant integrator state.
        eta: error vector the PID acted on (convention per config).
        tau_tilde: shaped PID torque on the output channel.
        tau_ue: total commanded output-channel torque after regularization.
        det_input: ``det B_e`` at this state (allocation health).
    """

    u: np.ndarray
    omega_I_rate: np.ndarray
    eta: np.ndarray
    tau_tilde: np.ndarray
    tau_ue: np.ndarray
    det_input: float


def control_action(q, dq, omega_I, cfg: ControllerConfig) -> ControlAction:
    """Full control law at one state: PID + regularization + allocation.

    Composition of :func:`pid_torque`, :func:`regularize` and
    :func:`allocate` with the shared intermediates (reduced state, inertias,
    bracket) computed once; this is the closed-loop simulator's hot path.

    Raises:
        ActuationSingularityError: propagated from the allocation.
    """
    omega_I = np.asarray(omega_I, dtype=float)
    rs = to_reduced(q, dq, cfg.targets)
    model = cfg.model
    i_e, _ = reduced_inertias(rs, model)
    i_e_diag = np.diag(i_e)
    bracket = quadratic_bracket(rs, model)

    eta = _error_vector(rs, cfg)
    g = cfg.gains
    tau_tilde = -i_e_diag * (g.kp * eta + g.kd * rs.omega_e + g.ki * omega_I)
    tau_e, _, tau_g_e, _ = reduced_forces(rs, model, cfg.incline_assumed)
    tau_ue = tau_tilde + tau_e + tau_g_e - bracket @ rs.omega_e

    b_e, _ = input_matrix_e(rs, model)
    det = b_e[0, 0] * b_e[1, 1] - b_e[0, 1] * b_e[1, 0]
    if abs(det) <= cfg.det_floor:
        raise ActuationSingularityError(
            f"torque allocation singular: |det B_e| = {abs(det):.3e} "
            f"<= {cfg.det_floor:.3e}")
    u = np.linalg.solve(b_e, tau_ue)
    omega_I_rate = eta - (bracket @ omega_I) / i_e_diag
    return ControlAction(u=u, omega_I_rate=omega_I_rate, eta=eta,
                         tau_tilde=tau_tilde, tau_ue=tau_ue,
                         det_input=float(det))


def zeta_distance(q, dq, model: RobotParams, targets: GaitTargets) -> float:
    """Distance to the zero-dynamics manifold, ``sqrt(|eta_e|^2 + |omega_e|^2)``.

    ``eta_e`` is the metric gradient (:func:`error_potential_gradient`),
    independent of the controller's error-weighting switch, so the measure is
    comparable across configurations.  The per-step recurrence diagnostic
    compares this at pre-impact states against the configured radius.
    """
    rs = to_reduced(q, dq, targets)
    eta = error_potential_gradient(rs, model)
    return float(np.hypot(np.linalg.norm(eta), np.linalg.norm(rs.omega_e)))


def static_stability(p: RobotParams, incline: float, q3_ref: float) -> float:
    """Margin of the standing-posture condition; nonnegative means satisfied.

    A motionless robot can hold its posture on the slope only if
    ``sin(q3_ref - incline)/sin(incline)`` is at least
    ``(M_T + M_H + m) r / (M_T l)``; the margin is the difference.  A level
    floor (``incline == 0``) imposes no condition: the margin is ``+inf``.
    """
    if incline == 0.0:
        return float("inf")
    demand = (p.torso_mass + p.hip_mass + p.leg_mass) * p.leg_length / (
        p.torso_mass * p.torso_length)
    return float(np.sin(q3_ref - incline) / np.sin(incline) - demand)


def max_static_incline(p: RobotParams) -> float:
    """Steepest slope with a statically stable posture (rad).

    ``arcsin(M_T l / ((M_T + M_H + m) r))``; ``pi/2`` when the torso is heavy
    and long enough that every slope admits an equilibrium.
    """
    ratio = p.torso_mass * p.torso_length / (
        (p.torso_mass + p.hip_mass + p.leg_mass) * p.leg_length)
    return float(np.arcsin(min(1.0, ratio)))
