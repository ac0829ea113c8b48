"""Instantaneous impact and leg-relabel reset between steps.

When the swing foot strikes the slope, the collision is modeled as a rigid,
perfectly plastic impulse: no rebound, no slip, and zero duration — positions
freeze while velocities jump.  The impulse problem is posed on the unpinned
chain (five coordinates: the three link angles plus the hip's Cartesian
position in the slope frame) with an impulsive reaction at the landing foot
that zeroes its velocity.  The former stance foot is assumed to lift off and
is released; both legs then swap roles so the next swing phase sees the same
pinned model.

In this formulation only the chain's mass matrix and the two contact
Jacobians matter: finite forces (gravity, torques, Coriolis) integrate to
zero over the instant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import inertia_matrix, mass_points
from .errors import DegenerateContactError, NonFiniteStateError
from .params import RobotParams

#: Leg-relabel matrix: swap stance and swing leg, torso unchanged.
RELABEL = np.array([[0.0, 1.0, 0.0],
                    [1.0, 0.0, 0.0],
                    [0.0, 0.0, 1.0]])

#: Condition floor for the 2x2 contact operator.
_CONTACT_DET_FLOOR = 1e-12


def free_mass_matrix(q, p: RobotParams) -> np.ndarray:
    """Mass matrix of the unpinned chain, coordinates ``(q1, q2, q3, hip)``.

    Leg masses sit half a leg below the hip along their respective legs, the
    hip mass at the hip, and the torso mass a torso-length out along the
    torso link.  The Cartesian block is ``total_mass * I`` as it must be for
    a rigid body's base coordinates.
    """
    q1, q2, q3 = q
    m, mt = p.leg_mass, p.torso_mass
    r, l = p.leg_length, p.torso_length
    d = np.zeros((5, 5))
    d[0, 0] = d[1, 1] = m * r * r / 4.0
    d[2, 2] = mt * l * l
    d[0, 3] = d[3, 0] = -m * r * np.cos(q1) / 2.0
    d[0, 4] = d[4, 0] = m * r * np.sin(q1) / 2.0
    d[1, 3] = d[3, 1] = -m * r * np.cos(q2) / 2.0
    d[1, 4] = d[4, 1] = m * r * np.sin(q2) / 2.0
    d[2, 3] = d[3, 2] = mt * l * np.cos(q3)
    d[2, 4] = d[4, 2] = -mt * l * np.sin(q3)
    d[3, 3] = d[4, 4] = p.total_mass
    return d


def hip_jacobian(q, p: RobotParams) -> np.ndarray:
    """Jacobian of the hip position w.r.t. the pinned coordinates (2x3)."""
    r = p.leg_length
    return np.array([[r * np.cos(q[0]), 0.0, 0.0],
                     [-r * np.sin(q[0]), 0.0, 0.0]])


def pinned_embedding(q, p: RobotParams) -> np.ndarray:
    """Velocity embedding from pinned to unpinned coordinates (5x3).

    Maps ``dq`` to ``(dq, hip velocity)`` for a chain whose stance foot is
    pinned at the origin.  Satisfies ``emb.T @ free_mass_matrix @ emb ==
    inertia_matrix`` exactly — the defining reduction identity.
    """
    return np.vstack([np.eye(3), hip_jacobian(q, p)])


def landing_foot_jacobian(q, p: RobotParams) -> np.ndarray:
    """Jacobian of the swing-foot position w.r.t. the unpinned coordinates (2x5)."""
    r = p.leg_length
    return np.array([[0.0, -r * np.cos(q[1]), 0.0, 1.0, 0.0],
                     [0.0, r * np.sin(q[1]), 0.0, 0.0, 1.0]])


def released_foot_jacobian(q, p: RobotParams) -> np.ndarray:
    """Jacobian of the (old) stance-foot position in unpinned coordinates (2x5)."""
    r = p.leg_length
    return np.array([[-r * np.cos(q[0]), 0.0, 0.0, 1.0, 0.0],
                     [r * np.sin(q[0]), 0.0, 0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class ImpactResult:
    """Outcome of one impact.

    Attributes:
        q_plus: post-impact configuration (relabeled: new stance leg first).
        dq_plus: post-impact joint rates (relabeled).
        impulse: contact impulse (N.s) at the landing foot, slope frame.
        contact_velocity: landing-foot velocity right after the impulse;
            zero up to roundoff by construction (definitional check).
        liftoff_velocity: released-foot velocity right after the impulse
            (pre-relabel labels); a positive normal (second) component means
            the old stance foot indeed leaves the ground.
        kinetic_energy_loss: energy dissipated by the impact (>= 0 for any
            physical collision).
    """

    q_plus: np.ndarray
    dq_plus: np.ndarray
    impulse: np.ndarray
    contact_velocity: np.ndarray
    liftoff_velocity: np.ndarray
    kinetic_energy_loss: float


def reset_map(q, dq, p: RobotParams) -> ImpactResult:
    """Apply the plastic impact and leg relabel to a pre-impact state.

    Raises:
        NonFiniteStateError: non-finite input state.
        DegenerateContactError: the contact operator is singular.
    """
    q = np.asarray(q, dtype=float)
    dq = np.asarray(dq, dtype=float)
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(dq))):
        raise NonFiniteStateError("non-finite state passed to reset_map")

    d = free_mass_matrix(q, p)
    e2 = landing_foot_jacobian(q, p)
    emb = pinned_embedding(q, p)
    v_ext = emb @ dq

    d_inv_e2t = np.linalg.solve(d, e2.T)
    contact_op = e2 @ d_inv_e2t
    if abs(np.linalg.det(contact_op)) <= _CONTACT_DET_FLOOR:
        raise DegenerateContactError(
            "contact operator is singular at the impact configuration")

    impulse = -np.linalg.solve(contact_op, e2 @ v_ext)
    v_ext_plus = v_ext + d_inv_e2t @ impulse

    q_plus = RELABEL @ q
    dq_plus = RELABEL @ v_ext_plus[:3]

    t_minus = 0.5 * v_ext @ d @ v_ext
    t_plus = 0.5 * v_ext_plus @ d @ v_ext_plus
    return ImpactResult(
        q_plus=q_plus,
        dq_plus=dq_plus,
        impulse=impulse,
        contact_velocity=e2 @ v_ext_plus,
        liftoff_velocity=released_foot_jacobian(q, p) @ v_ext_plus,
        kinetic_energy_loss=float(t_minus - t_plus),
    )


def chain_angular_momentum(q, joint_rates, hip_velocity, p: RobotParams,
                           point) -> float:
    """Angular momentum of the (possibly unpinned) chain about a point.

    Takes the joint rates and the hip's Cartesian velocity separately, so it
    applies equally to the pinned chain (hip velocity implied by ``dq1``) and
    to the post-impact chain whose released foot is already moving.
    """
    q = np.asarray(q, dtype=float)
    rates = np.asarray(joint_rates, dtype=float)
    hip_vel = np.asarray(hip_velocity, dtype=float)
    point = np.asarray(point, dtype=float)
    r, l = p.leg_length, p.torso_length

    def link_vel(theta, rate, length):
        return length * np.array([np.cos(theta), -np.sin(theta)]) * rate

    velocities = [
        hip_vel - link_vel(q[0], rates[0], 0.5 * r),
        hip_vel - link_vel(q[1], rates[1], 0.5 * r),
        hip_vel,
        hip_vel + link_vel(q[2], rates[2], l),
    ]
    total = 0.0
    for (mass, pos), vel in zip(mass_points(q, p), velocities):
        rel = pos - point
        total += mass * (rel[0] * vel[1] - rel[1] * vel[0])
    return float(total)


def angular_momentum_about(q, dq, p: RobotParams, point) -> float:
    """Angular momentum of the pinned chain about a slope-frame point.

    Used to certify the impact: the impulsive reaction acts at the landing
    foot, so angular momentum about that foot is conserved across the
    velocity jump (before relabeling).
    """
    dq = np.asarray(dq, dtype=float)
    return chain_angular_momentum(q, dq, hip_jacobian(q, p) @ dq, p, point)


def pinned_reduction_residual(q, p: RobotParams) -> float:
    """Max-abs difference between ``emb.T @ D @ emb`` and the pinned inertia.

    A pure certification helper: exactly zero in exact arithmetic.
    """
    emb = pinned_embedding(q, p)
    reduced = emb.T @ free_mass_matrix(q, p) @ emb
    return float(np.max(np.abs(reduced - inertia_matrix(q, p))))
