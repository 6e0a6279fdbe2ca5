"""Stochastic master equation with coherence-protection feedback.

A single qubit under relaxation, dephasing, and continuous weak
z-measurement, stepped by Euler-Maruyama on the dissipative and
innovation terms with the Hamiltonian handled by its exact 2x2
exponential (the feedback gain can be large, and the exact unitary keeps
the commutator part unconditionally stable). The two-qubit feedback law
steers both qubits with an equatorial Hamiltonian built from the
measurement record so that their planar coherence holds near its initial
value while the inter-qubit distance shrinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import I2, SIGMA_Z
from .dynamics import IntegratorConfig

SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)

#: warm-up window with feedback off, and the floor on the averaged
#: measurement record; both regularize the early-time 1/Y_z singularity.
WARM_UP_TIME = 0.01
RECORD_FLOOR = 1e-3


@dataclass(frozen=True)
class NoiseParams:
    """Rates of the weak-measurement master equation."""

    gamma_r: float = 10.0     # relaxation
    gamma_phi: float = 10.0   # dephasing
    gamma_z: float = 0.1      # measurement strength
    eta_z: float = 1.0        # detection efficiency

    def __post_init__(self):
        if min(self.gamma_r, self.gamma_phi, self.gamma_z) < 0.0:
            raise ValueError("rates must be nonnegative")
        if not 0.0 < self.eta_z <= 1.0:
            raise ValueError("detection efficiency must be in (0, 1]")

    @property
    def gamma_total(self) -> float:
        return self.gamma_r + self.gamma_phi + self.gamma_z


@dataclass
class MeasurementRecord:
    """Raw output increments dy and the running time-average Y_z."""

    times: list[float] = field(default_factory=list)
    dy: list[float] = field(default_factory=list)

    def append(self, t: float, increment: float) -> None:
        self.times.append(t)
        self.dy.append(increment)

    def running_average(self) -> float:
        if not self.times:
            return 0.0
        return float(sum(self.dy) / self.times[-1])


class FeedbackAxis(NamedTuple):
    axis: np.ndarray
    suspended: bool


def _dissipator(L: np.ndarray, rho: np.ndarray) -> np.ndarray:
    LdL = L.conj().T @ L
    return L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL)


def _innovation(L: np.ndarray, rho: np.ndarray) -> np.ndarray:
    Lr = L @ rho + rho @ L.conj().T
    return Lr - np.trace(Lr).real * rho


def _axis_matrix(axis) -> np.ndarray:
    ax, ay, az = np.asarray(axis, dtype=float).reshape(3)
    return np.array([[az, ax - 1j * ay], [ax + 1j * ay, -az]], dtype=complex)


def _expected_z(rho: np.ndarray) -> float:
    return float(np.trace(rho @ SIGMA_Z).real)


def lindblad_rhs(rho: np.ndarray, axis, p: NoiseParams) -> np.ndarray:
    """Deterministic part of the master equation (innovation dropped)."""
    h = _axis_matrix(axis)
    out = -1j * (h @ rho - rho @ h)
    out += 4.0 * p.gamma_r * _dissipator(SIGMA_MINUS, rho)
    out += (p.gamma_phi + p.gamma_z) * _dissipator(SIGMA_Z, rho)
    return out


def simulate_lindblad(rho0, axis, p: NoiseParams, cfg: IntegratorConfig) -> np.ndarray:
    """RK4 integration of the deterministic master equation; returns rho(t_max)."""
    rho = np.array(rho0, dtype=complex)
    ax = np.zeros(3) if axis is None else axis
    n_steps = int(round(cfg.t_max / cfg.dt))
    dt = cfg.dt
    for _ in range(n_steps):
        k1 = lindblad_rhs(rho, ax, p)
        k2 = lindblad_rhs(rho + 0.5 * dt * k1, ax, p)
        k3 = lindblad_rhs(rho + 0.5 * dt * k2, ax, p)
        k4 = lindblad_rhs(rho + dt * k3, ax, p)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho


def sme_step(
    rho, axis, p: NoiseParams, dW: float, dt: float
) -> tuple[np.ndarray, float | None]:
    """One stochastic step; returns the new state and the output increment dy.

    The caller draws dW as Normal(0, dt). With zero measurement strength
    there is no output line and dy is None. The state is symmetrized and
    trace-renormalized after the step; an eigenvalue below -1e-6 aborts
    with a step-size diagnostic.
    """
    rho = np.asarray(rho, dtype=complex).reshape(2, 2)
    z_before = _expected_z(rho)

    omega = float(np.linalg.norm(np.asarray(axis, dtype=float)))
    if omega > 0.0:
        phi = omega * dt
        nhat = _axis_matrix(np.asarray(axis, dtype=float) / omega)
        u = math.cos(phi) * I2 - 1j * math.sin(phi) * nhat
        rho = u @ rho @ u.conj().T

    drift = 4.0 * p.gamma_r * _dissipator(SIGMA_MINUS, rho)
    drift += (p.gamma_phi + p.gamma_z) * _dissipator(SIGMA_Z, rho)
    rho = rho + drift * dt
    if p.eta_z * p.gamma_z > 0.0:
        rho = rho + math.sqrt(p.eta_z * p.gamma_z) * _innovation(SIGMA_Z, rho) * dW

    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    # closed-form 2x2 eigenvalue bound, cheaper than eigvalsh in the hot loop
    tr = rho[0, 0].real + rho[1, 1].real
    det = (rho[0, 0].real * rho[1, 1].real - (rho[0, 1] * rho[1, 0]).real)
    lam_min = 0.5 * (tr - math.sqrt(max(0.0, tr * tr - 4.0 * det)))
    if lam_min < -1e-6:
        raise RuntimeError(
            "SME step drove an eigenvalue below -1e-6; reduce dt "
            f"(dt={dt}, rates total {p.gamma_total})"
        )

    dy = None
    if p.gamma_z > 0.0:
        dy = z_before * dt + dW / (2.0 * math.sqrt(p.eta_z * p.gamma_z))
    return rho, dy


def feedback_hamiltonian(
    rho_i, rho_j, c0_i: float, yz_i: float, p: NoiseParams
) -> FeedbackAxis:
    """Equatorial coherence-protection axis for qubit i.

    mu = Gamma * C_xy(rho_i(0)) / Y_z, rotated to the half-sum of the
    planar phases of both qubits (two-argument arctangent). Feedback is
    suspended (zero axis) when the averaged record is below the floor or
    either qubit sits at the planar origin.
    """
    rho_i = np.asarray(rho_i, dtype=complex)
    rho_j = np.asarray(rho_j, dtype=complex)
    xs_i = 2.0 * rho_i[1, 0].real
    ys_i = 2.0 * rho_i[1, 0].imag
    xs_j = 2.0 * rho_j[1, 0].real
    ys_j = 2.0 * rho_j[1, 0].imag

    if abs(yz_i) < RECORD_FLOOR:
        return FeedbackAxis(np.zeros(3), suspended=True)
    if math.hypot(xs_i, ys_i) < 1e-9 or math.hypot(xs_j, ys_j) < 1e-9:
        return FeedbackAxis(np.zeros(3), suspended=True)

    phi = 0.5 * math.atan2(-xs_i, ys_i) + 0.5 * math.atan2(-xs_j, ys_j)
    mu = p.gamma_total * c0_i / yz_i
    return FeedbackAxis(
        np.array([mu * math.cos(phi), mu * math.sin(phi), 0.0]), suspended=False
    )


@dataclass
class PairTrajectory:
    """Per-sample series of a protected-pair run."""

    sample_times: np.ndarray
    coherence: np.ndarray      # (S, 2)
    distance: np.ndarray       # (S,) Frobenius distance between the qubits
    target: np.ndarray         # (2,) initial coherence values held by feedback
    suspended_steps: int
    final_rhos: np.ndarray     # (2, 2, 2) end-of-run density matrices


def simulate_protected_pair(
    rho0_i,
    rho0_j,
    p: NoiseParams,
    cfg: IntegratorConfig,
    seed: int,
    feedback: bool = True,
) -> PairTrajectory:
    """Co-evolve two qubits under independent measurement noise.

    Each qubit owns an independent Wiener stream; the feedback axes are
    rebuilt every step from the running measurement averages. Feedback is
    off during the warm-up window. Deterministic under a fixed seed.
    """
    if feedback and p.gamma_z == 0.0:
        raise ValueError("feedback needs a measurement channel (gamma_z > 0)")
    rhos = [np.array(rho0_i, dtype=complex), np.array(rho0_j, dtype=complex)]
    c0 = [
        2.0 * abs(rhos[0][1, 0]),
        2.0 * abs(rhos[1][1, 0]),
    ]
    rng = np.random.default_rng(seed)
    n_steps = int(round(cfg.t_max / cfg.dt))
    sqrt_dt = math.sqrt(cfg.dt)

    y_sum = [0.0, 0.0]
    suspended_steps = 0
    times, cxy, dist = [], [], []

    def record(k: int):
        times.append(k * cfg.dt)
        cxy.append([2.0 * abs(rhos[0][1, 0]), 2.0 * abs(rhos[1][1, 0])])
        dist.append(float(np.linalg.norm(rhos[0] - rhos[1], "fro")))

    record(0)
    for k in range(1, n_steps + 1):
        t = (k - 1) * cfg.dt
        axes = [np.zeros(3), np.zeros(3)]
        if feedback and t >= WARM_UP_TIME:
            for q in (0, 1):
                yz = y_sum[q] / t if t > 0.0 else 0.0
                fb = feedback_hamiltonian(rhos[q], rhos[1 - q], c0[q], yz, p)
                axes[q] = fb.axis
                if fb.suspended:
                    suspended_steps += 1
        for q in (0, 1):
            dw = rng.normal(0.0, sqrt_dt)
            rhos[q], dy = sme_step(rhos[q], axes[q], p, dw, cfg.dt)
            if dy is not None:
                y_sum[q] += dy
        if k % cfg.sample_every == 0 or k == n_steps:
            record(k)

    return PairTrajectory(
        sample_times=np.array(times),
        coherence=np.array(cxy),
        distance=np.array(dist),
        target=np.array(c0),
        suspended_steps=suspended_steps,
        final_rhos=np.array(rhos),
    )
