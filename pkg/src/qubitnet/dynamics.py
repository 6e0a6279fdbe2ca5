"""Time integration of qubit networks.

Per-qubit Schrodinger propagation under piecewise-constant
state-dependent Hamiltonians, the equivalent 2-sphere flow, full-network
QCME evolution, and meeting/stop detection.

The synchronous-update contract: at each step every Hamiltonian is
computed from the same state snapshot, then all qubits advance by the
closed-form 2x2 exponential, which is exactly unitary. The 2-sphere twin
integrator applies the identical per-step rotation on Bloch vectors, so
the two discretizations coincide to rounding (the SU(2)/SO(3)
equivalence holds step by step, not only in the continuum limit).
"""

from __future__ import annotations

import csv
import hashlib
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .metrics import quantum_average
from .protocols import chain_axes, geometry_axes, min_time_pair_hamiltonians
from .topology import Topology, is_chain, is_connected


@dataclass
class IntegratorConfig:
    dt: float = 1e-3
    t_max: float = 50.0
    sample_every: int = 1
    stop_threshold: float | None = None
    # metric the stop_threshold applies to in simulate_network
    stop_metric: str = "V"

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.t_max < self.dt:
            raise ValueError("t_max must be at least one step")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")


@dataclass
class NetworkState:
    """World-frame snapshot of all kets at one time."""

    kets: np.ndarray  # (N, 2) complex
    time: float


@dataclass
class Trajectory:
    """Sampled run: states, times, and named scalar metric series."""

    sample_times: np.ndarray
    samples: np.ndarray | None  # (S, N, 2) complex kets or (S, N, 3) Bloch
    metrics: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.sample_times) <= 0.0):
            raise ValueError("sample times must be strictly increasing")

    def bloch(self) -> np.ndarray:
        """Bloch vectors of every sample, shape (S, N, 3)."""
        if self.samples is None:
            raise ValueError("trajectory has no per-qubit samples")
        if np.iscomplexobj(self.samples):
            return _bloch_batch(self.samples)
        return self.samples

    def state_at(self, k: int) -> NetworkState:
        return NetworkState(kets=self.samples[k], time=float(self.sample_times[k]))

    def to_csv(self, path) -> None:
        """One row per sample: time, per-qubit Bloch components, metrics."""
        names = sorted(self.metrics)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            if self.samples is not None:
                u = self.bloch()
                n = u.shape[1]
                header = ["time"]
                for i in range(1, n + 1):  # CLI reports 1-based qubit indices
                    header += [f"q{i}_x", f"q{i}_y", f"q{i}_z"]
                writer.writerow(header + names)
                for k, t in enumerate(self.sample_times):
                    row = [repr(float(t))]
                    row += [repr(float(v)) for v in u[k].ravel()]
                    row += [repr(float(self.metrics[m][k])) for m in names]
                    writer.writerow(row)
            else:
                writer.writerow(["time"] + names)
                for k, t in enumerate(self.sample_times):
                    row = [repr(float(t))]
                    row += [repr(float(self.metrics[m][k])) for m in names]
                    writer.writerow(row)


def topology_hash(t: Topology) -> str:
    return hashlib.sha256(t.weights.tobytes()).hexdigest()


def write_manifest(path, config: dict) -> None:
    with open(path, "w") as fh:
        json.dump(config, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _bloch_batch(kets: np.ndarray) -> np.ndarray:
    a = kets[..., 0]
    b = kets[..., 1]
    ab = a.conj() * b
    return np.stack(
        [2.0 * ab.real, 2.0 * ab.imag, np.abs(a) ** 2 - np.abs(b) ** 2], axis=-1
    )


def step_ket(psi, axis, dt: float) -> np.ndarray:
    """Advance one ket by exp(-i dt (axis . sigma)), closed form."""
    psi = np.asarray(psi, dtype=complex).reshape(2)
    return _step_kets(psi[None, :], np.asarray(axis, float).reshape(1, 3), dt)[0]


def _step_kets(kets: np.ndarray, axes: np.ndarray, dt: float) -> np.ndarray:
    """Vectorized exp(-i dt n.sigma) on a batch of kets; exactly unitary."""
    omega = np.linalg.norm(axes, axis=1)
    phi = omega * dt
    safe = np.where(omega > 0.0, omega, 1.0)
    e = axes / safe[:, None]
    c = np.cos(phi)
    s = np.where(omega > 0.0, np.sin(phi), 0.0)
    a, b = kets[:, 0], kets[:, 1]
    ex, ey, ez = e[:, 0], e[:, 1], e[:, 2]
    na = ez * a + (ex - 1j * ey) * b
    nb = (ex + 1j * ey) * a - ez * b
    return np.stack([c * a - 1j * s * na, c * b - 1j * s * nb], axis=1)


def _rotate_vectors(x: np.ndarray, axes: np.ndarray, dt: float) -> np.ndarray:
    """Rodrigues rotation of each row of x about its axis by |axis| * dt."""
    omega = np.linalg.norm(axes, axis=1)
    phi = omega * dt
    safe = np.where(omega > 0.0, omega, 1.0)
    e = axes / safe[:, None]
    c = np.cos(phi)[:, None]
    s = np.where(omega > 0.0, np.sin(phi), 0.0)[:, None]
    dot = np.einsum("ij,ij->i", e, x)[:, None]
    return x * c + np.cross(e, x) * s + e * dot * (1.0 - c)


def _consecutive_v(kets: np.ndarray) -> float:
    """(N-1) - sum of Re<psi_i|psi_{i+1}> over consecutive indices."""
    overlaps = np.einsum("ij,ij->i", kets[:-1].conj(), kets[1:])
    return float(kets.shape[0] - 1 - overlaps.real.sum())


def _pairwise_error(u: np.ndarray) -> float:
    """Max pairwise |rho'_i - rho'_j|_F = max |u_i - u_j| / sqrt(2)."""
    d = u[:, None, :] - u[None, :, :]
    return float(np.linalg.norm(d, axis=-1).max() / np.sqrt(2.0))


def _max_pairwise_angle(u: np.ndarray) -> float:
    dots = np.clip(u @ u.T, -1.0, 1.0)
    return float(np.arccos(dots).max())


def in_open_hemisphere(u: np.ndarray) -> bool:
    """True iff some unit vector c has c . u_i > 0 for every row u_i.

    Solved as a small LP: maximize the margin t subject to u_i . c >= t
    with box-bounded c; a strictly positive optimum certifies the open
    hemisphere condition.
    """
    u = np.asarray(u, dtype=float)
    a_ub = np.hstack([-u, np.ones((u.shape[0], 1))])
    res = linprog(
        c=[0.0, 0.0, 0.0, -1.0],
        A_ub=a_ub,
        b_ub=np.zeros(u.shape[0]),
        bounds=[(-1, 1), (-1, 1), (-1, 1), (0, 2)],
        method="highs",
    )
    return bool(res.success and -res.fun > 1e-9)


PROTOCOLS = ("chain", "geometry", "min-time")


def simulate_network(
    kets0,
    t: Topology,
    protocol: str,
    cfg: IntegratorConfig,
    gain: float = 1.0,
    weight_fn=None,
) -> Trajectory:
    """Synchronous closed-loop run of a protocol over a qubit network.

    The geometry branch applies H = (gain/2) n . sigma so that with
    gain 1 the Bloch flow equals the projected-sum sphere flow exactly
    (factor-2 rotation-rate reconciliation); gain 2 reproduces the bare
    H = n . sigma protocol.
    """
    kets = np.array(kets0, dtype=complex).reshape(-1, 2)
    n = kets.shape[0]
    if n != t.n:
        raise ValueError(f"{n} kets for a {t.n}-node topology")
    if np.max(np.abs(np.linalg.norm(kets, axis=1) - 1.0)) > 1e-9:
        raise ValueError("initial kets must be normalized")
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}, expected one of {PROTOCOLS}")

    fixed_axes = None
    if protocol == "chain":
        if not is_chain(t):
            raise ValueError("chain protocol requires a chain topology")
    elif protocol == "geometry":
        if not is_connected(t):
            raise ValueError("geometry protocol requires a connected topology")
        if not in_open_hemisphere(_bloch_batch(kets)):
            warnings.warn(
                "initial Bloch vectors are not strictly inside an open hemisphere; "
                "convergence of the geometric protocol is not guaranteed",
                stacklevel=2,
            )
    else:  # min-time
        if n != 2:
            raise ValueError("min-time protocol is defined for exactly 2 qubits")
        u = _bloch_batch(kets)
        h_i, h_j = min_time_pair_hamiltonians(u[0], u[1])
        fixed_axes = gain * np.stack([h_i, h_j])

    n_steps = int(round(cfg.t_max / cfg.dt))
    times, snaps = [], []
    series: dict[str, list[float]] = {"V": [], "pure_state_error": []}
    if protocol == "chain":
        series["W_max"] = []

    def record(k: int):
        times.append(k * cfg.dt)
        snaps.append(kets.copy())
        series["V"].append(_consecutive_v(kets))
        series["pure_state_error"].append(_pairwise_error(_bloch_batch(kets)))
        if protocol == "chain":
            w = -np.sum(chain_axes(kets) ** 2, axis=1)
            series["W_max"].append(float(w.max()))

    record(0)
    for k in range(1, n_steps + 1):
        if protocol == "chain":
            axes = gain * chain_axes(kets)
        elif protocol == "geometry":
            axes = (0.5 * gain) * geometry_axes(_bloch_batch(kets), t, weight_fn)
        else:
            axes = fixed_axes
        kets = _step_kets(kets, axes, cfg.dt)
        if k % cfg.sample_every == 0 or k == n_steps:
            record(k)
            if (
                cfg.stop_threshold is not None
                and series[cfg.stop_metric][-1] < cfg.stop_threshold
            ):
                break

    return Trajectory(
        sample_times=np.array(times),
        samples=np.array(snaps),
        metrics={k: np.array(v) for k, v in series.items()},
    )


def simulate_sphere(
    x0,
    t: Topology,
    cfg: IntegratorConfig,
    gain: float = 1.0,
    weight_fn=None,
) -> Trajectory:
    """Classical twin of the quantum geometric protocol on the 2-sphere.

    Integrates dx_i/dt = (I - x_i x_i^T) sum_j w_ij x_j by rotating each
    vector about the frozen per-step axis x_i x (projected sum), the same
    discrete flow the quantum integrator induces on Bloch vectors. Steps
    stay on the sphere exactly (drift is rounding only).
    """
    x = np.array(x0, dtype=float).reshape(-1, 3)
    if x.shape[0] != t.n:
        raise ValueError(f"{x.shape[0]} vectors for a {t.n}-node topology")
    if np.max(np.abs(np.linalg.norm(x, axis=1) - 1.0)) > 1e-9:
        raise ValueError("initial vectors must be unit")

    n_steps = int(round(cfg.t_max / cfg.dt))
    times, snaps = [], []
    series: dict[str, list[float]] = {"max_angle": [], "pure_state_error": []}

    def record(k: int):
        times.append(k * cfg.dt)
        snaps.append(x.copy())
        series["max_angle"].append(_max_pairwise_angle(x))
        series["pure_state_error"].append(_pairwise_error(x))

    record(0)
    for k in range(1, n_steps + 1):
        axes = gain * geometry_axes(x, t, weight_fn)
        x = _rotate_vectors(x, axes, cfg.dt)
        x /= np.linalg.norm(x, axis=1)[:, None]
        if k % cfg.sample_every == 0 or k == n_steps:
            record(k)
            if (
                cfg.stop_threshold is not None
                and series["max_angle"][-1] < cfg.stop_threshold
            ):
                break

    return Trajectory(
        sample_times=np.array(times),
        samples=np.array(snaps),
        metrics={k: np.array(v) for k, v in series.items()},
    )


def simulate_qcme(rho0, t: Topology, cfg: IntegratorConfig) -> Trajectory:
    """Full-network QCME run recording the 2-norm distance to the quantum average.

    Classic RK4 on the swap-operator generator; positivity is monitored
    and a violation beyond 1e-6 aborts the run.
    """
    from .protocols import qcme_generator

    rho = np.array(rho0, dtype=complex)
    dim = 2**t.n
    if rho.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} density matrix for {t.n} qubits")
    if abs(np.trace(rho).real - 1.0) > 1e-9:
        raise ValueError("rho0 must have unit trace")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -1e-9:
        raise ValueError("rho0 must be positive semidefinite")

    gen = qcme_generator(t)
    rho_bar = quantum_average(rho) if t.n <= 6 else None
    if rho_bar is None:
        raise ValueError("QCME distance tracking requires at most 6 qubits")

    n_steps = int(round(cfg.t_max / cfg.dt))
    times, dists = [], []

    def distance() -> float:
        return float(np.linalg.norm(rho - rho_bar, 2))

    times.append(0.0)
    dists.append(distance())
    dt = cfg.dt
    for k in range(1, n_steps + 1):
        k1 = gen(rho)
        k2 = gen(rho + 0.5 * dt * k1)
        k3 = gen(rho + 0.5 * dt * k2)
        k4 = gen(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if k % cfg.sample_every == 0 or k == n_steps:
            if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -1e-6:
                raise RuntimeError("QCME state lost positivity; reduce the step size")
            times.append(k * dt)
            dists.append(distance())
            if cfg.stop_threshold is not None and dists[-1] < cfg.stop_threshold:
                break

    return Trajectory(
        sample_times=np.array(times),
        samples=None,
        metrics={"composite_distance": np.array(dists)},
    )


def meeting_time(traj: Trajectory, angle_tol: float) -> float | None:
    """Earliest time the max pairwise Bloch angle drops below angle_tol.

    Crossings between samples are linearly interpolated. When the angle
    dips through a minimum sharper than the sampling grid (the generic
    transversal meeting), the two secants around the minimum are
    intersected to resolve the vertex; the vertex must still clear the
    tolerance to count as a meeting.
    """
    u = traj.bloch()
    if u.shape[1] < 2:
        raise ValueError("need at least 2 qubits to detect a meeting")
    angles = np.array([_max_pairwise_angle(uk) for uk in u])
    ts = traj.sample_times

    below = np.nonzero(angles < angle_tol)[0]
    if below.size:
        k = below[0]
        if k == 0:
            return 0.0
        frac = (angles[k - 1] - angle_tol) / (angles[k - 1] - angles[k])
        return float(ts[k - 1] + frac * (ts[k] - ts[k - 1]))

    k = int(np.argmin(angles))
    if k < 2 or k > len(angles) - 3:
        return None
    # Secants strictly outside the minimum sample: the sample nearest the
    # vertex can sit on either leg of the dip, so it is excluded.
    m1 = (angles[k - 1] - angles[k - 2]) / (ts[k - 1] - ts[k - 2])
    m2 = (angles[k + 2] - angles[k + 1]) / (ts[k + 2] - ts[k + 1])
    if m1 >= 0.0 or m2 <= 0.0:
        return None
    t_star = (angles[k + 1] - angles[k - 1] + m1 * ts[k - 1] - m2 * ts[k + 1]) / (
        m1 - m2
    )
    vertex = angles[k - 1] + m1 * (t_star - ts[k - 1])
    if vertex < angle_tol:
        return float(t_star)
    return None
