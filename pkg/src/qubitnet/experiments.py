"""Seeded experiment runners behind the CLI.

Every runner writes its artifacts plus a manifest.json holding the full
configuration, so a run can be reproduced byte-for-byte from the manifest
alone. Per-cell random streams are derived from the master seed and the
cell coordinates, which makes sweep results independent of execution
order.
"""

from __future__ import annotations

import csv
import json
import math
import os

import numpy as np

from .core import density_from_bloch, ket_from_angles, ket_from_bloch
from .decoherence import NoiseParams, simulate_lindblad, simulate_protected_pair
from .dynamics import (
    IntegratorConfig,
    Trajectory,
    simulate_network,
    simulate_qcme,
    simulate_sphere,
    write_manifest,
)
from .metrics import SettlingSpec, quantum_average, settling_time
from .topology import Topology, chain, complete, grid

QCME_CAP_ANGLE = 0.8  # cap radius (rad) for qcme-compare initial spreads


def sphere_points(rng: np.random.Generator, n: int) -> np.ndarray:
    """n points uniform on the unit sphere (normalized Gaussian draws)."""
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def hemisphere_points(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform on the open upper hemisphere by reflecting z < 0 samples."""
    v = sphere_points(rng, n)
    v[:, 2] = np.abs(v[:, 2])
    return v


def cap_points(rng: np.random.Generator, n: int, alpha: float) -> np.ndarray:
    """n unit vectors within angle alpha of a random center direction."""
    c = rng.normal(size=3)
    c /= np.linalg.norm(c)
    out: list[np.ndarray] = []
    while len(out) < n:
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        if math.acos(min(1.0, max(-1.0, float(v @ c)))) < alpha:
            out.append(v)
    return np.array(out)


def kets_from_points(points: np.ndarray) -> np.ndarray:
    return np.array([ket_from_bloch(u) for u in points])


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                        for v in row])


def run_min_time_heatmap(
    out_dir: str,
    resolution: int = 32,
    dt: float = 1e-3,
    v_threshold: float = 1e-5,
) -> dict:
    """Settling-versus-minimum-time gap on a polar/azimuthal grid.

    Both qubits start at the same polar angle theta in (0, pi/4) with an
    azimuthal offset dphi in (0, pi/2); the pair is run under the chain
    protocol until V drops below v_threshold. The first settling time is
    compared cell by cell against half the great-circle separation.
    Only the azimuthal difference matters (the protocol commutes with
    rotations about z), so the pair is centered in the allowed phi range.
    """
    if resolution < 8:
        raise ValueError("heatmap resolution must be at least 8")
    os.makedirs(out_dir, exist_ok=True)
    thetas = (np.arange(resolution) + 1.0) / (resolution + 1.0) * (math.pi / 4.0)
    dphis = (np.arange(resolution) + 1.0) / (resolution + 1.0) * (math.pi / 2.0)

    cfg = IntegratorConfig(dt=dt, t_max=20.0, stop_threshold=v_threshold)
    spec = SettlingSpec(threshold=v_threshold, metric="V")
    rows = []
    max_diff = 0.0
    for theta in thetas:
        for dphi in dphis:
            phi1 = 0.5 * (math.pi / 2.0 - dphi)
            k1 = ket_from_angles(theta, phi1)
            k2 = ket_from_angles(theta, phi1 + dphi)
            traj = simulate_network(np.array([k1, k2]), chain(2), "chain", cfg)
            t1 = settling_time(traj, spec)
            s1 = np.array([math.sin(theta) * math.cos(phi1),
                           math.sin(theta) * math.sin(phi1),
                           math.cos(theta)])
            s2 = np.array([math.sin(theta) * math.cos(phi1 + dphi),
                           math.sin(theta) * math.sin(phi1 + dphi),
                           math.cos(theta)])
            t_min = 0.5 * math.acos(min(1.0, max(-1.0, float(s1 @ s2))))
            if t1 is None:
                raise RuntimeError(
                    f"cell theta={theta:.4f} dphi={dphi:.4f} did not settle"
                )
            rows.append((theta, dphi, t1, t_min, t1 - t_min))
            max_diff = max(max_diff, t1 - t_min)

    path = os.path.join(out_dir, "min_time_heatmap.csv")
    _write_csv(path, ["theta", "dphi", "t1", "t_min", "diff"], rows)
    write_manifest(os.path.join(out_dir, "manifest.json"), {
        "experiment": "min-time-heatmap",
        "resolution": resolution,
        "dt": dt,
        "v_threshold": v_threshold,
    })
    return {"csv": path, "cells": len(rows), "max_diff": max_diff}


def run_network_experiment(
    kind: str,
    out_dir: str,
    seed: int = 0,
    dt: float = 1e-3,
    t_max: float = 50.0,
    topology: Topology | None = None,
) -> dict:
    """Single seeded consensus run with trajectory CSV and summary JSON.

    kind "chain-run": chain of 5 under the Lyapunov chain protocol from
    uniform-sphere initial states, settling metric V. kind "grid-run":
    3 x 3 grid under the geometric protocol (bare gain 2) from
    hemisphere initial states, settling metric pure_state_error (the
    geometric flow aligns Bloch vectors, not global phases, so V has a
    phase floor on non-chain graphs).
    """
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng([seed, 0])
    if kind == "chain-run":
        t = topology if topology is not None else chain(5)
        protocol, gain = "chain", 1.0
        points = sphere_points(rng, t.n)
        metric = "V"
    elif kind == "grid-run":
        t = topology if topology is not None else grid(3)
        protocol, gain = "geometry", 2.0
        points = hemisphere_points(rng, t.n)
        metric = "pure_state_error"
    else:
        raise ValueError(f"unknown network experiment kind {kind!r}")

    cfg = IntegratorConfig(dt=dt, t_max=t_max, sample_every=5,
                           stop_threshold=None)
    traj = simulate_network(kets_from_points(points), t, protocol, cfg, gain=gain)
    settle = settling_time(traj, SettlingSpec(threshold=1e-2, metric=metric))
    err_settle = settling_time(
        traj, SettlingSpec(threshold=1e-2, metric="pure_state_error")
    )

    csv_path = os.path.join(out_dir, f"{kind.replace('-', '_')}.csv")
    traj.to_csv(csv_path)
    summary = {
        "kind": kind,
        "seed": seed,
        "n_qubits": t.n,
        "settling_metric": metric,
        "settling_time": settle,
        "pure_state_error_settling_time": err_settle,
        "final_V": float(traj.metrics["V"][-1]),
        "final_pure_state_error": float(traj.metrics["pure_state_error"][-1]),
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    write_manifest(os.path.join(out_dir, "manifest.json"), {
        "experiment": kind, "seed": seed, "dt": dt, "t_max": t_max,
        "gain": gain, "protocol": protocol, "n_qubits": t.n,
    })
    return summary


def scaling_cell(kind: str, size: int, seed: int, master_seed: int,
                 dt: float = 5e-3) -> float | None:
    """Settling time of one (topology size, seed) sweep cell.

    The random stream depends only on the master seed and the cell
    coordinates, so cells can run in any order or in parallel.
    """
    if kind == "chain":
        n = size
        rng = np.random.default_rng([master_seed, 0, size, seed])
        t = chain(n)
        kets = kets_from_points(sphere_points(rng, n))
        cfg = IntegratorConfig(dt=dt, t_max=10.0 + 2.0 * n * n, sample_every=10,
                               stop_threshold=1e-2, stop_metric="V")
        traj = simulate_network(kets, t, "chain", cfg)
        return settling_time(traj, SettlingSpec(threshold=1e-2, metric="V"))
    if kind == "grid":
        n = size * size
        rng = np.random.default_rng([master_seed, 1, size, seed])
        t = grid(size)
        kets = kets_from_points(hemisphere_points(rng, n))
        cfg = IntegratorConfig(dt=dt, t_max=300.0, sample_every=10,
                               stop_threshold=1e-2,
                               stop_metric="pure_state_error")
        traj = simulate_network(kets, t, "geometry", cfg, gain=2.0)
        return settling_time(
            traj, SettlingSpec(threshold=1e-2, metric="pure_state_error")
        )
    raise ValueError(f"unknown scaling kind {kind!r}")


def run_scaling_sweep(
    out_dir: str,
    chain_sizes: tuple[int, ...] = (5, 10, 15, 20, 25, 30, 35, 40, 45, 50),
    grid_sides: tuple[int, ...] = (2, 3, 4, 5, 6, 7, 8, 9, 10),
    n_seeds: int = 5,
    master_seed: int = 0,
    dt: float = 5e-3,
) -> dict:
    """Median settling times versus network size for chains and grids."""
    if n_seeds < 3:
        raise ValueError("need at least 3 seeds per size for a median")
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    medians: dict[str, dict[int, float]] = {"chain": {}, "grid": {}}
    for kind, sizes in (("chain", chain_sizes), ("grid", grid_sides)):
        for size in sizes:
            vals = [scaling_cell(kind, size, s, master_seed, dt)
                    for s in range(n_seeds)]
            if any(v is None for v in vals):
                raise RuntimeError(f"{kind} size {size}: a seed did not settle")
            med = float(np.median(vals))
            n_qubits = size if kind == "chain" else size * size
            medians[kind][n_qubits] = med
            for s, v in enumerate(vals):
                rows.append((kind, size, n_qubits, s, v))

    path = os.path.join(out_dir, "scaling.csv")
    _write_csv(path, ["kind", "size", "n_qubits", "seed", "settling_time"], rows)
    with open(os.path.join(out_dir, "medians.json"), "w") as fh:
        json.dump(medians, fh, indent=2, sort_keys=True)
    write_manifest(os.path.join(out_dir, "manifest.json"), {
        "experiment": "scaling-sweep", "chain_sizes": list(chain_sizes),
        "grid_sides": list(grid_sides), "n_seeds": n_seeds,
        "master_seed": master_seed, "dt": dt,
    })
    return {"csv": path, "medians": medians}


def _product_state(points: np.ndarray) -> np.ndarray:
    rho = density_from_bloch(points[0])
    for u in points[1:]:
        rho = np.kron(rho, density_from_bloch(u))
    return rho


def symmetric_distance_series(traj: Trajectory) -> np.ndarray:
    """Per-sample 2-norm distance of the rebuilt product state to its own
    permutation symmetrization.

    For the swap-operator master equation the symmetrization is a
    conserved quantity, so this equals the distance to the fixed average
    state; for the Hamiltonian protocols it vanishes exactly at
    consensus, which puts all three baselines on the same scale.
    """
    u = traj.bloch()
    out = np.empty(u.shape[0])
    for s in range(u.shape[0]):
        rho = _product_state(u[s])
        out[s] = float(np.linalg.norm(rho - quantum_average(rho), 2))
    return out


def qcme_compare_cell(seed: int, master_seed: int, cap: float = QCME_CAP_ANGLE,
                      dt: float = 1e-3, t_max: float = 20.0) -> dict:
    """One seed of the three-way convergence-rate comparison at N = 3."""
    rng = np.random.default_rng([master_seed, 2, seed])
    points = cap_points(rng, 3, cap)
    kets = kets_from_points(points)
    rho0 = _product_state(points)
    t_line, t_tri = chain(3), complete(3)

    cfg = IntegratorConfig(dt=dt, t_max=t_max, sample_every=20)
    qcfg = IntegratorConfig(dt=dt, t_max=t_max, sample_every=20,
                            stop_threshold=1e-3)

    series: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    tr = simulate_network(kets, t_line, "chain", cfg)
    series["chain_eq"] = (tr.sample_times, symmetric_distance_series(tr))
    tr = simulate_network(kets, t_line, "geometry", cfg, gain=2.0)
    series["chain_geo"] = (tr.sample_times, symmetric_distance_series(tr))
    tr = simulate_qcme(rho0, t_line, qcfg)
    series["chain_qcme"] = (tr.sample_times, tr.metrics["composite_distance"])
    tr = simulate_network(kets, t_tri, "geometry", cfg, gain=2.0)
    series["full_geo"] = (tr.sample_times, symmetric_distance_series(tr))
    tr = simulate_qcme(rho0, t_tri, qcfg)
    series["full_qcme"] = (tr.sample_times, tr.metrics["composite_distance"])

    def settle(key: str) -> float:
        ts, ds = series[key]
        idx = np.nonzero(ds < 1e-2)[0]
        return float(ts[idx[0]]) if idx.size else math.inf

    return {
        "series": series,
        "settling": {k: settle(k) for k in series},
    }


def run_qcme_compare(
    out_dir: str,
    master_seed: int = 0,
    n_seeds: int = 10,
    cap: float = QCME_CAP_ANGLE,
    dt: float = 1e-3,
    t_max: float = 20.0,
) -> dict:
    """Convergence-rate comparison of the three protocols at N = 3.

    Writes the distance series of the first seed for both edge sets and
    a summary with per-seed settling times and their medians.
    """
    os.makedirs(out_dir, exist_ok=True)
    cells = [qcme_compare_cell(s, master_seed, cap, dt, t_max)
             for s in range(n_seeds)]

    first = cells[0]["series"]
    for name, keys in (("chain", ("chain_eq", "chain_geo", "chain_qcme")),
                       ("full", ("full_geo", "full_qcme"))):
        ts = first[keys[0]][0]
        cols = []
        for k in keys:
            tk, dk = first[k]
            # series may stop early; pad with the last value on the
            # common time grid of the longest series
            ts = ts if ts.size >= tk.size else tk
            cols.append((tk, dk))
        rows = []
        for i, t in enumerate(ts):
            row = [t]
            for tk, dk in cols:
                row.append(dk[min(i, dk.size - 1)])
            rows.append(row)
        _write_csv(os.path.join(out_dir, f"qcme_compare_{name}.csv"),
                   ["time"] + list(keys), rows)

    settling = {k: [c["settling"][k] for c in cells] for k in first}
    medians = {k: float(np.median(v)) for k, v in settling.items()}
    summary = {"settling": settling, "medians": medians,
               "n_seeds": n_seeds, "cap": cap}
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    write_manifest(os.path.join(out_dir, "manifest.json"), {
        "experiment": "qcme-compare", "master_seed": master_seed,
        "n_seeds": n_seeds, "cap": cap, "dt": dt, "t_max": t_max,
    })
    return summary


def _protected_pair_initial(rng: np.random.Generator) -> np.ndarray:
    """Two pure initial states with a safely nonzero planar component."""
    pts = []
    while len(pts) < 2:
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        if math.hypot(v[0], v[1]) > 0.3:
            pts.append(v)
    return np.array(pts)


def run_coherence_protect(
    out_dir: str,
    master_seed: int = 0,
    n_traj: int = 100,
    dt: float = 1e-4,
    t_max: float = 0.5,
    params: NoiseParams | None = None,
) -> dict:
    """Feedback-on versus feedback-off ensembles of the protected pair.

    Emits the per-sample ensemble mean and standard error of the planar
    coherence (averaged over the two qubits) and of the inter-qubit
    distance, for both arms, from the same initial pair.
    """
    os.makedirs(out_dir, exist_ok=True)
    p = params if params is not None else NoiseParams()
    rng = np.random.default_rng([master_seed, 3])
    pts = _protected_pair_initial(rng)
    rho_i = density_from_bloch(pts[0])
    rho_j = density_from_bloch(pts[1])
    cfg = IntegratorConfig(dt=dt, t_max=t_max, sample_every=50)

    arms: dict[str, dict[str, np.ndarray]] = {}
    finals: dict[str, np.ndarray] = {}
    times = None
    for arm, fb in (("fb", True), ("nofb", False)):
        cxy, dist, rho_ends = [], [], []
        for m in range(n_traj):
            seed = int(np.random.default_rng(
                [master_seed, 4, m, int(fb)]).integers(2**63))
            traj = simulate_protected_pair(rho_i, rho_j, p, cfg, seed,
                                           feedback=fb)
            cxy.append(traj.coherence.mean(axis=1))
            dist.append(traj.distance)
            rho_ends.append(traj.final_rhos)
            times = traj.sample_times
        cxy = np.array(cxy)
        dist = np.array(dist)
        arms[arm] = {
            "cxy_mean": cxy.mean(axis=0),
            "cxy_se": cxy.std(axis=0, ddof=1) / math.sqrt(n_traj),
            "dist_mean": dist.mean(axis=0),
            "dist_se": dist.std(axis=0, ddof=1) / math.sqrt(n_traj),
        }
        finals[arm] = np.array(rho_ends)

    rows = []
    for i, t in enumerate(times):
        rows.append([t,
                     arms["fb"]["cxy_mean"][i], arms["fb"]["cxy_se"][i],
                     arms["nofb"]["cxy_mean"][i], arms["nofb"]["cxy_se"][i],
                     arms["fb"]["dist_mean"][i], arms["fb"]["dist_se"][i],
                     arms["nofb"]["dist_mean"][i], arms["nofb"]["dist_se"][i]])
    csv_path = os.path.join(out_dir, "coherence_protect.csv")
    _write_csv(csv_path, ["time",
                          "cxy_fb_mean", "cxy_fb_se",
                          "cxy_nofb_mean", "cxy_nofb_se",
                          "dist_fb_mean", "dist_fb_se",
                          "dist_nofb_mean", "dist_nofb_se"], rows)

    # deterministic reference for the feedback-off arm
    rho_lind = simulate_lindblad(rho_i, np.zeros(3), p, cfg)

    idx_half = int(np.argmin(np.abs(times - 0.5))) if t_max >= 0.5 else -1
    summary = {
        "csv": csv_path,
        "n_traj": n_traj,
        "cxy_fb_at_half": float(arms["fb"]["cxy_mean"][idx_half]),
        "cxy_nofb_at_half": float(arms["nofb"]["cxy_mean"][idx_half]),
        "pooled_se_at_half": float(math.hypot(arms["fb"]["cxy_se"][idx_half],
                                              arms["nofb"]["cxy_se"][idx_half])),
        "dist_fb_initial": float(arms["fb"]["dist_mean"][0]),
        "dist_fb_final": float(arms["fb"]["dist_mean"][-1]),
        "nofb_final_rho_mean": [[str(v) for v in row]
                                for row in finals["nofb"].mean(axis=0)[0]],
        "lindblad_final_rho": [[str(v) for v in row] for row in rho_lind],
    }
    write_manifest(os.path.join(out_dir, "manifest.json"), {
        "experiment": "coherence-protect", "master_seed": master_seed,
        "n_traj": n_traj, "dt": dt, "t_max": t_max,
        "gamma_r": p.gamma_r, "gamma_phi": p.gamma_phi,
        "gamma_z": p.gamma_z, "eta_z": p.eta_z,
    })
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    summary["finals"] = finals
    summary["lindblad_final"] = rho_lind
    summary["arms"] = arms
    summary["times"] = times
    return summary


def run_sphere_twin_check(
    out_dir: str,
    master_seed: int = 0,
    n_seeds: int = 20,
    dt: float = 1e-3,
    t_max: float = 5.0,
) -> dict:
    """Max pointwise gap between quantum and sphere-ODE trajectories."""
    os.makedirs(out_dir, exist_ok=True)
    t = grid(3)
    worst = 0.0
    rows = []
    cfg = IntegratorConfig(dt=dt, t_max=t_max, sample_every=10)
    for s in range(n_seeds):
        rng = np.random.default_rng([master_seed, 5, s])
        pts = hemisphere_points(rng, t.n)
        tq = simulate_network(kets_from_points(pts), t, "geometry", cfg)
        tc = simulate_sphere(pts, t, cfg)
        dev = float(np.max(np.abs(tq.bloch() - tc.samples)))
        rows.append((s, dev))
        worst = max(worst, dev)
    _write_csv(os.path.join(out_dir, "twin_check.csv"),
               ["seed", "max_deviation"], rows)
    write_manifest(os.path.join(out_dir, "manifest.json"), {
        "experiment": "sphere-twin-check", "master_seed": master_seed,
        "n_seeds": n_seeds, "dt": dt, "t_max": t_max,
    })
    return {"max_deviation": worst, "per_seed": rows}
