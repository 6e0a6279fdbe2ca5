"""Distributed partial consensus protocols for networks of qubits."""

from . import (
    core,
    decoherence,
    dynamics,
    experiments,
    metrics,
    protocols,
    topology,
)

__all__ = [
    "core",
    "decoherence",
    "dynamics",
    "experiments",
    "metrics",
    "protocols",
    "topology",
]

__version__ = "0.1.0"
