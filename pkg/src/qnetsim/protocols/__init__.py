"""Protocol workloads: teleportation, swapping chains, clusters, QLAN."""
from .cluster import ClusterConfig, run_cluster
from .primitives import accumulate_bits, bsm, pauli_correction
from .qlan import QlanConfig, run_qlan
from .report import ProtocolReport
from .swap import SwapConfig, run_swap_chain
from .teleport import TeleportConfig, TeleportResult, expected_fidelity, run_teleport

__all__ = [
    "ClusterConfig",
    "ProtocolReport",
    "QlanConfig",
    "SwapConfig",
    "TeleportConfig",
    "TeleportResult",
    "accumulate_bits",
    "bsm",
    "expected_fidelity",
    "pauli_correction",
    "run_cluster",
    "run_qlan",
    "run_swap_chain",
    "run_teleport",
]
