"""Star-topology graph-state engineering with a central orchestrator.

Phases: (1) reliable sessions to every client; (2) Bell-pair distribution
over erasure channels, each pair confirmed by a client ack and retransmitted
from scratch on timeout; (3) a (2M-1)-qubit 1D cluster built locally, with
the even path positions teleported out to the clients; (4) Pauli-Y
measurements on the retained interior qubits, with outcome-dependent
corrections shipped to the affected clients and applied eagerly on arrival.
A successful run leaves the clients sharing an M-qubit 1D cluster state.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from ..engine import Engine, _stream_entropy
from ..fabric import ACK_BYTES, DEFAULT_MSG_BYTES, DEFAULT_P2P_RATE, Network
from ..graphs import EntGraph, measure_pauli_rule
from ..states import ClusterSpec, prepare_cluster
from .primitives import apply_corrections, bsm, pauli_correction
from .report import PhaseTracker, ProtocolReport

RUN_HORIZON_NS = 60_000_000_000


@dataclass
class QlanConfig:
    clients: int
    length_km: float = 50.0
    loss_p: float = 0.0
    backend: str = "stab"
    seed: int = 0
    rate_bps: float = DEFAULT_P2P_RATE
    lengths_km: Optional[list[float]] = None  # per-client override
    max_attempts: int = 100
    check_fidelity: bool = True
    trace_sink: Optional[str] = None

    def __post_init__(self):
        if self.clients < 2:
            raise ValueError("QLAN needs at least 2 clients")
        if self.lengths_km is not None and len(self.lengths_km) != self.clients:
            raise ValueError("lengths_km must list one distance per client")

    @property
    def resource_qubits(self) -> int:
        return 2 * self.clients - 1

    def client_length(self, i: int) -> float:
        return self.lengths_km[i] if self.lengths_km is not None else self.length_km


def run_qlan(cfg: QlanConfig) -> ProtocolReport:
    wall0 = time.perf_counter()
    m = cfg.clients
    engine = Engine(seed=_stream_entropy(cfg.seed, "qlan"))
    net = Network(engine, backend=cfg.backend, trace_sink=cfg.trace_sink)
    orch = "orchestrator"
    clients = [f"client{i}" for i in range(m)]
    net.add_node(orch)
    links = []
    for i, c in enumerate(clients):
        net.add_node(c)
        net.add_quantum_channel(orch, c, cfg.client_length(i), loss_p=cfg.loss_p)
        links.append(net.add_p2p_link(orch, c, cfg.client_length(i), rate_bps=cfg.rate_bps))
    net.write_topology()

    phases = PhaseTracker(engine.now)
    st = {
        "ready": 0,
        "confirmed": 0,
        "attempts": [0] * m,
        "attempt_live": [0] * m,  # attempt number currently awaited
        "pair_done": [False] * m,
        "orch_half": [None] * m,
        "client_half": [None] * m,
        "teleport_acked": 0,
        "cluster": None,
        "graph": None,
        "corr_round": 0,
        "corr_acks": 0,
        "corr_expected": 0,
        "measurements_done": False,
        "done": False,
        "failed": False,
        "failure_phase": None,
        "completed_at": None,
        "fidelity": None,
    }

    def fail(phase: str) -> None:
        if st["done"] or st["failed"]:
            return
        st["failed"] = True
        st["failure_phase"] = phase
        phases.finish()

    # -- phase 1: sessions ------------------------------------------------------

    def start() -> None:
        phases.enter("session_setup")
        if net.trace is not None:
            net.trace.protocol_phase("session_setup")
        for c in clients:
            net.open_reliable_session(orch, c, on_ready=on_session)

    def on_session() -> None:
        st["ready"] += 1
        if st["ready"] == m:
            start_distribution()

    # -- phase 2: heralded Bell distribution -----------------------------------------

    def retry_timeout_ns(i: int) -> int:
        # ~2.5x the loss-free confirm latency (qubit flight + ack leg)
        link = links[i]
        q_delay = net.qchannel(orch, clients[i]).delay_ns
        return 2 * (q_delay + link.prop_ns + link.serialization_ns(DEFAULT_MSG_BYTES))

    def start_distribution() -> None:
        phases.enter("bell_distribution")
        if net.trace is not None:
            net.trace.protocol_phase("bell_distribution")
        for i in range(m):
            attempt_pair(i)

    def attempt_pair(i: int) -> None:
        if st["failed"]:
            return
        st["attempts"][i] += 1
        if st["attempts"][i] > cfg.max_attempts:
            fail("bell_distribution")
            return
        attempt_no = st["attempts"][i]
        st["attempt_live"][i] = attempt_no
        keep, send = net.make_bell_pair(orch, f"p{i}o{attempt_no}", f"p{i}c{attempt_no}")
        st["orch_half"][i] = keep

        def ship() -> None:
            net.transmit_qubit(
                orch, clients[i], send,
                on_delivered=lambda h: on_client_half(i, attempt_no, h),
            )

        t = net.nodes[orch].timings
        engine.schedule(t.single_qubit_ns + t.two_qubit_ns, ship)

        def on_timeout() -> None:
            if st["pair_done"][i] or st["failed"] or st["attempt_live"][i] != attempt_no:
                return
            half = st["orch_half"][i]
            if half is not None and half.alive:
                net.registry.lose_qubit(half, engine.rng("measure"))
            attempt_pair(i)

        engine.schedule(retry_timeout_ns(i), on_timeout)

    def on_client_half(i: int, attempt_no: int, handle) -> None:
        if st["pair_done"][i] or st["attempt_live"][i] != attempt_no:
            # superseded attempt: the orchestrator already gave up on it
            net.registry.lose_qubit(handle, engine.rng("measure"))
            return
        st["client_half"][i] = handle
        net.send_classical(
            clients[i], orch, payload=("pair-ok", i, attempt_no), size_bytes=ACK_BYTES,
            kind="pair-confirm", transport="reliable",
            on_deliver=on_pair_confirm, on_fail=lambda _p: fail("bell_distribution"),
        )

    def on_pair_confirm(payload) -> None:
        _, i, attempt_no = payload
        if st["pair_done"][i] or st["attempt_live"][i] != attempt_no:
            return
        st["pair_done"][i] = True
        st["confirmed"] += 1
        if st["confirmed"] == m:
            start_teleportation()

    # -- phase 3: cluster build + teleportation ----------------------------------------

    def start_teleportation() -> None:
        phases.enter("teleportation")
        if net.trace is not None:
            net.trace.protocol_phase("teleportation")
        n = cfg.resource_qubits
        labels = [f"v{k}" for k in range(n)]
        handles = net.registry.create_block(orch, labels, initial="plus")
        st["cluster"] = handles
        st["graph"] = EntGraph.path(list(range(n)))
        spec = ClusterSpec(1, n)
        edges = list(spec.edges())

        def apply_edge(k: int) -> None:
            if k == len(edges):
                teleport_all()
                return
            a, b = edges[k]
            net.local_gate(orch, "CZ", [handles[a], handles[b]], then=lambda: apply_edge(k + 1))

        apply_edge(0)

    def teleport_all() -> None:
        for i in range(m):
            cluster_qubit = st["cluster"][2 * i]
            bsm(
                net, orch, cluster_qubit, st["orch_half"][i],
                then=lambda b1, b2, i=i: on_teleport_bits(i, b1, b2),
            )

    def on_teleport_bits(i: int, b1: int, b2: int) -> None:
        net.send_classical(
            orch, clients[i], payload=("teleport", i, b1, b2), size_bytes=DEFAULT_MSG_BYTES,
            kind="teleport-corr", transport="reliable",
            on_deliver=on_teleport_corr, on_fail=lambda _p: fail("teleportation"),
        )

    def on_teleport_corr(payload) -> None:
        _, i, b1, b2 = payload
        handle = st["client_half"][i]
        gates = pauli_correction(b1, b2)

        def acked() -> None:
            net.send_classical(
                clients[i], orch, payload=("teleport-ok", i), size_bytes=ACK_BYTES,
                kind="teleport-ack", transport="reliable",
                on_deliver=on_teleport_ack, on_fail=lambda _p: fail("teleportation"),
            )

        apply_corrections(net, clients[i], handle, gates, then=acked)

    def on_teleport_ack(payload) -> None:
        st["teleport_acked"] += 1
        if st["teleport_acked"] == m:
            start_measurements()

    # -- phase 4: Pauli-Y engineering ------------------------------------------------

    def start_measurements() -> None:
        phases.enter("graph_measurements")
        if net.trace is not None:
            net.trace.protocol_phase("graph_measurements")
        interior = list(range(1, cfg.resource_qubits - 1, 2))
        st["corr_expected"] = 0
        measure_round(interior, 0)

    def measure_round(interior: list[int], k: int) -> None:
        if st["failed"]:
            return
        if k == len(interior):
            st["measurements_done"] = True
            maybe_complete()
            return
        vertex = interior[k]
        handle = st["cluster"][vertex]

        def measured(outcome: int) -> None:
            graph, plan = measure_pauli_rule(st["graph"], vertex, "Y", outcome)
            st["graph"] = graph
            for v, gates in plan.corrections.items():
                st["corr_expected"] += 1
                client_index = v // 2
                net.send_classical(
                    orch, clients[client_index],
                    payload=("corr", client_index, gates), size_bytes=DEFAULT_MSG_BYTES,
                    kind="graph-corr", transport="reliable",
                    on_deliver=on_graph_corr, on_fail=lambda _p: fail("graph_measurements"),
                )
            measure_round(interior, k + 1)

        net.local_measure(orch, handle, "Y", then=measured)

    def on_graph_corr(payload) -> None:
        _, i, gates = payload
        handle = st["client_half"][i]

        def acked() -> None:
            net.send_classical(
                clients[i], orch, payload=("corr-ok", i), size_bytes=ACK_BYTES,
                kind="corr-ack", transport="reliable",
                on_deliver=lambda _p: on_corr_ack(), on_fail=lambda _p: fail("graph_measurements"),
            )

        apply_corrections(net, clients[i], handle, tuple(gates), then=acked)

    def on_corr_ack() -> None:
        st["corr_acks"] += 1
        maybe_complete()

    def maybe_complete() -> None:
        if st["done"] or st["failed"]:
            return
        if not st["measurements_done"] or st["corr_acks"] < st["corr_expected"]:
            return
        st["done"] = True
        st["completed_at"] = engine.now()
        if cfg.check_fidelity:
            handles = [st["client_half"][i] for i in range(m)]
            reference = prepare_cluster(ClusterSpec(1, m), cfg.backend)
            st["fidelity"] = net.registry.fidelity(handles, reference)
        phases.finish()

    engine.schedule(0, start)
    wall1 = time.perf_counter()
    stats = engine.run(until=RUN_HORIZON_NS)
    wall2 = time.perf_counter()
    if not st["done"] and not st["failed"]:
        fail("incomplete")
    report = ProtocolReport(
        workload="qlan",
        success=bool(st["done"]),
        final_fidelity=st["fidelity"],
        completion_time_ns=st["completed_at"] or 0,
        phases=phases.durations(),
        counters={
            "events": stats.events_processed,
            "retransmissions": net.total_retransmissions(),
            "pair_attempts": sum(st["attempts"]),
            "qubits_lost": sum(c.lost for c in net.qchannels),
            "classical_drops": sum(l.dropped for l in net.clinks),
        },
        failure_phase=st["failure_phase"],
        trace_path=cfg.trace_sink,
        extra={
            "clients": m,
            "final_graph_edges": st["graph"].edge_list() if st["graph"] else None,
            "wall_config_s": wall1 - wall0,
            "wall_sim_s": wall2 - wall1,
        },
    )
    if net.trace is not None:
        net.trace.close()
    return report
