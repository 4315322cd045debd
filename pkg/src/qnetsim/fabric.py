"""Network fabric: quantum channels plus a simplified classical message layer.

The classical layer replaces a full protocol stack with the two transports the
workloads actually exercise: fire-and-forget datagrams and a stop-and-wait
reliable mode with a one-round-trip session handshake. Links are finite
drop-tail FIFOs with explicit serialization, propagation, and queueing, so
congestion-induced latency comes out of queue occupancy rather than a model
knob. Cross-traffic competes in the same queues; the "bulk" pattern stands in
for a backlogged sender by offering twice the link rate (no congestion
control is modeled).
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .engine import Engine
from .errors import QNetSimError, RoutingError
from .registry import IN_FLIGHT, QubitHandle, StateRegistry
from .states import NoiseMap, erase_qubit_event
from .trace import TraceWriter

PROP_NS_PER_KM = 5_000  # light in fiber, 5 us/km
ACK_BYTES = 64
DEFAULT_MSG_BYTES = 1024
DEFAULT_P2P_RATE = 50e6
DEFAULT_BUS_RATE = 10e9
DEFAULT_QUEUE_CAPACITY = 100
MAX_RETRIES = 10


@dataclass(frozen=True)
class GateTimings:
    """Superconducting-style local operation durations."""

    single_qubit_ns: int = 20
    two_qubit_ns: int = 40
    measure_ns: int = 300

    def for_gate(self, kind: str) -> int:
        return self.two_qubit_ns if kind in ("CZ", "CNOT", "SWAP") else self.single_qubit_ns


@dataclass
class QNode:
    name: str
    timings: GateTimings = field(default_factory=GateTimings)


@dataclass
class QuantumChannel:
    a: str
    b: str
    length_km: float
    loss_p: float = 0.0
    noise: Optional[NoiseMap] = None
    prop_ns_per_km: int = PROP_NS_PER_KM
    sent: int = 0
    delivered: int = 0
    lost: int = 0

    @property
    def delay_ns(self) -> int:
        return round(self.length_km * self.prop_ns_per_km)

    def connects(self, x: str, y: str) -> bool:
        return {self.a, self.b} == {x, y}


@dataclass
class Packet:
    src: str
    dst: str
    size_bytes: int
    kind: str
    payload: object
    on_deliver: Optional[Callable[["Packet"], None]]
    protocol: bool
    submitted_ns: int = 0
    service_start_ns: int = 0
    service_end_ns: int = 0
    delivered_ns: int = 0


@dataclass
class PacketLog:
    src: str
    dst: str
    kind: str
    size_bytes: int
    queueing_ns: int
    serialization_ns: int
    propagation_ns: int


class _Fifo:
    """Single-server queue: one packet serializes at a time, drop-tail."""

    def __init__(self, link: "ClassicalLink", label: str):
        self.link = link
        self.label = label
        self.waiting: deque[Packet] = deque()
        self.busy = False

    def submit(self, net: "Network", pkt: Packet) -> bool:
        pkt.submitted_ns = net.engine.now()
        if len(self.waiting) >= self.link.queue_capacity:
            self.link.dropped += 1
            if pkt.protocol and net.trace is not None:
                net.trace.classical_drop(pkt.src, pkt.dst, pkt.kind)
            return False
        self.waiting.append(pkt)
        if not self.busy:
            self._next(net)
        return True

    def _next(self, net: "Network") -> None:
        if not self.waiting:
            self.busy = False
            return
        self.busy = True
        pkt = self.waiting.popleft()
        pkt.service_start_ns = net.engine.now()
        ser = self.link.serialization_ns(pkt.size_bytes)
        net.engine.schedule(ser, lambda: self._finish(net, pkt))

    def _finish(self, net: "Network", pkt: Packet) -> None:
        pkt.service_end_ns = net.engine.now()
        net.engine.schedule(self.link.prop_ns, lambda: self._deliver(net, pkt))
        self._next(net)

    def _deliver(self, net: "Network", pkt: Packet) -> None:
        pkt.delivered_ns = net.engine.now()
        self.link.delivered += 1
        self.link.delivered_log.append(
            PacketLog(
                pkt.src,
                pkt.dst,
                pkt.kind,
                pkt.size_bytes,
                pkt.service_start_ns - pkt.submitted_ns,
                pkt.service_end_ns - pkt.service_start_ns,
                pkt.delivered_ns - pkt.service_end_ns,
            )
        )
        if pkt.protocol and net.trace is not None:
            net.trace.classical_deliver(pkt.src, pkt.dst, pkt.kind)
        if pkt.on_deliver is not None:
            pkt.on_deliver(pkt)


class ClassicalLink:
    """Point-to-point full-duplex pair of FIFOs, or a shared single-FIFO bus."""

    def __init__(
        self,
        kind: str,
        members: list[str],
        rate_bps: float,
        length_km: float,
        queue_capacity: int = DEFAULT_QUEUE_CAPACITY,
    ):
        if kind not in ("p2p", "shared_bus"):
            raise ValueError(f"unknown link kind {kind!r}")
        if kind == "p2p" and len(members) != 2:
            raise ValueError("p2p link needs exactly two endpoints")
        self.kind = kind
        self.members = list(members)
        self.rate_bps = rate_bps
        self.length_km = length_km
        self.queue_capacity = queue_capacity
        self.dropped = 0
        self.delivered = 0
        self.delivered_log: list[PacketLog] = []
        if kind == "p2p":
            a, b = members
            self._fifos = {(a, b): _Fifo(self, f"{a}->{b}"), (b, a): _Fifo(self, f"{b}->{a}")}
        else:
            self._fifos = {"bus": _Fifo(self, "bus")}

    @property
    def prop_ns(self) -> int:
        return round(self.length_km * PROP_NS_PER_KM)

    def serialization_ns(self, size_bytes: int) -> int:
        return round(size_bytes * 8 * 1e9 / self.rate_bps)

    def fifo(self, src: str, dst: str) -> _Fifo:
        if self.kind == "p2p":
            return self._fifos[(src, dst)]
        return self._fifos["bus"]

    def serves(self, src: str, dst: str) -> bool:
        return src in self.members and dst in self.members


@dataclass
class _ReliableEntry:
    msg_id: int
    payload: object
    size_bytes: int
    kind: str
    on_deliver: Optional[Callable]
    on_fail: Optional[Callable]
    retries: int = 0
    acked: bool = False
    timer: Optional[int] = None


class _ReliableSession:
    """Stop-and-wait sender state for one (src, dst) direction."""

    def __init__(self, src: str, dst: str, handshake: bool):
        self.src = src
        self.dst = dst
        self.handshake = handshake
        self.established = not handshake
        self.connecting = False
        self.on_ready: list[Callable] = []
        self.pending: deque[_ReliableEntry] = deque()
        self.inflight: Optional[_ReliableEntry] = None
        self.syn_entry: Optional[_ReliableEntry] = None
        self.retransmissions = 0
        self.failures = 0


class Network:
    """Owns the engine, registry, topology, and transports for one scenario."""

    def __init__(
        self,
        engine: Engine,
        backend: str = "ket",
        trace_sink=None,
        max_qubits: Optional[int] = None,
        check_invariants: bool = False,
        reliable_handshake: bool = True,
    ):
        self.engine = engine
        self.trace = TraceWriter(trace_sink, engine.now) if trace_sink is not None else None
        self.registry = StateRegistry(
            backend, trace=self.trace, max_qubits=max_qubits, check_invariants=check_invariants
        )
        self.backend = backend
        self.nodes: dict[str, QNode] = {}
        self.qchannels: list[QuantumChannel] = []
        self.clinks: list[ClassicalLink] = []
        self.reliable_handshake = reliable_handshake
        self._sessions: dict[tuple[str, str], _ReliableSession] = {}
        self._rx_seen: dict[tuple[str, str], set[int]] = {}
        self._msg_ids = itertools.count(1)
        self._traffic_ids = itertools.count(1)
        self._traffic_on = True

    # -- topology ---------------------------------------------------------------

    def add_node(self, name: str, timings: Optional[GateTimings] = None) -> QNode:
        if name in self.nodes:
            raise QNetSimError(f"duplicate node {name!r}")
        node = QNode(name, timings or GateTimings())
        self.nodes[name] = node
        return node

    def add_quantum_channel(
        self,
        a: str,
        b: str,
        length_km: float,
        loss_p: float = 0.0,
        noise: Optional[NoiseMap] = None,
    ) -> QuantumChannel:
        self._require_nodes(a, b)
        ch = QuantumChannel(a, b, length_km, loss_p, noise)
        self.qchannels.append(ch)
        return ch

    def add_p2p_link(
        self,
        a: str,
        b: str,
        length_km: float,
        rate_bps: float = DEFAULT_P2P_RATE,
        queue_capacity: int = DEFAULT_QUEUE_CAPACITY,
    ) -> ClassicalLink:
        self._require_nodes(a, b)
        link = ClassicalLink("p2p", [a, b], rate_bps, length_km, queue_capacity)
        self.clinks.append(link)
        return link

    def add_shared_bus(
        self,
        members: list[str],
        length_km: float,
        rate_bps: float = DEFAULT_BUS_RATE,
        queue_capacity: int = DEFAULT_QUEUE_CAPACITY,
    ) -> ClassicalLink:
        self._require_nodes(*members)
        link = ClassicalLink("shared_bus", members, rate_bps, length_km, queue_capacity)
        self.clinks.append(link)
        return link

    def _require_nodes(self, *names: str) -> None:
        for name in names:
            if name not in self.nodes:
                raise QNetSimError(f"unknown node {name!r}")

    def write_topology(self) -> None:
        if self.trace is None:
            return
        self.trace.write_topology(
            sorted(self.nodes),
            [(c.a, c.b) for c in self.qchannels],
            [tuple(l.members) for l in self.clinks],
        )

    def qchannel(self, a: str, b: str) -> QuantumChannel:
        for ch in self.qchannels:
            if ch.connects(a, b):
                return ch
        raise RoutingError(f"no quantum channel between {a!r} and {b!r}")

    def clink(self, src: str, dst: str) -> ClassicalLink:
        for link in self.clinks:
            if link.serves(src, dst):
                return link
        raise RoutingError(f"no classical link from {src!r} to {dst!r}")

    # -- local quantum operations --------------------------------------------------

    def _own(self, node: str, *handles: QubitHandle) -> None:
        for h in handles:
            if h.node != node:
                raise QNetSimError(f"{h!r} is not held by node {node!r}")

    def local_gate(
        self, node: str, kind: str, handles: list[QubitHandle], then: Optional[Callable] = None
    ) -> None:
        self._own(node, *handles)
        self.registry.apply_joint(kind, handles)
        delay = self.nodes[node].timings.for_gate(kind)
        if then is not None:
            self.engine.schedule(delay, then)

    def local_measure(
        self,
        node: str,
        handle: QubitHandle,
        basis: str,
        then: Optional[Callable[[int], None]] = None,
        rng_stream: str = "measure",
    ) -> int:
        self._own(node, handle)
        outcome = self.registry.measure_and_release(handle, basis, self.engine.rng(rng_stream))
        if then is not None:
            self.engine.schedule(self.nodes[node].timings.measure_ns, lambda: then(outcome))
        return outcome

    def make_bell_pair(
        self, node: str, label_a: str, label_b: str, then: Optional[Callable] = None
    ) -> tuple[QubitHandle, QubitHandle]:
        """H + CNOT on two fresh qubits; completion after both gate times."""
        ha = self.registry.create_qubit(node, label_a, initial="zero")
        hb = self.registry.create_qubit(node, label_b, initial="zero")
        self.registry.apply_joint("H", [ha])
        self.registry.apply_joint("CNOT", [ha, hb])
        t = self.nodes[node].timings
        if then is not None:
            self.engine.schedule(t.single_qubit_ns + t.two_qubit_ns, then)
        return ha, hb

    # -- qubit transmission ----------------------------------------------------------

    def transmit_qubit(
        self,
        src: str,
        dst: str,
        handle: QubitHandle,
        on_delivered: Optional[Callable[[QubitHandle], None]] = None,
        on_lost: Optional[Callable[[QubitHandle], None]] = None,
    ) -> None:
        ch = self.qchannel(src, dst)
        self._own(src, handle)
        handle.node = IN_FLIGHT
        ch.sent += 1
        if self.trace is not None:
            self.trace.send_qubit(handle.label, src, dst)
        loss_rng = self.engine.rng(f"channel.{ch.a}-{ch.b}.loss")

        def arrive() -> None:
            if erase_qubit_event(loss_rng, ch.loss_p):
                ch.lost += 1
                if self.trace is not None:
                    self.trace.lose_qubit(handle.label)
                self.registry.lose_qubit(handle, self.engine.rng("measure"))
                if on_lost is not None:
                    on_lost(handle)
                return
            ch.delivered += 1
            handle.node = dst
            if ch.noise is not None:
                self.apply_noise(handle, ch.noise)
            if self.trace is not None:
                self.trace.deliver_qubit(handle.label, dst)
            if on_delivered is not None:
                on_delivered(handle)

        self.engine.schedule(ch.delay_ns, arrive)

    def apply_noise(self, handle: QubitHandle, noise: NoiseMap) -> None:
        state, idx = self.registry.joint_state([handle])
        state.apply_noise(noise, idx[0], self.engine.rng("noise"))

    def depolarize(self, handle: QubitHandle, p: float) -> None:
        state, idx = self.registry.joint_state([handle])
        state.depolarize(idx[0], p, self.engine.rng("noise"))

    # -- classical transmission ----------------------------------------------------

    def send_classical(
        self,
        src: str,
        dst: str,
        payload: object,
        size_bytes: int = DEFAULT_MSG_BYTES,
        transport: str = "unreliable",
        kind: str = "msg",
        on_deliver: Optional[Callable[[object], None]] = None,
        on_fail: Optional[Callable[[object], None]] = None,
    ) -> None:
        self._require_nodes(src, dst)
        if transport == "unreliable":
            self._send_datagram(src, dst, payload, size_bytes, kind, on_deliver)
        elif transport == "reliable":
            self._send_reliable(src, dst, payload, size_bytes, kind, on_deliver, on_fail)
        else:
            raise ValueError(f"unknown transport {transport!r}")

    def _send_datagram(self, src, dst, payload, size_bytes, kind, on_deliver) -> None:
        link = self.clink(src, dst)
        if self.trace is not None:
            self.trace.classical_send(src, dst, kind, size_bytes)

        def deliver(pkt: Packet) -> None:
            if on_deliver is not None:
                on_deliver(pkt.payload)

        pkt = Packet(src, dst, size_bytes, kind, payload, deliver, protocol=True)
        link.fifo(src, dst).submit(self, pkt)

    # -- reliable (stop-and-wait with optional handshake) ----------------------------

    def session(self, src: str, dst: str) -> _ReliableSession:
        key = (src, dst)
        if key not in self._sessions:
            self._sessions[key] = _ReliableSession(src, dst, self.reliable_handshake)
        return self._sessions[key]

    def open_reliable_session(self, src: str, dst: str, on_ready: Callable[[], None]) -> None:
        """Run the connection handshake now; on_ready fires when established."""
        ses = self.session(src, dst)
        if ses.established:
            self.engine.schedule(0, on_ready)
            return
        ses.on_ready.append(on_ready)
        if not ses.connecting:
            self._start_handshake(ses)

    def _send_reliable(self, src, dst, payload, size_bytes, kind, on_deliver, on_fail) -> None:
        ses = self.session(src, dst)
        entry = _ReliableEntry(next(self._msg_ids), payload, size_bytes, kind, on_deliver, on_fail)
        ses.pending.append(entry)
        self._pump(ses)

    def _timeout_ns(self, link: ClassicalLink, size_bytes: int, retries: int) -> int:
        base = 2 * (link.serialization_ns(size_bytes) + 2 * link.prop_ns)
        return base << retries

    def _start_handshake(self, ses: _ReliableSession) -> None:
        ses.connecting = True
        ses.syn_entry = _ReliableEntry(next(self._msg_ids), None, ACK_BYTES, "syn", None, None)
        self._attempt_control(ses, ses.syn_entry, "syn")

    def _attempt_control(self, ses: _ReliableSession, entry: _ReliableEntry, kind: str) -> None:
        link = self.clink(ses.src, ses.dst)

        def on_syn(pkt: Packet) -> None:
            # receiver side: answer every SYN so a lost SYNACK gets repaired
            reply = Packet(
                ses.dst, ses.src, ACK_BYTES, "synack", pkt.payload, self._on_synack(ses), protocol=True
            )
            self.clink(ses.dst, ses.src).fifo(ses.dst, ses.src).submit(self, reply)

        pkt = Packet(ses.src, ses.dst, entry.size_bytes, kind, entry.msg_id, on_syn, protocol=True)
        if self.trace is not None:
            self.trace.classical_send(ses.src, ses.dst, kind, entry.size_bytes)
        link.fifo(ses.src, ses.dst).submit(self, pkt)
        timeout = self._timeout_ns(link, entry.size_bytes, entry.retries)

        def on_timeout() -> None:
            if ses.established:
                return
            entry.retries += 1
            if entry.retries > MAX_RETRIES:
                ses.connecting = False
                ses.failures += 1
                self._fail_all(ses)
                return
            ses.retransmissions += 1
            self._attempt_control(ses, entry, kind)

        entry.timer = self.engine.schedule(timeout, on_timeout)

    def _on_synack(self, ses: _ReliableSession) -> Callable[[Packet], None]:
        def handler(pkt: Packet) -> None:
            if ses.established:
                return
            self._mark_established(ses)
            # the connection is bidirectional: the reverse direction rides it
            self._mark_established(self.session(ses.dst, ses.src))

        return handler

    def _mark_established(self, ses: _ReliableSession) -> None:
        if ses.established:
            return
        ses.established = True
        ses.connecting = False
        if ses.syn_entry is not None and ses.syn_entry.timer is not None:
            self.engine.cancel(ses.syn_entry.timer)
        ready, ses.on_ready = ses.on_ready, []
        for cb in ready:
            cb()
        self._pump(ses)

    def _pump(self, ses: _ReliableSession) -> None:
        if ses.inflight is not None or ses.connecting:
            return
        if not ses.established:
            self._start_handshake(ses)
            return
        if not ses.pending:
            return
        ses.inflight = ses.pending.popleft()
        self._attempt_data(ses, ses.inflight)

    def _attempt_data(self, ses: _ReliableSession, entry: _ReliableEntry) -> None:
        link = self.clink(ses.src, ses.dst)
        seen = self._rx_seen.setdefault((ses.src, ses.dst), set())

        def on_data(pkt: Packet) -> None:
            msg_id, payload = pkt.payload
            ack = Packet(ses.dst, ses.src, ACK_BYTES, "ack", msg_id, on_ack, protocol=True)
            self.clink(ses.dst, ses.src).fifo(ses.dst, ses.src).submit(self, ack)
            if msg_id not in seen:
                seen.add(msg_id)
                if entry.on_deliver is not None:
                    entry.on_deliver(payload)

        def on_ack(pkt: Packet) -> None:
            if entry.acked:
                return
            if pkt.payload != entry.msg_id:
                return
            entry.acked = True
            if entry.timer is not None:
                self.engine.cancel(entry.timer)
            if ses.inflight is entry:
                ses.inflight = None
            self._pump(ses)

        pkt = Packet(
            ses.src, ses.dst, entry.size_bytes, entry.kind, (entry.msg_id, entry.payload), on_data, protocol=True
        )
        if self.trace is not None:
            self.trace.classical_send(ses.src, ses.dst, entry.kind, entry.size_bytes)
        link.fifo(ses.src, ses.dst).submit(self, pkt)
        timeout = self._timeout_ns(link, entry.size_bytes, entry.retries)

        def on_timeout() -> None:
            if entry.acked:
                return
            entry.retries += 1
            if entry.retries > MAX_RETRIES:
                if ses.inflight is entry:
                    ses.inflight = None
                ses.failures += 1
                if entry.on_fail is not None:
                    entry.on_fail(entry.payload)
                self._pump(ses)
                return
            ses.retransmissions += 1
            self._attempt_data(ses, entry)

        entry.timer = self.engine.schedule(timeout, on_timeout)

    def _fail_all(self, ses: _ReliableSession) -> None:
        while ses.pending:
            entry = ses.pending.popleft()
            if entry.on_fail is not None:
                entry.on_fail(entry.payload)

    def total_retransmissions(self) -> int:
        return sum(s.retransmissions for s in self._sessions.values())

    # -- cross traffic ------------------------------------------------------------

    def start_cross_traffic(
        self,
        link: ClassicalLink,
        rate_bps: float,
        pattern: str = "constant_onoff",
        src: Optional[str] = None,
        dst: Optional[str] = None,
        size_bytes: int = DEFAULT_MSG_BYTES,
    ) -> Optional[int]:
        """Background packets from t=0 competing in the same FIFO queue."""
        if pattern not in ("constant_onoff", "bulk"):
            raise ValueError(f"unknown traffic pattern {pattern!r}")
        if pattern == "bulk":
            rate_bps = 2 * link.rate_bps
        if rate_bps <= 0:
            return None
        src = src or link.members[0]
        dst = dst or link.members[1 if len(link.members) > 1 else 0]
        period = round(size_bytes * 8 * 1e9 / rate_bps)
        source_id = next(self._traffic_ids)
        fifo = link.fifo(src, dst)

        def inject() -> None:
            if not self._traffic_on:
                return
            fifo.submit(self, Packet(src, dst, size_bytes, "xtraffic", None, None, protocol=False))
            self.engine.schedule(period, inject)

        self.engine.schedule(0, inject)
        return source_id

    def stop_cross_traffic(self) -> None:
        """Stop background sources so the event queue can drain."""
        self._traffic_on = False
