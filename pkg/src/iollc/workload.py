"""Tenant compute and NIC traffic driving the LLC model.

Time advances in fixed ticks (1 ms by default).  Each tick the NIC first
injects every traffic stream into its Rx ring through DDIO, then every tenant
spends its per-core cycle budget: networking tenants (and the virtual switch)
drain their queues, the others issue memory accesses from their working set.

Cycle cost is analytic: ``cpi_base`` per plain instruction plus
``llc_hit_cycles`` or ``mem_cycles`` per LLC access depending on hit/miss.
Only busy cycles are charged to a core; a polling core with an empty queue is
treated as halted.
"""
from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from typing import Any, Optional

from .cache import DDIO, Access, LlcCache, LlcGeometry, contiguous_mask, top_mask

TICK = 1e-3
VIRTIO_ENTRY = 1600
_ALIGN = 4096


class SimError(ValueError):
    pass


class Priority(str, enum.Enum):
    PS = "PS"
    BE = "BE"
    VSWITCH = "VSWITCH"


class Topology(str, enum.Enum):
    AGGREGATION = "aggregation"
    SLICING = "slicing"


class WorkloadKind(str, enum.Enum):
    RANDOM_READ = "random_read"
    STREAMING = "streaming"
    PACKET_FORWARD = "packet_forward"
    KEY_VALUE = "key_value"


@dataclass
class WorkloadSpec:
    """What a tenant does with its cycles.

    For ``PACKET_FORWARD`` the flow table holds ``flow_count`` entries of
    ``flow_entry_bytes`` each, capped at ``working_set`` bytes (the switch's
    exact-match cache size); every packet reads the entry of one uniformly
    drawn flow, plus ``floor(lookups_per_decade * log10(flow_count))`` extra
    lookups of other entries (a classifier that needs more probes as the flow
    population grows).  ``KEY_VALUE`` reads ``accesses_per_packet`` random lines of
    its working set per request.
    """

    kind: WorkloadKind = WorkloadKind.RANDOM_READ
    working_set: int = 1 << 20
    mem_ratio: float = 0.3
    flow_count: int = 1
    flow_entry_bytes: int = 64
    accesses_per_packet: int = 2
    write_ratio: float = 0.0
    lookups_per_decade: float = 0.0

    def validate(self, line_size: int) -> None:
        self.kind = WorkloadKind(self.kind)
        if self.working_set < line_size:
            raise SimError(f"working_set {self.working_set} smaller than a line ({line_size})")
        if not 0 < self.mem_ratio <= 1:
            raise SimError(f"mem_ratio must be in (0, 1], got {self.mem_ratio}")
        if self.flow_count < 1:
            raise SimError(f"flow_count must be >= 1, got {self.flow_count}")
        if self.flow_entry_bytes < 1 or self.accesses_per_packet < 0:
            raise SimError("flow_entry_bytes must be >= 1 and accesses_per_packet >= 0")
        if not 0 <= self.write_ratio <= 1:
            raise SimError(f"write_ratio must be in [0, 1], got {self.write_ratio}")
        if self.lookups_per_decade < 0:
            raise SimError("lookups_per_decade must be >= 0")

    def lookups(self) -> int:
        return 1 + int(self.lookups_per_decade * math.log10(self.flow_count) + 1e-9)

    def footprint(self) -> int:
        if self.kind is WorkloadKind.PACKET_FORWARD:
            return max(self.flow_entry_bytes, min(self.flow_count * self.flow_entry_bytes, self.working_set))
        return self.working_set


@dataclass
class TenantDescriptor:
    id: str
    priority: Priority = Priority.BE
    networking: bool = False
    cores: list[int] = field(default_factory=list)
    ways: int = 1
    workload: WorkloadSpec = field(default_factory=WorkloadSpec)
    mask: int = 0

    @property
    def is_vswitch(self) -> bool:
        return self.priority is Priority.VSWITCH

    @property
    def drains_queues(self) -> bool:
        return self.networking or self.is_vswitch


@dataclass
class CoreTimingParams:
    freq_hz: float = 2.3e9
    cpi_base: float = 1.0
    llc_hit_cycles: float = 40.0
    mem_cycles: float = 200.0
    per_packet_base: int = 200

    def validate(self) -> None:
        if not self.mem_cycles > self.llc_hit_cycles > 0:
            raise SimError("timing requires mem_cycles > llc_hit_cycles > 0")
        if self.freq_hz <= 0 or self.cpi_base <= 0 or self.per_packet_base < 0:
            raise SimError("freq_hz and cpi_base must be positive, per_packet_base non-negative")


@dataclass
class TrafficSpec:
    """Inbound packet stream for one ring.

    ``schedule`` is a list of ``(t, rate)`` steps overriding ``rate`` from
    time ``t`` on.  With ``burst_on``/``burst_off`` both positive the stream
    is on/off modulated, phase measured from ``start``.
    """

    ring: str
    rate: float = 0.0
    packet_size: int = 64
    start: float = 0.0
    stop: float = math.inf
    schedule: list[tuple[float, float]] = field(default_factory=list)
    burst_on: float = 0.0
    burst_off: float = 0.0
    carry: float = 0.0

    def validate(self) -> None:
        if self.rate < 0 or any(r < 0 for _, r in self.schedule):
            raise SimError(f"traffic rate for ring {self.ring!r} must be >= 0")
        if not 64 <= self.packet_size <= 1500:
            raise SimError(f"packet_size must be within 64..1500 bytes, got {self.packet_size}")
        if self.burst_on < 0 or self.burst_off < 0:
            raise SimError("burst durations must be >= 0")
        self.schedule = sorted((float(t), float(r)) for t, r in self.schedule)

    def rate_at(self, t: float) -> float:
        if t < self.start or t >= self.stop:
            return 0.0
        rate = self.rate
        for ts, r in self.schedule:
            if ts <= t:
                rate = r
            else:
                break
        if self.burst_on > 0 and self.burst_off > 0:
            phase = (t - self.start) % (self.burst_on + self.burst_off)
            if phase >= self.burst_on - 1e-12:
                return 0.0
        return rate


@dataclass
class RxRing:
    """Circular descriptor ring plus one fixed-size buffer per entry."""

    id: str
    owner: str
    capacity: int = 512
    entry_size: int = 2048
    dest: Optional[str] = None
    descriptors: bool = True
    buffer_base: int = 0
    desc_base: int = 0
    occupancy: int = 0
    head: int = 0
    drops: int = 0
    injected: int = 0
    processed: int = 0
    slot_lines: list[int] = field(default_factory=list, repr=False)

    def validate(self) -> None:
        if self.capacity < 1:
            raise SimError(f"ring {self.id!r}: capacity must be >= 1")
        if self.entry_size < 64:
            raise SimError(f"ring {self.id!r}: entry_size must be >= 64")
        if not self.slot_lines:
            self.slot_lines = [0] * self.capacity

    @property
    def tail(self) -> int:
        return (self.head - self.occupancy) % self.capacity


@dataclass
class ScenarioEvent:
    t: float
    kind: str
    target: Optional[str] = None
    value: Any = None


EVENT_KINDS = (
    "noop", "set_flow_count", "set_working_set", "set_mem_ratio", "set_rate",
    "set_packet_size", "set_ddio_ways", "add_tenant", "remove_tenant",
)


@dataclass
class TenantStats:
    ops: int = 0
    instructions: float = 0.0
    cycles: float = 0.0
    refs: int = 0
    misses: int = 0


class HostSim:
    """One simulated server socket: LLC, tenants, NIC rings and traffic.

    With ``rx_writeback`` the descriptor and payload lines a core consumes are
    moved into that core's ways afterwards, the way a private cache of a
    non-inclusive hierarchy would write them back; by default they stay where
    DDIO put them.
    """

    def __init__(
        self,
        geometry: LlcGeometry,
        tenants: list[TenantDescriptor],
        rings: list[RxRing] = (),
        traffic: list[TrafficSpec] = (),
        timing: Optional[CoreTimingParams] = None,
        topology: Topology = Topology.SLICING,
        seed: int = 0,
        ddio_ways: int = 2,
        ddio_bounds: tuple[int, int] = (1, 6),
        virtio_capacity: int = 256,
        rx_writeback: bool = False,
    ):
        self.geometry = geometry
        self.timing = timing or CoreTimingParams()
        self.timing.validate()
        self.topology = Topology(topology)
        self.seed = seed
        self.virtio_capacity = virtio_capacity
        self.rx_writeback = rx_writeback
        self.cache = LlcCache(geometry, ddio_ways=ddio_ways, ddio_bounds=ddio_bounds)
        self.t = 0.0
        self.tenants: dict[str, TenantDescriptor] = {}
        self.rings: dict[str, RxRing] = {}
        self.virtio: dict[str, RxRing] = {}
        self.traffic: list[TrafficSpec] = []
        self.core_stats: dict[int, list] = {}
        self.tenant_stats: dict[str, TenantStats] = {}
        self.tenants_changed = False
        self._cursor = _ALIGN
        self._region: dict[str, tuple[int, int]] = {}
        self._reserved: dict[str, int] = {}
        self._rng: dict[str, random.Random] = {}
        self._debt: dict[object, float] = {}
        self._stream_pos: dict[str, int] = {}
        self._rr: dict[str, int] = {}

        for ten in tenants:
            self._add_tenant(ten)
        for ring in rings:
            self._add_ring(ring)
        for tr in traffic:
            tr.validate()
            if tr.ring not in self.rings:
                raise SimError(f"traffic references unknown ring {tr.ring!r}")
            self.traffic.append(tr)
        self._check_topology()
        self.tenants_changed = False

    # -- construction ----------------------------------------------------

    def _reserve(self, nbytes: int) -> int:
        base = self._cursor
        self._cursor += -(-nbytes // _ALIGN) * _ALIGN + _ALIGN
        return base

    def _check_topology(self) -> None:
        vswitches = [t for t in self.tenants.values() if t.is_vswitch]
        if self.topology is Topology.AGGREGATION:
            if len(vswitches) != 1:
                raise SimError("aggregation topology needs exactly one VSWITCH tenant")
        elif vswitches:
            raise SimError("a VSWITCH tenant is only valid in the aggregation topology")

    def _add_tenant(self, ten: TenantDescriptor) -> None:
        if ten.id in self.tenants or ten.id == DDIO:
            raise SimError(f"duplicate or reserved tenant id {ten.id!r}")
        ten.priority = Priority(ten.priority)
        ten.workload.validate(self.geometry.line_size)
        if not ten.cores:
            raise SimError(f"tenant {ten.id!r} has no cores")
        used = {c for t in self.tenants.values() for c in t.cores}
        if used & set(ten.cores) or len(set(ten.cores)) != len(ten.cores):
            raise SimError(f"tenant {ten.id!r} cores {ten.cores} overlap other tenants")
        if not 1 <= ten.ways <= self.geometry.ways:
            raise SimError(f"tenant {ten.id!r} requests {ten.ways} ways of {self.geometry.ways}")
        if not ten.mask:
            ten.mask = self._free_block(ten.ways)
        self.cache.set_mask(ten.id, ten.mask)
        self.tenants[ten.id] = ten
        self.tenant_stats[ten.id] = TenantStats()
        for c in ten.cores:
            self.core_stats[c] = [0.0, 0.0, 0, 0]
            self._debt[c] = 0.0
        self._rng[ten.id] = random.Random(f"{self.seed}:{ten.id}")
        fp = ten.workload.footprint()
        self._region[ten.id] = (self._reserve(fp), fp)
        self._reserved[ten.id] = fp
        self._stream_pos[ten.id] = 0
        self._debt[ten.id] = 0.0
        self._rr[ten.id] = 0
        if self.topology is Topology.AGGREGATION and ten.networking and not ten.is_vswitch:
            # 25-line slots: an odd stride spreads queue lines over every set
            q = RxRing(id=f"virtio:{ten.id}", owner=ten.id, capacity=self.virtio_capacity,
                       entry_size=VIRTIO_ENTRY, descriptors=False)
            q.validate()
            q.buffer_base = self._reserve(q.capacity * q.entry_size)
            self.virtio[ten.id] = q
        self.tenants_changed = True

    def _free_block(self, n: int) -> int:
        """Lowest contiguous block of `n` ways no tenant uses, else the lowest `n` ways."""
        used = 0
        for t in self.tenants.values():
            used |= t.mask
        for start in range(self.geometry.ways - n + 1):
            m = contiguous_mask(start, n)
            if not m & used:
                return m
        return contiguous_mask(0, n)

    def _add_ring(self, ring: RxRing) -> None:
        ring.validate()
        if ring.id in self.rings:
            raise SimError(f"duplicate ring id {ring.id!r}")
        owner = self.tenants.get(ring.owner)
        if owner is None:
            raise SimError(f"ring {ring.id!r} owned by unknown tenant {ring.owner!r}")
        if self.topology is Topology.AGGREGATION:
            if not owner.is_vswitch:
                raise SimError(f"ring {ring.id!r}: in aggregation all rings belong to the vswitch")
            if ring.dest is not None:
                dest = self.tenants.get(ring.dest)
                if dest is None or not dest.networking or dest.is_vswitch:
                    raise SimError(f"ring {ring.id!r}: dest {ring.dest!r} is not a networking tenant")
        elif not owner.networking:
            raise SimError(f"ring {ring.id!r}: owner {owner.id!r} is not a networking tenant")
        ring.buffer_base = self._reserve(ring.capacity * ring.entry_size)
        ring.desc_base = self._reserve(ring.capacity * self.geometry.line_size)
        self.rings[ring.id] = ring

    def _sources(self, tid: str) -> list[RxRing]:
        ten = self.tenants[tid]
        if ten.is_vswitch:
            return list(self.rings.values())
        if self.topology is Topology.AGGREGATION:
            q = self.virtio.get(tid)
            return [q] if q else []
        return [r for r in self.rings.values() if r.owner == tid]

    # -- NIC side --------------------------------------------------------

    def nic_inject(self, ring: RxRing, traffic: TrafficSpec, dt: float) -> int:
        """DMA the packets that arrive during `dt` into `ring`; returns arrivals."""
        if dt <= 0:
            raise SimError("dt must be positive")
        x = traffic.rate_at(self.t) * dt + traffic.carry
        n = int(x)
        traffic.carry = x - n
        if n == 0:
            return 0
        ls = self.geometry.line_size
        lines = -(-traffic.packet_size // ls)
        if lines * ls > ring.entry_size:
            raise SimError(f"ring {ring.id!r}: {traffic.packet_size}-byte packet exceeds entry_size")
        write = self.cache.ddio_write
        for _ in range(n):
            ring.injected += 1
            if ring.occupancy >= ring.capacity:
                ring.drops += 1
                continue
            slot = ring.head
            ring.head = (slot + 1) % ring.capacity
            base = ring.buffer_base + slot * ring.entry_size
            for i in range(lines):
                write(base + i * ls)
            if ring.descriptors:
                write(ring.desc_base + slot * ls)
            ring.slot_lines[slot] = lines
            ring.occupancy += 1
        return n

    # -- core side -------------------------------------------------------

    def _app_lines(self, ten: TenantDescriptor, rng: random.Random) -> list[tuple[int, bool]]:
        """Addresses (and write flags) a networking tenant touches per packet."""
        wl = ten.workload
        base, size = self._region[ten.id]
        ls = self.geometry.line_size
        if wl.kind is WorkloadKind.PACKET_FORWARD:
            entry = wl.flow_entry_bytes
            n_entries = max(1, size // entry)
            out = []
            for _ in range(wl.lookups()):
                e = int(rng.random() * wl.flow_count) % n_entries
                start = base + e * entry
                out += [(a, False) for a in range(start - start % ls, start + entry, ls)]
            return out
        n_lines = max(1, size // ls)
        wr = wl.write_ratio
        return [(base + int(rng.random() * n_lines) * ls, wr > 0 and rng.random() < wr)
                for _ in range(wl.accesses_per_packet)]

    def consume_packets(self, tid: str, dt: float) -> tuple[int, float]:
        """Drain queued packets of a networking tenant or the vswitch within its cycle budget."""
        ten = self.tenants[tid]
        if not ten.drains_queues:
            raise SimError(f"tenant {tid!r} does not process packets")
        tm = self.timing
        budget = len(ten.cores) * tm.freq_hz * dt - self._debt[tid]
        sources = self._sources(tid)
        if not sources or budget <= 0:
            self._debt[tid] = max(0.0, -budget)
            return 0, 0.0
        cache = self.cache
        access = cache.core_access
        clean = cache.mark_clean
        read_out = cache.ddio_read
        migrate = cache.migrate
        mask = cache.masks[tid]
        ls = self.geometry.line_size
        hit_c, mem_c = tm.llc_hit_cycles, tm.mem_cycles
        base_cycles = tm.per_packet_base * tm.cpi_base
        rng = self._rng[tid]
        stats = self.tenant_stats[tid]
        cores = ten.cores
        rr = self._rr[tid]
        used = 0.0
        processed = 0
        n_src = len(sources)
        while used < budget:
            ring = None
            for k in range(n_src):
                cand = sources[(rr + k) % n_src]
                if cand.occupancy:
                    ring = cand
                    rr = (rr + k + 1) % n_src
                    break
            if ring is None:
                break
            slot = ring.tail
            lines = ring.slot_lines[slot]
            ring.occupancy -= 1
            ring.processed += 1
            payload = ring.buffer_base + slot * ring.entry_size
            addrs = [payload + i * ls for i in range(lines)]
            cyc = base_cycles
            refs = misses = 0
            if ring.descriptors:
                d = ring.desc_base + slot * ls
                refs += 1
                if access(d, mask) is Access.HIT:
                    cyc += hit_c
                else:
                    cyc += mem_c
                    misses += 1
                clean(d)
            for a in addrs:
                refs += 1
                if access(a, mask) is Access.HIT:
                    cyc += hit_c
                else:
                    cyc += mem_c
                    misses += 1
            for a, w in self._app_lines(ten, rng):
                refs += 1
                if access(a, mask, w) is Access.HIT:
                    cyc += hit_c
                else:
                    cyc += mem_c
                    misses += 1
            if ten.is_vswitch and ring.dest is not None:
                q = self.virtio[ring.dest]
                if q.occupancy >= q.capacity:
                    q.injected += 1
                    q.drops += 1
                else:
                    q.injected += 1
                    qslot = q.head
                    q.head = (qslot + 1) % q.capacity
                    qbase = q.buffer_base + qslot * q.entry_size
                    for i in range(lines):
                        refs += 1
                        if access(qbase + i * ls, mask, True) is Access.HIT:
                            cyc += hit_c
                        else:
                            cyc += mem_c
                            misses += 1
                    q.slot_lines[qslot] = lines
                    q.occupancy += 1
            else:
                for a in addrs:
                    read_out(a)
            for a in addrs:
                clean(a)
            if self.rx_writeback:
                for a in addrs:
                    migrate(a, mask)
                if ring.descriptors:
                    migrate(ring.desc_base + slot * ls, mask)
            core = cores[processed % len(cores)]
            cs = self.core_stats[core]
            instr = tm.per_packet_base + refs
            cs[0] += instr
            cs[1] += cyc
            cs[2] += refs
            cs[3] += misses
            stats.instructions += instr
            stats.cycles += cyc
            stats.refs += refs
            stats.misses += misses
            stats.ops += 1
            used += cyc
            processed += 1
        self._rr[tid] = rr
        self._debt[tid] = max(0.0, used - budget)
        return processed, used

    def step_compute(self, tid: str, dt: float) -> tuple[float, float]:
        """Run a non-networking tenant for `dt`; returns (instructions, cycles)."""
        ten = self.tenants[tid]
        if ten.drains_queues:
            raise SimError(f"tenant {tid!r} is a networking tenant")
        wl = ten.workload
        tm = self.timing
        cache = self.cache
        access = cache.core_access
        mask = cache.masks[tid]
        ls = self.geometry.line_size
        base, size = self._region[tid]
        n_lines = max(1, min(size, wl.working_set) // ls)
        rnd = self._rng[tid].random
        per_access = 1.0 / wl.mem_ratio
        plain = (per_access - 1.0) * tm.cpi_base
        hit_c, mem_c = plain + tm.llc_hit_cycles, plain + tm.mem_cycles
        wr = wl.write_ratio
        streaming = wl.kind is WorkloadKind.STREAMING
        stats = self.tenant_stats[tid]
        total_i = total_c = 0.0
        for core in ten.cores:
            budget = tm.freq_hz * dt - self._debt[core]
            used = 0.0
            n = misses = 0
            pos = self._stream_pos[tid]
            while used < budget:
                if streaming:
                    pos = pos + 1 if pos + 1 < n_lines else 0
                    line = pos
                else:
                    line = int(rnd() * n_lines)
                if access(base + line * ls, mask, wr > 0 and rnd() < wr) is Access.HIT:
                    used += hit_c
                else:
                    used += mem_c
                    misses += 1
                n += 1
            self._stream_pos[tid] = pos
            self._debt[core] = used - budget if n else max(0.0, -budget)
            cs = self.core_stats[core]
            instr = n * per_access
            cs[0] += instr
            cs[1] += used
            cs[2] += n
            cs[3] += misses
            stats.instructions += instr
            stats.cycles += used
            stats.refs += n
            stats.misses += misses
            stats.ops += n
            total_i += instr
            total_c += used
        return total_i, total_c

    # -- scenario control ------------------------------------------------

    def apply_event(self, ev: ScenarioEvent) -> bool:
        """Apply one timed change; returns True if the tenant set changed."""
        kind = ev.kind
        if kind not in EVENT_KINDS:
            raise SimError(f"unknown event kind {kind!r}")
        if kind == "noop":
            return False
        if kind in ("set_rate", "set_packet_size"):
            streams = [tr for tr in self.traffic if tr.ring == ev.target]
            if not streams:
                raise SimError(f"event {kind}: no traffic on ring {ev.target!r}")
            for tr in streams:
                if kind == "set_rate":
                    tr.rate = float(ev.value)
                    tr.schedule = []
                else:
                    tr.packet_size = int(ev.value)
                tr.validate()
            return False
        if kind == "set_ddio_ways":
            self.cache.set_mask(DDIO, top_mask(self.geometry.ways, int(ev.value)))
            return False
        if kind == "add_tenant":
            ten = ev.value
            self._add_tenant(ten)
            self._check_topology()
            return True
        ten = self.tenants.get(ev.target)
        if ten is None:
            raise SimError(f"event {kind}: unknown tenant {ev.target!r}")
        if kind == "remove_tenant":
            if ten.is_vswitch:
                raise SimError("the vswitch cannot be removed")
            del self.tenants[ten.id]
            self.cache.masks.pop(ten.id, None)
            self.virtio.pop(ten.id, None)
            gone = {r.id for r in self.rings.values() if r.owner == ten.id}
            for rid in gone:
                del self.rings[rid]
            self.traffic = [tr for tr in self.traffic if tr.ring not in gone]
            for r in self.rings.values():
                if r.dest == ten.id:
                    r.dest = None
            self.tenants_changed = True
            return True
        wl = ten.workload
        if kind == "set_flow_count":
            wl.flow_count = int(ev.value)
        elif kind == "set_working_set":
            wl.working_set = int(ev.value)
        elif kind == "set_mem_ratio":
            wl.mem_ratio = float(ev.value)
        wl.validate(self.geometry.line_size)
        base, _ = self._region[ten.id]
        need = wl.footprint()
        if need > self._reserved[ten.id]:
            base = self._reserve(need)
            self._reserved[ten.id] = need
        self._region[ten.id] = (base, need)
        return False

    def step(self, dt: float = TICK) -> None:
        for tr in self.traffic:
            self.nic_inject(self.rings[tr.ring], tr, dt)
        for tid, ten in self.tenants.items():
            if ten.drains_queues:
                self.consume_packets(tid, dt)
            else:
                self.step_compute(tid, dt)
        self.t += dt

    def run(self, duration: float, dt: float = TICK) -> None:
        for _ in range(round(duration / dt)):
            self.step(dt)

    def pop_tenants_changed(self) -> bool:
        changed, self.tenants_changed = self.tenants_changed, False
        return changed

    def tenant_mask(self, tid: str) -> int:
        return self.cache.masks[tid]
