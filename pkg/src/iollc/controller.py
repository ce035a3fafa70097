"""I/O-aware LLC way manager.

Each interval the controller polls the counters, classifies the change
against the previous interval, steps a five-state machine, and re-allocates
LLC ways to DDIO or to tenants.  Tenant masks are contiguous way blocks; the
DDIO mask is anchored at the top ways.  Whenever allocations change, tenant
blocks are laid out again so that DDIO shares ways only with the best-effort
tenants that reference the LLC least.
"""
from __future__ import annotations

import enum
import functools
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .cache import DDIO, LlcGeometry, contiguous_mask, top_mask
from .telemetry import CounterDelta, CounterSource, TelemetryError, TenantDelta, delta, slice_sampled_ddio
from .workload import Priority, Topology

log = logging.getLogger(__name__)


class AllocationError(ValueError):
    pass


class FsmState(str, enum.Enum):
    LOW_KEEP = "LowKeep"
    HIGH_KEEP = "HighKeep"
    IO_DEMAND = "IoDemand"
    CORE_DEMAND = "CoreDemand"
    RECLAIM = "Reclaim"


class PollKind(str, enum.Enum):
    STABLE = "Stable"
    IPC_ONLY = "IpcOnly"
    CORE_LLC_DEMAND = "CoreLlcDemand"
    SHUFFLE_FIRST = "ShuffleFirst"
    UNSTABLE = "Unstable"


@dataclass(frozen=True)
class PollOutcome:
    kind: PollKind
    tenant: Optional[str] = None


@dataclass
class ControllerConfig:
    """Controller thresholds.

    ``threshold_miss_low`` is a per-second DDIO miss count and is scaled by
    ``interval``.  ``threshold_significant`` (defaults to
    ``threshold_stable``) decides what counts as an increase or decrease in
    the state machine.  ``io_demand`` and ``shuffle`` switch off the I/O-aware
    parts, which yields the core-only variant.  With ``initial_layout="keep"``
    the masks found in the tenant records are kept at start-up (when they are
    a valid disjoint contiguous layout) instead of being planned afresh.
    ``core_hook`` names the stand-in for the external core-side allocator
    ("spare": one spare way per request, "none": ignore the request).
    """

    threshold_stable: float = 0.03
    threshold_miss_low: float = 1_000_000
    ddio_ways_min: int = 1
    ddio_ways_max: int = 6
    interval: float = 1.0
    ddio_ways_init: int = 2
    threshold_significant: Optional[float] = None
    core_demand_exit_on_rate: bool = True
    io_demand: bool = True
    shuffle: bool = True
    slice_sampling: bool = False
    initial_layout: str = "plan"
    core_hook: str = "spare"

    def validate(self, ways: int) -> None:
        if not 1 <= self.ddio_ways_min <= self.ddio_ways_max < ways:
            raise AllocationError(
                f"need 1 <= ddio_ways_min <= ddio_ways_max < {ways}, "
                f"got {self.ddio_ways_min}/{self.ddio_ways_max}")
        if not self.ddio_ways_min <= self.ddio_ways_init <= self.ddio_ways_max:
            raise AllocationError(f"ddio_ways_init {self.ddio_ways_init} outside DDIO bounds")
        if not 0 < self.threshold_stable < 1:
            raise AllocationError(f"threshold_stable must be in (0, 1), got {self.threshold_stable}")
        if self.initial_layout not in ("plan", "keep"):
            raise AllocationError(f"initial_layout must be 'plan' or 'keep', got {self.initial_layout!r}")
        if self.core_hook not in CORE_HOOKS:
            raise AllocationError(f"core_hook must be one of {', '.join(CORE_HOOKS)}, got {self.core_hook!r}")
        if self.threshold_miss_low < 0 or self.interval <= 0:
            raise AllocationError("threshold_miss_low must be >= 0 and interval > 0")

    @property
    def miss_low(self) -> float:
        return self.threshold_miss_low * self.interval

    @property
    def significant(self) -> float:
        return self.threshold_stable if self.threshold_significant is None else self.threshold_significant


# -- tenant registry ----------------------------------------------------


@dataclass
class TenantRecord:
    """One row of the tenant affiliation file."""

    id: str
    cores: tuple[int, ...]
    priority: Priority = Priority.BE
    networking: bool = False
    ways: int = 1
    mask: int = 0
    footprint: int = 0


@dataclass
class TenantEntry:
    id: str
    priority: Priority
    networking: bool
    cores: tuple[int, ...]
    ways: int
    base_ways: int
    mask: int = 0
    footprint: int = 0
    last: Optional[TenantDelta] = None

    @property
    def protected(self) -> bool:
        return self.priority is not Priority.BE


class TenantTable:
    def __init__(self, records: Iterable[TenantRecord], total_ways: int, ddio_ways: int):
        self.total_ways = total_ways
        self.ddio_ways = ddio_ways
        self.rows: dict[str, TenantEntry] = {}
        for r in records:
            if r.id in self.rows:
                raise AllocationError(f"duplicate tenant {r.id!r}")
            self.rows[r.id] = TenantEntry(r.id, Priority(r.priority), bool(r.networking), tuple(r.cores),
                                          r.ways, r.ways, r.mask, r.footprint)

    @property
    def ddio_mask(self) -> int:
        return top_mask(self.total_ways, self.ddio_ways)

    @property
    def used_ways(self) -> int:
        return sum(e.ways for e in self.rows.values())

    @property
    def spare_ways(self) -> int:
        return self.total_ways - self.used_ways

    def overlaps_ddio(self, tid: str) -> bool:
        return bool(self.rows[tid].mask & self.ddio_mask)

    def registry(self) -> dict[str, tuple[int, ...]]:
        return {tid: e.cores for tid, e in self.rows.items()}

    def masks(self) -> dict[str, int]:
        return {tid: e.mask for tid, e in self.rows.items()}

    def vswitch(self) -> Optional[TenantEntry]:
        return next((e for e in self.rows.values() if e.priority is Priority.VSWITCH), None)


# -- work accounting ----------------------------------------------------


class Work:
    """Counts comparisons made by the control path."""

    def __init__(self):
        self.compares = 0

    def sorted(self, items, key):
        def cmp(a, b):
            self.compares += 1
            ka, kb = key(a), key(b)
            return (ka > kb) - (ka < kb)
        return sorted(items, key=functools.cmp_to_key(cmp))

    def best(self, items, key):
        """Element with the smallest key (first on ties)."""
        out = None
        for it in items:
            self.compares += 1
            if out is None or key(it) < key(out):
                out = it
        return out


# -- layout ---------------------------------------------------------------


def _overlap_cost(masks: Mapping[str, int], ddio_mask: int, preference: Sequence[str]) -> tuple:
    """Lexicographic cost: total DDIO overlap, then overlap pushed onto preferred tenants first."""
    per = {tid: (masks[tid] & ddio_mask).bit_count() for tid in preference}
    return (sum(per.values()), tuple(-per[tid] for tid in preference))


def overlap_preference(table: TenantTable, d_refs: Mapping[str, float], work: Optional[Work] = None) -> list[str]:
    """Tenant ids ordered by willingness to share ways with DDIO.

    Best-effort tenants come first, fewest LLC references first; protected
    tenants (PS and the vswitch) only follow as a fallback.
    """
    work = work or Work()
    key = lambda e: (e.protected, d_refs.get(e.id, 0), e.id)  # noqa: E731
    return [e.id for e in work.sorted(table.rows.values(), key)]


def plan_layout(ways: Mapping[str, int], total_ways: int, ddio_ways: int, preference: Sequence[str],
                order: Sequence[str]) -> dict[str, int]:
    """Contiguous disjoint blocks with the least DDIO overlap, landing on preferred tenants.

    Tenants not needed to absorb overlap are packed from way 0 in `order`;
    the overlap group sits right below the spare ways, most preferred on top.
    """
    need = sum(ways.values())
    if need > total_ways:
        raise AllocationError(f"tenants demand {need} ways but the LLC has {total_ways}")
    overlap = max(0, ddio_ways - (total_ways - need))
    group: list[str] = []
    acc = 0
    for tid in preference:
        if acc >= overlap:
            break
        group.append(tid)
        acc += ways[tid]
    chosen = set(group)
    masks = {}
    pos = 0
    for tid in [t for t in order if t not in chosen] + group[::-1]:
        masks[tid] = contiguous_mask(pos, ways[tid])
        pos += ways[tid]
    return masks


def _valid_layout(masks: Mapping[str, int], ways: Mapping[str, int], total_ways: int) -> bool:
    seen = 0
    for tid, n in ways.items():
        m = masks.get(tid, 0)
        if m.bit_count() != n or m >> total_ways or m & seen:
            return False
        low = m & -m
        if m != low * ((1 << n) - 1):
            return False
        seen |= m
    return True


def _resize_in_place(masks: Mapping[str, int], ways: Mapping[str, int], total_ways: int) -> dict[str, int]:
    """Grow/shrink blocks by their edge ways when the neighbours are free."""
    out = dict(masks)
    used = 0
    for m in out.values():
        used |= m
    for tid, n in ways.items():
        m = out.get(tid, 0)
        have = m.bit_count()
        if have == n or not m:
            continue
        others = used & ~m
        start = (m & -m).bit_length() - 1
        while have > n:
            m &= ~(1 << (start + have - 1))
            have -= 1
        while have < n:
            up, down = start + have, start - 1
            if up < total_ways and not others >> up & 1:
                m |= 1 << up
            elif down >= 0 and not others >> down & 1:
                m |= 1 << down
                start = down
            else:
                break
            have += 1
        out[tid] = m
        used = others | m
    return out


def _position_order(table: TenantTable, work: Optional[Work] = None) -> list[str]:
    work = work or Work()
    return work.sorted(table.rows, lambda t: ((table.rows[t].mask & -table.rows[t].mask) or 1 << 62, t))


def shuffle(table: TenantTable, d: Optional[CounterDelta] = None, ddio_mask: Optional[int] = None,
            work: Optional[Work] = None) -> dict[str, int]:
    """New tenant masks that keep way counts and minimise harmful DDIO sharing.

    Keeps the current placement (resized in place if counts changed) when it
    is already as good as the planned one, so tenants do not move needlessly.
    """
    if ddio_mask is not None:
        table.ddio_ways = ddio_mask.bit_count()
    refs = {tid: td.d_refs for tid, td in d.tenants.items()} if d is not None else {}
    for tid, e in table.rows.items():
        if tid not in refs:
            refs[tid] = e.last.d_refs if e.last is not None else e.footprint
    work = work or Work()
    pref = overlap_preference(table, refs, work)
    ways = {tid: e.ways for tid, e in table.rows.items()}
    W = table.total_ways
    dmask = table.ddio_mask
    plan = plan_layout(ways, W, table.ddio_ways, pref, _position_order(table, work))
    best = _overlap_cost(plan, dmask, pref)
    current = _resize_in_place(table.masks(), ways, W)
    work.compares += 2 * len(pref)
    if _valid_layout(current, ways, W) and _overlap_cost(current, dmask, pref) == best:
        return current
    return plan


def init_alloc(table: TenantTable, geometry: LlcGeometry, ddio_ways: Optional[int] = None) -> dict[str, int]:
    """Initial DDIO-aware layout; overlap, if unavoidable, goes to small-footprint BE tenants.

    Returns the assignment including the DDIO mask under the ``DDIO`` key and
    stores tenant masks in `table`.
    """
    if ddio_ways is not None:
        table.ddio_ways = ddio_ways
    if table.total_ways != geometry.ways:
        raise AllocationError("table and geometry disagree on the way count")
    for e in table.rows.values():
        if e.ways < 1:
            raise AllocationError(f"tenant {e.id!r} must request at least one way")
    if table.used_ways > geometry.ways:
        detail = ", ".join(f"{e.id}={e.ways}" for e in table.rows.values())
        raise AllocationError(f"way demands exceed the {geometry.ways}-way LLC: {detail}")
    pref = overlap_preference(table, {tid: e.footprint for tid, e in table.rows.items()})
    masks = plan_layout({t: e.ways for t, e in table.rows.items()}, geometry.ways, table.ddio_ways, pref,
                        list(table.rows))
    for tid, m in masks.items():
        table.rows[tid].mask = m
    return {**masks, DDIO: table.ddio_mask}


def pack_unaware(table: TenantTable) -> dict[str, int]:
    """DDIO-oblivious layout: resize in place, else repack from way 0 in position order."""
    ways = {tid: e.ways for tid, e in table.rows.items()}
    current = _resize_in_place(table.masks(), ways, table.total_ways)
    if _valid_layout(current, ways, table.total_ways):
        return current
    masks, pos = {}, 0
    for tid in _position_order(table):
        masks[tid] = contiguous_mask(pos, ways[tid])
        pos += ways[tid]
    return masks


# -- poll classification ---------------------------------------------------


def classify_poll(d: CounterDelta, table: TenantTable, cfg: ControllerConfig,
                  work: Optional[Work] = None) -> PollOutcome:
    """Decide whether this interval needs the state machine.

    IPC-only changes and core-side LLC demand of a tenant clear of DDIO skip
    it; an LLC-hungry non-networking tenant that shares ways with DDIO is
    handled by shuffling first.
    """
    work = work or Work()
    thr = cfg.threshold_stable
    ddio_changed = abs(d.rel_ddio_hit) > thr or abs(d.rel_ddio_miss) > thr
    any_ipc = any_llc = False
    overlapped, clear = [], []
    for tid, td in d.tenants.items():
        e = table.rows.get(tid)
        work.compares += 3
        ipc = abs(td.rel_ipc) > thr
        llc = abs(td.rel_refs) > thr or abs(td.rel_misses) > thr
        any_ipc |= ipc
        any_llc |= llc
        if e is None or e.networking or e.priority is Priority.VSWITCH or not (ipc and llc):
            continue
        (overlapped if e.mask & table.ddio_mask else clear).append(tid)
    work.compares += 2
    if not (any_ipc or any_llc or ddio_changed):
        return PollOutcome(PollKind.STABLE)
    if any_ipc and not any_llc and not ddio_changed:
        return PollOutcome(PollKind.IPC_ONLY)
    key = lambda t: (-abs(d.tenants[t].rel_misses), t)  # noqa: E731
    if overlapped and ddio_changed and cfg.shuffle:
        return PollOutcome(PollKind.SHUFFLE_FIRST, work.best(overlapped, key))
    if clear and not ddio_changed:
        return PollOutcome(PollKind.CORE_LLC_DEMAND, work.best(clear, key))
    return PollOutcome(PollKind.UNSTABLE)


# -- state machine ---------------------------------------------------------

# Arc labels follow the numbered transitions of the controller design; every
# other (state, signal) pair is a self-loop.
ARCS = {
    1: (FsmState.LOW_KEEP, FsmState.IO_DEMAND),
    2: (FsmState.RECLAIM, FsmState.LOW_KEEP),
    3: (FsmState.LOW_KEEP, FsmState.CORE_DEMAND),
    4: (FsmState.CORE_DEMAND, FsmState.IO_DEMAND),
    5: (FsmState.RECLAIM, FsmState.IO_DEMAND),
    6: (FsmState.IO_DEMAND, FsmState.RECLAIM),
    7: (FsmState.IO_DEMAND, FsmState.CORE_DEMAND),
    8: (FsmState.CORE_DEMAND, FsmState.RECLAIM),
    9: (FsmState.RECLAIM, FsmState.CORE_DEMAND),
    10: (FsmState.IO_DEMAND, FsmState.HIGH_KEEP),
    11: (FsmState.HIGH_KEEP, FsmState.RECLAIM),
    12: (FsmState.HIGH_KEEP, FsmState.CORE_DEMAND),
}


def transition(s: FsmState, d: CounterDelta, ddio_ways: int,
               cfg: ControllerConfig) -> tuple[FsmState, Optional[int]]:
    """Next state and the arc taken (None for a self-loop)."""
    sig = cfg.significant
    miss_high = d.d_ddio_miss > cfg.miss_low
    miss_up = d.rel_ddio_miss > sig
    miss_down = d.rel_ddio_miss < -sig
    hit_down = d.rel_ddio_hit < -sig
    refs_up = d.rel_refs > sig

    if s is FsmState.LOW_KEEP:
        if miss_high:
            return (FsmState.CORE_DEMAND, 3) if hit_down and refs_up else (FsmState.IO_DEMAND, 1)
    elif s is FsmState.CORE_DEMAND:
        balanced = d.rel_ddio_miss_rate < -sig if cfg.core_demand_exit_on_rate else miss_down
        if balanced:
            return FsmState.RECLAIM, 8
        if miss_up and not hit_down:
            return FsmState.IO_DEMAND, 4
    elif s is FsmState.IO_DEMAND:
        if miss_high and ddio_ways >= cfg.ddio_ways_max:
            return FsmState.HIGH_KEEP, 10
        if miss_down:
            return FsmState.RECLAIM, 6
        if hit_down:
            return FsmState.CORE_DEMAND, 7
    elif s is FsmState.HIGH_KEEP:
        if miss_down:
            return FsmState.RECLAIM, 11
        if hit_down:
            return FsmState.CORE_DEMAND, 12
    elif s is FsmState.RECLAIM:
        if miss_up:
            return (FsmState.CORE_DEMAND, 9) if hit_down else (FsmState.IO_DEMAND, 5)
        if ddio_ways <= cfg.ddio_ways_min:
            return FsmState.LOW_KEEP, 2
    return s, None


def fsm_step(s: FsmState, d: CounterDelta, ddio_ways: int, cfg: ControllerConfig) -> FsmState:
    return transition(s, d, ddio_ways, cfg)[0]


# -- re-allocation -----------------------------------------------------------


@dataclass(frozen=True)
class Action:
    kind: str
    target: str = DDIO
    amount: int = 0

    def __str__(self):
        sign = "+" if self.amount > 0 else ""
        return f"{self.kind}:{self.target}{sign}{self.amount if self.amount else ''}"


def select_core_demand(d: CounterDelta, table: TenantTable, topology: Topology,
                       work: Optional[Work] = None) -> Optional[str]:
    """The tenant that gets a core-side way in the CoreDemand state."""
    work = work or Work()
    if Topology(topology) is Topology.AGGREGATION:
        vs = table.vswitch()
        if vs is not None:
            return vs.id
    cands = [t for t, e in table.rows.items() if e.networking and t in d.tenants]
    best = work.best(cands, lambda t: (-d.tenants[t].d_miss_rate, t))
    return best


def reallocate(s: FsmState, d: CounterDelta, table: TenantTable, topology: Topology,
               cfg: ControllerConfig, work: Optional[Work] = None) -> list[Action]:
    """Apply this state's one-way-per-interval change to `table` (counts only)."""
    work = work or Work()
    if s is FsmState.IO_DEMAND:
        if cfg.io_demand and table.ddio_ways < cfg.ddio_ways_max:
            table.ddio_ways += 1
            return [Action("ddio", DDIO, +1)]
        return []
    if s is FsmState.CORE_DEMAND:
        tid = select_core_demand(d, table, topology, work)
        if tid is None:
            log.warning("CoreDemand: no networking tenant to grow")
            return []
        if table.spare_ways < 1:
            log.warning("CoreDemand: no spare way for %s", tid)
            return []
        table.rows[tid].ways += 1
        return [Action("grow", tid, +1)]
    if s is FsmState.RECLAIM:
        if table.ddio_ways > cfg.ddio_ways_min and d.d_ddio_miss <= cfg.miss_low:
            table.ddio_ways -= 1
            return [Action("ddio", DDIO, -1)]
        sig = cfg.significant
        cands = []
        for tid, e in table.rows.items():
            td = d.tenants.get(tid)
            work.compares += 1
            if td is not None and e.ways > e.base_ways and td.rel_refs < -sig:
                cands.append(tid)
        tid = work.best(cands, lambda t: (d.tenants[t].rel_refs, t))
        if tid is not None:
            table.rows[tid].ways -= 1
            return [Action("shrink", tid, -1)]
        return []
    return []


def default_core_hook(tid: str, table: TenantTable, d: CounterDelta) -> list[Action]:
    """Core-side allocator stand-in: one spare way for the demanding tenant, if any."""
    if table.spare_ways >= 1:
        table.rows[tid].ways += 1
        return [Action("grow", tid, +1)]
    return []


def null_core_hook(tid: str, table: TenantTable, d: CounterDelta) -> list[Action]:
    return []


CORE_HOOKS = {"spare": default_core_hook, "none": null_core_hook}


# -- controller loop -----------------------------------------------------------


@dataclass
class IntervalReport:
    t: float
    state: FsmState
    prev_state: FsmState
    outcome: Optional[PollOutcome]
    arc: Optional[int]
    ddio_ways: int
    masks: dict[str, int]
    actions: list[Action] = field(default_factory=list)
    delta: Optional[CounterDelta] = None
    skipped: bool = False
    reads: int = 0
    compares: int = 0


# States whose per-interval action continues while counters are stable.
DRAINING = (FsmState.IO_DEMAND, FsmState.RECLAIM)


class Controller:
    """The polling daemon, minus the process scaffolding.

    `records` returns the current tenant affiliation rows; `actuator` takes
    ``set_mask(actor, mask)`` calls (the simulated LLC provides it).
    """

    def __init__(
        self,
        source: CounterSource,
        actuator,
        geometry: LlcGeometry,
        records: Callable[[], Sequence[TenantRecord]],
        cfg: Optional[ControllerConfig] = None,
        topology: Topology = Topology.SLICING,
        core_hook: Optional[Callable[[str, TenantTable, CounterDelta], list[Action]]] = None,
    ):
        self.cfg = cfg or ControllerConfig()
        self.cfg.validate(geometry.ways)
        self.source = source
        self.actuator = actuator
        self.geometry = geometry
        self.records = records
        self.topology = Topology(topology)
        self.core_hook = core_hook or CORE_HOOKS[self.cfg.core_hook]
        self.state = FsmState.LOW_KEEP
        self.table: Optional[TenantTable] = None
        self.ddio_ways = self.cfg.ddio_ways_init
        self._prev = None
        self._last: Optional[CounterDelta] = None

    @property
    def io_aware(self) -> bool:
        return self.cfg.shuffle

    def start(self) -> None:
        self.source.init()
        self.get_tenant_info()
        self.llc_alloc()
        self._prev = self.source.snapshot()
        self._last = None

    def get_tenant_info(self) -> None:
        old = self.table.rows if self.table is not None else {}
        self.table = TenantTable(self.records(), self.geometry.ways, self.ddio_ways)
        for tid, e in self.table.rows.items():
            if tid in old:
                e.base_ways = old[tid].base_ways
                e.ways = old[tid].ways
                e.mask = old[tid].mask
                e.last = old[tid].last

    def llc_alloc(self) -> None:
        ways = {tid: e.ways for tid, e in self.table.rows.items()}
        keep = self.cfg.initial_layout == "keep" and _valid_layout(self.table.masks(), ways, self.geometry.ways)
        if self.io_aware and not keep:
            init_alloc(self.table, self.geometry)
        else:
            for tid, m in pack_unaware(self.table).items():
                self.table.rows[tid].mask = m
        self._program()

    def _program(self) -> None:
        self.actuator.set_mask(DDIO, top_mask(self.geometry.ways, self.ddio_ways))
        for tid, e in self.table.rows.items():
            self.actuator.set_mask(tid, e.mask)

    def _layout(self, d: Optional[CounterDelta], work: Work) -> bool:
        masks = shuffle(self.table, d, work=work) if self.io_aware else pack_unaware(self.table)
        changed = masks != self.table.masks()
        for tid, m in masks.items():
            self.table.rows[tid].mask = m
        return changed

    def run_interval(self, tenants_changed: bool = False) -> IntervalReport:
        work = Work()
        reads0 = getattr(self.source, "reads", 0)
        if tenants_changed:
            self.get_tenant_info()
            self.llc_alloc()
        try:
            snap = self.source.snapshot()
        except TelemetryError as exc:
            log.warning("telemetry unavailable, interval skipped: %s", exc)
            return IntervalReport(self._prev.t if self._prev else 0.0, self.state, self.state, None, None,
                                  self.ddio_ways, self.table.masks(), skipped=True)
        if self.cfg.slice_sampling:
            hit, miss = slice_sampled_ddio(snap, self.geometry)
            prev_hit, prev_miss = slice_sampled_ddio(self._prev, self.geometry)
            snap_eff = replace(snap, ddio_hit=hit, ddio_miss=miss)
            prev_eff = replace(self._prev, ddio_hit=prev_hit, ddio_miss=prev_miss)
        else:
            snap_eff, prev_eff = snap, self._prev
        d = delta(prev_eff, snap_eff, self.table.registry(), self._last)
        self._prev, self._last = snap, d

        table = self.table
        table.ddio_ways = self.ddio_ways
        outcome = classify_poll(d, table, self.cfg, work)
        prev_state = self.state
        arc = None
        actions: list[Action] = []
        if outcome.kind is PollKind.SHUFFLE_FIRST:
            if self._layout(d, work):
                actions.append(Action("shuffle", outcome.tenant))
        elif outcome.kind is PollKind.CORE_LLC_DEMAND:
            actions += self.core_hook(outcome.tenant, table, d)
        run_fsm = outcome.kind is PollKind.UNSTABLE or (
            outcome.kind in (PollKind.STABLE, PollKind.IPC_ONLY) and self.state in DRAINING)
        if run_fsm:
            nxt, arc = transition(self.state, d, self.ddio_ways, self.cfg)
            if nxt is FsmState.IO_DEMAND and not self.cfg.io_demand:
                nxt, arc = self.state, None
            self.state = nxt
            actions += reallocate(nxt, d, table, self.topology, self.cfg, work)
        self.ddio_ways = table.ddio_ways
        if any(a.kind != "shuffle" for a in actions):
            if self._layout(d, work) and self.io_aware:
                actions.append(Action("shuffle", "layout"))
        for tid, td in d.tenants.items():
            if tid in table.rows:
                table.rows[tid].last = td
        self._program()
        return IntervalReport(
            t=snap.t, state=self.state, prev_state=prev_state, outcome=outcome, arc=arc,
            ddio_ways=self.ddio_ways, masks=table.masks(), actions=actions, delta=d,
            reads=getattr(self.source, "reads", 0) - reads0, compares=work.compares,
        )


# -- affiliation records file ---------------------------------------------------


def _record_from_dict(row: Mapping) -> TenantRecord:
    try:
        return TenantRecord(
            id=str(row["id"]),
            cores=tuple(int(c) for c in row["cores"]),
            priority=Priority(str(row.get("priority", "BE")).upper()),
            networking=bool(row.get("networking", False)),
            ways=int(row.get("ways", 1)),
            mask=int(row.get("mask", 0)),
            footprint=int(row.get("footprint", 0)),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise AllocationError(f"bad affiliation record {dict(row)!r}: {exc}") from exc


def load_affiliations(path) -> list[TenantRecord]:
    """Read tenant affiliation records from a JSON or TOML file."""
    path = Path(path)
    if path.suffix == ".toml":
        from ._compat import loads
        data = loads(path.read_text())
    else:
        data = json.loads(path.read_text())
    rows = data["tenants"] if isinstance(data, Mapping) else data
    return [_record_from_dict(r) for r in rows]


def dump_affiliations(records: Iterable[TenantRecord], path) -> None:
    rows = [{"id": r.id, "cores": list(r.cores), "priority": Priority(r.priority).value,
             "networking": r.networking, "ways": r.ways, "mask": r.mask, "footprint": r.footprint}
            for r in records]
    Path(path).write_text(json.dumps({"tenants": rows}, indent=2) + "\n")

