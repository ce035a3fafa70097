"""Performance-counter snapshots and interval deltas.

A counter source exposes ``init()``, ``snapshot()`` and ``capabilities()``.
``SimCounterSource`` reads the simulator; a hardware backend reading MSRs
would implement the same three calls.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Protocol, Sequence

from .cache import LlcGeometry


class TelemetryError(RuntimeError):
    """The counter backend could not be read."""


@dataclass(frozen=True)
class CoreCounters:
    instructions: float = 0.0
    cycles: float = 0.0
    llc_refs: int = 0
    llc_misses: int = 0


@dataclass(frozen=True)
class CounterSnapshot:
    t: float
    cores: Mapping[int, CoreCounters]
    ddio_hit: int = 0
    ddio_miss: int = 0
    slice_ddio_hit: tuple[int, ...] = ()
    slice_ddio_miss: tuple[int, ...] = ()
    run_id: str = ""


@dataclass(frozen=True)
class Capabilities:
    per_core_ipc: bool = True
    chip_ddio: bool = True
    slice_ddio: bool = False


class CounterSource(Protocol):
    def init(self) -> None: ...

    def snapshot(self) -> CounterSnapshot: ...

    def capabilities(self) -> Capabilities: ...


_run_ids = itertools.count(1)


class SimCounterSource:
    """Counter backend over a :class:`~iollc.workload.HostSim`.

    ``reads`` counts individual counter reads, for work-bound checks.
    """

    def __init__(self, host):
        self.host = host
        self.run_id = f"sim-{next(_run_ids)}"
        self.reads = 0
        self._ready = False

    def init(self) -> None:
        self._ready = True

    def capabilities(self) -> Capabilities:
        return Capabilities(per_core_ipc=True, chip_ddio=True, slice_ddio=True)

    def snapshot(self) -> CounterSnapshot:
        if not self._ready:
            raise TelemetryError("counter source not initialized")
        h = self.host
        cores = {c: CoreCounters(*v) for c, v in h.core_stats.items()}
        self.reads += 4 * len(cores) + 2
        cache = h.cache
        return CounterSnapshot(
            t=h.t,
            cores=cores,
            ddio_hit=cache.ddio_hit,
            ddio_miss=cache.ddio_miss,
            slice_ddio_hit=tuple(cache.slice_ddio_hit),
            slice_ddio_miss=tuple(cache.slice_ddio_miss),
            run_id=self.run_id,
        )


def snapshot(source: CounterSource) -> CounterSnapshot:
    return source.snapshot()


def slice_sampled_ddio(snap: CounterSnapshot, geometry: LlcGeometry, sample: int = 0) -> tuple[int, int]:
    """Chip DDIO hit/miss estimated from a single slice times the slice count."""
    if geometry.slices == 1 or not snap.slice_ddio_hit:
        return snap.ddio_hit, snap.ddio_miss
    return (snap.slice_ddio_hit[sample] * geometry.slices,
            snap.slice_ddio_miss[sample] * geometry.slices)


def _rel(cur: float, prev: Optional[float]) -> float:
    if not prev:
        return 0.0
    return (cur - prev) / prev


@dataclass(frozen=True)
class TenantDelta:
    instructions: float = 0.0
    cycles: float = 0.0
    d_refs: int = 0
    d_misses: int = 0
    ipc: float = 0.0
    miss_rate: float = 0.0
    rel_ipc: float = 0.0
    rel_refs: float = 0.0
    rel_misses: float = 0.0
    d_miss_rate: float = 0.0


@dataclass(frozen=True)
class CounterDelta:
    """Interval deltas.  Relative fields compare this interval with the last one."""

    dt: float
    tenants: Mapping[str, TenantDelta]
    d_ddio_hit: int = 0
    d_ddio_miss: int = 0
    rel_ddio_hit: float = 0.0
    rel_ddio_miss: float = 0.0
    ddio_miss_rate: float = 0.0
    rel_ddio_miss_rate: float = 0.0
    d_refs: int = 0
    d_misses: int = 0
    rel_refs: float = 0.0
    rel_misses: float = 0.0
    t: float = 0.0


def delta(
    prev: CounterSnapshot,
    cur: CounterSnapshot,
    registry: Mapping[str, Sequence[int]],
    last: Optional[CounterDelta] = None,
) -> CounterDelta:
    """Per-tenant and chip deltas between two snapshots of the same run.

    `registry` maps tenant id to its cores; multi-core tenants are summed.
    `last` is the previous interval's delta and supplies the denominators of
    the relative changes (a zero or missing denominator yields 0).
    """
    if prev.run_id != cur.run_id:
        raise TelemetryError(f"snapshots from different runs ({prev.run_id!r} vs {cur.run_id!r})")
    if cur.t < prev.t:
        raise TelemetryError("current snapshot is older than the previous one")
    zero = CoreCounters()
    tenants = {}
    for tid, cores in registry.items():
        di = dc = 0.0
        dr = dm = 0
        for c in cores:
            a = prev.cores.get(c, zero)
            b = cur.cores.get(c, zero)
            di += b.instructions - a.instructions
            dc += b.cycles - a.cycles
            dr += b.llc_refs - a.llc_refs
            dm += b.llc_misses - a.llc_misses
        ipc = di / dc if dc > 0 else 0.0
        miss_rate = dm / dr if dr > 0 else 0.0
        old = last.tenants.get(tid) if last is not None else None
        if old is None:
            tenants[tid] = TenantDelta(di, dc, dr, dm, ipc, miss_rate)
        else:
            tenants[tid] = TenantDelta(
                di, dc, dr, dm, ipc, miss_rate,
                rel_ipc=_rel(ipc, old.ipc),
                rel_refs=_rel(dr, old.d_refs),
                rel_misses=_rel(dm, old.d_misses),
                d_miss_rate=miss_rate - old.miss_rate,
            )
    hit = cur.ddio_hit - prev.ddio_hit
    miss = cur.ddio_miss - prev.ddio_miss
    miss_rate = miss / (hit + miss) if hit + miss else 0.0
    refs = sum(t.d_refs for t in tenants.values())
    misses = sum(t.d_misses for t in tenants.values())
    if last is None:
        return CounterDelta(cur.t - prev.t, tenants, hit, miss, ddio_miss_rate=miss_rate,
                            d_refs=refs, d_misses=misses, t=cur.t)
    return CounterDelta(
        cur.t - prev.t, tenants, hit, miss,
        rel_ddio_hit=_rel(hit, last.d_ddio_hit),
        rel_ddio_miss=_rel(miss, last.d_ddio_miss),
        ddio_miss_rate=miss_rate,
        rel_ddio_miss_rate=_rel(miss_rate, last.ddio_miss_rate),
        d_refs=refs,
        d_misses=misses,
        rel_refs=_rel(refs, last.d_refs),
        rel_misses=_rel(misses, last.d_misses),
        t=cur.t,
    )
