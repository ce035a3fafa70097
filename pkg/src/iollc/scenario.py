"""Scenario configuration, runs, metric records and run comparison.

A scenario is one TOML or JSON file::

    name = "leaky-dma"
    duration = 8.0
    seed = 1
    mode = "ioca"              # baseline | core_only | ioca
    topology = "slicing"       # or aggregation

    [geometry]   ways, sets, line_size, slices
    [timing]     freq_hz, cpi_base, llc_hit_cycles, mem_cycles, per_packet_base
    [controller] threshold_stable, threshold_miss_low, ddio_ways_min, ... interval

    [[tenants]]  id, priority, networking, cores, ways, mask (int or way list)
    [tenants.workload] kind, working_set, mem_ratio, flow_count, ...
    [[rings]]    id, owner, capacity, entry_size, dest
    [[traffic]]  ring, rate, packet_size, start, stop, schedule, burst_on, burst_off
    [[events]]   t, kind, target, value
"""
from __future__ import annotations

import copy
import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

from ._compat import TOMLDecodeError, loads as toml_loads
from .cache import DDIO, CacheError, LlcGeometry, way_mask
from .controller import AllocationError, Controller, ControllerConfig, FsmState, IntervalReport, TenantRecord
from .telemetry import SimCounterSource
from .workload import (
    EVENT_KINDS, TICK, CoreTimingParams, HostSim, Priority, RxRing, ScenarioEvent, SimError, TenantDescriptor, Topology,
    TrafficSpec, WorkloadSpec,
)

MODES = ("baseline", "core_only", "ioca")
HW_DEFAULT_DDIO_WAYS = 2


class ConfigError(ValueError):
    """Invalid scenario configuration; ``errors`` holds one message per offending field."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("invalid scenario:\n  " + "\n  ".join(self.errors))


@dataclass
class ScenarioConfig:
    name: str = "scenario"
    geometry: LlcGeometry = field(default_factory=LlcGeometry)
    topology: Topology = Topology.SLICING
    timing: CoreTimingParams = field(default_factory=CoreTimingParams)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    tenants: list[TenantDescriptor] = field(default_factory=list)
    rings: list[RxRing] = field(default_factory=list)
    traffic: list[TrafficSpec] = field(default_factory=list)
    events: list[ScenarioEvent] = field(default_factory=list)
    duration: float = 1.0
    seed: int = 0
    mode: str = "ioca"
    steady_start: Optional[float] = None
    rx_writeback: bool = False
    virtio_capacity: int = 256

    def with_(self, **kw) -> "ScenarioConfig":
        cfg = copy.deepcopy(self)
        for k, v in kw.items():
            setattr(cfg, k, v)
        return cfg

    @property
    def steady_from(self) -> float:
        return self.duration / 2 if self.steady_start is None else self.steady_start

    def tenant_ids(self) -> list[str]:
        ids = [t.id for t in self.tenants]
        ids += [e.value.id for e in self.events if e.kind == "add_tenant" and isinstance(e.value, TenantDescriptor)]
        return ids

    def validate(self) -> None:
        errors = []
        if not self.duration > 0:
            errors.append(f"duration: must be > 0, got {self.duration}")
        if self.mode not in MODES:
            errors.append(f"mode: must be one of {', '.join(MODES)}, got {self.mode!r}")
        try:
            self.controller.validate(self.geometry.ways)
        except AllocationError as exc:
            errors.append(f"controller: {exc}")
        interval_ticks = self.controller.interval / TICK
        if abs(interval_ticks - round(interval_ticks)) > 1e-9:
            errors.append(f"controller.interval: must be a multiple of {TICK} s")
        if sum(t.ways for t in self.tenants) > self.geometry.ways:
            errors.append(f"tenants: way requests exceed the {self.geometry.ways}-way LLC")
        known = {t.id for t in self.tenants}
        for i, ev in enumerate(self.events):
            if ev.t < 0:
                errors.append(f"events[{i}].t: must be >= 0")
            if ev.kind == "add_tenant":
                if not isinstance(ev.value, TenantDescriptor):
                    errors.append(f"events[{i}].value: add_tenant needs a tenant table")
                else:
                    known.add(ev.value.id)
            elif ev.kind in ("set_flow_count", "set_working_set", "set_mem_ratio", "remove_tenant"):
                if ev.target not in known:
                    errors.append(f"events[{i}].target: unknown tenant {ev.target!r}")
        if not errors:
            try:
                _build_host(self)
            except (SimError, CacheError) as exc:
                errors.append(f"tenants/rings/traffic: {exc}")
        if errors:
            raise ConfigError(errors)


# -- parsing ------------------------------------------------------------------------


def _fields(cls) -> set[str]:
    return {f.name for f in dataclasses.fields(cls)}


def _make(cls, data: Any, where: str, errors: list, skip: Sequence[str] = (), **extra):
    if not isinstance(data, Mapping):
        errors.append(f"{where}: expected a table, got {type(data).__name__}")
        return None
    allowed = _fields(cls) - set(skip)
    unknown = sorted(set(data) - allowed - set(extra))
    for k in unknown:
        errors.append(f"{where}.{k}: unknown field")
    kw = {k: v for k, v in data.items() if k in allowed}
    kw.update(extra)
    try:
        obj = cls(**kw)
    except (TypeError, ValueError) as exc:
        errors.append(f"{where}: {exc}")
        return None
    return obj


def _check(obj, where: str, errors: list, *args) -> None:
    try:
        obj.validate(*args)
    except (SimError, CacheError, ValueError, TypeError) as exc:
        errors.append(f"{where}: {exc}")


def _parse_mask(v, where: str, errors: list) -> int:
    if isinstance(v, int):
        return v
    if isinstance(v, list) and all(isinstance(x, int) for x in v):
        return way_mask(v)
    errors.append(f"{where}: mask must be an integer or a list of way indices")
    return 0


def _parse_tenant(row: Any, where: str, errors: list, line_size: int) -> Optional[TenantDescriptor]:
    if not isinstance(row, Mapping):
        errors.append(f"{where}: expected a table")
        return None
    wl = _make(WorkloadSpec, row.get("workload", {}), f"{where}.workload", errors)
    if wl is not None:
        _check(wl, f"{where}.workload", errors, line_size)
    mask = _parse_mask(row.get("mask", 0), f"{where}.mask", errors)
    t = _make(TenantDescriptor, {k: v for k, v in row.items() if k not in ("workload", "mask")}, where, errors,
              workload=wl or WorkloadSpec(), mask=mask)
    if t is None:
        return None
    try:
        t.priority = Priority(t.priority.upper() if isinstance(t.priority, str) else t.priority)
    except (ValueError, AttributeError):
        errors.append(f"{where}.priority: must be PS, BE or VSWITCH, got {t.priority!r}")
    if not isinstance(t.cores, list) or not t.cores or not all(isinstance(c, int) and c >= 0 for c in t.cores):
        errors.append(f"{where}.cores: must be a non-empty list of core ids")
    if not isinstance(t.ways, int) or t.ways < 1:
        errors.append(f"{where}.ways: must be a positive integer")
    return t


def parse_config(data: Mapping) -> ScenarioConfig:
    """Build and validate a ScenarioConfig from a decoded TOML/JSON document."""
    errors: list[str] = []
    top = {"name", "duration", "seed", "mode", "topology", "steady_start", "geometry", "timing", "controller",
           "tenants", "rings", "traffic", "events",
           "rx_writeback", "virtio_capacity"}
    for k in sorted(set(data) - top):
        errors.append(f"{k}: unknown field")
    geometry = None
    try:
        geometry = _make(LlcGeometry, data.get("geometry", {}), "geometry", errors)
    except CacheError as exc:
        errors.append(f"geometry: {exc}")
    geometry = geometry or LlcGeometry()
    timing = _make(CoreTimingParams, data.get("timing", {}), "timing", errors)
    if timing is not None:
        _check(timing, "timing", errors)
    ctrl = _make(ControllerConfig, data.get("controller", {}), "controller", errors)
    try:
        topology = Topology(data.get("topology", "slicing"))
    except ValueError:
        errors.append(f"topology: must be aggregation or slicing, got {data.get('topology')!r}")
        topology = Topology.SLICING
    tenants = [_parse_tenant(row, f"tenants[{i}]", errors, geometry.line_size)
               for i, row in enumerate(data.get("tenants", []))]
    rings = []
    for i, row in enumerate(data.get("rings", [])):
        r = _make(RxRing, row, f"rings[{i}]", errors,
                  skip=("buffer_base", "desc_base", "occupancy", "head", "drops", "injected", "processed",
                        "slot_lines"))
        if r is not None:
            _check(r, f"rings[{i}]", errors)
            rings.append(r)
    traffic = []
    for i, row in enumerate(data.get("traffic", [])):
        tr = _make(TrafficSpec, row, f"traffic[{i}]", errors, skip=("carry",))
        if tr is not None:
            try:
                tr.schedule = [(float(a), float(b)) for a, b in tr.schedule]
            except (TypeError, ValueError):
                errors.append(f"traffic[{i}].schedule: must be a list of [t, rate] pairs")
                tr.schedule = []
            _check(tr, f"traffic[{i}]", errors)
            traffic.append(tr)
    events = []
    for i, row in enumerate(data.get("events", [])):
        if isinstance(row, Mapping) and row.get("kind") == "add_tenant":
            val = _parse_tenant(row.get("value"), f"events[{i}].value", errors, geometry.line_size)
            row = {**row, "value": val}
        ev = _make(ScenarioEvent, row, f"events[{i}]", errors)
        if ev is not None:
            if ev.kind not in EVENT_KINDS:
                errors.append(f"events[{i}].kind: unknown event kind {ev.kind!r}")
            try:
                ev.t = float(ev.t)
            except (TypeError, ValueError):
                errors.append(f"events[{i}].t: must be a number")
            events.append(ev)
    cfg = ScenarioConfig(
        name=str(data.get("name", "scenario")),
        geometry=geometry,
        topology=topology,
        timing=timing or CoreTimingParams(),
        controller=ctrl or ControllerConfig(),
        tenants=[t for t in tenants if t is not None],
        rings=rings,
        traffic=traffic,
        events=sorted(events, key=lambda e: e.t),
        mode=data.get("mode", "ioca"),
        steady_start=data.get("steady_start"),
        rx_writeback=bool(data.get("rx_writeback", False)),
    )
    for key, conv in (("duration", float), ("seed", int), ("virtio_capacity", int)):
        if key in data:
            try:
                setattr(cfg, key, conv(data[key]))
            except (TypeError, ValueError):
                errors.append(f"{key}: expected {conv.__name__}, got {data[key]!r}")
    if errors:
        raise ConfigError(errors)
    cfg.validate()
    return cfg


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"{path}: {exc.strerror or exc}"]) from exc
    try:
        data = json.loads(text) if path.suffix == ".json" else toml_loads(text)
    except (json.JSONDecodeError, TOMLDecodeError) as exc:
        raise ConfigError([f"{path}: {exc}"]) from exc
    return parse_config(data)


# -- records --------------------------------------------------------------------------


TENANT_METRICS = ("ipc", "llc_miss_rate", "latency_proxy", "throughput", "ways")
RING_METRICS = ("delivered", "drops")
CHIP_COLUMNS = ("t", "fsm_state", "ddio_ways", "ddio_hit", "ddio_miss", "ddio_evictions",
                "mem_read_Bps", "mem_write_Bps", "arc", "actions")


@dataclass
class TenantMetrics:
    ipc: float = 0.0
    llc_miss_rate: float = 0.0
    latency_proxy: float = 0.0
    throughput: float = 0.0
    ways: int = 0


@dataclass
class RingMetrics:
    delivered: float = 0.0
    drops: int = 0


@dataclass
class IntervalRecord:
    t: float
    fsm_state: str
    ddio_ways: int
    ddio_hit: int
    ddio_miss: int
    ddio_evictions: int
    mem_read_Bps: float
    mem_write_Bps: float
    tenants: dict[str, TenantMetrics] = field(default_factory=dict)
    rings: dict[str, RingMetrics] = field(default_factory=dict)
    arc: Optional[int] = None
    actions: str = ""


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def csv_columns(tenants: Sequence[str], rings: Sequence[str]) -> list[str]:
    cols = list(CHIP_COLUMNS)
    cols += [f"{t}:{m}" for t in tenants for m in TENANT_METRICS]
    cols += [f"{r}:{m}" for r in rings for m in RING_METRICS]
    return cols


def records_to_csv(records: Sequence[IntervalRecord], tenants: Sequence[str], rings: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_columns(tenants, rings))
    for r in records:
        row = [_fmt(getattr(r, c)) for c in CHIP_COLUMNS]
        for t in tenants:
            tm = r.tenants.get(t)
            row += [_fmt(getattr(tm, m)) if tm else "" for m in TENANT_METRICS]
        for rid in rings:
            rm = r.rings.get(rid)
            row += [_fmt(getattr(rm, m)) if rm else "" for m in RING_METRICS]
        w.writerow(row)
    return buf.getvalue()


def records_from_csv(text: str) -> list[IntervalRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][:len(CHIP_COLUMNS)] != list(CHIP_COLUMNS):
        raise ValueError("not an interval-record CSV")
    header = rows[0]
    out = []
    for row in rows[1:]:
        val = dict(zip(header, row))
        rec = IntervalRecord(
            t=float(val["t"]), fsm_state=val["fsm_state"], ddio_ways=int(val["ddio_ways"]),
            ddio_hit=int(val["ddio_hit"]), ddio_miss=int(val["ddio_miss"]),
            ddio_evictions=int(val["ddio_evictions"]), mem_read_Bps=float(val["mem_read_Bps"]),
            mem_write_Bps=float(val["mem_write_Bps"]), arc=int(val["arc"]) if val["arc"] else None,
            actions=val["actions"],
        )
        for col in header[len(CHIP_COLUMNS):]:
            name, metric = col.rsplit(":", 1)
            if val[col] == "":
                continue
            if metric in TENANT_METRICS:
                tm = rec.tenants.setdefault(name, TenantMetrics())
                setattr(tm, metric, int(val[col]) if metric == "ways" else float(val[col]))
            else:
                rm = rec.rings.setdefault(name, RingMetrics())
                setattr(rm, metric, int(val[col]) if metric == "drops" else float(val[col]))
        out.append(rec)
    return out


# -- running --------------------------------------------------------------------------


@dataclass
class RunResult:
    config: ScenarioConfig
    records: list[IntervalRecord]
    summary: dict
    host: HostSim
    reports: list[IntervalReport] = field(default_factory=list)

    def csv(self) -> str:
        return records_to_csv(self.records, self.config.tenant_ids(), self.ring_ids)

    @property
    def ring_ids(self) -> list[str]:
        return [r.id for r in self.config.rings]

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "records.csv").write_text(self.csv())
        (out / "summary.json").write_text(json.dumps(self.summary, indent=2, sort_keys=True) + "\n")
        return out


def _build_host(cfg: ScenarioConfig, ddio_ways: int = HW_DEFAULT_DDIO_WAYS) -> HostSim:
    c = copy.deepcopy(cfg)
    return HostSim(c.geometry, c.tenants, c.rings, c.traffic, c.timing, c.topology, seed=c.seed,
                   ddio_ways=ddio_ways, ddio_bounds=(c.controller.ddio_ways_min, c.controller.ddio_ways_max),
                   virtio_capacity=c.virtio_capacity, rx_writeback=c.rx_writeback)


def _controller_config(cfg: ScenarioConfig, mode: str) -> ControllerConfig:
    cc = copy.deepcopy(cfg.controller)
    if mode == "core_only":
        cc.io_demand = False
        cc.shuffle = False
    return cc


def _tenant_records(host: HostSim) -> list[TenantRecord]:
    return [TenantRecord(t.id, tuple(t.cores), t.priority, t.networking, t.ways, host.cache.masks.get(t.id, 0),
                         t.workload.footprint()) for t in host.tenants.values()]


def run_scenario(cfg: ScenarioConfig, mode: Optional[str] = None, seed: Optional[int] = None) -> RunResult:
    """Simulate `cfg` for its full duration, one record per control interval."""
    mode = mode or cfg.mode
    if mode not in MODES:
        raise ConfigError([f"mode: must be one of {', '.join(MODES)}, got {mode!r}"])
    if seed is not None or mode != cfg.mode:
        cfg = cfg.with_(seed=cfg.seed if seed is None else seed, mode=mode)
    cfg.validate()
    cc = _controller_config(cfg, mode)
    host = _build_host(cfg, HW_DEFAULT_DDIO_WAYS if mode == "baseline" else cc.ddio_ways_init)
    ctrl = None
    if mode != "baseline":
        ctrl = Controller(SimCounterSource(host), host.cache, cfg.geometry, lambda: _tenant_records(host), cc,
                          cfg.topology)
        ctrl.start()
        host.pop_tenants_changed()

    ticks_per_interval = round(cc.interval / TICK)
    total_ticks = max(1, round(cfg.duration / TICK))
    events = list(copy.deepcopy(cfg.events))
    ev_i = 0
    records: list[IntervalRecord] = []
    reports: list[IntervalReport] = []
    ls = cfg.geometry.line_size
    prev = _counters(host)
    tick = 0
    while tick < total_ticks:
        n = min(ticks_per_interval, total_ticks - tick)
        for _ in range(n):
            while ev_i < len(events) and events[ev_i].t <= host.t + 1e-9:
                host.apply_event(events[ev_i])
                ev_i += 1
            host.step(TICK)
            tick += 1
        report = None
        if ctrl is not None:
            report = ctrl.run_interval(host.pop_tenants_changed())
            reports.append(report)
        cur = _counters(host)
        records.append(_record(host, prev, cur, n * TICK, report, ls))
        prev = cur
    return RunResult(cfg, records, _summary(cfg, mode, host, records, reports), host, reports)


def _counters(host: HostSim) -> dict:
    c = host.cache
    return {
        "ddio_hit": c.ddio_hit, "ddio_miss": c.ddio_miss, "ev": c.traffic.ddio_evictions,
        "rd": c.traffic.reads_bytes, "wr": c.traffic.writes_bytes,
        "tenants": {tid: dataclasses.replace(s) for tid, s in host.tenant_stats.items()},
        "rings": {rid: (r.processed, r.drops) for rid, r in host.rings.items()},
    }


def _record(host: HostSim, a: dict, b: dict, dt: float, report: Optional[IntervalReport], ls: int) -> IntervalRecord:
    tenants = {}
    for tid, s in b["tenants"].items():
        if tid not in host.tenants:
            continue
        p = a["tenants"].get(tid)
        d_ops = s.ops - (p.ops if p else 0)
        d_i = s.instructions - (p.instructions if p else 0)
        d_c = s.cycles - (p.cycles if p else 0)
        d_r = s.refs - (p.refs if p else 0)
        d_m = s.misses - (p.misses if p else 0)
        tenants[tid] = TenantMetrics(
            ipc=d_i / d_c if d_c > 0 else 0.0,
            llc_miss_rate=d_m / d_r if d_r > 0 else 0.0,
            latency_proxy=d_c / d_ops if d_ops else 0.0,
            throughput=d_ops / dt,
            ways=host.cache.masks.get(tid, 0).bit_count(),
        )
    rings = {}
    for rid, (proc, drops) in b["rings"].items():
        p_proc, p_drops = a["rings"].get(rid, (0, 0))
        rings[rid] = RingMetrics(delivered=(proc - p_proc) / dt, drops=drops - p_drops)
    return IntervalRecord(
        t=round(host.t, 9),
        fsm_state=report.state.value if report else "",
        ddio_ways=host.cache.ddio_ways,
        ddio_hit=b["ddio_hit"] - a["ddio_hit"],
        ddio_miss=b["ddio_miss"] - a["ddio_miss"],
        ddio_evictions=b["ev"] - a["ev"],
        mem_read_Bps=(b["rd"] - a["rd"]) / dt,
        mem_write_Bps=(b["wr"] - a["wr"]) / dt,
        tenants=tenants,
        rings=rings,
        arc=report.arc if report else None,
        actions=" ".join(str(x) for x in report.actions) if report else "",
    )


def steady_means(records: Sequence[IntervalRecord], since: float) -> dict[str, dict[str, float]]:
    window = [r for r in records if r.t > since + 1e-9] or list(records)
    out: dict[str, dict[str, float]] = {}
    for tid in dict.fromkeys(t for r in window for t in r.tenants):
        rows = [r.tenants[tid] for r in window if tid in r.tenants]
        out[tid] = {m: sum(getattr(x, m) for x in rows) / len(rows) for m in TENANT_METRICS}
    return out


def _summary(cfg: ScenarioConfig, mode: str, host: HostSim, records, reports) -> dict:
    c = host.cache
    states = list(dict.fromkeys(r.state.value for r in reports))
    return {
        "name": cfg.name,
        "mode": mode,
        "seed": cfg.seed,
        "duration": cfg.duration,
        "intervals": len(records),
        "final_state": reports[-1].state.value if reports else None,
        "final_ddio_ways": c.ddio_ways,
        "max_ddio_ways": max([r.ddio_ways for r in records] or [c.ddio_ways]),
        "states_visited": states,
        "arcs": [r.arc for r in reports if r.arc is not None],
        "totals": {
            "ddio_hit": c.ddio_hit, "ddio_miss": c.ddio_miss, "ddio_evictions": c.traffic.ddio_evictions,
            "reads_bytes": c.traffic.reads_bytes, "writes_bytes": c.traffic.writes_bytes,
        },
        "rings": {rid: {"injected": r.injected, "processed": r.processed, "drops": r.drops,
                        "occupancy": r.occupancy} for rid, r in host.rings.items()},
        "steady": steady_means(records, cfg.steady_from),
        "masks": {k: v for k, v in sorted(c.masks.items())} | {DDIO: c.ddio_mask},
    }


# -- comparison ---------------------------------------------------------------------------


def compare(runs: Mapping[str, Sequence[IntervalRecord]], reference: Optional[str] = None, skip: int = 0) -> dict:
    """Per-tenant throughput and latency of each run normalised to `reference`.

    Intervals are paired by index; ``max_degradation`` is the largest
    per-interval latency increase over the reference (0 when never worse).
    """
    if not runs:
        raise ValueError("nothing to compare")
    names = list(runs)
    reference = reference or names[0]
    if reference not in runs:
        raise ValueError(f"unknown reference run {reference!r}")
    ref = list(runs[reference])[skip:]
    ref_tenants = set().union(*(r.tenants for r in ref)) if ref else set()
    out = {"reference": reference, "runs": {}}
    for name in names:
        recs = list(runs[name])[skip:]
        tenants = set().union(*(r.tenants for r in recs)) if recs else set()
        if tenants != ref_tenants:
            raise ValueError(f"run {name!r} has tenants {sorted(tenants)}, reference has {sorted(ref_tenants)}")
        if len(recs) != len(ref):
            raise ValueError(f"run {name!r} has {len(recs)} intervals, reference has {len(ref)}")
        per = {}
        for tid in sorted(tenants):
            pairs = [(a.tenants[tid], b.tenants[tid]) for a, b in zip(recs, ref)
                     if tid in a.tenants and tid in b.tenants]
            thr = sum(p[0].throughput for p in pairs)
            thr_ref = sum(p[1].throughput for p in pairs)
            lat = [p[0].latency_proxy for p in pairs if p[1].latency_proxy > 0]
            lat_ref = [p[1].latency_proxy for p in pairs if p[1].latency_proxy > 0]
            worst = max((x / y - 1.0 for x, y in zip(lat, lat_ref)), default=0.0)
            per[tid] = {
                "throughput_ratio": thr / thr_ref if thr_ref else (1.0 if thr == 0 else math.inf),
                "latency_ratio": sum(lat) / sum(lat_ref) if lat_ref else 1.0,
                "max_degradation": max(0.0, worst),
            }
        out["runs"][name] = per
    return out


def load_run(path) -> list[IntervalRecord]:
    p = Path(path)
    if p.is_dir():
        p = p / "records.csv"
    return records_from_csv(p.read_text())


__all__ = [
    "ConfigError", "ScenarioConfig", "IntervalRecord", "TenantMetrics", "RingMetrics", "RunResult", "MODES",
    "parse_config", "load_config", "run_scenario", "compare", "records_to_csv", "records_from_csv", "load_run",
    "steady_means", "csv_columns", "FsmState",
]
