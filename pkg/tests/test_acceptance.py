"""End-to-end acceptance checks; each prints one PASS/FAIL line."""
import copy
import math
import random
import time
from pathlib import Path

import pytest

from iollc.cache import LlcGeometry, top_mask, way_mask
from iollc.controller import (
    ARCS, Controller, ControllerConfig, FsmState, Priority, TenantRecord, TenantTable, shuffle, transition,
)
from iollc.scenario import load_config, run_scenario
from iollc.telemetry import CoreCounters, CounterDelta, CounterSnapshot, TenantDelta
from oracle import all_block_layouts
from test_cache import run_trace
from test_controller import FSM_TABLE

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def report(capsys):
    def emit(n, name, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {name} -- {detail}")
        assert ok, detail
    return emit


def scenario(name):
    return load_config(SCENARIOS / f"{name}.toml")


def test_1_cache_oracle_equivalence(report):
    t0 = time.perf_counter()
    ok = run_trace(2024, 100_000)
    dt = time.perf_counter() - t0
    report(1, "cache oracle equivalence (4x4, 1e5 ops)", bool(ok) and dt < 5.0,
           f"match={bool(ok)} runtime={dt:.2f}s (limit 5s)")


def test_2_fsm_coverage(report):
    cfg = ControllerConfig()
    arcs, loops, wrong = set(), set(), []
    for state, fields, ways, nxt, arc in FSM_TABLE:
        got = transition(state, CounterDelta(1.0, {}, **fields), ways, cfg)
        if got != (nxt, arc):
            wrong.append((state.value, fields, got))
        if arc is None:
            loops.add(state)
        else:
            arcs.add(arc)
    ok = not wrong and arcs == set(ARCS) and loops == set(FsmState)
    report(2, "FSM transition coverage", ok,
           f"arcs {len(arcs)}/{len(ARCS)}, self-loops {len(loops)}/{len(FsmState)}, mismatches {len(wrong)}")


def test_3_leaky_dma(report):
    cfg = scenario("leaky_dma")
    t0 = time.perf_counter()
    base = run_scenario(cfg, mode="baseline").summary
    ioca = run_scenario(cfg, mode="ioca").summary
    dt = time.perf_counter() - t0
    miss_cut = 1 - ioca["totals"]["ddio_miss"] / base["totals"]["ddio_miss"]
    write_cut = 1 - ioca["totals"]["writes_bytes"] / base["totals"]["writes_bytes"]
    ok = ioca["final_ddio_ways"] > 2 and miss_cut >= 0.30 and write_cut >= 0.05 and dt < 30
    report(3, "leaky DMA", ok,
           f"final ddio_ways={ioca['final_ddio_ways']} miss -{miss_cut:.1%} (>=30%) "
           f"writes -{write_cut:.1%} (>=5%) runtime={dt:.1f}s")


def test_4_ring_size(report):
    cfg = scenario("ring_size")
    delivered = {}
    for cap in (64, 128, 256, 512, 1024):
        c = copy.deepcopy(cfg)
        c.rings[0].capacity = cap
        res = run_scenario(c, mode="baseline")
        delivered[cap] = res.summary["rings"]["rx"]["processed"]
    vals = list(delivered.values())
    monotone = all(a <= b for a, b in zip(vals, vals[1:]))
    ratio = delivered[64] / delivered[1024]
    report(4, "ring-size sensitivity", monotone and ratio < 0.5,
           f"delivered {delivered} monotone={monotone} 64/1024={ratio:.1%} (<50%)")


def test_5_latent_contender(report):
    cfg = scenario("latent_contender")
    disjoint_cfg = copy.deepcopy(cfg)
    disjoint_cfg.tenants[0].mask = way_mask([1, 2])

    def lat(res):
        return res.summary["steady"]["xmem"]["latency_proxy"]

    over = lat(run_scenario(cfg, mode="baseline"))
    disj = lat(run_scenario(disjoint_cfg, mode="baseline"))
    ioca = lat(run_scenario(cfg, mode="ioca"))
    worse = over / disj - 1
    gap = abs(ioca / disj - 1)
    report(5, "latent contender", worse >= 0.10 and gap <= 0.05,
           f"overlapped +{worse:.1%} vs disjoint (>=10%), ioca within {gap:.1%} of disjoint (<=5%)")


def test_6_flow_count(report):
    cfg = scenario("flow_count")
    base = run_scenario(cfg, mode="baseline")
    ioca = run_scenario(cfg, mode="ioca")
    vs = next(t for t in cfg.tenants if t.priority is Priority.VSWITCH)
    entered = "CoreDemand" in ioca.summary["states_visited"]
    extra = max(r.tenants[vs.id].ways for r in ioca.records) - vs.ways
    gain = ioca.summary["steady"][vs.id]["ipc"] / base.summary["steady"][vs.id]["ipc"] - 1
    report(6, "flow-count demand", entered and extra >= 1 and gain >= 0.03,
           f"CoreDemand entered={entered}, vswitch +{extra} ways (>=1), steady IPC +{gain:.1%} (>=3%)")


def _random_registry(rng):
    """Small registry whose exhaustive layout space stays tractable."""
    while True:
        total = rng.randint(4, 11)
        k = rng.randint(1, min(8, total))
        sizes = [1] * k
        for _ in range(rng.randint(0, total - k)):
            sizes[rng.randrange(k)] += 1
        spare = total - sum(sizes)
        if math.factorial(k) * math.comb(k + spare, spare) <= 40_000:
            break
    prios = [rng.choice([Priority.PS, Priority.BE, Priority.BE]) for _ in range(k)]
    recs = [TenantRecord(f"t{i}", (i,), p, False, n) for i, (p, n) in enumerate(zip(prios, sizes))]
    refs = {r.id: rng.choice([rng.randrange(1, 10**7), 0, 5]) for r in recs}
    return total, rng.randint(1, min(6, total - 1)), recs, refs


def _initial_masks(table, rng):
    """A random valid starting layout."""
    layouts = all_block_layouts({t: e.ways for t, e in table.rows.items()}, table.total_ways)
    pick = rng.choice(layouts)
    for t, ws in pick.items():
        table.rows[t].mask = way_mask(ws)
    return layouts


def test_7_shuffle_property(report):
    rng = random.Random(7)
    failures = []
    cases = 0
    for _ in range(150):
        total, dways, recs, refs = _random_registry(rng)
        table = TenantTable(recs, total, dways)
        layouts = _initial_masks(table, rng)
        ddio = set(range(total - dways, total))
        d = CounterDelta(1.0, {t: TenantDelta(d_refs=r) for t, r in refs.items()})
        out = shuffle(table, d, top_mask(total, dways))
        cases += 1
        # preference is recomputed here independently: BE by refs, then protected
        be = sorted((t for t in refs if table.rows[t].priority is Priority.BE), key=lambda t: (refs[t], t))
        ps = sorted((t for t in refs if table.rows[t].priority is not Priority.BE), key=lambda t: (refs[t], t))
        pref = be + ps

        def cost(layout):
            per = [len(layout[t] & ddio) for t in pref]
            return (sum(per), [-x for x in per])

        got = {t: {w for w in range(total) if m >> w & 1} for t, m in out.items()}
        best = min(cost(lay) for lay in layouts)
        spare = total - sum(r.ways for r in recs)
        problems = []
        if got not in layouts:
            problems.append("not a disjoint contiguous layout with preserved counts")
        elif cost(got) != best:
            problems.append(f"cost {cost(got)} != optimum {best}")
        if spare >= dways and any(got[t] & ddio for t in got):
            problems.append("overlap despite enough spare ways")
        if be and any(got[t] & ddio for t in ps) and sum(r.ways for r in recs
                                                         if r.priority is Priority.BE) >= dways - spare:
            problems.append("PS overlaps although BE tenants could absorb it")
        if problems:
            failures.append((total, dways, [(r.id, r.priority.value, r.ways) for r in recs], refs, problems))
    report(7, "shuffle policy vs exhaustive search", not failures,
           f"{cases - len(failures)}/{cases} random registries optimal" + (f"; first: {failures[0]}" if failures else ""))


def test_8_determinism(report):
    diffs = []
    for name in ("leaky_dma", "ring_size", "latent_contender", "flow_count"):
        cfg = scenario(name)
        cfg = cfg.with_(duration=min(cfg.duration, 1.0))
        if run_scenario(cfg, mode="ioca").csv() != run_scenario(cfg, mode="ioca").csv():
            diffs.append(name)
    report(8, "byte-identical reruns", not diffs, f"differing scenarios: {diffs or 'none'}")


class RandomSource:
    def __init__(self, cores, seed):
        self.rng = random.Random(seed)
        self.acc = {c: [0.0, 0.0, 0, 0] for c in cores}
        self.hit = self.miss = 0
        self.t = 0.0
        self.reads = 0

    def init(self):
        pass

    def capabilities(self):
        return None

    def advance(self):
        r = self.rng
        self.t += 1.0
        for v in self.acc.values():
            refs = r.randrange(1, 10_000)
            v[0] += r.uniform(500, 1500)
            v[1] += 1000.0
            v[2] += refs
            v[3] += r.randrange(0, refs)
        self.hit += r.randrange(0, 3_000_000)
        self.miss += r.randrange(0, 3_000_000)

    def snapshot(self):
        self.reads += 4 * len(self.acc) + 2
        return CounterSnapshot(self.t, {c: CoreCounters(*v) for c, v in self.acc.items()}, self.hit, self.miss,
                               run_id="rand")


class NullActuator:
    def set_mask(self, actor, mask):
        pass


def test_9_work_bound(report):
    K = 12
    worst_ratio, worst_reads, rows = 0.0, 0, []
    for T in (2, 4, 8, 16, 32, 48):
        ways = T * 2 + 8
        geo = LlcGeometry(ways=ways, sets=64, line_size=64, slices=1)
        recs = [TenantRecord(f"t{i}", (2 * i, 2 * i + 1), Priority.PS if i % 3 == 0 else Priority.BE, i % 2 == 0,
                             1 + i % 2) for i in range(T)]
        C = 2 * T
        src = RandomSource([c for r in recs for c in r.cores], seed=T)
        ctl = Controller(src, NullActuator(), geo, lambda: recs, ControllerConfig())
        ctl.start()
        max_cmp = max_reads = 0
        for _ in range(200):
            src.advance()
            rep = ctl.run_interval()
            max_cmp = max(max_cmp, rep.compares)
            max_reads = max(max_reads, rep.reads - (4 * C + 2))
        bound = C + T * math.log2(T)
        worst_ratio = max(worst_ratio, max_cmp / bound)
        worst_reads = max(worst_reads, max_reads)
        rows.append(f"T={T}:{max_cmp}")
    ok = worst_reads <= 0 and worst_ratio <= K
    report(9, "controller work bound", ok,
           f"reads over 4C+2: {worst_reads}; max compares/(C+T log T)={worst_ratio:.2f} (<= {K}); {' '.join(rows)}")
