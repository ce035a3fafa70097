import random

import pytest

from iollc.cache import Access, LlcGeometry
from iollc.telemetry import (
    CoreCounters, CounterSnapshot, SimCounterSource, TelemetryError, delta, slice_sampled_ddio,
)
from iollc.workload import CoreTimingParams, HostSim, Priority, TenantDescriptor, WorkloadSpec

GEO = LlcGeometry(ways=11, sets=64, line_size=64, slices=1)


def make_host(cores=(3,), geo=GEO):
    ten = TenantDescriptor("app", Priority.BE, False, list(cores), 2,
                           WorkloadSpec("random_read", working_set=1 << 16, mem_ratio=0.5))
    return HostSim(geo, [ten], timing=CoreTimingParams(freq_hz=1e6))


def snap(t, cores, hit=0, miss=0, run="r"):
    return CounterSnapshot(t, {c: CoreCounters(*v) for c, v in cores.items()}, hit, miss, run_id=run)


class TestSnapshot:
    def test_fresh_is_zero(self):
        src = SimCounterSource(make_host())
        src.init()
        s = src.snapshot()
        assert s.t == 0 and s.ddio_hit == 0 and s.ddio_miss == 0
        assert all(c == CoreCounters() for c in s.cores.values())

    def test_refs_count_fed_accesses(self):
        h = make_host()
        fed = []
        real = h.cache.core_access

        def counting(*a, **kw):
            fed.append(1)
            return real(*a, **kw)

        h.cache.core_access = counting
        src = SimCounterSource(h)
        src.init()
        h.step_compute("app", 0.001)
        assert src.snapshot().cores[3].llc_refs == len(fed) > 0

    def test_idempotent(self):
        h = make_host()
        src = SimCounterSource(h)
        src.init()
        h.run(0.002)
        a, b = src.snapshot(), src.snapshot()
        assert a == b

    def test_uninitialized(self):
        with pytest.raises(TelemetryError):
            SimCounterSource(make_host()).snapshot()

    def test_capabilities(self):
        caps = SimCounterSource(make_host()).capabilities()
        assert caps.per_core_ipc and caps.chip_ddio

    def test_ddio_exactness(self):
        h = make_host()
        src = SimCounterSource(h)
        src.init()
        s0 = src.snapshot()
        rng = random.Random(1)
        updates = allocates = 0
        for _ in range(2000):
            r = h.cache.ddio_write(rng.randrange(1 << 20) * 64)
            updates += r is Access.UPDATE
            allocates += r is Access.ALLOCATE
        s1 = src.snapshot()
        assert s1.ddio_hit - s0.ddio_hit == updates
        assert s1.ddio_miss - s0.ddio_miss == allocates

    def test_monotone(self):
        h = make_host()
        src = SimCounterSource(h)
        src.init()
        prev = src.snapshot()
        for _ in range(5):
            h.step()
            cur = src.snapshot()
            for c, v in cur.cores.items():
                p = prev.cores[c]
                assert v.instructions >= p.instructions and v.llc_refs >= p.llc_refs
                assert v.llc_misses <= v.llc_refs
            prev = cur


class TestDelta:
    def test_same_snapshot_zero(self):
        s = snap(1.0, {0: (100, 200, 10, 5)}, 7, 3)
        d = delta(s, s, {"a": [0]})
        assert d.tenants["a"].d_refs == 0 and d.tenants["a"].ipc == 0
        assert d.d_ddio_hit == d.d_ddio_miss == 0 and d.rel_ddio_miss == 0

    def test_ipc(self):
        a = snap(0.0, {0: (0, 0, 0, 0)})
        b = snap(1.0, {0: (300, 200, 10, 4)})
        td = delta(a, b, {"a": [0]}).tenants["a"]
        assert td.ipc == pytest.approx(1.5)
        assert td.miss_rate == pytest.approx(0.4)

    def test_multicore_aggregation(self):
        a = snap(0.0, {2: (0, 0, 5, 0), 3: (0, 0, 7, 0)})
        b = snap(1.0, {2: (10, 10, 25, 1), 3: (30, 10, 10, 2)})
        td = delta(a, b, {"t": [2, 3]}).tenants["t"]
        assert td.d_refs == 20 + 3
        assert td.ipc == pytest.approx(40 / 20)

    def test_run_mismatch(self):
        with pytest.raises(TelemetryError):
            delta(snap(0, {}, run="x"), snap(1, {}, run="y"), {})

    def test_time_goes_backwards(self):
        with pytest.raises(TelemetryError):
            delta(snap(2, {}), snap(1, {}), {})

    def test_relative_uses_previous_interval(self):
        s0 = snap(0, {0: (0, 0, 0, 0)}, 0, 0)
        s1 = snap(1, {0: (100, 100, 100, 10)}, 50, 100)
        s2 = snap(2, {0: (200, 200, 250, 30)}, 75, 150)
        d1 = delta(s0, s1, {"a": [0]})
        d2 = delta(s1, s2, {"a": [0]}, d1)
        assert d2.tenants["a"].rel_refs == pytest.approx(0.5)
        assert d2.tenants["a"].rel_misses == pytest.approx(1.0)
        assert d2.rel_ddio_hit == pytest.approx(-0.5)
        assert d2.rel_ddio_miss == pytest.approx(-0.5)

    def test_zero_denominator_is_zero(self):
        s0 = snap(0, {0: (0, 0, 0, 0)})
        s1 = snap(1, {0: (0, 0, 0, 0)})
        s2 = snap(2, {0: (100, 100, 10, 5)}, 5, 5)
        d1 = delta(s0, s1, {"a": [0]})
        d2 = delta(s1, s2, {"a": [0]}, d1)
        assert d2.tenants["a"].rel_refs == 0 and d2.rel_ddio_miss == 0 and d2.tenants["a"].rel_ipc == 0


class TestSliceSampling:
    def test_single_slice_exact(self):
        s = CounterSnapshot(0, {}, 11, 13, (11,), (13,))
        assert slice_sampled_ddio(s, LlcGeometry(ways=4, sets=4, slices=1)) == (11, 13)

    def test_uniform_within_five_percent(self):
        geo = LlcGeometry(ways=11, sets=1024, line_size=64, slices=18)
        h = make_host(geo=geo)
        rng = random.Random(5)
        for _ in range(20_000):
            h.cache.ddio_write(rng.randrange(1 << 22) * 64)
        src = SimCounterSource(h)
        src.init()
        s = src.snapshot()
        hit, miss = slice_sampled_ddio(s, geo)
        assert s.ddio_hit + s.ddio_miss >= 10_000
        assert abs((hit + miss) - (s.ddio_hit + s.ddio_miss)) <= 0.05 * (s.ddio_hit + s.ddio_miss)
        assert abs(miss - s.ddio_miss) <= 0.05 * s.ddio_miss

    def test_adversarial_slice_zero(self):
        geo = LlcGeometry(ways=11, sets=1024, line_size=64, slices=18)
        h = make_host(geo=geo)
        for i in range(500):
            h.cache.ddio_write(i * 18 * 64)
        src = SimCounterSource(h)
        src.init()
        s = src.snapshot()
        hit, miss = slice_sampled_ddio(s, geo)
        assert (hit, miss) == (18 * s.ddio_hit, 18 * s.ddio_miss)
        assert hit + miss == 18 * 500
