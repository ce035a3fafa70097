"""Way-partitioned set-associative LLC with core-side and DDIO access paths.

Allocation follows CAT semantics: an actor may only *allocate* into the ways
of its mask, but lookups hit in any way of the set.  Replacement is strict
LRU restricted to the requesting mask; an invalid way is always preferred and
ties resolve to the lowest way index.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

DDIO = "ddio"


class CacheError(ValueError):
    pass


class Access(enum.Enum):
    HIT = "hit"
    MISS = "miss"
    UPDATE = "update"
    ALLOCATE = "allocate"
    FROM_LLC = "from_llc"
    FROM_MEMORY = "from_memory"


@dataclass(frozen=True)
class LlcGeometry:
    ways: int = 11
    sets: int = 1024
    line_size: int = 64
    slices: int = 18

    def __post_init__(self):
        if self.ways < 2:
            raise CacheError(f"ways must be >= 2, got {self.ways}")
        if self.sets < 1 or self.sets & (self.sets - 1):
            raise CacheError(f"sets must be a power of two, got {self.sets}")
        if self.line_size < 8 or self.line_size & (self.line_size - 1):
            raise CacheError(f"line_size must be a power of two >= 8, got {self.line_size}")
        if self.slices < 1:
            raise CacheError(f"slices must be >= 1, got {self.slices}")

    @property
    def way_bytes(self) -> int:
        return self.sets * self.line_size

    @property
    def capacity_bytes(self) -> int:
        return self.ways * self.way_bytes

    @property
    def full_mask(self) -> int:
        return (1 << self.ways) - 1


def way_mask(ways: Iterable[int]) -> int:
    mask = 0
    for w in ways:
        mask |= 1 << w
    return mask


def mask_ways(mask: int) -> tuple[int, ...]:
    out = []
    w = 0
    while mask:
        if mask & 1:
            out.append(w)
        mask >>= 1
        w += 1
    return tuple(out)


def contiguous_mask(start: int, count: int) -> int:
    return ((1 << count) - 1) << start


def top_mask(ways: int, count: int) -> int:
    """Mask of the `count` highest ways of a `ways`-wide LLC."""
    return contiguous_mask(ways - count, count)


def format_mask(mask: int, ways: int) -> str:
    return format(mask, f"0{ways}b")


@dataclass
class MemTraffic:
    reads_bytes: int = 0
    writes_bytes: int = 0
    ddio_evictions: int = 0
    core_fills: int = 0


class Eviction(NamedTuple):
    line: int
    way: int
    dirty: bool


class LlcCache:
    """Single logical LLC; slices are kept only for DDIO counter attribution.

    Lines are indexed by ``addr // line_size``; the set is that index modulo
    ``sets``.  State lives in flat per-slot lists (slot = set * ways + way)
    plus a line -> slot dictionary, so a lookup is one dict probe.
    """

    def __init__(
        self,
        geometry: LlcGeometry,
        address_space: int = 1 << 48,
        ddio_ways: int = 2,
        ddio_bounds: tuple[int, int] = (1, 6),
    ):
        self.geometry = geometry
        self.address_space = address_space
        lo, hi = ddio_bounds
        if not 1 <= lo <= hi < geometry.ways:
            raise CacheError(f"invalid DDIO way bounds {ddio_bounds} for {geometry.ways} ways")
        self.ddio_bounds = (lo, hi)

        n = geometry.ways * geometry.sets
        self._tag = [-1] * n
        self._stamp = [-1] * n
        self._dirty = [False] * n
        self._where: dict[int, int] = {}
        self._clock = 0
        self._ways_of: dict[int, tuple[int, ...]] = {}

        self.traffic = MemTraffic()
        self.masks: dict[object, int] = {}
        self.ddio_mask = 0
        self.set_mask(DDIO, top_mask(geometry.ways, ddio_ways))
        self.ddio_hit = 0
        self.ddio_miss = 0
        self.slice_ddio_hit = [0] * geometry.slices
        self.slice_ddio_miss = [0] * geometry.slices
        self.last_eviction: Optional[Eviction] = None

    # -- masks -----------------------------------------------------------

    def _check_mask(self, mask: int) -> tuple[int, ...]:
        ways = self._ways_of.get(mask)
        if ways is None:
            if mask <= 0 or mask >> self.geometry.ways:
                raise CacheError(f"way mask {mask:#x} is empty or wider than {self.geometry.ways} ways")
            ways = mask_ways(mask)
            self._ways_of[mask] = ways
        return ways

    def set_mask(self, actor, mask: int) -> None:
        """Program the allocation mask of a tenant/core group or of DDIO.

        Resident lines are neither flushed nor migrated.
        """
        ways = self._check_mask(mask)
        if actor == DDIO:
            lo, hi = self.ddio_bounds
            if not lo <= len(ways) <= hi:
                raise CacheError(f"DDIO mask needs {lo}..{hi} ways, got {len(ways)}")
            self.ddio_mask = mask
        else:
            self.masks[actor] = mask

    def get_mask(self, actor) -> int:
        return self.ddio_mask if actor == DDIO else self.masks[actor]

    @property
    def ddio_ways(self) -> int:
        return self.ddio_mask.bit_count()

    # -- internals -------------------------------------------------------

    def _line(self, addr: int) -> int:
        if not 0 <= addr < self.address_space:
            raise CacheError(f"address {addr:#x} outside the {self.address_space:#x}-byte address space")
        return addr // self.geometry.line_size

    def _fill(self, line: int, mask: int, dirty: bool, from_ddio: bool) -> int:
        ways = self._ways_of[mask]
        W = self.geometry.ways
        base = (line % self.geometry.sets) * W
        stamp = self._stamp
        victim = -1
        oldest = None
        for w in ways:
            s = stamp[base + w]
            if s < 0:
                victim = w
                break
            if oldest is None or s < oldest:
                oldest = s
                victim = w
        slot = base + victim
        old = self._tag[slot]
        if old >= 0:
            was_dirty = self._dirty[slot]
            del self._where[old]
            if was_dirty:
                self.traffic.writes_bytes += self.geometry.line_size
                if from_ddio:
                    self.traffic.ddio_evictions += 1
            self.last_eviction = Eviction(old, victim, was_dirty)
        else:
            self.last_eviction = None
        self._tag[slot] = line
        self._clock += 1
        stamp[slot] = self._clock
        self._dirty[slot] = dirty
        self._where[line] = slot
        return victim

    # -- operations ------------------------------------------------------

    def core_access(self, addr: int, mask: int, is_write: bool = False) -> Access:
        if mask not in self._ways_of:
            self._check_mask(mask)
        line = self._line(addr)
        slot = self._where.get(line)
        if slot is not None:
            self._clock += 1
            self._stamp[slot] = self._clock
            if is_write:
                self._dirty[slot] = True
            self.last_eviction = None
            return Access.HIT
        self.traffic.reads_bytes += self.geometry.line_size
        self.traffic.core_fills += 1
        self._fill(line, mask, is_write, False)
        return Access.MISS

    def ddio_write(self, addr: int, mask: Optional[int] = None) -> Access:
        """Inbound DMA of one line: write update if resident, else write allocate."""
        if mask is None:
            mask = self.ddio_mask
        elif mask not in self._ways_of:
            self._check_mask(mask)
        line = self._line(addr)
        slot = self._where.get(line)
        sl = line % self.geometry.slices
        if slot is not None:
            self._clock += 1
            self._stamp[slot] = self._clock
            self._dirty[slot] = True
            self.ddio_hit += 1
            self.slice_ddio_hit[sl] += 1
            self.last_eviction = None
            return Access.UPDATE
        self._fill(line, mask, True, True)
        self.ddio_miss += 1
        self.slice_ddio_miss[sl] += 1
        return Access.ALLOCATE

    def ddio_read(self, addr: int) -> Access:
        """Outbound DMA of one line; a miss is served from memory without allocating."""
        line = self._line(addr)
        slot = self._where.get(line)
        self.last_eviction = None
        if slot is not None:
            self._clock += 1
            self._stamp[slot] = self._clock
            return Access.FROM_LLC
        self.traffic.reads_bytes += self.geometry.line_size
        return Access.FROM_MEMORY

    def migrate(self, addr: int, mask: int) -> bool:
        """Move a resident line into `mask` if it currently sits outside it.

        Models a consumer core's private cache writing the line back into the
        core's own ways.  No memory read is charged; the victim in `mask` is
        evicted as usual.  Returns True if the line moved.
        """
        ways = self._check_mask(mask)
        line = self._line(addr)
        slot = self._where.get(line)
        W = self.geometry.ways
        if slot is None or slot % W in ways:
            return False
        dirty = self._dirty[slot]
        del self._where[line]
        self._tag[slot] = -1
        self._stamp[slot] = -1
        self._dirty[slot] = False
        self._fill(line, mask, dirty, False)
        return True

    def mark_clean(self, addr: int) -> None:
        """Drop the dirty bit of a resident line (its data was handed off)."""
        slot = self._where.get(self._line(addr))
        if slot is not None:
            self._dirty[slot] = False

    # -- inspection ------------------------------------------------------

    def lookup(self, addr: int) -> Optional[int]:
        """Way index holding `addr`, or None."""
        slot = self._where.get(self._line(addr))
        return None if slot is None else slot % self.geometry.ways

    def is_dirty(self, addr: int) -> bool:
        slot = self._where.get(self._line(addr))
        return slot is not None and self._dirty[slot]

    def set_lines(self, set_index: int) -> dict[int, int]:
        """Valid lines of one set as {way: line}."""
        W = self.geometry.ways
        base = set_index * W
        return {w: self._tag[base + w] for w in range(W) if self._tag[base + w] >= 0}

    @property
    def valid_lines(self) -> int:
        return len(self._where)

    def lines_in_ways(self, mask: int) -> int:
        ways = self._check_mask(mask)
        W = self.geometry.ways
        return sum(1 for slot in self._where.values() if slot % W in ways)
