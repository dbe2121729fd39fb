"""Dyadic grids, cubes, and enumeration over a truncated window.

A dyadic cube of level k is 2^k * (m + [0,1)^n) with m an integer vector.
Cubes are half-open, so cubes of one level tile space exactly and two dyadic
cubes are always nested or disjoint.  A Window truncates the grid to the
levels [level_min, level_max] over a block of top-level cubes; every quantity
in the package is a sup/sum over the window's finite cube catalog, and
reports record the window so convergence under window growth can be studied.

All coordinates are dyadic rationals, which binary floats represent exactly
at the scales used here; comparisons below are therefore exact, not
tolerance-based.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence


@dataclass(frozen=True)
class Cube:
    """Dyadic cube of side 2**level with lower corner at 2**level * index."""

    level: int
    index: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "index", tuple(int(i) for i in self.index))

    @property
    def dim(self) -> int:
        return len(self.index)

    @property
    def side(self) -> float:
        return 2.0 ** self.level

    @property
    def volume(self) -> float:
        return 2.0 ** (self.level * self.dim)

    @property
    def lower(self) -> tuple[float, ...]:
        s = self.side
        return tuple(m * s for m in self.index)

    @property
    def center(self) -> tuple[float, ...]:
        s = self.side
        return tuple((m + 0.5) * s for m in self.index)

    def contains_point(self, x: Sequence[float]) -> bool:
        s = self.side
        return all(m * s <= xi < (m + 1) * s for m, xi in zip(self.index, x))

    def contains_cube(self, other: "Cube") -> bool:
        if other.level > self.level:
            return False
        shift = self.level - other.level
        return all((m >> shift) == p for m, p in zip(other.index, self.index))


@dataclass(frozen=True)
class Box:
    """Axis-aligned half-open box [lo, hi); not necessarily dyadic."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != len(self.hi):
            raise ValueError("box lo/hi dimension mismatch")
        if any(a >= b for a, b in zip(self.lo, self.hi)):
            raise ValueError(f"degenerate box {self.lo}..{self.hi}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        v = 1.0
        for a, b in zip(self.lo, self.hi):
            v *= b - a
        return v


def cube_box(q: Cube) -> Box:
    s = q.side
    return Box(q.lower, tuple((m + 1) * s for m in q.index))


@dataclass(frozen=True)
class Window:
    """Truncated dyadic grid: levels level_min..level_max over a top block.

    The window consists of top_count**dim cubes of level level_max whose
    indices range over origin_offset + {0, .., top_count-1}^dim, together
    with all their dyadic descendants down to level_min.  The default block
    (origin_offset = (-1, .., -1), top_count = 2) is the 2^n top cubes
    surrounding the origin.

    level_min == level_max is allowed and gives a single-level window; the
    degenerate case is needed for single-cube catalogs.
    """

    dim: int
    level_min: int
    level_max: int
    origin_offset: tuple[int, ...] = None  # type: ignore[assignment]
    top_count: int = 2

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.level_min > self.level_max:
            raise ValueError("level_min must be <= level_max")
        if self.top_count < 1:
            raise ValueError("top_count must be >= 1")
        off = self.origin_offset
        if off is None:
            off = (-1,) * self.dim
        off = tuple(int(v) for v in off)
        if len(off) != self.dim:
            raise ValueError("origin_offset length must equal dim")
        object.__setattr__(self, "origin_offset", off)

    # -- geometry -----------------------------------------------------------

    @property
    def cell_side(self) -> float:
        return 2.0 ** self.level_min

    @property
    def cells_per_axis(self) -> int:
        return self.top_count * (1 << (self.level_max - self.level_min))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells_per_axis,) * self.dim

    @property
    def n_cells(self) -> int:
        return self.cells_per_axis ** self.dim

    @property
    def cell_volume(self) -> float:
        return 2.0 ** (self.level_min * self.dim)

    @property
    def box(self) -> Box:
        top = 2.0 ** self.level_max
        lo = tuple(o * top for o in self.origin_offset)
        hi = tuple((o + self.top_count) * top for o in self.origin_offset)
        return Box(lo, hi)

    def levels(self) -> range:
        return range(self.level_min, self.level_max + 1)

    def index_lo(self, level: int) -> tuple[int, ...]:
        """Smallest cube index per axis at the given level."""
        scale = 1 << (self.level_max - level)
        return tuple(o * scale for o in self.origin_offset)

    def index_count(self, level: int) -> int:
        return self.top_count * (1 << (self.level_max - level))

    @property
    def cell_index_lo(self) -> tuple[int, ...]:
        return self.index_lo(self.level_min)

    # -- membership ---------------------------------------------------------

    def contains_point(self, x: Sequence[float]) -> bool:
        b = self.box
        return all(a <= xi < c for a, xi, c in zip(b.lo, x, b.hi))

    def contains_cube(self, q: Cube) -> bool:
        if q.dim != self.dim or not self.level_min <= q.level <= self.level_max:
            return False
        lo = self.index_lo(q.level)
        cnt = self.index_count(q.level)
        return all(a <= m < a + cnt for m, a in zip(q.index, lo))

    # -- enumeration --------------------------------------------------------

    def cubes_at_level(self, level: int) -> Iterator[Cube]:
        if not self.level_min <= level <= self.level_max:
            raise ValueError(f"level {level} outside window levels")
        lo = self.index_lo(level)
        cnt = self.index_count(level)
        for idx in itertools.product(*(range(a, a + cnt) for a in lo)):
            yield Cube(level, idx)

    def all_cubes(self) -> Iterator[Cube]:
        for level in self.levels():
            yield from self.cubes_at_level(level)

    def n_cubes(self) -> int:
        total = 0
        for level in self.levels():
            total += self.index_count(level) ** self.dim
        return total

    # -- cells of a cube ----------------------------------------------------

    def cell_offsets_of_cube(self, q: Cube) -> tuple[slice, ...]:
        """Array slices (into the finest-cell array) covered by the cube."""
        if not self.contains_cube(q):
            raise ValueError(f"cube {q} not inside window")
        b = 1 << (q.level - self.level_min)
        lo = self.cell_index_lo
        return tuple(slice((m * b) - a, (m + 1) * b - a) for m, a in zip(q.index, lo))

    def cell_index_of_point(self, x: Sequence[float]) -> tuple[int, ...]:
        if not self.contains_point(x):
            raise ValueError(f"point {tuple(x)} outside window box")
        h = self.cell_side
        # floor is exact: window membership bounds the index range
        idx = []
        for xi, a in zip(x, self.cell_index_lo):
            m = int(xi // h)
            m = min(max(m, a), a + self.cells_per_axis - 1)
            idx.append(m)
        return tuple(idx)

    def cell_center(self, cell_index: Sequence[int]) -> tuple[float, ...]:
        h = self.cell_side
        return tuple((m + 0.5) * h for m in cell_index)


# -- cube relations ----------------------------------------------------------


def children(q: Cube) -> list[Cube]:
    """The 2^n cubes of level-1 partitioning the cube."""
    out = []
    for delta in itertools.product((0, 1), repeat=q.dim):
        out.append(Cube(q.level - 1, tuple(2 * m + d for m, d in zip(q.index, delta))))
    return out


def parent(q: Cube) -> Cube:
    # python floor-division handles negative indices correctly
    return Cube(q.level + 1, tuple(m >> 1 for m in q.index))


def ancestors(q: Cube, window: Window) -> list[Cube]:
    """Strictly increasing chain of ancestors of q inside the window.

    The chain runs from the parent up to level_max; its length is
    level_max - q.level.  Raises if q is not a window cube.
    """
    if not window.contains_cube(q):
        raise ValueError(f"cube {q} not inside window")
    chain = []
    cur = q
    while cur.level < window.level_max:
        cur = parent(cur)
        chain.append(cur)
    return chain


def dilate3(q: Cube) -> Box:
    """Concentric 3-fold dilate: same center, side 3 * 2^level.

    The result is a box, not a dyadic cube; averages over it are taken over
    its intersection with the window, normalized by the intersection volume.
    The corners land on the level-k lattice: 3Q = [(m-1)*s, (m+2)*s) per axis.
    """
    s = q.side
    lo = tuple((m - 1) * s for m in q.index)
    hi = tuple((m + 2) * s for m in q.index)
    return Box(lo, hi)


def cubes_containing(x: Sequence[float], window: Window) -> list[Cube]:
    """One window cube per level containing x, finest first (nested chain)."""
    if not window.contains_point(x):
        raise ValueError(f"point {tuple(x)} outside window box")
    out = []
    for level in window.levels():
        s = 2.0 ** level
        lo = window.index_lo(level)
        cnt = window.index_count(level)
        idx = []
        for xi, a in zip(x, lo):
            m = int(xi // s)
            m = min(max(m, a), a + cnt - 1)
            idx.append(m)
        out.append(Cube(level, tuple(idx)))
    return out


def nested_pairs(window: Window) -> Iterator[tuple[Cube, Cube]]:
    """Every pair (Q, Q') with Q a window cube and Q' an ancestor or Q itself.

    Yields sum over Q of (1 + #ancestors) pairs; all two-weight constants
    that sup over nested cube pairs iterate exactly this family.
    """
    for q in window.all_cubes():
        yield q, q
        for anc in ancestors(q, window):
            yield q, anc
