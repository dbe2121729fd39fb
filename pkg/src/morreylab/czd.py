"""Constructive stopping-time (Calderon-Zygmund) decompositions.

Given a base cube Q0 and two functions, the level-k set D_k is the union of
the dyadic subcubes of Q0 whose dilated-cube average product exceeds a
geometric threshold gamma * A^k; extracting inclusion-maximal cubes Q_j^k and
forming the exceptional sets E_j^k = Q_j^k \\ D_{k+1} and E_0 = Q0 \\ D_1
yields a forest with four exactly testable invariants:

  sandwich   gamma A^k < product(Q_j^k) <= 2^(n(1/t1+1/t2)) gamma A^k
  measure    |Q0| <= 2 |E_0| and |Q_j^k| <= 2 |E_j^k|
  partition  E_0 and the E_j^k tile Q0 with disjoint cell sets
  maximality no ancestor of Q_j^k inside Q0 crosses the level-k threshold

The threshold factor A = (4 * 18^n)^(1/t1 + 1/t2) is exactly what makes the
measure bound work through the weak (1,1) bound of the maximal function.  A
second variant weights the product by |Q|^(alpha/n).  Both run top-down with
subtree pruning, so maximality holds by construction, and both stop when a
level comes up empty (bounded data forces this; a safety cap of 64 * level
span guards the loop and is reported if ever hit).

Measures are integer cell counts times the cell volume, so the measure and
partition invariants are exact, no tolerances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .dyadic import Cube, Window, children
from .field import LatticeFunction, Weight

CellSet = frozenset


@dataclass(frozen=True)
class Decomposition:
    """Stopping-time forest over a base cube."""

    base: Cube
    gamma: float
    factor: float
    levels: dict = field(default_factory=dict)        # k -> tuple of maximal Cubes
    exceptional: dict = field(default_factory=dict)   # k -> tuple of cell-index frozensets
    e0: frozenset = frozenset()                       # cells of Q0 \ D_1
    cap_hit: bool = False

    def max_level(self) -> int:
        return max(self.levels) if self.levels else 0

    def all_stopping_cubes(self):
        for k in sorted(self.levels):
            for q in self.levels[k]:
                yield k, q


def _cells_of_cube(window: Window, q: Cube) -> frozenset:
    """Absolute finest-cell index vectors covered by a window cube."""
    b = 1 << (q.level - window.level_min)
    ranges = [range(m * b, (m + 1) * b) for m in q.index]
    return frozenset(itertools.product(*ranges))


def _dilated_slices(window: Window, q: Cube) -> tuple[slice, ...]:
    """Cell slices of 3Q clipped to the window (3Q is always cell-aligned)."""
    b = 1 << (q.level - window.level_min)
    c = window.cells_per_axis
    out = []
    for m, a in zip(q.index, window.cell_index_lo):
        lo = max((m - 1) * b - a, 0)
        hi = min((m + 2) * b - a, c)
        out.append(slice(lo, hi))
    return tuple(out)


def _product_functional(f: LatticeFunction, g: LatticeFunction, t1: float, t2: float):
    """(mean_{3Q} |f|^t1)^(1/t1) (mean_{3Q} |g|^t2)^(1/t2) with cached cube values."""
    window = f.window
    pf = np.abs(f.values) ** t1
    pg = np.abs(g.values) ** t2
    cache: dict[Cube, float] = {}

    def value(q: Cube) -> float:
        hit = cache.get(q)
        if hit is None:
            sl = _dilated_slices(window, q)
            hit = float(pf[sl].mean()) ** (1.0 / t1) * float(pg[sl].mean()) ** (1.0 / t2)
            cache[q] = hit
        return hit

    return value


def _decompose(f: LatticeFunction, g: LatticeFunction, q0: Cube, functional,
               gamma: float, factor: float) -> Decomposition:
    window = f.window
    if not window.contains_cube(q0):
        raise ValueError(f"base cube {q0} not inside window")
    if gamma == 0.0:
        return Decomposition(base=q0, gamma=0.0, factor=factor,
                             e0=_cells_of_cube(window, q0))

    def maximal_cubes(threshold: float) -> list[Cube]:
        out: list[Cube] = []
        stack = [q0]
        while stack:
            q = stack.pop()
            if functional(q) > threshold:
                out.append(q)
            elif q.level > window.level_min:
                stack.extend(reversed(children(q)))
        return out

    span = max(1, window.level_max - window.level_min)
    cap = span * 64
    levels: dict[int, tuple[Cube, ...]] = {}
    cells_by_level: dict[int, frozenset] = {}
    cap_hit = False
    k = 1
    while True:
        cubes = maximal_cubes(gamma * factor ** k)
        if not cubes:
            break
        cubes.sort(key=lambda q: (q.level, q.index))
        levels[k] = tuple(cubes)
        cells_by_level[k] = frozenset().union(*(_cells_of_cube(window, q) for q in cubes))
        if k >= cap:
            cap_hit = True
            break
        k += 1

    q0_cells = _cells_of_cube(window, q0)
    e0 = q0_cells - cells_by_level.get(1, frozenset())
    exceptional: dict[int, tuple] = {}
    for k, cubes in levels.items():
        nxt = cells_by_level.get(k + 1, frozenset())
        exceptional[k] = tuple(_cells_of_cube(window, q) - nxt for q in cubes)
    return Decomposition(base=q0, gamma=gamma, factor=factor, levels=levels,
                         exceptional=exceptional, e0=e0, cap_hit=cap_hit)


def cz_decompose(f: LatticeFunction, g: LatticeFunction, q0: Cube,
                 theta1: float, theta2: float) -> Decomposition:
    """Stopping-time decomposition driven by the unweighted average product."""
    if theta1 <= 1 or theta2 <= 1:
        raise ValueError("theta1 and theta2 must exceed 1")
    window = f.window
    if g.window != window:
        raise ValueError("f and g must live on the same window")
    if not window.contains_cube(q0):
        raise ValueError(f"base cube {q0} not inside window")
    functional = _product_functional(f, g, theta1, theta2)
    factor = (4.0 * 18.0 ** window.dim) ** (1.0 / theta1 + 1.0 / theta2)
    return _decompose(f, g, q0, functional, functional(q0), factor)


def cz_decompose_alpha(f: LatticeFunction, g: LatticeFunction, q0: Cube,
                       r1: float, r2: float, alpha: float) -> Decomposition:
    """Variant whose threshold functional carries the volume factor |Q|^(alpha/n)."""
    if abs(1.0 / r1 + 1.0 / r2 - 1.0) > 1e-9:
        raise ValueError(f"(r1, r2) must be a Holder pair; got ({r1}, {r2})")
    window = f.window
    if g.window != window:
        raise ValueError("f and g must live on the same window")
    n = window.dim
    if not 0.0 <= alpha < n:
        raise ValueError(f"alpha must lie in [0, {n}); got {alpha}")
    base = _product_functional(f, g, r1, r2)

    def functional(q: Cube) -> float:
        return q.volume ** (alpha / n) * base(q)

    factor = (4.0 * 18.0 ** n) ** (1.0 / r1 + 1.0 / r2)
    if not window.contains_cube(q0):
        raise ValueError(f"base cube {q0} not inside window")
    return _decompose(f, g, q0, functional, functional(q0), factor)


def verify_decomposition(d: Decomposition, f: LatticeFunction, g: LatticeFunction,
                         window: Window, t1: float, t2: float,
                         alpha: float = None) -> list[str]:
    """Recheck the four invariants from the raw data; returns violations.

    alpha = None checks the unweighted variant, otherwise the |Q|^(alpha/n)
    variant.  Measure and partition checks are exact integer cell arithmetic;
    the sandwich upper bound allows a 1e-12 relative slack for float
    regrouping.
    """
    bad: list[str] = []
    base_fn = _product_functional(f, g, t1, t2)
    n = window.dim

    if alpha is None:
        functional = base_fn
    else:
        def functional(q: Cube) -> float:
            return q.volume ** (alpha / n) * base_fn(q)

    upper = 2.0 ** (n * (1.0 / t1 + 1.0 / t2))
    span = 1 << (d.base.level - window.level_min)
    base_cells = span ** n

    if d.gamma == 0.0:
        if d.levels:
            bad.append("trivial decomposition has stopping levels")
        if len(d.e0) != base_cells:
            bad.append("trivial decomposition must have E0 = Q0")
        return bad

    seen: set = set()
    covered = set(d.e0)
    for k, cubes in d.levels.items():
        threshold = d.gamma * d.factor ** k
        for q, e_cells in zip(cubes, d.exceptional[k]):
            val = functional(q)
            if not val > threshold:
                bad.append(f"sandwich lower: level {k} cube {q} value {val} <= {threshold}")
            if val > upper * threshold * (1.0 + 1e-12):
                bad.append(f"sandwich upper: level {k} cube {q} value {val} > "
                           f"{upper * threshold}")
            q_cells = 1 << ((q.level - window.level_min) * n)
            if q_cells > 2 * len(e_cells):
                bad.append(f"measure: level {k} cube {q} has |Q|={q_cells} cells "
                           f"> 2|E|={2 * len(e_cells)}")
            if e_cells & covered:
                bad.append(f"partition: E-cells of level {k} cube {q} overlap earlier sets")
            covered |= e_cells
            for anc in _strict_ancestors_within(q, d.base):
                if functional(anc) > threshold:
                    bad.append(f"maximality: ancestor {anc} of level {k} cube {q} "
                               f"crosses the level-{k} threshold")
            if (k, q) in seen:
                bad.append(f"duplicate stopping cube {q} at level {k}")
            seen.add((k, q))
    if covered != _cells_of_cube(window, d.base):
        bad.append("partition: E0 and the E_j^k do not tile Q0")
    if base_cells > 2 * len(d.e0):
        bad.append(f"measure: |Q0|={base_cells} cells > 2|E0|={2 * len(d.e0)}")
    return bad


def _strict_ancestors_within(q: Cube, base: Cube):
    from .dyadic import parent
    cur = q
    while cur.level < base.level:
        cur = parent(cur)
        yield cur


def decomposition_to_json(d: Decomposition, window: Window) -> dict:
    """JSON-ready view: {gamma, factor, levels: [{k, cubes}], e_cells} plus flags.

    Each cube entry carries its own exceptional cells; e_cells at the top
    level is E_0.
    """
    levels = []
    for k in sorted(d.levels):
        cubes = []
        for q, cells in zip(d.levels[k], d.exceptional[k]):
            cubes.append({
                "level": q.level,
                "index": list(q.index),
                "e_cells": sorted(list(c) for c in cells),
            })
        levels.append({"k": k, "cubes": cubes})
    return {
        "gamma": d.gamma,
        "factor": d.factor,
        "base": {"level": d.base.level, "index": list(d.base.index)},
        "levels": levels,
        "e_cells": sorted(list(c) for c in d.e0),
        "cap_hit": d.cap_hit,
        "window": {
            "dim": window.dim,
            "level_min": window.level_min,
            "level_max": window.level_max,
            "origin_offset": list(window.origin_offset),
            "top_count": window.top_count,
        },
    }


def necessity_pair(w1: Weight, w2: Weight, qp: Cube, e) -> tuple[LatticeFunction, LatticeFunction, float]:
    """Extremal input pair saturating the weak-type bound on the cube qp.

    f = chi_Q' * w1^(-q1/(q1-r1)), g = chi_Q' * w2^(-q2/(q2-r2)), and the
    matched threshold lambda = 1/2 |Q'|^(alpha/n) (mean f^r1)^(1/r1)
    (mean g^r2)^(1/r2).  Requires r_i < q_i strictly.
    """
    window = w1.window
    if w2.window != window:
        raise ValueError("w1 and w2 must live on the same window")
    if not window.contains_cube(qp):
        raise ValueError(f"cube {qp} not inside window")
    if e.r1 is None or e.r2 is None or e.r1 >= e.q1 or e.r2 >= e.q2:
        raise ValueError("necessity pair needs r_i < q_i strictly")
    sl = window.cell_offsets_of_cube(qp)
    fv = np.zeros(window.shape)
    gv = np.zeros(window.shape)
    fv[sl] = w1.values[sl] ** (-e.q1 / (e.q1 - e.r1))
    gv[sl] = w2.values[sl] ** (-e.q2 / (e.q2 - e.r2))
    f = LatticeFunction(window, fv)
    g = LatticeFunction(window, gv)
    mf = float((fv[sl] ** e.r1).mean()) ** (1.0 / e.r1)
    mg = float((gv[sl] ** e.r2).mean()) ** (1.0 / e.r2)
    lam = 0.5 * qp.volume ** (e.alpha / window.dim) * mf * mg
    return f, g, lam
