"""Morrey norms, the weak-type functional, and the multi-weight constants.

The Morrey norm over the window is

    sup over window cubes Q of |Q|^(1/p) * (mean_Q |f|^q)^(1/q),

with the weighted version folding a weight density into the integrand
(|f|^q * w) while keeping the Lebesgue normalizer |Q|; the alternative
normalization by w(Q) would rescale ratios, not their finiteness, and reports
flag the convention.

The two-weight constants are sups over nested cube pairs (Q, Q') of a product
of a volume-ratio power, an optional |Q'|^(1/r), a power average of v on Q,
and dual-exponent power averages of w1, w2 on Q'.  The WeightConditionKind
enum picks the variant; two limiting conventions appear verbatim in the
formulas: the v-average degenerates to max_Q v when t = 1, and the w-average
to max_{Q'} 1/w_i when q_i = r_i.

At desk scale every sup is an exhaustive enumeration (cube catalog or the
ancestor-pair family); sups over pairs iterate ancestors only, since other
pairs are never nested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .dyadic import Cube, Window, ancestors, cube_box, nested_pairs
from .exponents import ExponentSet, conjugate, inv
from .field import LatticeFunction, Weight, level_means, power_avg

INF = math.inf


def morrey_norm(f: LatticeFunction, p: float, q: float, w: Optional[Weight] = None) -> float:
    """Morrey norm with exponents (p, q); optional weight density w."""
    if not (q > 0 and q <= p * (1.0 + 1e-12)):
        raise ValueError(f"need 0 < q <= p; got q={q}, p={p}")
    window = f.window
    dens = np.abs(f.values) ** q
    if w is not None:
        if w.window != window:
            raise ValueError("weight must live on the window of f")
        dens = dens * w.values
    best = 0.0
    for level in window.levels():
        vol = 2.0 ** (level * window.dim)
        val = vol ** (1.0 / p) * level_means(dens, window, level) ** (1.0 / q)
        best = max(best, float(val.max()))
    return best


def rhs_bilinear_morrey(f: LatticeFunction, g: LatticeFunction, w1: Weight, w2: Weight,
                        p: float, q1: float, q2: float) -> float:
    """sup over cubes of |Q|^(1/p) (mean_Q (|f| w1)^q1)^(1/q1) (mean_Q (|g| w2)^q2)^(1/q2)."""
    window = f.window
    if any(x.window != window for x in (g, w1, w2)):
        raise ValueError("all inputs must live on the same window")
    df = (np.abs(f.values) * w1.values) ** q1
    dg = (np.abs(g.values) * w2.values) ** q2
    best = 0.0
    for level in window.levels():
        vol = 2.0 ** (level * window.dim)
        val = vol ** (1.0 / p) \
            * level_means(df, window, level) ** (1.0 / q1) \
            * level_means(dg, window, level) ** (1.0 / q2)
        best = max(best, float(val.max()))
    return best


def rhs_bilinear_morrey_from(f: LatticeFunction, g: LatticeFunction, w1: Weight, w2: Weight,
                             p: float, q1: float, q2: float, q0: Cube) -> float:
    """Same sup restricted to cubes containing q0 (q0 and its ancestors)."""
    window = f.window
    best = 0.0
    for q in [q0, *ancestors(q0, window)]:
        box = cube_box(q)
        t1 = power_avg(LatticeFunction(window, np.abs(f.values) * w1.values), box, q1)
        t2 = power_avg(LatticeFunction(window, np.abs(g.values) * w2.values), box, q2)
        best = max(best, q.volume ** (1.0 / p) * t1 * t2)
    return best


def weak_morrey_functional(F: LatticeFunction, v: Weight, t: float, s: float,
                           q0: Cube) -> float:
    """Distribution-function functional |Q0|^(1/s-1/t) sup_l l * v^t({F > l})^(1/t).

    On piecewise-constant data the sup over l > 0 is attained at thresholds
    just below the achieved cell values, so the candidate set is exactly the
    distinct positive values of F on Q0.
    """
    if t <= 0 or s <= 0:
        raise ValueError("t and s must be positive")
    window = F.window
    if v.window != window:
        raise ValueError("v must live on the window of F")
    sl = window.cell_offsets_of_cube(q0)
    fv = F.values[sl].ravel()
    vt = (v.values[sl].ravel() ** t) * window.cell_volume
    best = 0.0
    for lam in np.unique(fv):
        if lam <= 0.0:
            continue
        mass = float(vt[fv >= lam].sum())
        best = max(best, float(lam) * mass ** (1.0 / t))
    return q0.volume ** (1.0 / s - 1.0 / t) * best


class WeightConditionKind(Enum):
    """Formula variants for the nested-pair weight constants.

    C22   ratio^((1-s)/(as)),  |Q'|^(1/r), v-avg exponent at/(1-t)   (t <= 1, s < 1)
    C23   ratio^((1-as)/(as)), |Q'|^(1/r), v-avg exponent at/(1-t)   (t <= 1, s >= 1)
    C24   ratio^(1/(as)),      |Q'|^(1/r), v-avg exponent at         (t > 1)
    C27   ratio^(1/s),         |Q'|^(1/r), v-avg exponent t, w-exp r_i (q_i/r_i)'
    C29   like C27 with w-exp r_i (q_i/(a r_i))'
    C210  single-cube constant in the two weights u1, u2 (alias of C211)
    C211  single-cube constant in the two weights u1, u2
    CBH   like C29 without the |Q'|^(1/r) factor
    """

    C22 = "C22"
    C23 = "C23"
    C24 = "C24"
    C27 = "C27"
    C29 = "C29"
    C210 = "C210"
    C211 = "C211"
    CBH = "CBH"


_PAIR_KINDS = {WeightConditionKind.C22, WeightConditionKind.C23, WeightConditionKind.C24,
               WeightConditionKind.C27, WeightConditionKind.C29, WeightConditionKind.CBH}


def _kind_check(kind: WeightConditionKind, e: ExponentSet) -> None:
    if kind is WeightConditionKind.C22:
        if not (0 < e.t <= 1 and e.s < 1):
            raise ValueError(f"{kind.value} needs 0<t<=1 and s<1 (t={e.t}, s={e.s})")
        _need_a_in_q(e)
    elif kind is WeightConditionKind.C23:
        if not (0 < e.t <= 1 and e.s >= 1):
            raise ValueError(f"{kind.value} needs 0<t<=1 and s>=1 (t={e.t}, s={e.s})")
        _need_a_in_q(e)
    elif kind is WeightConditionKind.C24:
        if not e.t > 1:
            raise ValueError(f"{kind.value} needs t>1 (t={e.t})")
        _need_a_in_q(e)
    elif kind is WeightConditionKind.C27:
        if e.r1 is None or e.r2 is None or not (0 < e.r1 <= e.q1 and 0 < e.r2 <= e.q2):
            raise ValueError(f"{kind.value} needs 0<r_i<=q_i (r=({e.r1},{e.r2}))")
    elif kind in (WeightConditionKind.C29, WeightConditionKind.CBH):
        if e.r1 is None or e.r2 is None or not (0 < e.r1 < e.q1 and 0 < e.r2 < e.q2):
            raise ValueError(f"{kind.value} needs 0<r_i<q_i (r=({e.r1},{e.r2}))")
        if e.a is None or not 1 < e.a < min(e.q1 / e.r1, e.q2 / e.r2):
            raise ValueError(f"{kind.value} needs 1<a<min(q_i/r_i) (a={e.a})")
    elif kind in (WeightConditionKind.C210, WeightConditionKind.C211):
        if e.r1 is None or e.r2 is None or not (0 < e.r1 < e.q1 and 0 < e.r2 < e.q2):
            raise ValueError(f"{kind.value} needs 0<r_i<q_i (r=({e.r1},{e.r2}))")


def _need_a_in_q(e: ExponentSet) -> None:
    if e.a is None or not 1 < e.a < min(e.q1, e.q2):
        raise ValueError(f"need 1<a<min(q1,q2) (a={e.a}, q=({e.q1},{e.q2}))")


def _dual_avg(w: Weight, window: Window, q: Cube, d: float) -> float:
    """(mean_Q w^(-d))^(1/d) for d > 0; d = inf gives max_Q (1/w)."""
    cells = w.values[window.cell_offsets_of_cube(q)]
    if d == INF:
        return 1.0 / float(cells.min())
    return float((cells ** -d).mean()) ** (1.0 / d)


def two_weight_constant(kind: WeightConditionKind, v: Optional[Weight], w1: Weight,
                        w2: Weight, e: ExponentSet, window: Window) -> float:
    """Evaluate the selected weight constant over the window's cube pairs.

    v may be None only for the single-cube kinds C210/C211, which involve the
    pair (w1, w2) alone.
    """
    _kind_check(kind, e)
    n = window.dim

    if kind in (WeightConditionKind.C210, WeightConditionKind.C211):
        e1 = e.r1 / (e.q1 - e.r1)
        e2 = e.r2 / (e.q2 - e.r2)
        joint = (w1.values ** (e.s / e.q1)) * (w2.values ** (e.s / e.q2))
        best = 0.0
        for q in window.all_cubes():
            sl = window.cell_offsets_of_cube(q)
            val = float(joint[sl].mean()) ** (1.0 / e.s) \
                * _dual_avg(w1, window, q, e1) ** (1.0 / e.q1) \
                * _dual_avg(w2, window, q, e2) ** (1.0 / e.q2)
            best = max(best, val)
        return best

    if v is None:
        raise ValueError(f"{kind.value} requires the weight v")
    if v.window != window or w1.window != window or w2.window != window:
        raise ValueError("weights must live on the given window")

    # v-average on the inner cube: (mean_Q v^v_exp)^(1/v_exp), inf = max on Q
    if kind in (WeightConditionKind.C22, WeightConditionKind.C23):
        v_exp = INF if abs(e.t - 1.0) <= 1e-12 else e.a * e.t / (1.0 - e.t)
    elif kind is WeightConditionKind.C24:
        v_exp = e.a * e.t
    else:
        v_exp = e.t

    # w-averages on the outer cube: (mean w_i^(-d_i))^(1/d_i)
    if kind in (WeightConditionKind.C22, WeightConditionKind.C23, WeightConditionKind.C24):
        d1 = conjugate(e.q1 / e.a)
        d2 = conjugate(e.q2 / e.a)
    elif kind is WeightConditionKind.C27:
        d1 = INF if e.q1 == e.r1 else e.r1 * conjugate(e.q1 / e.r1)
        d2 = INF if e.q2 == e.r2 else e.r2 * conjugate(e.q2 / e.r2)
    else:  # C29, CBH
        d1 = e.r1 * conjugate(e.q1 / (e.a * e.r1))
        d2 = e.r2 * conjugate(e.q2 / (e.a * e.r2))

    if kind is WeightConditionKind.C22:
        ratio_exp = (1.0 - e.s) / (e.a * e.s)
    elif kind is WeightConditionKind.C23:
        ratio_exp = (1.0 - e.a * e.s) / (e.a * e.s)
    elif kind is WeightConditionKind.C24:
        ratio_exp = 1.0 / (e.a * e.s)
    else:
        ratio_exp = 1.0 / e.s

    with_qr = kind is not WeightConditionKind.CBH

    best = 0.0
    for q, qp in nested_pairs(window):
        ratio = 2.0 ** ((q.level - qp.level) * n)
        term = ratio ** ratio_exp
        if with_qr:
            term *= qp.volume ** inv(e.r)
        term *= power_avg(v, cube_box(q), v_exp)
        term *= _dual_avg(w1, window, qp, d1)
        term *= _dual_avg(w2, window, qp, d2)
        best = max(best, term)
    return best


def ap_constant(w: Weight, p: float) -> float:
    """Muckenhoupt constant sup_Q (mean_Q w) (mean_Q w^(-1/(p-1)))^(p-1)."""
    if p <= 1:
        raise ValueError(f"p must exceed 1; got {p}")
    window = w.window
    dual = w.values ** (-1.0 / (p - 1.0))
    best = 0.0
    for level in window.levels():
        val = level_means(w.values, window, level) \
            * level_means(dual, window, level) ** (p - 1.0)
        best = max(best, float(val.max()))
    return best


def rh_constant(w: Weight, nu: float) -> float:
    """Reverse-Holder constant sup_Q (mean_Q w^nu)^(1/nu) / mean_Q w."""
    if nu <= 1:
        raise ValueError(f"nu must exceed 1; got {nu}")
    window = w.window
    powed = w.values ** nu
    best = 0.0
    for level in window.levels():
        val = level_means(powed, window, level) ** (1.0 / nu) \
            / level_means(w.values, window, level)
        best = max(best, float(val.max()))
    return best


@dataclass(frozen=True)
class JointWeightReport:
    """Joint two-weight constant plus the Muckenhoupt memberships it characterizes."""

    joint_const: float
    memberships: dict


def lemma39_check(w1: Weight, w2: Weight, q1: float, q2: float, t_hat: float) -> JointWeightReport:
    """Joint constant sup_Q (mean (w1 w2)^t_hat)^(1/t_hat) prod (mean w_i^(-q_i'))^(1/q_i')
    together with the three Muckenhoupt constants of its characterization."""
    window = w1.window
    if w2.window != window:
        raise ValueError("w1 and w2 must live on the same window")
    q = 1.0 / (1.0 / q1 + 1.0 / q2)
    if t_hat < q:
        raise ValueError(f"t_hat must be >= q = {q}; got {t_hat}")
    q1c, q2c = conjugate(q1), conjugate(q2)
    prod_th = (w1.values * w2.values) ** t_hat
    dual1 = w1.values ** (-q1c)
    dual2 = w2.values ** (-q2c)
    best = 0.0
    for level in window.levels():
        val = level_means(prod_th, window, level) ** (1.0 / t_hat) \
            * level_means(dual1, window, level) ** (1.0 / q1c) \
            * level_means(dual2, window, level) ** (1.0 / q2c)
        best = max(best, float(val.max()))
    memberships = {
        "joint_power": ap_constant(Weight(window, prod_th), 1.0 + t_hat * (2.0 - 1.0 / q)),
        "dual_1": ap_constant(Weight(window, dual1), q1c * (1.0 / t_hat + 2.0 - 1.0 / q)),
        "dual_2": ap_constant(Weight(window, dual2), q2c * (1.0 / t_hat + 2.0 - 1.0 / q)),
    }
    return JointWeightReport(joint_const=best, memberships=memberships)
