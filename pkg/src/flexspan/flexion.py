"""Flexibility test, flexion ranges and continuity of dihedral traces."""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .construction import (CLOSURE_TOL, Embedding, all_prefixes, construct, find_flexible_di,
                           full_di, measure_dihedrals, normal_f, prefix_bits, rotation_axis,
                           symmetric_completion, all_closing_dis)
from .errors import (AliasWarning, FlexspanError, NotFlexible, SingularDerivative)
from .geometry import TWO_PI, angle_diff, cross3, vertex_rates, wrap
from .params import CapGeometry

FLEX_TOL = 1e-6          # times L_N^2
STEP_DEG = 1.0
REFINE_DEG = 1e-4


@dataclass
class FlexState:
    eps1: float
    delta: np.ndarray
    eps: np.ndarray
    Delta: np.ndarray
    ddelta: np.ndarray
    deps: np.ndarray
    dDelta: np.ndarray
    v_dot: np.ndarray
    u_dot: np.ndarray
    w_dot: np.ndarray
    eq10: float
    embedding: Embedding | None = None
    # raw values, kept when the dihedrals above are unwrapped
    raw: tuple | None = None

    def dihedrals(self) -> np.ndarray:
        """All 3N dihedrals as one vector: delta_1..N, Delta_1..N, eps_1..N."""
        return np.concatenate([self.delta, self.Delta, self.eps])

    def rates(self) -> np.ndarray:
        return np.concatenate([self.ddelta, self.dDelta, self.deps])


@dataclass
class FlexionRange:
    intervals: list  # list of (lo, hi) in radians; hi may exceed 2pi for a wrapped range
    form: str
    endpoints_singular: list = field(default_factory=list)

    def contains(self, eps1: float) -> bool:
        for lo, hi in self.intervals:
            for x in (eps1, eps1 + TWO_PI):
                if lo <= x <= hi:
                    return True
        return False

    def span(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)

    def degrees(self) -> list:
        return [(math.degrees(lo), math.degrees(hi)) for lo, hi in self.intervals]


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("FLEXSPAN_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    n = worker_count()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def build(geom: CapGeometry, eps1: float, di: int) -> Embedding:
    """Embedding of a folding, by symmetry where the sub-type allows it."""
    if geom.subtype.symmetric:
        return symmetric_completion(geom, eps1, di)
    return construct(geom, eps1, di)


def derivative_state(geom: CapGeometry, emb: Embedding) -> FlexState:
    """Dihedrals, their eps_1 rates and vertex velocities of a closed embedding."""
    N = geom.N
    delta, eps, Delta = measure_dihedrals(emb)
    dd, de, dD = np.zeros(N), np.zeros(N), np.zeros(N)
    de[0] = 1.0
    for k in list(range(2, N + 1)) + [1]:
        i = k - 1
        try:
            dd[i], e_rate, dD[i] = vertex_rates(geom.vertex_angles(k), delta[i], eps[i - 1], de[i - 1])
        except ZeroDivisionError as exc:
            raise SingularDerivative(f"degenerate vertex frame at v{k}") from exc
        if k != 1:
            de[i] = e_rate
    u, w, v = emb.u, emb.w, emb.v
    v_dot = np.zeros((N, 3))
    omega = np.zeros(3)
    for k in range(2, N):
        n_prev = normal_f(u, v[k - 2], v[k - 1])
        omega = omega + dd[k - 1] * rotation_axis(v[k - 1], u, v[k - 2], n_prev)
        v_dot[k] = cross3(omega, v[k] - u)
    m1, B1, e1 = geom.m[0], geom.B[0], emb.eps1
    w_dot = np.array([-m1 * math.sin(B1) * math.sin(e1), m1 * math.sin(B1) * math.cos(e1), 0.0])
    chord = v[N - 1] - v[0]
    eq10 = 2.0 * float(chord @ (v_dot[N - 1] - v_dot[0]))
    return FlexState(emb.eps1, delta, eps, Delta, dd, de, dD, v_dot, np.zeros(3), w_dot, eq10, emb)


def flexibility_test(geom: CapGeometry, eps1: float, di: int) -> float:
    """d|v_N - v_1|^2 / d eps_1 at a closed construction."""
    emb = build(geom, eps1, di)
    return derivative_state(geom, emb).eq10


def is_flexible_at(geom: CapGeometry, eps1: float, di: int) -> bool:
    L_N = geom.L[-1]
    try:
        emb = build(geom, eps1, di)
    except FlexspanError:
        return False
    if emb.closure > CLOSURE_TOL:
        return False
    try:
        return abs(derivative_state(geom, emb).eq10) < FLEX_TOL * L_N * L_N
    except SingularDerivative:
        return True  # endpoint of a range: construction exists, rate undefined


# ---------------------------------------------------------------- tracking

def _nearest_root(geom, emb, predict):
    """Root chooser that follows a predicted dihedral at every vertex."""
    def choose(k, p, m):
        target = predict[k - 1]
        return p if abs(angle_diff(p, target)) <= abs(angle_diff(m, target)) else m
    return choose


def _state_or_none(geom, emb):
    try:
        return derivative_state(geom, emb)
    except SingularDerivative:
        return None


def track(geom: CapGeometry, di: int, eps_values, start: Embedding | None = None,
          min_step: float = 1e-7) -> list[Embedding]:
    """Follow one folding continuously across increasing or decreasing eps_1 values.

    Roots are picked at each vertex as the one nearest to a first-order
    prediction, with the step subdivided whenever the prediction is ambiguous
    or the surface fails to close.  Stops at the first value where no closed
    continuation exists.
    """
    eps_values = list(eps_values)
    cur = start if start is not None else build(geom, eps_values[0], di)
    out = [cur]
    state = _state_or_none(geom, cur)
    for target in eps_values[1:]:
        x = cur.eps1
        h = target - x
        while abs(target - x) > 1e-15:
            step = h if abs(h) <= abs(target - x) else target - x
            rates = state.ddelta if state is not None else np.zeros(geom.N)
            pred = np.array([wrap(d) for d in cur.delta + rates * step])
            try:
                nxt = construct(geom, x + step, cur.di, _nearest_root(geom, cur, pred))
                ok = nxt.closure < CLOSURE_TOL
                if ok:
                    jump = np.abs([angle_diff(a, b) for a, b in zip(nxt.delta[1:-1], pred[1:-1])])
                    ok = jump.max() < max(0.05, 4.0 * abs(step))
            except FlexspanError:
                ok = False
            if not ok:
                if abs(step) <= min_step:
                    return out
                h = step / 2.0
                continue
            x += step
            nxt.di = full_di(geom, nxt)
            cur = nxt
            # across flat positions the rates are undefined; keep extrapolating
            # with the last good ones
            state = _state_or_none(geom, cur) or state
            h = 2.0 * h if abs(2.0 * h) <= abs(target - x) else target - x
        out.append(cur)
    return out


# ---------------------------------------------------------------- ranges

def _classify(intervals, full):
    if full:
        return "full-circle"
    if len(intervals) == 1:
        lo, hi = intervals[0]
        return "wrapped" if hi > TWO_PI else "single-interval"
    return "two-intervals" if len(intervals) == 2 else "multiple-intervals"


def _bisect(pred, good, bad, tol):
    while abs(good - bad) > tol:
        mid = 0.5 * (good + bad)
        if pred(mid):
            good = mid
        else:
            bad = mid
    return good


def _symmetric_range(geom, di, step, refine):
    pred = lambda e: is_flexible_at(geom, e, di)
    n = int(round(360.0 / step))
    grid = [math.radians(i * step) for i in range(n)]
    ok = _map(pred, grid)
    if not any(ok):
        raise NotFlexible(f"folding {di} never closes flexibly")
    if all(ok):
        return FlexionRange([(0.0, TWO_PI)], "full-circle")
    # runs of passing samples, allowing one run to wrap through 0
    start = next(i for i in range(n) if ok[i] and not ok[i - 1])
    runs = []
    i = start
    seen = 0
    while seen < n:
        if ok[i % n] and not ok[(i - 1) % n]:
            j = i
            while ok[(j + 1) % n]:
                j += 1
            runs.append((i, j))
            seen += j - i + 1
            i = j + 1
        else:
            i += 1
            seen += 1
    tol = math.radians(refine)
    h = math.radians(step)
    # near-rigid stretches can pass the test at isolated grid points, so every
    # cell inside a run must pass at its midpoint as well
    def genuine(i, j):
        if i == j:
            return pred(grid[0] + (i - 0.25) * h) or pred(grid[0] + (i + 0.25) * h)
        return all(_map(pred, [grid[0] + (c + 0.5) * h for c in range(i, j)]))
    runs = [r for r in runs if genuine(*r)]
    if not runs:
        raise NotFlexible(f"folding {di} never closes flexibly")
    intervals = []
    for i, j in runs:
        lo = _bisect(pred, grid[0] + i * h, grid[0] + (i - 1) * h, tol)
        hi = _bisect(pred, grid[0] + j * h, grid[0] + (j + 1) * h, tol)
        if lo < 0:
            lo += TWO_PI
            hi += TWO_PI
        if lo >= TWO_PI:
            lo -= TWO_PI
            hi -= TWO_PI
        intervals.append((lo, hi))
    intervals.sort()
    return FlexionRange(intervals, _classify(intervals, False))


def _third_range(geom, di, step):
    seed = math.pi / 2
    start = construct(geom, seed, di)
    if start.closure > CLOSURE_TOL or not is_flexible_at(geom, seed, di):
        raise NotFlexible(f"folding {di} does not close flexibly at eps1 = 90 deg")
    h = math.radians(step)
    n = int(round(360.0 / step))
    fwd = track(geom, di, [seed + i * h for i in range(n + 1)], start)
    if len(fwd) == n + 1:
        return FlexionRange([(0.0, TWO_PI)], "full-circle")
    bwd = track(geom, di, [seed - i * h for i in range(n + 1)], start)
    lo, hi = bwd[-1].eps1, fwd[-1].eps1
    return FlexionRange([(lo, hi)], _classify([(lo, hi)], False))


def find_flexion_range(geom: CapGeometry, di: int, step: float = STEP_DEG,
                       refine: float = REFINE_DEG) -> FlexionRange:
    """Values of eps_1 over which a folding is realized and flexible."""
    if geom.subtype.symmetric:
        return _symmetric_range(geom, prefix_bits(di, geom.M), step, refine)
    return _third_range(geom, di, step)


def range_samples(rng: FlexionRange, step: float = STEP_DEG, inset: float = 0.0) -> list[float]:
    """eps_1 values on a uniform grid over every interval of a range."""
    h = math.radians(step)
    out = []
    for lo, hi in rng.intervals:
        a, b = lo + inset, hi - inset
        if b < a:
            continue
        n = max(1, int(math.floor((b - a) / h + 1e-9)))
        out += [a + i * (b - a) / n for i in range(n + 1)]
    return out


def sweep(geom: CapGeometry, di: int, rng: FlexionRange, step: float = STEP_DEG,
          inset: float | None = None) -> list[FlexState]:
    """Continuity-adjusted states over a flexion range."""
    if geom.subtype.symmetric:
        eps_values = range_samples(rng, step, inset if inset is not None else math.radians(1e-3))
        states = []
        for e in eps_values:
            emb = build(geom, e, di)
            st = _state_or_none(geom, emb)
            if st is not None:
                states.append(st)
        return continuity_adjust(states)
    lo, hi = rng.intervals[0]
    n = max(1, int(round(math.degrees(hi - lo) / step)))
    grid = [lo + i * (hi - lo) / n for i in range(n + 1)]
    seed = construct(geom, math.pi / 2, di)
    # start at 90 degrees and walk both ways so the root labels stay continuous
    up = [e for e in grid if e >= seed.eps1]
    down = [e for e in grid if e < seed.eps1][::-1]
    fwd = track(geom, di, [seed.eps1] + up, seed)[1:]
    bwd = track(geom, di, [seed.eps1] + down, seed)[1:]
    embs = bwd[::-1] + fwd
    states = [s for s in (_state_or_none(geom, e) for e in embs) if s is not None]
    return continuity_adjust(states)


def continuity_adjust(trace: list[FlexState]) -> list[FlexState]:
    """Unwrap every dihedral so it varies continuously along the trace.

    The first sample is kept as measured; later samples move by whole turns.
    """
    if not trace:
        return trace
    for s in trace:
        if s.raw is None:
            s.raw = (s.delta.copy(), s.eps.copy(), s.Delta.copy())
    for name, idx in (("delta", 0), ("eps", 1), ("Delta", 2)):
        raw = np.array([s.raw[idx] for s in trace])
        if len(trace) > 1:
            jumps = np.abs(np.angle(np.exp(1j * np.diff(raw, axis=0))))
            if jumps.max() > math.pi / 2:
                warnings.warn(f"{name} jumps by {jumps.max():.3f} rad between samples", AliasWarning)
        adj = np.unwrap(raw, axis=0)
        # keep each series non-negative by shifting whole turns
        low = adj.min(axis=0)
        shift = np.where(low < -1e-9, TWO_PI * np.ceil(-low / TWO_PI), 0.0)
        adj = adj + shift
        for s, row in zip(trace, adj):
            setattr(s, name, row)
    return trace


# ---------------------------------------------------------------- enumeration

def enumerate_foldings(geom: CapGeometry, exhaustive: bool = False, max_n: int = 16,
                       step: float = STEP_DEG) -> list[tuple[int, FlexionRange]]:
    """Every flexible folding of a geometry with its flexion range."""
    if geom.N > max_n:
        raise ValueError(f"N = {geom.N} exceeds the enumeration cap {max_n}")
    out = []
    if geom.subtype.symmetric:
        for p in all_prefixes(geom.M):
            try:
                rng = find_flexion_range(geom, p, step)
            except NotFlexible:
                continue
            lo, hi = rng.intervals[0]
            emb = build(geom, 0.5 * (lo + hi), p)
            out.append((emb.di, rng))
        return out
    dis = []
    if geom.di is None:
        geom.di = find_flexible_di(geom)
    if geom.di is not None:
        dis.append(geom.di)
    if exhaustive:
        if geom.N > 12:
            raise ValueError("exhaustive search is limited to N <= 12")
        for di in all_closing_dis(geom, math.pi / 2):
            if di not in dis and is_flexible_at(geom, math.pi / 2, di):
                dis.append(di)
    for di in dis:
        try:
            out.append((di, find_flexion_range(geom, di, step)))
        except NotFlexible:
            continue
    return out
