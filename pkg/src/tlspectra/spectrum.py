r"""Spectrum values via renormalization.

The value attached to a surface is ``1 / liminf_r w_r`` where ``w_r`` is the
minimal diagonal functional along the renormalization orbit.  For a positive
loop in a Rauzy diagram the orbit is exactly periodic on the Perron
eigendata of the loop matrix, so the liminf is a minimum over one period and
the value is exact to working precision.  The module also houses the loop
enumeration (a sampler for the dense set of periodic values), the universal
lower bound of the spectrum, the identity cross-check between the IET-side
and surface-side asymptotics, and the finite-time inequality suites tying
values to norms of positive cocycle matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import log, mpf, pi as mp_pi, sqrt

from .errors import (
    ConnectionFound,
    ConnectionStop,
    Degenerate,
    InsufficientWindow,
    NotClosed,
    NotPositive,
)
from .iet import Iet, PermutationPair, boshernitzan_stream
from .precision import precision_bits
from .rauzy import (
    CocycleMatrix,
    RauzyClass,
    RauzyPath,
    complete_blocks,
    distortion,
    hilbert_distance,
    matrix,
    minimal_positive_prefix_matrix,
    minimal_positive_subpaths,
)
from .zippered import ZipperedDatum, area, heights, is_suspension, rv_step, w_value


@dataclass
class SpectrumEstimate:
    """Windowed liminf estimate of the renormalized orbit."""

    samples: list                 # (r, w_r)
    window_start: int
    running_liminf: object        # min of w_r over the trailing window
    connection_at: int | None = None

    @property
    def value(self):
        return 1 / self.running_liminf


@dataclass
class PeriodicOrbit:
    loop: RauzyPath
    lambda_star: dict
    tau_star: dict
    period_T: object
    w_sequence: list = field(repr=False)

    @property
    def w_min(self):
        return min(self.w_sequence)

    @property
    def value(self):
        return 1 / self.w_min


def run_orbit(zd: ZipperedDatum, r_max: int):
    """Renormalization orbit: yields ``(r, arrow, datum, w_r)`` from r=0.

    The r=0 entry has no arrow.  Raises ConnectionStop (re-tagged with the
    step index) when a vertical saddle connection shows up.
    """
    yield 0, None, zd, w_value(zd)
    cur = zd
    for r in range(1, r_max + 1):
        try:
            ar, cur = rv_step(cur)
        except ConnectionStop:
            raise ConnectionStop(r - 1) from None
        yield r, ar, cur, w_value(cur)


def a_value_stream(zd: ZipperedDatum, r_max: int, window_start: int | None = None):
    """Windowed estimate of ``a(X)`` and of the spectrum value ``1/a(X)``.

    On a vertical saddle connection the partial estimate is attached to the
    raised ConnectionStop as ``partial``.
    """
    if window_start is None:
        window_start = r_max // 2
    samples = []
    best = None
    try:
        for r, _, _, w in run_orbit(zd, r_max):
            samples.append((r, w))
            if r >= window_start and (best is None or w < best):
                best = w
    except ConnectionStop as exc:
        if best is None:
            best = min((w for _, w in samples), default=None)
        exc.partial = SpectrumEstimate(samples, window_start, best, exc.step)
        raise
    return SpectrumEstimate(samples, window_start, best)


def _power_iterate(apply_fn, v0: dict, signed: bool = False, max_iter: int = 20000):
    """Dominant eigenvector by normalized iteration on letter dicts."""
    conv = mpf(10) ** (-(precision_bits() // 4))
    v = dict(v0)
    scale = max(abs(x) for x in v.values())
    v = {a: x / scale for a, x in v.items()}
    for _ in range(max_iter):
        w = apply_fn(v)
        scale = max(abs(x) for x in w.values())
        w = {a: x / scale for a, x in w.items()}
        if signed:
            # align sign on the dominant coordinate before comparing
            ref = max(w, key=lambda a: abs(w[a]))
            if w[ref] * v[ref] < 0:
                w = {a: -x for a, x in w.items()}
            delta = max(abs(w[a] - v[a]) for a in w)
        else:
            delta = hilbert_distance(w, v)
        v = w
        if delta < conv:
            return v
    raise Degenerate("power iteration did not converge")


def periodic_value(loop: RauzyPath) -> PeriodicOrbit:
    """Exact (to precision) spectrum value of a positive loop.

    Length data: the positive eigenvector of the loop matrix transported by
    ``tB``; suspension data: the dominant eigendirection of ``tB^{-1}``,
    signed into the suspension cone.  The value is ``1 / min`` of the
    diagonal functional over one period of the resulting orbit.
    """
    if not loop.is_loop():
        raise NotClosed("path is not a loop")
    B = matrix(loop)
    if not B.is_positive():
        raise NotPositive("loop matrix is not positive")
    pi = loop.start
    ones = {a: mpf(1) for a in pi.alphabet}
    lam = _power_iterate(B.transpose_apply, ones)
    total = sum(lam.values())
    lam = {a: x / total for a, x in lam.items()}

    Binv_t = B.inverse().transpose()
    tau0 = {a: mpf(pi.bottom(a) - pi.top(a)) for a in pi.alphabet}
    tau = _power_iterate(Binv_t.apply, tau0, signed=True)
    if not is_suspension(pi, tau):
        tau = {a: -x for a, x in tau.items()}
        if not is_suspension(pi, tau):
            raise Degenerate("loop eigendirection is not a suspension datum")

    zd = ZipperedDatum(pi, lam, tau).area_normalized()
    contracted = B.transpose_apply(lam)
    period_T = log(sum(contracted.values()))

    ws = []
    for r, ar, _, w in run_orbit(zd, len(loop)):
        if ar is not None and ar.kind != loop.kinds[r - 1]:
            raise Degenerate("orbit of eigendata left the loop")
        if r < len(loop):
            ws.append(w)
    return PeriodicOrbit(loop, lam, zd.tau, period_T, ws)


def _loop_canonical_key(loop: RauzyPath):
    L = len(loop)
    items = [
        (str(loop.vertices[i]), loop.kinds[i]) for i in range(L)
    ]
    return min(tuple(items[i:] + items[:i]) for i in range(L))


def closed_loops(rc: RauzyClass, max_len: int):
    """All loops of length <= max_len in the class, up to cyclic rotation."""
    seen = set()
    out = []
    for base in rc.vertices_sorted():
        stack = [(base, "")]
        while stack:
            cur, kinds = stack.pop()
            if kinds and cur == base:
                loop = RauzyPath(base, kinds)
                key = _loop_canonical_key(loop)
                if key not in seen:
                    seen.add(key)
                    out.append(loop)
            if len(kinds) < max_len:
                for kind in ("t", "b"):
                    stack.append((rc.arrow(cur, kind).target, kinds + kind))
    return out


def enumerate_periodic_values(rc: RauzyClass, max_len: int, dedupe_tol=None):
    """Sorted ``(value, loop)`` over positive loops of length <= max_len.

    Values equal within ``dedupe_tol`` (default 1e-9) are merged, keeping
    the first loop realizing each.
    """
    if dedupe_tol is None:
        dedupe_tol = mpf("1e-9")
    pairs = []
    for loop in closed_loops(rc, max_len):
        if not matrix(loop).is_positive():
            continue
        orbit = periodic_value(loop)
        pairs.append((orbit.value, loop))
    pairs.sort(key=lambda p: p[0])
    merged = []
    for value, loop in pairs:
        if merged and abs(value - merged[-1][0]) < dedupe_tol:
            continue
        merged.append((value, loop))
    return merged


def omega_matrix(pi: PermutationPair) -> list:
    """The antisymmetric intersection form (rows/cols in alphabet order)."""
    letters = pi.alphabet
    out = []
    for a in letters:
        row = []
        for b in letters:
            if pi.top(a) < pi.top(b) and pi.bottom(a) > pi.bottom(b):
                row.append(1)
            elif pi.top(a) > pi.top(b) and pi.bottom(a) < pi.bottom(b):
                row.append(-1)
            else:
                row.append(0)
        out.append(row)
    return out


def _int_rank(rows) -> int:
    rows = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
        rank += 1
    return rank


def stratum_of(pi: PermutationPair) -> tuple:
    """``(genus, singularity_count)`` of the suspended surfaces."""
    g2 = _int_rank(omega_matrix(pi))
    assert g2 % 2 == 0
    g = g2 // 2
    return g, pi.d + 1 - 2 * g


def hurwitz_lower_bound(g: int, r: int):
    """Universal lower bound ``pi (2g + r - 2) / 2`` of the spectrum."""
    return mp_pi * (2 * g + r - 2) / 2


def vorobets_crosscheck(
    zd: ZipperedDatum,
    n_max: int = 5000,
    r_max: int = 300,
    window_start_n: int | None = None,
    window_start_r: int | None = None,
) -> dict:
    """Compare the IET-side and surface-side asymptotics on one datum.

    Returns estimates of both quantities, their relative difference, and
    the derived systole estimate ``sqrt(2 a)``.
    """
    if window_start_n is None:
        window_start_n = n_max // 2
    T = zd.iet
    e_best = None
    for n, v in boshernitzan_stream(T, n_max):
        if n >= window_start_n and (e_best is None or v < e_best):
            e_best = v
    est = a_value_stream(zd, r_max, window_start_r)
    a_best = est.running_liminf
    rel = abs(e_best / a_best - 1)
    return {
        "E_est": e_best,
        "a_est": a_best,
        "s_est": sqrt(2 * a_best),
        "rel_diff": rel,
        "n_max": n_max,
        "r_max": r_max,
    }


def n_infinity_periodic(loop: RauzyPath) -> int:
    """``N`` of the bi-infinite periodization: computed over two periods."""
    doubled = loop.repeat(2)
    best = 0
    for i, _, m in minimal_positive_subpaths(doubled):
        if i >= len(loop):
            break
        best = max(best, m.norm())
    return best


def thm_bounds_check(orbit: PeriodicOrbit) -> dict:
    """Both sides of the norm-vs-value inequality on a periodic orbit."""
    d = orbit.loop.start.d
    N = n_infinity_periodic(orbit.loop)
    L = orbit.value
    lower = mpf(N) ** (mpf(1) / (2 * (d - 1) * (2 * d - 3))) / mpf(
        math.factorial(d)
    ) ** (mpf(1) / (d - 1))
    upper = mpf(d) / 2 * mpf(N) ** 4
    return {
        "N": N,
        "value": L,
        "lower": lower,
        "upper": upper,
        "ok": bool(lower <= L <= upper),
    }


def w_norm_bound_check(orbit: PeriodicOrbit) -> dict:
    """Per-step lower bound ``w_r >= (2/d) / prod ||B_i||``.

    For a periodic orbit all four concatenated positive paths around any
    time can be taken equal to the loop itself.
    """
    d = orbit.loop.start.d
    norm = matrix(orbit.loop).norm()
    bound = mpf(2) / d / mpf(norm) ** 4
    ok = all(w >= bound for w in orbit.w_sequence)
    return {"bound": bound, "w_min": orbit.w_min, "ok": ok}


def strongly_complete_window(kinds: str, start_pi: PermutationPair, end: int):
    """Minimal ``m`` with the suffix ``kinds[end-m:end]`` strongly complete.

    Returns None when no suffix of the available history qualifies.
    """
    d = start_pi.d
    path = RauzyPath(start_pi, kinds[:end])
    winners = [ar.winner for ar in path.arrows]
    alphabet = set(start_pi.alphabet)
    # scan suffixes from shortest to longest, reusing the greedy block count
    for m in range(1, end + 1):
        seen = set()
        blocks = 0
        for w in winners[end - m : end]:
            seen.add(w)
            if seen == alphabet:
                blocks += 1
                seen = set()
        if blocks >= d:
            return m
    return None


def distortion_window_check(zd: ZipperedDatum, r_max: int, test_times=None) -> dict:
    """``Delta(T^{(r)}) <= d! / m^{d-1}`` at strongly-complete windows.

    ``m`` is the minimum of the diagonal functional over the minimal
    strongly-complete backward window at each test time.  Times without a
    strongly complete history are skipped (counted as such in the report).
    """
    d = zd.pi.d
    orbit = list(run_orbit(zd, r_max))
    kinds = "".join(e[1].kind for e in orbit[1:])
    ws = [e[3] for e in orbit]
    if test_times is None:
        test_times = range(1, r_max + 1)
    checked = skipped = violations = 0
    for r in test_times:
        m_len = strongly_complete_window(kinds, zd.pi, r)
        if m_len is None:
            skipped += 1
            continue
        m_val = min(ws[r - m_len : r + 1])
        T_r = orbit[r][2].iet
        checked += 1
        if distortion(T_r) > math.factorial(d) / m_val ** (d - 1):
            violations += 1
    if checked == 0:
        raise InsufficientWindow("no strongly complete window up to r_max")
    return {"checked": checked, "skipped": skipped, "violations": violations}


def inequality_suite(orbit: PeriodicOrbit) -> dict:
    """All per-orbit inequality checks; ``ok`` is the conjunction."""
    thm = thm_bounds_check(orbit)
    prop2 = w_norm_bound_check(orbit)
    zd = ZipperedDatum(orbit.loop.start, orbit.lambda_star, orbit.tau_star)
    h = heights(zd)
    tau = orbit.tau_star
    heights_ok = max(abs(t) for t in tau.values()) <= max(h.values())
    T = zd.iet
    P = minimal_positive_prefix_matrix(T)
    distortion_ok = distortion(T) <= P.norm()
    report = {
        "thm_bounds": thm,
        "w_norm_bound": prop2,
        "sup_tau_le_sup_h": bool(heights_ok),
        "distortion_le_P": bool(distortion_ok),
    }
    report["ok"] = bool(
        thm["ok"] and prop2["ok"] and heights_ok and distortion_ok
    )
    return report
