r"""Interval exchange transformations.

An IET is determined by a pair of bijections ``(top, bottom)`` from a finite
alphabet onto ``{1..d}`` together with a vector of positive lengths.  It acts
on ``I = (0, sum(lengths))`` by translating the k-th top subinterval onto the
subinterval in the position its letter occupies in the bottom line.

The module also provides the Boshernitzan-type quantity: ``E_n(T)`` is the
minimal length of a maximal continuity interval of ``T^n`` (the endpoints of
``I`` count as breakpoints), and the normalized stream ``n * E_n(T) / |I|``
whose liminf detects bounded-type behaviour.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

from mpmath import mpf

from .errors import ConnectionFound, ParseError, SingularPoint
from .precision import real, tolerance


class PermutationPair:
    """Combinatorial datum: a pair of orderings of one alphabet.

    ``top_order`` and ``bottom_order`` are tuples listing the letters of the
    alphabet left to right in each line.
    """

    __slots__ = ("_top", "_bottom", "_top_pos", "_bottom_pos")

    def __init__(self, top_order, bottom_order):
        top = tuple(str(x) for x in top_order)
        bottom = tuple(str(x) for x in bottom_order)
        if len(top) < 2:
            raise ValueError("alphabet needs at least 2 letters")
        if len(set(top)) != len(top) or set(top) != set(bottom):
            raise ValueError("top and bottom must order the same alphabet")
        self._top = top
        self._bottom = bottom
        self._top_pos = {a: i + 1 for i, a in enumerate(top)}
        self._bottom_pos = {a: i + 1 for i, a in enumerate(bottom)}

    @property
    def d(self) -> int:
        return len(self._top)

    @property
    def alphabet(self) -> tuple:
        return self._top

    @property
    def top_order(self) -> tuple:
        return self._top

    @property
    def bottom_order(self) -> tuple:
        return self._bottom

    def top(self, letter) -> int:
        return self._top_pos[letter]

    def bottom(self, letter) -> int:
        return self._bottom_pos[letter]

    def is_admissible(self) -> bool:
        """True iff no proper prefix set is shared by the two lines."""
        for k in range(1, self.d):
            if set(self._top[:k]) == set(self._bottom[:k]):
                return False
        return True

    def __eq__(self, other):
        return (
            isinstance(other, PermutationPair)
            and self._top == other._top
            and self._bottom == other._bottom
        )

    def __hash__(self):
        return hash((self._top, self._bottom))

    def __repr__(self):
        return "PermutationPair(%r)" % (str(self),)

    def __str__(self):
        return " ".join(self._top) + "/" + " ".join(self._bottom)

    @staticmethod
    def parse(text: str) -> "PermutationPair":
        """Parse ``"A B C/C B A"`` (or the same with a newline separator)."""
        if "/" in text:
            sep = text.index("/")
            lines = [text[:sep], text[sep + 1 :]]
        elif "\n" in text.strip():
            lines = text.strip().splitlines()
        else:
            raise ParseError("expected two lines separated by '/'", len(text))
        if len(lines) != 2:
            raise ParseError("expected exactly two permutation lines")
        top = lines[0].split()
        bottom = lines[1].split()
        if not top or not bottom:
            raise ParseError("empty permutation line", text.index("/") if "/" in text else 0)
        if len(top) != len(bottom) or set(top) != set(bottom):
            raise ParseError("lines must contain the same letters")
        if len(set(top)) != len(top):
            raise ParseError("repeated letter in top line")
        return PermutationPair(top, bottom)


def is_admissible(pi: PermutationPair) -> bool:
    return pi.is_admissible()


@dataclass(frozen=True)
class SingularityTable:
    """Interior singularities of ``T`` (top) and ``T^{-1}`` (bottom)."""

    top_points: tuple    # (position, letter), letters with top position > 1
    bottom_points: tuple


@dataclass(frozen=True)
class ReducedTriple:
    beta: str
    alpha: str
    n: int
    gap: object  # mpf


class Iet:
    """Interval exchange transformation ``(pi, lambda)``."""

    __slots__ = ("_pi", "_lengths", "_total", "_u_top", "_u_bottom")

    def __init__(self, pi: PermutationPair, lengths):
        self._pi = pi
        if isinstance(lengths, dict):
            lam = {a: real(lengths[a]) for a in pi.alphabet}
        else:
            vals = list(lengths)
            if len(vals) != pi.d:
                raise ValueError("need %d lengths" % pi.d)
            lam = {a: real(v) for a, v in zip(pi.alphabet, vals)}
        for a, v in lam.items():
            if not v > 0:
                raise ValueError("length of %r must be positive" % a)
        self._lengths = lam
        self._total = sum(lam.values())
        # left endpoints of the top and bottom subintervals
        u_top, u_bottom = {}, {}
        acc = mpf(0)
        for a in pi.top_order:
            u_top[a] = acc
            acc += lam[a]
        acc = mpf(0)
        for a in pi.bottom_order:
            u_bottom[a] = acc
            acc += lam[a]
        self._u_top = u_top
        self._u_bottom = u_bottom

    @property
    def pi(self) -> PermutationPair:
        return self._pi

    @property
    def lengths(self) -> dict:
        return dict(self._lengths)

    def length(self, letter) -> mpf:
        return self._lengths[letter]

    @property
    def total(self) -> mpf:
        """Length of the interval ``I``."""
        return self._total

    def u_top(self, letter) -> mpf:
        return self._u_top[letter]

    def u_bottom(self, letter) -> mpf:
        return self._u_bottom[letter]

    def lengths_in(self, order) -> list:
        return [self._lengths[a] for a in order]

    def singularity_table(self) -> SingularityTable:
        top = tuple(
            (self._u_top[a], a) for a in self._pi.top_order[1:]
        )
        bottom = tuple(
            (self._u_bottom[a], a) for a in self._pi.bottom_order[1:]
        )
        return SingularityTable(top, bottom)

    def top_letter_at(self, x) -> str:
        """Letter of the top subinterval containing ``x``; SingularPoint near a break."""
        x = real(x)
        if not (0 <= x <= self._total):
            raise ValueError("point outside the interval")
        tol = tolerance()
        order = self._pi.top_order
        for a in order[1:]:
            if abs(x - self._u_top[a]) < tol:
                raise SingularPoint("point at top singularity %r" % a)
        # rightmost letter whose left endpoint is <= x
        letter = order[0]
        for a in order[1:]:
            if self._u_top[a] <= x:
                letter = a
            else:
                break
        return letter

    def bottom_letter_at(self, x) -> str:
        x = real(x)
        if not (0 <= x <= self._total):
            raise ValueError("point outside the interval")
        tol = tolerance()
        order = self._pi.bottom_order
        for a in order[1:]:
            if abs(x - self._u_bottom[a]) < tol:
                raise SingularPoint("point at bottom singularity %r" % a)
        letter = order[0]
        for a in order[1:]:
            if self._u_bottom[a] <= x:
                letter = a
            else:
                break
        return letter

    def __call__(self, x):
        return evaluate(self, x)

    def invert(self, x):
        """The inverse map; SingularPoint at bottom singularities."""
        a = self.bottom_letter_at(x)
        return real(x) - (self._u_bottom[a] - self._u_top[a])

    def __repr__(self):
        return "Iet(%s, |I|=%s)" % (self._pi, self._total)


def evaluate(T: Iet, x):
    """Apply ``T``: translate the top interval containing ``x`` onto its bottom slot."""
    a = T.top_letter_at(x)
    return real(x) + (T.u_bottom(a) - T.u_top(a))


class _BreakSet:
    """Sorted breakpoints with incremental minimal-gap maintenance.

    Each breakpoint carries a provenance tag so that a collision can be
    reported as the connection it certifies.
    """

    def __init__(self, tagged_points):
        self.points = sorted(p for p, _ in tagged_points)
        self.origin = {p: tag for p, tag in tagged_points}
        self.min_gap = min(
            b - a for a, b in zip(self.points, self.points[1:])
        )

    def insert(self, p, tag, tol):
        """Insert ``p``; returns ``(True, twin_tag)`` on a collision."""
        i = bisect.bisect_left(self.points, p)
        lo = self.points[i - 1] if i > 0 else None
        hi = self.points[i] if i < len(self.points) else None
        for q in (lo, hi):
            if q is not None and abs(p - q) < tol:
                return True, self.origin.get(q)
        self.points.insert(i, p)
        self.origin[p] = tag
        self.min_gap = min(self.min_gap, p - lo, hi - p)
        return False, None


def _stream_states(T: Iet):
    """Backward orbits of the top singularities, with connection detection."""
    tol = tolerance()
    bottom = [(T.u_bottom(b), b) for b in T.pi.bottom_order[1:]]

    def step_back(point, alpha, depth):
        # point = T^{-depth}(u^t_alpha); a hit on a bottom singularity is a
        # connection (beta, alpha, depth)
        for ub, b in bottom:
            if abs(point - ub) < tol:
                raise ConnectionFound(b, alpha, depth)
        return T.invert(point)

    return step_back


def continuity_gap(T: Iet, n: int):
    """``E_n(T)``: minimal continuity-interval length of ``T^n``."""
    if n < 1:
        raise ValueError("n must be positive")
    for _, ngap in zip(range(n), boshernitzan_stream(T, n)):
        pass
    return ngap[1] * T.total / ngap[0]


def boshernitzan_stream(T: Iet, n_max: int):
    """Yield ``(n, n*E_n(T)/|I|)`` for ``n = 1..n_max``.

    Raises ConnectionFound as soon as a connection of depth < n is detected.
    """
    tol = tolerance()
    step_back = _stream_states(T)
    alphas = list(T.pi.top_order[1:])
    y = {a: T.u_top(a) for a in alphas}
    depth = {a: 0 for a in alphas}
    breaks = _BreakSet(
        [(mpf(0), None), (T.total, None)] + [(y[a], (a, 0)) for a in alphas]
    )
    if n_max >= 1:
        yield (1, 1 * breaks.min_gap / T.total)
    for n in range(2, n_max + 1):
        for a in alphas:
            y[a] = step_back(y[a], a, depth[a])
            depth[a] += 1
            collided, twin = breaks.insert(y[a], (a, depth[a]), tol)
            if collided:
                # T^{-k}(u^t_a) meets T^{-j}(u^t_chi): rewrites to the
                # connection (chi, a, k-j-1); endpoint hits lack a label
                chi, j = twin if twin is not None else (a, 0)
                raise ConnectionFound(chi, a, max(depth[a] - j - 1, 0))
        yield (n, n * breaks.min_gap / T.total)


def boshernitzan_estimate(T: Iet, n_max: int, window_start: int | None = None):
    """Tail-window estimate of ``E(T) = liminf n*E_n/|I|``."""
    if window_start is None:
        window_start = n_max // 2
    best = None
    for n, v in boshernitzan_stream(T, n_max):
        if n >= window_start and (best is None or v < best):
            best = v
    return best


def is_reduced_triple(T: Iet, beta, alpha, n, forward=None, backward=None):
    """Check the pullback condition of a reduced triple.

    ``forward`` may carry the orbit ``[u^b_beta, T(u^b_beta), ...]`` and
    ``backward`` the orbit ``[u^t_alpha, T^{-1}(u^t_alpha), ...]``; both are
    computed on demand otherwise.
    """
    tol = tolerance()
    if forward is None:
        forward = [T.u_bottom(beta)]
        for _ in range(n):
            forward.append(T(forward[-1]))
    if backward is None:
        backward = [T.u_top(alpha)]
    while len(backward) <= n:
        backward.append(T.invert(backward[-1]))
    if abs(forward[n] - backward[0]) < tol:
        raise ConnectionFound(beta, alpha, n)
    sings = [T.u_top(a) for a in T.pi.top_order[1:]]
    sings += [T.u_bottom(b) for b in T.pi.bottom_order[1:]]
    for k in range(n + 1):
        lo, hi = forward[n - k], backward[k]
        if lo > hi:
            lo, hi = hi, lo
        for s in sings:
            if lo < s < hi:
                return False
    return True


def reduced_triple_scan(T: Iet, n_max: int):
    """Enumerate reduced triples and estimate ``l(T)``.

    Returns ``(triples, estimate)`` where ``triples`` lists the reduced
    triples that successively improved the running minimum of
    ``n * gap / |I|`` (n >= 1), and ``estimate`` is that minimum (None if no
    reduced triple was found).
    """
    tol = tolerance()
    betas = list(T.pi.bottom_order[1:])
    alphas = list(T.pi.top_order[1:])
    u_top = {a: T.u_top(a) for a in alphas}
    forward = {b: [T.u_bottom(b)] for b in betas}
    backward = {a: [u_top[a]] for a in alphas}
    triples = []
    best = None
    for n in range(1, n_max + 1):
        for b in betas:
            if len(forward[b]) <= n:
                forward[b].append(T(forward[b][-1]))
            x = forward[b][n]
            for a in alphas:
                gap = abs(x - u_top[a])
                if gap < tol:
                    raise ConnectionFound(b, a, n)
                value = n * gap / T.total
                if best is not None and value >= best:
                    continue
                if is_reduced_triple(T, b, a, n, forward[b], backward[a]):
                    best = value
                    triples.append(ReducedTriple(b, a, n, gap))
    return triples, best
