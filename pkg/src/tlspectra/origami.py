r"""Square-tiled surfaces.

An origami is a pair of permutations of the squares (right neighbour, upper
neighbour) acting transitively.  The module computes the stratum data from
the corner walk, the holonomy lattice and the reduction to a surface with
full lattice, the SL(2,Z) action on reduced origamis with its orbit graph
and cusp widths, multiplicities of rational directions through the
continued-fraction word correspondence, the skew-product spectrum values,
and the constructive digit sequence realizing the Hall ray.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from mpmath import mpf

from .cfrac import (
    CFExpansion,
    expand,
    hall_decompose,
    mat_mul,
    mat_pow,
    two_sided_value,
)
from .errors import (
    NotConnected,
    NotConnectedInEvenGraph,
    OutOfRange,
    ParseError,
)


def _compose(f, g):
    """(f o g)(x) = f(g(x)) on one-line tuples."""
    return tuple(f[x] for x in g)


def _inverse(f):
    inv = [0] * len(f)
    for i, x in enumerate(f):
        inv[x] = i
    return tuple(inv)


def _cycles(f):
    seen = [False] * len(f)
    out = []
    for i in range(len(f)):
        if seen[i]:
            continue
        cyc = [i]
        seen[i] = True
        j = f[i]
        while j != i:
            cyc.append(j)
            seen[j] = True
            j = f[j]
        out.append(cyc)
    return out


class Origami:
    """A transitive pair of square permutations, hashed by canonical form."""

    __slots__ = ("n", "right", "up", "_canonical")

    def __init__(self, right, up, check: bool = True):
        self.right = tuple(int(x) for x in right)
        self.up = tuple(int(x) for x in up)
        self.n = len(self.right)
        self._canonical = None
        if check:
            if sorted(self.right) != list(range(self.n)) or sorted(self.up) != list(
                range(self.n)
            ):
                raise ValueError("right/up must be permutations of 0..n-1")
            if not self._is_transitive():
                raise NotConnected("the square permutations are not transitive")

    def _is_transitive(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            s = stack.pop()
            for t in (self.right[s], self.up[s]):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return len(seen) == self.n

    def canonical_key(self) -> tuple:
        """Lexicographically minimal simultaneous relabeling (BFS order)."""
        if self._canonical is not None:
            return self._canonical
        best = None
        for base in range(self.n):
            label = {base: 0}
            order = [base]
            for s in order:
                for t in (self.right[s], self.up[s]):
                    if t not in label:
                        label[t] = len(order)
                        order.append(t)
            r = tuple(label[self.right[s]] for s in order)
            u = tuple(label[self.up[s]] for s in order)
            if best is None or (r, u) < best:
                best = (r, u)
        self._canonical = best
        return best

    def canonical(self) -> "Origami":
        r, u = self.canonical_key()
        return Origami(r, u, check=False)

    def __eq__(self, other):
        return isinstance(other, Origami) and self.canonical_key() == other.canonical_key()

    def __hash__(self):
        return hash(self.canonical_key())

    def corner_permutation(self) -> tuple:
        """Turn once counterclockwise around the lower-left corner."""
        r, u = self.right, self.up
        ri, ui = _inverse(r), _inverse(u)
        return tuple(u[r[ui[ri[s]]]] for s in range(self.n))

    def singular_squares(self) -> list:
        """Squares whose lower-left corner is a cone point.

        For genus one there is none; all corners are then treated as marked
        (relevant only for the one-square torus among reduced origamis).
        """
        cycles = [c for c in _cycles(self.corner_permutation()) if len(c) > 1]
        if not cycles:
            return list(range(self.n))
        return sorted(s for c in cycles for s in c)

    def to_json(self) -> dict:
        return {"n": self.n, "right": list(self.right), "up": list(self.up)}

    @classmethod
    def from_json(cls, data: dict) -> "Origami":
        o = cls(data["right"], data["up"])
        if o.n != data.get("n", o.n):
            raise ValueError("inconsistent square count")
        return o

    @classmethod
    def torus(cls) -> "Origami":
        return cls((0,), (0,))

    def __repr__(self):
        return "Origami(right=%r, up=%r)" % (self.right, self.up)


def parse_cycles(text: str, n: int) -> tuple:
    """Parse cycle notation like ``"(0 1 2)(3 5)"`` into a one-line tuple."""
    perm = list(range(n))
    i = 0
    depth_open = None
    cyc = []
    token = ""

    def flush_token():
        if token:
            cyc.append(int(token))

    for i, ch in enumerate(text):
        if ch == "(":
            if depth_open is not None:
                raise ParseError("nested parenthesis", i)
            depth_open = i
            cyc = []
            token = ""
        elif ch == ")":
            if depth_open is None:
                raise ParseError("unmatched ')'", i)
            flush_token()
            token = ""
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                if not (0 <= a < n):
                    raise ParseError("square index out of range", depth_open)
                perm[a] = b
            depth_open = None
        elif ch in ", \t":
            flush_token()
            token = ""
        elif ch.isdigit():
            token += ch
        else:
            raise ParseError("unexpected character %r" % ch, i)
    if depth_open is not None:
        raise ParseError("unclosed '('", depth_open)
    if sorted(perm) != list(range(n)):
        raise ParseError("cycles do not define a permutation")
    return tuple(perm)


def validate(o: Origami) -> dict:
    """Stratum descriptor from the corner walk."""
    cycles = _cycles(o.corner_permutation())
    zeros = sorted((len(c) - 1 for c in cycles if len(c) > 1), reverse=True)
    total = sum(zeros)
    assert total % 2 == 0
    g = total // 2 + 1
    return {
        "n": o.n,
        "genus": g,
        "zeros": zeros,
        "cone_angles": [2 * (k + 1) for k in zeros],  # in units of pi
    }


# ---------------------------------------------------------------------------
# Holonomy lattice and reduction


def _positions(o: Origami):
    """Spanning-tree development positions and the absolute period lattice."""
    pos = {0: (0, 0)}
    order = [0]
    relations = []
    for s in order:
        for t, step in ((o.right[s], (1, 0)), (o.up[s], (0, 1))):
            p = (pos[s][0] + step[0], pos[s][1] + step[1])
            if t not in pos:
                pos[t] = p
                order.append(t)
            else:
                relations.append((p[0] - pos[t][0], p[1] - pos[t][1]))
    return pos, relations


def _lattice_basis(gens):
    """Basis ``((a, 0), (b, c))`` of the sublattice of Z^2 the generators span.

    Returns None for rank < 2.
    """
    vecs = [v for v in gens if v != (0, 0)]
    if not vecs:
        return None
    # combine generators to a single vector carrying the gcd of y-components
    w = None
    for v in vecs:
        if v[1] == 0:
            continue
        if w is None:
            w = v if v[1] > 0 else (-v[0], -v[1])
            continue
        (x1, y1), (x2, y2) = w, v
        while y2:
            q = y1 // y2
            (x1, y1), (x2, y2) = (x2, y2), (x1 - q * x2, y1 - q * y2)
        w = (x1, y1) if y1 > 0 else (-x1, -y1)
    if w is None:
        return None
    c = w[1]
    a = 0
    for v in vecs:
        a = gcd(a, abs(v[0] - (v[1] // c) * w[0]))
    if a == 0:
        return None
    return ((a, 0), (w[0] % a, c))


def holonomy_lattice(o: Origami):
    """Basis of the lattice spanned by saddle-connection holonomies.

    Absolute periods always contribute; differences between singular
    corners contribute when the surface has cone points.  Returned as a
    Hermite-like basis ``(f1, f2)`` with ``f1 = (a, 0)`` horizontal.
    """
    pos, relations = _positions(o)
    gens = list(relations)
    cycles = [c for c in _cycles(o.corner_permutation()) if len(c) > 1]
    if cycles:
        reps = [c[0] for c in cycles]
        base = reps[0]
        for s in reps[1:]:
            gens.append((pos[s][0] - pos[base][0], pos[s][1] - pos[base][1]))
    basis = _lattice_basis(gens)
    if basis is None:
        raise NotConnected("holonomy lattice has rank < 2")
    (a, _), (b, c) = basis
    return ((a, 0), (b % a, c))


def lattice_index(basis) -> int:
    (a, _), (_, c) = basis
    return a * c


def is_reduced(o: Origami) -> bool:
    return lattice_index(holonomy_lattice(o)) == 1


def _walk_straight(o: Origami, s: int, v: tuple) -> int:
    """Develop the straight segment with integer vector ``v`` from a generic
    interior point of square ``s``; returns the final square."""
    vx, vy = v
    if vx == 0 and vy == 0:
        return s
    if vy == 0:
        f = o.right if vx > 0 else _inverse(o.right)
        for _ in range(abs(vx)):
            s = f[s]
        return s
    if vx == 0:
        f = o.up if vy > 0 else _inverse(o.up)
        for _ in range(abs(vy)):
            s = f[s]
        return s

    def prime_above(k):
        p = max(3, k + 1)
        while True:
            if all(p % q for q in range(2, int(p**0.5) + 1)):
                return p
            p += 1

    P = prime_above(max(abs(vx), abs(vy)))
    Q = prime_above(P)
    bx, by = Fraction(1, P), Fraction(1, Q)
    events = []
    for k in range(1, abs(vx) + 1):
        t = (k - bx) / abs(vx)
        events.append((t, "h"))
    for j in range(1, abs(vy) + 1):
        t = (j - by) / abs(vy)
        events.append((t, "v"))
    events.sort()
    rf = o.right if vx > 0 else _inverse(o.right)
    uf = o.up if vy > 0 else _inverse(o.up)
    for _, kind in events:
        s = rf[s] if kind == "h" else uf[s]
    return s


def reduce(o: Origami) -> Origami:
    """The reduced origami in the GL(2,R)-orbit (unchanged when reduced).

    Cuts the surface along the holonomy lattice and re-coordinatizes by the
    inverse basis matrix; the spectrum value is preserved.
    """
    basis = holonomy_lattice(o)
    if lattice_index(basis) == 1:
        return o
    f1, f2 = basis
    pos, _ = _positions(o)
    a, c = f1[0], f2[1]
    b = f2[0]

    def offset(p):
        # coset of p in Z^2 / <f1, f2>
        y = p[1] % c
        x = (p[0] - (p[1] - y) // c * b) % a
        return (x, y)

    sing = o.singular_squares()
    base = sing[0] if sing else 0
    base_off = offset(pos[base])
    anchors = [s for s in range(o.n) if offset(pos[s]) == base_off]
    index = {s: i for i, s in enumerate(anchors)}
    right = [index[_walk_straight(o, s, f1)] for s in anchors]
    up = [index[_walk_straight(o, s, f2)] for s in anchors]
    return Origami(right, up)


# ---------------------------------------------------------------------------
# SL(2,Z) action

_GENERATOR_ACTIONS = {
    ("T", 1): lambda r, u: (r, _compose(u, _inverse(r))),
    ("T", -1): lambda r, u: (r, _compose(u, r)),
    ("V", 1): lambda r, u: (_compose(r, _inverse(u)), u),
    ("V", -1): lambda r, u: (_compose(r, u), u),
    ("R", 1): lambda r, u: (_inverse(u), r),
    ("R", -1): lambda r, u: (u, _inverse(r)),
}

GENERATOR_MATRICES = {
    "T": ((1, 1), (0, 1)),
    "V": ((1, 0), (1, 1)),
    "R": ((0, -1), (1, 0)),
}


def parse_word(text: str) -> list:
    """Parse ``"T V^-1 R^2"`` into (generator, exponent) pairs."""
    out = []
    for tok in text.replace("*", " ").split():
        if "^" in tok:
            gen, _, e = tok.partition("^")
            exp = int(e)
        else:
            gen, exp = tok, 1
        gen = gen.upper()
        if gen not in GENERATOR_MATRICES:
            raise ParseError("unknown generator %r" % gen)
        out.append((gen, exp))
    return out


def word_matrix(word) -> tuple:
    m = ((1, 0), (0, 1))
    for gen, exp in word:
        g = GENERATOR_MATRICES[gen]
        if exp < 0:
            (a, b), (c, d) = g
            g = ((d, -b), (-c, a))  # det 1 inverse
        m = mat_mul(m, mat_pow(g, abs(exp)))
    return m


def act(word, o: Origami) -> Origami:
    """Left action ``X -> M X`` of a word in T, V, R; canonical result."""
    if isinstance(word, str):
        word = parse_word(word)
    r, u = o.right, o.up
    for gen, exp in word:
        step = _GENERATOR_ACTIONS[(gen, 1 if exp >= 0 else -1)]
        for _ in range(abs(exp)):
            r, u = step(r, u)
    return Origami(r, u, check=False).canonical()


# ---------------------------------------------------------------------------
# Orbit graph, cusps, multiplicities


@dataclass
class CuspTable:
    cusps: list      # (width, [vertex indices])
    p_max: int


class OrbitGraph:
    """SL(2,Z)-orbit of a reduced origami with generator actions as tables."""

    def __init__(self, o: Origami):
        if not is_reduced(o):
            raise ValueError("orbit graph needs a reduced origami")
        start = o.canonical()
        vertices = [start]
        index = {start.canonical_key(): 0}
        t_map, v_map = [], []
        i = 0
        while i < len(vertices):
            cur = vertices[i]
            for word, table in (("T", t_map), ("V", v_map)):
                img = act(word, cur)
                key = img.canonical_key()
                if key not in index:
                    index[key] = len(vertices)
                    vertices.append(img)
                table.append(index[key])
            i += 1
        self.vertices = vertices
        self.index = index
        self.t_map = t_map
        self.v_map = v_map
        self.r_map = [index[act("R", v).canonical_key()] for v in vertices]
        self._cycinfo = {}
        for name, table in (("T", t_map), ("V", v_map)):
            info = {}
            for cyc in _cycles(tuple(table)):
                for pos, s in enumerate(cyc):
                    info[s] = (cyc, pos)
            self._cycinfo[name] = info
        self.vertical_m = [multiplicity_vertical(v) for v in self.vertices]

    def __len__(self):
        return len(self.vertices)

    def vertex_index(self, o: Origami) -> int:
        return self.index[o.canonical_key()]

    def power(self, gen: str, exp: int, i: int) -> int:
        """Vertex image under ``gen^exp`` in O(1) using cycle tables."""
        cyc, pos = self._cycinfo[gen][i]
        return cyc[(pos + exp) % len(cyc)]

    def cusps(self) -> CuspTable:
        cycles = _cycles(tuple(self.t_map))
        cycles.sort(key=len, reverse=True)
        return CuspTable([(len(c), c) for c in cycles], len(cycles[0]))

    def t_width(self, i: int) -> int:
        return len(self._cycinfo["T"][i][0])


def orbit_graph(o: Origami) -> OrbitGraph:
    return OrbitGraph(o)


def cusps(o: Origami) -> CuspTable:
    return OrbitGraph(o).cusps()


def multiplicity_vertical(o: Origami) -> int:
    """Minimal vertical distance between marked corners (= m at co-slope 0)."""
    marked = set(o.singular_squares())
    best = None
    for s in marked:
        k = 1
        t = o.up[s]
        while t not in marked:
            t = o.up[t]
            k += 1
        if best is None or k < best:
            best = k
    return best


def _slope_word(p: int, q: int) -> list:
    """CF word blocks for co-slope p/q: exponents of T, V, T, ...

    The word ``g`` satisfies ``g . (0 or inf) = p/q`` per the convergent
    correspondence; the parity of the digit count decides which.
    """
    if q == 0:
        return None  # infinity: handled via a quarter turn
    a0 = p // q
    num, den = p - a0 * q, q
    digits = []
    while num:
        digits.append(den // num)
        den, num = num, den % num
    return [a0] + digits


def multiplicity(o: Origami, p: int, q: int) -> int:
    """Multiplicity of the rational direction with co-slope ``p/q``.

    ``q = 0`` encodes the horizontal direction.  The slope is pulled back
    to the vertical (even digit count) or horizontal (odd) of an orbit
    element through the parabolic word of its continued fraction.
    """
    o = o.canonical()
    if q == 0:
        return multiplicity_vertical(act("R", o))
    if q < 0:
        p, q = -p, -q
    if gcd(abs(p), q) != 1:
        raise ValueError("co-slope must be in lowest terms")
    exps = _slope_word(p, q)
    word = []
    for i, e in enumerate(exps):
        gen = "T" if i % 2 == 0 else "V"
        word.append((gen, -e))
    word.reverse()
    y = act(word, o)
    ndigits = len(exps) - 1
    if ndigits % 2 == 0:
        return multiplicity_vertical(y)
    return multiplicity_vertical(act("R", y))


@dataclass
class MultiplicityProfile:
    per_vertex: list
    M_minus: int
    M_plus: int


def multiplicity_profile(o: Origami, graph: OrbitGraph | None = None) -> MultiplicityProfile:
    """Extremes of the multiplicity over all rational directions.

    By covariance every rational direction is the vertical of some orbit
    vertex, so the scan over vertex verticals is exhaustive.
    """
    if graph is None:
        graph = OrbitGraph(o)
    per = list(graph.vertical_m)
    return MultiplicityProfile(per, min(per), max(per))


# ---------------------------------------------------------------------------
# Skew-product values over the continued fraction


class _ConvergentWalker:
    """Tracks ``g(c_1..c_k)^{-1} X`` (and the multiplicity of the k-th
    convergent) while digits stream in; positions alternate V, T."""

    def __init__(self, graph: OrbitGraph, start_index: int):
        self.graph = graph
        self.vertex = start_index
        self.k = 0

    def push(self, digit: int) -> int:
        gen = "V" if self.k % 2 == 0 else "T"
        self.vertex = self.graph.power(gen, -digit, self.vertex)
        self.k += 1
        return self.vertex

    def convergent_multiplicity(self) -> int:
        if self.k % 2 == 0:
            return self.graph.vertical_m[self.vertex]
        return self.graph.vertical_m[self.graph.r_map[self.vertex]]


def skew_L(
    o: Origami,
    cf: CFExpansion,
    window,
    graph: OrbitGraph | None = None,
    tail: int = 80,
) -> dict:
    """``N * max_n L(A, n) / m^2(p_n/q_n)`` over ``n`` in ``window``.

    The formula is certified only when the classical two-sided value exceeds
    twice the squared maximal convergent multiplicity; otherwise the result
    carries ``guard_ok = False``.
    """
    if graph is None:
        graph = OrbitGraph(o)
    n0, n1 = window
    if cf.a0 != 0:
        base = act([("T", -cf.a0)], graph.vertices[0])
        start = graph.vertex_index(base)
    else:
        start = 0
    walker = _ConvergentWalker(graph, start)
    usable = cf.extend_to(n1 + 1)
    n1 = min(n1, usable - 1)
    best = None
    best_n = None
    perron = None
    m_max = 1
    N = graph.vertices[0].n
    for n in range(1, n1 + 1):
        walker.push(cf.digit(n))
        if n < n0:
            continue
        m = walker.convergent_multiplicity()
        ln = two_sided_value(cf, n, tail)
        if perron is None or ln > perron:
            perron = ln
        m_max = max(m_max, m)
        v = N * ln / mpf(m) ** 2
        if best is None or v > best:
            best, best_n = v, n
    return {
        "value": best,
        "argmax_n": best_n,
        "perron": perron,
        "max_convergent_multiplicity": m_max,
        "guard_ok": bool(perron is not None and perron > 2 * mpf(m_max) ** 2),
        "window": (n0, n1),
    }


# ---------------------------------------------------------------------------
# Even graph and the Hall-ray construction


class EvenGraph:
    """Vertices of the orbit with edges ``Y -> V^a T^b Y``, 1 <= a,b < p."""

    def __init__(self, graph: OrbitGraph):
        self.graph = graph
        self.p = graph.cusps().p_max
        n = len(graph)
        self.edges = [[] for _ in range(n)]
        for i in range(n):
            for b in range(1, self.p):
                j = graph.power("T", b, i)
                for a in range(1, self.p):
                    k = graph.power("V", a, j)
                    self.edges[i].append((k, (a, b)))
        # directed reachability; each edge map is a bijection, so weak
        # components are strongly connected
        comp = list(range(n))

        def find(x):
            while comp[x] != x:
                comp[x] = comp[comp[x]]
                x = comp[x]
            return x

        for i in range(n):
            for j, _ in self.edges[i]:
                ri, rj = find(i), find(j)
                if ri != rj:
                    comp[ri] = rj
        self.component = [find(i) for i in range(n)]

    def connected(self, i: int, j: int) -> bool:
        return self.component[i] == self.component[j]

    def connect(self, src: int, dst: int) -> list:
        """Even word ``D`` (digit list) with ``g(D) . src = dst``.

        BFS over elementary even blocks; the later blocks of the walk act
        first, so the word is the reversed block sequence.
        """
        if src == dst:
            return []
        if not self.connected(src, dst):
            raise NotConnectedInEvenGraph(
                "no even word connects the prescribed vertices"
            )
        prev = {src: None}
        queue = [src]
        while queue:
            nxt = []
            for i in queue:
                for j, label in self.edges[i]:
                    if j not in prev:
                        prev[j] = (i, label)
                        if j == dst:
                            blocks = []
                            cur = j
                            while prev[cur] is not None:
                                cur, lab = prev[cur]
                                blocks.append(lab)
                            digits = []
                            for a, b in blocks:  # reversed walk order already
                                digits.extend((a, b))
                            return digits
                        nxt.append(j)
            queue = nxt
        raise NotConnectedInEvenGraph("no even word connects the prescribed vertices")


def even_graph(o: Origami, graph: OrbitGraph | None = None) -> EvenGraph:
    return EvenGraph(graph or OrbitGraph(o))


def connect_even(o: Origami, src: Origami, dst: Origami) -> list:
    g = OrbitGraph(o)
    eg = EvenGraph(g)
    return eg.connect(g.vertex_index(src), g.vertex_index(dst))


def hall_threshold(o: Origami, graph: OrbitGraph | None = None) -> dict:
    """``r(X)`` and the ingredients of the Hall-ray construction."""
    if graph is None:
        graph = OrbitGraph(o)
    prof = multiplicity_profile(o, graph)
    p = graph.cusps().p_max
    N = graph.vertices[0].n
    r_x = (
        Fraction(N, prof.M_minus**2)
        * max(2 * prof.M_plus**2 + 1, 7, p + 2)
    )
    return {
        "N": N,
        "M_minus": prof.M_minus,
        "M_plus": prof.M_plus,
        "p_max": p,
        "r": r_x,
    }


class HallRayConstruction:
    """Digit word ``C`` with marked indices where the skew value hits ``x``.

    Stage ``m`` appends ``(x0, a_1..a_{2m+1}, D, b_{2m+2}..b_1)`` where the
    connector ``D`` forces the prefix word to carry the orbit base to a
    vertex of minimal vertical multiplicity; the two-sided value at the
    marked indices then converges to ``x`` while all other indices stay
    strictly below, so the surface value is ``N x / M_minus^2``.
    """

    def __init__(self, o: Origami, x):
        self.origami = o.canonical()
        self.graph = OrbitGraph(self.origami)
        self.even = EvenGraph(self.graph)
        info = hall_threshold(self.origami, self.graph)
        self.info = info
        x = mpf(x)
        threshold = info["r"] * info["M_minus"] ** 2 / info["N"]
        if not x * threshold.denominator > threshold.numerator:
            raise OutOfRange("x must exceed r(X) M-^2 / N = %s" % threshold)
        self.x = x
        self.hall = hall_decompose(x)
        self.x0 = self.hall.x0
        p = info["p_max"]
        assert self.x0 >= max(6, p + 1) and self.x0 >= 2 * info["M_plus"] ** 2
        self.argmin = [
            i
            for i, m in enumerate(self.graph.vertical_m)
            if m == info["M_minus"]
        ]
        self.digits = []
        self.marked = []
        self._pa = 0          # g(prefix)^{-1} X as a vertex index
        self._stage = 0
        self.target_value = info["N"] * x / mpf(info["M_minus"]) ** 2

    def _push_digits(self, ds):
        for d in ds:
            gen = "V" if len(self.digits) % 2 == 0 else "T"
            self._pa = self.graph.power(gen, -d, self._pa)
            self.digits.append(d)

    def run_stage(self):
        m = self._stage
        a_part = [self.x0] + self.hall.a_digits(2 * m + 1)
        self._push_digits(a_part)
        target = self._pa
        b_block = list(reversed(self.hall.b_digits(2 * m + 2)))
        chosen = None
        for z in self.argmin:
            # src = g(B) z, applying the rightmost generator power first
            cur = z
            k = len(b_block)
            for digit in reversed(b_block):
                gen = "T" if k % 2 == 0 else "V"
                cur = self.graph.power(gen, digit, cur)
                k -= 1
            if self.even.connected(cur, target):
                chosen = (z, self.even.connect(cur, target))
                break
        if chosen is None:
            raise NotConnectedInEvenGraph(
                "no minimal-multiplicity vertex reaches the stage target"
            )
        z, connector = chosen
        self._push_digits(connector)
        self._push_digits(b_block)
        assert self._pa == z, "construction invariant violated"
        self.marked.append(len(self.digits))
        self._stage += 1

    def ensure_marked(self, count: int):
        while len(self.marked) < count:
            self.run_stage()

    def ensure_digits(self, count: int):
        while len(self.digits) < count:
            self.run_stage()

    def cf(self) -> CFExpansion:
        outer = self
        state = {"i": 0}

        def supply():
            while state["i"] >= len(outer.digits):
                outer.run_stage()
            d = outer.digits[state["i"]]
            state["i"] += 1
            return d

        return CFExpansion(0, [], supplier=supply)

    def certificate(self, marked_count: int, tail: int = 60) -> dict:
        """Verify the marked-index conditions and the digit bounds."""
        self.ensure_marked(marked_count)
        bound = max(4, self.info["p_max"] - 1)
        checks = []
        marked_set = set(self.marked[:marked_count])
        x0_positions = marked_set | {0}   # n(0) = 0: the word opens with x0
        last = self.marked[marked_count - 1]
        self.ensure_digits(last + tail + 8)
        cf = CFExpansion(0, self.digits)
        walker = _ConvergentWalker(self.graph, 0)
        digit_bound_ok = True
        for k in range(1, last + 1):
            walker.push(self.digits[k - 1])
            if k - 1 in x0_positions:
                # position n(m) + 1 must carry the integer part x0
                if self.digits[k - 1] != self.x0:
                    digit_bound_ok = False
            elif self.digits[k - 1] > bound:
                digit_bound_ok = False
            if k in marked_set:
                m_here = walker.convergent_multiplicity()
                checks.append(
                    {
                        "n": k,
                        "multiplicity": m_here,
                        "multiplicity_ok": m_here == self.info["M_minus"],
                        "next_digit_ok": self.digits[k] == self.x0,
                        "two_sided_value": two_sided_value(cf, k, tail),
                    }
                )
        return {
            "x": self.x,
            "x0": self.x0,
            "marked": self.marked[:marked_count],
            "checks": checks,
            "digit_bound_ok": digit_bound_ok,
            "target_value": self.target_value,
            "all_ok": digit_bound_ok
            and all(c["multiplicity_ok"] and c["next_digit_ok"] for c in checks),
        }


def hall_ray_alpha(o: Origami, x) -> HallRayConstruction:
    """Constructive witness that ``N x / M_minus^2`` lies in the spectrum."""
    return HallRayConstruction(o, x)
