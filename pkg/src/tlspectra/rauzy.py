r"""Rauzy diagrams, paths and the integer cocycle.

The two elementary operations act on admissible permutation pairs; a Rauzy
class is the closure of a pair under both.  A path carries an integer matrix
``B`` (product of elementary matrices ``I + E_{loser,winner}``) transporting
length data by ``lambda' = tB^{-1} lambda``.  Positivity of ``B`` drives the
contraction theory, so the module also provides the positivity/completeness
classification of paths, the norm ``N`` over minimal positive sub-paths, the
packet decomposition, and the Hilbert pseudo-metric on the positive cone.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction

from mpmath import log, mpf

from .errors import ConnectionStop, NormExceeded
from .iet import Iet, PermutationPair
from .precision import tolerance


@dataclass(frozen=True)
class Arrow:
    source: PermutationPair
    target: PermutationPair
    kind: str      # 't' or 'b'
    winner: str
    loser: str


def elementary(pi: PermutationPair, kind: str) -> PermutationPair:
    """Apply the elementary operation of the given kind to ``pi``."""
    return arrow_of(pi, kind).target


def arrow_of(pi: PermutationPair, kind: str) -> Arrow:
    if kind not in ("t", "b"):
        raise ValueError("kind must be 't' or 'b'")
    if not pi.is_admissible():
        raise ValueError("permutation pair is not admissible")
    alpha_t = pi.top_order[-1]
    alpha_b = pi.bottom_order[-1]
    if kind == "t":
        winner, loser = alpha_t, alpha_b
        keep, move = pi.top_order, list(pi.bottom_order)
    else:
        winner, loser = alpha_b, alpha_t
        keep, move = pi.bottom_order, list(pi.top_order)
    k = move.index(winner)
    new_move = move[: k + 1] + [loser] + move[k + 1 : -1]
    if kind == "t":
        target = PermutationPair(keep, new_move)
    else:
        target = PermutationPair(new_move, keep)
    return Arrow(pi, target, kind, winner, loser)


class CocycleMatrix:
    """Nonnegative integer matrix indexed by the (sorted) alphabet."""

    __slots__ = ("letters", "rows")

    def __init__(self, letters, rows):
        self.letters = tuple(letters)
        self.rows = [list(r) for r in rows]

    @classmethod
    def identity(cls, letters):
        letters = tuple(sorted(letters))
        d = len(letters)
        return cls(letters, [[1 if i == j else 0 for j in range(d)] for i in range(d)])

    def entry(self, row_letter, col_letter) -> int:
        i = self.letters.index(row_letter)
        j = self.letters.index(col_letter)
        return self.rows[i][j]

    def __mul__(self, other: "CocycleMatrix") -> "CocycleMatrix":
        if self.letters != other.letters:
            raise ValueError("alphabet mismatch")
        d = len(self.letters)
        a, b = self.rows, other.rows
        rows = [
            [sum(a[i][k] * b[k][j] for k in range(d)) for j in range(d)]
            for i in range(d)
        ]
        return CocycleMatrix(self.letters, rows)

    def __eq__(self, other):
        return (
            isinstance(other, CocycleMatrix)
            and self.letters == other.letters
            and self.rows == other.rows
        )

    def norm(self) -> int:
        """Max absolute entry (the paper-wide matrix norm)."""
        return max(abs(x) for row in self.rows for x in row)

    def is_positive(self) -> bool:
        return all(x > 0 for row in self.rows for x in row)

    def det(self) -> int:
        rows = [[Fraction(x) for x in r] for r in self.rows]
        d = len(rows)
        det = Fraction(1)
        for c in range(d):
            p = next((r for r in range(c, d) if rows[r][c] != 0), None)
            if p is None:
                return 0
            if p != c:
                rows[c], rows[p] = rows[p], rows[c]
                det = -det
            det *= rows[c][c]
            inv = 1 / rows[c][c]
            for r in range(c + 1, d):
                f = rows[r][c] * inv
                if f:
                    rows[r] = [x - f * y for x, y in zip(rows[r], rows[c])]
        assert det.denominator == 1
        return int(det)

    def inverse(self) -> "CocycleMatrix":
        """Exact inverse; entries stay integers since det is +-1."""
        d = len(self.letters)
        aug = [
            [Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(d)]
            for i, row in enumerate(self.rows)
        ]
        for c in range(d):
            p = next(r for r in range(c, d) if aug[r][c] != 0)
            aug[c], aug[p] = aug[p], aug[c]
            f = 1 / aug[c][c]
            aug[c] = [x * f for x in aug[c]]
            for r in range(d):
                if r != c and aug[r][c]:
                    g = aug[r][c]
                    aug[r] = [x - g * y for x, y in zip(aug[r], aug[c])]
        rows = []
        for r in range(d):
            row = aug[r][d:]
            assert all(x.denominator == 1 for x in row), "non-unimodular matrix"
            rows.append([int(x) for x in row])
        return CocycleMatrix(self.letters, rows)

    def transpose(self) -> "CocycleMatrix":
        d = len(self.letters)
        return CocycleMatrix(
            self.letters, [[self.rows[j][i] for j in range(d)] for i in range(d)]
        )

    def apply(self, vec: dict) -> dict:
        """Matrix-vector product ``B v`` on letter-indexed vectors."""
        return {
            a: sum(
                self.rows[i][j] * vec[b]
                for j, b in enumerate(self.letters)
            )
            for i, a in enumerate(self.letters)
        }

    def transpose_apply(self, vec: dict) -> dict:
        return {
            b: sum(
                self.rows[i][j] * vec[a]
                for i, a in enumerate(self.letters)
            )
            for j, b in enumerate(self.letters)
        }

    def transpose_inverse_apply(self, vec: dict) -> dict:
        """``tB^{-1} v``, the length/suspension transport along the path."""
        return self.inverse().transpose_apply(vec)

    def return_times(self) -> dict:
        """``q = B 1``: return times of the induced subintervals."""
        return self.apply({a: 1 for a in self.letters})

    def __repr__(self):
        return "CocycleMatrix(%r, %r)" % (self.letters, self.rows)


class RauzyPath:
    """A finite arrow sequence; empty paths are identified with a vertex."""

    __slots__ = ("_vertices", "_kinds", "_arrows")

    def __init__(self, start: PermutationPair, kinds: str = ""):
        vertices = [start]
        arrows = []
        for k in kinds:
            ar = arrow_of(vertices[-1], k)
            arrows.append(ar)
            vertices.append(ar.target)
        self._vertices = vertices
        self._kinds = kinds
        self._arrows = arrows

    @property
    def start(self) -> PermutationPair:
        return self._vertices[0]

    @property
    def end(self) -> PermutationPair:
        return self._vertices[-1]

    @property
    def kinds(self) -> str:
        return self._kinds

    @property
    def arrows(self) -> list:
        return list(self._arrows)

    @property
    def vertices(self) -> list:
        return list(self._vertices)

    def __len__(self):
        return len(self._kinds)

    def is_loop(self) -> bool:
        return self.end == self.start

    def __mul__(self, other: "RauzyPath") -> "RauzyPath":
        if self.end != other.start:
            raise ValueError("paths do not compose")
        return RauzyPath(self.start, self._kinds + other._kinds)

    def subpath(self, i: int, j: int) -> "RauzyPath":
        """Arrows ``i..j-1`` (a path of length ``j - i``)."""
        if not (0 <= i <= j <= len(self)):
            raise ValueError("bad subpath bounds")
        return RauzyPath(self._vertices[i], self._kinds[i:j])

    def rotate(self, i: int) -> "RauzyPath":
        """For loops: the same loop based at vertex ``i``."""
        if not self.is_loop():
            raise ValueError("rotation needs a loop")
        return RauzyPath(self._vertices[i], self._kinds[i:] + self._kinds[:i])

    def repeat(self, k: int) -> "RauzyPath":
        if not self.is_loop():
            raise ValueError("repetition needs a loop")
        return RauzyPath(self.start, self._kinds * k)

    def __repr__(self):
        return "RauzyPath(%s, %r)" % (self.start, self._kinds)


def matrix(path: RauzyPath) -> CocycleMatrix:
    """``B_path`` with the convention ``B_{g1*g2} = B_{g2} B_{g1}``."""
    letters = tuple(sorted(path.start.alphabet))
    m = CocycleMatrix.identity(letters)
    index = {a: i for i, a in enumerate(letters)}
    for ar in path.arrows:
        # left-multiplying by I + E_{loser,winner} adds the winner row
        # to the loser row
        wi, li = index[ar.winner], index[ar.loser]
        m.rows[li] = [x + y for x, y in zip(m.rows[li], m.rows[wi])]
    return m


def rauzy_step(T: Iet):
    """One step of the Rauzy map; returns ``(arrow, induced IET)``."""
    pi = T.pi
    alpha_t = pi.top_order[-1]
    alpha_b = pi.bottom_order[-1]
    lt, lb = T.length(alpha_t), T.length(alpha_b)
    if abs(lt - lb) < tolerance():
        raise ConnectionStop(0)
    kind = "t" if lt > lb else "b"
    ar = arrow_of(pi, kind)
    lengths = T.lengths
    lengths[ar.winner] = lengths[ar.winner] - lengths[ar.loser]
    return ar, Iet(ar.target, lengths)


def induce(T: Iet, r: int):
    """Iterate the Rauzy map ``r`` times; returns ``(path, induced IET)``."""
    kinds = []
    cur = T
    for i in range(r):
        try:
            ar, cur = rauzy_step(cur)
        except ConnectionStop:
            raise ConnectionStop(i) from None
        kinds.append(ar.kind)
    return RauzyPath(T.pi, "".join(kinds)), cur


def classify_path(path: RauzyPath) -> dict:
    """Positivity / completeness / strong completeness of a path."""
    d = path.start.d
    positive = len(path) > 0 and matrix(path).is_positive()
    winners = {ar.winner for ar in path.arrows}
    complete = len(winners) == len(path.start.alphabet)
    blocks = complete_blocks(path)
    return {
        "positive": positive,
        "complete": complete,
        "strongly_complete": blocks >= d,
    }


def complete_blocks(path: RauzyPath) -> int:
    """Number of complete blocks under greedy left-to-right splitting."""
    alphabet = set(path.start.alphabet)
    seen = set()
    blocks = 0
    for ar in path.arrows:
        seen.add(ar.winner)
        if seen == alphabet:
            blocks += 1
            seen = set()
    return blocks


def minimal_positive_subpaths(path: RauzyPath):
    """Minimal positive continuations from every starting index.

    Yields ``(i, j, B)`` where ``path.subpath(i, j)`` is positive and no
    shorter continuation from ``i`` is.  Starts with no positive
    continuation inside the path are skipped.
    """
    L = len(path)
    letters = tuple(sorted(path.start.alphabet))
    index = {a: i for i, a in enumerate(letters)}
    arrows = path.arrows
    for i in range(L):
        m = CocycleMatrix.identity(letters)
        for j in range(i, L):
            ar = arrows[j]
            wi, li = index[ar.winner], index[ar.loser]
            m.rows[li] = [x + y for x, y in zip(m.rows[li], m.rows[wi])]
            if m.is_positive():
                yield i, j + 1, m
                break


def path_norm(path: RauzyPath):
    """``N(path)``: sup of ``||B||`` over minimal positive sub-paths.

    Returns None when the path has no positive sub-path at all.
    """
    norms = [m.norm() for _, _, m in minimal_positive_subpaths(path)]
    return max(norms) if norms else None


@dataclass
class PacketDecomposition:
    packets: list           # positive RauzyPath pieces, in order
    remainder: object       # trailing non-positive RauzyPath or None

    @property
    def complete(self) -> bool:
        return self.remainder is None


def packet_decompose(path: RauzyPath, M) -> PacketDecomposition:
    """Greedy split into minimal positive packets.

    Requires every minimal positive sub-path of ``path`` to have norm < M
    (``NormExceeded`` otherwise); each packet then has norm < M <= M**2.
    A trailing piece with no positive continuation is returned as remainder.
    """
    n = path_norm(path)
    if n is not None and n >= M:
        raise NormExceeded("minimal positive sub-path of norm %d >= %s" % (n, M))
    packets = []
    i = 0
    L = len(path)
    while i < L:
        found = None
        for a, b, _ in minimal_positive_subpaths(path.subpath(i, L)):
            if a == 0:
                found = b
            break
        if found is None:
            return PacketDecomposition(packets, path.subpath(i, L))
        packets.append(path.subpath(i, i + found))
        i += found
    return PacketDecomposition(packets, None)


def hilbert_distance(x, y):
    """Hilbert pseudo-metric on the positive cone.

    Accepts letter-indexed dicts or plain sequences (matching supports).
    """
    if isinstance(x, dict):
        keys = sorted(x)
        xs = [mpf(x[k]) for k in keys]
        ys = [mpf(y[k]) for k in keys]
    else:
        xs = [mpf(v) for v in x]
        ys = [mpf(v) for v in y]
    if any(v <= 0 for v in xs) or any(v <= 0 for v in ys):
        raise ValueError("hilbert_distance needs positive vectors")
    ratio_max = max(a / b for a, b in zip(xs, ys))
    ratio_min = min(a / b for a, b in zip(xs, ys))
    return log(ratio_max / ratio_min)


def positive_acceleration(T: Iet, k: int):
    """Matrices ``P_0..P_{k-1}`` of the positive acceleration.

    At each stage, the matrix of the minimal positive initial path of the
    current IET; the IET is then replaced by the induced one.
    """
    mats = []
    cur = T
    for _ in range(k):
        letters = tuple(sorted(cur.pi.alphabet))
        index = {a: i for i, a in enumerate(letters)}
        m = CocycleMatrix.identity(letters)
        nxt = cur
        while True:
            ar, nxt = rauzy_step(nxt)
            wi, li = index[ar.winner], index[ar.loser]
            m.rows[li] = [x + y for x, y in zip(m.rows[li], m.rows[wi])]
            if m.is_positive():
                break
        mats.append(m)
        cur = nxt
    return mats


def minimal_positive_prefix_matrix(T: Iet) -> CocycleMatrix:
    """``P(T)``: matrix of the minimal positive initial path."""
    return positive_acceleration(T, 1)[0]


def distortion(T: Iet):
    """``max lambda_a / lambda_b`` over letter pairs."""
    vals = list(T.lengths.values())
    return max(vals) / min(vals)


class RauzyClass:
    """BFS closure of a permutation pair under both elementary operations."""

    def __init__(self, members, arrows):
        self._members = set(members)
        self._arrows = dict(arrows)   # (pi, kind) -> Arrow

    @property
    def members(self) -> set:
        return set(self._members)

    def __len__(self):
        return len(self._members)

    def __contains__(self, pi):
        return pi in self._members

    def arrow(self, pi: PermutationPair, kind: str) -> Arrow:
        return self._arrows[(pi, kind)]

    def arrows(self):
        return list(self._arrows.values())

    def vertices_sorted(self) -> list:
        return sorted(self._members, key=str)

    def to_json(self) -> dict:
        return {
            "members": [str(p) for p in self.vertices_sorted()],
            "arrows": [
                [str(a.source), a.kind, a.winner, a.loser, str(a.target)]
                for a in sorted(
                    self._arrows.values(), key=lambda a: (str(a.source), a.kind)
                )
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "RauzyClass":
        members = {PermutationPair.parse(s) for s in data["members"]}
        arrows = {}
        for src, kind, winner, loser, dst in data["arrows"]:
            a = Arrow(
                PermutationPair.parse(src),
                PermutationPair.parse(dst),
                kind,
                winner,
                loser,
            )
            arrows[(a.source, kind)] = a
        return cls(members, arrows)


def rauzy_class(pi: PermutationPair, cache_dir: str | None = None) -> RauzyClass:
    """Rauzy class of ``pi``, optionally cached on disk keyed by ``str(pi)``."""
    if not pi.is_admissible():
        raise ValueError("permutation pair is not admissible")
    cache_path = None
    if cache_dir:
        key = str(pi).replace(" ", "").replace("/", "_")
        cache_path = os.path.join(cache_dir, "rauzy_class_%s.json" % key)
        if os.path.exists(cache_path):
            with open(cache_path, "r", encoding="utf-8") as fh:
                return RauzyClass.from_json(json.load(fh))
    members = {pi}
    arrows = {}
    queue = [pi]
    while queue:
        cur = queue.pop()
        for kind in ("t", "b"):
            ar = arrow_of(cur, kind)
            arrows[(cur, kind)] = ar
            if ar.target not in members:
                members.add(ar.target)
                queue.append(ar.target)
    cls = RauzyClass(members, arrows)
    if cache_path:
        os.makedirs(cache_dir, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(cls.to_json(), fh, sort_keys=True)
            os.replace(tmp, cache_path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    return cls
