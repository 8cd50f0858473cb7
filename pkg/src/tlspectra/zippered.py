r"""Suspension data and zippered-rectangle geometry.

A triple ``(pi, lambda, tau)`` with ``tau`` in the suspension cone encodes a
translation surface.  The module computes rectangle heights and area, runs
the invertible renormalization on triples, and evaluates the minimal
diagonal functional

    w = min |<lambda, w_{b,a}>| * |<tau, w_{b,a}>| / area

over letter pairs with nontrivial prefix functionals, the quantity whose
liminf along the renormalization orbit gives the spectrum value.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mpf

from .errors import ConnectionStop, Degenerate, NotSuspension
from .iet import Iet, PermutationPair
from .precision import real, tolerance
from .rauzy import Arrow, arrow_of


def is_suspension(pi: PermutationPair, tau: dict) -> bool:
    """Membership in the suspension cone: strict prefix-sign conditions."""
    acc = mpf(0)
    for a in pi.top_order[:-1]:
        acc += tau[a]
        if not acc > 0:
            return False
    acc = mpf(0)
    for a in pi.bottom_order[:-1]:
        acc += tau[a]
        if not acc < 0:
            return False
    return True


def canonical_tau(pi: PermutationPair) -> dict:
    """The suspension datum ``tau_x = bottom(x) - top(x)``."""
    if not pi.is_admissible():
        raise ValueError("permutation pair is not admissible")
    return {a: mpf(pi.bottom(a) - pi.top(a)) for a in pi.alphabet}


class ZipperedDatum:
    """Combinatorial-length-suspension triple ``(pi, lambda, tau)``."""

    __slots__ = ("_iet", "_tau")

    def __init__(self, pi: PermutationPair, lengths, tau):
        self._iet = Iet(pi, lengths)
        if isinstance(tau, dict):
            tv = {a: real(tau[a]) for a in pi.alphabet}
        else:
            vals = list(tau)
            if len(vals) != pi.d:
                raise ValueError("need %d suspension coordinates" % pi.d)
            tv = {a: real(v) for a, v in zip(pi.alphabet, vals)}
        if not is_suspension(pi, tv):
            raise NotSuspension("tau violates the suspension inequalities")
        self._tau = tv

    @property
    def pi(self) -> PermutationPair:
        return self._iet.pi

    @property
    def iet(self) -> Iet:
        return self._iet

    @property
    def lengths(self) -> dict:
        return self._iet.lengths

    @property
    def tau(self) -> dict:
        return dict(self._tau)

    def zeta(self) -> dict:
        """Complex letter vectors ``lambda + i tau`` as (re, im) pairs."""
        lam = self._iet.lengths
        return {a: (lam[a], self._tau[a]) for a in self.pi.alphabet}

    def scaled(self, c_lambda=1, c_tau=1) -> "ZipperedDatum":
        lam = {a: v * c_lambda for a, v in self._iet.lengths.items()}
        tau = {a: v * c_tau for a, v in self._tau.items()}
        return ZipperedDatum(self.pi, lam, tau)

    def area_normalized(self) -> "ZipperedDatum":
        """Scale ``tau`` so the surface has unit area."""
        return self.scaled(1, 1 / area(self))

    def __repr__(self):
        return "ZipperedDatum(%s)" % (self.pi,)


@dataclass(frozen=True)
class Period:
    """A period of the surface: holonomy vector with provenance."""

    re: object
    im: object
    kind: str        # 'diagonal', 'top_cord' or 'bottom_cord'
    letters: tuple

    @property
    def area(self):
        return abs(self.re) * abs(self.im)


def heights(zd: ZipperedDatum) -> dict:
    """Rectangle heights ``h = -Omega_pi tau`` (own-position prefix sums)."""
    pi = zd.pi
    tau = zd._tau
    h = {}
    acc_top = {}
    acc = mpf(0)
    for a in pi.top_order:
        acc_top[a] = acc
        acc += tau[a]
    acc = mpf(0)
    for a in pi.bottom_order:
        h[a] = acc_top[a] - acc
        acc += tau[a]
    for a, v in h.items():
        if not v > 0:
            raise NotSuspension("height of %r not positive" % a)
    return h


def area(zd: ZipperedDatum) -> mpf:
    """Flat area ``<lambda, h>`` of the suspended surface."""
    h = heights(zd)
    lam = zd._iet.lengths
    return sum(lam[a] * h[a] for a in zd.pi.alphabet)


def _pair_functionals(zd: ZipperedDatum):
    """``(<lambda, w_{b,a}>, <tau, w_{b,a}>)`` for the admissible pairs.

    The lambda pairing is just ``u^b_b - u^t_a``; the tau pairing is the
    analogous difference of tau prefix sums.
    """
    pi = zd.pi
    iet = zd._iet
    tau = zd._tau
    tau_top, tau_bottom = {}, {}
    acc = mpf(0)
    for a in pi.top_order:
        tau_top[a] = acc
        acc += tau[a]
    acc = mpf(0)
    for a in pi.bottom_order:
        tau_bottom[a] = acc
        acc += tau[a]
    for b in pi.bottom_order[1:]:
        for a in pi.top_order[1:]:
            re = iet.u_bottom(b) - iet.u_top(a)
            im = tau_bottom[b] - tau_top[a]
            yield b, a, re, im


def w_value(zd: ZipperedDatum) -> mpf:
    """The minimal renormalized diagonal area."""
    ar = area(zd)
    best = None
    for _, _, re, im in _pair_functionals(zd):
        v = abs(re) * abs(im)
        if best is None or v < best:
            best = v
    return best / ar


def minimizing_diagonal(zd: ZipperedDatum) -> Period:
    """The period attaining the minimum in ``w_value``."""
    best = None
    for b, a, re, im in _pair_functionals(zd):
        v = abs(re) * abs(im)
        if best is None or v < best[0]:
            best = (v, Period(re, im, "diagonal", (b, a)))
    return best[1]


def cords(zd: ZipperedDatum) -> list:
    """All consecutive-letter sums of ``zeta`` in each line."""
    pi = zd.pi
    lam = zd._iet.lengths
    tau = zd._tau
    out = []
    for kind, order in (("top_cord", pi.top_order), ("bottom_cord", pi.bottom_order)):
        d = len(order)
        for l in range(d):
            re, im = mpf(0), mpf(0)
            for m in range(l, d):
                re += lam[order[m]]
                im += tau[order[m]]
                out.append(Period(re, im, kind, tuple(order[l : m + 1])))
    return out


def rv_step(zd: ZipperedDatum):
    """One step of the renormalization on triples."""
    pi = zd.pi
    alpha_t = pi.top_order[-1]
    alpha_b = pi.bottom_order[-1]
    lam = zd._iet.lengths
    lt, lb = lam[alpha_t], lam[alpha_b]
    if abs(lt - lb) < tolerance():
        raise ConnectionStop(0)
    kind = "t" if lt > lb else "b"
    ar = arrow_of(pi, kind)
    lam[ar.winner] = lam[ar.winner] - lam[ar.loser]
    tau = zd.tau
    tau[ar.winner] = tau[ar.winner] - tau[ar.loser]
    return ar, ZipperedDatum(ar.target, lam, tau)


def rv_inverse_step(zd: ZipperedDatum):
    """The unique predecessor under the renormalization.

    The type of the incoming arrow is read off the sign of ``sum(tau)``:
    positive means the last step was of bottom type.  Returns the arrow
    (from the predecessor to ``zd``) and the predecessor.
    """
    pi = zd.pi
    tau = zd.tau
    total = sum(tau.values())
    if abs(total) < tolerance():
        raise Degenerate("sum of tau vanishes; predecessor type undefined")
    kind = "b" if total > 0 else "t"
    if kind == "t":
        keep, moved_line = pi.top_order, list(pi.bottom_order)
    else:
        keep, moved_line = pi.bottom_order, list(pi.top_order)
    winner = keep[-1]
    k = moved_line.index(winner)
    if k + 1 >= len(moved_line):
        raise Degenerate("datum is not in the image of the %r branch" % kind)
    loser = moved_line[k + 1]
    prev_line = moved_line[: k + 1] + moved_line[k + 2 :] + [loser]
    if kind == "t":
        prev_pi = PermutationPair(keep, prev_line)
    else:
        prev_pi = PermutationPair(prev_line, keep)
    lam = zd._iet.lengths
    lam[winner] = lam[winner] + lam[loser]
    tau[winner] = tau[winner] + tau[loser]
    prev = ZipperedDatum(prev_pi, lam, tau)
    return arrow_of(prev_pi, kind), prev
