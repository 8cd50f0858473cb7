"""Command-line front end.

Every subcommand prints one machine-readable report embedding the run
configuration, the tool version and hashes of the parsed inputs, so that
identical (input, config) pairs produce byte-identical reports.

Exit codes: 0 success, 2 assertion failure (a checked identity or
inequality was violated), 3 degenerate input (connection found), 4 parse
error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import mpf

from . import __version__
from .cfrac import CFExpansion, expand, perron_L
from .errors import (
    ConnectionFound,
    ConnectionStop,
    Degenerate,
    NotSuspension,
    ParseError,
    TlError,
)
from .iet import Iet, PermutationPair
from .origami import (
    Origami,
    OrbitGraph,
    hall_ray_alpha,
    hall_threshold,
    is_reduced,
    multiplicity,
    multiplicity_profile,
    orbit_graph,
    parse_cycles,
    skew_L,
    validate,
)
from .precision import precision_bits, set_precision, to_str
from .rauzy import rauzy_class
from .spectrum import (
    a_value_stream,
    enumerate_periodic_values,
    hurwitz_lower_bound,
    inequality_suite,
    periodic_value,
    stratum_of,
    vorobets_crosscheck,
)
from .zippered import ZipperedDatum

EXIT_OK = 0
EXIT_ASSERTION = 2
EXIT_DEGENERATE = 3
EXIT_PARSE = 4


@dataclass
class RunConfig:
    precision_bits: int = 192
    window: int | None = None
    max_len: int = 8
    tolerance: str = "1e-9"
    cache_dir: str | None = None
    seed: int = 0
    format: str = "json"

    def as_dict(self) -> dict:
        return {
            "precision_bits": self.precision_bits,
            "window": self.window,
            "max_len": self.max_len,
            "tolerance": self.tolerance,
            "cache_dir": self.cache_dir,
            "seed": self.seed,
            "format": self.format,
        }


def _env_default(name, fallback, cast):
    raw = os.environ.get("TL_" + name)
    if raw is None:
        return fallback
    return cast(raw)


def _num(x):
    """Render numbers as decimal strings at full configured precision."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return str(x)
    return to_str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return _num(obj)


def _hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def emit(cfg: RunConfig, inputs: dict, result: dict, out=None) -> None:
    report = {
        "version": __version__,
        "config": cfg.as_dict(),
        "inputs": {k: _hash(str(v)) for k, v in inputs.items()},
        "result": _jsonable(result),
    }
    stream = out or sys.stdout
    if cfg.format == "csv":
        flat = report["result"]
        keys = sorted(k for k, v in flat.items() if not isinstance(v, (dict, list)))
        stream.write(",".join(keys) + "\n")
        stream.write(",".join(str(flat[k]) for k in keys) + "\n")
    else:
        json.dump(report, stream, indent=2, sort_keys=True)
        stream.write("\n")


def _parse_lengths(text: str) -> list:
    vals = json.loads(text)
    return [str(v) for v in vals]


def _load_origami(args) -> Origami:
    if args.origami:
        data = json.loads(args.origami)
        if isinstance(data.get("right"), str):
            n = int(data["n"])
            return Origami(
                parse_cycles(data["right"], n), parse_cycles(data["up"], n)
            )
        return Origami.from_json(data)
    return Origami.torus()


def cmd_rauzy_class(cfg: RunConfig, args) -> int:
    pi = PermutationPair.parse(args.pi)
    if not pi.is_admissible():
        raise ParseError("permutation pair is not admissible")
    rc = rauzy_class(pi, cache_dir=cfg.cache_dir)
    g, r = stratum_of(pi)
    result = {
        "members": len(rc),
        "arrows": len(rc.arrows()),
        "genus": g,
        "singularities": r,
        "vertices": [str(p) for p in rc.vertices_sorted()],
    }
    if cfg.cache_dir:
        result["cache_dir"] = cfg.cache_dir
    emit(cfg, {"pi": args.pi}, result)
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, args) -> int:
    sub = args.spectrum_cmd
    if sub == "periodic":
        pi = PermutationPair.parse(args.klass)
        from .rauzy import RauzyPath

        orbit = periodic_value(RauzyPath(pi, args.loop))
        emit(
            cfg,
            {"class": args.klass, "loop": args.loop},
            {
                "loop": args.loop,
                "value": orbit.value,
                "lambda_star": [orbit.lambda_star[a] for a in pi.alphabet],
                "period_T": orbit.period_T,
            },
        )
        return EXIT_OK
    if sub == "enum":
        pi = PermutationPair.parse(args.klass)
        rc = rauzy_class(pi, cache_dir=cfg.cache_dir)
        values = enumerate_periodic_values(rc, args.max_len or cfg.max_len)
        g, r = stratum_of(pi)
        bound = hurwitz_lower_bound(g, r)
        rows = [
            {"value": v, "loop": loop.kinds, "base": str(loop.start)}
            for v, loop in values
        ]
        ok = all(v >= bound * (1 - mpf("1e-12")) for v, _ in values)
        emit(
            cfg,
            {"class": args.klass},
            {"count": len(rows), "lower_bound": bound, "values": rows, "bound_ok": ok},
        )
        return EXIT_OK if ok else EXIT_ASSERTION
    if sub == "value":
        pi = PermutationPair.parse(args.pi)
        zd = ZipperedDatum(pi, _parse_lengths(args.lengths), _parse_lengths(args.tau))
        try:
            est = a_value_stream(zd, args.r_max)
        except ConnectionStop as exc:
            emit(
                cfg,
                {"pi": args.pi, "lambda": args.lengths, "tau": args.tau},
                {"connection_at": exc.step, "partial": True},
            )
            return EXIT_DEGENERATE
        emit(
            cfg,
            {"pi": args.pi, "lambda": args.lengths, "tau": args.tau},
            {"a_estimate": est.running_liminf, "value": est.value, "r_max": args.r_max},
        )
        return EXIT_OK
    if sub == "crosscheck":
        pi = PermutationPair.parse(args.pi)
        zd = ZipperedDatum(pi, _parse_lengths(args.lengths), _parse_lengths(args.tau))
        try:
            rep = vorobets_crosscheck(zd, n_max=args.n_max, r_max=args.r_max)
        except (ConnectionStop, ConnectionFound) as exc:
            emit(
                cfg,
                {"pi": args.pi, "lambda": args.lengths, "tau": args.tau},
                {"connection": str(exc)},
            )
            return EXIT_DEGENERATE
        ok = rep["rel_diff"] <= mpf(args.rel_tol)
        rep["ok"] = ok
        emit(cfg, {"pi": args.pi, "lambda": args.lengths, "tau": args.tau}, rep)
        return EXIT_OK if ok else EXIT_ASSERTION
    if sub == "bounds":
        pi = PermutationPair.parse(args.klass)
        from .rauzy import RauzyPath

        orbit = periodic_value(RauzyPath(pi, args.loop))
        rep = inequality_suite(orbit)
        emit(cfg, {"class": args.klass, "loop": args.loop}, rep)
        return EXIT_OK if rep["ok"] else EXIT_ASSERTION
    raise ParseError("unknown spectrum subcommand %r" % sub)


def cmd_origami(cfg: RunConfig, args) -> int:
    o = _load_origami(args)
    sub = args.origami_cmd
    if sub == "info":
        stratum = validate(o)
        stratum["reduced"] = is_reduced(o)
        emit(cfg, {"origami": args.origami}, stratum)
        return EXIT_OK
    if sub == "orbit":
        g = orbit_graph(o)
        table = g.cusps()
        prof = multiplicity_profile(o, g)
        emit(
            cfg,
            {"origami": args.origami},
            {
                "orbit_size": len(g),
                "cusp_widths": [w for w, _ in table.cusps],
                "p_max": table.p_max,
                "M_minus": prof.M_minus,
                "M_plus": prof.M_plus,
            },
        )
        return EXIT_OK
    if sub == "multiplicity":
        p, _, q = args.slope.partition("/")
        m = multiplicity(o, int(p), int(q) if q else 1)
        emit(cfg, {"origami": args.origami, "slope": args.slope}, {"multiplicity": m})
        return EXIT_OK
    if sub == "skew":
        cf = expand(mpf(args.alpha), args.digits)
        rep = skew_L(o, cf, (1, args.digits - 2))
        emit(cfg, {"origami": args.origami, "alpha": args.alpha}, rep)
        return EXIT_OK
    if sub == "hall":
        con = hall_ray_alpha(o, mpf(args.x))
        cert = con.certificate(args.marked)
        cf = CFExpansion(0, con.digits)
        window_hi = min(con.marked[args.marked - 1], len(con.digits) - 80)
        cert["perron_window"] = perron_L(cf, (1, max(2, window_hi)))
        cert["digits_head"] = con.digits[:40]
        cert["threshold"] = hall_threshold(o, con.graph)["r"]
        out = None
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                emit(cfg, {"origami": args.origami, "x": args.x}, cert, out=fh)
        emit(cfg, {"origami": args.origami, "x": args.x}, cert)
        return EXIT_OK if cert["all_ok"] else EXIT_ASSERTION
    raise ParseError("unknown origami subcommand %r" % sub)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tlspectra",
        description="Lagrange spectra of translation surfaces via renormalization",
    )
    ap.add_argument("--precision", type=int, default=_env_default("PRECISION", 192, int))
    ap.add_argument("--cache-dir", default=_env_default("CACHE_DIR", None, str))
    ap.add_argument("--seed", type=int, default=_env_default("SEED", 0, int))
    ap.add_argument("--tolerance", default=_env_default("TOLERANCE", "1e-9", str))
    ap.add_argument("--window", type=int, default=_env_default("WINDOW", None, int))
    ap.add_argument("--max-len", type=int, default=_env_default("MAX_LEN", 8, int))
    ap.add_argument(
        "--format", choices=("json", "csv"), default=_env_default("FORMAT", "json", str)
    )
    sub = ap.add_subparsers(dest="command", required=True)

    rc = sub.add_parser("rauzy-class", help="explore a Rauzy class")
    rc.add_argument("--pi", required=True)

    sp = sub.add_parser("spectrum", help="spectrum values and cross-checks")
    spsub = sp.add_subparsers(dest="spectrum_cmd", required=True)
    p = spsub.add_parser("periodic")
    p.add_argument("--class", dest="klass", required=True)
    p.add_argument("--loop", required=True)
    p = spsub.add_parser("enum")
    p.add_argument("--class", dest="klass", required=True)
    p.add_argument("--max-len", type=int, default=None)
    p = spsub.add_parser("value")
    p.add_argument("--pi", required=True)
    p.add_argument("--lambda", dest="lengths", required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--r-max", type=int, default=200)
    p = spsub.add_parser("crosscheck")
    p.add_argument("--pi", required=True)
    p.add_argument("--lambda", dest="lengths", required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--n-max", type=int, default=3000)
    p.add_argument("--r-max", type=int, default=200)
    p.add_argument("--rel-tol", default="0.05")
    p = spsub.add_parser("bounds")
    p.add_argument("--class", dest="klass", required=True)
    p.add_argument("--loop", required=True)

    og = sub.add_parser("origami", help="square-tiled surface tools")
    ogsub = og.add_subparsers(dest="origami_cmd", required=True)
    for name in ("info", "orbit", "multiplicity", "skew", "hall"):
        p = ogsub.add_parser(name)
        p.add_argument("--origami", default=None, help="JSON or cycle notation")
        if name == "multiplicity":
            p.add_argument("--slope", required=True)
        if name == "skew":
            p.add_argument("--alpha", required=True)
            p.add_argument("--digits", type=int, default=60)
        if name == "hall":
            p.add_argument("--x", required=True)
            p.add_argument("--marked", type=int, default=8)
            p.add_argument("--out", default=None)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else 0
    cfg = RunConfig(
        precision_bits=args.precision,
        window=args.window,
        max_len=args.max_len,
        tolerance=args.tolerance,
        cache_dir=args.cache_dir,
        seed=args.seed,
        format=args.format,
    )
    set_precision(cfg.precision_bits)
    try:
        if args.command == "rauzy-class":
            return cmd_rauzy_class(cfg, args)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, args)
        if args.command == "origami":
            return cmd_origami(cfg, args)
        raise ParseError("unknown command %r" % args.command)
    except ParseError as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return EXIT_PARSE
    except (ConnectionFound, ConnectionStop, Degenerate, NotSuspension) as exc:
        print("degenerate input: %s" % exc, file=sys.stderr)
        return EXIT_DEGENERATE
    except TlError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_ASSERTION


if __name__ == "__main__":
    sys.exit(main())
