"""Command-line front end: every pipeline, reproducible JSON/CSV reports.

Exit codes: 0 success, 2 verdict-style failure (milnor/lyapunov fail,
nonlinear Livsic report, unmatched spectra, criterion fail, no validated
rescaling), 1 on errors (machine-readable {"error": code} payload).
Identical configuration yields byte-identical output; the configuration
is echoed inside every report.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

import gmpy2

from . import __version__
from .algebra import BigComplex, decimal_digits
from .algebra.scalars import _fmt_mpfr
from .cer import build_horseshoe, livsic_linearity_test, periodic_words
from .degeneration import (
    FamilyMap,
    MobiusFamily,
    propose_rescalings,
    reduce_at_zero,
    rescaling_limit,
)
from .errors import BadInput, NoCandidates, RatspecError
from .exceptional import QuadraticRing, constant_lyapunov_test, make_exceptional, milnor_integrality_test
from .homoclinic import (
    adjoint_sequence,
    exceptional_criterion,
    find_homoclinic,
    fit_asymptotics,
    koenigs_chart,
    preimages,
    working_pair,
)
from .periodic import match_spectra, periodic_cycles, spectrum_table
from .ratmap import RationalMap, SpherePoint

VERDICT_FAIL_EXIT = 2


def _load_inline(text: str):
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as fh:
            return json.load(fh)
    return json.loads(text)


def parse_map_argument(text: str, prec: int) -> RationalMap:
    """Map JSON, @file, or shorthand power:M / chebyshev:M / lattes:A."""
    for prefix, kind in (("power:", "power"), ("chebyshev:", "chebyshev"),
                         ("lattes:", "flexible_lattes")):
        if text.startswith(prefix):
            return make_exceptional(kind, text[len(prefix):], prec=prec)
    obj = _load_inline(text)
    obj.setdefault("prec_bits", prec)
    return RationalMap.from_json(obj)


def _scalar_arg(text: str, prec: int) -> SpherePoint:
    if text.strip() == "inf":
        return SpherePoint.infinity("mp", prec)
    return SpherePoint.affine(BigComplex.from_string(text, prec))


def _mpfr_str(x, digits: int) -> str:
    return _fmt_mpfr(gmpy2.mpfr(x), digits)


def emit(report: dict, rows: list[dict] | None, cfg: dict, out=None) -> None:
    out = out or sys.stdout
    if cfg["format"] == "csv" and rows is not None:
        buf = io.StringIO()
        buf.write("# " + json.dumps(cfg, sort_keys=True) + "\n")
        if rows:
            keys = list(rows[0].keys())
            buf.write(",".join(keys) + "\n")
            for r in rows:
                buf.write(",".join(str(r[k]) for k in keys) + "\n")
        out.write(buf.getvalue())
    else:
        payload = dict(report)
        payload["config"] = cfg
        out.write(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")


def _repelling_fixed_points(f: RationalMap, prec: int) -> list[SpherePoint]:
    """Finite repelling fixed points, largest multiplier modulus first."""
    from .periodic import fixed_points_with_multipliers

    cands = []
    for pt, _, lam in fixed_points_with_multipliers(f, 1, prec=prec):
        if pt.is_infinity():
            continue
        a = lam.abs()
        if a > 1 + gmpy2.mpfr("1e-9"):
            cands.append(((-a, pt.to_affine().re, pt.to_affine().im), pt))
    cands.sort(key=lambda kv: kv[0])
    return [pt for _, pt in cands]


def _seed_candidates(f: RationalMap, o: SpherePoint, prec: int) -> list[SpherePoint]:
    hit = gmpy2.mpfr(2) ** (-(prec // 2))
    cands = [p for p in preimages(f, o, prec) if p.chordal(o) > hit and not p.is_infinity()]
    cands.sort(key=lambda p: (p.to_affine().re, p.to_affine().im))
    return cands


def _homoclinic_setup(f: RationalMap, args, prec: int):
    """Chart and orbit; when nothing is pinned, fall back across repelling
    fixed points and seeds (a fixed point whose backward orbits all hit a
    critical point legitimately has no usable homoclinic orbit)."""
    from .errors import CriticalCollision, DepthExceeded, NotRepelling

    if args.fixed_point:
        fixed_pts = [_scalar_arg(args.fixed_point, prec)]
    else:
        fixed_pts = _repelling_fixed_points(f, prec)
        if not fixed_pts:
            raise BadInput("map has no finite repelling fixed point; conjugate it first")
    last_err = None
    for o in fixed_pts:
        try:
            chart = koenigs_chart(f, o, order=args.order, prec=prec)
        except (NotRepelling, BadInput) as e:
            last_err = e
            continue
        seeds = ([_scalar_arg(args.seed_point, prec)] if args.seed_point
                 else _seed_candidates(f, o, prec))
        for seed in seeds:
            try:
                orbit = find_homoclinic(f, chart, seed, depth_cap=args.depth_cap)
                return chart, orbit
            except (CriticalCollision, DepthExceeded, BadInput) as e:
                last_err = e
                if args.seed_point or args.fixed_point:
                    raise
    raise last_err if last_err else BadInput("no usable homoclinic orbit found")


# -- command implementations -------------------------------------------------


def cmd_spectrum(args, cfg) -> int:
    f = parse_map_argument(args.map, cfg["prec_bits"])
    table = spectrum_table(f, args.nmax, prec=cfg["prec_bits"], budget=cfg["divisor_budget"])
    digits = decimal_digits(cfg["prec_bits"])
    report = {"degree": table.degree, "nmax": table.nmax, "s": {}, "L": {}, "RL": {}}
    rows = []
    for n in range(1, table.nmax + 1):
        report["s"][str(n)] = [z.to_string(digits) for z in table.s[n]]
        report["L"][str(n)] = [_mpfr_str(x, digits) for x in table.L[n]]
        report["RL"][str(n)] = [_mpfr_str(x, digits) for x in table.RL[n]]
        for k, z in enumerate(table.s[n]):
            rows.append({"n": n, "index": k, "multiplier": z.to_string(digits),
                         "modulus": _mpfr_str(z.abs(), digits)})
    emit(report, rows, cfg)
    return 0


def cmd_classify(args, cfg) -> int:
    f = parse_map_argument(args.map, cfg["prec_bits"])
    digits = decimal_digits(cfg["prec_bits"])
    cycles = periodic_cycles(f, args.n, prec=cfg["prec_bits"], budget=cfg["divisor_budget"])
    rows = []
    for c in cycles:
        rows.append({
            "period": c.period,
            "representative": c.points[0].to_string(digits),
            "multiplier_re": _mpfr_str(c.multiplier.re, digits),
            "multiplier_im": _mpfr_str(c.multiplier.im, digits),
            "modulus": _mpfr_str(c.multiplier.abs(), digits),
            "class": c.cls,
            "multiplicity": c.multiplicity_in_divisor,
        })
    emit({"cycles": rows, "n": args.n, "degree": f.degree}, rows, cfg)
    return 0


def cmd_milnor(args, cfg) -> int:
    f = parse_map_argument(args.map, cfg["prec_bits"])
    ring = QuadraticRing(args.D)
    v = milnor_integrality_test(f, ring, nmax=args.nmax, tol=cfg["tol"], prec=cfg["prec_bits"])
    emit({"milnor": v.to_obj(), "D": args.D}, None, cfg)
    return 0 if v.verdict == "pass" else VERDICT_FAIL_EXIT


def cmd_lyapunov(args, cfg) -> int:
    f = parse_map_argument(args.map, cfg["prec_bits"])
    v = constant_lyapunov_test(f, nmax=args.nmax, tol=cfg["tol"],
                               exception_budget=args.exception_budget, prec=cfg["prec_bits"])
    emit({"lyapunov": v.to_obj()}, None, cfg)
    return 0 if v.verdict == "pass" else VERDICT_FAIL_EXIT


def cmd_homoclinic(args, cfg) -> int:
    prec = cfg["prec_bits"]
    digits = decimal_digits(prec)
    f = parse_map_argument(args.map, prec)
    chart, orbit = _homoclinic_setup(f, args, prec)
    domain, m = working_pair(orbit, margin=args.margin)
    seq = adjoint_sequence(f, orbit, m, m + args.iters, domain)
    fit = fit_asymptotics(seq)
    verdict = exceptional_criterion(seq, tol=cfg["tol"])
    lam = chart.lam
    rows = []
    for k, i in enumerate(seq.indices):
        res = (seq.multipliers[k] - lam ** i * fit["theta0"] - fit["offset"]).abs()
        rows.append({
            "i": i,
            "q": seq.points[k].to_string(digits),
            "mu": seq.multipliers[k].to_string(digits),
            "residual": _mpfr_str(res, 24),
        })
    report = {
        "fixed_point": chart.o.to_string(digits),
        "lambda": lam.to_string(digits),
        "r_inj": _mpfr_str(chart.r_inj, 24),
        "entry_index": orbit.entry_index,
        "good_return_time": m,
        "theta0": fit["theta0"].to_string(digits),
        "offset": fit["offset"].to_string(digits),
        "error_decay_ratio": fit["error_decay_ratio"],
        "criterion": verdict.to_obj(),
        "table": rows,
    }
    emit(report, rows, cfg)
    return 0 if verdict.verdict == "pass" else VERDICT_FAIL_EXIT


def _build_horseshoe_from_args(f, args, prec):
    if args.seed_points:
        o = (_scalar_arg(args.fixed_point, prec) if args.fixed_point
             else _repelling_fixed_points(f, prec)[0])
        chart = koenigs_chart(f, o, order=args.order, prec=prec)
        seeds = [_scalar_arg(s, prec) for s in args.seed_points.split(";")]
        orbits = [find_homoclinic(f, chart, s, depth_cap=args.depth_cap) for s in seeds]
    else:
        chart, orbit = _homoclinic_setup(f, args, prec)
        orbits = [orbit]
    return chart, build_horseshoe(f, chart, orbits, margin=args.margin)


def cmd_horseshoe(args, cfg) -> int:
    prec = cfg["prec_bits"]
    digits = decimal_digits(prec)
    f = parse_map_argument(args.map, prec)
    chart, h = _build_horseshoe_from_args(f, args, prec)
    rows = [{"label": br.label, "kind": br.kind, "center": br.center.to_string(digits)}
            for br in h.branches]
    report = {
        "fixed_point": chart.o.to_string(digits),
        "m": h.m,
        "k": h.k,
        "kappa": h.kappa,
        "radius": _mpfr_str(h.domain.radius, 24),
        "branches": rows,
    }
    emit(report, rows, cfg)
    return 0


def cmd_livsic(args, cfg) -> int:
    prec = cfg["prec_bits"]
    f = parse_map_argument(args.map, prec)
    chart, h = _build_horseshoe_from_args(f, args, prec)
    coded = periodic_words(h, f, args.max_len)
    rep = livsic_linearity_test(h, f, args.max_len, threshold=args.threshold, coded=coded)
    obj = rep.to_obj()
    obj.update({"m": h.m, "k": h.k})
    emit(obj, obj["orbit_means"], cfg)
    return 0 if rep.verdict == "linear-consistent" else VERDICT_FAIL_EXIT


def cmd_rescale(args, cfg) -> int:
    fam = FamilyMap.from_json(_load_inline(args.family))
    if args.mobius:
        mob = MobiusFamily.from_json(_load_inline(args.mobius))
        res = rescaling_limit(fam, mob, args.q, budget=cfg["rescaling_budget"])
        emit({"rescale": res.to_obj()}, None, cfg)
        return 0 if not res.degenerate else VERDICT_FAIL_EXIT
    try:
        props = propose_rescalings(fam, args.q, max_denominator=args.max_denominator,
                                   budget=cfg["rescaling_budget"])
    except NoCandidates as e:
        emit({"proposals": [], "no_candidates": True, "base_change_hints": e.hints}, None, cfg)
        return VERDICT_FAIL_EXIT
    emit({"proposals": [p.to_obj() for p in props], "no_candidates": False}, None, cfg)
    return 0


def cmd_goodred(args, cfg) -> int:
    fam = FamilyMap.from_json(_load_inline(args.family))
    rep = reduce_at_zero(fam)
    emit({"goodred": rep.to_obj()}, None, cfg)
    return 0 if rep.explicit_good else VERDICT_FAIL_EXIT


def cmd_match(args, cfg) -> int:
    prec = cfg["prec_bits"]
    f = parse_map_argument(args.map, prec)
    g = parse_map_argument(args.map_b, prec)
    ta = spectrum_table(f, args.nmax, prec=prec, budget=cfg["divisor_budget"])
    tb = spectrum_table(g, args.nmax, prec=prec, budget=cfg["divisor_budget"])
    rep = match_spectra(ta, tb, tol=cfg["tol"])
    emit({"matched": rep.matched, "cost": rep.cost,
          "unmatched": [{"n": n, "multiplier": s} for n, s in rep.unmatched]}, None, cfg)
    return 0 if rep.matched else VERDICT_FAIL_EXIT


# -- argument plumbing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ratspec",
        description="Multiplier spectra, homoclinic diagnostics and rescaling limits of rational maps")
    ap.add_argument("--version", action="version", version=f"ratspec {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec-bits", type=int,
                        default=int(os.environ.get("RATSPEC_PREC_BITS", "256")))
    common.add_argument("--tol", type=float, default=1e-20)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")

    hom = argparse.ArgumentParser(add_help=False)
    hom.add_argument("--fixed-point", default=None,
                     help="scalar string; default: repelling fixed point of largest multiplier")
    hom.add_argument("--seed-point", default=None)
    hom.add_argument("--order", type=int, default=48)
    hom.add_argument("--depth-cap", type=int, default=24)
    hom.add_argument("--margin", type=float, default=0.1)

    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="s_n / L_n / RL_n tables")
    p.add_argument("--map", required=True)
    p.add_argument("--nmax", type=int, default=3)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("classify", parents=[common], help="periodic cycles of period dividing n")
    p.add_argument("--map", required=True)
    p.add_argument("--n", type=int, default=2)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("milnor", parents=[common], help="O_K-integrality detector")
    p.add_argument("--map", required=True)
    p.add_argument("--D", type=int, default=1)
    p.add_argument("--nmax", type=int, default=3)
    p.set_defaults(func=cmd_milnor)

    p = sub.add_parser("lyapunov", parents=[common], help="constant Lyapunov exponent detector")
    p.add_argument("--map", required=True)
    p.add_argument("--nmax", type=int, default=3)
    p.add_argument("--exception-budget", type=int, default=4)
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("homoclinic", parents=[common, hom],
                       help="adjoint sequence table and the exceptionality criterion")
    p.add_argument("--map", required=True)
    p.add_argument("--iters", type=int, default=12,
                   help="number of adjoint indices beyond the good return time")
    p.set_defaults(func=cmd_homoclinic)

    p = sub.add_parser("horseshoe", parents=[common, hom], help="build a horseshoe")
    p.add_argument("--map", required=True)
    p.add_argument("--seed-points", default=None, help="semicolon-separated seed scalars")
    p.set_defaults(func=cmd_horseshoe)

    p = sub.add_parser("livsic", parents=[common, hom], help="Livsic linearity test on a horseshoe")
    p.add_argument("--map", required=True)
    p.add_argument("--seed-points", default=None)
    p.add_argument("--max-len", type=int, default=3)
    p.add_argument("--threshold", type=float, default=1e-12)
    p.set_defaults(func=cmd_livsic)

    p = sub.add_parser("rescale", parents=[common],
                       help="rescaling limit of a family (or a proposal search)")
    p.add_argument("--family", required=True)
    p.add_argument("--mobius", default=None)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--max-denominator", type=int, default=6)
    p.set_defaults(func=cmd_rescale)

    p = sub.add_parser("goodred", parents=[common], help="explicit good reduction test")
    p.add_argument("--family", required=True)
    p.set_defaults(func=cmd_goodred)

    p = sub.add_parser("match", parents=[common], help="multiset spectrum comparison")
    p.add_argument("--map", required=True)
    p.add_argument("--map-b", required=True)
    p.add_argument("--nmax", type=int, default=2)
    p.set_defaults(func=cmd_match)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = {
        "command": args.command,
        "prec_bits": args.prec_bits,
        "tol": args.tol,
        "seed": args.seed,
        "format": args.format,
        "version": __version__,
        "divisor_budget": int(os.environ.get("RATSPEC_DIVISOR_BUDGET", "1000")),
        "rescaling_budget": int(os.environ.get("RATSPEC_RESCALING_BUDGET", "64")),
    }
    if cfg["prec_bits"] < 64:
        print(json.dumps({"error": "bad_input", "message": "prec_bits must be >= 64"}), file=sys.stderr)
        return 1
    try:
        return args.func(args, cfg)
    except RatspecError as e:
        print(json.dumps({"error": e.code, "message": str(e)}, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
