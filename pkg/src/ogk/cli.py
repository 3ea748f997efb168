"""Command line front end: ``ogk zoo|validate|norm|convolve|check|field``.

Exit status: 0 when everything requested passes, 1 when a check or
validation fails, 2 on configuration errors (reported before any work).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import formats
from . import groupoid as gm
from . import young as yg
from .config import default_tolerances
from .errors import ConfigError, OGKError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _dump(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _context_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--groupoid", required=True, help="zoo id or groupoid JSON file")
    p.add_argument("--haar", default="counting", help="'counting' (default) or Haar JSON file")


def _load_gh(args) -> tuple:
    g = formats.load_groupoid(args.groupoid)
    rep = gm.validate_groupoid(g)
    if not rep.valid:
        raise ConfigError(f"groupoid {g.name} fails validation: {rep.violations[:2]}")
    h = formats.load_haar(args.haar, g)
    hrep = gm.validate_haar(g, h)
    if not hrep.valid:
        raise ConfigError(f"Haar system fails validation: {hrep.violations[:2]}")
    return g, h


# ---------------------------------------------------------------------------
# subcommands


def cmd_zoo(args) -> int:
    kinds = [args.kind] if args.kind else ["young", "groupoid", "family"]
    if "young" in kinds:
        print("# Young functions (prefix conj: for the complement)")
        for i in yg.ZOO_IDS:
            f = yg.from_id(i)
            d2 = yg.delta2_estimate(f)
            print(f"{i:24s} doubling={'no' if d2.divergent else 'yes'}")
    if "groupoid" in kinds:
        print("# groupoids")
        for i in gm.ZOO_IDS:
            g = gm.from_id(i)
            print(f"{i:24s} elements={g.n} units={len(g.units)} group_bundle={'yes' if g.is_group_bundle else 'no'}")
    if "family" in kinds:
        from .fieldlab import PRESETS

        print("# parametrised families")
        for name in sorted(PRESETS):
            print(name)
    return EXIT_OK


def cmd_validate(args) -> int:
    g = formats.load_groupoid(args.groupoid)
    rep = gm.validate_groupoid(g)
    out = {"groupoid": rep.to_dict()}
    ok = rep.valid
    if rep.valid:
        out["translations"] = gm.left_translation_bijective(g).to_dict()
        h = formats.load_haar(args.haar, g)
        hrep = gm.validate_haar(g, h)
        out["haar"] = hrep.to_dict()
        ok = ok and hrep.valid
    _dump(out, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_norm(args) -> int:
    from .orlicz import fiber_gauge_norms, fiber_l1_norms, fiber_orlicz_norms

    phi = yg.from_id(args.phi)
    g, h = _load_gh(args)
    s = formats.load_section(args.section, g)
    if args.which == "gauge":
        vals = fiber_gauge_norms(phi, s, h)
    elif args.which == "orlicz":
        vals = fiber_orlicz_norms(phi, s, h)
    else:
        vals = fiber_l1_norms(s, h)
    _dump({"phi": args.phi, "which": args.which, "fibers": {str(u): float(v) for u, v in zip(g.units, vals)},
           "sup": float(np.max(vals))}, args.out)
    return EXIT_OK


def cmd_convolve(args) -> int:
    from .convalg import convolve

    g, h = _load_gh(args)
    f = formats.load_section(args.f, g)
    k = formats.load_section(args.g, g)
    _dump(formats.section_to_dict(convolve(f, k, h)), args.out)
    return EXIT_OK


def _csv_summary(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "check", "slack", "tolerance", "verdict", "cases"])
    for r in reports:
        for c in r.checks:
            w.writerow([r.suite, c.name, repr(c.slack), repr(c.tolerance), c.verdict, c.cases])
    return buf.getvalue()


def cmd_check(args) -> int:
    from .suites import SCHEMA_VERSION, SuiteConfig, resolve, run_suites

    default_tolerances()  # surfaces a bad OGK_TOLERANCE as a config error
    names = resolve(args.suite)
    if args.trials < 1:
        raise ConfigError("--trials must be positive")
    if args.inject_fault not in (None, "assoc"):
        raise ConfigError(f"unknown fault {args.inject_fault!r}")
    for gid in args.groupoid or []:
        gm.from_id(gid)
    for pid in args.phi or []:
        yg.from_id(pid)
    cfg = SuiteConfig(args.seed, args.trials, args.groupoid or None, args.phi or None, args.inject_fault)
    t0 = time.perf_counter()
    reports = run_suites(args.suite, cfg, jobs=args.jobs)
    timing = not args.omit_timing
    passed = all(r.passed for r in reports)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "selector": args.suite,
        "seed": args.seed,
        "trials": args.trials,
        "inject_fault": args.inject_fault,
        "passed": passed,
        "suites": [r.to_dict(timing) for r in reports],
    }
    if timing:
        doc["wall_time_s"] = round(time.perf_counter() - t0, 3)
    if args.out:
        _dump(doc, args.out)
    if args.csv:
        Path(args.csv).write_text(_csv_summary(reports))
    for r in reports:
        fails = [c for c in r.checks if c.verdict != "pass"]
        status = "PASS" if not fails else "FAIL"
        print(f"{status} {r.suite:16s} checks={len(r.checks)} failed={len(fails)} skipped={len(r.skipped)}")
        for c in fails[:5]:
            print(f"    {c.name}: slack={c.slack:.3g} tol={c.tolerance:.1g} witness={c.witness}")
    print(f"{'PASS' if passed else 'FAIL'} {len(reports)} suites ({', '.join(names)})")
    return EXIT_OK if passed else EXIT_FAIL


def cmd_field(args) -> int:
    from .fieldlab import load_family, norm_continuity_profile

    fam = load_family(args.family)
    phi = yg.from_id(args.phi)
    if args.grid < 1:
        raise ConfigError("--grid must be positive")
    rep = norm_continuity_profile(fam, phi, args.which, N=args.grid, refine=args.refine)
    profile = rep.fine if args.refine else rep.coarse
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u", "norm", "adjacent_diff"])
    for row in profile.rows():
        w.writerow([repr(x) for x in row])
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    msg = f"modulus N={args.grid}: {rep.coarse.modulus:.6g}"
    if args.refine:
        msg += f", N={2 * args.grid}: {rep.fine.modulus:.6g}, ratio {rep.ratio:.4f}"
    if rep.closed_form_error is not None:
        msg += f", closed-form error {rep.closed_form_error:.3g}"
    print(msg, file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ogk", description="Orlicz norms and convolution on finite groupoids")
    sub = p.add_subparsers(dest="command", required=True)

    z = sub.add_parser("zoo", help="list built-in Young functions, groupoids and families")
    z.add_argument("--list", action="store_true", help="list ids (the default action)")
    z.add_argument("--kind", choices=["young", "groupoid", "family"])
    z.set_defaults(func=cmd_zoo)

    v = sub.add_parser("validate", help="check groupoid axioms and Haar invariance")
    v.add_argument("groupoid", help="zoo id or groupoid JSON file")
    v.add_argument("--haar", default="counting")
    v.add_argument("--out")
    v.set_defaults(func=cmd_validate)

    n = sub.add_parser("norm", help="fiberwise norms of a section")
    n.add_argument("section", help="section JSON file")
    _context_args(n)
    n.add_argument("--phi", default="power:2")
    n.add_argument("--which", choices=["gauge", "orlicz", "l1"], default="gauge")
    n.add_argument("--out")
    n.set_defaults(func=cmd_norm)

    c = sub.add_parser("convolve", help="convolution of two sections")
    c.add_argument("f")
    c.add_argument("g")
    _context_args(c)
    c.add_argument("--out")
    c.set_defaults(func=cmd_convolve)

    k = sub.add_parser("check", help="run check suites")
    k.add_argument("suite", help="suite name, module name or 'all'")
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--trials", type=int, default=1000)
    k.add_argument("--out", help="JSON report path")
    k.add_argument("--csv", help="CSV summary path")
    k.add_argument("--groupoid", action="append", help="restrict to these groupoid ids (repeatable)")
    k.add_argument("--phi", action="append", help="restrict to these Young function ids (repeatable)")
    k.add_argument("--inject-fault", help="'assoc': corrupt a product table")
    k.add_argument("--omit-timing", action="store_true", help="leave wall-time fields out of the report")
    k.add_argument("--jobs", type=int, default=1)
    k.set_defaults(func=cmd_check)

    f = sub.add_parser("field", help="norm profile of a parametrised family")
    f.add_argument("--family", required=True, help="preset name or family JSON file")
    f.add_argument("--phi", default="power:2")
    f.add_argument("--grid", type=int, default=32)
    f.add_argument("--which", choices=["gauge", "orlicz"], default="gauge")
    f.add_argument("--refine", action="store_true", help="also compute the doubled grid and report the ratio")
    f.add_argument("--out", help="CSV path (u, norm, adjacent_diff)")
    f.set_defaults(func=cmd_field)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OGKError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
