"""Command line front end.

Exit codes: 0 success, 1 selftest failure or unexpected error, 2 bad input,
3 violated mathematical condition, 4 resource cap.  Errors are printed to
stderr as one JSON object ``{"error": code, "message": text}``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from . import bounds as bnd
from .errors import ConditionError, HaarEnergyError, ResourceCapError, SpectrumError
from .moments import (
    DEFAULT_P_MAX,
    MomentReport,
    central_moment,
    gaussian_moment,
    moment_report,
)
from .montecarlo import (
    SampleRun,
    empirical_mgf,
    empirical_moments,
    reproduce_fig1,
    sample_energy,
)
from .perm_comb import P_CAP, CycleType
from .spectral import (
    DEFAULT_STATE_TOL,
    StateSpectrum,
    fig1_spectra,
    load_spectra,
)
from .weingarten import weingarten_table

EXIT_INPUT = 2
EXIT_CONDITION = 3
EXIT_CAP = 4

CONSTANTS = {
    "sqrt6": math.sqrt(6.0),
    "two_sqrt3": 2.0 * math.sqrt(3.0),
    "pure_suppression_threshold_d": bnd.PURE_SUPPRESSION_THRESHOLD,
}


def _version_text() -> str:
    lines = [f"haarenergy {__version__}"]
    lines += [f"  {k} = {v!r}" for k, v in CONSTANTS.items()]
    return "\n".join(lines)


def _load(args) -> tuple[StateSpectrum, object]:
    if args.spectra is None:
        raise SpectrumError("--spectra is required")
    if args.spectra == "fig1":
        rho, h = fig1_spectra()
    else:
        rho, h = load_spectra(args.spectra, state_tol=args.state_tol)
    if getattr(args, "pure", False):
        rho = StateSpectrum.pure(h.d)
    return rho, h


def _writer(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _emit_csv(header, rows, path=None) -> None:
    fh, close = _writer(path)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if close:
            fh.close()


def _emit_json(obj, path=None) -> None:
    fh, close = _writer(path)
    try:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
    finally:
        if close:
            fh.close()


def _fraction_json(v: Fraction) -> dict:
    return {"numerator": v.numerator, "denominator": v.denominator}


# ---------------------------------------------------------------------------
# subcommands


def cmd_weingarten(args) -> int:
    table = weingarten_table(args.p, args.d, allow_large=args.allow_large)
    if args.cls:
        lam = CycleType.parse(args.cls)
        if lam.p != args.p:
            raise ConditionError(f"class {lam} is not a partition of p={args.p}")
        _emit_json(_fraction_json(table[lam]), args.out)
        return 0
    rows = [{"class": lam.label(), **_fraction_json(v), "value": float(v)} for lam, v in table]
    _emit_json({"p": args.p, "d": args.d, "values": rows}, args.out)
    return 0


def cmd_moments(args) -> int:
    if args.from_run:
        run = SampleRun.load(args.from_run)
        rows = empirical_moments(run, args.pmax)
        if args.format == "json":
            _emit_json([{"p": p, "central_moment": m, "se": se} for p, m, se in rows], args.out)
        else:
            _emit_csv(("p", "central_moment", "se"), [(p, repr(m), repr(se)) for p, m, se in rows], args.out)
        return 0
    rho, h = _load(args)
    report: MomentReport = moment_report(rho, h, args.pmax, allow_large=args.allow_large)
    if args.format == "json":
        _emit_json(
            {
                "d": report.d,
                "p_max": report.p_max,
                "mu": report.mu,
                "sigma2": report.sigma2,
                "rows": [dict(zip(report.CSV_HEADER, r)) for r in report.csv_rows()],
            },
            args.out,
        )
    else:
        _emit_csv(report.CSV_HEADER, report.csv_rows(), args.out)
    return 0


def cmd_bounds(args) -> int:
    rho, h = _load(args)
    ctx = bnd.BoundContext.from_spectra(rho, h)
    table = bnd.moment_bounds(ctx, args.pmax)
    rows = []
    for p, rhs in table.rows:
        if rhs is None:
            rows.append((p, "", "", "", "false"))
            continue
        f = rhs / bnd.scaling_factor_G(p, ctx) if ctx.sigma2 > 0 else (
            bnd.f_pure(ctx.d, p, ctx.eta) if ctx.purity_flag else bnd.f_general(ctx.d, p, ctx.eta)
        )
        rows.append((p, repr(bnd.scaling_factor_G(p, ctx)), repr(f), repr(rhs), "true"))
    _emit_csv(("p", "G_p", "f_H", "bound_rhs", "admissible"), rows, args.out)
    if table.no_admissible_p:
        print(json.dumps({"warning": "no-admissible-p", "message": table.reason}), file=sys.stderr)
    return 0


def cmd_mgf_bound(args) -> int:
    rho, h = _load(args)
    ctx = bnd.BoundContext.from_spectra(rho, h)
    grid = bnd.mgf_bound_grid(ctx, args.tpoints)
    empirical = None
    if args.run:
        run = SampleRun.load(args.run)
        empirical = [v for _, v, _ in empirical_mgf(run, grid)]
    rows = []
    for i, t in enumerate(grid):
        emp = "" if empirical is None else repr(empirical[i])
        rows.append((repr(float(t)), repr(bnd.mgf_bound(t, ctx)), repr(math.exp(t * t * ctx.sigma2 / 2)), emp))
    _emit_csv(("t", "bound", "gaussian_mgf", "empirical_mgf_optional"), rows, args.out)
    return 0


def cmd_sample(args) -> int:
    rho, h = _load(args)
    run = sample_energy(rho, h, args.n, seed=args.seed, workers=args.workers)
    if args.seed is None:
        print(json.dumps({"seed": run.seed}), file=sys.stderr)
    if args.out:
        run.save(args.out)
    else:
        _emit_json(run.to_dict())
    return 0


def cmd_fig1(args) -> int:
    bundle = reproduce_fig1(seed=args.seed, n=args.n, workers=args.workers)
    if args.seed is None:
        print(json.dumps({"seed": bundle.run.seed}), file=sys.stderr)
    _emit_csv(bundle.CSV_HEADER, bundle.csv_rows(), args.out)
    meta = {k: v for k, v in bundle.meta.items()}
    print(json.dumps(meta, indent=2), file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return 0


def _selftest_checks(rng: np.random.Generator) -> list[tuple[str, bool, str]]:
    from .perm_comb import derangement_count, all_permutations, cycle_type
    from .weingarten import closed_form_small_p, weingarten_class_sum
    from .spectral import HamiltonianSpectrum, eta, proposition1_bound, theta_functional, trace_product_bound
    from .perm_comb import derangement_classes
    from .moments import variance

    out = []
    ok = all(
        weingarten_table(lam.p, d)[lam] == closed_form_small_p(lam, d)
        for d in (4, 7, 12)
        for p in (1, 2, 3, 4)
        for lam, _ in weingarten_table(p, d)
    )
    out.append(("weingarten-closed-forms", ok, "p<=4, d in {4,7,12}"))
    ok = all(
        weingarten_table(p, d).class_sum() == weingarten_class_sum(p, d) for p in range(1, 7) for d in (p, p + 3)
    )
    out.append(("weingarten-class-sum", ok, "p<=6"))
    ok = all(
        derangement_count(p) == sum(1 for s in all_permutations(p) if cycle_type(s).is_derangement)
        for p in range(1, 7)
    )
    out.append(("derangement-counts", ok, "p<=6"))

    worst = 0.0
    printed_misses = 0
    for _ in range(20):
        x = rng.normal(size=8)
        x -= x.mean()
        for p in range(2, 7):
            for lam, _ in derangement_classes(p):
                value = abs(theta_functional(x, lam))
                worst = max(worst, value / trace_product_bound(x, lam))
                printed_misses += value > proposition1_bound(x, lam) * (1 + 1e-12)
    out.append(("trace-product-bound", worst <= 1 + 1e-12, f"max ratio {worst:.3g}"))
    print(f"INFO printed eta^(|tau|-p/2) bound exceeded in {printed_misses} cases (known, not counted)")

    violations = 0
    checked = 0
    for d in (9, 16):
        for pure in (False, True):
            p_top = min(8, d) if pure else bnd.validity_p_max(d)
            for _ in range(5):
                lam = rng.dirichlet(np.ones(d))
                rho = StateSpectrum.pure(d) if pure else StateSpectrum(lam / lam.sum())
                h = HamiltonianSpectrum(rng.normal(size=d))
                ctx = bnd.BoundContext.from_spectra(rho, h)
                for p in range(2, p_top + 1):
                    exact = central_moment(rho, h, p)
                    gauss = gaussian_moment(p, ctx.sigma2)
                    rhs = bnd.moment_bound_rhs(p, ctx)
                    checked += 1
                    violations += not bnd.moment_bound_holds(exact, gauss, rhs, bnd.scaling_factor_G(p, ctx))
    out.append(("moment-bounds", violations == 0, f"{violations} violations in {checked} checks"))

    rho, h = fig1_spectra()
    ok = abs(variance(rho, h) - 0.020055) < 1e-6 and abs(eta(h.values - h.values.mean()) - 0.2317) < 1e-4
    out.append(("fig1-functionals", ok, "eta and variance of the printed spectra"))

    run = sample_energy(rho, h, 20_000, seed=7)
    m = empirical_moments(run, 2, n_boot=50)[1]
    exact = central_moment(rho, h, 2)
    out.append(("sampler-variance", abs(m[1] - exact) <= 4 * m[2], f"{m[1]:.5g} vs {exact:.5g} (se {m[2]:.2g})"))

    ctx = bnd.BoundContext.from_spectra(rho, h)
    ts = np.linspace(0, 0.99 * bnd.admissible_t_max(ctx), 50)
    vals = [bnd.mgf_bound(t, ctx) for t in ts]
    ok = vals[0] == 0 and all(b >= a for a, b in zip(vals, vals[1:]))
    out.append(("mgf-bound-monotone", ok, "50 points across the window"))
    return out


def cmd_selftest(args) -> int:
    rng = np.random.default_rng(args.seed)
    failed = 0
    for name, ok, detail in _selftest_checks(rng):
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed += not ok
    return 1 if failed else 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="haarenergy",
        description="Haar-orbit energy statistics",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=_version_text())
    sub = parser.add_subparsers(dest="command", required=True)

    def spectra_opts(p):
        p.add_argument("--spectra", help="spectrum JSON file, or 'fig1' for the built-in example")
        p.add_argument("--state-tol", type=float, default=DEFAULT_STATE_TOL, help="trace tolerance for the state")
        p.add_argument("--out", help="output file (default stdout)")

    def pmax_opt(p):
        p.add_argument("--pmax", type=int, default=4)
        p.add_argument("--allow-large", action="store_true", help=f"permit p up to {P_CAP}")

    p = sub.add_parser("weingarten", help="exact Weingarten values")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--class", dest="cls", help="cycle type, e.g. 2,1")
    p.add_argument("--allow-large", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_weingarten)

    p = sub.add_parser("moments", help="exact central moments with bounds")
    spectra_opts(p)
    pmax_opt(p)
    p.add_argument("--pure", action="store_true", help="replace the state by a pure state")
    p.add_argument("--from-run", help="compute empirical moments from a sample run JSON")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("bounds", help="moment error bounds")
    spectra_opts(p)
    pmax_opt(p)
    p.add_argument("--pure", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("mgf-bound", help="generating-function bound on a t grid")
    spectra_opts(p)
    p.add_argument("--tpoints", type=int, default=20)
    p.add_argument("--run", help="sample run JSON for the empirical column")
    p.add_argument("--pure", action="store_true")
    p.set_defaults(func=cmd_mgf_bound)

    p = sub.add_parser("sample", help="Monte Carlo energies")
    spectra_opts(p)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--pure", action="store_true")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fig1", help="histogram of the seven-level example")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("selftest", help="reduced invariant checks")
    p.add_argument("--seed", type=int, default=2024)
    p.set_defaults(func=cmd_selftest)
    return parser


def _fail(exc: Exception, code: int) -> int:
    tag = getattr(exc, "code", "error")
    print(json.dumps({"error": tag, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "pmax", None) is not None and args.pmax < 1:
        return _fail(ConditionError("--pmax must be at least 1"), EXIT_CONDITION)
    if getattr(args, "pmax", None) is not None and args.pmax > P_CAP:
        return _fail(ResourceCapError(f"--pmax must not exceed {P_CAP}"), EXIT_CAP)
    if getattr(args, "pmax", None) is not None and args.pmax > DEFAULT_P_MAX and not args.allow_large:
        return _fail(ResourceCapError(f"--pmax above {DEFAULT_P_MAX} needs --allow-large"), EXIT_CAP)
    try:
        return args.func(args)
    except SpectrumError as exc:
        return _fail(exc, EXIT_INPUT)
    except ConditionError as exc:
        return _fail(exc, EXIT_CONDITION)
    except ResourceCapError as exc:
        return _fail(exc, EXIT_CAP)
    except HaarEnergyError as exc:
        return _fail(exc, 1)


if __name__ == "__main__":
    sys.exit(main())
