"""Command line front end.

Subcommands: ``classify``, ``spectrum``, ``scan``, ``numrange``, ``report``.
Inputs are operator-spec JSON files or names of built-in examples.  All
output is deterministic: floating-point values are rounded to 12
significant digits, keys are sorted, and nothing time- or machine-
dependent is emitted unless ``--timings`` is given.

Exit codes: 0 success (``classify``: regular), 3 not regular
(``classify`` only), 4 invalid input, 1 runtime failure.
"""

import argparse
import cmath
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from . import birkhoff
from . import gallery
from . import geometry
from . import numrange
from . import quasiform
from . import spectral
from .model import (
    DivergenceForm,
    ModelForm,
    OperatorSpec,
    SpecError,
    as_divergence,
    load_spec,
    spec_to_document,
)
from .normalize import reduce_total_order

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_NOT_REGULAR = 3
EXIT_INVALID = 4

DEFAULT_RMAX = 20.0
DEFAULT_SCAN = {"rmin": 5.0, "rmax": 60.0, "samples": 24, "grid": 48}
DECAY_SLACK = 0.5
CLEARANCE_DELTA = 0.5


# ---------------------------------------------------------------------------
# Deterministic JSON
# ---------------------------------------------------------------------------

def _sig(x):
    """Round to 12 significant digits; normalizes -0.0 and non-finite values."""
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    if x == 0.0:
        return 0.0
    return float("%.11e" % x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, complex):
        return [_sig(obj.real), _sig(obj.imag)]
    if isinstance(obj, float):
        return _sig(obj)
    if hasattr(obj, "item"):           # numpy scalars
        return _jsonable(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit_json(document, path=None):
    text = json.dumps(_jsonable(document), indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Input resolution
# ---------------------------------------------------------------------------

def _load_input(source) -> OperatorSpec:
    if source in gallery.EXAMPLES:
        return gallery.build(source)
    if not os.path.exists(source):
        raise SpecError(
            f"input {source!r} is neither a file nor a known example "
            f"({', '.join(sorted(gallery.EXAMPLES))})")
    return load_spec(source)


def _form_kind(spec):
    if isinstance(spec.form, DivergenceForm):
        return "divergence"
    if isinstance(spec.form, ModelForm):
        return "model"
    return "classical"


def _divergence_view(spec):
    """The operator rewritten in divergence form, or None when impossible."""
    try:
        return as_divergence(spec)
    except SpecError:
        return None


# ---------------------------------------------------------------------------
# Document builders (shared between single commands and report)
# ---------------------------------------------------------------------------

def classification_document(spec, tol=None, seed=0, trials=50):
    nbc = reduce_total_order(spec.rows)
    verdict = birkhoff.classify_regularity(nbc, tol=tol)
    doc = {
        "order": spec.order,
        "form": _form_kind(spec),
        "normalized": {
            "kappa": nbc.kappa,
            "orders": list(nbc.orders),
        },
        "birkhoff": {
            "theta0": complex(verdict.theta0),
            "theta1": complex(verdict.theta1) if verdict.theta1 is not None else None,
            "regular": verdict.regular,
            "tolerance": verdict.tol,
        },
    }
    divspec = _divergence_view(spec)
    if divspec is None:
        doc["complete_regularity"] = {
            "applicable": False,
            "reason": "requires an even-order divergence or model form",
        }
        return doc
    report = quasiform.check_completely_regular(divspec)
    fragment = {
        "applicable": True,
        "verdict": report.completely_regular,
        "max_principal_angle": float(report.max_angle),
        "angle_tolerance": quasiform.ANGLE_TOL,
        "preimage_dimension": int(report.preimage_basis.shape[1]),
        "complement_dimension": int(report.complement_basis.shape[1]),
    }
    if report.completely_regular:
        fragment["boundary_form"] = [list(row) for row in report.A]
        fragment["form_identity_residual"] = float(
            quasiform.verify_form_identity(divspec, report.A, trials=trials, seed=seed))
        fragment["form_identity_trials"] = trials
    else:
        fragment["boundary_form"] = None
    doc["complete_regularity"] = fragment
    return doc


def spectrum_document(spec, rmax=DEFAULT_RMAX, sector=None, epsilon=None,
                      tau=0.05, l_max=4):
    nbc = reduce_total_order(spec.rows)
    n = spec.order
    r_min = 0.5
    roots = spectral.find_roots(nbc, (r_min, rmax), sector=sector)
    reps = spectral.distinct_eigenvalues(roots)
    groups = spectral.bracket_groups(reps, tau=tau)
    sizes = [sum(r.multiplicity for r in g) for g in groups]

    if epsilon is None:
        epsilon = math.pi / (4 * n)
    sectors = geometry.omega_sectors(n, epsilon)
    rarity = []
    for lo, hi in sectors.sectors:
        moduli = sorted(abs(r.rho) for r in reps
                        if geometry.SectorSet(((lo, hi),), epsilon).contains(cmath.phase(r.rho)))
        rarity.append({
            "sector": [lo, hi],
            "count": len(moduli),
            "lag": geometry.is_rare(moduli, l_max),
        })

    disks = geometry.DiskSet(tuple(r.rho for r in roots), CLEARANCE_DELTA)
    r_probe = max(rmax - 2 * CLEARANCE_DELTA, r_min)
    rays = []
    for angle in geometry.critical_rays(n).angles:
        rays.append({"angle": angle, "kind": "critical",
                     "exit": geometry.ray_clearance(angle, disks, r_probe)})
    for lo, hi in sectors.sectors:
        mid = 0.5 * (lo + hi)
        rays.append({"angle": mid, "kind": "bisector",
                     "exit": geometry.ray_clearance(mid, disks, r_probe)})
    rays.sort(key=lambda item: item["angle"])

    return {
        "annulus": [r_min, rmax],
        "sector": list(sector) if sector is not None else None,
        "roots": [{
            "rho": r.rho,
            "lambda": r.lam,
            "multiplicity": r.multiplicity,
            "residual": r.residual,
        } for r in roots],
        "distinct_eigenvalues": len(reps),
        "brackets": {
            "tau": tau,
            "sizes": sizes,
            "max_size": max(sizes) if sizes else 0,
            "oversized": any(s > 2 for s in sizes),
        },
        "rarity": {"epsilon": epsilon, "max_lag": l_max, "sectors": rarity},
        "clearance": {"delta": CLEARANCE_DELTA, "r_probe": r_probe, "rays": rays},
        "note": "spectral quantities refer to the leading-order model expression",
    }


def _choose_ray(spec, rmin, rmax):
    """First omega-sector bisector whose ray passes the clearance check."""
    n = spec.order
    nbc = reduce_total_order(spec.rows)
    epsilon = math.pi / (4 * n)
    errors = []
    for lo, hi in geometry.omega_sectors(n, epsilon).sectors:
        mid = 0.5 * (lo + hi)
        try:
            spectral._ray_clearance_check(nbc, mid, rmin, rmax, CLEARANCE_DELTA)
        except (ValueError, spectral.ContourError) as exc:
            errors.append(f"{mid:.3f}: {exc}")
            continue
        return mid
    raise RuntimeError("no usable scan ray found: " + "; ".join(errors))


def scan_document(spec, kind, ray, rmin, rmax, samples, grid, csv_path=None):
    nbc = reduce_total_order(spec.rows)
    n = spec.order
    if kind == "green":
        scan = spectral.green_sup_scan(nbc, ray, r_min=rmin, r_max=rmax,
                                       samples=samples, grid=grid)
        expected = -(n - 1)
    elif kind == "resolvent":
        scan = spectral.resolvent_scan(nbc, ray_angle=ray, r_min=rmin,
                                       r_max=rmax, samples=samples)
        expected = -n
    else:
        raise ValueError(f"unknown scan kind {kind!r}")
    if csv_path:
        spectral.scan_to_csv(scan, csv_path)
    values = [value * abs(rho) ** (-expected) for rho, value in scan.samples]
    ranked = sorted(values)
    median = ranked[len(ranked) // 2]
    doc = {
        "kind": kind,
        "ray": scan.ray_angle,
        "rmin": rmin,
        "rmax": rmax,
        "samples": len(scan.samples),
        "exponent": scan.exponent,
        "fit_residual": scan.fit_residual,
        "expected_exponent": float(expected),
        "slack": DECAY_SLACK,
        "decay_bound_satisfied": bool(scan.exponent <= expected + DECAY_SLACK),
        "compensated_max_over_median": float(max(values) / median) if median > 0 else None,
    }
    if scan.clearance is not None:
        doc["clearance"] = scan.clearance
    return doc


def numrange_document(spec, max_dim=64, angles=numrange.DEFAULT_ANGLES,
                      csv_path=None):
    divspec = _divergence_view(spec)
    if divspec is None:
        return {"applicable": False,
                "reason": "requires an even-order divergence or model form"}
    dims = []
    d = 8
    while d < max_dim:
        dims.append(d)
        d *= 2
    dims.append(max_dim)
    report = numrange.half_plane_verdict(divspec, dimensions=dims, num_angles=angles)
    if csv_path:
        numrange.profiles_to_csv(report.profiles, csv_path)
    return {
        "applicable": True,
        "verdict": report.verdict,
        "dimensions": list(report.dimensions),
        "evidence": [[d, m] for d, m in zip(report.dimensions, report.minima)],
        "angles": angles,
        "growth_factor": numrange.GROWTH_FACTOR,
        "slack": numrange.SLACK,
    }


def gram_document(spec, count=16):
    nbc = reduce_total_order(spec.rows)
    return {
        "count": count,
        "conditions": [[size, cond] for size, cond in spectral.gram_condition(nbc, count)],
    }


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_classify(args):
    spec = _load_input(args.input)
    doc = classification_document(spec, tol=args.tol, seed=args.seed)
    doc["input"] = args.input
    _emit_json(doc, args.output)
    return EXIT_OK if doc["birkhoff"]["regular"] else EXIT_NOT_REGULAR


def cmd_spectrum(args):
    spec = _load_input(args.input)
    sector = tuple(args.sector) if args.sector else None
    doc = spectrum_document(spec, rmax=args.rmax, sector=sector)
    doc["input"] = args.input
    _emit_json(doc, args.output)
    return EXIT_OK


def cmd_scan(args):
    spec = _load_input(args.input)
    ray = args.ray
    if ray is None:
        ray = _choose_ray(spec, args.rmin, args.rmax)
    doc = scan_document(spec, args.kind, ray, args.rmin, args.rmax,
                        args.samples, args.grid, csv_path=args.output)
    doc["input"] = args.input
    _emit_json(doc)
    return EXIT_OK


def cmd_numrange(args):
    spec = _load_input(args.input)
    doc = numrange_document(spec, max_dim=args.max_dim, angles=args.angles,
                            csv_path=args.output)
    doc["input"] = args.input
    _emit_json(doc)
    if not doc["applicable"]:
        return EXIT_INVALID
    return EXIT_OK


def cmd_report(args):
    spec = _load_input(args.input)
    timings = {}

    def run(name, fn):
        start = time.perf_counter()
        try:
            result = fn()
        except Exception as exc:        # keep partial results
            result = {"error": f"{type(exc).__name__}: {exc}"}
        timings[name] = time.perf_counter() - start
        return result

    def scans():
        ray = _choose_ray(spec, DEFAULT_SCAN["rmin"], DEFAULT_SCAN["rmax"])
        jobs = {
            "green_decay": lambda: scan_document(
                spec, "green", ray, DEFAULT_SCAN["rmin"], DEFAULT_SCAN["rmax"],
                DEFAULT_SCAN["samples"], DEFAULT_SCAN["grid"]),
            "resolvent_decay": lambda: scan_document(
                spec, "resolvent", ray, DEFAULT_SCAN["rmin"], DEFAULT_SCAN["rmax"],
                DEFAULT_SCAN["samples"], DEFAULT_SCAN["grid"]),
        }
        if args.jobs > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                futures = {name: pool.submit(run, name, fn) for name, fn in jobs.items()}
                return {name: future.result() for name, future in futures.items()}
        return {name: run(name, fn) for name, fn in jobs.items()}

    doc = {
        "tool": {"name": "regbvp", "version": __version__},
        "input": args.input,
        "seed": args.seed,
        "spec": spec_to_document(spec),
        "classification": run("classification", lambda: classification_document(
            spec, tol=args.tol, seed=args.seed)),
        "spectrum": run("spectrum", lambda: spectrum_document(spec)),
        "basis_conditioning": run("basis_conditioning", lambda: gram_document(spec)),
        "numerical_range": run("numerical_range", lambda: numrange_document(spec)),
    }
    scan_sections = run("scans", scans)
    if "error" in scan_sections and set(scan_sections) == {"error"}:
        doc["green_decay"] = scan_sections
        doc["resolvent_decay"] = scan_sections
    else:
        doc.update(scan_sections)
    if args.timings:
        doc["timings"] = {name: value for name, value in sorted(timings.items())}
    _emit_json(doc, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="regbvp",
        description="Classify two-point boundary operators and check the "
                    "spectral properties that regularity predicts.",
        epilog="Exit codes: 0 success/regular, 3 not regular (classify), "
               "4 invalid input, 1 runtime failure.")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help="spec JSON file or example name "
                        f"({', '.join(sorted(gallery.EXAMPLES))})")
    common.add_argument("--tol", type=float, default=None,
                        help="regularity tolerance override")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for sampled checks (default 0)")
    common.add_argument("--jobs", type=int, default=1,
                        help="max parallel scans in report (default 1)")
    common.add_argument("-o", "--output", default=None,
                        help="output path (JSON; CSV for scan/numrange)")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common],
                       help="regularity and complete-regularity verdicts")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("spectrum", parents=[common],
                       help="determinant zeros, brackets, rarity, ray clearance")
    p.add_argument("--rmax", type=float, default=DEFAULT_RMAX)
    p.add_argument("--sector", type=float, nargs=2, metavar=("LO", "HI"),
                   default=None, help="angular sector in radians")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("scan", parents=[common],
                       help="kernel or resolvent decay along a ray")
    p.add_argument("kind", choices=("green", "resolvent"))
    p.add_argument("--ray", type=float, default=None,
                   help="ray angle in radians (default: first clear bisector)")
    p.add_argument("--rmin", type=float, default=DEFAULT_SCAN["rmin"])
    p.add_argument("--rmax", type=float, default=DEFAULT_SCAN["rmax"])
    p.add_argument("--samples", type=int, default=DEFAULT_SCAN["samples"])
    p.add_argument("--grid", type=int, default=DEFAULT_SCAN["grid"])
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("numrange", parents=[common],
                       help="support function of the quadratic form")
    p.add_argument("--max-dim", type=int, default=64)
    p.add_argument("--angles", type=int, default=numrange.DEFAULT_ANGLES)
    p.set_defaults(func=cmd_numrange)

    p = sub.add_parser("report", parents=[common],
                       help="run all applicable analyses into one document")
    p.add_argument("--timings", action="store_true",
                   help="include wall-clock timings (breaks byte determinism)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
