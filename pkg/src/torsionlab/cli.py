"""Command-line driver: computations and verification suites with JSON or CSV reports.

Exit status is 0 when every check passes, 1 when a check fails or a
computation raises, and 2 for unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from . import __version__
from .complex import admissible_thresholds, spectral_window
from .exceptions import DimensionError, ParseError, TorsionLabError, ValidationError
from .linalg import relative_log_error
from .parallel import parallel_map
from .torsion import (
    CheckReport,
    _jsonable,
    cappell_miller_torsion,
    cm_window_independence_check,
    det_prime,
    det_prime_oracle,
    dual_torsion_check,
    factorization_check,
    flat_thresholds,
    torsion,
    window_independence_check,
)

COMMANDS = (
    "torsion",
    "verify-prop21",
    "verify-window",
    "verify-deform",
    "verify-gauge",
    "verify-duality",
    "cm-torsion",
    "random-suite",
)

INPUT_ERRORS = (ParseError, ValidationError, DimensionError, OSError)


class InputError(Exception):
    """Bad command-line combination; reported with exit status 2."""


def build_parser():
    p = argparse.ArgumentParser(prog="torsionlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", help="explicit-complex file, or a scenario file for verify-deform")
    p.add_argument("--torus", help="torus model file")
    p.add_argument("--a", type=float, default=None, help="spectral threshold (default 0)")
    p.add_argument("--seed", type=int, default=0, help="seed for random instances")
    p.add_argument("--count", type=int, default=None, help="number of random instances or gauges")
    p.add_argument("--max-dim", type=int, default=16, help="total dimension bound for random complexes")
    p.add_argument("--h", type=float, nargs="+", default=None, help="finite-difference step sizes")
    p.add_argument("--tol", type=float, default=None, help="override the main tolerance of the command")
    p.add_argument("--out", help="report path (default: standard output)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def _tol(args, default):
    return default if args.tol is None else args.tol


def _threshold(args, default=0.0):
    return default if args.a is None else args.a


def _load_explicit(path):
    from .models.io import read_complex_file

    return read_complex_file(path)


def _load_torus(path):
    from .models.io import load_torus

    return load_torus(path)


def _source(args):
    if args.input and args.torus:
        raise InputError("give at most one of --input and --torus")
    if args.input:
        return "explicit", _load_explicit(args.input)
    if args.torus:
        return "torus", _load_torus(args.torus)
    return None, None


def _random_instances(args, default_count):
    from .models.random import random_instance

    count = default_count if args.count is None else args.count
    if count < 0 or args.max_dim < 2:
        raise InputError("--count must be non-negative and --max-dim at least 2")
    rng = np.random.default_rng(args.seed)
    return [random_instance(rng, args.max_dim) for _ in range(count)]


def _global_torus(model, limit=4000):
    from .models.torus import assemble_basis, block_cohomology_bases, build_torus

    if sum(model.dims()) > limit:
        raise InputError(f"torus model of total dimension {sum(model.dims())} is too large for a global check")
    K, b, Gamma = build_torus(model)
    return K, b, Gamma, assemble_basis(block_cohomology_bases(model))


# --- commands ---------------------------------------------------------------


def cmd_torsion(args):
    kind, src = _source(args)
    a = _threshold(args)
    if kind is None:
        raise InputError("torsion needs --input or --torus")
    if kind == "torus":
        from .models.torus import torus_torsion

        return {"result": torus_torsion(src, a).as_dict()}, []
    tv = torsion(src.complex, src.form, a)
    return {"result": tv.as_dict()}, []


def cmd_cm_torsion(args):
    kind, src = _source(args)
    a = _threshold(args)
    if kind == "torus":
        from .models.torus import torus_cm_torsion

        return {"result": torus_cm_torsion(src, a).as_dict()}, []
    if kind is None:
        raise InputError("cm-torsion needs --input or --torus")
    if src.chirality is None:
        raise InputError("the complex file has no gamma_even_to_odd / gamma_odd_to_even fields")
    return {"result": cappell_miller_torsion(src.complex, src.chirality, a).as_dict()}, []


def _instances(args, default_count=200):
    kind, src = _source(args)
    if kind == "explicit":
        return [(src.complex, src.form, None)]
    if kind == "torus":
        K, b, _, h = _global_torus(src)
        return [(K, b, h)]
    return [(K, b, None) for K, b in _random_instances(args, default_count)]


def _factorization_checks(K, b, h, tol, oracle_tol=1e-9):
    rep = factorization_check(K, b, h, tol)
    W0 = spectral_window(K, b, 0.0)
    errs = []
    for a in admissible_thresholds(W0)[1:2]:
        W = spectral_window(K, b, a)
        for parity in ("even", "odd"):
            o = det_prime_oracle(K, b, W, parity)
            errs.append(relative_log_error(det_prime(K, b, W, parity), o.log_value))
    oerr = max(errs, default=0.0)
    oracle = CheckReport("det_prime_oracle", bool(oerr < oracle_tol), float(oerr), oracle_tol, {})
    return [rep, oracle]


def cmd_verify_factorization(args):
    tol = _tol(args, 1e-8)
    items = _instances(args)
    checks = []
    for batch in parallel_map(lambda it: _factorization_checks(*it, tol), items):
        checks.extend(batch)
    return {"instances": len(items)}, checks


def _window(K, b, h, tol):
    th = admissible_thresholds(spectral_window(K, b, 0.0))
    return window_independence_check(K, b, th, h, tol)


def cmd_verify_window(args):
    tol = _tol(args, 1e-9)
    kind, src = _source(args)
    checks = []
    if kind == "torus":
        K, b, Gamma, h = _global_torus(src)
        checks.append(_window(K, b, h, tol))
        checks.append(cm_window_independence_check(K, Gamma, flat_thresholds(K, Gamma), h, tol))
        return {"instances": 1}, checks
    if kind == "explicit":
        checks.append(_window(src.complex, src.form, None, tol))
        if src.chirality is not None:
            checks.append(cm_window_independence_check(src.complex, src.chirality,
                                                       flat_thresholds(src.complex, src.chirality), None, tol))
        return {"instances": 1}, checks
    items = _random_instances(args, 200)
    checks = parallel_map(lambda it: _window(it[0], it[1], None, tol), items)
    return {"instances": len(items)}, checks


def cmd_random_suite(args):
    tol_f, tol_w = (1e-8, 1e-9) if args.tol is None else (args.tol, args.tol)
    items = _random_instances(args, 200)

    def one(it):
        K, b = it
        return _factorization_checks(K, b, None, tol_f) + [_window(K, b, None, tol_w)]

    checks = []
    for batch in parallel_map(one, items):
        checks.extend(batch)
    return {"instances": len(items)}, checks


def _scenario_path(sc):
    from .deformation import bilinear_path, flux_path, torus_bilinear_path, torus_metric_path
    from .models.gauge import FluxGauge, simplicial_gauge
    from .models.simplicial import build_simplicial

    if sc.model_kind == "torus":
        if sc.path_kind == "metric":
            return torus_metric_path(sc.model, sc.generator)
        if sc.path_kind == "bilinear":
            return torus_bilinear_path(sc.model, sc.generator)
        raise InputError("torus flux paths are constant (closed constant gauges); use verify-gauge")
    if sc.model_kind == "explicit":
        K, b = sc.model.complex, sc.model.form
        if sc.path_kind == "bilinear":
            return bilinear_path(K, b, *sc.generator)
        if sc.path_kind == "flux":
            return flux_path(K, b, FluxGauge(*sc.generator))
        raise InputError("metric paths need a torus model")
    K, b = build_simplicial(sc.model)
    if sc.path_kind != "flux":
        raise InputError("simplicial scenarios support flux paths only")
    return flux_path(K, b, simplicial_gauge(sc.model, sc.generator))


def cmd_verify_deform(args):
    from .deformation import (
        flux_variation_check,
        path_scan,
        sum_rule_check,
        total_invariance_scan,
        torus_metric_path,
        variation_reports,
    )

    if args.input:
        from .models.io import load_scenario

        sc = load_scenario(args.input)
        path = _scenario_path(sc)
        samples, steps, a = sc.samples, sc.h, sc.threshold_a
        torus_model = sc.model if sc.model_kind == "torus" else None
        torus_gen = (sc.path_kind, sc.generator)
    elif args.torus:
        torus_model = _load_torus(args.torus)
        torus_gen = ("metric", (0.3, -0.2, 0.1))
        path = torus_metric_path(torus_model, torus_gen[1])
        samples, steps, a = (0.0, 0.5, 1.0), (1e-3, 1e-4), 0.0
    else:
        raise InputError("verify-deform needs a scenario (--input) or a torus model (--torus)")
    if args.h:
        steps = tuple(args.h)
    a = _threshold(args, a)
    tol = _tol(args, 1e-5)
    tolerances = (tol,) + tuple(tol * (s / steps[0]) ** 2 for s in steps[1:])
    checks = []
    for u in samples:
        if path.kind == "flux":
            checks.append(flux_variation_check(path, u, a, steps, tolerances))
        else:
            reps = variation_reports(path, u, a, steps, tolerances)
            for comp in ("window", "det_prime"):
                r = reps[comp]
                checks.append(CheckReport(f"{comp}_variation", r.passed, r.discrepancies[0], tolerances[0], r.as_dict()))
        checks.append(sum_rule_check(path, u, a, steps[-1]))
    if torus_model is not None:
        checks.append(total_invariance_scan(torus_model, torus_gen[0], torus_gen[1], a=a))
    rows = path_scan(path, samples, a, steps[-1])
    return {"kind": path.kind, "threshold": a, "steps": list(steps), "scan": rows}, checks


def cmd_verify_gauge(args):
    from .deformation import flux_endpoint_check
    from .models.gauge import (
        gauge_invariance_check,
        random_nilpotent_gauge,
        simplicial_gauge,
        torus_constant_gauge,
    )
    from .models.random import random_complex, random_form
    from .models.simplicial import build_simplicial, circle

    tol = _tol(args, 1e-9)
    a = _threshold(args)
    rng = np.random.default_rng(args.seed)
    kind, src = _source(args)
    checks = []
    if kind == "torus":
        from .models.torus import torus_blocks

        blocks = torus_blocks(src)
        gauges = torus_constant_gauge(src, tuple(rng.normal(size=3)), float(rng.normal()))
        worst, ok = 0.0, True
        for blk, g in zip(blocks, gauges):
            r = gauge_invariance_check(blk.complex, blk.form, g, a, tol=tol)
            worst, ok = max(worst, r.discrepancy), ok and r.passed
        checks.append(CheckReport("torus_gauge_invariance", ok, worst, tol, {"blocks": len(blocks)}))
        return {"source": "torus"}, checks
    count = 50 if args.count is None else args.count
    if kind == "explicit":
        K, b = src.complex, src.form
        for _ in range(count):
            checks.append(gauge_invariance_check(K, b, random_nilpotent_gauge(rng, K), a, tol=tol))
        return {"source": "explicit", "gauges": count}, checks
    for _ in range(count):
        K = random_complex(rng, args.max_dim)
        b = random_form(rng, K)
        checks.append(gauge_invariance_check(K, b, random_nilpotent_gauge(rng, K), a, tol=tol))
    m = circle(3, -1.7, 0.4)
    K, b = build_simplicial(m)
    g = simplicial_gauge(m, {0: 0.3, 1: -0.5, 2: 0.9})
    checks.append(gauge_invariance_check(K, b, g, a, tol=tol))
    checks.append(flux_endpoint_check(K, b, g, a))
    return {"source": "random+circle", "gauges": count}, checks


def cmd_verify_duality(args):
    tol = _tol(args, 1e-9)
    a = _threshold(args)
    kind, src = _source(args)
    if kind == "torus":
        from .models.torus import chirality_identities_check, dual_connection, torus_blocks

        res = chirality_identities_check(src)
        worst_id = max(res.values())
        ident = CheckReport("chirality_identities", bool(worst_id < 1e-10), float(worst_id), 1e-10, res)
        worst, ok = 0.0, True
        for blk, dblk in zip(torus_blocks(src), torus_blocks(dual_connection(src))):
            r = dual_torsion_check(blk.complex, blk.form, blk.chirality, a, dblk.complex, tol=tol)
            worst = max(worst, r.details["product_discrepancy"])
            ok = ok and r.details["product_discrepancy"] < tol
        prod = CheckReport("dual_det_prime_product", bool(ok), float(worst), tol, {"threshold": a})
        return {"source": "torus"}, [ident, prod]
    if kind == "explicit":
        if src.chirality is None:
            raise InputError("the complex file has no chirality fields")
        return {"source": "explicit"}, [dual_torsion_check(src.complex, src.form, src.chirality, a, tol=tol)]
    raise InputError("verify-duality needs --torus or --input")


HANDLERS = {
    "torsion": cmd_torsion,
    "verify-prop21": cmd_verify_factorization,
    "verify-window": cmd_verify_window,
    "verify-deform": cmd_verify_deform,
    "verify-gauge": cmd_verify_gauge,
    "verify-duality": cmd_verify_duality,
    "cm-torsion": cmd_cm_torsion,
    "random-suite": cmd_random_suite,
}


def _echo(args):
    keys = ("input", "torus", "a", "seed", "count", "max_dim", "h", "tol", "format")
    return {k: getattr(args, k) for k in keys}


def run(args):
    """Execute one command; returns ``(report, exit_status)``."""
    t0 = time.perf_counter()
    report = {"command": args.command, "inputs": _echo(args)}
    try:
        payload, checks = HANDLERS[args.command](args)
    except (InputError, *INPUT_ERRORS) as exc:
        report["error"] = _error_record(exc)
        report["passed"] = False
        return report, 2
    except (TorsionLabError, ArithmeticError, np.linalg.LinAlgError) as exc:
        report["error"] = _error_record(exc)
        report["passed"] = False
        return report, 1
    report.update(_jsonable(payload))
    report["checks"] = [c.as_dict() for c in checks]
    report["summary"] = {"total": len(checks), "failed": sum(not c.passed for c in checks)}
    report["passed"] = all(c.passed for c in checks)
    report["timings"] = {"seconds": time.perf_counter() - t0}
    return report, 0 if report["passed"] else 1


def _error_record(exc):
    rec = {"type": type(exc).__name__, "message": str(exc)}
    loc = getattr(exc, "location", None)
    if loc is not None:
        rec["location"] = loc
    return rec


def to_csv(report):
    """Path scans become ``u, tau, predicted, observed`` rows; other reports a table of checks."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if "scan" in report:
        w.writerow(["u", "tau_re", "tau_im", "predicted_re", "predicted_im", "observed_re", "observed_im"])
        for row in report["scan"]:
            w.writerow([row["u"], *row["tau"], *row["predicted"], *row["observed"]])
    elif "error" in report:
        w.writerow(["error", "message"])
        w.writerow([report["error"]["type"], report["error"]["message"]])
    else:
        w.writerow(["name", "passed", "discrepancy", "tolerance"])
        for c in report.get("checks", []):
            w.writerow([c["name"], c["passed"], c["discrepancy"], c["tolerance"]])
    return buf.getvalue()


def main(argv=None):
    args = build_parser().parse_args(argv)
    report, status = run(args)
    text = to_csv(report) if args.format == "csv" else json.dumps(report, indent=1) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"torsionlab: cannot write {args.out}: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
