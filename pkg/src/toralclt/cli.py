"""Command line entry point: ``toralclt <subcommand> ...``.

Every JSON document carries a "schema" field.  Floats are written with 12
significant digits so identical inputs give byte-identical output.
Domain errors go to stderr as one JSON line and exit with status 1.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import catalog, kernels, lattice, spectral
from .cumulants import empirical_cumulants, univariate_cumulants
from .errors import ToralError
from .simulate import ExperimentConfig, run_clt_experiment
from .trigpoly import TrigPolynomial

SCHEMA = "toralclt.{}/1"
DIGITS = 12


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        v = int(obj)
        return v if abs(v) < 2 ** 63 else str(v)
    if isinstance(obj, complex):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.{DIGITS}g}")
    if hasattr(obj, "numerator") and hasattr(obj, "denominator"):
        return _clean(float(obj))
    return obj


def dumps(doc):
    return json.dumps(_clean(doc), sort_keys=True)


def _load_json(arg):
    """Inline JSON text or a path to a JSON file."""
    text = arg.strip()
    if text.startswith("{") or text.startswith("["):
        return json.loads(text)
    with open(arg) as fh:
        return json.load(fh)


def _emit(args, text):
    out = args.out or None
    if out and os.environ.get("TORALCLT_OUTDIR") and not os.path.isabs(out):
        out = os.path.join(os.environ["TORALCLT_OUTDIR"], out)
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{float(x):.{DIGITS}g}" for x in r])
    return buf.getvalue()


def _uniform_grid(d, size):
    return spectral._grid(d, size).reshape(-1, d)


# ---------------------------------------------------------------------------
# subcommands

def cmd_check(args):
    action = lattice.action_from_json(_load_json(args.action))
    res = lattice.is_totally_ergodic(action, args.radius)
    doc = {"schema": SCHEMA.format("check"), "totally_ergodic": res.verdict if res.verdict is not None else "unknown",
           "path": res.path, "certificate": res.certificate,
           "ergodic_generators": [lattice.is_ergodic(g) for g in action.generators],
           "mode": action.mode}
    _emit(args, dumps(doc))
    return 0


def cmd_example(args):
    action = catalog.named_example(args.name)
    doc = {"schema": SCHEMA.format("action"), **lattice.action_to_json(action)}
    _emit(args, dumps(doc))
    return 0


def cmd_kernels(args):
    doc = _load_json(args.sequence)
    seq = kernels.from_json(doc)
    t = _uniform_grid(seq.dim, args.grid)
    vals = kernels.kernel_eval(seq, t)
    header = ([f"t{i + 1}" for i in range(seq.dim)] if seq.dim > 1 else ["t"]) + ["value"]
    _emit(args, _csv(header, np.column_stack([t, vals])))
    return 0


def _action_and_f(args):
    action = lattice.action_from_json(_load_json(args.action))
    f = TrigPolynomial.from_json(_load_json(args.f))
    return action, f


def cmd_density(args):
    action, f = _action_and_f(args)
    data = spectral.spectral_density(f, action)
    t = _uniform_grid(action.rank, args.grid)
    phi = data.density(t)
    header = [f"t{i + 1}" for i in range(action.rank)] + ["phi"]
    _emit(args, _csv(header, np.column_stack([t, phi])))
    return 0


def cmd_variance(args):
    action, f = _action_and_f(args)
    data = spectral.spectral_density(f, action)
    doc = {"schema": SCHEMA.format("variance"),
           "sigma2": spectral.variance(f, action, data),
           "sigma2_by_correlations": complex(spectral.variance_by_correlations(f, action, data)).real,
           "classes": len(data.section.classes),
           "orbit_radius": data.section.radius,
           "norm2_squared": f.norm2_squared}
    rng = np.random.default_rng(args.seed or 0)
    thetas = [list(map(float, t.split(","))) for t in args.theta] if args.theta else []
    thetas += rng.random((args.panel, action.rank)).tolist()
    doc["rotated"] = [{"theta": th, "sigma2": spectral.rotated_variance(f, action, th, data)}
                      for th in thetas]
    if args.barycenter:
        doc["barycenter_sigma2"] = spectral.barycenter_variance(f, action, data=data)
    dec = spectral.solve_coboundary(f, action, data=data)
    doc["coboundary"] = dec.is_coboundary
    _emit(args, dumps(doc))
    return 0


def cmd_cumulants(args):
    with open(args.samples) as fh:
        rows = list(csv.DictReader(fh))
    cols = args.columns or [next(iter(rows[0]))] if rows else []
    X = np.array([[float(r[c]) for c in cols] for r in rows])
    doc = {"schema": SCHEMA.format("cumulants"), "columns": cols, "count": len(X)}
    if len(cols) == 1:
        doc["cumulants"] = univariate_cumulants(X[:, 0], args.order)
    else:
        table = empirical_cumulants(X)
        doc["table"] = {",".join(str(j) for j in sorted(J)): v for J, v in
                        sorted(table.values.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))}
    _emit(args, dumps(doc))
    return 0


def cmd_simulate(args):
    doc = _load_json(args.config)
    base = os.path.dirname(os.path.abspath(args.config)) if not args.config.strip().startswith("{") else "."
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.precision is not None:
        doc["B"] = args.precision
    if args.threads is not None:
        doc["threads"] = args.threads
    config = ExperimentConfig.from_json(doc, base)
    report = run_clt_experiment(config)
    out = {"schema": SCHEMA.format("clt-report"), **report.to_dict()}
    _emit(args, dumps(out))
    if args.samples_out:
        S = report.samples
        _write_text(args.samples_out,
                    _csv(["index", "re", "im"], np.column_stack([np.arange(len(S)), S.real, S.imag])))
    return 0 if report.passed else 1


def _write_text(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def cmd_daka(args):
    action = lattice.action_from_json(_load_json(args.action))
    est = spectral.daka_estimate(action, args.K, args.N)
    margin = spectral.certify_daka(action, est, args.K, args.N + 5)
    doc = {"schema": SCHEMA.format("daka"), "C": est.C, "tau": est.tau, "K": args.K, "N": args.N,
           "samples": est.samples, "out_of_sample_margin": margin, "certified": margin >= -1e-9}
    _emit(args, dumps(doc))
    return 0


def build_parser():
    def common(parser, default):
        parser.add_argument("--seed", type=int, default=default)
        parser.add_argument("--precision", type=int, default=default, help="dyadic precision B in bits")
        parser.add_argument("--threads", type=int, default=default)
        parser.add_argument("--out", default=default, help="write the result here instead of stdout")

    p = argparse.ArgumentParser(prog="toralclt", description="CLT experiments for commuting toral endomorphisms")
    common(p, None)
    # the same flags are accepted after the subcommand
    shared = argparse.ArgumentParser(add_help=False)
    common(shared, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[shared], **k)

    s = sub.add_parser("check", help="total ergodicity of an action")
    s.add_argument("--action", required=True)
    s.add_argument("--radius", type=int, default=4)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("example", help="emit a catalog action")
    s.add_argument("--name", required=True)
    s.set_defaults(func=cmd_example)

    s = sub.add_parser("kernels", help="kernel values on a uniform grid (CSV)")
    s.add_argument("--sequence", required=True, help='JSON, e.g. {"kind":"square","side":8,"dim":1}')
    s.add_argument("--grid", type=int, default=256)
    s.set_defaults(func=cmd_kernels)

    for name, func, hlp in (("density", cmd_density, "spectral density on a grid (CSV)"),
                            ("variance", cmd_variance, "asymptotic and rotated variances")):
        s = sub.add_parser(name, help=hlp)
        s.add_argument("--action", required=True)
        s.add_argument("--f", required=True)
        if name == "density":
            s.add_argument("--grid", type=int, default=64)
        else:
            s.add_argument("--theta", action="append", help="comma separated angle vector")
            s.add_argument("--panel", type=int, default=4, help="number of seeded random angles")
            s.add_argument("--barycenter", action="store_true")
        s.set_defaults(func=func)

    s = sub.add_parser("cumulants", help="empirical cumulants of sample CSV columns")
    s.add_argument("--samples", required=True)
    s.add_argument("--columns", nargs="*")
    s.add_argument("--order", type=int, default=4)
    s.set_defaults(func=cmd_cumulants)

    s = sub.add_parser("simulate", help="run a CLT experiment; exit 0 iff all checks pass")
    s.add_argument("--config", required=True)
    s.add_argument("--samples-out", default=None)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("daka", help="fit the dual growth constants C and tau")
    s.add_argument("--action", required=True)
    s.add_argument("--K", type=float, default=3.0)
    s.add_argument("--N", type=float, default=20.0)
    s.set_defaults(func=cmd_daka)
    return p


def _error_line(err):
    if isinstance(err, ToralError):
        d = err.to_dict()
    else:
        d = {"error": type(err).__name__, "module": "cli", "message": str(err)}
    return json.dumps(d, sort_keys=True)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ToralError, ValueError, KeyError, OSError, json.JSONDecodeError) as err:
        sys.stderr.write(_error_line(err) + "\n")
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
