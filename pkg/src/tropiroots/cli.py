"""Command-line front end.

    tropiroots roots poly.json [--backerr] [--assumption1] [--mu-opt] [--csv out.csv]
    tropiroots polyeig matpoly.json [--norm 2|fro]
    tropiroots tropical poly.json [--csv polygon.csv]
    tropiroots backerr poly.json roots.json [--csv coeffs.csv] [--mu-opt]
    tropiroots experiment --id 1 --samples 20 --seed 1 --out exp1.csv

Exit status: 0 on success, 1 on bad input, 2 when QZ does not converge.
"""

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .backerr import eta_minmax_upper, forward_errors
from .errors import InvalidInput, NoConvergence, TropirootsError
from .poly import MatrixPolynomial, Polynomial, load_json, random_coeffs, random_from_roots, \
    random_matrix_poly
from .solver import check_assumption1, solve, solve_pevp
from .tropical import gammas, newton_polygon_csv, tropical_roots

EPS = np.finfo(float).eps

# id -> (kind, degree, exponent range, multiplicity_max)
EXPERIMENTS = {
    1: ("roots", 50, (-20.0, 20.0), 1),
    2: ("roots", 30, (-10.0, 10.0), 30),
    3: ("coeffs", 100, (-20.0, 20.0), 1),
    4: ("coeffs", 20, (-20.0, 20.0), 1),
    5: ("pevp", None, (-10.0, 10.0), 1),  # s in 2..8, d in 2..7 per sample
    6: ("pevp", 2, (-10.0, 10.0), 1),  # fixed degree and size
}

SCALAR_FIELDS = ["sample", "degree", "status", "iterations", "eta_norm", "eta_elem_rel",
                 "eta_minmax", "max_forward_err"]
PEVP_FIELDS = ["sample", "size", "degree", "status", "iterations", "eta_pevp_max", "threshold",
               "excluded", "large"]


@dataclass(frozen=True)
class ExperimentSpec:
    id: int
    sample_count: int
    degree: int = None
    exponent_range: tuple = None
    multiplicity_max: int = None
    seed: int = 0
    size: int = 4
    backerr: bool = True
    assumption1: bool = False
    mu_opt: bool = False
    timing: bool = False

    def __post_init__(self):
        if self.id not in EXPERIMENTS:
            raise InvalidInput(f"unknown experiment id {self.id}")
        if self.sample_count < 0:
            raise InvalidInput("sample count must be nonnegative")
        kind, d, rng, mm = EXPERIMENTS[self.id]
        if self.degree is None:
            object.__setattr__(self, "degree", d)
        if self.exponent_range is None:
            object.__setattr__(self, "exponent_range", rng)
        if self.multiplicity_max is None:
            object.__setattr__(self, "multiplicity_max", mm)
        lo, hi = self.exponent_range
        if lo > hi:
            raise InvalidInput("empty exponent range")
        if self.degree is not None and self.degree < 1:
            raise InvalidInput("degree must be positive")

    @property
    def kind(self):
        return EXPERIMENTS[self.id][0]

    def fields(self):
        if self.kind == "pevp":
            return list(PEVP_FIELDS)
        out = list(SCALAR_FIELDS)
        if self.mu_opt:
            out.append("eta_minmax_opt")
        if self.assumption1:
            out += ["a1_deltaA_over_eps", "a1_max_col_ratio", "a1_verdict"]
        if self.timing:
            out.append("wall_time")
        return out


def _sample_rng(spec, k):
    return np.random.default_rng(np.random.SeedSequence([spec.seed, spec.id, k]))


def sample_problem(spec, k):
    """The k-th random problem of an experiment (independent of the others)."""
    rng = _sample_rng(spec, k)
    kind = spec.kind
    if kind == "roots":
        return random_from_roots(spec.degree, spec.exponent_range, spec.multiplicity_max, seed=rng)
    if kind == "coeffs":
        return random_coeffs(spec.degree, spec.exponent_range, seed=rng), None
    if spec.id == 5:
        s = int(rng.integers(2, 9))
        d = int(rng.integers(2, 8))
    else:
        s, d = spec.size, spec.degree
    return random_matrix_poly(s, d, spec.exponent_range, seed=rng), None


def run_sample(spec, k):
    """One CSV row (dict) for sample ``k``; failures are recorded, not raised."""
    t0 = time.perf_counter()
    row = {"sample": k}
    try:
        prob, true_roots = sample_problem(spec, k)
    except TropirootsError as exc:
        row["status"] = f"generation_failed: {exc}"
        return row
    try:
        if spec.kind == "pevp":
            row.update(size=prob.size, degree=prob.degree)
            res = solve_pevp(prob)
            row.update(status="ok", iterations=res.diagnostics["iterations"],
                       eta_pevp_max=res.eta_max, threshold=100 * prob.degree * prob.size * EPS,
                       excluded=res.backward.excluded, large=int(res.large.sum()))
        else:
            row["degree"] = prob.degree
            res = solve(prob, backerr=spec.backerr, mu_opt=spec.mu_opt)
            row.update(status="ok", iterations=res.diagnostics["iterations"])
            if res.report is not None:
                rep = res.report
                row.update(eta_norm=rep.eta_norm, eta_elem_rel=rep.eta_elem_rel,
                           eta_minmax=rep.eta_minmax)
                if spec.mu_opt:
                    row["eta_minmax_opt"] = rep.eta_minmax_opt
            if true_roots is not None:
                row["max_forward_err"] = float(np.max(forward_errors(true_roots, res.roots)))
            if spec.assumption1:
                a1 = check_assumption1(prob)
                row.update(a1_deltaA_over_eps=a1.deltaA_ratio,
                           a1_max_col_ratio=float(np.max(a1.deltaB_col_ratios)),
                           a1_verdict="pass" if a1.passed else "fail")
    except NoConvergence as exc:
        row["status"] = f"no_convergence at index {exc.index}"
    except TropirootsError as exc:
        row["status"] = f"error: {exc}"
    if spec.timing:
        row["wall_time"] = time.perf_counter() - t0
    return row


def _run_one(args):
    return run_sample(*args)


def run_experiment(spec, jobs=1):
    """All rows, in sample order."""
    tasks = [(spec, k) for k in range(spec.sample_count)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_one, tasks))
    return [run_sample(spec, k) for k in range(spec.sample_count)]


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def rows_to_csv(spec, rows):
    buf = io.StringIO()
    fields = spec.fields()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([_fmt(row.get(f)) for f in fields])
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o)}")


def _dump(obj, out):
    out.write(json.dumps(obj, default=_json_default, allow_nan=True, indent=2))
    out.write("\n")


def _load_poly(path):
    obj = load_json(path)
    if not isinstance(obj, Polynomial):
        raise InvalidInput(f"{path}: expected a scalar polynomial")
    return obj


def _load_roots(path):
    with open(path) as fh:
        obj = json.load(fh)
    try:
        raw = obj["roots"] if isinstance(obj, dict) else obj
        return np.array([complex(r) if isinstance(r, (int, float)) else complex(r[0], r[1])
                         for r in raw])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InvalidInput(f"malformed roots JSON: {exc}") from exc


def _write_text(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def cmd_roots(args, out):
    p = _load_poly(args.input)
    res = solve(p, backerr=args.backerr or args.mu_opt, mu_opt=args.mu_opt)
    obj = res.to_json()
    if args.assumption1:
        obj["assumption1"] = check_assumption1(p).to_json()
    if args.csv and res.report is not None:
        _write_text(args.csv, res.report.to_csv())
    _dump(obj, out)
    return 0


def cmd_polyeig(args, out):
    P = load_json(args.input)
    if isinstance(P, Polynomial):
        P = MatrixPolynomial.from_scalar(P)
    res = solve_pevp(P, norm=args.norm)
    _dump(res.to_json(), out)
    return 0


def cmd_tropical(args, out):
    p = _load_poly(args.input)
    t = tropical_roots(p)
    g = gammas(p, t)
    obj = t.to_json()
    obj.update(g.to_json())
    if args.csv:
        _write_text(args.csv, newton_polygon_csv(p, t, g))
    _dump(obj, out)
    return 0


def cmd_backerr(args, out):
    p = _load_poly(args.input)
    roots = _load_roots(args.roots)
    rep = eta_minmax_upper(p, roots, mu_opt=args.mu_opt and p.is_real())
    if args.csv:
        _write_text(args.csv, rep.to_csv())
    _dump(rep.to_json(), out)
    return 0


def cmd_experiment(args, out):
    lo_hi = tuple(args.exp_range) if args.exp_range else None
    spec = ExperimentSpec(id=args.id, sample_count=args.samples, degree=args.degree,
                          exponent_range=lo_hi, multiplicity_max=args.multiplicity_max,
                          seed=args.seed, size=args.size, assumption1=args.assumption1,
                          mu_opt=args.mu_opt, timing=args.timing)
    text = rows_to_csv(spec, run_experiment(spec, jobs=args.jobs))
    if args.out:
        _write_text(args.out, text)
    else:
        out.write(text)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="tropiroots",
                                 description="Polynomial roots and eigenvalues via tropically scaled companion pencils.")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("roots", help="roots of a polynomial given as JSON")
    r.add_argument("input")
    r.add_argument("--backerr", action="store_true", help="attach backward errors")
    r.add_argument("--assumption1", action="store_true", help="attach the QZ gradedness check")
    r.add_argument("--mu-opt", action="store_true", help="also minimize over real mu (real input)")
    r.add_argument("--csv", help="per-coefficient residual CSV")
    r.set_defaults(func=cmd_roots)

    e = sub.add_parser("polyeig", help="eigenvalues of a matrix polynomial given as JSON")
    e.add_argument("input")
    e.add_argument("--norm", choices=["2", "fro"], default="2")
    e.set_defaults(func=cmd_polyeig)

    t = sub.add_parser("tropical", help="Newton polygon, tropical roots and gamma weights")
    t.add_argument("input")
    t.add_argument("--csv", help="Newton polygon CSV")
    t.set_defaults(func=cmd_tropical)

    b = sub.add_parser("backerr", help="backward errors of given roots")
    b.add_argument("input")
    b.add_argument("roots")
    b.add_argument("--csv", help="per-coefficient residual CSV")
    b.add_argument("--mu-opt", action="store_true")
    b.set_defaults(func=cmd_backerr)

    x = sub.add_parser("experiment", help="seeded randomized experiment, CSV output")
    x.add_argument("--id", type=int, default=1, choices=sorted(EXPERIMENTS))
    x.add_argument("--samples", type=int, default=100)
    x.add_argument("--degree", type=int)
    x.add_argument("--size", type=int, default=4, help="matrix size for experiment 6")
    x.add_argument("--exp-range", type=float, nargs=2, metavar=("LO", "HI"))
    x.add_argument("--multiplicity-max", type=int)
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--out")
    x.add_argument("--backerr", action="store_true", help="accepted for symmetry; always on")
    x.add_argument("--assumption1", action="store_true")
    x.add_argument("--mu-opt", action="store_true")
    x.add_argument("--timing", action="store_true", help="add a wall_time column")
    x.add_argument("--jobs", type=int, default=1)
    x.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None, out=None):
    args = build_parser().parse_args(argv)
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except NoConvergence as exc:
        print(f"tropiroots: {exc}", file=sys.stderr)
        return 2
    except (TropirootsError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"tropiroots: {exc}", file=sys.stderr)
        return 1
    (out or sys.stdout).write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
