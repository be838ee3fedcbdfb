"""Command-line front end: curves, states, negativity scans and scaling fits.

Subcommands: corr, expect, rdm, ed, gmn, sep, c4, scan, scaling.  Every
output file starts with the fully resolved configuration and a format
version, CSV cells carry 17 significant digits, and repeated runs with the
same configuration and seed produce byte-identical files.

Exit codes: 0 success, 2 usage error, 3 numerical failure,
4 separability inconclusive.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .concurrence import c4_mixed
from .correlators import QuadratureError, build_table
from .ed_oracle import exact_ground_state, partial_trace
from .gmn import genuine_negativity, verify_witness
from .ipm import SolverFailure
from .model import ModelParams
from .rdm import Arrangement, PhysicalityError, build_rdm
from .scaling import (
    Curve,
    check_step,
    fit_log_divergence,
    fit_shift_exponent,
    locate_pseudo_critical,
)
from .separability import Inconclusive, certify_biseparable
from .templates import template_expectation
from .wick import PauliString, pauli_expectation

FORMAT_VERSION = "xychain-1"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_INCONCLUSIVE = 4

_NUMERICAL_ERRORS = (QuadratureError, SolverFailure, PhysicalityError,
                     np.linalg.LinAlgError)


# ----------------------------------------------------------------------
# configuration and formatting helpers
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """Fully resolved parameters of one run, echoed into every output."""

    subcommand: str
    options: dict = field(default_factory=dict)

    def as_json(self) -> str:
        return json.dumps({"subcommand": self.subcommand, **self.options},
                          sort_keys=True)


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _json_17(obj, indent=0) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    pad = " " * indent
    if isinstance(obj, dict):
        items = [f'{pad}  "{k}": {_json_17(v, indent + 2).lstrip()}'
                 for k, v in sorted(obj.items())]
        return pad + "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        items = [_json_17(v, indent + 2) for v in obj]
        return pad + "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return pad + ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return pad + str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return pad + fmt(obj)
    if obj is None:
        return pad + "null"
    return pad + json.dumps(obj)


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w"), True


def write_csv(path, config: RunConfig, header: str, rows):
    out, close = _open_out(path)
    try:
        out.write(f"# format: {FORMAT_VERSION}\n")
        out.write(f"# config: {config.as_json()}\n")
        out.write(header + "\n")
        for row in rows:
            out.write(",".join(fmt(c) if isinstance(c, float) else str(c)
                               for c in row) + "\n")
    finally:
        if close:
            out.close()


def write_json(path, payload: dict):
    out, close = _open_out(path)
    try:
        out.write(_json_17(payload) + "\n")
    finally:
        if close:
            out.close()


def matrix_document(config: RunConfig, params: ModelParams | None,
                    spacings, matrix: np.ndarray, extra: dict | None = None) -> dict:
    meta = {
        "basis": "site-ordered tensor factors; |0> is the sigma_z=+1 state",
        "spacings": list(spacings) if spacings is not None else None,
    }
    if params is not None:
        meta.update({
            "lambda": params.lam,
            "gamma": params.gamma,
            "L": "inf" if params.thermodynamic else params.L,
        })
    doc = {
        "format": FORMAT_VERSION,
        "config": json.loads(config.as_json()),
        "metadata": meta,
        "matrix": [[float(x) for x in row] for row in np.asarray(matrix)],
    }
    if extra:
        doc.update(extra)
    return doc


def read_matrix_json(path) -> np.ndarray:
    with open(path) as fh:
        doc = json.load(fh)
    return np.asarray(doc["matrix"], dtype=float)


# ----------------------------------------------------------------------
# argument handling
# ----------------------------------------------------------------------

def _parse_size(text: str) -> int | None:
    if text.lower() in ("inf", "infinity", "thermo"):
        return None
    return int(text)


def _parse_arr(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(","))


def _parse_range(text: str) -> np.ndarray:
    try:
        a, b, step = (float(p) for p in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected a:b:step, got {text!r}") from exc
    if step <= 0 or b < a:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    n = int(round((b - a) / step))
    return a + step * np.arange(n + 1)


def _model_args(p: argparse.ArgumentParser, size_default="inf"):
    p.add_argument("--lambda", dest="lam", type=float, default=1.0,
                   help="coupling strength (default 1.0)")
    p.add_argument("--gamma", type=float, default=1.0,
                   help="anisotropy in [0,1] (default 1 = Ising)")
    p.add_argument("--L", type=_parse_size, default=size_default,
                   help="odd chain length or 'inf' (default %(default)s)")


def _common_args(p: argparse.ArgumentParser):
    p.add_argument("--tol", type=float, default=1e-9,
                   help="solver / quadrature tolerance (default 1e-9)")
    p.add_argument("--out", default=None, help="output path (default stdout)")


# ----------------------------------------------------------------------
# negativity evaluation (worker-pool friendly)
# ----------------------------------------------------------------------

def _negativity(lam: float, gamma: float, size: int | None, spacings,
                tol: float) -> float:
    params = ModelParams(lam, gamma, size)
    rho = build_rdm(params, Arrangement(spacings), tol=min(tol, 1e-10))
    return genuine_negativity(rho, tol=tol).value


def _negativity_task(task):
    lam, gamma, size, spacings, tol = task
    return _negativity(lam, gamma, size, spacings, tol)


def _evaluate_many(tasks, jobs: int):
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) < 4:
        return [_negativity_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_negativity_task, tasks, chunksize=4))


# ----------------------------------------------------------------------
# scan and scaling pipelines
# ----------------------------------------------------------------------

def run_scan(lambdas, arrangements, gamma: float, size: int | None,
             tol: float, jobs: int):
    """Negativity over a coupling grid for several arrangements.

    Returns rows (lambda, arrangement-string, N) ordered by lambda, then
    by arrangement in the order requested.
    """
    tasks = [(float(lam), gamma, size, arr, tol)
             for lam in lambdas for arr in arrangements]
    values = _evaluate_many(tasks, jobs)
    rows = []
    for (lam, _, _, arr, _), val in zip(tasks, values):
        rows.append((float(lam), "-".join(str(s) for s in arr), float(val)))
    return rows


def _derivative_curve(lambdas, gamma, size, spacings, tol, h, jobs):
    """Central-stencil derivative of N at every grid point (pooled)."""
    offsets = (-2.0, -1.0, 1.0, 2.0)
    tasks = [(float(lam + k * h), gamma, size, spacings, tol)
             for lam in lambdas for k in offsets]
    vals = _evaluate_many(tasks, jobs)
    derivs = []
    for i in range(len(lambdas)):
        fm2, fm1, fp1, fp2 = (vals[4 * i + j] for j in range(4))
        derivs.append((-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h))
    return np.asarray(derivs)


def run_scaling_pipeline(l_list, spacings, gamma: float, tol: float, h: float,
                         jobs: int, coarse=(0.9, 1.1, 5e-3), refine_step=5e-4,
                         fit_window=(5e-4, 2e-2), thermo_points=12,
                         position_lmax=33):
    """Derivative curves, pseudo-critical minima and every scaling fit.

    Returns (per_l, summary): ``per_l`` maps L to its refined derivative
    curve, ``summary`` carries minima, the log-law fits, kappa and nu.
    """
    if not l_list:
        raise ValueError("need at least one chain length")
    if any(l % 2 == 0 or l < 3 for l in l_list):
        raise ValueError(f"chain lengths must be odd and >= 3: {l_list}")
    check_step(h, tol)
    lo, hi, step = coarse
    coarse_grid = lo + step * np.arange(int(round((hi - lo) / step)) + 1)

    per_l = {}
    minima = {}
    for l_val in sorted(l_list):
        dcoarse = _derivative_curve(coarse_grid, gamma, l_val, spacings,
                                    tol, h, jobs)
        k = int(np.argmin(dcoarse))
        k = min(max(k, 2), len(coarse_grid) - 3)
        center = coarse_grid[k]
        half = 10 * refine_step
        fine_grid = (center - half) + refine_step \
            * np.arange(int(round(2 * half / refine_step)) + 1)
        dfine = _derivative_curve(fine_grid, gamma, l_val, spacings,
                                  tol, h, jobs)
        curve = Curve(fine_grid, dfine, ModelParams(1.0, gamma, l_val),
                      Arrangement(spacings), "dN/dlambda")
        pos, val = locate_pseudo_critical(curve)
        minima[l_val] = (pos, val)
        per_l[l_val] = {
            "coarse": (coarse_grid, dcoarse),
            "fine": (fine_grid, dfine),
            "minimum": (pos, val),
        }

    # thermodynamic-limit divergence on the right side of the transition
    deltas = np.geomspace(fit_window[0], fit_window[1], thermo_points)
    dthermo = _derivative_curve(1.0 + deltas, gamma, None, spacings,
                                tol, h, jobs)
    fit_inf = fit_log_divergence(deltas, dthermo)

    ls = np.array(sorted(l_list))
    vals = np.array([minima[l][1] for l in ls])
    fit_l = fit_log_divergence(ls, vals) if len(ls) >= 4 else None

    pos_ls = [l for l in ls if l <= position_lmax]
    kappa = prefactor = None
    if len(pos_ls) >= 4:
        kappa, prefactor = fit_shift_exponent(
            pos_ls, [minima[l][0] for l in pos_ls])

    nu = -fit_inf.slope / fit_l.slope if fit_l and fit_l.slope != 0 else None
    summary = {
        "minima": {int(l): {"lambda_c": minima[l][0], "value": minima[l][1]}
                   for l in ls},
        "fit_thermo": {"slope": fit_inf.slope, "intercept": fit_inf.intercept,
                       "residual_rms": fit_inf.residual_rms},
        "fit_minima": None if fit_l is None else
                      {"slope": fit_l.slope, "intercept": fit_l.intercept,
                       "residual_rms": fit_l.residual_rms},
        "kappa": kappa,
        "kappa_prefactor": prefactor,
        "nu": nu,
        "thermo_window": [float(deltas[0]), float(deltas[-1])],
        "thermo_curve": {"delta": [float(x) for x in deltas],
                         "dN_dlambda": [float(y) for y in dthermo]},
    }
    return per_l, summary


# ----------------------------------------------------------------------
# subcommand handlers
# ----------------------------------------------------------------------

def _cmd_corr(args):
    params = ModelParams(args.lam, args.gamma, args.L)
    cfg = RunConfig("corr", {
        "lambda": args.lam, "gamma": args.gamma,
        "L": "inf" if args.L is None else args.L,
        "rmin": args.rmin, "rmax": args.rmax, "tol": args.tol,
    })
    table = build_table(params, args.rmin, args.rmax, args.tol)
    rows = [(r, table[r]) for r in range(args.rmin, args.rmax + 1)]
    write_csv(args.out, cfg, "r,G", rows)
    return EXIT_OK


def _cmd_expect(args):
    params = ModelParams(args.lam, args.gamma, args.L)
    spac = args.arr
    if len(spac) == 2:
        spac = spac + (1,)
        labels = tuple(args.labels.upper()) + ("I",)
    else:
        labels = tuple(args.labels.upper())
    if len(labels) != 4 or len(spac) != 3:
        raise ValueError("expect needs four labels and three spacings "
                         "(three-site strings: pad with I)")
    cfg = RunConfig("expect", {
        "lambda": args.lam, "gamma": args.gamma,
        "L": "inf" if args.L is None else args.L,
        "labels": "".join(labels), "arr": list(spac), "tol": args.tol,
    })
    span = sum(spac)
    g = build_table(params, -(span + 1), span + 1, args.tol)
    sites = (0, spac[0], spac[0] + spac[1], spac[0] + spac[1] + spac[2])
    engine = pauli_expectation(PauliString(sites, labels), g)
    tmpl = template_expectation(labels, spac, g)
    if abs(engine - tmpl) > 1e-9:
        raise PhysicalityError(
            f"engine and closed-form template disagree: {engine} vs {tmpl}")
    rows = [("".join(labels), spac[0], spac[1], spac[2], float(engine))]
    write_csv(args.out, cfg, "labels,alpha,beta,delta,value", rows)
    return EXIT_OK


def _cmd_rdm(args):
    params = ModelParams(args.lam, args.gamma, args.L)
    arr = Arrangement(args.arr)
    cfg = RunConfig("rdm", {
        "lambda": args.lam, "gamma": args.gamma,
        "L": "inf" if args.L is None else args.L,
        "arr": list(arr.spacings), "tol": args.tol,
    })
    state = build_rdm(params, arr, args.tol)
    write_json(args.out, matrix_document(cfg, params, arr.spacings,
                                         state.matrix))
    return EXIT_OK


def _cmd_ed(args):
    params = ModelParams(args.lam, args.gamma, args.L)
    if params.thermodynamic:
        raise ValueError("exact diagonalization needs a finite chain")
    arr = Arrangement(args.arr)
    cfg = RunConfig("ed", {
        "lambda": args.lam, "gamma": args.gamma, "L": args.L,
        "arr": list(arr.spacings),
    })
    gs = exact_ground_state(params)
    sites = [0]
    for s in arr.spacings:
        sites.append(sites[-1] + s)
    state = partial_trace(gs, sites)
    write_json(args.out, matrix_document(
        cfg, params, arr.spacings, state.matrix,
        extra={"energy": gs.energy, "gap": gs.gap}))
    return EXIT_OK


def _cmd_gmn(args):
    rho = read_matrix_json(args.state)
    cfg = RunConfig("gmn", {"state": args.state, "tol": args.tol,
                            "witness": bool(args.witness)})
    res = genuine_negativity(rho, tol=args.tol)
    ok, _ = verify_witness(res, rho)
    payload = {
        "format": FORMAT_VERSION,
        "config": json.loads(cfg.as_json()),
        "value": res.value,
        "duality_gap": res.duality_gap,
        "status": res.status,
        "iterations": res.iterations,
        "witness_verified": bool(ok),
    }
    if args.witness:
        payload["witness"] = [[float(x) for x in row]
                              for row in res.witness.witness]
    write_json(args.out, payload)
    return EXIT_OK


def _cmd_sep(args):
    rho = read_matrix_json(args.state)
    cfg = RunConfig("sep", {"state": args.state, "max_iter": args.max_iter,
                            "seed": args.seed, "trials": args.trials})
    result = certify_biseparable(rho, max_iter=args.max_iter, seed=args.seed,
                                 trials_per_iter=args.trials)
    if isinstance(result, Inconclusive):
        write_json(args.out, {
            "format": FORMAT_VERSION,
            "config": json.loads(cfg.as_json()),
            "certified": False,
            "iterations": result.iterations,
            "final_purity": result.final_purity,
            "reason": result.reason,
        })
        return EXIT_INCONCLUSIVE
    payload = {
        "format": FORMAT_VERSION,
        "config": json.loads(cfg.as_json()),
        "certified": True,
        "iterations": result.iterations,
        "tail_weight": result.tail_weight,
        "weights": list(result.weights),
        "bipartitions": [list(p.subset) for p in result.parts],
        "vectors_real": [[float(x) for x in np.real(v)] for v in result.vectors],
        "vectors_imag": [[float(x) for x in np.imag(v)] for v in result.vectors],
        "tail": [[float(x) for x in row] for row in result.tail],
    }
    write_json(args.out, payload)
    return EXIT_OK


def _cmd_c4(args):
    cfg_opts = {"gamma": args.gamma, "tol": args.tol,
                "arr": list(args.arr) if args.arr else None}
    if args.state:
        rho = read_matrix_json(args.state)
        cfg = RunConfig("c4", {"state": args.state, **cfg_opts})
        write_json(args.out, {
            "format": FORMAT_VERSION,
            "config": json.loads(cfg.as_json()),
            "value": c4_mixed(rho),
        })
        return EXIT_OK
    if args.arr is None or len(args.arr) != 3:
        raise ValueError("c4 scans need a four-site --arr a,b,d")
    lambdas = args.lambda_range if args.lambda_range is not None \
        else np.array([args.lam])
    cfg = RunConfig("c4", {"lambda_grid": [float(x) for x in lambdas],
                           "L": "inf" if args.L is None else args.L,
                           **cfg_opts})
    rows = []
    for lam in lambdas:
        params = ModelParams(float(lam), args.gamma, args.L)
        rho = build_rdm(params, Arrangement(args.arr), min(args.tol, 1e-10))
        rows.append((float(lam), c4_mixed(rho)))
    write_csv(args.out, cfg, "lambda,C4", rows)
    return EXIT_OK


def _cmd_scan(args):
    arrs = args.arr or [(1, 1)]
    lambdas = args.lambda_range if args.lambda_range is not None \
        else np.array([args.lam])
    cfg = RunConfig("scan", {
        "lambda_grid": [float(x) for x in lambdas],
        "arrangements": ["-".join(str(s) for s in a) for a in arrs],
        "gamma": args.gamma, "L": "inf" if args.L is None else args.L,
        "tol": args.tol, "jobs": args.jobs,
    })
    rows = run_scan(lambdas, arrs, args.gamma, args.L, args.tol, args.jobs)
    write_csv(args.out, cfg, "lambda,arrangement,N", rows)
    return EXIT_OK


def _cmd_scaling(args):
    if not args.L_list:
        raise ValueError("scaling needs --L-list of odd chain lengths")
    arr = args.arr[0] if args.arr else (1, 1)
    cfg = RunConfig("scaling", {
        "L_list": args.L_list,
        "arr": list(arr),
        "gamma": args.gamma, "tol": args.tol, "h": args.h,
        "jobs": args.jobs,
    })
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    per_l, summary = run_scaling_pipeline(args.L_list, arr, args.gamma,
                                          args.tol, args.h, args.jobs)
    for l_val, data in per_l.items():
        rows = [(float(x), float(y))
                for x, y in zip(data["fine"][0], data["fine"][1])]
        write_csv(os.path.join(out_dir, f"derivative_L{l_val}.csv"),
                  cfg, "lambda,dN_dlambda", rows)
    write_json(os.path.join(out_dir, "scaling_summary.json"), {
        "format": FORMAT_VERSION,
        "config": json.loads(cfg.as_json()),
        **summary,
    })
    # gnuplot-ready data: minima against L, and the infinite-chain divergence
    rows = [(int(l), summary["minima"][int(l)]["lambda_c"],
             summary["minima"][int(l)]["value"]) for l in sorted(per_l)]
    write_csv(os.path.join(out_dir, "minima.csv"), cfg,
              "L,lambda_c_L,min_dN", rows)
    curve = summary["thermo_curve"]
    write_csv(os.path.join(out_dir, "thermo_divergence.csv"), cfg,
              "delta,dN_dlambda",
              list(zip(curve["delta"], curve["dN_dlambda"])))
    return EXIT_OK


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xychain",
        description="Ground-state entanglement of the transverse-field "
                    "XY chain: correlators, reduced states, genuine "
                    "multiparticle negativity, separability and scaling.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("corr", help="two-point contraction table G_r")
    _model_args(p)
    p.add_argument("--rmin", type=int, default=-5)
    p.add_argument("--rmax", type=int, default=5)
    _common_args(p)
    p.set_defaults(func=_cmd_corr)

    p = sub.add_parser("expect", help="Pauli-string expectation value")
    _model_args(p)
    p.add_argument("--labels", required=True,
                   help="string over XYZI, e.g. XXZI")
    p.add_argument("--arr", type=_parse_arr, default=(1, 1, 1),
                   help="comma spacings, e.g. 1,1,1")
    _common_args(p)
    p.set_defaults(func=_cmd_expect)

    p = sub.add_parser("rdm", help="reduced density matrix (JSON)")
    _model_args(p)
    p.add_argument("--arr", type=_parse_arr, default=(1, 1))
    _common_args(p)
    p.set_defaults(func=_cmd_rdm)

    p = sub.add_parser("ed", help="exact-diagonalization marginal (JSON)")
    _model_args(p, size_default="11")
    p.add_argument("--arr", type=_parse_arr, default=(1, 1))
    _common_args(p)
    p.set_defaults(func=_cmd_ed)

    p = sub.add_parser("gmn", help="genuine multiparticle negativity")
    p.add_argument("state", help="JSON matrix file (from rdm or ed)")
    p.add_argument("--witness", action="store_true",
                   help="include the witness matrix in the output")
    _common_args(p)
    p.set_defaults(func=_cmd_gmn)

    p = sub.add_parser("sep", help="biseparability certification")
    p.add_argument("state", help="JSON matrix file")
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=64)
    _common_args(p)
    p.set_defaults(func=_cmd_sep)

    p = sub.add_parser("c4", help="four-qubit concurrence")
    p.add_argument("--state", default=None, help="JSON matrix file")
    _model_args(p)
    p.add_argument("--arr", type=_parse_arr, default=None)
    p.add_argument("--lambda-range", type=_parse_range, default=None,
                   metavar="A:B:STEP")
    _common_args(p)
    p.set_defaults(func=_cmd_c4)

    p = sub.add_parser("scan", help="negativity over a coupling grid")
    _model_args(p)
    p.add_argument("--arr", type=_parse_arr, action="append", default=None,
                   help="arrangement (repeatable)")
    p.add_argument("--lambda-range", type=_parse_range, default=None,
                   metavar="A:B:STEP")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    _common_args(p)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("scaling", help="finite-size scaling pipeline")
    p.add_argument("--L-list", type=int, nargs="+", default=None)
    p.add_argument("--arr", type=_parse_arr, action="append", default=None)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--h", type=float, default=1e-4,
                   help="finite-difference step (default 1e-4)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=_cmd_scaling)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _NUMERICAL_ERRORS as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
