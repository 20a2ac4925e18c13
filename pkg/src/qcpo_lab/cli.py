"""Command-line front end: ``qcpo-lab {classify,build,sweep,verify}``.

Exit codes: 0 success, 2 validation failure (the input is well formed but
violates a required property), 1 I/O or input-format error.
"""

import argparse
import itertools
import json
import sys

import numpy as np

from . import channels, classify, families, linalg, matrixio, qcpo, verify
from ._parallel import parallel_map
from .exceptions import NotHermitianError

EXIT_OK, EXIT_IO, EXIT_INVALID = 0, 1, 2

FAMILIES = ("pi_lambda", "pi_gamma", "diag", "phi_k", "cor5")
GRID_PARAMS = {
    "pi_lambda": ("lambda",),
    "pi_gamma": ("gamma2",),
    "diag": ("c", "mu"),
    "phi_k": ("k",),
    "cor5": ("c", "c_offdiag"),
}


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _emit(text: str, out: str = None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(path: str):
    try:
        return matrixio.read_matrix(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from None
    except matrixio.MatrixFileError as exc:
        raise CliError(str(exc), EXIT_IO) from None


# -- classify --------------------------------------------------------------------


def cmd_classify(args) -> int:
    m, kind, dims = _load(args.input)
    if kind == "matrix":
        try:
            dims = linalg.square_dims(m)
        except ValueError as exc:
            raise CliError(f"dimension mismatch: {exc}", EXIT_IO) from None
    if dims[0] != dims[1]:
        raise CliError(f"dimension mismatch: classification needs equal factors, got {list(dims)}", EXIT_IO)
    try:
        rep = classify.classify_operator(m, dims, tol=args.tol, kpos=args.kpos, restarts=args.restarts, seed=args.seed)
    except NotHermitianError as exc:
        raise CliError(f"non-Hermitian input: max |A - A^dag| = {exc.deviation:.3e}", EXIT_IO) from None
    doc = {"kind": kind}
    doc.update(rep.to_dict())
    code = EXIT_OK
    if kind == "state":
        valid = rep.min_eig >= -args.tol and abs(rep.trace - 1) <= 1e-10
        doc["is_state"] = valid
        code = EXIT_OK if valid else EXIT_INVALID
    elif kind == "qcpo":
        valid = rep.is_cp and rep.is_unital
        doc["is_qcpo"] = valid
        code = EXIT_OK if valid else EXIT_INVALID
    _emit(matrixio.dumps(doc) + "\n", args.out)
    return code


# -- build -----------------------------------------------------------------------


def _need(args, name, flag):
    v = getattr(args, name)
    if v is None:
        raise CliError(f"family {args.family} requires {flag}", EXIT_INVALID)
    return v


def _c_table(args, n):
    if args.c_table is not None:
        try:
            t = np.array(json.loads(args.c_table), dtype=float)
        except (json.JSONDecodeError, ValueError, TypeError):
            raise CliError("--c-table must be a JSON list of lists of numbers", EXIT_IO) from None
        if t.shape != (n, n):
            raise CliError(f"dimension mismatch: --c-table must be {n}x{n}", EXIT_IO)
        return t
    return np.full((n, n), float(_need(args, "c", "--c")))


def _build_object(family, n, params):
    """Returns ``(matrix, kind, map_or_none)``."""
    if family == "pi_lambda":
        return families.make_pi_lambda(n, params["lambda"]), "qcpo", None
    if family == "pi_gamma":
        return families.make_pi_gamma(n, params["gamma2"]), "qcpo", None
    if family == "diag":
        p = classify.DiagFamilyParams(params["c_table"], params["mu"])
        phi = families.make_diag_family(p)
        return phi.choi, "choi", phi
    if family == "phi_k":
        k = params["k"]
        if int(k) != k:
            raise ValueError(f"k must be an integer, got {k!r}")
        phi = families.make_phi_k(n, int(k))
        return phi.choi, "choi", phi
    if family == "cor5":
        phi = families.make_cor5_family(n, params["c"], params["c_offdiag"], check=params.get("check", True))
        return phi.choi, "choi", phi
    raise CliError(f"unknown family {family!r}", EXIT_IO)


def _build_params(args):
    n = args.n
    if args.family == "pi_lambda":
        return {"lambda": _need(args, "lam", "--lambda")}
    if args.family == "pi_gamma":
        return {"gamma2": _need(args, "gamma2", "--gamma2")}
    if args.family == "diag":
        return {"c_table": _c_table(args, n), "mu": _need(args, "mu", "--mu")}
    if args.family == "phi_k":
        return {"k": _need(args, "k", "--k")}
    return {"c": _need(args, "c", "--c"), "c_offdiag": _need(args, "c_offdiag", "--c-offdiag")}


def _rho(args, n):
    if args.rho == "maximally-mixed":
        return np.eye(n, dtype=complex) / n
    m, kind, dims = _load(args.rho)
    if m.shape != (n, n):
        raise CliError(f"dimension mismatch: rho must be {n}x{n}, got {m.shape[0]}x{m.shape[1]}", EXIT_IO)
    return m


def cmd_build(args) -> int:
    n = args.n
    params = _build_params(args)
    try:
        mat, kind, phi = _build_object(args.family, n, params)
        if args.compound:
            if args.rho is None:
                raise CliError("--compound requires --rho FILE (or --rho maximally-mixed)", EXIT_INVALID)
            rho = _rho(args, n)
            if args.family == "phi_k":
                try:
                    omega = families.make_npt_compound(n, int(params["k"]), rho)
                except ValueError as exc:
                    if "rank" in str(exc):
                        raise CliError("rank rho = n required: the NPT construction needs a full-rank rho", EXIT_INVALID) from None
                    raise
            else:
                if phi is None:
                    pi = qcpo.Qcpo.from_operator(mat, tol=args.tol)
                else:
                    pi = qcpo.qcpo_of_channel(channels.normalize_map(phi), tol=args.tol)
                omega = qcpo.compound_from_qcpo(pi, rho)
            mat, kind = omega.operator, "state"
    except CliError:
        raise
    except ValueError as exc:
        raise CliError(f"precondition violated: {exc}", EXIT_INVALID) from None
    _emit(matrixio.write_matrix(mat, kind, (n, n)), args.out)
    return EXIT_OK


# -- sweep -----------------------------------------------------------------------


def parse_grid(text: str):
    """``name:start:stop:steps`` -> ``(name, values)``."""
    parts = text.split(":")
    if len(parts) != 4:
        raise CliError(f"invalid grid {text!r}; expected name:start:stop:steps", EXIT_INVALID)
    name = parts[0].replace("-", "_")
    try:
        start, stop, steps = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError:
        raise CliError(f"invalid grid {text!r}; bounds must be numbers and steps an integer", EXIT_INVALID) from None
    if steps < 2:
        raise CliError(f"invalid grid {text!r}: steps must be at least 2", EXIT_INVALID)
    if not (np.isfinite(start) and np.isfinite(stop)):
        raise CliError(f"invalid grid {text!r}: bounds must be finite", EXIT_INVALID)
    return name, np.linspace(start, stop, steps)


def _sweep_point(family, n, fixed, point, tol):
    params = dict(fixed)
    params.update(point)
    if family == "diag":
        c = params.pop("c")
        params["c_table"] = np.full((n, n), float(c)) if np.ndim(c) == 0 else c
    if family == "cor5":
        params["check"] = False
    if family == "phi_k":
        params["k"] = round(params["k"], 9)
    mat, kind, phi = _build_object(family, n, params)
    if family == "phi_k":
        mat = mat / (int(params["k"]) * n - 1)
    w = np.linalg.eigvalsh(mat)[0]
    wpt = np.linalg.eigvalsh(linalg.partial_transpose(mat, "B"))[0]
    unital = float(np.linalg.norm(linalg.partial_trace(mat, "B") - np.eye(n))) <= 1e-10
    is_qcpo = bool(w >= -tol and unital)
    is_ppt = bool(w >= -tol and wpt >= -tol)
    row = [point[k] for k in point] + [float(w), float(wpt), is_qcpo, is_ppt]
    if family == "pi_lambda":
        lo, hi = families.lambda_range(n)
        row.append(lo <= params["lambda"] <= hi)
    elif family == "diag":
        p = classify.DiagFamilyParams(params["c_table"], params["mu"])
        row += [classify.thm1_cp_closed_form(p), classify.thm2_ccp_inequalities(p), classify.cor3_pnp_closed_form(p)]
    elif family == "cor5":
        p = families.cor5_params(n, params["c"], params["c_offdiag"])
        row += [classify.thm2_ccp_inequalities(p), classify.kpos_window_find(n, params["c"], params["c_offdiag"])]
    return row


CLOSED_FORM_COLUMNS = {
    "pi_lambda": ["in_lambda_range"],
    "pi_gamma": [],
    "diag": ["thm1_cp", "thm2_ccp", "cor3_cp_ccp"],
    "phi_k": [],
    "cor5": ["cp_closed_form", "kpos_window_k"],
}


def cmd_sweep(args) -> int:
    family, n = args.family, args.n
    if not args.grid:
        raise CliError("sweep needs at least one --grid name:start:stop:steps", EXIT_INVALID)
    grids = [parse_grid(g) for g in args.grid]
    allowed = GRID_PARAMS[family]
    for name, _ in grids:
        if name not in allowed:
            raise CliError(f"family {family} cannot sweep {name!r}; choose from {allowed}", EXIT_INVALID)
    names = [g[0] for g in grids]
    fixed = {}
    for name in allowed:
        if name in names:
            continue
        attr = {"lambda": "lam"}.get(name, name)
        v = getattr(args, attr)
        if v is None:
            raise CliError(f"family {family} needs --{name.replace('_', '-')} or a grid over it", EXIT_INVALID)
        fixed[name] = v
    points = [dict(zip(names, vals)) for vals in itertools.product(*(g[1] for g in grids))]
    try:
        rows = parallel_map(lambda pt: _sweep_point(family, n, fixed, pt, args.tol), points)
    except ValueError as exc:
        raise CliError(f"invalid sweep point: {exc}", EXIT_INVALID) from None
    header = names + ["min_eig", "pt_min_eig", "is_qcpo", "is_ppt"] + CLOSED_FORM_COLUMNS[family]
    _emit(matrixio.csv_text(header, rows), args.out)
    return EXIT_OK


# -- verify ----------------------------------------------------------------------


def cmd_verify(args) -> int:
    report = verify.run(args.suite, n=args.n, seed=args.seed)
    _emit(matrixio.dumps(report) + "\n", args.out)
    return EXIT_OK if report["passed"] else EXIT_INVALID


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed for every stochastic component")
    common.add_argument("--tol", type=float, default=linalg.PSD_TOL, help="PSD tolerance")
    common.add_argument("--out", help="write output here instead of stdout")

    fam = argparse.ArgumentParser(add_help=False)
    fam.add_argument("--n", type=int, default=2)
    fam.add_argument("--lambda", dest="lam", type=float)
    fam.add_argument("--gamma2", type=float)
    fam.add_argument("--k", type=float)
    fam.add_argument("--c", type=float)
    fam.add_argument("--c-offdiag", dest="c_offdiag", type=float)
    fam.add_argument("--c-table", dest="c_table", help="JSON n x n coefficient table for the diag family")
    fam.add_argument("--mu", type=float)

    parser = argparse.ArgumentParser(prog="qcpo-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="classify an operator from a matrix file")
    p.add_argument("input")
    p.add_argument("--kpos", action="store_true", help="bracket k-positivity with the Schmidt-rank falsifier")
    p.add_argument("--restarts", type=int, default=200)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("build", parents=[common, fam], help="emit a family member as a matrix file")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--compound", action="store_true", help="emit the compound state for --rho")
    p.add_argument("--rho", help="density matrix file, or 'maximally-mixed'")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("sweep", parents=[common, fam], help="evaluate a family over a parameter grid (CSV)")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--grid", action="append", help="name:start:stop:steps (repeatable; cartesian product)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="run a self-check suite")
    p.add_argument("suite", choices=sorted(verify.SUITES))
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
