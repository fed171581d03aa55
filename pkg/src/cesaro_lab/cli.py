"""Command-line front end: ``cesaro-lab <command> [flags]``.

Every command writes a table (CSV with ``#`` header lines, or JSON
``{meta, rows}``) to ``--out`` or standard output.  Exit status is 2 for
parse or configuration errors, 1 when a result is flagged (budget exceeded,
unstable estimate, indeterminate or mismatched verdict), else 0.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from cesaro_lab import __version__
from cesaro_lab.analytic import CoefficientBudgetExceeded, coefficients
from cesaro_lab.ergodic import (
    mean_convergence,
    mean_norm_table,
    power_norm_table,
    successive_difference,
)
from cesaro_lab.expr import parse_expression
from cesaro_lab.norms import GridOptions, boundary_profile, classify_membership, weighted_sup_norm
from cesaro_lab.operator import (
    apply_cesaro,
    apply_inverse_cesaro,
    cesaro_coefficients,
    cesaro_mean,
    cesaro_power,
    solve_identity_minus_C,
    solve_lambda_resolvent,
    theoretical_norm_bound,
)
from cesaro_lab.optimal import check_entry, optimal_domain_membership, witness_catalog
from cesaro_lab.spectral import DEFAULT_SECTIONS, PERTURBATION, PROBE_SEED, portrait


class ConfigError(ValueError):
    pass


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return str(x)


def _jsonable(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def emit(meta: dict, columns: list, rows: list, fmt: str, out) -> None:
    if fmt == "json":
        body = {"meta": _jsonable(meta),
                "rows": [_jsonable(dict(zip(columns, row))) for row in rows]}
        text = json.dumps(body, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        for key in sorted(meta):
            buf.write(f"# {key}={_num(meta[key])}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_num(v) for v in row])
        text = buf.getvalue()
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_lambda(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse lambda {text!r}") from exc


def _parse_range(text: str):
    try:
        lo, hi = (float(t) for t in text.split(":"))
    except ValueError as exc:
        raise ConfigError(f"expected lo:hi, got {text!r}") from exc
    if hi < lo:
        raise ConfigError(f"empty range {text!r}")
    return lo, hi


def _parse_ints(text: str):
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc
    if not values or min(values) < 1:
        raise ConfigError("need at least one positive integer")
    return values


def _need(args, name):
    value = getattr(args, name)
    if value is None:
        raise ConfigError(f"--{name} is required for '{args.command}'")
    return value


def _gamma(args):
    g = _need(args, "gamma")
    if not g > 0:
        raise ConfigError("--gamma must be positive")
    return g


def _base_meta(args, grid: GridOptions) -> dict:
    meta = {"command": args.command, "version": __version__, "probe_seed": PROBE_SEED,
            "perturbation": PERTURBATION}
    for key in ("f", "h", "gamma", "lam", "n", "nmax", "space", "op", "kind", "sections",
                "ns", "re", "im", "step"):
        value = getattr(args, key, None)
        if value is not None:
            meta["lambda" if key == "lam" else key] = value
    for key, value in grid.as_dict().items():
        meta[f"grid.{key}"] = value
    return meta


def _coefficients(f, nmax: int, grid: GridOptions):
    """Coefficients up to ``nmax``, refusing open-ended series beyond the grid budget."""
    if nmax + 1 > grid.max_coeffs and not getattr(f, "is_polynomial", False):
        raise CoefficientBudgetExceeded(
            f"{nmax + 1} coefficients requested, budget is grid.max_coeffs={grid.max_coeffs}",
            terms=nmax + 1)
    return coefficients(f, nmax)


def cmd_norm(args, grid):
    f = parse_expression(_need(args, "f"))
    gamma = _gamma(args)
    est = weighted_sup_norm(f, gamma, grid)
    rows = [(row.r, row.m_r, row.reliable) for row in boundary_profile(f, gamma, opts=grid)]
    meta = {"value": est.value, "argmax_re": est.argmax_z.real, "argmax_im": est.argmax_z.imag,
            "radial_resolution": est.radial_resolution,
            "angular_resolution": est.angular_resolution, "stable": est.stable}
    return meta, ["r", "m_r", "reliable"], rows, not est.stable


def cmd_membership(args, grid):
    f = parse_expression(_need(args, "f"))
    gamma = _gamma(args)
    both = classify_membership(f, gamma, grid)
    verdicts = [both.big, both.little,
                optimal_domain_membership(f, gamma, "big", grid),
                optimal_domain_membership(f, gamma, "little", grid)]
    rows = [(str(v.space), v.verdict, v.method, json.dumps(_jsonable(v.evidence), sort_keys=True))
            for v in verdicts]
    flagged = any(v.verdict == "indeterminate" for v in verdicts)
    return {}, ["space", "verdict", "method", "evidence"], rows, flagged


def cmd_apply(args, grid):
    f = parse_expression(_need(args, "f"))
    nmax = args.nmax if args.nmax is not None else 16
    op = args.op
    if op in ("mean", "power"):
        n = _need(args, "n")
        g = cesaro_mean(f, n) if op == "mean" else cesaro_power(f, n)
    elif op == "C":
        g = apply_cesaro(f)
    else:
        g = apply_inverse_cesaro(f)
    c = _coefficients(g, nmax, grid)
    rows = [(k, c[k].real, c[k].imag) for k in range(nmax + 1)]
    return {}, ["n", "re", "im"], rows, False


def cmd_solve(args, grid):
    h = parse_expression(_need(args, "h"))
    lam = _parse_lambda(args.lam if args.lam is not None else "1")
    meta = {}
    flagged = False
    if lam == 1:
        f = solve_identity_minus_C(h)
        nmax = args.nmax if args.nmax is not None else 16
        n_res = max(nmax, 4096)
        fc = np.asarray(_coefficients(f, n_res, grid))
        residual = fc - cesaro_coefficients(fc) - np.asarray(coefficients(h, n_res))
        meta["method"] = "identity_minus_C"
        if args.gamma is not None:
            both = classify_membership(f, _gamma(args), grid)
            meta["membership_A"] = both.big.verdict
            flagged = both.big.verdict == "indeterminate"
    else:
        N = args.n if args.n is not None else 64
        f = solve_lambda_resolvent(h, lam, N)
        nmax = args.nmax if args.nmax is not None else N
        n_res = N
        fc = np.asarray(coefficients(f, N))
        residual = lam * fc - cesaro_coefficients(fc) - np.asarray(coefficients(h, N))
        meta["method"] = "forward_substitution"
        meta["section"] = N
    meta["residual_max"] = float(np.max(np.abs(residual)))
    meta["residual_terms"] = n_res + 1
    c = _coefficients(f, nmax, grid)
    rows = [(k, c[k].real, c[k].imag) for k in range(nmax + 1)]
    return meta, ["n", "re", "im"], rows, flagged


def cmd_portrait(args, grid):
    gamma = _gamma(args)
    sections = _parse_ints(args.sections) if args.sections else list(DEFAULT_SECTIONS)
    re_range = _parse_range(_need(args, "re"))
    im_range = _parse_range(args.im or "0:0")
    step = args.step if args.step is not None else 0.125
    if not step > 0:
        raise ConfigError("--step must be positive")
    table = portrait(re_range, im_range, step, gamma, sections, args.space or "big", opts=grid)
    columns = (["re_lambda", "im_lambda"] + [f"nu_{n}" for n in table.sections]
               + ["growth_ratio", "classification"])
    rows = [(r.lam.real, r.lam.imag, *r.nu, r.growth_ratio, r.classification)
            for r in table.rows]
    return {}, columns, rows, False


def cmd_ergodic(args, grid):
    gamma = _gamma(args)
    kind = args.kind
    nmax = args.nmax if args.nmax is not None else 16
    ns = _parse_ints(args.ns) if args.ns else None
    if kind == "power_norm":
        table = power_norm_table(gamma, nmax, opts=grid, ns=ns)
    elif kind == "mean_norm":
        table = mean_norm_table(gamma, nmax, opts=grid, ns=ns)
    else:
        f = parse_expression(args.f or "1")
        if kind == "mean_residual":
            table = mean_convergence(f, gamma, nmax, ns=ns, opts=grid)
        else:
            table = successive_difference(f, gamma, nmax, ns=ns, opts=grid)
    rows = [(r.n, r.value, "" if r.predicted is None else r.predicted) for r in table.rows]
    return {}, ["n", "value", "predicted"], rows, False


def cmd_catalog(args, grid):
    gamma = _gamma(args)
    rows = []
    flagged = False
    for entry in witness_catalog(gamma):
        observed = check_entry(entry, grid)
        for space, expected in entry.expected.items():
            v = observed[space]
            rows.append((entry.name, str(space), expected, v.verdict, v.method,
                         v.verdict == expected))
            flagged |= v.verdict != expected
    return {}, ["name", "space", "expected", "observed", "method", "match"], rows, flagged


def cmd_opnorm(args, grid):
    gamma = _gamma(args)
    nmax = args.nmax if args.nmax is not None else 4
    table = power_norm_table(gamma, nmax, opts=grid)
    meta = {"theoretical_norm_bound": theoretical_norm_bound(gamma)}
    rows = [(r.n, r.value, r.predicted) for r in table.rows]
    return meta, ["n", "value", "predicted"], rows, False


COMMANDS = {
    "norm": cmd_norm,
    "membership": cmd_membership,
    "apply": cmd_apply,
    "solve": cmd_solve,
    "portrait": cmd_portrait,
    "ergodic": cmd_ergodic,
    "catalog": cmd_catalog,
    "opnorm": cmd_opnorm,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--f", help="function in the expression language, e.g. '1/(1-z)'")
    common.add_argument("--h", help="right-hand side for 'solve'")
    common.add_argument("--gamma", type=float)
    common.add_argument("--lambda", dest="lam", help="spectral parameter, e.g. 0.7+0.3i")
    common.add_argument("--n", type=int, help="mean/power index or section size")
    common.add_argument("--nmax", type=int, help="last coefficient or table index")
    common.add_argument("--grid", default="", help="grid options as key=value,key=value")
    common.add_argument("--sections", help="section sizes, e.g. 128,512,2048")
    common.add_argument("--space", choices=["big", "little"])
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")

    parser = argparse.ArgumentParser(prog="cesaro-lab",
                                     description="Cesàro operator laboratory on growth spaces.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("norm", parents=[common], help="weighted sup norm and boundary profile")
    sub.add_parser("membership", parents=[common], help="verdicts for all four spaces")
    p = sub.add_parser("apply", parents=[common], help="coefficients of C f, C^-1 f, means, powers")
    p.add_argument("--op", choices=["C", "Cinv", "mean", "power"], default="C")
    sub.add_parser("solve", parents=[common], help="solve (lambda I - C) f = h")
    p = sub.add_parser("portrait", parents=[common], help="resolvent probe portrait")
    p.add_argument("--re", help="real range lo:hi (write --re=-1:1 when lo is negative)")
    p.add_argument("--im", help="imaginary range lo:hi")
    p.add_argument("--step", type=float)
    p = sub.add_parser("ergodic", parents=[common], help="power, mean and difference tables")
    p.add_argument("--kind", default="mean_residual",
                   choices=["power_norm", "mean_residual", "mean_norm", "successive_diff"])
    p.add_argument("--ns", help="explicit table indices, e.g. 8,16,32,64")
    sub.add_parser("catalog", parents=[common], help="witness verdict matrix")
    sub.add_parser("opnorm", parents=[common], help="power norm table and norm bound")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        grid = GridOptions.from_pairs(args.grid)
    except KeyError as exc:
        print(f"error: unknown grid option {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: bad --grid: {exc}", file=sys.stderr)
        return 2
    full_meta = _base_meta(args, grid)
    try:
        meta, columns, rows, flagged = COMMANDS[args.command](args, grid)
    except CoefficientBudgetExceeded as exc:
        # budget outcomes still leave a (header-only) artifact behind
        print(f"error: {exc}", file=sys.stderr)
        meta, columns, rows, flagged = {"error": str(exc)}, [], [], True
    except ValueError as exc:
        # syntax, configuration, analytic and precondition errors
        print(f"error: {exc}", file=sys.stderr)
        return 2
    full_meta.update(meta)
    full_meta["flagged"] = flagged
    emit(full_meta, columns, rows, args.format, args.out)
    return 1 if flagged else 0

if __name__ == "__main__":
    sys.exit(main())
