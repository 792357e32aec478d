"""``kmsflow`` command line.

Exit status: 0 success, 1 a residual exceeded its tolerance, 2 bad input.
Output is deterministic for fixed inputs and ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from . import __version__
from .classify import check_condition_C, classify
from .cocycle import bound_scan, cocycle_range, solve_transfer
from .cocycle import c as cocycle_value
from .kms import admissible_beta, affine_beta, derive, pf1_pf2_check
from .markov import MarkovOp, tail_decomposition
from .measure import (
    Bernoulli,
    CylinderTable,
    bernoulli_for,
    extend_to_two_sided,
    m_p_y,
    nu_aperiodic_truncated,
    nu_periodic,
    quasi_invariance_residual,
    toeplitz_truncation,
)
from .serialize import (
    InputError,
    datum_from_json,
    dumps,
    enc_num,
    matrix_from_json,
    measure_from_json,
    measure_to_json,
    params_from_json,
    sequence_from_json,
)
from .symbolic import ToeplitzSeed, periodic, thue_morse, toeplitz_words

DEFAULT_TOL = 1e-12
EXIT_OK, EXIT_RESIDUAL, EXIT_INPUT = 0, 1, 2


# ---------------------------------------------------------------------------
# helpers


def _load_json(arg: str) -> Any:
    """A JSON literal, a file path, or ``-`` for stdin."""
    if arg == "-":
        text = sys.stdin.read()
    elif arg.lstrip().startswith(("{", "[")):
        text = arg
    else:
        try:
            text = Path(arg).read_text()
        except OSError as err:
            raise InputError(f"cannot read {arg}: {err}") from err
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise InputError(f"invalid JSON in {arg}: {err}") from err


def _num(x) -> Any:
    return enc_num(x) if isinstance(x, Fraction) else x


def _mode(*xs) -> str:
    return "exact" if all(isinstance(x, (Fraction, int)) for x in xs) else "float"


def _k_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as err:
        raise InputError(f"bad k list {text!r}") from err


def _params(args) -> Any:
    try:
        return derive(args.d, args.s, args.beta)
    except (ValueError, ZeroDivisionError) as err:
        raise InputError(str(err)) from err


def _flatten(obj: Any, prefix: str = "") -> list[tuple[str, str]]:
    if isinstance(obj, dict):
        out = []
        for k in sorted(obj):
            out.extend(_flatten(obj[k], f"{prefix}.{k}" if prefix else str(k)))
        return out
    if isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        out = []
        for i, v in enumerate(obj):
            out.extend(_flatten(v, f"{prefix}[{i}]"))
        return out
    if isinstance(obj, list):
        return [(prefix, ",".join(json.dumps(v) if not isinstance(v, str) else v for v in obj))]
    return [(prefix, obj if isinstance(obj, str) else json.dumps(obj))]


def _emit(obj: Any, fmt: str, rows: Optional[list[dict]] = None) -> None:
    if fmt == "json":
        sys.stdout.write(dumps(obj))
        return
    if rows:
        cols = list(rows[0])
        sys.stdout.write("\t".join(cols) + "\n")
        for r in rows:
            sys.stdout.write("\t".join(str(_num(r[c])) for c in cols) + "\n")
        return
    for k, v in _flatten(obj):
        sys.stdout.write(f"{k}\t{v}\n")


# ---------------------------------------------------------------------------
# residual evaluation shared by construct and verify


def _residuals(mu, params, depth: int) -> dict:
    out: dict = {"depth": depth}
    one_sided = not getattr(mu, "two_sided", False)
    if isinstance(mu, CylinderTable):
        one_sided = mu.start >= 0
    if one_sided:
        rep = pf1_pf2_check(params, mu, depth)
        out["space"] = "X"
        out["pf1_residual"] = _num(rep.pf1_residual)
        out["pf4_residual"] = _num(rep.pf2_residual)
        out["mode"] = rep.mode
        out["max_residual"] = max(float(rep.pf1_residual), float(rep.pf2_residual))
    else:
        if params.lam is None:
            lam, q, rn = 1, Fraction(1, 2), (1, 1)
            if params.t == 0:
                raise InputError("quasi-invariance needs t >= 1")
        else:
            lam, q, rn = params.lam, params.q, None
        if isinstance(mu, CylinderTable):
            depth = min(depth, mu.depth - 1)
            out["depth"] = depth
            rn = params.rn
        res = quasi_invariance_residual(mu, lam, q, depth, rn=rn)
        out["space"] = "X~"
        out["qi_residual"] = _num(res)
        out["mode"] = _mode(res)
        out["max_residual"] = float(res)
    return out


def _check(report: dict, tol: float) -> dict:
    report["tolerance"] = tol
    report["passed"] = report["max_residual"] <= tol
    return report


# ---------------------------------------------------------------------------
# subcommands


def cmd_range(args) -> int:
    try:
        rng = admissible_beta(args.d, args.s)
    except ValueError as err:
        raise InputError(str(err)) from err
    out = {"d": args.d, "s": args.s, "t": args.d - args.s, **rng.to_json()}
    _emit(out, args.format)
    return EXIT_OK


def cmd_verify(args) -> int:
    doc = _load_json(args.measure)
    tol = args.tol
    if isinstance(doc, dict) and "measure" in doc:
        mu = measure_from_json(doc["measure"])
        pj = doc.get("params")
        if args.tol is None:
            tol = doc.get("tolerance", DEFAULT_TOL)
    else:
        mu = measure_from_json(doc)
        pj = None
    if args.params:
        pj = _load_json(args.params)
    if pj is None:
        raise InputError("no parameters: pass --params or verify a construct output")
    params = params_from_json(pj)
    tol = DEFAULT_TOL if tol is None else tol
    try:
        report = _check(_residuals(mu, params, args.depth), tol)
    except ValueError as err:
        raise InputError(str(err)) from err
    _emit(report, args.format)
    return EXIT_OK if report["passed"] else EXIT_RESIDUAL


def _construct_periodic(args) -> dict:
    y = periodic(args.word)
    nu, params = nu_periodic(y, args.d, args.s)
    return {
        "measure": nu,
        "params": params,
        "extra": {"forced_beta": params.beta.to_json(), "forced_beta_value": params.beta.value},
        "tolerance": DEFAULT_TOL,
    }


def _construct_bernoulli(args) -> dict:
    params = _params(args)
    if params.p is None:
        raise InputError("b_p needs 1 <= t < s")
    if not (0 <= params.p <= 1):
        raise InputError(f"p = {params.p} outside [0, 1]; beta must lie in [log t, log s]")
    return {"measure": bernoulli_for(params), "params": params, "extra": {"p": _num(params.p)}, "tolerance": DEFAULT_TOL}


def _construct_mpy(args) -> dict:
    params = _params(args)
    if params.t != 0:
        raise InputError("m_{p,y} is the s = d family")
    p = params.trace_mass
    if not (0 < p < 1):
        raise InputError("need beta < log d")
    y = periodic(args.y)
    mu = m_p_y(p, y, args.terms)
    return {"measure": mu, "params": params, "extra": {"p": _num(p), "tail_mass": _num(mu.tail_mass)}, "tolerance": DEFAULT_TOL}


def _construct_toeplitz(args) -> dict:
    ks = _k_list(args.k)
    if any(k < 3 for k in ks):
        raise InputError("Toeplitz k(j) must be >= 3")
    if args.n > len(ks):
        ks = ks + [ks[-1]] * (args.n - len(ks))
    params = derive(args.d, args.s, affine_beta(Fraction(1, 2), args.s, args.d - args.s))
    tr = toeplitz_truncation(ks, args.n, params.lam, Fraction(1, 2))
    bound = Fraction(2, args.n) if args.n else None
    extra = {
        "l": tr.length,
        "tv_defect": tr.defect,
        "defect_bound": _num(bound) if bound is not None else None,
        "defect_within_bound": tr.defect_at_most(bound) if bound is not None else None,
    }
    # the truncated orbit is only asymptotically quasi-invariant; its cylinder residual is bounded by the defect
    return {"measure": tr.measure(), "params": params, "extra": extra, "tolerance": tr.defect + DEFAULT_TOL}


def _construct_aperiodic(args) -> dict:
    params = _params(args)
    z = sequence_from_json(_load_json(args.z))
    try:
        nu, defect = nu_aperiodic_truncated(z, params, args.n)
    except ValueError as err:
        raise InputError(str(err)) from err
    return {"measure": nu, "params": params, "extra": {"tv_defect": defect}, "tolerance": defect + DEFAULT_TOL}


def _construct_extension(args) -> dict:
    params = _params(args)
    if params.p is None or not (0 <= params.p <= 1):
        raise InputError("extension of b_p needs 1 <= t < s and beta in [log t, log s]")
    try:
        table = extend_to_two_sided(Bernoulli(params.p), params, args.m, args.n)
    except ValueError as err:
        raise InputError(str(err)) from err
    return {"measure": table, "params": params, "extra": {"left_depth": args.m, "right_depth": args.n}, "tolerance": DEFAULT_TOL}


CONSTRUCTORS = {
    "periodic": _construct_periodic,
    "bernoulli": _construct_bernoulli,
    "m-p-y": _construct_mpy,
    "toeplitz": _construct_toeplitz,
    "aperiodic": _construct_aperiodic,
    "extension": _construct_extension,
}


def cmd_construct(args) -> int:
    try:
        built = CONSTRUCTORS[args.kind](args)
    except ValueError as err:
        if isinstance(err, InputError):
            raise
        raise InputError(str(err)) from err
    mu, params, tol = built["measure"], built["params"], built["tolerance"]
    depth = args.depth
    report = _check(_residuals(mu, params, depth), tol)
    out = {
        "kind": args.kind,
        "measure": measure_to_json(mu),
        "params": params.to_json(),
        "derived": params.derived_json(),
        "tolerance": tol,
        "checks": report,
        **built["extra"],
    }
    _emit(out, args.format)
    return EXIT_OK if report["passed"] else EXIT_RESIDUAL


def cmd_classify(args) -> int:
    datum = datum_from_json(_load_json(args.datum))
    try:
        verdict = classify(datum)
    except ValueError as err:
        raise InputError(str(err)) from err
    _emit(verdict.to_json(), args.format)
    return EXIT_OK


def cmd_tail(args) -> int:
    if args.matrix.endswith(".tsv"):
        try:
            P = MarkovOp.from_tsv(Path(args.matrix).read_text())
        except (OSError, ValueError) as err:
            raise InputError(str(err)) from err
    else:
        P = matrix_from_json(_load_json(args.matrix))
    report = tail_decomposition(P, args.terms)
    _emit(report.to_json(), args.format)
    return EXIT_OK


def _sequence_arg(args):
    if args.thue_morse:
        return thue_morse()
    if args.sequence is None:
        raise InputError("pass --sequence or --thue-morse")
    return sequence_from_json(_load_json(args.sequence))


def _q_arg(text: str):
    try:
        return Fraction(text) if "." not in text and "e" not in text.lower() else float(text)
    except ValueError as err:
        raise InputError(f"bad q {text!r}") from err


def cmd_cocycle(args) -> int:
    z = _sequence_arg(args)
    q = _q_arg(args.q)
    mode = _mode(q)
    if args.action == "values":
        vals = cocycle_range(z, q, args.kmin, args.kmax)
        rows = [{"n": n, "c_n": v} for n, v in zip(range(args.kmin, args.kmax + 1), vals)]
        if mode == "float":
            rows = [{"n": r["n"], "c_n": float(r["c_n"])} for r in rows]
        out = {"mode": mode, "q": _num(q), "values": [{k: _num(v) for k, v in r.items()} for r in rows]}
        _emit(out, args.format, rows)
        return EXIT_OK
    if args.action == "bound":
        lo, hi = bound_scan(z, q, args.window)
        out = {"mode": mode, "q": _num(q), "window": args.window, "min": _num(lo), "max": _num(hi)}
        _emit(out, args.format)
        return EXIT_OK
    if args.action == "condition-c":
        params = _params(args)
        try:
            cert = check_condition_C(z, params, args.window)
        except ValueError as err:
            raise InputError(str(err)) from err
        _emit(cert.to_json(), args.format)
        return EXIT_OK
    # transfer
    samples = [thue_morse(seed=sd) for sd in ((0, 0), (0, 1), (1, 0), (1, 1))] if args.thue_morse else [z]
    try:
        h = solve_transfer(samples, q, args.depth, seed=args.seed)
    except ValueError as err:
        raise InputError(str(err)) from err
    out = {
        "mode": "float",
        "q": _num(q),
        "depth": args.depth,
        "classes": len(h.table),
        "residual": h.residual,
        "lstsq_residual": h.lstsq_residual,
        "checked": h.checked,
        "seed": args.seed,
        "tolerance": args.tol,
        "passed": h.residual <= args.tol,
    }
    _emit(out, args.format)
    return EXIT_OK if out["passed"] else EXIT_RESIDUAL


def cmd_toeplitz(args) -> int:
    ks = _k_list(args.k)
    if not ks or any(k < 3 for k in ks):
        raise InputError("Toeplitz k(j) must be >= 3")
    if len(ks) < args.n:
        ks = ks + [ks[-1]] * (args.n - len(ks))
    lam = Fraction(args.t, args.s)
    if not (0 < lam < 1):
        raise InputError("need 0 < t < s")
    z = ToeplitzSeed(tuple(ks), depth=args.n)
    rows, ok = [], True
    prod = 1
    for n in range(1, args.n + 1):
        a, b, length = toeplitz_words(ks, n)
        prod *= ks[n - 1] - 2
        half = Fraction(prod, 2)
        sa, sb = sum(a), sum(b)
        c_l = cocycle_value(z, length, Fraction(1, 2)).value
        c_2l = cocycle_value(z, 2 * length, Fraction(1, 2)).value
        tr = toeplitz_truncation(ks, n, lam)
        within = tr.defect_at_most(Fraction(2, n))
        row = {
            "n": n,
            "l": length,
            "sum_a": sa,
            "sum_b": sb,
            "sum_a_expected": Fraction(length, 2) + half,
            "sum_b_expected": Fraction(length, 2) - half,
            "c_l": c_l,
            "c_l_expected": half,
            "c_2l": c_2l,
            "tv_defect": tr.defect,
            "defect_le_2_over_n": within,
        }
        row_ok = sa == row["sum_a_expected"] and sb == row["sum_b_expected"] and c_l == half and c_2l == 0 and within
        row["ok"] = row_ok
        ok &= row_ok
        rows.append(row)
    out = {"mode": "exact", "k": ks[: args.n], "lambda": _num(lam), "rows": [{k: _num(v) for k, v in r.items()} for r in rows], "all_ok": ok}
    _emit(out, args.format, rows)
    return EXIT_OK if ok else EXIT_RESIDUAL


# ---------------------------------------------------------------------------
# parser


def _add_params(p: argparse.ArgumentParser, beta_required: bool = True) -> None:
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--beta", required=beta_required, help='e.g. "log(3/2)", "affine(1/2)", 0.4')


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kmsflow", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "tsv"), default="json")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("range", parents=[common], help="admissible temperatures for (d, s)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.set_defaults(func=cmd_range)

    p = sub.add_parser("verify", parents=[common], help="PF / quasi-invariance residuals of a measure")
    p.add_argument("measure", help="measure JSON, construct output, literal JSON or -")
    p.add_argument("--params", help="params JSON (optional for construct outputs)")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("construct", parents=[common], help="build one of the explicit measures")
    p.add_argument("kind", choices=sorted(CONSTRUCTORS))
    p.add_argument("--word", default="01", help="period of y (periodic)")
    p.add_argument("--y", default="1", help="period of y in C_1 (m-p-y)")
    p.add_argument("--z", help="sequence JSON (aperiodic)")
    p.add_argument("--k", default="3", help="comma-separated k(j) (toeplitz)")
    p.add_argument("--n", type=int, default=2, help="truncation level (toeplitz, aperiodic) or right depth (extension)")
    p.add_argument("--m", type=int, default=3, help="left depth (extension)")
    p.add_argument("--terms", type=int, default=64, help="series terms (m-p-y)")
    p.add_argument("--depth", type=int, default=6, help="cylinder depth of the self-check")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--beta", default=None)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("classify", parents=[common], help="factor type and reduced flow")
    p.add_argument("datum", help="datum JSON, literal JSON or -")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("tail", parents=[common], help="tail boundary of a Markov matrix")
    p.add_argument("matrix", help="matrix JSON / .tsv file, literal JSON or -")
    p.add_argument("--terms", type=int, default=3, help="terms of each harmonic sequence to print")
    p.set_defaults(func=cmd_tail)

    p = sub.add_parser("cocycle", parents=[common], help="cocycle values, bounds, condition (C), transfer functions")
    p.add_argument("action", choices=("values", "bound", "condition-c", "transfer"))
    p.add_argument("--sequence", help="sequence JSON")
    p.add_argument("--thue-morse", action="store_true")
    p.add_argument("--q", default="1/2")
    p.add_argument("--kmin", type=int, default=-8)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--window", type=int, default=1024)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--beta", default="affine(1/2)")
    p.set_defaults(func=cmd_cocycle)

    p = sub.add_parser("toeplitz", parents=[common], help="Toeplitz word identities and defects")
    p.add_argument("--k", default="3")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--t", type=int, default=1)
    p.set_defaults(func=cmd_toeplitz)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "command", None) == "construct" and args.beta is None:
        args.beta = {"bernoulli": "log(3/2)", "m-p-y": "log(3/2)", "extension": "log(3/2)"}.get(args.kind, "affine(1/2)")
    try:
        return args.func(args)
    except InputError as err:
        sys.stderr.write(f"kmsflow: input error: {err}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
