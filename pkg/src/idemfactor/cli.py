"""``idemfactor`` command line.

stdout carries exactly one JSON document; diagnostics go to stderr.
Exit codes: 0 when the requested property is established (or the report was
produced), 1 when the computation ran and the property fails, 2 on bad input.

Matrix arguments are a path to a JSON file, ``-`` for stdin, or inline JSON.
Either ``{"field": "Q", "rows": [[...]]}`` or a bare list of rows, read over
the field given by ``--field`` (default Q).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .certificate import FactorizationCertificate, verify_certificate
from .consistency import check_consistency
from .decomposition import block_rep, extend_to_complement, local_block_rep, orthogonal_complement
from .douglas import douglas_solve, kernel_report
from .errors import IdemFactorError, NoRecipeApplies, NotApplicable, RangeNotContained
from .factorize import (
    auto_factor,
    embed_family,
    factor_embed,
    factor_idempotent_block,
    factor_invertible_pair,
    factor_kernel_shift,
    factor_kernel_shift_idempotent,
    factor_range_swallow,
    factor_range_swallow_mirror,
    idempotent_block_family,
    invertible_pair_family,
    kernel_shift_family,
    kernel_shift_idempotent_family,
)
from .fields import get_field
from .idempotent import classify_idempotent, is_idempotent
from .index_search import build_atlas
from .matrix import Matrix
from .opcheck import PRESETS, StructuredOperator, membership_report

METHODS = (
    "auto",
    "range_swallow",
    "range_swallow_mirror",
    "embed",
    "kernel_shift",
    "kernel_shift_idempotent",
    "idempotent_block",
    "idempotent_block_prime",
    "invertible_pair",
)


class InputError(Exception):
    pass


def _read_json(arg: str):
    text = arg
    try:
        if arg == "-":
            text = sys.stdin.read()
        elif not arg.lstrip().startswith(("[", "{")):
            with open(arg, encoding="utf-8") as fh:
                text = fh.read()
        return json.loads(text)
    except OSError as exc:
        raise InputError(f"cannot read {arg}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {arg}: {exc}") from exc


def load_matrix(arg: str, field_name: str | None = None) -> Matrix:
    obj = _read_json(arg)
    try:
        if isinstance(obj, list):
            field = get_field(field_name or "Q")
            return Matrix([[field.from_json(x) for x in row] for row in obj], field)
        if isinstance(obj, dict) and "rows" in obj:
            if field_name is not None and "field" not in obj:
                obj = {**obj, "field": field_name}
            return Matrix.from_json(obj)
    except (ValueError, TypeError, IdemFactorError) as exc:
        raise InputError(f"bad matrix in {arg}: {exc}") from exc
    raise InputError(f"{arg} does not describe a matrix")


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, ensure_ascii=False))
    sys.stdout.write("\n")


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    raw = os.environ.get("IDEMFACTOR_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError as exc:
        raise InputError(f"IDEMFACTOR_THREADS={raw!r} is not an integer") from exc


# -- commands --------------------------------------------------------------


def cmd_blockrep(args) -> int:
    T = load_matrix(args.input, args.field)
    K = load_matrix(args.K, args.field) if args.K else None
    if args.local:
        d, b = local_block_rep(T, K)
    else:
        if K is None:
            raise InputError("--K is required unless --local is given")
        d = orthogonal_complement(K) if args.orthogonal else extend_to_complement(K, T.nrows)
        b = block_rep(T, d)
    out = b.to_json()
    if is_idempotent(T):
        cls = classify_idempotent(b)
        out["idempotent_class"] = {"finest": cls.tag.value, "tags": sorted(t.value for t in cls.tags)}
    _emit(out)
    return 0


def _local(T: Matrix, K: Matrix | None):
    d, b = local_block_rep(T, K)
    return b


def _mirror_rep(T: Matrix, K: Matrix | None):
    # Put R(T) into the second summand so the top block row vanishes.
    d, _ = local_block_rep(T, K)
    return block_rep(T, d.swapped())


def cmd_factor(args) -> int:
    T = load_matrix(args.input, args.field)
    K = load_matrix(args.K, args.field) if args.K else None
    opt = {name: load_matrix(getattr(args, name), args.field) if getattr(args, name) else None
           for name in ("V", "C", "D", "J")}
    m, seed, tol = args.samples, args.seed, args.tol
    if m < 1:
        raise InputError("--samples must be positive")
    method = args.method
    try:
        if method == "auto":
            certs = [auto_factor(T, seed, tol)]
        elif method == "range_swallow":
            certs = [factor_range_swallow(_local(T, K), tol)]
        elif method == "range_swallow_mirror":
            certs = [factor_range_swallow_mirror(_mirror_rep(T, K), tol)]
        elif method == "embed":
            b = _local(T, K)
            certs = [factor_embed(b, opt["J"], tol)] if m == 1 or opt["J"] else embed_family(b, m, seed, tol)
        elif method == "kernel_shift":
            b = _local(T, K)
            if opt["V"] is not None or m == 1:
                certs = [factor_kernel_shift(b, opt["V"], seed, tol)]
            else:
                certs = kernel_shift_family(b, m, seed, tol)
        elif method == "kernel_shift_idempotent":
            b = _local(T, K)
            if opt["V"] is not None or m == 1:
                certs = [factor_kernel_shift_idempotent(b, opt["V"], opt["C"], seed, tol)]
            else:
                certs = kernel_shift_idempotent_family(b, m, opt["C"], seed, tol)
        elif method in ("idempotent_block", "idempotent_block_prime"):
            b = _local(T, K)
            variant = "E1" if method == "idempotent_block" else "E1prime"
            if opt["D"] is not None or m == 1:
                certs = [factor_idempotent_block(b, opt["D"], seed, variant, tol)]
            else:
                certs = idempotent_block_family(b, m, seed, variant, tol)
        else:
            if opt["C"] is None or opt["D"] is None:
                raise InputError("invertible_pair needs --C and --D")
            b = _local(T, K)
            certs = invertible_pair_family(b, opt["C"], opt["D"], m, seed, tol)
    except NoRecipeApplies as exc:
        _note(f"no recipe applies: {exc}")
        _emit({
            "error": "NoRecipeApplies",
            "reasons": list(exc.reasons),
            "annihilators": None if exc.report is None else exc.report.to_json(),
        })
        return 1
    except NotApplicable as exc:
        _note(f"{method} does not apply: {exc}")
        _emit({"error": type(exc).__name__, "reasons": list(exc.reasons or [str(exc)])})
        return 1
    if len(certs) == 1:
        _emit(certs[0].to_json())
    else:
        _emit({"certificates": [c.to_json() for c in certs]})
    _note(f"{len(certs)} certificate(s), recipe {certs[0].recipe}")
    return 0


def cmd_verify(args) -> int:
    obj = _read_json(args.cert)
    try:
        cert = FactorizationCertificate.from_json(obj)
    except (KeyError, TypeError, ValueError, IdemFactorError) as exc:
        raise InputError(f"bad certificate: {exc}") from exc
    report = verify_certificate(cert, args.tol)
    _emit(report.to_json())
    for f in report.failures:
        _note(f)
    return 0 if report.ok else 1


def cmd_consistency(args) -> int:
    mats = [load_matrix(getattr(args, n), args.field) for n in ("T1", "T2", "B", "C", "D")]
    rep = check_consistency(*mats, tol=args.tol)
    out = rep.to_json()
    cert = rep.certificate()
    out["certificate"] = None if cert is None else cert.to_json()
    _emit(out)
    return 0 if cert is not None else 1


def cmd_douglas(args) -> int:
    U = load_matrix(args.U, args.field)
    V = load_matrix(args.V, args.field)
    try:
        W0 = douglas_solve(U, V)
    except RangeNotContained as exc:
        _note(str(exc))
        _emit({"error": "RangeNotContained", "range_included": False})
        return 1
    _emit({"range_included": True, "W0": W0.to_json(), "kernel": kernel_report(U, V, W0).to_json()})
    return 0


def cmd_index(args) -> int:
    field = get_field(args.field)
    p = getattr(field, "p", None)
    if p is None:
        raise InputError("index search needs a finite field (gf2, gf3, gf5)")
    if not args.all and not args.matrix:
        raise InputError("give --matrix or --all")
    atlas = build_atlas(args.n, p, args.tmax, _threads(args))
    if args.all:
        _emit(atlas.to_json())
        return 0
    T = load_matrix(args.matrix, field.name)
    if T.field is not field or T.shape != (args.n, args.n):
        raise InputError(f"matrix must be {args.n}x{args.n} over {field.name}")
    idx = atlas.index_of(T)
    w = atlas.witness(T)
    _emit({
        "matrix": T.to_json(),
        "index": "inf" if idx == math.inf else idx,
        "witness": None if w is None else [q.to_json() for q in w],
        "closed": atlas.closed,
    })
    return 0 if isinstance(idx, int) else 1


def cmd_opcheck(args) -> int:
    if args.op in PRESETS:
        op = PRESETS[args.op]()
    else:
        obj = _read_json(args.op)
        try:
            op = StructuredOperator.from_json(obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad operator description: {exc}") from exc
    _emit({"operator": op.to_json(), **membership_report(op).to_json()})
    return 0


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="idemfactor", description="Idempotent factorization toolkit")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $IDEMFACTOR_THREADS or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--field", default=None, help="field for bare-list matrices: Q, F64, GF2, GF3, GF5")
        p.add_argument("--tol", type=float, default=1e-9, help="float tolerance (ignored over exact fields)")

    p = sub.add_parser("blockrep", help="block representation relative to K (+) L")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--K", help="basis of K as matrix columns")
    p.add_argument("--orthogonal", action="store_true", help="use the orthogonal complement of K")
    p.add_argument("--local", action="store_true", help="local form with K = R(T) unless --K is given")
    p.set_defaults(func=cmd_blockrep)

    p = sub.add_parser("factor", help="factor T into idempotents")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--samples", type=int, default=1, help="number of distinct certificates for sampled recipes")
    p.add_argument("--seed", type=int, default=0, help="sampler seed (default 0)")
    p.add_argument("--K", help="basis of K containing R(T)")
    p.add_argument("--V", help="kernel-shift parameter")
    p.add_argument("--C", help="parameter C")
    p.add_argument("--D", help="parameter D")
    p.add_argument("--J", help="embedding J for the embed recipe")
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("verify", help="re-check a certificate")
    p.add_argument("--cert", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("consistency", help="evaluate the peeling equations for (T1, T2, B, C, D)")
    common(p)
    for name in ("T1", "T2", "B", "C", "D"):
        p.add_argument(f"--{name}", required=True)
    p.set_defaults(func=cmd_consistency)

    p = sub.add_parser("douglas", help="solve U = V W with N(W) = N(U)")
    common(p)
    p.add_argument("--U", required=True)
    p.add_argument("--V", required=True)
    p.set_defaults(func=cmd_douglas)

    p = sub.add_parser("index", help="idempotent index over GF(p)")
    p.add_argument("--field", required=True, help="gf2, gf3 or gf5")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--matrix")
    p.add_argument("--all", action="store_true", help="emit the layer histogram")
    p.add_argument("--tmax", type=int, default=None, help="stop after this many layers")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("opcheck", help="annihilator and membership report for a structured l2 operator")
    p.add_argument("--op", required=True, help="right-shift, left-shift, diag-harmonic or a JSON description")
    p.set_defaults(func=cmd_opcheck)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is not None and args.threads < 1:
        _note("--threads must be positive")
        return 2
    try:
        return args.func(args)
    except InputError as exc:
        _note(f"input error: {exc}")
        return 2
    except IdemFactorError as exc:
        _note(f"input error: {type(exc).__name__}: {exc}")
        return 2
    except ValueError as exc:
        _note(f"input error: {exc}")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
