"""Command-line batch driver.

Every command emits a header and a list of flat records, one per level ``N``
(or per ``k`` for ``exclusions``), as JSON or CSV::

    fuzzysphere quantize --ns 1,2,4,8
    fuzzysphere scan-dirac --ns 8,16,32,64 --format csv
    fuzzysphere certify --ns 4-24 --perturb-eps 0.05 --seed 7
    fuzzysphere exclusions --ns 2-40 --c 0.5

``--ns`` accepts comma separated integers and inclusive ranges ``a-b``.
Exit status is 0 on success, 2 on a usage error and 1 when any record is
flagged as a numerical failure (``failed == 1``).
"""
import argparse
import csv
import io
import json
import math
import sys
import warnings

import numpy as np

from . import __version__
from ._validation import PreconditionError
from .certify import certify_step, excluded_points, fit_steps, interleaves
from .linalg import operator_norm
from .sphere import coordinates, random_function
from .toeplitz import ScanGrid, dirac_residual, get_config, loglog_slope, toeplitz_op

STATUS_CODES = {"unique": 0, "multiple": 1, "inconclusive": 2, "violation": 3}


class UsageError(Exception):
    pass


def parse_ns(text):
    """``"1,3,5-8"`` -> ``[1, 3, 5, 6, 7, 8]``."""
    out = []
    for token in filter(None, (t.strip() for t in text.split(","))):
        lo, sep, hi = token.partition("-")
        try:
            out.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
        except ValueError:
            raise UsageError(f"bad --ns entry {token!r}") from None
    return out


def _num(x):
    """Canonical number: ints stay ints, floats go through 17 significant digits."""
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(format(x, ".17g"))


def _text(x):
    if x is None:
        return ""
    return str(x) if isinstance(x, int) else format(x, ".17g")


def emit_json(header, records):
    body = {"header": header, "records": [{k: _num(v) for k, v in r.items()} for r in records]}
    return json.dumps(body, indent=1, allow_nan=False) + "\n"


def emit_csv(header, records):
    buf = io.StringIO()
    if records:
        keys = list(records[0])
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(keys)
        for r in records:
            writer.writerow([_text(_num(r.get(k))) for k in keys])
    return buf.getvalue()


def _record(N, **metrics):
    return {"N": N, "hbar": 2.0 / N, **metrics}


# -- commands -----------------------------------------------------------------


def cmd_quantize(args, warn):
    records = []
    x = coordinates()
    f_rand = random_function(min(3, args.band), np.random.default_rng(args.seed))
    cases = {"x3": x[2], "x1x2": x[0] * x[1], "random": f_rand}
    sups = {name: f.sup_norm() for name, f in cases.items()}
    for N in args.ns:
        cfg = get_config(N, max(args.band, 3))
        T = [toeplitz_op(cfg, xi) for xi in x]
        coord = max(operator_norm(Ti - 2 / (N + 2) * Ji) for Ti, Ji in zip(T, cfg.spin))
        casimir = operator_norm(sum(Ti @ Ti for Ti in T) - N / (N + 2) * np.eye(N + 1))
        rec = _record(N, coord_residual=coord, casimir_residual=casimir)
        for name, f in cases.items():
            rec[f"norm_{name}"] = operator_norm(toeplitz_op(cfg, f))
            rec[f"sup_{name}"] = sups[name]
        rec["failed"] = int(not (coord < args.tol and casimir < args.tol))
        records.append(rec)
    return records


def cmd_scan_dirac(args, warn):
    x1, x2, _ = coordinates()
    records = []
    for N in args.ns:
        cfg = get_config(N, args.band)
        closed = 4.0 / (N + 2) ** 2
        res = dirac_residual(cfg, x1, x2)
        rel = abs(res - closed) / closed
        records.append(
            _record(
                N,
                residual=res,
                closed_form=closed,
                rel_error=rel,
                residual_same=dirac_residual(cfg, x1, x1),
                slope=None,
                failed=int(not rel < args.tol),
            )
        )
    if len(records) >= 3:
        slope = loglog_slope([r["hbar"] for r in records], [r["residual"] for r in records])
        for r in records:
            r["slope"] = slope
    else:
        warn("slope omitted: fewer than 3 scan points")
    return records


def cmd_certify(args, warn):
    scan = ScanGrid(tuple(args.ns), args.band)
    records, steps = [], []
    for cfg in scan:
        rec = _record(cfg.N)
        try:
            step = certify_step(cfg, args.perturb_eps, args.seed, args.squash_rounds, args.band)
        except (PreconditionError, np.linalg.LinAlgError, ArithmeticError) as exc:
            warn(f"N={cfg.N}: {type(exc).__name__}: {exc}")
            rec["error"] = 1
            records.append((rec, None))
            continue
        cert = step.certificate
        spreads = step.spreads or [(float("nan"), float("nan"))]
        rec.update(
            error=0,
            alpha=cert.alpha,
            beta=cert.beta,
            width=step.width,
            k=cert.k,
            unique=int(cert.unique),
            status=STATUS_CODES[cert.status],
            relation_residual=max(cert.relation_residuals.values()),
            spec_union_margin=cert.spec_union_margin,
            idempotency=step.idempotency,
            spread_before=spreads[0][0],
            spread_after=spreads[-1][1],
        )
        steps.append(step)
        records.append((rec, step))

    theta = distances = None
    if len(steps) >= 2:
        theta, _, distances = fit_steps(steps)
    distance_of = dict(zip((s.N for s in steps), distances if distances is not None else []))
    coeffs = tuple(theta.tail) + (None,) * 3 if theta else (None,) * 3

    out = []
    for rec, step in records:
        full = {
            "N": rec["N"], "hbar": rec["hbar"], "error": rec["error"],
            "alpha": None, "beta": None, "width": None, "k": None, "unique": 0,
            "status": None, "relation_residual": None, "spec_union_margin": None,
            "idempotency": None, "spread_before": None, "spread_after": None,
        }
        full.update(rec)
        full.update(theta_c0=coeffs[0], theta_c1=coeffs[1], theta_c2=coeffs[2])
        full["distance"] = distance_of.get(rec["N"])
        full["failed"] = int(bool(full["error"]) or full["status"] == STATUS_CODES["violation"])
        out.append(full)
    return out


def cmd_exclusions(args, warn):
    ks = [k for k in args.ns if k - args.c + 0.5 > 0]
    if len(ks) < len(args.ns):
        warn("dropped k values with k - c + 1/2 <= 0")
    if not ks:
        return []
    c = args.c
    excluded = excluded_points(c, ks)
    naive = {2.0 / N for N in args.ns if N > 0}
    allowed_ks = [k for k in ks if k - c > 0]
    allowed = 2.0 / (np.array(allowed_ks, dtype=float) - c)
    alternate = interleaves(excluded, allowed)
    records = []
    for k, h in zip(ks, excluded):
        theta = 2.0 / h + c
        records.append(
            dict(N=k, hbar=h, excluded=1, theta=theta,
                    distance=abs(theta - round(theta)),
                    collision=int(any(abs(h - g) <= 1e-15 * g for g in naive)),
                    interleaved=int(alternate))
        )
    for k, h in zip(allowed_ks, allowed):
        theta = 2.0 / h + c
        records.append(
            dict(N=k, hbar=h, excluded=0, theta=theta,
                    distance=abs(theta - round(theta)), collision=0,
                    interleaved=int(alternate))
        )
    records.sort(key=lambda r: (r["N"], -r["excluded"]))
    for r in records:
        r["failed"] = 0
    return records


COMMANDS = {
    "quantize": (cmd_quantize, 1e-10),
    "scan-dirac": (cmd_scan_dirac, 1e-12),
    "certify": (cmd_certify, 1e-9),
    "exclusions": (cmd_exclusions, 0.0),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="fuzzysphere", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--ns", type=str, default="", help="levels N (k for exclusions), e.g. 2,4,8 or 2-40")
        p.add_argument("--band", type=int, default=4, help="band limit L (>= 1)")
        p.add_argument("--tol", type=float, default=None, help="failure threshold for residuals")
        p.add_argument("--perturb-eps", type=float, default=0.0)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--squash-rounds", type=int, default=2)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--c", type=float, default=1.0, help="constant term of theta (exclusions)")
    return parser


def validate(args):
    args.ns = parse_ns(args.ns)
    if args.tol is None:
        args.tol = COMMANDS[args.command][1]
    if args.command != "exclusions":
        if not args.ns:
            raise UsageError("--ns must list at least one N")
        if args.ns[0] < 1 or any(b <= a for a, b in zip(args.ns, args.ns[1:])):
            raise UsageError("--ns must be strictly increasing positive integers")
    if args.band < 1:
        raise UsageError("--band must be >= 1")
    if args.perturb_eps < 0:
        raise UsageError("--perturb-eps must be >= 0")
    if args.squash_rounds < 0:
        raise UsageError("--squash-rounds must be >= 0")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    return args


def run(argv=None):
    """Parse ``argv`` and return ``(exit_code, text, out_path)`` without writing anything."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = validate(args)
    except UsageError as exc:
        parser.error(str(exc))
    notes = []
    func = COMMANDS[args.command][0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        records = func(args, notes.append)
    records.sort(key=lambda r: r["N"])
    header = {
        "command": args.command,
        "config": {
            "ns": args.ns, "band": args.band, "tol": args.tol,
            "perturb_eps": args.perturb_eps, "squash_rounds": args.squash_rounds,
            "c": args.c, "format": args.format,
        },
        "seed": args.seed,
        "version": __version__,
        "warnings": notes,
    }
    emit = emit_json if args.format == "json" else emit_csv
    code = 1 if any(r.get("failed") for r in records) else 0
    return code, emit(header, records), args.out


def main(argv=None):
    code, text, out = run(argv)
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
