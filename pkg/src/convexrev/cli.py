"""Command-line harness: generate bodies, project them, fit minimal
ellipsoids, canonicalize, test equivalence, detect revolution axes, scan
projection fields, and replay the lemma suites.

Exit codes: 0 all checks pass, 1 any check fails, 2 usage or I/O error.
"""

import argparse
import json
import sys

import numpy as np

from .bodies import ConvexBody, GeometryError, Line, Subspace
from .equivalence import affine_equivalent, linear_equivalent
from .generators import gen_body, parse_descriptor
from .mvee import canonicalize, mvee_of_body
from .ops import project_along
from .report import canonical_json, emit_report, emit_svg
from .revolution import affine_revolution_axis, revolution_axis
from .scan import scan_projection_field
from .verify import LEMMA_IDS, summarize, verify

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _load_body(path):
    try:
        return ConvexBody.load(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise IOError(f"cannot read body from {path}: {exc}") from exc


def _parse_vector(text):
    return np.array([float(x) for x in text.split(",")], dtype=float)


def _write(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args):
    body = gen_body(parse_descriptor(args.spec), seed=args.seed)
    text = canonical_json(body.to_json_dict())
    _write(text, args.out)
    return EXIT_OK


def cmd_project(args):
    body = _load_body(args.body)
    direction = _parse_vector(args.direction)
    shadow, _frame = project_along(body, direction)
    if shadow.representation == "support-sample" and shadow.oracle is not None:
        from .ops import to_point_cloud

        shadow = to_point_cloud(shadow, ndirs=128 * shadow.dim)
    _write(canonical_json(shadow.to_json_dict()), args.out)
    if args.svg:
        if shadow.dim != 2:
            raise GeometryError("SVG rendering needs a 2-d shadow")
        emit_svg(shadow, path=args.svg)
    return EXIT_OK


def cmd_mvee(args):
    body = _load_body(args.body)
    result = mvee_of_body(body, eps=args.eps,
                          centered=args.centered or None)
    _write(canonical_json(result.to_json_dict()), args.out)
    return EXIT_OK


def cmd_canon(args):
    body = _load_body(args.body)
    image, fmap, result = canonicalize(body)
    if image.representation == "support-sample" and image.oracle is not None:
        from .ops import to_point_cloud

        image = to_point_cloud(image, ndirs=128 * image.dim)
    payload = {"body": image.to_json_dict(), "map": fmap.to_json_dict(),
               "mvee": result.to_json_dict()}
    _write(canonical_json(payload), args.out)
    return EXIT_OK


def cmd_equiv(args):
    body1 = _load_body(args.body1)
    body2 = _load_body(args.body2)
    func = affine_equivalent if args.mode == "affine" else linear_equivalent
    verdict = func(body1, body2, tol=args.tol, restarts=args.restarts, seed=args.seed)
    _write(canonical_json(verdict.to_json_dict()), args.out)
    return EXIT_OK


def cmd_axis(args):
    body = _load_body(args.body)
    func = affine_revolution_axis if args.affine else revolution_axis
    cert = func(body, accept_tol=args.tol, seed=args.seed)
    payload = {"certificate": None} if cert is None else {"certificate": cert.to_json_dict()}
    _write(canonical_json(payload), args.out)
    return EXIT_OK


def cmd_scan(args):
    if args.body:
        body = _load_body(args.body)
        body_id = args.body
    else:
        body = gen_body(parse_descriptor(args.spec), seed=args.seed)
        body_id = args.spec
    directions = None
    if args.directions:
        directions = np.array([_parse_vector(part) for part in args.directions.split(";")])
        directions /= np.linalg.norm(directions, axis=1)[:, None]
    report = scan_projection_field(body, m=args.dirs, seed=args.seed,
                                   directions=directions, body_id=body_id,
                                   ellipsoid_tol=args.tol)
    _write(emit_report(report, fmt=args.format), args.out)
    return EXIT_OK


def cmd_verify(args):
    records = verify(args.lemma, trials=args.trials, dim=args.dim,
                     seed=args.seed, tol=args.tol)
    text = emit_report(records, fmt=args.format, include_runtime=args.include_runtime)
    _write(text, args.out)
    summary = summarize(records)
    line = (f"{args.lemma}: {summary['passed']}/{summary['trials']} passed, "
            f"{summary['failed']} failed, {summary['skipped']} skipped")
    print(line, file=sys.stderr)
    if summary["skipped_fraction"] > 0.05:
        print("error: skipped fraction exceeds 5%", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK if summary["ok"] else EXIT_FAIL


def cmd_report(args):
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise IOError(f"cannot read {args.input}: {exc}") from exc
    if args.svg_body:
        body = _load_body(args.svg_body)
        emit_svg(body, path=args.out or "body.svg")
        return EXIT_OK
    text = emit_report(payload, fmt=args.format)
    _write(text, args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="convexrev",
        description="Convex-body shadow toolkit: minimal ellipsoids, equivalence, "
                    "bodies of revolution, and randomized lemma checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a body from a descriptor")
    p.add_argument("--spec", required=True,
                   help="descriptor: kind:dim shorthand or JSON object")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("project", help="orthogonal shadow along a direction")
    p.add_argument("--body", required=True)
    p.add_argument("--direction", required=True, help="comma-separated vector")
    p.add_argument("--out", default=None)
    p.add_argument("--svg", default=None, help="also render the 2-d shadow")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("mvee", help="minimum-volume enclosing ellipsoid")
    p.add_argument("--body", required=True)
    p.add_argument("--eps", type=float, default=1e-7)
    p.add_argument("--centered", action="store_true",
                   help="force the symmetric (centered) fit")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_mvee)

    p = sub.add_parser("canon", help="canonicalize: map the MVEE to the unit ball")
    p.add_argument("--body", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_canon)

    p = sub.add_parser("equiv", help="linear/affine equivalence of two bodies")
    p.add_argument("--body1", required=True)
    p.add_argument("--body2", required=True)
    p.add_argument("--mode", choices=("linear", "affine"), default="linear")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("axis", help="detect a (possibly affine) revolution axis")
    p.add_argument("--body", required=True)
    p.add_argument("--affine", action="store_true")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_axis)

    p = sub.add_parser("scan", help="projection-field scan of a symmetric body")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--body")
    src.add_argument("--spec")
    p.add_argument("--dirs", type=int, default=6, help="number of scan directions")
    p.add_argument("--directions", default=None,
                   help="explicit directions 'x,y,z;x,y,z' overriding --dirs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", help="run a lemma property suite")
    p.add_argument("--lemma", required=True, choices=LEMMA_IDS)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--include-runtime", action="store_true",
                   help="include per-trial runtimes (breaks byte determinism)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="reserialize a JSON report (json/csv/svg)")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--svg-body", default=None,
                   help="render this 2-d body file instead of converting")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
