"""Command-line front end: ``loopline wind|alex|wheels|invert|integrate|check``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from loopline import diagrams
from loopline.algebra import det_laurent, invert_ratfunc_matrix, matrix_at, normalize_alexander, signature_at_1
from loopline.checks import run_all
from loopline.errors import InputError, LooplineError, NotSpecial, PreconditionError
from loopline.integration import surgery_assemble
from loopline.presentation import parse_presentation, validate_special, winding_matrix
from loopline.serialize import (
    loop_expansion_to_json,
    poly_to_json,
    rational_to_json,
    ratfunc_to_json,
    load_r_file,
)
from loopline.series import wh_prime_coeffs

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_CHECK = 0, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    r_file: str | None = None
    order: int = 2
    n: int = 1
    loops: int = 2
    format: str = "text"
    max_vertices: int = diagrams.DEFAULT_MAX_VERTICES
    jobs: int = 1
    seed: int = 0
    trials: int = 50


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loopline", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--max-vertices", type=_positive, default=diagrams.DEFAULT_MAX_VERTICES,
                        help="canonicalisation size cap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wind", parents=[common], help="winding matrix, W(1), signature, specialness")
    p.add_argument("file")
    p = sub.add_parser("alex", parents=[common], help="normalised Alexander polynomial and raw det W")
    p.add_argument("file")
    p = sub.add_parser("wheels", parents=[common], help="wheel coefficients c_2m of Wh(M,K)")
    p.add_argument("file")
    p.add_argument("--order", type=_nonneg, default=4, help="largest wheel size 2m")
    p = sub.add_parser("invert", parents=[common], help="W^-1 as adjugate over det")
    p.add_argument("file")
    p = sub.add_parser("integrate", parents=[common], help="wheels line plus loop terms of a remainder R")
    p.add_argument("file")
    p.add_argument("rfile", nargs="?", help="JSON file with the remainder R")
    p.add_argument("--order", type=_nonneg, default=4, help="largest wheel size 2m")
    p.add_argument("--n", type=_positive, default=1, help="LMO degree for the sign bookkeeping")
    p.add_argument("--loops", type=_nonneg, default=2, help="largest loop degree i reported")
    p = sub.add_parser("check", parents=[common], help="run the randomised property suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=_positive, default=50)
    p.add_argument("--jobs", type=_positive, default=1)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command, format=args.format, max_vertices=args.max_vertices)
    if hasattr(args, "file"):
        cfg.inputs = [args.file]
    for name in ("order", "n", "loops", "seed", "trials", "jobs"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    cfg.r_file = getattr(args, "rfile", None)
    return cfg


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    return parse_presentation(text)


def _fmt_matrix(m, fmt=lambda x: x.format()) -> str:
    return "\n".join("  [" + ", ".join(fmt(x) for x in row) + "]" for row in m)


def _fmt_rational_matrix(m) -> str:
    return _fmt_matrix(m, lambda x: str(x))


def cmd_wind(cfg: RunConfig, out) -> int:
    p = _load(cfg.inputs[0])
    w = winding_matrix(p)
    report = validate_special(p)
    try:
        sigma = signature_at_1(w)
    except PreconditionError:
        sigma = None
    if cfg.format == "json":
        json.dump(
            {
                "W": [[poly_to_json(x) for x in row] for row in w],
                "W1": [[rational_to_json(x) for x in row] for row in matrix_at(w, 1)],
                "sigma": None if sigma is None else {"plus": sigma[0], "minus": sigma[1]},
                "special": {
                    "netPassages": list(report.net_passages),
                    "linking": [[rational_to_json(x) for x in row] for row in report.linking],
                    "detLk": rational_to_json(report.det_lk),
                    "isSpecial": report.is_special,
                },
            },
            out,
            indent=2,
        )
        out.write("\n")
    else:
        out.write(f"mu = {p.mu}\nW(t) =\n{_fmt_matrix(w)}\n")
        out.write(f"W(1) =\n{_fmt_rational_matrix(matrix_at(w, 1))}\n")
        if sigma is None:
            out.write("sigma: W(1) is singular\n")
        else:
            out.write(f"sigma+ = {sigma[0]}, sigma- = {sigma[1]}\n")
        out.write(
            f"net passages = {list(report.net_passages)}, det lk = {report.det_lk}, "
            f"special = {'yes' if report.is_special else 'no'}\n"
        )
    if not report.is_special:
        raise NotSpecial("presentation is not special", report)
    return EXIT_OK


def _special_w(cfg: RunConfig):
    p = _load(cfg.inputs[0])
    report = validate_special(p)
    if not report.is_special:
        raise NotSpecial(
            f"presentation is not special (net passages {list(report.net_passages)}, det lk {report.det_lk})",
            report,
        )
    return winding_matrix(p)


def cmd_alex(cfg: RunConfig, out) -> int:
    w = _special_w(cfg)
    det = det_laurent(w)
    a = normalize_alexander(det)
    if cfg.format == "json":
        json.dump({"alexander": poly_to_json(a), "det": poly_to_json(det)}, out, indent=2)
        out.write("\n")
    else:
        out.write(f"A(t) = {a.format()}\ndet W = {det.format()}\n")
    return EXIT_OK


def cmd_wheels(cfg: RunConfig, out) -> int:
    w = _special_w(cfg)
    a = normalize_alexander(det_laurent(w))
    coeffs = wh_prime_coeffs(a, cfg.order)
    if cfg.format == "json":
        json.dump(
            {
                "order": cfg.order,
                "alexander": poly_to_json(a),
                "wheels": [{"m": m, "coeff": rational_to_json(c)} for m, c in sorted(coeffs.items())],
            },
            out,
            indent=2,
        )
        out.write("\n")
    else:
        out.write(f"A(t) = {a.format()}\n")
        for m, c in sorted(coeffs.items()):
            out.write(f"c{m} = {c}\n")
    return EXIT_OK


def cmd_invert(cfg: RunConfig, out) -> int:
    w = _special_w(cfg)
    det = det_laurent(w)
    inv = invert_ratfunc_matrix(w)
    # entries over det: adj_ij = inv_ij * det, always a Laurent polynomial
    adj = [[(x * det).num for x in row] for row in inv]
    if cfg.format == "json":
        json.dump(
            {
                "det": poly_to_json(det),
                "adjugate": [[poly_to_json(x) for x in row] for row in adj],
                "inverse": [[ratfunc_to_json(x) for x in row] for row in inv],
            },
            out,
            indent=2,
        )
        out.write("\n")
    else:
        out.write(f"det W = {det.format()}\nW^-1 = adj / det, adj =\n{_fmt_matrix(adj)}\n")
    return EXIT_OK


def cmd_integrate(cfg: RunConfig, out) -> int:
    p = _load(cfg.inputs[0])
    r = load_r_file(cfg.r_file) if cfg.r_file else None
    le = surgery_assemble(p, r, order=cfg.order, loop_bound=cfg.loops)
    le.metadata["lmoDegree"] = cfg.n
    le.metadata["lmoSign"] = (-1) ** (cfg.n * le.sigma[0])
    if cfg.format == "json":
        json.dump(loop_expansion_to_json(le), out, indent=2)
        out.write("\n")
        return EXIT_OK
    out.write(f"A(t) = {le.alexander.format()}\ndet W = {le.det.format()}\n")
    out.write(f"sigma+ = {le.sigma[0]}, sigma- = {le.sigma[1]}\n")
    for m, c in sorted(le.wheel_coeffs.items()):
        out.write(f"c{m} = {c}\n")
    if le.scalar != 1:
        out.write(f"scalar = {le.scalar}\n")
    for i, s in sorted(le.loop_terms.items()):
        out.write(f"loop terms, Euler characteristic {-i}: {len(s)} diagrams\n")
        for d, c in s.items():
            labels = ", ".join(lab.format() for lab in d.labels)
            out.write(f"  {c} * [{len(d.trivalent)} vertices; legs {[n for n, _ in d.legs]}; labels {labels}]\n")
    out.write(f"note: {le.metadata['normalization']}\n")
    return EXIT_OK


def cmd_check(cfg: RunConfig, out) -> int:
    results = run_all(cfg.seed, cfg.trials, cfg.jobs)
    ok = all(r.failed == 0 for r in results)
    if cfg.format == "json":
        json.dump(
            {
                "seed": cfg.seed,
                "suites": [
                    {"name": r.name, "passed": r.passed, "failed": r.failed, "failures": r.failures}
                    for r in results
                ],
                "ok": ok,
            },
            out,
            indent=2,
        )
        out.write("\n")
    else:
        for r in results:
            status = "PASS" if r.failed == 0 else "FAIL"
            out.write(f"{status} {r.name}: {r.passed} passed, {r.failed} failed\n")
            for f in r.failures:
                out.write(f"    {f}\n")
    return EXIT_OK if ok else EXIT_CHECK


COMMANDS = {
    "wind": cmd_wind,
    "alex": cmd_alex,
    "wheels": cmd_wheels,
    "invert": cmd_invert,
    "integrate": cmd_integrate,
    "check": cmd_check,
}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    cfg = _config(args)
    diagrams.DEFAULT_MAX_VERTICES = cfg.max_vertices
    try:
        return COMMANDS[cfg.command](cfg, out)
    except InputError as exc:
        print(f"loopline: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as exc:
        print(f"loopline: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except LooplineError as exc:
        print(f"loopline: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
