"""Command-line front end: ``gfe-lab <subcommand> ...``.

Exit status: 0 when the run passes, 1 when a check fails, 2 on usage or
configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import reports
from .core import is_v_solution, max_residual, residual_rows, satisfies_verdict
from .dsl import compile_text, parse_system
from .errors import DslError, GfeError
from .extension import DEFAULT_NODE_CAP, minimal_extension_set
from .harness import FAMILIES, CompactDescriptor, NoiseModel, sample_compact, stability_experiment
from .regularity import BoundingRel, ContinuityScale, FiniteStalk
from .zoo import PRESETS, ZOO_CASES, preset, reference_solution, run_zoo_case

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(GfeError):
    """Bad flag values detected after argparse."""


# ---------------------------------------------------------------------------
# flag parsing
# ---------------------------------------------------------------------------

def _number(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None


def parse_grid(text: str) -> CompactDescriptor:
    """``a:b:step`` (real interval), ``a..b`` (integer range) or ``v1,v2,...``."""
    if ".." in text:
        lo, _, hi = text.partition("..")
        lo, hi = _number(lo), _number(hi)
        if not (isinstance(lo, int) and isinstance(hi, int)):
            raise UsageError(f"integer range needs integer bounds: {text!r}")
        return CompactDescriptor.integer_range(lo, hi)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"interval grid must be a:b:step, got {text!r}")
        lo, hi, step = (_number(p) for p in parts)
        return CompactDescriptor.interval(lo, hi, step)
    return CompactDescriptor.finite(_number(p) for p in text.split(","))


def _points(text: str) -> list:
    if ".." in text:
        d = parse_grid(text)
        return list(range(d.lo, d.hi + 1))
    return [_number(p) for p in text.split(",") if p.strip()]


def _name_params(text: str) -> tuple[str, tuple]:
    name, _, rest = text.partition(":")
    params = tuple(_number(p) for p in rest.split(",") if p.strip()) if rest else ()
    return name, params


def parse_solution(text: str):
    name, params = _name_params(text)
    try:
        return reference_solution(name, *params)
    except KeyError:
        raise UsageError(f"unknown solution {name!r}") from None
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad parameters for {name}: {exc}") from None


def parse_noise(text: str, seed: int) -> NoiseModel:
    kind, _, rest = text.partition(":")
    args = [_number(p) for p in rest.split(":")] if rest else []
    if kind == "none":
        return NoiseModel.uniform(0.0, seed)
    if kind == "sinusoidal" and len(args) == 2:
        return NoiseModel.sinusoidal(args[0], args[1], seed)
    if kind == "uniform" and len(args) == 1:
        return NoiseModel.uniform(args[0], seed)
    raise UsageError(f"noise must be none, uniform:AMP or sinusoidal:FREQ:AMP, got {text!r}")


def parse_gamma(text: str) -> ContinuityScale:
    kind, _, factor = text.partition(":")
    if kind not in ("uniform", "pointwise") or not factor:
        raise UsageError(f"gamma must be uniform:FACTOR or pointwise:FACTOR, got {text!r}")
    return ContinuityScale.linear(float(_number(factor)), kind)


def parse_interval_bound(text: str | None):
    if text is None or text == "none":
        return None
    lo, _, hi = text.partition(":")
    if not hi:
        raise UsageError(f"bound must be lo:hi or none, got {text!r}")
    return BoundingRel.interval(float(_number(lo)), float(_number(hi)))


def parse_finite_bound(text: str) -> BoundingRel:
    """``N`` for {0..N} or ``a..b`` for {a..b}."""
    if ".." in text:
        lo, _, hi = text.partition("..")
        lo, hi = _number(lo), _number(hi)
    else:
        lo, hi = 0, _number(text)
    if not (isinstance(lo, int) and isinstance(hi, int)) or lo > hi:
        raise UsageError(f"bound must be N or a..b with integers a <= b, got {text!r}")
    return BoundingRel(lambda x, s=FiniteStalk(range(lo, hi + 1)): s, f"{{{lo}..{hi}}}")


CORPUS_DIR = Path(__file__).resolve().parent / "corpus"


def _corpus_path(name: str) -> Path | None:
    candidate = CORPUS_DIR / name
    return candidate if candidate.is_file() else None


def read_source(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        fallback = _corpus_path(p.name)
        if fallback is None:
            raise UsageError(f"no such file: {path}")
        p = fallback
    return p.read_text(encoding="utf-8")


def load_system(args):
    if getattr(args, "source", None):
        return compile_text(read_source(args.source)).system
    if args.preset not in PRESETS:
        raise UsageError(f"unknown preset {args.preset!r}; choose from {', '.join(sorted(PRESETS))}")
    return preset(args.preset)


def _system_config(args) -> dict:
    return {"preset": getattr(args, "preset", None), "source": getattr(args, "source", None)}


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_parse(args) -> int:
    text = read_source(args.file)
    if args.format:
        from .dsl import format_system

        sys.stdout.write(format_system(parse_system(text)))
        return EXIT_PASS
    compiled = compile_text(text)
    if args.json:
        sys.stdout.write(reports.dumps([d.as_dict() for d in compiled.derivations]))
        return EXIT_PASS
    for d in compiled.derivations:
        typ = ",".join(str(t) for t in d.typ)
        print(f"{d.label}: type ({typ})")
    return EXIT_PASS


def _grid_sample(args, system):
    return sample_compact(parse_grid(args.grid), system.domain)


def cmd_check(args) -> int:
    system = load_system(args)
    f = parse_solution(args.solution)
    S = _grid_sample(args, system)
    if args.eps is not None:
        verdict = is_v_solution(system, f, S, args.eps)
    else:
        verdict = satisfies_verdict(system, f, S, args.atol)
    config = {**_system_config(args), "solution": args.solution, "grid": args.grid,
              "atol": verdict.notes.get("atol"), "eps": args.eps, "seed": None}
    _emit(reports.dumps(reports.verdict_report(verdict, config)), args.out)
    print("pass" if verdict.passed else "fail", file=sys.stderr)
    return EXIT_PASS if verdict.passed else EXIT_FAIL


def cmd_residual(args) -> int:
    system = load_system(args)
    f = parse_solution(args.solution)
    S = _grid_sample(args, system)
    if args.csv:
        Path(args.csv).write_text(reports.residual_csv(residual_rows(system, f, S)), encoding="utf-8")
    best = max_residual(system, f, S)
    out = {
        "schema_version": reports.SCHEMA_VERSION,
        "kind": "residual",
        "config": {**_system_config(args), "solution": args.solution, "grid": args.grid, "seed": None},
        "max_residual": best.value,
        "witness": best.witness,
        "equation": best.label,
    }
    _emit(reports.dumps(out), args.out)
    return EXIT_PASS


def cmd_stabilize(args) -> int:
    system = load_system(args)
    exact = parse_solution(args.exact)
    fam_name, fam_params = _name_params(args.family)
    if fam_name not in FAMILIES:
        raise UsageError(f"unknown family {fam_name!r}; choose from {', '.join(sorted(FAMILIES))}")
    family = FAMILIES[fam_name](*fam_params)
    noise = parse_noise(args.noise, args.seed)
    ladder = [float(_number(v)) for v in args.eps_u_ladder.split(",")] if args.eps_u_ladder else []
    report = stability_experiment(
        system, exact, family, noise, parse_grid(args.D), parse_grid(args.C),
        args.eps_u, args.eps_v, parse_gamma(args.gamma), parse_interval_bound(args.bound),
        eps_u_ladder=ladder, objective=args.objective, timings=args.timings,
    )
    report.config.update(_system_config(args))
    _emit(reports.dumps(reports.stability_dict(report)), args.out)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_extend(args) -> int:
    system = load_system(args)
    R = parse_finite_bound(args.bound)
    D, X = _points(args.D), _points(args.X)
    chain = None
    if args.chain:
        chain = [_points(c) for c in args.chain.split(";")]
    report = minimal_extension_set(system, R, D, X, chain, cap=args.cap)
    config = {**_system_config(args), "bound": R.description, "D": D, "X": X,
              "chain": "prefix" if chain is None else chain, "cap": args.cap, "seed": None}
    _emit(reports.dumps(reports.extension_dict(report, config)), args.out)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_demo(args) -> int:
    ok = True
    t0 = time.perf_counter()
    for case in ZOO_CASES:
        passed, value, seconds = run_zoo_case(case)
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {case.preset:<12} {case.solution:<14} "
              f"max residual {value:.3g}  ({seconds:.3f}s)")
    print(f"{'all cases pass' if ok else 'some cases fail'} in {time.perf_counter() - t0:.2f}s")
    return EXIT_PASS if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parser
# ---------------------------------------------------------------------------

def _add_system(p: argparse.ArgumentParser, default_preset=None):
    g = p.add_mutually_exclusive_group(required=default_preset is None)
    g.add_argument("--preset", default=default_preset, help="built-in system: " + ", ".join(sorted(PRESETS)))
    g.add_argument("--source", help="path to a .gfe file")


class _Parser(argparse.ArgumentParser):
    """Argument parser that can report usage errors as JSON."""

    error_json = False

    def error(self, message):
        if _Parser.error_json:
            self.exit(EXIT_USAGE, json.dumps({"error": "UsageError", "message": message}) + "\n")
        super().error(message)


# flags whose values may start with '-' (negative bounds)
_VALUE_FLAGS = ("--grid", "--D", "--C", "--X", "--bound", "--chain", "--eps-u-ladder")


def _glue_negative_values(argv: list) -> list:
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1][1:2].isdigit():
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gfe-lab", description="Functional equation workbench.")
    parser.add_argument("--error-json", action="store_true",
                        help="report usage and configuration errors as JSON on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and compile a .gfe file, print derived types")
    p.add_argument("file")
    p.add_argument("--json", action="store_true", help="print the full derivation record")
    p.add_argument("--format", action="store_true", help="print the canonical source instead")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("check", help="test a solution against a system on a grid")
    _add_system(p)
    p.add_argument("--solution", required=True, help="reference solution, e.g. linear:2 or fibonacci:1,1")
    p.add_argument("--grid", required=True, help="a:b:step, a..b or v1,v2,...")
    p.add_argument("--atol", type=float, default=None, help="tolerance for exact satisfaction")
    p.add_argument("--eps", type=float, default=None, help="check approximate satisfaction instead")
    p.add_argument("--out", help="write the verdict JSON here")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("residual", help="maximal residual, optionally all residuals as CSV")
    _add_system(p)
    p.add_argument("--solution", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--csv", help="write every residual to this CSV file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_residual)

    p = sub.add_parser("stabilize", help="perturb-then-fit stability experiment")
    _add_system(p, default_preset="cauchy")
    p.add_argument("--exact", default="linear:2", help="exact solution to perturb")
    p.add_argument("--family", default="linear", help="solution family to fit: " + ", ".join(sorted(FAMILIES)))
    p.add_argument("--noise", default="sinusoidal:100:0.01", help="none, uniform:AMP or sinusoidal:FREQ:AMP")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--D", default="-1:1:0.01", help="fit set")
    p.add_argument("--C", default="-2:2:0.01", help="set where the hypotheses are checked")
    p.add_argument("--eps-u", type=float, default=0.04)
    p.add_argument("--eps-v", type=float, default=0.03)
    p.add_argument("--eps-u-ladder", default="", help="comma-separated extra tolerances to scan")
    p.add_argument("--gamma", default="uniform:0.25", help="linear continuity scale, uniform:F or pointwise:F")
    p.add_argument("--bound", default="-10:10", help="interval bound lo:hi, or none for a compact codomain")
    p.add_argument("--objective", choices=("sup", "mean-square"), default="sup")
    p.add_argument("--timings", action="store_true", help="include wall-clock runtimes (breaks byte-identity)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stabilize)

    p = sub.add_parser("extend", help="minimal set on which every partial solution extends")
    _add_system(p)
    p.add_argument("--bound", required=True, help="finite stalk: N for {0..N} or a..b")
    p.add_argument("--D", required=True, help="comma list or a..b")
    p.add_argument("--X", required=True, help="finite carrier, comma list or a..b")
    p.add_argument("--chain", help="candidate sets separated by ';' (default: prefixes)")
    p.add_argument("--cap", type=int, default=DEFAULT_NODE_CAP, help="search node cap")
    p.add_argument("--out")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("demo", help="run the built-in validation suite")
    p.set_defaults(func=cmd_demo)
    return parser


def _error_payload(exc: Exception) -> dict:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, DslError):
        payload.update(message=exc.message, line=exc.line, col=exc.col, expected=list(exc.expected))
    witness = getattr(exc, "witness", None)
    if witness is not None:
        payload["witness"] = reports.jsonable(witness)
    return payload


def main(argv=None) -> int:
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    _Parser.error_json = "--error-json" in argv
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GfeError, OSError, ValueError) as exc:
        if args.error_json:
            print(json.dumps(_error_payload(exc), sort_keys=True), file=sys.stderr)
        else:
            print(f"gfe-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
