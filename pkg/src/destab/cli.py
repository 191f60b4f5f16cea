"""Command line front end.

Exit codes: 0 success, 1 validation failure (including schema violations),
2 unreadable input or unwritable output, 3 a theorem-level certificate failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from .algebra import DEFAULT_TOL, StarAlgebra, Tolerance, same_span
from .bimodules import (
    HilbertBimodule,
    bimodule_roundtrip_check,
    bimodule_theta,
    corner_identity_report,
)
from .category import (
    KAlgMorphism,
    SuiteInstance,
    equivalence_suite,
    functor_law_report,
    naturality_check,
    quasi_inverse_report,
    stabilize_object,
)
from .correspondences import correspondence_roundtrip_destab, correspondence_roundtrip_stab
from .destabilization import KAlgebra, theta
from .errors import InvalidInputError, TheoremViolation
from .fuzz import GenConfig, gen_bimodule, gen_correspondence, gen_kalgebra, gen_morphism
from .morphisms import NdMorphism
from .report import Report
from .serialization import CorrespondenceDocument, DocumentError, LinkingDocument, load, serialize
from .units import MatrixUnitSystem

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_THEOREM = 0, 1, 2, 3
_STATUS = {EXIT_OK: "ok", EXIT_INVALID: "validation_failure", EXIT_IO: "io_error", EXIT_THEOREM: "theorem_violation"}


class _Exit(Exception):
    def __init__(self, code: int, message: str, reports=()):
        super().__init__(message)
        self.code = code
        self.reports = list(reports)


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


def _read(path: str):
    try:
        return load(path)
    except OSError as err:
        raise _Exit(EXIT_IO, f"cannot read {path}: {err.strerror or err}") from None
    except DocumentError as err:
        if str(err).startswith("line "):  # not JSON at all
            raise _Exit(EXIT_IO, f"{path}: {err}") from None
        raise _Exit(EXIT_INVALID, f"{path}: schema violation at {err}") from None


def _write(value, path: str | None) -> str:
    text = serialize(value)
    if path:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as err:
            raise _Exit(EXIT_IO, f"cannot write {path}: {err.strerror or err}") from None
    return text


def validation_reports(value, tol) -> list[Report]:
    """Validator reports for any parsed document."""
    if isinstance(value, StarAlgebra):
        rep = Report("algebra", residuals={"closure": value.random_closure_residual(np.random.default_rng(0))},
                     threshold=10 * tol * max(1.0, value.N ** 0.5))
        return [rep]
    if isinstance(value, MatrixUnitSystem):
        return [value.validate(tol)]
    if isinstance(value, KAlgebra):
        return [value.validate(tol)]
    if isinstance(value, LinkingDocument):
        out = [value.link.validate(tol), HilbertBimodule(value.link).validate(tol)]
        if value.units is not None:
            out.append(KAlgebra(value.link.L, value.units.omega).validate(tol))
        return out
    if isinstance(value, CorrespondenceDocument):
        out = [value.X.validate(tol)]
        if value.iota is not None:
            out += [KAlgebra(value.X.A, value.iota).validate(tol), KAlgebra(value.X.B, value.zeta).validate(tol)]
        return out
    if isinstance(value, KAlgMorphism):
        return [value.validate(tol)]
    if isinstance(value, NdMorphism):
        return [value.validate(tol)]
    raise TypeError(type(value).__name__)


def _require_valid(value, tol):
    reps = validation_reports(value, tol)
    if not all(r.passed for r in reps):
        raise _Exit(EXIT_INVALID, "input failed validation", reps)
    return reps


def cmd_validate(args, tol):
    value = _read(args.file)
    reps = validation_reports(value, tol)
    ok = all(r.passed for r in reps)
    return (EXIT_OK if ok else EXIT_INVALID), ("valid" if ok else "invalid"), reps, {}


def cmd_destab(args, tol):
    value = _read(args.file)
    if not isinstance(value, KAlgebra):
        raise _Exit(EXIT_INVALID, "destab expects a kalgebra document")
    if not args.no_validate:
        _require_valid(value, tol)
    cert = theta(value, tol)
    if not cert.checks["dimension_law"]:
        raise _Exit(EXIT_INVALID, "dim A != n^2 dim C; the units do not sit inside A", [cert])
    _write(cert.C, args.output)
    summary = {"dim_C": cert.C.dim, "dim_A": value.A.dim, "n": value.n}
    if not cert.passed:
        return EXIT_THEOREM, "theta certificate failed", [cert], summary
    return EXIT_OK, f"dim C = {cert.C.dim}", [cert], summary


def cmd_stab(args, tol):
    value = _read(args.file)
    if not isinstance(value, StarAlgebra):
        raise _Exit(EXIT_INVALID, "stab expects an algebra document")
    if args.n < 1:
        raise _Exit(EXIT_INVALID, "-n must be positive")
    KA = stabilize_object(value, args.n)
    text = _write(KA, args.output)
    rep = KA.validate(tol)
    if not args.output and not args.json:
        sys.stdout.write(text)
    return EXIT_OK, f"stabilized into M_{KA.N} with n = {args.n}", [rep], {"dim_A": KA.A.dim}


def roundtrip_reports(value, n: int, tol) -> list[Report]:
    """The roundtrip theorem that applies to the kind of ``value``."""
    if isinstance(value, StarAlgebra):
        KA = stabilize_object(value, n)
        cert = theta(KA, tol)
        eq, r = same_span(cert.C, KA.planted, tol)
        return [cert, Report("commutant_is_B_tensor_1", residuals={"span": r}, checks={"equal": eq},
                             threshold=10 * tol)]
    if isinstance(value, KAlgebra):
        cert = theta(value, tol)
        out = [cert]
        if value.planted is not None:
            eq, r = same_span(cert.C, value.planted, tol)
            out.append(Report("planted", residuals={"span": r}, checks={"equal": eq}, threshold=10 * tol))
        return out
    if isinstance(value, LinkingDocument):
        out = [bimodule_roundtrip_check(value.link, n, tol)]
        if value.units is not None:
            out += [corner_identity_report(value.link, value.units, tol)[1], bimodule_theta(value.link, value.units, tol)]
        return out
    if isinstance(value, CorrespondenceDocument):
        out = [correspondence_roundtrip_stab(value.X, n, tol)]
        if value.iota is not None:
            out.append(correspondence_roundtrip_destab(value.X, value.iota, value.zeta, tol))
        return out
    if isinstance(value, KAlgMorphism):
        return [naturality_check(value, tol)]
    if isinstance(value, NdMorphism):
        return [functor_law_report(value, NdMorphism.identity(value.target), n, tol), quasi_inverse_report(value, n, tol)]
    raise _Exit(EXIT_INVALID, f"no roundtrip for {type(value).__name__}")


def cmd_roundtrip(args, tol):
    value = _read(args.file)
    if not args.no_validate:
        _require_valid(value, tol)
    reps = roundtrip_reports(value, args.n, tol)
    ok = all(r.passed for r in reps)
    return (EXIT_OK if ok else EXIT_THEOREM), ("roundtrip passed" if ok else "roundtrip failed"), reps, {}


def parse_seeds(text: str) -> range:
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError("empty seed range")
    return range(lo, hi + 1)


FUZZ_KINDS = ("kalgebra", "morphism", "kmorphism", "broken", "bimodule", "correspondence")


def parse_profile(text: str) -> dict:
    """Comma-separated tokens: instance kinds, ``n=2|3``, ``ambient=<cap>``, ``blocks=2x1+1x2``."""
    prof = {"kinds": [], "n": (2, 3), "ambient": 18, "blocks": None}
    for token in filter(None, (t.strip() for t in text.split(","))):
        if token == "all":
            prof["kinds"] = list(FUZZ_KINDS)
        elif token in FUZZ_KINDS:
            prof["kinds"].append(token)
        elif token.startswith("n="):
            prof["n"] = tuple(int(v) for v in token[2:].split("|"))
        elif token.startswith("ambient="):
            prof["ambient"] = int(token[8:])
        elif token.startswith("blocks="):
            prof["blocks"] = tuple(tuple(int(v) for v in b.split("x")) for b in token[7:].split("+"))
        else:
            raise argparse.ArgumentTypeError(f"unknown profile token {token!r}")
    prof["kinds"] = prof["kinds"] or list(FUZZ_KINDS)
    if any(n < 2 for n in prof["n"]):
        raise argparse.ArgumentTypeError("n must be at least 2")
    return prof


def fuzz_instances(seeds, prof, tol) -> list[SuiteInstance]:
    out = []
    for seed in seeds:
        n = prof["n"][seed % len(prof["n"])]
        cfg = GenConfig(seed, n=n, block_profile=prof["blocks"], max_ambient=prof["ambient"], tol=tol)
        small = GenConfig(seed, n=n, max_ambient=min(prof["ambient"], 12), tol=tol)
        for kind in prof["kinds"]:
            label = f"{kind}:{seed}"
            if kind == "kalgebra":
                out.append(SuiteInstance("kalgebra", gen_kalgebra(cfg), label, n))
            elif kind == "morphism":
                out.append(SuiteInstance("morphism", gen_morphism(small, "nd"), label, n))
            elif kind == "kmorphism":
                out.append(SuiteInstance("kmorphism", gen_morphism(small), label, n))
            elif kind == "broken":
                bad = GenConfig(seed, n=n, max_ambient=small.max_ambient, tol=tol, broken=True)
                out.append(SuiteInstance("kmorphism", gen_morphism(bad), label, n))
            elif kind == "bimodule":
                g = gen_bimodule(GenConfig(seed, n=n, max_ambient=12, tol=tol))
                out.append(SuiteInstance("bimodule", (g.link, g.units, g.base), label, n))
            elif kind == "correspondence":
                g = gen_correspondence(GenConfig(seed, n=2, tol=tol))
                out.append(SuiteInstance("correspondence", (g.X, g.iota, g.zeta), label, 2))
    return out


def cmd_fuzz(args, tol):
    prof = parse_profile(args.profile)
    start = time.perf_counter()
    instances = fuzz_instances(args.seeds, prof, tol)
    rep = equivalence_suite(instances, tol, jobs=args.jobs)
    elapsed = time.perf_counter() - start
    rows = rep.details["instances"]
    table = {}
    for r in rows:
        t = table.setdefault(r["kind"], {"pass": 0, "invalid_input": 0, "theorem_failure": 0, "worst": 0.0})
        t[r["status"]] += 1
        if r["status"] == "pass":
            t["worst"] = max(t["worst"], r["worst"])
    summary = {"seeds": [args.seeds.start, args.seeds.stop - 1], "elapsed_s": round(elapsed, 3), "table": table,
               "counts": rep.details["counts"]}
    if not args.json:
        print(f"{'kind':<16}{'pass':>6}{'invalid':>9}{'failed':>8}  worst residual")
        for kind, t in table.items():
            print(f"{kind:<16}{t['pass']:>6}{t['invalid_input']:>9}{t['theorem_failure']:>8}  {t['worst']:.2e}")
        for r in rows:
            if r["status"] == "theorem_failure":
                print(f"FAILED {r['label']}: {r['message']}")
    code = EXIT_OK if rep.passed else EXIT_THEOREM
    rep.details = {"counts": rep.details["counts"]}
    return code, f"{len(rows)} instances in {elapsed:.1f} s", [rep], summary


def build_parser() -> argparse.ArgumentParser:
    def global_flags(p, suppress):
        # subcommands suppress defaults so flags given before the subcommand survive
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        p.add_argument("--tol", type=float, default=d(None), help="tolerance (default 1e-9, or DESTAB_TOL)")
        p.add_argument("--seed", type=int, default=d(0), help="seed for randomized checks")
        p.add_argument("--json", action="store_true", default=d(False), help="machine-readable report on stdout")

    common = argparse.ArgumentParser(add_help=False)
    global_flags(common, suppress=True)
    parser = argparse.ArgumentParser(prog="destab", description="Destabilization of finite-dimensional K-algebras")
    global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="run the validators for a document")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("destab", parents=[common], help="relative commutant and theta certificate")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.add_argument("--no-validate", action="store_true")
    p.set_defaults(func=cmd_destab)

    p = sub.add_parser("stab", parents=[common], help="stabilize an algebra")
    p.add_argument("file")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_stab)

    p = sub.add_parser("roundtrip", parents=[common], help="run the roundtrip theorem for a document")
    p.add_argument("file")
    p.add_argument("-n", type=int, default=2)
    p.add_argument("--no-validate", action="store_true")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("fuzz", parents=[common], help="equivalence suite over seeded instances")
    p.add_argument("--seeds", type=parse_seeds, default=parse_seeds("1..25"))
    p.add_argument("--profile", default="all")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_fuzz)
    return parser


def _tolerance(args) -> float:
    if args.tol is not None:
        return Tolerance(args.tol).eps
    return Tolerance.from_env(DEFAULT_TOL).eps


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    reports: list[Report] = []
    summary: dict = {}
    try:
        tol = _tolerance(args)
        code, message, reports, summary = args.func(args, tol)
    except _Exit as ex:
        code, message, reports = ex.code, str(ex), ex.reports
    except argparse.ArgumentTypeError as err:
        code, message = EXIT_INVALID, str(err)
    except TheoremViolation as err:
        code, message = EXIT_THEOREM, f"theorem violation: {err}"
    except InvalidInputError as err:
        code, message = EXIT_INVALID, f"invalid input: {err}"
    except ValueError as err:
        code, message = EXIT_INVALID, str(err)
    if args.json:
        out = {"command": args.command, "status": _STATUS[code], "exit_code": code, "message": message,
               "reports": [r.to_dict() for r in reports], "summary": summary}
        print(json.dumps(_finite(out), sort_keys=True))
    else:
        for r in reports:
            print(r)
            for k in r.failures():
                print(f"  failed: {k}")
        print(message, file=sys.stderr if code else sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
