"""Command line front end.

Every subcommand builds one job from its flags, runs it and prints a
report.  JSON is the default; ``--format text`` gives an indented listing.
Exact numbers are always strings.  Exit codes: 0 success, 1 a computation
or verification failed, 2 bad usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import checks, corpus
from .expr import Expression
from .kappa import K, KappaRational, PoleError, as_krat, weight_hrs
from .operators import VariantConfig, apply_uea, build_generator
from .rhoparse import RhoSyntaxError, parse_rho
from .structure import (AnsatzSpec, KernelError, NoSolutionError, contragredient_action, double_kernel,
                        dual_functional, generated_submodule, graded_kernel, log_coupling,
                        naive_fusion, pair, rho_solutions, solve_log_partner,
                        staggered_grade0_action, staggered_report)
from .uea import (GradeCapError, SingularVectorError, UEAElement, classify_verma, dagger,
                  normal_order, partition_p, singular_vector, uea_mul)

__all__ = ["main", "build_parser", "UsageError", "global_grade_cap"]

SCHEMA = "virmart/1"
DEFAULT_GRADE_CAP = 10


class UsageError(Exception):
    pass


class JobFailure(Exception):
    pass


def global_grade_cap() -> int:
    raw = os.environ.get("VIRMART_MAX_GRADE")
    if raw is None or raw == "":
        return DEFAULT_GRADE_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise UsageError(f"VIRMART_MAX_GRADE must be an integer, got {raw!r}") from None
    if cap < 0:
        raise UsageError("VIRMART_MAX_GRADE must be non-negative")
    return cap


# -- serialization -----------------------------------------------------------------------------

def num(v) -> str:
    return str(as_krat(v))


def expr_doc(e: Expression) -> dict:
    return {"text": str(e), "terms": e.to_json()}


def uea_doc(u: UEAElement) -> dict:
    return {"text": str(u), "terms": u.to_json()}


# -- argument handling -------------------------------------------------------------------------

def _kappa(text: str) -> KappaRational:
    if text == "symbolic":
        return K
    try:
        value = as_krat(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--kappa must be 'symbolic' or a rational p/q, got {text!r}") from None
    if value.constant() <= 0:
        raise UsageError("--kappa must be positive")
    return value


def _rho(text: str, kappa: KappaRational) -> KappaRational:
    try:
        value = parse_rho(text)
    except (RhoSyntaxError, ZeroDivisionError) as exc:
        raise UsageError(f"--rho {text!r}: {exc}") from None
    if not kappa.is_constant:
        return value
    try:
        return as_krat(value.evaluate(kappa.constant()))
    except (PoleError, ZeroDivisionError) as exc:
        raise UsageError(f"--rho {text!r} has a pole at kappa = {kappa}: {exc}") from None


def _grade(args, default: int) -> int:
    cap = global_grade_cap()
    g = args.max_grade if args.max_grade is not None else min(default, cap)
    if g < 0:
        raise UsageError("--max-grade must be non-negative")
    if g > cap:
        raise UsageError(f"--max-grade {g} exceeds the global cap {cap} (VIRMART_MAX_GRADE)")
    return g


def _config(args):
    kappa = _kappa(args.kappa)
    rhos = [_rho(r, kappa) for r in (args.rho or [])]
    if not rhos:
        return kappa, rhos, VariantConfig.chordal(kappa)
    try:
        return kappa, rhos, VariantConfig.with_rhos(kappa, rhos)
    except (ValueError, PoleError) as exc:
        raise UsageError(str(exc)) from None


def _generators(args, cfg):
    gens = [build_generator(cfg)]
    if getattr(args, "passive_kappa", None):
        kp = _kappa(args.passive_kappa)
        for name in cfg.ctx.passive:
            gens.append(build_generator(cfg, name, kp))
    return gens


def _head(args, kappa, rhos) -> dict:
    return {"schema": SCHEMA, "command": args.command, "kappa": num(kappa),
            "rho": [num(r) for r in rhos]}


def _find_partner(cfg, spec, top, gens):
    """First chi (grade 0 upwards) whose image of Z has a partner in the ansatz."""
    h = cfg.h_Z
    candidates = [normal_order([], cfg.c)]
    for r in range(1, 5):
        for s in range(1, 5):
            if r * s > 4 or r * s > top:
                continue
            if weight_hrs(cfg.kappa, r, s) == h:
                try:
                    candidates.append(singular_vector(cfg.kappa, r, s))
                except (SingularVectorError, GradeCapError):
                    continue
    seen = set()
    for chi in candidates:
        key = str(chi)
        if key in seen:
            continue
        seen.add(key)
        try:
            lam, info = solve_log_partner(cfg, cfg.Z, chi, spec, generators=gens)
        except NoSolutionError:
            continue
        if lam:
            return chi, lam, info
    return None, None, None


# -- jobs --------------------------------------------------------------------------------------

def job_character(args) -> dict:
    kappa, rhos, cfg = _config(args)
    top = _grade(args, 6)
    gens = _generators(args, cfg)
    spec = AnsatzSpec.for_config(cfg, args.laurent, args.log_cap, max(top, 8))
    out = _head(args, kappa, rhos)
    out["h_Z"] = num(cfg.h_Z)
    sub = generated_submodule([cfg.Z], cfg, top, generators=gens)
    out["sub"] = sub.character()
    chi = lam = None
    if args.partner == "auto":
        chi, lam, _info = _find_partner(cfg, spec, top, gens)
    if lam is None:
        out["partner"] = None
        out["full"] = out["sub"]
        out["quotient"] = []
        return out
    rep = staggered_report("cli", cfg, cfg.Z, chi, lam, top, generators=gens)
    out.update({
        "partner": expr_doc(lam),
        "chi": uea_doc(chi),
        "ell": rep.ell,
        "h_left": num(rep.h_left),
        "h_right": num(rep.h_right),
        "full": rep.full,
        "sub": rep.sub,
        "quotient": rep.quotient,
        "beta": num(rep.beta) if rep.beta is not None else None,
        "jordan": rep.jordan,
        "notes": rep.notes,
    })
    return out


def job_kernel(args) -> dict:
    kappa, rhos, cfg = _config(args)
    top = _grade(args, 6)
    gens = _generators(args, cfg)
    if rhos:
        spec = AnsatzSpec.for_config(cfg, args.laurent, args.log_cap, top)
    else:
        spec = AnsatzSpec((), 0, 0, top)
    out = _head(args, kappa, rhos)
    grades = []
    for m in range(top + 1):
        vecs, dim = graded_kernel(cfg, spec, m, generators=gens)
        row = {"grade": m, "dim": dim}
        if args.show_basis:
            row["basis"] = [expr_doc(v) for v in vecs]
        grades.append(row)
    out["grades"] = grades
    out["dims"] = [g["dim"] for g in grades]
    if not rhos:
        out["expected_chordal"] = [partition_p(m) - partition_p(m - 2) for m in range(top + 1)]
    return out


def _rs(args):
    if args.r is None or args.s is None:
        raise UsageError("--r and --s are required")
    if args.r < 1 or args.s < 1:
        raise UsageError("--r and --s must be positive")
    return args.r, args.s


def job_singular(args) -> dict:
    kappa = _kappa(args.kappa)
    r, s = _rs(args)
    cap = global_grade_cap()
    try:
        chi = singular_vector(kappa, r, s, grade_cap=cap)
    except GradeCapError as exc:
        raise UsageError(str(exc)) from None
    except SingularVectorError as exc:
        raise JobFailure(str(exc)) from None
    return {"schema": SCHEMA, "command": args.command, "kappa": num(kappa), "r": r, "s": s,
            "h": num(weight_hrs(kappa, r, s)), "grade": r * s, "singular": uea_doc(chi)}


def job_classify(args) -> dict:
    kappa = _kappa(args.kappa)
    r, s = _rs(args)
    st = classify_verma(kappa, r, s)
    out = {"schema": SCHEMA, "command": args.command, "kappa": num(kappa), "r": r, "s": s}
    out.update(st.to_json())
    return out


def _partner_job(args):
    """(cfg, xi, chi, partner, generators) for log-coupling and its friends."""
    if args.preset == "two-point":
        tp = corpus.two_point()
        gens = list(tp.generators[:2])
        chi = normal_order([-1], tp.cfg.c)
        spec = AnsatzSpec.for_config(tp.cfg, 2, args.log_cap)
        lam, info = solve_log_partner(tp.cfg, tp.F, chi, spec, generators=gens)
        return as_krat(6), [as_krat(-3), as_krat(-3)], tp.cfg, tp.F, chi, lam, info, gens
    kappa, rhos, cfg = _config(args)
    if len(rhos) != 1:
        raise UsageError("log-coupling needs exactly one --rho (or --preset two-point)")
    gens = _generators(args, cfg)
    spec = AnsatzSpec.for_config(cfg, args.laurent, args.log_cap)
    chi, lam, info = _find_partner(cfg, spec, 4, gens)
    if lam is None:
        raise JobFailure("no logarithmic partner found within the ansatz")
    return kappa, rhos, cfg, cfg.Z, chi, lam, info, gens


def job_log_coupling(args) -> dict:
    kappa, rhos, cfg, xi, chi, lam, info, _gens = _partner_job(args)
    out = _head(args, kappa, rhos)
    if chi.grades() == {0}:
        beta = None
        note = "partner of the seed itself (grade 0); L_n partner = 0 for n > 0"
    else:
        beta = log_coupling(chi, lam, xi, cfg)
        note = None
    out.update({
        "ell": info["grade"],
        "h_left": num(xi.degree() + cfg.total_weight),
        "h_right": num(info["h_right"]),
        "chi": uea_doc(chi),
        "seed": expr_doc(xi),
        "partner": expr_doc(lam),
        "beta": num(beta) if beta is not None else None,
        "extra_homogeneous": info["extra_homogeneous"],
    })
    if note:
        out["note"] = note
    return out


def job_fusion(args) -> dict:
    kappa = _kappa(args.kappa)
    out = {"schema": SCHEMA, "command": args.command, "kappa": num(kappa)}
    if args.rho:
        rows = []
        for text in args.rho:
            rho = _rho(text, kappa)
            hp, hm = naive_fusion(kappa, rho)
            rows.append({"rho": num(rho), "h_plus": num(hp), "h_minus": num(hm)})
        out["roots"] = rows
    if args.r is not None or args.s is not None:
        r, s = _rs(args)
        sols = rho_solutions(kappa, r, s)
        out["r"], out["s"] = r, s
        out["rho_plus"] = [num(v) for v in sols["plus"]]
        out["rho_minus"] = [num(v) for v in sols["minus"]]
    if "roots" not in out and "rho_plus" not in out:
        raise UsageError("fusion needs --rho or --r/--s")
    return out


def job_double_kernel(args) -> dict:
    kappa = _kappa(args.kappa)
    top = _grade(args, 4)
    rho = kappa - 6
    cfg = VariantConfig.with_rhos(kappa, [rho])
    rcfg = VariantConfig.with_partition_function(kappa, cfg.ctx, cfg.Z)
    a, arev = build_generator(cfg), build_generator(rcfg, "y")
    h13 = weight_hrs(kappa, 1, 3)
    out = {"schema": SCHEMA, "command": args.command, "kappa": num(kappa), "rho": [num(rho)]}
    classes = []
    for label, extra, h0, sing in (("h=0", 0, as_krat(0), 1), ("h=h13", h13, h13, 3)):
        spec = AnsatzSpec.for_config(cfg, args.laurent, args.log_cap, top, extra=[extra])
        dims = [double_kernel(cfg, rcfg, spec, m, a, arev)[1] for m in range(top + 1)]
        fusion = [partition_p(n) - partition_p(n - sing) for n in range(top + 1)]
        classes.append({"class": label, "h": num(h0), "dims": dims,
                        "fusion_dual": fusion, "agree": dims == fusion})
    out["classes"] = classes
    out["note"] = ("comparison of the computed intersection with the expected dual fusion "
                   "character; agreement is evidence, not proof")
    return out


def job_contraction(args) -> dict:
    chi = singular_vector(6, 3, 2)
    a, (b0, b1) = staggered_grade0_action(uea_mul(dagger(chi), chi), 0)
    cfg = VariantConfig.with_rhos(6, [-2])
    chi1 = normal_order([-1], cfg.c)
    spec = AnsatzSpec.for_config(cfg, 0, 1)
    lam, _info = solve_log_partner(cfg, cfg.Z, chi1, spec)
    beta = log_coupling(chi1, lam, cfg.Z, cfg)
    abstract = (b0 + b1 * beta) * beta
    full = generated_submodule([lam], cfg, 7)
    lm1z = apply_uea(chi1, cfg.Z, cfg)
    target = full.express(7, apply_uea(chi, lam, cfg))
    concrete = []
    for t in (0, 1):
        eta = dual_functional(full, 1, [(lam, t), (lm1z, beta)])
        concrete.append(pair(contragredient_action(full, chi, 1, eta)[7], target))
    agree = concrete[0] == concrete[1] == abstract
    return {"schema": SCHEMA, "command": args.command, "kappa": "6", "rho": ["-2"],
            "beta": num(beta), "chi": uea_doc(chi),
            "abstract": {"lambda_coefficient": num(a), "b0": num(b0), "b1": num(b1),
                         "value": num(abstract)},
            "concrete": {"value": num(concrete[0]),
                         "independent_of_free_value": concrete[0] == concrete[1]},
            "agree": agree}


def job_verify(args) -> dict:
    if args.list:
        return {"schema": SCHEMA, "command": args.command,
                "checks": [{"name": c.name, "topic": c.topic, "expensive": c.expensive}
                           for c in checks.CATALOG],
                "faults": dict(sorted(checks.FAULTS.items()))}
    topics = set(args.section or [])
    unknown = topics - set(checks.TOPICS)
    if unknown:
        raise UsageError(f"unknown section(s) {sorted(unknown)}; choose from {checks.TOPICS}")
    faults = set(args.inject_fault or [])
    bad = faults - set(checks.FAULTS)
    if bad:
        raise UsageError(f"unknown fault(s) {sorted(bad)}; choose from {sorted(checks.FAULTS)}")
    ctx = checks.CheckContext(frozenset(faults), args.expensive, args.budget)
    results = checks.run_checks(topics or None, None, ctx)
    rows = []
    for r in results:
        row = r.to_json()
        if args.timings or args.format == "text":
            row["elapsed"] = f"{r.elapsed:.2f}s"
        rows.append(row)
    failed = [r.name for r in results if r.status == "fail"]
    return {"schema": SCHEMA, "command": args.command, "checks": rows,
            "passed": sum(r.status == "pass" for r in results),
            "failed": failed,
            "not_computed": [r.name for r in results if r.status == "not computed"],
            "ok": not failed}


JOBS = {
    "character": job_character,
    "kernel": job_kernel,
    "singular": job_singular,
    "classify": job_classify,
    "log-coupling": job_log_coupling,
    "fusion": job_fusion,
    "double-kernel": job_double_kernel,
    "contraction": job_contraction,
    "verify-paper": job_verify,
}


# -- parser ------------------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="virmart", description="Virasoro structure of SLE local martingales.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, rho=True, grade=True, ansatz=True):
        sp.add_argument("--format", choices=("json", "text"), default="json")
        sp.add_argument("--kappa", default="symbolic", help="'symbolic' or a rational p/q")
        if rho:
            sp.add_argument("--rho", action="append",
                            help="expression in k; repeat once per passive point")
        if grade:
            sp.add_argument("--max-grade", type=int, default=None)
        if ansatz:
            sp.add_argument("--log-cap", type=int, default=1)
            sp.add_argument("--laurent", type=int, default=0)

    sp = sub.add_parser("character", help="characters of U Z and of its log partner module")
    common(sp)
    sp.add_argument("--partner", choices=("auto", "none"), default="auto")
    sp.add_argument("--passive-kappa", help="also impose the generators started at each y_j")

    sp = sub.add_parser("kernel", help="graded dimensions of Ker A in the ansatz")
    common(sp)
    sp.add_argument("--show-basis", action="store_true")
    sp.add_argument("--passive-kappa")

    sp = sub.add_parser("singular", help="singular vector chi_{r,s}")
    common(sp, rho=False, grade=False, ansatz=False)
    sp.add_argument("--r", type=int)
    sp.add_argument("--s", type=int)

    sp = sub.add_parser("classify", help="chain/braid structure of the Verma module")
    common(sp, rho=False, grade=False, ansatz=False)
    sp.add_argument("--r", type=int)
    sp.add_argument("--s", type=int)

    sp = sub.add_parser("log-coupling", help="logarithmic partner and coupling beta")
    common(sp, grade=False)
    sp.add_argument("--preset", choices=("two-point",))
    sp.add_argument("--passive-kappa")

    sp = sub.add_parser("fusion", help="naive fusion roots and matching rho values")
    common(sp, grade=False, ansatz=False)
    sp.add_argument("--r", type=int)
    sp.add_argument("--s", type=int)

    sp = sub.add_parser("double-kernel", help="Ker A and Ker A^rev at rho = kappa - 6")
    common(sp, rho=False)

    sp = sub.add_parser("contraction", help="contragredient contraction at kappa = 6, rho = -2")
    sp.add_argument("--format", choices=("json", "text"), default="json")

    sp = sub.add_parser("verify-paper", help="run the reproduction checks")
    sp.add_argument("--format", choices=("json", "text"), default="text")
    sp.add_argument("--section", action="append",
                    help=f"topic to run (repeatable): {', '.join(checks.TOPICS)}")
    sp.add_argument("--expensive", action="store_true", help="run opt-in checks")
    sp.add_argument("--budget", type=float, default=300.0, help="seconds for opt-in checks")
    sp.add_argument("--inject-fault", action="append", help="corrupt an input on purpose")
    sp.add_argument("--timings", action="store_true", help="elapsed times in JSON output")
    sp.add_argument("--list", action="store_true", help="list checks and exit")
    return p


# -- rendering ---------------------------------------------------------------------------------

def render_text(doc, indent: int = 0) -> list:
    pad = "  " * indent
    lines = []
    if isinstance(doc, dict) and set(doc) == {"text", "terms"}:
        return [pad + doc["text"]]
    if isinstance(doc, dict):
        for key, val in doc.items():
            if isinstance(val, dict) and set(val) == {"text", "terms"}:
                lines.append(f"{pad}{key}: {val['text']}")
            elif isinstance(val, (dict, list)) and val and not _flat(val):
                lines.append(f"{pad}{key}:")
                lines.extend(render_text(val, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_inline(val)}")
        return lines
    if isinstance(doc, list):
        for item in doc:
            if isinstance(item, dict) and set(item) != {"text", "terms"}:
                sub = render_text(item, indent + 1)
                lines.append(pad + "- " + sub[0].strip())
                lines.extend(sub[1:])
            else:
                lines.extend(render_text(item, indent) if isinstance(item, dict)
                             else [pad + "- " + _inline(item)])
        return lines
    return [pad + _inline(doc)]


def _flat(val) -> bool:
    return isinstance(val, list) and all(not isinstance(v, (dict, list)) for v in val)


def _inline(val) -> str:
    if val is None:
        return "none"
    if isinstance(val, bool):
        return "yes" if val else "no"
    if isinstance(val, list):
        return "[" + ", ".join(_inline(v) for v in val) + "]"
    return str(val)


def _verify_text(doc) -> list:
    lines = []
    for row in doc["checks"]:
        status = {"pass": "PASS", "fail": "FAIL", "not computed": "SKIP"}[row["status"]]
        lines.append(f"{status} {row['topic']:<16} {row['name']:<36} "
                     f"{row.get('elapsed', ''):>8}  {row['detail']}")
    lines.append(f"{doc['passed']} passed, {len(doc['failed'])} failed, "
                 f"{len(doc['not_computed'])} not computed")
    for name in doc["failed"]:
        lines.append(f"failed: {name}")
    return lines


def emit(doc: dict, fmt: str, stream=None):
    stream = stream or sys.stdout
    if fmt == "json":
        stream.write(json.dumps(doc, indent=2, sort_keys=False) + "\n")
    elif doc.get("command") == "verify-paper" and "checks" in doc and "passed" in doc:
        stream.write("\n".join(_verify_text(doc)) + "\n")
    else:
        stream.write("\n".join(render_text(doc)) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        doc = JOBS[args.command](args)
    except UsageError as exc:
        print(f"virmart: usage error: {exc}", file=sys.stderr)
        return 2
    except (JobFailure, NoSolutionError, SingularVectorError, KernelError) as exc:
        print(f"virmart: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError) as exc:
        print(f"virmart: computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    emit(doc, args.format)
    if args.command == "verify-paper" and not doc.get("ok", True):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
