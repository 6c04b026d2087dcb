"""Command line front end.

Exit codes: 0 success (recognizable / verified), 1 negative verdict
(not recognizable / verification failed), 2 input error, 3 internal
numerical or semantic failure.  Every error is printed as
``{"error": ...}`` on stdout.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .band import R1Language
from .construct import (
    alpha,
    build_composite,
    build_dhpra,
    build_mmqfa,
    count_states,
    default_n,
    dhpra_certificate,
    lift_to_bqfa,
    mmqfa_certificate,
)
from .errors import ConstructionError, InputError, NumericalError, SemanticsError, ValidationError
from .forbidden import find_forbidden
from .lp import decide_consistency
from .probsim import accept_probabilities, verify_recognition
from .quantum import CpMap, channel_predicates, omega_limit, operator_norm, superoperator, verify_bist_ej
from .rational import fmt_q
from .serialize import automaton_from_dict, automaton_to_dict, load_json
from .system import P1, P2

MODELS = ("prob", "dh-pra", "mm-qfa", "mm-bqfa")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"usage: {message}")


def _conv(x):
    if isinstance(x, Fraction):
        return fmt_q(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def _text(obj, indent=0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}-")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {v}")
    else:
        lines.append(f"{pad}{obj}")
    return lines


def _emit(obj, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "text":
        out.write("\n".join(_text(obj)) + "\n")
    else:
        out.write(json.dumps(obj, indent=2, default=_conv) + "\n")


def _load_language(path: str) -> R1Language:
    return R1Language.from_dict(load_json(path))


def _analysis(L, with_forbidden, max_m=4, allow_empty_final=False):
    t0 = time.perf_counter()
    cons = decide_consistency(L)
    t1 = time.perf_counter()
    report = {"language": L.to_dict(), **cons.to_dict(), "forbidden": None}
    timings = {"lp_seconds": round(t1 - t0, 6)}
    if with_forbidden:
        w = find_forbidden(L, max_m=max_m, allow_empty_final=allow_empty_final)
        timings["forbidden_seconds"] = round(time.perf_counter() - t1, 6)
        report["forbidden"] = {"found": w is not None, "witness": None if w is None else w.to_dict()}
    report["timings"] = timings
    return cons, report


def cmd_analyze(args) -> int:
    L = _load_language(args.language)
    cons, report = _analysis(L, args.forbidden, args.max_m, args.allow_empty_final)
    _emit(report, args.format)
    return 0 if cons.consistent else 1


def _pick_n(cons, size, model, n):
    if model == "prob":
        return None
    if n is not None:
        if n < 1:
            raise InputError("--n must be positive")
        return n
    return default_n(cons, size, "mm-qfa" if model == "mm-qfa" else "dh-pra")


def _build(L, cons, model, n, max_states):
    size = len(L.alphabet)
    total = count_states(size, n or 1, model)
    print(json.dumps({"model": model, "n": n, "states": total, "max_states": max_states}), file=sys.stderr)
    if model == "prob":
        return build_composite(L, cons)
    if model == "dh-pra":
        return build_dhpra(L, cons, n, max_states=max_states)
    if model == "mm-qfa":
        return build_mmqfa(L, cons, n, max_states=max_states)
    return lift_to_bqfa(build_dhpra(L, cons, n, max_states=max_states))


def cmd_construct(args) -> int:
    L = _load_language(args.language)
    cons, report = _analysis(L, False)
    if not cons.consistent:
        _emit({"refused": "language is not recognizable", "analysis": report}, args.format)
        return 1
    n = _pick_n(cons, len(L.alphabet), args.model, args.n)
    a = _build(L, cons, args.model, n, args.max_states)
    text = json.dumps(automaton_to_dict(a), indent=1)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        _emit({"written": args.output, "model": args.model, "n": n, "states": len(a.partition)}, args.format)
    else:
        sys.stdout.write(text + "\n")
    return 0


def cmd_simulate(args) -> int:
    a = automaton_from_dict(load_json(args.automaton))
    for w in args.words:
        a.alphabet.check_word(w)
    dists = accept_probabilities(a, args.words, workers=args.workers)
    for w, d in zip(args.words, dists):
        rec = d.to_dict(w)
        if args.format == "text":
            sys.stdout.write(f"{w!r}: p_acc={rec['p_acc']} p_rej={rec['p_rej']} residual={rec['residual']}\n")
        else:
            sys.stdout.write(json.dumps(rec) + "\n")
    return 0


def cmd_verify(args) -> int:
    L = _load_language(args.language)
    cons, report = _analysis(L, False)
    if not cons.consistent:
        _emit({"refused": "language is not recognizable", "analysis": report}, args.format)
        return 1
    size = len(L.alphabet)
    n = _pick_n(cons, size, args.model, args.n)
    a = _build(L, cons, args.model, n, args.max_states)
    max_len = args.max_len if args.max_len is not None else size + 1
    rep = verify_recognition(
        a, L, max_len=max_len, workers=args.workers, tau_invariant=(args.model == "prob")
    )
    w = cons.witness
    p1, p2 = w[P1], w[P2]
    out = {"model": args.model, "n": n, "max_len": max_len, "witness_gap": fmt_q(p2 - p1)}
    if args.model in ("dh-pra", "mm-bqfa"):
        out["certified_gap_lower_bound"] = dhpra_certificate(p1, p2, size, n)
    if args.model == "mm-qfa":
        z = (p2 - p1) / 3
        bound = float(z) / n ** alpha(size - 1)
        out["asymptotic_gap_bound"] = bound
        out["asymptotic_gap_bound_met"] = rep.gap is not None and float(rep.gap) >= bound
        out["certified_scaled_gap_lower_bound"] = mmqfa_certificate(p1, p2, size, n)
    out.update(rep.to_dict(table=args.table))
    out["pass"] = rep.verdict
    _emit(out, args.format)
    return 0 if rep.verdict else 1


def cmd_forbidden(args) -> int:
    L = _load_language(args.language)
    w = find_forbidden(L, max_m=args.max_m, allow_empty_final=args.allow_empty_final)
    _emit({"found": w is not None, "witness": None if w is None else w.to_dict()}, args.format)
    return 0


def _load_channel(path) -> CpMap:
    c = CpMap.from_dict(load_json(path))
    c.dim  # noqa: B018  (raises for non-square maps)
    return c


def _complex_matrix(M) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M)]


def cmd_cpmap(args) -> int:
    if args.action == "check":
        c = _load_channel(args.files[0])
        flags = channel_predicates(c)
        flags["superoperator_norm"] = operator_norm(superoperator(c))
        _emit({"dim": c.dim, "predicates": flags}, args.format)
        return 0
    if args.action == "omega":
        c = _load_channel(args.files[0])
        E, info = omega_limit(c, full_output=True)
        report = {
            "dim": c.dim,
            "method": info.method,
            "confidence": info.confidence,
            "idempotency_error": info.idempotency_error,
            "peripheral_eigenvalues": [[float(z.real), float(z.imag)] for z in info.peripheral],
            "superoperator": _complex_matrix(np.round(E, 15) + 0.0),
        }
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                json.dump(report, fh)
            report = {k: v for k, v in report.items() if k != "superoperator"} | {"written": args.output}
        _emit(report, args.format)
        return 0
    maps = []
    for f in args.files:
        c = _load_channel(f)
        maps.append(omega_limit(c) if args.limits else superoperator(c))
    rep = verify_bist_ej(maps, n_perms=args.perms, rng=np.random.default_rng(args.seed))
    _emit({"maps": len(maps), **rep.to_dict()}, args.format)
    return 0 if rep.ok else 1


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS, help="worker processes for corpus simulation")
    common.add_argument("--max-states", type=int, default=argparse.SUPPRESS, help="refuse larger constructions")
    common.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS)

    p = _Parser(prog="r1qfa", description=__doc__.splitlines()[0], parents=[common])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", parents=[common], help="decide recognizability")
    a.add_argument("language")
    a.add_argument("--forbidden", action="store_true", help="also search for a forbidden construction")
    a.add_argument("--max-m", type=int, default=4)
    a.add_argument("--allow-empty-final", action="store_true")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("construct", parents=[common], help="build a recognizing automaton")
    c.add_argument("language")
    c.add_argument("--model", choices=MODELS, required=True)
    c.add_argument("--n", type=int, default=None)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_construct)

    s = sub.add_parser("simulate", parents=[common], help="run an automaton file on words")
    s.add_argument("automaton")
    s.add_argument("words", nargs="*", default=[""])
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", parents=[common], help="construct and test on all short words")
    v.add_argument("language")
    v.add_argument("--model", choices=MODELS, required=True)
    v.add_argument("--n", type=int, default=None)
    v.add_argument("--max-len", type=int, default=None)
    v.add_argument("--table", action="store_true", help="include the per-word table")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("forbidden", parents=[common], help="search for a forbidden construction")
    f.add_argument("language")
    f.add_argument("--max-m", type=int, default=4)
    f.add_argument("--allow-empty-final", action="store_true")
    f.set_defaults(func=cmd_forbidden)

    q = sub.add_parser("cpmap", parents=[common], help="channel utilities")
    q.add_argument("action", choices=("check", "omega", "bistEJ"))
    q.add_argument("files", nargs="+")
    q.add_argument("-o", "--output")
    q.add_argument("--perms", type=int, default=12)
    q.add_argument("--limits", action="store_true", help="bistEJ: replace each map by its idempotent limit first")
    q.set_defaults(func=cmd_cpmap)
    return p


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
        for name, default in (("seed", 0), ("workers", 1), ("max_states", None), ("format", "json")):
            if not hasattr(args, name):
                setattr(args, name, default)
        return args.func(args)
    except (InputError, ValidationError, ConstructionError) as exc:
        sys.stdout.write(json.dumps({"error": str(exc)}) + "\n")
        return 2
    except (NumericalError, SemanticsError) as exc:
        sys.stdout.write(json.dumps({"error": str(exc)}) + "\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
