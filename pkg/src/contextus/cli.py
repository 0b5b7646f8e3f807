"""``contextus`` command line: pentagram faces, scenario files, AvN triples, roots."""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations
from typing import Sequence

from . import __version__

VERDICTS = frozenset(
    {
        "CONSISTENT",
        "INCONSISTENT",
        "FEASIBLE",
        "INFEASIBLE",
        "NONCONTEXTUAL",
        "PROBABILISTIC",
        "POSSIBILISTIC",
        "STRONG",
        "OK",
        "VIOLATION",
    }
)
EXIT_MATCH, EXIT_DIFFERS, EXIT_INPUT = 0, 1, 2
BUNDLED = {"ghz": "ghz.scenario.json", "prbox": "prbox.scenario.json"}

_GREEN, _RED, _RESET = "\x1b[32m", "\x1b[31m", "\x1b[0m"


class InputError(Exception):
    """Bad user input; reported on stderr with exit code 2."""


@dataclass
class Report:
    title: str
    verdict: str
    sections: list[tuple[str, list[str]]] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    exit_code: int = EXIT_MATCH

    def __post_init__(self) -> None:
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    def add(self, heading: str, lines: Sequence[str]) -> None:
        self.sections.append((heading, list(lines)))

    def render(self, color: bool = False) -> str:
        verdict = self.verdict
        if color:
            tint = _GREEN if self.exit_code == EXIT_MATCH else _RED
            verdict = f"{tint}{verdict}{_RESET}"
        out = [self.title, "=" * len(self.title)]
        for heading, lines in self.sections:
            out.append("")
            out.append(f"{heading}:")
            out.extend(f"  {line}" for line in lines)
        out.append("")
        out.append(f"verdict: {verdict}")
        return "\n".join(out) + "\n"

    def to_json(self) -> str:
        doc = {"title": self.title, "verdict": self.verdict, "exit_code": self.exit_code}
        doc.update(self.summary)
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def use_color(stream) -> bool:
    mode = os.environ.get("CONTEXTUS_COLOR", "auto").lower()
    if mode == "always":
        return True
    if mode == "never":
        return False
    if mode != "auto":
        raise InputError(f"CONTEXTUS_COLOR must be auto, always or never, not {mode!r}")
    return hasattr(stream, "isatty") and stream.isatty()


def _worst(codes: Sequence[int]) -> int:
    return max(codes, default=EXIT_MATCH)


# --------------------------------------------------------------------------
# pentagram


def cmd_pentagram(args: argparse.Namespace) -> Report:
    from .hilbert import generated_algebra_dimension, ghz_state
    from .parity import ghz_contexts, mermin_system, pentagram_contexts, pentagram_observables
    from .parity import solve, state_dependent_system
    from .presheaf import global_sections, pspec_functor_points, rings_from_system, spectral_presheaf

    codes = []
    system = mermin_system()
    report_ = solve(system)
    cert = sorted(report_.certificate.rows) if report_.certificate else []
    rpt = Report("Mermin pentagram", report_.verdict)
    rpt.add(
        "state-independent parity system",
        [row.render() + f"    [{row.provenance}]" for row in system.rows]
        + [f"{report_.verdict}; certificate rows {[r + 1 for r in cert]}"]
        + list(report_.derivation),
    )
    codes.append(EXIT_MATCH if not report_.consistent and len(cert) == 5 else EXIT_DIFFERS)
    rpt.summary["parity"] = {"verdict": report_.verdict, "certificate": [r + 1 for r in cert]}

    if args.state_dependent:
        sd = solve(state_dependent_system(ghz_state(3), ghz_contexts("Y")))
        rhs = list(sd.system.rhs_bits)
        rpt.add(
            "state-dependent system (GHZ eigenvalues)",
            [row.render() + f"    [{row.provenance}]" for row in sd.system.rows]
            + [
                f"rhs bits {tuple(rhs)}",
                "contexts use Y letters; with Z letters the GHZ state is not an eigenvector of X1Z2Z3",
                sd.verdict,
            ]
            + list(sd.derivation),
        )
        codes.append(EXIT_MATCH if not sd.consistent and rhs == [0, 1, 1, 1] else EXIT_DIFFERS)
        rpt.summary["state_dependent"] = {"verdict": sd.verdict, "rhs": rhs}

    if args.presheaf:
        sp = spectral_presheaf(pentagram_contexts())
        n = len(global_sections(sp))
        rpt.add(
            "spectral presheaf",
            [
                f"{len(sp.poset.elements)} poset elements, functorial: {sp.check_functoriality()}",
                "no global sections" if n == 0 else f"{n} global sections",
            ],
        )
        codes.append(EXIT_MATCH if n == 0 else EXIT_DIFFERS)
        rpt.summary["presheaf_global_sections"] = n

    if args.pspec:
        rings, poset = rings_from_system(state_dependent_system(ghz_state(3), ghz_contexts("Y")))
        pts = pspec_functor_points(rings, poset)
        lines = [rings[e].presentation() for e in poset.elements]
        lines.append("functor has no points" if not pts else f"functor has {len(pts)} points")
        rpt.add("PSpec functor over the GHZ coordinate rings", lines)
        codes.append(EXIT_MATCH if not pts else EXIT_DIFFERS)
        rpt.summary["pspec_points"] = len(pts)

    if args.algebra:
        dim = generated_algebra_dimension(pentagram_observables())
        rpt.add("operator algebra", [f"generated algebra dimension {dim} ≅ M₈(ℂ)" if dim == 64 else f"generated algebra dimension {dim}"])
        codes.append(EXIT_MATCH if dim == 64 else EXIT_DIFFERS)
        rpt.summary["algebra_dimension"] = dim

    rpt.exit_code = _worst(codes)
    return rpt


# --------------------------------------------------------------------------
# scenario


def _load_scenario(path: str):
    from .scenario import ScenarioError, loads_model

    if path in BUNDLED:
        text = resources.files("contextus.data").joinpath(BUNDLED[path]).read_text(encoding="utf-8")
        label = BUNDLED[path]
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"{path}: {exc.strerror}") from exc
        label = os.path.basename(path)
    try:
        return label, loads_model(text)
    except (ScenarioError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def cmd_scenario(args: argparse.Namespace) -> Report:
    from .scenario import check_no_signalling, classify, format_section

    label, model = _load_scenario(args.path)
    ns = check_no_signalling(model)
    if not ns.ok:
        rpt = Report(f"scenario {label}", "VIOLATION", exit_code=EXIT_INPUT)
        rpt.add("no-signalling", [str(v) for v in ns.violations])
        rpt.summary["no_signalling"] = False
        return rpt
    cls = classify(model)
    rpt = Report(f"scenario {label}", cls.verdict)
    rpt.add(
        "cover",
        [f"C{i + 1}: {', '.join(c)}" for i, c in enumerate(model.cover.contexts)],
    )
    rpt.add("no-signalling", ["OK"])
    lines = [f"level: {cls.level}"]
    if cls.strong:
        for k, cands in sorted(cls.elimination.items()):
            lines.append(f"without C{k + 1}: {len(cands)} global sections")
    if cls.non_extendable is not None:
        i, sec = cls.non_extendable
        lines.append(f"C{i + 1} section {format_section(sec)} extends to no global section")
    if cls.global_distribution is not None:
        for sec, w in sorted(cls.global_distribution.items()):
            lines.append(f"global weight {w} on {format_section(sec)}")
    if not args.level:
        rpt.add("classification", lines)
    rpt.summary.update({"no_signalling": True, "level": cls.level})
    return rpt


# --------------------------------------------------------------------------
# avn


def cmd_avn(args: argparse.Namespace) -> Report:
    from .hilbert import NotStabilisedError, ghz_state
    from .pauli import PauliParseError, commutes, parse_pauli
    from .scenario import avn_check

    texts = [t.strip() for t in args.generators.split(";") if t.strip()]
    if not texts:
        raise InputError("--generators is empty")
    gens = []
    for t in texts:
        try:
            gens.append(parse_pauli(t))
        except PauliParseError as exc:
            raise InputError(f"generator {t!r}: {exc}") from exc
    if len({g.n for g in gens}) != 1:
        raise InputError("generators act on different numbers of qubits")
    for a, b in combinations(gens, 2):
        if not commutes(a, b):
            raise InputError(f"precondition: {a} and {b} do not commute")
    state = None
    if args.state:
        if args.state != "ghz":
            raise InputError(f"unknown state {args.state!r} (only 'ghz' is built in)")
        state = ghz_state(gens[0].n)
    try:
        rep = avn_check(gens, state, require_triple=False)
    except NotStabilisedError as exc:
        raise InputError(str(exc)) from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc

    is_triple = rep.triple is not None and rep.triple.is_triple
    verdict = rep.parity.verdict
    if state is not None and rep.classification is not None:
        verdict = rep.classification.verdict
    rpt = Report("all-versus-nothing check", verdict)
    triple_line = "AvN triple: yes" if is_triple else "AvN triple: no"
    if rep.triple is not None:
        triple_line += f" ({rep.triple.reason})"
    elif len(gens) != 3:
        triple_line += f" ({len(gens)} generators given)"
    lines = [
        triple_line,
        f"subgroup order {len(rep.subgroup)}",
        f"system {rep.parity.verdict}",
    ]
    if state is not None:
        lines.append(f"model {rep.classification.verdict if rep.classification else 'n/a'}")
    rpt.add("result", lines)
    if not rep.parity.consistent:
        rpt.add("derivation", list(rep.parity.derivation))
    rpt.summary.update(
        {
            "triple": is_triple,
            "subgroup_order": len(rep.subgroup),
            "system": rep.parity.verdict,
            "model": rep.classification.verdict if (state is not None and rep.classification) else None,
        }
    )
    if is_triple:
        ok = not rep.parity.consistent and (state is None or (rep.classification and rep.classification.strong))
        rpt.exit_code = EXIT_MATCH if ok else EXIT_DIFFERS
    return rpt


# --------------------------------------------------------------------------
# roots


def cmd_roots(args: argparse.Namespace) -> Report:
    from .parity import pentagram_contexts
    from .roots import colouring_search, coxeter_graph, orthogonal_bases, rays_from_contexts
    from .roots import reflection_closure, write_roots

    codes = []
    rays = rays_from_contexts(pentagram_contexts())
    lines = [f"{len(rays)} rays"]
    codes.append(EXIT_MATCH if len(rays) == 40 else EXIT_DIFFERS)
    summary: dict = {"rays": len(rays)}
    verdict = "OK"
    system = None
    if args.complete or args.identify or args.export:
        system = reflection_closure(rays)
        summary["roots"] = len(system)
        codes.append(EXIT_MATCH if len(system) == 240 else EXIT_DIFFERS)
    if args.complete or args.identify:
        line = f"{len(rays)} rays → {len(system)} roots"
        if args.identify:
            graph = coxeter_graph(system)
            line += f"; diagram: {graph.classification}"
            summary["diagram"] = graph.classification
            codes.append(EXIT_MATCH if graph.classification == "E8" else EXIT_DIFFERS)
        lines = [line, f"antipodal pairs {system.antipodal_pairs()}"]
    if args.export:
        try:
            write_roots(system, args.export)
        except OSError as exc:
            raise InputError(f"{args.export}: {exc.strerror}") from exc
        lines.append(f"wrote {len(system)} roots to {args.export}")
    if args.colouring:
        bases = orthogonal_bases(rays)
        res = colouring_search(len(rays), bases)
        verdict = res.verdict
        lines.append(f"{len(bases)} orthogonal bases")
        lines.append(f"colouring {res.verdict} after {res.nodes} search nodes")
        if not res.feasible:
            lines.append(f"last conflict at basis {[b + 1 for b in res.conflict]}")
        summary.update({"bases": len(bases), "colouring": res.verdict, "nodes": res.nodes})
        codes.append(EXIT_MATCH if not res.feasible else EXIT_DIFFERS)
    rpt = Report("pentagram rays and roots", verdict, summary=summary)
    rpt.add("geometry", lines)
    rpt.exit_code = _worst(codes)
    return rpt


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON summary instead of text")

    parser = argparse.ArgumentParser(prog="contextus", description="Exact checks of Kochen-Specker style contradictions.")
    parser.add_argument("--version", action="version", version=f"contextus {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pentagram", parents=[common], help="parity proof and its other faces")
    p.add_argument("--state-dependent", action="store_true", help="GHZ eigenvalue version")
    p.add_argument("--presheaf", action="store_true", help="global sections of the spectral presheaf")
    p.add_argument("--pspec", action="store_true", help="points of the coordinate-ring functor")
    p.add_argument("--algebra", action="store_true", help="dimension of the generated algebra")
    p.set_defaults(func=cmd_pentagram)

    s = sub.add_parser("scenario", parents=[common], help="classify an empirical model file")
    s.add_argument("path", help="scenario JSON file, or a bundled name: " + ", ".join(sorted(BUNDLED)))
    s.add_argument("--level", action="store_true", help="only report the contextuality level")
    s.set_defaults(func=cmd_scenario)

    a = sub.add_parser("avn", parents=[common], help="all-versus-nothing check for Pauli generators")
    a.add_argument("--generators", required=True, help='semicolon-separated Paulis, e.g. "XXX;XYY;YXY"')
    a.add_argument("--state", help="built-in state to measure (ghz)")
    a.set_defaults(func=cmd_avn)

    r = sub.add_parser("roots", parents=[common], help="rays, reflection closure and colouring")
    r.add_argument("--complete", action="store_true", help="close the rays under reflections")
    r.add_argument("--identify", action="store_true", help="classify the Coxeter diagram")
    r.add_argument("--colouring", action="store_true", help="search for a one-per-basis colouring")
    r.add_argument("--export", metavar="PATH", help="write the closed root set to PATH")
    r.set_defaults(func=cmd_roots)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        color = use_color(sys.stdout)
        rpt = args.func(args)
    except InputError as exc:
        print(f"contextus: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(rpt.to_json() if args.json else rpt.render(color))
    return rpt.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
