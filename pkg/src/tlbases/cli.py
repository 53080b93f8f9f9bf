"""Command-line orchestration: enumeration, bases, verification, calibration.

One flat flag surface drives every job: ``--command`` picks the action and
the rest of the flags parameterize it.  Reports are deterministic JSON,
written to ``--out`` or to the directory named by ``TLBASES_REPORT_DIR``.
Exit codes: 0 pass, 2 verification failure, 3 resource cap exceeded,
4 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .algebra import TLAlgebra
from .coxeter import ClassSizeError, CoxeterGraph, GrowthCapError, Word
from .laurent import ONE, ZERO, LaurentPoly, classify
from .tangles import (
    CalibrationError,
    DiagramCalculus,
    DiagramElement,
    RuleSet,
    calibrate_ruleset,
    format_tangle,
    parse_tangle,
    render,
)
from .verify import SUITES, run_suite, suite_names

__all__ = ["JobConfig", "GramCandidate", "gram_check", "run", "main",
           "ConfigError", "natural_gram_candidate"]

REPORT_DIR_ENV = "TLBASES_REPORT_DIR"

EXIT_PASS = 0
EXIT_VERIFY_FAIL = 2
EXIT_RESOURCE = 3
EXIT_CONFIG = 4

COMMANDS = ("enumerate", "basis", "verify", "calibrate", "render", "gram-check")
FORMATS = ("json", "csv", "svg", "text", "ascii")
BASES = ("monomial", "ttilde", "f", "canonical", "diagram")


class ConfigError(ValueError):
    pass


@dataclass
class JobConfig:
    command: str
    family: str = "H"
    rank: Optional[int] = None
    out: Optional[str] = None
    format: str = "json"
    suites: Tuple[str, ...] = ()
    basis: str = "canonical"
    tangle: Optional[str] = None
    ruleset_path: Optional[str] = None
    cap_class_size: int = 1_000_000
    cap_closure: int = 1_000_000
    confluence_count: int = 10_000
    slow: bool = False
    report_dir: str = field(default_factory=lambda: os.environ.get(REPORT_DIR_ENV, "."))

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.family not in ("A", "B", "H"):
            raise ConfigError(f"unknown family {self.family!r}")
        if self.rank is not None and self.rank < 2:
            raise ConfigError("rank must be at least 2")
        if self.cap_class_size <= 0 or self.cap_closure <= 0:
            raise ConfigError("resource caps must be positive")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}")
        if self.basis not in BASES:
            raise ConfigError(f"unknown basis {self.basis!r}")
        if self.command == "verify":
            if not self.suites:
                raise ConfigError("verify requires --suite")
            for s in self.suites:
                if s not in SUITES:
                    raise ConfigError(
                        f"unknown suite {s!r}; known: {', '.join(suite_names())}")
        if self.command == "render" and not self.tangle:
            raise ConfigError("render requires --tangle")
        if self.command in ("calibrate", "render", "gram-check") and self.family == "A":
            raise ConfigError(f"{self.command} applies to families B and H")

    def to_json(self):
        return {
            "command": self.command,
            "family": self.family,
            "rank": self.rank,
            "format": self.format,
            "suites": list(self.suites),
            "basis": self.basis,
            "tangle": self.tangle,
            "cap_class_size": self.cap_class_size,
            "cap_closure": self.cap_closure,
            "confluence_count": self.confluence_count,
            "slow": self.slow,
        }


def _word_str(w) -> str:
    return ",".join(map(str, w)) if w else "e"


# ---------------------------------------------------------------------------
# gram-form checking


@dataclass
class GramCandidate:
    """A symmetric-by-construction bilinear form on the t-basis."""

    graph: CoxeterGraph
    entries: Dict[Tuple[Word, Word], LaurentPoly]

    def entry(self, w: Word, x: Word) -> LaurentPoly:
        return self.entries.get((w, x), ZERO)


def natural_gram_candidate(alg: TLAlgebra) -> GramCandidate:
    """The trace form: pair two basis elements through the identity coefficient.

    The first argument is reversed (an anti-automorphism fixes each
    generator), which makes anti-associativity hold by construction; whether
    the form is nondegenerate and unitriangular is then checked, not assumed.
    """
    words = [e.word for e in alg.fc_elements()]
    entries = {}
    for w in words:
        for x in words:
            prod = alg.multiply(alg.ttilde_element(tuple(reversed(w))),
                                alg.ttilde_element(x))
            entries[(w, x)] = alg.to_basis(prod, "ttilde").coeff(())
    return GramCandidate(alg.graph, entries)


def _exact_det(rows: List[List[LaurentPoly]]) -> LaurentPoly:
    n = len(rows)
    if n > 14:
        raise ValueError("exact determinant limited to 14x14 at this scale")
    dp = {0: ONE}
    for r in range(n):
        nxt: Dict[int, LaurentPoly] = {}
        for mask, val in dp.items():
            for c in range(n):
                bit = 1 << c
                if mask & bit:
                    continue
                cell = rows[r][c]
                if cell:
                    # parity of inversions introduced by placing column c in row r
                    prior = bin(mask & (bit - 1)).count("1")
                    sign = -1 if (r - prior) % 2 else 1
                    term = val * cell * sign
                    cur = nxt.get(mask | bit, ZERO) + term
                    if cur:
                        nxt[mask | bit] = cur
                    elif mask | bit in nxt:
                        del nxt[mask | bit]
        dp = nxt
    return dp.get((1 << n) - 1, ZERO)


def gram_check(alg: TLAlgebra, cand: GramCandidate) -> Dict[str, bool]:
    """Exact checks of the four bilinear-form conditions."""
    words = [e.word for e in alg.fc_elements()]
    symmetric = all(cand.entry(w, x) == cand.entry(x, w)
                    for w in words for x in words)

    left_mult: Dict[int, Dict[Word, Dict[Word, LaurentPoly]]] = {}
    for s in alg.graph.generators:
        ts = alg.ttilde_element((s,))
        table = {}
        for w in words:
            prod = alg.multiply(ts, alg.ttilde_element(w))
            table[w] = dict(alg.to_basis(prod, "ttilde").coords)
        left_mult[s] = table

    def pair(coords: Dict[Word, LaurentPoly], x: Word) -> LaurentPoly:
        acc = ZERO
        for y, c in coords.items():
            acc = acc + c * cand.entry(y, x)
        return acc

    anti = True
    for s in alg.graph.generators:
        for w in words:
            for x in words:
                lhs = pair(left_mult[s][w], x)
                rhs = ZERO
                for y, c in left_mult[s][x].items():
                    rhs = rhs + c * cand.entry(w, y)
                if lhs != rhs:
                    anti = False
    rows = [[cand.entry(w, x) for x in words] for w in words]
    try:
        nondeg = bool(_exact_det(rows))
    except ValueError:
        nondeg = False
    unitri = True
    for i, w in enumerate(words):
        for j, x in enumerate(words):
            diff = cand.entry(w, x) - (ONE if i == j else ZERO)
            if not classify(diff).in_vinv_Aminus:
                unitri = False
    return {
        "symmetric": symmetric,
        "anti_associative": anti,
        "nondegenerate": nondeg,
        "unitriangular_mod_vinv": unitri,
    }


def _gram_solver_dimension(alg: TLAlgebra) -> int:
    """Dimension of the space of symmetric anti-associative forms over Q(v)."""
    import sympy

    words = [e.word for e in alg.fc_elements()]
    index = {w: i for i, w in enumerate(words)}
    n = len(words)
    nvars = n * n
    v = sympy.Symbol("v")

    def poly2sym(p: LaurentPoly):
        return sum((sympy.Integer(c) * v ** e for e, c in p.terms), sympy.Integer(0))

    rows = []
    for w in words:
        for x in words:
            if index[w] < index[x]:
                row = [0] * nvars
                row[index[w] * n + index[x]] = 1
                row[index[x] * n + index[w]] = -1
                rows.append(row)
    for s in alg.graph.generators:
        ts = alg.ttilde_element((s,))
        table = {w: dict(alg.to_basis(alg.multiply(ts, alg.ttilde_element(w)),
                                      "ttilde").coords) for w in words}
        for w in words:
            for x in words:
                row = [sympy.Integer(0)] * nvars
                for y, c in table[w].items():
                    row[index[y] * n + index[x]] += poly2sym(c)
                for y, c in table[x].items():
                    row[index[w] * n + index[y]] -= poly2sym(c)
                if any(row):
                    rows.append(row)
    mat = sympy.Matrix(rows)
    return nvars - mat.rank()


# ---------------------------------------------------------------------------
# command bodies


def _effective_rank(cfg: JobConfig) -> int:
    return cfg.rank if cfg.rank is not None else 3


def _graph(cfg: JobConfig) -> CoxeterGraph:
    return CoxeterGraph(cfg.family, _effective_rank(cfg))


def _cmd_enumerate(cfg: JobConfig) -> Tuple[dict, int]:
    alg = TLAlgebra(_graph(cfg), class_cap=cfg.cap_class_size)
    entries = [{
        "word": _word_str(e.word),
        "length": e.length,
        "content": sorted(e.content),
        "descents": {"left": sorted(e.left_descents),
                     "right": sorted(e.right_descents)},
    } for e in alg.fc_elements()]
    return {"count": len(entries), "elements": entries}, EXIT_PASS


def _rules_for(cfg: JobConfig) -> RuleSet:
    if cfg.ruleset_path:
        with open(cfg.ruleset_path, "r", encoding="utf-8") as fh:
            return RuleSet.from_json(json.load(fh))
    return calibrate_ruleset(cfg.family)


def _cmd_basis(cfg: JobConfig) -> Tuple[dict, int]:
    alg = TLAlgebra(_graph(cfg), class_cap=cfg.cap_class_size)
    body = {"graph": {"family": cfg.family, "rank": _effective_rank(cfg)}, "basis": cfg.basis}
    entries = []
    if cfg.basis == "diagram":
        if cfg.family == "A":
            raise ConfigError("diagram dumps apply to families B and H")
        rules = _rules_for(cfg)
        calc = DiagramCalculus(rules)
        strands = _effective_rank(cfg) + 1
        for w, coords in sorted(alg.canonical_table().items(),
                                key=lambda t: (len(t[0]), t[0])):
            elem = DiagramElement(cfg.family, strands, {})
            for x, c in sorted(coords.items()):
                elem = elem + calc.evaluate_word(strands, x).scale(rules.lift(c))
            entries.append({
                "index_word": _word_str(w),
                "coords": [{"tangle": format_tangle(t), "poly": str(c)}
                           for t, c in elem.coeffs],
            })
    else:
        for e in alg.fc_elements():
            if cfg.basis == "monomial":
                coords = {e.word: ONE}
            elif cfg.basis == "ttilde":
                coords = alg.ttilde_table()[e.word]
            elif cfg.basis == "f":
                coords = alg.f_table()[e.word]
            else:
                coords = alg.canonical_table()[e.word]
            entries.append({
                "index_word": _word_str(e.word),
                "coords": [{"word": _word_str(w), "poly": str(c)}
                           for w, c in sorted(coords.items(),
                                              key=lambda t: (len(t[0]), t[0]))],
            })
    body["entries"] = entries
    return body, EXIT_PASS


def _cmd_verify(cfg: JobConfig) -> Tuple[dict, int]:
    results = []
    opts = {"count": cfg.confluence_count, "slow": cfg.slow}
    all_pass = True
    for name in cfg.suites:
        fixed_family = SUITES[name][0]
        res = run_suite(name, family=fixed_family or cfg.family,
                        rank=cfg.rank, **opts)
        results.append(res.to_json())
        all_pass = all_pass and res.passed
    return ({"suites": results},
            EXIT_PASS if all_pass else EXIT_VERIFY_FAIL)


def _cmd_calibrate(cfg: JobConfig) -> Tuple[dict, int]:
    rules = calibrate_ruleset(cfg.family)
    return {"ruleset": rules.to_json()}, EXIT_PASS


def _cmd_render(cfg: JobConfig) -> Tuple[dict, int]:
    t = parse_tangle(cfg.tangle)
    fmt = "svg" if cfg.format == "svg" else "ascii"
    text = render(t, fmt)
    return {"tangle": format_tangle(t), "format": fmt, "output": text}, EXIT_PASS


def _cmd_gram_check(cfg: JobConfig) -> Tuple[dict, int]:
    rank = cfg.rank if cfg.rank is not None else 2
    alg = TLAlgebra(CoxeterGraph(cfg.family, rank), class_cap=cfg.cap_class_size)
    cand = natural_gram_candidate(alg)
    checks = gram_check(alg, cand)
    body = {
        "candidate": "trace-form",
        "checks": checks,
        "witness_found": all(checks.values()),
    }
    if rank <= 2:
        body["solution_space_dimension"] = _gram_solver_dimension(alg)
    # exploratory: the command reports outcomes and never fails the build
    return body, EXIT_PASS


# ---------------------------------------------------------------------------
# report writing and entry point


def _format_report(body: dict, cfg: JobConfig) -> str:
    if cfg.format == "csv" and cfg.command == "enumerate":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["word", "length", "content", "left_descents", "right_descents"])
        for e in body["results"]["elements"]:
            writer.writerow([
                e["word"], e["length"],
                " ".join(map(str, e["content"])),
                " ".join(map(str, e["descents"]["left"])),
                " ".join(map(str, e["descents"]["right"]))])
        return buf.getvalue()
    if cfg.format == "csv" and cfg.command == "basis":
        buf = io.StringIO()
        writer = csv.writer(buf)
        key = "tangle" if cfg.basis == "diagram" else "word"
        writer.writerow(["index_word", key, "poly"])
        for entry in body["results"]["entries"]:
            for co in entry["coords"]:
                writer.writerow([entry["index_word"], co[key], co["poly"]])
        return buf.getvalue()
    if cfg.format == "text" and cfg.command == "enumerate":
        lines = [f"{'word':<24}{'length':<8}content"]
        for e in body["results"]["elements"]:
            lines.append(f"{e['word']:<24}{e['length']:<8}"
                         f"{' '.join(map(str, e['content']))}")
        return "\n".join(lines) + "\n"
    if cfg.command == "render" and cfg.format in ("ascii", "svg", "text"):
        return body["results"]["output"]
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def run(cfg: JobConfig) -> int:
    """Execute one job; always writes a machine-readable report."""
    try:
        cfg.validate()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    bodies = {
        "enumerate": _cmd_enumerate,
        "basis": _cmd_basis,
        "verify": _cmd_verify,
        "calibrate": _cmd_calibrate,
        "render": _cmd_render,
        "gram-check": _cmd_gram_check,
    }
    try:
        results, code = bodies[cfg.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ClassSizeError, GrowthCapError) as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAIL
    except (ValueError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    body = {
        "config": cfg.to_json(),
        "status": "pass" if code == EXIT_PASS else "fail",
        "results": results,
    }
    text = _format_report(body, cfg)
    out_path = cfg.out
    if out_path is None:
        os.makedirs(cfg.report_dir, exist_ok=True)
        suffix = {"json": "json", "csv": "csv", "svg": "svg",
                  "text": "txt", "ascii": "txt"}[cfg.format]
        out_path = os.path.join(
            cfg.report_dir,
            f"{cfg.command}-{cfg.family}{_effective_rank(cfg)}.{suffix}")
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    # renders and tabular formats keep the JSON report alongside
    if cfg.format != "json":
        json_path = out_path.rsplit(".", 1)[0] + ".report.json"
        with open(json_path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(body, indent=2, sort_keys=True) + "\n")
    return code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tlbases", description=__doc__)
    p.add_argument("--command", required=True, choices=COMMANDS)
    p.add_argument("--family", default="H", choices=("A", "B", "H"))
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", default="json", choices=FORMATS)
    p.add_argument("--suite", action="append", default=[],
                   help="verification suite name; repeatable or comma-separated")
    p.add_argument("--basis", default="canonical", choices=BASES)
    p.add_argument("--tangle", default=None,
                   help="serialized tangle, e.g. 'n=3; N1-N2[c]; S1-S2[c]; N3-S3'")
    p.add_argument("--ruleset", dest="ruleset_path", default=None,
                   help="load a calibrated rule set from JSON instead of solving")
    p.add_argument("--cap-class-size", type=int, default=1_000_000)
    p.add_argument("--cap-closure", type=int, default=1_000_000)
    p.add_argument("--confluence-count", type=int, default=10_000)
    p.add_argument("--slow", action="store_true")
    return p


def config_from_args(argv) -> JobConfig:
    args = build_parser().parse_args(argv)
    suites = []
    for chunk in args.suite:
        suites.extend(s.strip() for s in chunk.split(",") if s.strip())
    return JobConfig(
        command=args.command,
        family=args.family,
        rank=args.rank,
        out=args.out,
        format=args.format,
        suites=tuple(suites),
        basis=args.basis,
        tangle=args.tangle,
        ruleset_path=args.ruleset_path,
        cap_class_size=args.cap_class_size,
        cap_closure=args.cap_closure,
        confluence_count=args.confluence_count,
        slow=args.slow,
    )


def main(argv=None) -> None:
    try:
        cfg = config_from_args(argv)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)
    sys.exit(run(cfg))


if __name__ == "__main__":
    main()
