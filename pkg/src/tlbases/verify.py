"""Named verification suites behind the command-line ``verify`` command.

Each suite re-derives one structural statement from scratch at desk scale
and reports per-check outcomes with replayable counterexamples (fully
serialized words, polynomials and tangles).  Suites never mutate cached
bases, so re-running one produces an identical report.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .algebra import STRATEGIES, TLAlgebra
from .coxeter import CoxeterGraph, bruhat_leq_word, classify_letters
from .laurent import DELTA, ONE, LaurentPoly, classify
from .tangles import (
    DiagramCalculus,
    DiagramElement,
    RuleSet,
    calibrate_ruleset,
    enumerate_b_canonical,
    enumerate_h_admissible,
    format_tangle,
    loop_count,
    recognize_b_canonical,
    verify_relations,
)

__all__ = ["SUITES", "run_suite", "CheckResult", "SuiteResult", "suite_names"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    counterexample: Optional[dict] = None

    def to_json(self):
        out = {"name": self.name, "passed": self.passed, "detail": self.detail}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class SuiteResult:
    suite: str
    family: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self):
        return {
            "suite": self.suite,
            "family": self.family,
            "passed": self.passed,
            "checks": [c.to_json() for c in self.checks],
        }


def _word_str(w) -> str:
    return ",".join(map(str, w)) if w else "e"


def _coords_str(coords) -> list:
    return [{"word": _word_str(w), "poly": str(c)} for w, c in sorted(
        coords.items() if isinstance(coords, dict) else coords,
        key=lambda t: (len(t[0]), t[0]))]


_RULES_CACHE: Dict[str, RuleSet] = {}


def _rules(family: str) -> RuleSet:
    if family not in _RULES_CACHE:
        _RULES_CACHE[family] = calibrate_ruleset(family)
    return _RULES_CACHE[family]


# ---------------------------------------------------------------------------
# transport of the canonical basis to diagrams


def _transport_h(res: SuiteResult, strands: int, rules: RuleSet):
    calc = DiagramCalculus(rules)
    alg = TLAlgebra(CoxeterGraph("H", strands - 1))
    images = {}
    for w, coords in sorted(alg.canonical_table().items(), key=lambda t: (len(t[0]), t[0])):
        elem = DiagramElement("H", strands, {})
        for x, c in sorted(coords.items()):
            elem = elem + calc.evaluate_word(strands, x).scale(c)
        single = len(elem.coeffs) == 1 and elem.coeffs[0][1] == ONE
        if not single:
            res.checks.append(CheckResult(
                f"strands-{strands}-single-diagram", False,
                f"canonical element at {_word_str(w)} is not a unit diagram",
                {"word": _word_str(w), "image": repr(elem)}))
            return
        images[w] = elem.coeffs[0][0]
    res.checks.append(CheckResult(
        f"strands-{strands}-single-diagram", True,
        f"all {len(images)} canonical elements map to single diagrams"))
    admissible = enumerate_h_admissible(strands)
    same = set(images.values()) == set(admissible) and len(images) == len(admissible)
    res.checks.append(CheckResult(
        f"strands-{strands}-image-set", same,
        f"image set vs admissible enumeration: {len(images)} vs {len(admissible)}",
        None if same else {"missing": [format_tangle(t) for t in
                                       sorted(set(admissible) - set(images.values()),
                                              key=format_tangle)]}))


def _transport_b(res: SuiteResult, strands: int, rules: RuleSet):
    calc = DiagramCalculus(rules)
    alg = TLAlgebra(CoxeterGraph("B", strands - 1))
    recognized = {}
    for w, coords in sorted(alg.canonical_table().items(), key=lambda t: (len(t[0]), t[0])):
        elem = DiagramElement("B", strands, {})
        for x, c in sorted(coords.items()):
            elem = elem + calc.evaluate_word(strands, x).scale(rules.lift(c))
        hit = recognize_b_canonical(elem, rules)
        if hit is None:
            res.checks.append(CheckResult(
                f"strands-{strands}-canonical-form", False,
                f"image of {_word_str(w)} is not a normalized canonical diagram",
                {"word": _word_str(w), "image": repr(elem)}))
            return
        # normalization restores integer coefficients despite dyadic steps
        for _, c in elem.coeffs:
            c.to_integral()
        recognized[w] = hit
    res.checks.append(CheckResult(
        f"strands-{strands}-canonical-form", True,
        f"all {len(recognized)} canonical elements recognized with integer "
        f"coefficients after normalization"))
    expected = enumerate_b_canonical(strands)
    same = set(recognized.values()) == set(expected) and len(recognized) == len(expected)
    res.checks.append(CheckResult(
        f"strands-{strands}-image-set", same,
        f"image set vs canonical enumeration: {len(recognized)} vs {len(expected)}"))


def suite_transport_h(family: str, rank: Optional[int], opts) -> SuiteResult:
    res = SuiteResult("thm-2.1.3", "H")
    strands_list = (3, 4) if rank is None else (rank + 1,)
    rules = _rules("H")
    for strands in strands_list:
        _transport_h(res, strands, rules)
    return res


def suite_transport_b(family: str, rank: Optional[int], opts) -> SuiteResult:
    res = SuiteResult("thm-2.2.5", "B")
    strands_list = (3, 4) if rank is None else (rank + 1,)
    rules = _rules("B")
    for strands in strands_list:
        _transport_b(res, strands, rules)
    return res


# ---------------------------------------------------------------------------
# the f-basis equals the canonical basis


def _f_equals_canonical(res: SuiteResult, family: str, rank: int):
    alg = TLAlgebra(CoxeterGraph(family, rank))
    canon = alg.canonical_table()
    bad = []
    for e in alg.fc_elements():
        if dict(alg.f_element(e).coords) != dict(canon[e.word]):
            bad.append(e.word)
    res.checks.append(CheckResult(
        f"{family}{rank}-f-equals-canonical", not bad,
        f"{len(alg.fc_elements())} elements compared",
        None if not bad else {"words": [_word_str(w) for w in bad]}))


def suite_f_canonical_h(family, rank, opts) -> SuiteResult:
    res = SuiteResult("thm-3.4.3", "H")
    ranks = (2, 3) if rank is None else (rank,)
    if opts.get("slow") and rank is None:
        ranks = (2, 3, 4)
    for r in ranks:
        _f_equals_canonical(res, "H", r)
    return res


def suite_f_canonical_b(family, rank, opts) -> SuiteResult:
    res = SuiteResult("thm-5.2.1", "B")
    ranks = (2, 3) if rank is None else (rank,)
    if opts.get("slow") and rank is None:
        ranks = (2, 3, 4)
    for r in ranks:
        _f_equals_canonical(res, "B", r)
    return res


# ---------------------------------------------------------------------------
# positivity of canonical structure constants and descent laws


def _positivity(res: SuiteResult, family: str, rank: int):
    alg = TLAlgebra(CoxeterGraph(family, rank))
    elements = alg.fc_elements()
    negative = []
    for x in elements:
        for y in elements:
            sc = alg.structure_constants("canonical", x, y)
            for z, c in sc.items():
                if not classify(c).nonneg:
                    negative.append((x.word, y.word, z, str(c)))
    res.checks.append(CheckResult(
        f"{family}{rank}-positivity", not negative,
        f"{len(elements) ** 2} canonical products expanded",
        None if not negative else {"cases": [
            {"x": _word_str(a), "y": _word_str(b), "z": _word_str(z), "coeff": s}
            for a, b, z, s in negative[:5]]}))

    graph = alg.graph
    by_word = {e.word: e for e in elements}
    side_bad = []
    equiv_bad = []
    for w in elements:
        for i in graph.generators:
            sc = alg.structure_constants("f", w, (i,))
            descent = i in w.right_descents
            scaled = sc == {w.word: DELTA}
            if scaled != descent:
                equiv_bad.append((w.word, i))
            for x, c in sc.items():
                if not classify(c).nonneg:
                    side_bad.append((w.word, i, x, "negative " + str(c)))
                # support satisfies x s_i < x and x <= max(w, w s_i)
                xe = by_word[x]
                if i not in xe.right_descents:
                    side_bad.append((w.word, i, x, "no descent"))
                if descent:
                    ok = bruhat_leq_word(graph, xe, w.word)
                else:
                    ok = bruhat_leq_word(graph, xe, w.word + (i,))
                if not ok:
                    side_bad.append((w.word, i, x, "not below the product bound"))
    res.checks.append(CheckResult(
        f"{family}{rank}-descent-support", not side_bad,
        "support of f-basis right multiplications satisfies the descent and "
        "order bounds",
        None if not side_bad else {"cases": [
            {"w": _word_str(a), "i": i, "x": _word_str(x), "why": why}
            for a, i, x, why in side_bad[:5]]}))
    res.checks.append(CheckResult(
        f"{family}{rank}-descent-equivalence", not equiv_bad,
        "right multiplication scales by the loop value exactly at descents",
        None if not equiv_bad else {"cases": [
            {"w": _word_str(a), "i": i} for a, i in equiv_bad[:5]]}))


def suite_positivity_h(family, rank, opts) -> SuiteResult:
    res = SuiteResult("prop-4.1.9", "H")
    _positivity(res, "H", rank or 3)
    return res


def suite_positivity_b(family, rank, opts) -> SuiteResult:
    res = SuiteResult("prop-5.2.2", "B")
    _positivity(res, "B", rank or 3)
    return res


# ---------------------------------------------------------------------------
# the generator identities relating block substitutions to mixed products


def suite_block_identities(family, rank, opts) -> SuiteResult:
    res = SuiteResult("lemma-3.3.6", "H")
    alg = TLAlgebra(CoxeterGraph("H", rank or 3))

    def t(i):
        return alg.ttilde_element((i,))

    def prod(*factors):
        acc = alg.one()
        for f in factors:
            acc = alg.multiply(acc, f)
        return acc

    def scaled(elem, k):
        return elem.scale(LaurentPoly.monomial(-k))

    for a, b in ((1, 2), (2, 1)):
        lhs1 = alg.word_to_basis((a, b, a)) - alg.word_to_basis((a,))
        rhs1 = prod(t(a), t(b), t(a)) + scaled(prod(t(b), t(a)), 1) \
            + scaled(t(a), 2) + scaled(prod(t(a), t(b)), 1) \
            + scaled(t(b), 2) + alg.one().scale(LaurentPoly.monomial(-3))
        res.checks.append(CheckResult(
            f"identity-i-{a}{b}", lhs1 == rhs1,
            f"three-letter product in generators {a},{b}"))

        lhs2 = alg.word_to_basis((a, b, a, b)) - alg.word_to_basis((a, b)).scale(2)
        rhs2 = prod(t(a), t(b), t(a), t(b)) + scaled(prod(t(a), t(b), t(a)), 1) \
            + scaled(prod(t(b), t(a), t(b)), 1) + scaled(prod(t(a), t(b)), 2) \
            + scaled(t(b), 3) + scaled(prod(t(b), t(a)), 2) \
            + scaled(t(a), 3) + alg.one().scale(LaurentPoly.monomial(-4))
        res.checks.append(CheckResult(
            f"identity-ii-{a}{b}", lhs2 == rhs2,
            f"four-letter product in generators {a},{b}"))
    return res


# ---------------------------------------------------------------------------
# deletion laws: loop counts, lattice degree, letter classification


def suite_deletion(family, rank, opts) -> SuiteResult:
    fam = family or "H"
    r = rank or 3
    res = SuiteResult("prop-3.1.9", fam)
    alg = TLAlgebra(CoxeterGraph(fam, r))
    strands = r + 1
    mono_bad = []
    agree_bad = []
    for e in alg.fc_elements():
        cls = classify_letters(alg.graph, e.word)
        assert loop_count(strands, e.word) == 0
        for l in range(e.length):
            hat = e.word[:l] + e.word[l + 1:]
            loops = loop_count(strands, hat)
            if loops > 1:
                mono_bad.append((e.word, l))
                continue
            deg = alg.lattice_degree(alg.word_to_basis(hat), "L_H")
            marked = cls.is_internal(l) or cls.critical[l] in ("i", "ii", "iii")
            if (deg == 1) != marked or (loops == 1) != marked:
                agree_bad.append((e.word, l, str(deg), loops, marked))
    res.checks.append(CheckResult(
        f"{fam}{r}-loop-monotonicity", not mono_bad,
        "deleting one letter never adds more than one loop",
        None if not mono_bad else {"cases": [
            {"word": _word_str(w), "position": l} for w, l in mono_bad[:5]]}))
    res.checks.append(CheckResult(
        f"{fam}{r}-deletion-classification", not agree_bad,
        "lattice degree rises exactly at internal or critical letters, "
        "matching the loop oracle in both directions",
        None if not agree_bad else {"cases": [
            {"word": _word_str(w), "position": l, "degree": d,
             "loops": lo, "marked": m}
            for w, l, d, lo, m in agree_bad[:5]]}))
    return res


# ---------------------------------------------------------------------------
# rewriting confluence


def suite_confluence(family, rank, opts) -> SuiteResult:
    fam = family or "H"
    res = SuiteResult("confluence", fam)
    count = int(opts.get("count", 10_000))
    rng = random.Random(20_000 + {"A": 0, "B": 1, "H": 2}[fam])
    ranks = (3, 4) if rank is None else (rank,)
    per_rank = count // len(ranks)
    mismatches = []
    for r in ranks:
        alg = TLAlgebra(CoxeterGraph(fam, r))
        for _ in range(per_rank):
            word = tuple(rng.randint(1, r) for _ in range(rng.randint(0, 12)))
            outs = [alg.word_to_basis(word, s) for s in STRATEGIES]
            if not (outs[0] == outs[1] == outs[2]):
                mismatches.append((r, word))
    res.checks.append(CheckResult(
        f"{fam}-confluence", not mismatches,
        f"{per_rank * len(ranks)} random words of length <= 12 reduced under "
        f"{len(STRATEGIES)} strategies",
        None if not mismatches else {"cases": [
            {"rank": r, "word": _word_str(w)} for r, w in mismatches[:5]]}))
    return res


# ---------------------------------------------------------------------------
# calibration as a suite


def suite_calibration(family, rank, opts) -> SuiteResult:
    fam = family or "H"
    res = SuiteResult("calibration", fam)
    try:
        rules = calibrate_ruleset(fam)
    except Exception as exc:  # CalibrationError or solver trouble
        res.checks.append(CheckResult("solve", False, str(exc)))
        return res
    res.checks.append(CheckResult("solve", True, str(rules.to_json())))
    for strands in (3, 4):
        bad = verify_relations(rules, strands)
        res.checks.append(CheckResult(
            f"residual-strands-{strands}", not bad,
            "all defining relations hold" if not bad else "; ".join(bad)))
    return res


SUITES = {
    "thm-2.1.3": ("H", suite_transport_h),
    "thm-2.2.5": ("B", suite_transport_b),
    "thm-3.4.3": ("H", suite_f_canonical_h),
    "thm-5.2.1": ("B", suite_f_canonical_b),
    "prop-4.1.9": ("H", suite_positivity_h),
    "prop-5.2.2": ("B", suite_positivity_b),
    "lemma-3.3.6": ("H", suite_block_identities),
    "prop-3.1.9": (None, suite_deletion),
    "confluence": (None, suite_confluence),
    "calibration": (None, suite_calibration),
}


def suite_names() -> Tuple[str, ...]:
    return tuple(sorted(SUITES))


def run_suite(name: str, family: Optional[str] = None,
              rank: Optional[int] = None, **opts) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(suite_names())}")
    fixed_family, fn = SUITES[name]
    if fixed_family is not None and family is not None and family != fixed_family:
        raise ValueError(f"suite {name} is specific to family {fixed_family}")
    return fn(family or fixed_family, rank, opts)
