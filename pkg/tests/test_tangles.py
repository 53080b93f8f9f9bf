"""Diagram calculus: composition, calibration, transport, generation, render."""

import random
from fractions import Fraction

import pytest

from tlbases.algebra import TLAlgebra
from tlbases.coxeter import CoxeterGraph
from tlbases.laurent import DELTA, ONE, LaurentPoly, RationalLaurent
from tlbases.tangles import (
    DiagramCalculus,
    DiagramElement,
    ReductionError,
    RuleSet,
    Tangle,
    calibrate_ruleset,
    classify_diagram,
    compose_raw,
    enumerate_b_canonical,
    enumerate_h_admissible,
    expand_squares,
    format_tangle,
    generate_by_procedures,
    generator_U,
    identity_tangle,
    iota,
    loop_count,
    parse_tangle,
    recognize_b_canonical,
    render,
    verify_relations,
)

RULES_H = calibrate_ruleset("H")
RULES_B = calibrate_ruleset("B")
CALC_H = DiagramCalculus(RULES_H)
CALC_B = DiagramCalculus(RULES_B)


def tangle_of(text):
    return parse_tangle(text)


def test_tangle_validation():
    with pytest.raises(ValueError):
        Tangle(3, 3, [(("N", 1), ("N", 2), ()), (("N", 3), ("S", 1), ()),
                      (("S", 2), ("S", 3), ()), (("N", 1), ("S", 1), ())])
    with pytest.raises(ValueError):
        # crossing matching
        Tangle(2, 2, [(("N", 1), ("S", 2), ()), (("N", 2), ("S", 1), ())])
    with pytest.raises(ReductionError):
        # nested (shielded) edge cannot carry a decoration
        Tangle(2, 2, [(("N", 1), ("S", 1), ()), (("N", 2), ("S", 2), ("c",))])
    with pytest.raises(ValueError):
        Tangle(2, 1, [])


def test_serialization_round_trip():
    cases = [
        identity_tangle(2),
        generator_U("H", 3, 1),
        tangle_of("n=4; N1-N4[s]; N2-N3; S1-S2[c]; S3-S4"),
        tangle_of("n=2,m=4; N1-N2[cc]; S1-S4; S2-S3"),
    ]
    for t in cases:
        assert parse_tangle(format_tangle(t)) == t
    assert format_tangle(generator_U("H", 3, 1)) == "n=3; N1-N2[c]; S1-S2[c]; N3-S3"


def test_generator_examples():
    u1 = generator_U("H", 3, 1)
    assert format_tangle(u1) == "n=3; N1-N2[c]; S1-S2[c]; N3-S3"
    u2 = generator_U("H", 3, 2)
    assert format_tangle(u2) == "n=3; N2-N3; S2-S3; N1-S1"
    for n in (3, 4, 5):
        for i in range(1, n):
            u = generator_U("B", n, i)
            info = classify_diagram(u)
            assert info.H_admissible and info.B_admissible
    with pytest.raises(ValueError):
        generator_U("H", 3, 3)


def test_compose_examples():
    u2 = generator_U("H", 4, 2)
    t, loops = compose_raw(u2, u2)
    assert t == u2 and loops == ((),)

    u1 = generator_U("H", 3, 1)
    t, loops = compose_raw(u1, u1)
    assert t == u1 and loops == (("c", "c"),)

    d = tangle_of("n=3; N1-N2[c]; S2-S3; N3-S1[c]")
    t, loops = compose_raw(identity_tangle(3), d)
    assert t == d and loops == ()

    with pytest.raises(ValueError):
        compose_raw(identity_tangle(2), identity_tangle(3))


def test_calibrated_values():
    assert RULES_H.plain_loop == DELTA
    assert RULES_H.circle_loop == LaurentPoly()
    assert RULES_H.alpha == ONE and RULES_H.beta == ONE
    half = Fraction(1, 2)
    assert RULES_B.plain_loop == RationalLaurent.from_integral(DELTA)
    assert RULES_B.circle_loop == RationalLaurent({1: half, -1: half})
    assert RULES_B.alpha == RationalLaurent.const(1)
    assert RULES_B.beta == RationalLaurent()
    assert RULES_B.sigma == RationalLaurent.const(2)
    assert RULES_B.tau == RationalLaurent.const(-1)


def test_calibration_zero_residual_at_ranks_3_and_4():
    for rules in (RULES_H, RULES_B):
        assert verify_relations(rules, 3) == []
        assert verify_relations(rules, 4) == []


def test_ruleset_json_round_trip():
    for rules in (RULES_H, RULES_B):
        assert RuleSet.from_json(rules.to_json()) == rules


def test_reduce_h_braid_relation_diagrams():
    # the five-letter alternating product collapses to 3*(three letters) - one
    lhs = CALC_H.evaluate_word(3, (1, 2, 1, 2, 1))
    rhs = CALC_H.evaluate_word(3, (1, 2, 1)).scale(LaurentPoly.const(3)) \
        - CALC_H.evaluate_word(3, (1,))
    assert lhs == rhs


def test_reduce_b_braid_relation_diagrams():
    lhs = CALC_B.evaluate_word(3, (1, 2, 1, 2))
    rhs = CALC_B.evaluate_word(3, (1, 2)).scale(RationalLaurent.const(2))
    assert lhs == rhs
    # at the bare diagram level the four-letter and two-letter words agree
    u1, u2 = generator_U("B", 3, 1), generator_U("B", 3, 2)
    unscaled = DiagramCalculus(RULES_B)
    e = DiagramElement("B", 3, {u1: RULES_B.one()})
    for t in (u2, u1, u2):
        acc = DiagramElement("B", 3, {})
        for tt, c in e.coeffs:
            raw, loops = compose_raw(tt, t)
            from tlbases.tangles import reduce_composition
            acc = acc + reduce_composition(raw, loops, RULES_B).scale(c)
        e = acc
    short = DiagramElement("B", 3, {u1: RULES_B.one()})
    raw, loops = compose_raw(u1, u2)
    from tlbases.tangles import reduce_composition
    short = reduce_composition(raw, loops, RULES_B)
    assert e == short


def test_evaluate_h_canonical_image_is_single_diagram():
    e = CALC_H.evaluate_word(3, (1, 2, 1)) - CALC_H.evaluate_word(3, (1,))
    assert len(e.coeffs) == 1 and e.coeffs[0][1] == ONE
    t = e.coeffs[0][0]
    assert t == tangle_of("n=3; N1-N2[c]; S1-S2[c]; N3-S3[c]")


def test_loop_count_examples():
    assert loop_count(3, (1, 1)) == 1
    assert loop_count(3, (1, 2)) == 0
    assert loop_count(3, ()) == 0
    assert loop_count(4, (2, 2, 2)) == 2


def test_loop_count_changes_by_at_most_one_under_deletion():
    rng = random.Random(30)
    for _ in range(150):
        n = rng.choice((3, 4))
        word = tuple(rng.randint(1, n - 1) for _ in range(rng.randint(1, 9)))
        base = loop_count(n, word)
        for i in range(len(word)):
            hat = word[:i] + word[i + 1:]
            assert abs(loop_count(n, hat) - base) <= 1


def test_classify_diagram_examples():
    ident = identity_tangle(3)
    info = classify_diagram(ident)
    assert info.H_admissible and info.B_canonical_class == "C1"

    u1 = generator_U("B", 3, 1)
    info = classify_diagram(u1)
    assert info.H_admissible and info.B_canonical_class == "C2"
    assert info.B_admissible

    # a decorated edge with every edge propagating is inadmissible
    bad = Tangle(2, 2, [(("N", 1), ("S", 1), ("c",)), (("N", 2), ("S", 2), ())])
    assert not classify_diagram(bad).H_admissible

    sq = tangle_of("n=3; N1-S1[s]; N2-N3; S2-S3")
    info = classify_diagram(sq)
    assert info.B_canonical_class == "C1'"
    assert not info.H_admissible
    assert info.edge_types == ("p3", "p3", "p1")


def test_homomorphism_on_random_words():
    rng = random.Random(31)
    for family, calc, rules in (("H", CALC_H, RULES_H), ("B", CALC_B, RULES_B)):
        for n in (3, 4):
            alg = TLAlgebra(CoxeterGraph(family, n - 1))
            for _ in range(25):
                word = tuple(rng.randint(1, n - 1) for _ in range(rng.randint(0, 8)))
                lhs = calc.evaluate_word(n, word)
                rhs = DiagramElement(family, n, {})
                for x, c in alg.word_to_basis(word).coords:
                    rhs = rhs + calc.evaluate_word(n, x).scale(rules.lift(c))
                assert lhs == rhs, (family, n, word)


def test_admissible_counts_match_fc_counts():
    for n in (3, 4):
        fc_h = TLAlgebra(CoxeterGraph("H", n - 1)).fc_elements()
        assert len(enumerate_h_admissible(n)) == len(fc_h)
        fc_b = TLAlgebra(CoxeterGraph("B", n - 1)).fc_elements()
        assert len(enumerate_b_canonical(n)) == len(fc_b)


def test_b_canonical_set_at_three_strands():
    cans = enumerate_b_canonical(3)
    assert len(cans) == 7
    squared = [t for t, lam in cans if t.has_squares()]
    assert len(squared) == 2  # the C1' diagram and one C2 diagram with a square
    lams = sorted(lam for _, lam in cans)
    assert lams == [1, 1, 1, 2, 2, 2, 2]


def test_recognize_b_canonical_round_trip():
    for n in (3, 4):
        for t, lam in enumerate_b_canonical(n):
            elem = expand_squares(t, RULES_B).scale(lam)
            hit = recognize_b_canonical(elem, RULES_B)
            assert hit == (t, lam), t
    # something that is not canonical: a bare diagram without its factor 2
    u1 = generator_U("B", 3, 1)
    elem = DiagramElement("B", 3, {u1: RULES_B.one()})
    assert recognize_b_canonical(elem, RULES_B) is None


def test_iota_examples():
    assert iota(CALC_B.one(3), RULES_B) == CALC_H.one(3)
    img = iota(CALC_B.gen_element(3, 1), RULES_B)
    assert img == DiagramElement("H", 3, {generator_U("H", 3, 1): ONE})


def test_iota_injective_on_canonical_set():
    for n in (3, 4):
        images = set()
        for t, lam in enumerate_b_canonical(n):
            elem = expand_squares(t, RULES_B).scale(lam)
            images.add(iota(elem, RULES_B))
        assert len(images) == len(enumerate_b_canonical(n))


def _b_elements(n):
    for t, lam in enumerate_b_canonical(n):
        yield t, lam, expand_squares(t, RULES_B).scale(lam)


def test_iota_equivariance_propagating_edge_move():
    # configuration: propagating edge out of north node p, north p+1,p+2 a cup;
    # when p = 1 and the edge is decorated the stated surgery result leaves the
    # canonical set, so those instances are outside the move's scope
    checked = 0
    for n in (3, 4, 5):
        for t, lam, elem in _b_elements(n):
            for a, b, decs in t.edges:
                if a[0] == "N" and b[0] == "S":
                    p = a[1]
                    cup = next((e for e in t.edges
                                if e[0] == ("N", p + 1) and e[1] == ("N", p + 2)), None)
                    if cup is None or (p == 1 and decs):
                        continue
                    assert cup[2] == ()  # shielded, hence undecorated
                    checked += 1
                    lhs = iota(CALC_B.apply_gen(elem, p, side="left"), RULES_B)
                    rhs = CALC_H.apply_gen(iota(elem, RULES_B), p, side="left")
                    assert lhs == rhs, (n, t, p)
                    if p > 1:
                        # the stated surgery: cup moves under the strand
                        edges = []
                        for e in t.edges:
                            if e == cup:
                                continue
                            if e == (a, b, decs):
                                edges.append((("N", p + 2), b, decs))
                            else:
                                edges.append(e)
                        edges.append((("N", p), ("N", p + 1), ()))
                        expected = Tangle(n, n, edges)
                        got = CALC_B.apply_gen(elem, p, side="left")
                        assert got == expand_squares(expected, RULES_B).scale(lam)
    assert checked > 0


def test_iota_equivariance_square_exchange():
    # i > 1, north i,i+1 squared edge, north i+2,i+3 plain: b_i b_{i+1} swaps
    # them; a squared cup needs west exposure, so the smallest instances live
    # on six strands
    found = 0
    n = 6
    for t, lam, elem in _b_elements(n):
        for i in range(2, n - 2):
            e1 = next((e for e in t.edges
                       if e[0] == ("N", i) and e[1] == ("N", i + 1) and e[2] == ("s",)), None)
            e2 = next((e for e in t.edges
                       if e[0] == ("N", i + 2) and e[1] == ("N", i + 3) and e[2] == ()), None)
            if e1 is None or e2 is None:
                continue
            found += 1
            prod = CALC_B.apply_gen(CALC_B.apply_gen(elem, i + 1, side="left"), i, side="left")
            swapped = []
            for e in t.edges:
                if e == e1:
                    swapped.append((e[0], e[1], ()))
                elif e == e2:
                    swapped.append((e[0], e[1], ("s",)))
                else:
                    swapped.append(e)
            expected = expand_squares(Tangle(n, n, swapped), RULES_B).scale(lam)
            assert prod == expected
            # the stated inverse identity: b_{i+2} b_{i+1} (b_i b_{i+1} D) = D
            inv = CALC_B.apply_gen(CALC_B.apply_gen(prod, i + 1, side="left"),
                                   i + 2, side="left")
            assert inv == elem
            assert iota(prod, RULES_B) == CALC_H.apply_gen(
                CALC_H.apply_gen(iota(elem, RULES_B), i + 1, side="left"), i, side="left")
    assert found > 0


def test_iota_equivariance_square_creation():
    # north 1,2 circled and north 3,4 plain: (b_1 b_2 - 1) D squares the 3,4 edge
    found = 0
    for n in (4, 5):
        for t, lam, elem in _b_elements(n):
            e1 = next((e for e in t.edges
                       if e[0] == ("N", 1) and e[1] == ("N", 2) and e[2] == ("c",)), None)
            e2 = next((e for e in t.edges
                       if e[0] == ("N", 3) and e[1] == ("N", 4) and e[2] == ()), None)
            if e1 is None or e2 is None:
                continue
            found += 1
            prod = CALC_B.apply_gen(CALC_B.apply_gen(elem, 2, side="left"), 1, side="left") - elem
            squared = [e if e != e2 else (e[0], e[1], ("s",)) for e in t.edges]
            assert prod == expand_squares(Tangle(n, n, squared), RULES_B).scale(lam)
            h_elem = iota(elem, RULES_B)
            h_prod = CALC_H.apply_gen(CALC_H.apply_gen(h_elem, 2, side="left"), 1, side="left") - h_elem
            assert iota(prod, RULES_B) == h_prod
    assert found > 0


def test_iota_equivariance_cup_absorption():
    # north i,i+1 plain cup enclosed by an edge j..k: D factors as b_i D'
    for n in (3, 4):
        for t, lam, elem in _b_elements(n):
            for i in range(1, n):
                e1 = next((e for e in t.edges
                           if e[0] == ("N", i) and e[1] == ("N", i + 1) and e[2] == ()), None)
                if e1 is None:
                    continue
                enclosing = [
                    e for e in t.edges
                    if e[0][0] == "N" and e[1][0] == "N"
                    and e[0][1] < i and e[1][1] > i + 1
                ]
                if not enclosing:
                    continue
                e2 = min(enclosing, key=lambda e: e[1][1] - e[0][1])
                j, k = e2[0][1], e2[1][1]
                edges = []
                for e in t.edges:
                    if e == e1:
                        edges.append((("N", i + 1), ("N", k), ()))
                    elif e == e2:
                        edges.append((("N", j), ("N", i), e2[2]))
                    else:
                        edges.append(e)
                dprime = Tangle(n, n, edges)
                dprime_elem = expand_squares(dprime, RULES_B).scale(lam)
                assert CALC_B.apply_gen(dprime_elem, i, side="left") == elem
                assert iota(elem, RULES_B) == CALC_H.apply_gen(
                    iota(dprime_elem, RULES_B), i, side="left")


def test_generate_by_procedures():
    closure_h = generate_by_procedures("H", 3, RULES_H)
    assert len(closure_h) == 9
    singles = {e.coeffs[0][0] for e in closure_h}
    assert singles == set(enumerate_h_admissible(3))

    closure_b = generate_by_procedures("B", 3, RULES_B)
    expected = {expand_squares(t, RULES_B).scale(lam) for t, lam in enumerate_b_canonical(3)}
    assert set(closure_b) == expected

    # applying a single right multiplication to the identity yields a generator
    ids = CALC_H.one(3)
    for i in (1, 2):
        e = CALC_H.apply_gen(ids, i, side="right")
        assert e == CALC_H.gen_element(3, i)


def test_canonical_structure_constants_positive_in_diagram_form():
    # products of canonical-set elements expand with nonnegative coefficients
    cans = [expand_squares(t, RULES_B).scale(lam) for t, lam in enumerate_b_canonical(3)]
    index = {}
    for t, lam in enumerate_b_canonical(3):
        index[max(expand_squares(t, RULES_B).scale(lam).support(),
                  key=lambda s: (s.decoration_count(), s.sort_key()))] = (t, lam)
    for a in cans:
        for b in cans:
            prod = CALC_B.multiply(a, b)
            rem = prod
            while not rem.is_zero():
                shadow = max(rem.support(), key=lambda s: (s.decoration_count(), s.sort_key()))
                hit = recognize_b_canonical  # decomposition via iota helper below
                t, lam = index[shadow]
                exp = expand_squares(t, RULES_B).scale(lam)
                lead = exp.coeff(shadow)
                mu = rem.coeff(shadow) * (Fraction(1) / lead.terms[0][1])
                coeffs = mu.to_integral()
                assert all(c >= 0 for _, c in coeffs.terms), (a, b)
                rem = rem - exp.scale(mu)


def test_render_goldens():
    assert render(identity_tangle(2)) == " |   |\n"
    assert render(generator_U("H", 3, 1)) == " +o--+   |\n         |\n +o--+   |\n"
    svg = render(generator_U("H", 3, 1), "svg")
    assert svg.startswith('<svg xmlns="http://www.w3.org/2000/svg" width="160" height="200">')
    assert '<circle cx="60.0" cy="40.0" r="5"' in svg
    assert svg.endswith("</svg>\n")


def test_render_round_trip_byte_identical():
    cases = [
        identity_tangle(2),
        generator_U("H", 4, 1),
        parse_tangle("n=4; N1-N4[s]; N2-N3; S1-S2[c]; S3-S4"),
    ]
    for t in cases:
        for fmt in ("ascii", "svg"):
            once = render(t, fmt)
            again = render(parse_tangle(format_tangle(t)), fmt)
            assert once == again


def test_deletion_laws_family_b():
    from tlbases.verify import run_suite
    res = run_suite("prop-3.1.9", family="B", rank=3)
    assert res.passed, [c.detail for c in res.checks if not c.passed]
