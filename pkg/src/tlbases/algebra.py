"""Generalized Temperley-Lieb algebras over Z[v, v^-1] by confluent rewriting.

``TLAlgebra`` wraps a Coxeter graph and multiplies in the monomial basis by
rewriting words with the defining relations: an equal adjacent pair
contributes the loop scalar delta, and a half-braid factor of length m
collapses by the m-specific rule (s t s -> s, s t s t -> 2 s t,
s t s t s -> 3 s t s - s).  Every rewrite shortens the word, so reduction
terminates, and confluence lets three different factor-selection strategies
coexist (they are compared by the acceptance suite).

On top of multiplication sit the t-tilde basis, the bar involution, lattice
degrees, the canonical basis computed by the usual bar-invariant correction
recursion, the f-basis built from right-justified block decompositions, and
the auxiliary mixed products used to relate the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .coxeter import (
    CoxeterGraph,
    FcElement,
    Word,
    _leftmost_factor,
    _letters,
    _scan,
    enumerate_fc,
    classify_letters,
    is_fc_reduced,
    normal_form,
    right_justify,
)
from .laurent import DELTA, ONE, V_INV, ZERO, LaurentPoly, classify, invariant_completion

__all__ = [
    "AlgebraElement",
    "TLAlgebra",
    "MixedWord",
    "AuxElements",
    "STRATEGIES",
]

Coords = Dict[Word, LaurentPoly]

STRATEGIES = ("lex-least-leftmost", "lex-greatest-rightmost", "bfs-first")

BASIS_TAGS = ("monomial", "ttilde", "f", "canonical")


def _merge(acc: Coords, coords: Coords, scale: LaurentPoly) -> None:
    if not scale:
        return
    for w, c in coords.items():
        s = acc.get(w, ZERO) + scale * c
        if s:
            acc[w] = s
        elif w in acc:
            del acc[w]


@dataclass(frozen=True)
class AlgebraElement:
    """A finitely supported combination of basis elements, tagged by basis.

    Coordinates are keyed by the normal-form reduced word of the indexing
    fully commutative element; zero coordinates are never stored.  Treat
    instances as immutable.
    """

    family: str
    rank: int
    basis: str
    coords: Tuple[Tuple[Word, LaurentPoly], ...]

    @staticmethod
    def make(graph: CoxeterGraph, basis: str, coords: Coords) -> "AlgebraElement":
        if basis not in BASIS_TAGS:
            raise ValueError(f"unknown basis tag {basis!r}")
        items = tuple(sorted(((w, c) for w, c in coords.items() if c),
                             key=lambda t: (len(t[0]), t[0])))
        return AlgebraElement(graph.family, graph.rank, basis, items)

    def as_dict(self) -> Coords:
        return dict(self.coords)

    def support(self) -> Tuple[Word, ...]:
        return tuple(w for w, _ in self.coords)

    def coeff(self, word: Word) -> LaurentPoly:
        for w, c in self.coords:
            if w == word:
                return c
        return ZERO

    def is_zero(self) -> bool:
        return not self.coords

    def graph(self) -> CoxeterGraph:
        return CoxeterGraph(self.family, self.rank)

    def _check_compatible(self, other: "AlgebraElement"):
        if (self.family, self.rank, self.basis) != (other.family, other.rank, other.basis):
            raise ValueError("elements live in different bases or algebras")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_compatible(other)
        acc = self.as_dict()
        _merge(acc, other.as_dict(), ONE)
        return AlgebraElement.make(self.graph(), self.basis, acc)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_compatible(other)
        acc = self.as_dict()
        _merge(acc, other.as_dict(), LaurentPoly.const(-1))
        return AlgebraElement.make(self.graph(), self.basis, acc)

    def scale(self, c) -> "AlgebraElement":
        poly = LaurentPoly.const(c) if isinstance(c, int) else c
        return AlgebraElement.make(self.graph(), self.basis,
                                   {w: poly * p for w, p in self.coords})

    def __repr__(self):
        if not self.coords:
            return f"AlgebraElement({self.family}{self.rank}, {self.basis}, 0)"
        parts = " + ".join(f"({c})*[{','.join(map(str, w)) or 'e'}]" for w, c in self.coords)
        return f"AlgebraElement({self.family}{self.rank}, {self.basis}, {parts})"


class TLAlgebra:
    """Computational context for one Temperley-Lieb algebra.

    Caches rewriting results, generator multiplications and the basis tables
    keyed by this graph.  All returned objects are immutable; the caches only
    grow, so instances can be shared within a thread of work.
    """

    def __init__(self, graph: CoxeterGraph, class_cap: int = 1_000_000):
        self.graph = graph
        self.class_cap = class_cap
        self._w2b: Dict[Tuple[str, Word], Coords] = {}
        self._gen_mult: Dict[Tuple[Word, int], Coords] = {}
        self._fc: Optional[Tuple[FcElement, ...]] = None
        self._ttilde: Optional[Dict[Word, Coords]] = None
        self._canonical: Optional[Dict[Word, Coords]] = None
        self._f_table: Optional[Dict[Word, Coords]] = None
        self._f_factors: Dict[Word, Tuple[Tuple[Coords, bool], ...]] = {}

    # -- enumeration -------------------------------------------------------

    def fc_elements(self) -> Tuple[FcElement, ...]:
        if self._fc is None:
            self._fc = enumerate_fc(self.graph, class_cap=self.class_cap)
        return self._fc

    def fc_words(self) -> Tuple[Word, ...]:
        return tuple(e.word for e in self.fc_elements())

    # -- rewriting ---------------------------------------------------------

    def _rewrite_branches(self, member: Word, pos: int, size: int):
        s = member[pos]
        head, tail = member[:pos], member[pos + size:]
        if size == 2:
            return [(DELTA, head + (s,) + tail)]
        t = member[pos + 1]
        if size == 3:
            return [(ONE, head + (s,) + tail)]
        if size == 4:
            return [(LaurentPoly.const(2), head + (s, t) + tail)]
        if size == 5:
            return [
                (LaurentPoly.const(3), head + (s, t, s) + tail),
                (LaurentPoly.const(-1), head + (s,) + tail),
            ]
        raise AssertionError(size)

    def _rightmost_factor(self, letters: Word):
        best = None
        n = len(letters)
        for i in range(n - 1):
            s, t = letters[i], letters[i + 1]
            if s == t:
                best = (i, 2)
                continue
            m = self.graph.bond(s, t)
            if m >= 3 and i + m <= n:
                if all(letters[i + k] == (s if k % 2 == 0 else t) for k in range(m)):
                    best = (i, m)
        return best

    def _pick_factor(self, scan, strategy: str):
        if strategy == "lex-least-leftmost":
            for perm in scan.perms_sorted:
                letters = _letters(scan.word, perm)
                hit = _leftmost_factor(self.graph, letters)
                if hit:
                    return letters, hit
        elif strategy == "lex-greatest-rightmost":
            for perm in reversed(scan.perms_sorted):
                letters = _letters(scan.word, perm)
                hit = self._rightmost_factor(letters)
                if hit:
                    return letters, hit
        elif strategy == "bfs-first":
            for perm in scan.perms_bfs:
                letters = _letters(scan.word, perm)
                hit = _leftmost_factor(self.graph, letters)
                if hit:
                    return letters, hit
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        raise AssertionError("scan reported a factor but none was found")

    def word_to_basis(self, word: Sequence[int], strategy: str = "lex-least-leftmost") -> AlgebraElement:
        """Expand a product of generators in the monomial basis."""
        w = self.graph.check_word(word)
        return AlgebraElement.make(self.graph, "monomial", self._w2b_coords(w, strategy))

    def _w2b_coords(self, word: Word, strategy: str) -> Coords:
        key = (strategy, word)
        hit = self._w2b.get(key)
        if hit is not None:
            return hit
        scan = _scan(self.graph, word, self.class_cap)
        if scan.fc_reduced:
            result: Coords = {scan.word: ONE}
        else:
            member, (pos, size) = self._pick_factor(scan, strategy)
            result = {}
            for coeff, branch in self._rewrite_branches(member, pos, size):
                _merge(result, self._w2b_coords(branch, strategy), coeff)
        self._w2b[key] = result
        return result

    # -- products ----------------------------------------------------------

    def _times_gen(self, coords: Coords, s: int) -> Coords:
        out: Coords = {}
        for u, c in coords.items():
            key = (u, s)
            hit = self._gen_mult.get(key)
            if hit is None:
                hit = self._w2b_coords(u + (s,), "lex-least-leftmost")
                self._gen_mult[key] = hit
            _merge(out, hit, c)
        return out

    def monomial_product(self, word: Sequence[int]) -> Coords:
        """Fold-left expansion of a word; agrees with word_to_basis by confluence."""
        coords: Coords = {(): ONE}
        for s in self.graph.check_word(word):
            coords = self._times_gen(coords, s)
        return coords

    def _mul_coords(self, a: Coords, b: Coords) -> Coords:
        out: Coords = {}
        for u, cu in a.items():
            cur = {u: cu}
            # multiply on the right by each basis word of b, letter by letter
            for w, cw in b.items():
                tmp = cur
                for s in w:
                    tmp = self._times_gen(tmp, s)
                _merge(out, tmp, cw)
        return out

    def multiply(self, a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
        if (a.family, a.rank) != (b.family, b.rank) or \
           (a.family, a.rank) != (self.graph.family, self.graph.rank):
            raise ValueError("graph mismatch in multiplication")
        am = self.to_monomial(a)
        bm = self.to_monomial(b)
        return AlgebraElement.make(self.graph, "monomial",
                                   self._mul_coords(am.as_dict(), bm.as_dict()))

    def one(self) -> AlgebraElement:
        return AlgebraElement.make(self.graph, "monomial", {(): ONE})

    def monomial(self, word: Sequence[int]) -> AlgebraElement:
        w = self.graph.check_word(word)
        if not is_fc_reduced(self.graph, w):
            raise ValueError(f"{w} does not index a monomial basis element")
        return AlgebraElement.make(self.graph, "monomial", {normal_form(self.graph, w): ONE})

    # -- t-tilde basis and conversions --------------------------------------

    def ttilde_element(self, w) -> AlgebraElement:
        """The normalized t-basis element in monomial coordinates.

        Expands the product of (b_s - v^-1) over the letters of the normal
        word; the result is unitriangular with top coefficient 1.
        """
        word = w.word if isinstance(w, FcElement) else self.graph.check_word(w)
        coords: Coords = {(): ONE}
        for s in word:
            nxt = self._times_gen(coords, s)
            _merge(nxt, coords, -V_INV)
            coords = nxt
        return AlgebraElement.make(self.graph, "monomial", coords)

    def ttilde_table(self) -> Dict[Word, Coords]:
        if self._ttilde is None:
            table = {}
            for e in self.fc_elements():
                elem = self.ttilde_element(e)
                coords = elem.as_dict()
                if coords.get(e.word) != ONE:
                    raise AssertionError(f"t-basis element at {e.word} is not unitriangular")
                table[e.word] = coords
            self._ttilde = table
        return self._ttilde

    def _convert_from_monomial(self, coords: Coords, table: Dict[Word, Coords]) -> Coords:
        rem = dict(coords)
        out: Coords = {}
        while rem:
            x = max(rem, key=lambda w: (len(w), w))
            gamma = rem.pop(x)
            out[x] = gamma
            row = table[x]
            for w, c in row.items():
                if w == x:
                    continue
                s = rem.get(w, ZERO) - gamma * c
                if s:
                    rem[w] = s
                elif w in rem:
                    del rem[w]
        return out

    def _convert_to_monomial(self, coords: Coords, table: Dict[Word, Coords]) -> Coords:
        out: Coords = {}
        for x, gamma in coords.items():
            _merge(out, table[x], gamma)
        return out

    def _table_for(self, basis: str) -> Dict[Word, Coords]:
        if basis == "ttilde":
            return self.ttilde_table()
        if basis == "canonical":
            return self.canonical_table()
        if basis == "f":
            return self.f_table()
        raise ValueError(f"no conversion table for basis {basis!r}")

    def to_monomial(self, a: AlgebraElement) -> AlgebraElement:
        if a.basis == "monomial":
            return a
        coords = self._convert_to_monomial(a.as_dict(), self._table_for(a.basis))
        return AlgebraElement.make(self.graph, "monomial", coords)

    def to_basis(self, a: AlgebraElement, basis: str) -> AlgebraElement:
        if basis == a.basis:
            return a
        mono = self.to_monomial(a)
        if basis == "monomial":
            return mono
        coords = self._convert_from_monomial(mono.as_dict(), self._table_for(basis))
        return AlgebraElement.make(self.graph, basis, coords)

    # -- bar involution and lattice degrees ---------------------------------

    def bar_element(self, a: AlgebraElement) -> AlgebraElement:
        """Bar-conjugate: each monomial basis element is fixed, scalars conjugate."""
        mono = self.to_monomial(a)
        coords = {w: c.bar() for w, c in mono.coords}
        out = AlgebraElement.make(self.graph, "monomial", coords)
        return out if a.basis == "monomial" else self.to_basis(out, a.basis)

    def lattice_degree(self, a: AlgebraElement, which: str = "L_H"):
        """Smallest m with a in v^m * lattice; -inf for zero.

        ``L_H`` measures in monomial coordinates, ``L`` in t-tilde
        coordinates; either way it is the maximum coefficient degree.
        """
        if which == "L_H":
            coords = self.to_monomial(a).coords
        elif which == "L":
            coords = self.to_basis(a, "ttilde").coords
        else:
            raise ValueError(f"unknown lattice {which!r}")
        if not coords:
            return float("-inf")
        return max(c.degree for _, c in coords)

    def pi_equal(self, a: AlgebraElement, b: AlgebraElement, which: str = "L_H") -> bool:
        """Equality of degree-0 lattice parts: a - b lands in v^-1 * lattice."""
        if self.lattice_degree(a, which) > 0 or self.lattice_degree(b, which) > 0:
            raise ValueError("projection is only defined on lattice elements")
        am = self.to_monomial(a) if which == "L_H" else self.to_basis(a, "ttilde")
        bm = self.to_monomial(b) if which == "L_H" else self.to_basis(b, "ttilde")
        diff: Coords = dict(am.coords)
        _merge(diff, dict(bm.coords), LaurentPoly.const(-1))
        return all(c.degree <= -1 for c in diff.values())

    # -- canonical basis -----------------------------------------------------

    def canonical_table(self, order: str = "max-first") -> Dict[Word, Coords]:
        if self._canonical is not None and order == "max-first":
            return self._canonical
        table = self._canonical_table(order)
        if order == "max-first":
            self._canonical = table
        return table

    def _canonical_table(self, order: str) -> Dict[Word, Coords]:
        """Bar-invariant correction recursion in t-tilde coordinates.

        For each index word in increasing length order, start from the
        (bar-fixed) monomial basis element and subtract the invariant
        completion of every offending coordinate until all coordinates away
        from the top are in v^-1 Z[v^-1].  Uniqueness of the result makes the
        processing order irrelevant; both orders are exposed for testing.
        """
        ttable = self.ttilde_table()
        canon_t: Dict[Word, Coords] = {}
        for e in self.fc_elements():
            w = e.word
            cur = self._convert_from_monomial({w: ONE}, ttable)
            for _ in range(4 * len(self.fc_elements()) + 4):
                offenders = [
                    x for x, c in cur.items()
                    if x != w and not classify(c).in_vinv_Aminus
                ]
                if not offenders:
                    break
                pick = (max if order == "max-first" else min)(
                    offenders, key=lambda u: (len(u), u))
                mu = invariant_completion(cur[pick])
                _merge(cur, canon_t[pick], -mu)
            else:
                raise AssertionError(f"correction recursion did not settle at {w}")
            canon_t[w] = cur
        # re-express in monomial coordinates for the table contract
        out: Dict[Word, Coords] = {}
        for w, tco in canon_t.items():
            out[w] = self._convert_to_monomial(tco, ttable)
        return out

    def canonical_basis(self) -> Dict[Word, AlgebraElement]:
        return {
            w: AlgebraElement.make(self.graph, "monomial", coords)
            for w, coords in self.canonical_table().items()
        }

    def canonical_element(self, w) -> AlgebraElement:
        word = w.word if isinstance(w, FcElement) else normal_form(self.graph, w)
        return AlgebraElement.make(self.graph, "monomial", self.canonical_table()[word])

    # -- f-basis --------------------------------------------------------------

    _F_TABLE = {
        1: ((1, (1, 2)), (-1, ())),
        2: ((1, (1, 2, 1)), (-1, (1,))),
        3: ((1, (2, 1, 2)), (-1, (2,))),
        4: ((1, (1, 2, 1, 2)), (-2, (1, 2))),
        5: ((1, (2, 1, 2)), (-2, (2,))),
        6: ((1, (2, 1, 2, 1)), (-2, (2, 1))),
    }

    def _f_factorization(self, word: Word) -> Tuple[Tuple[Coords, bool], ...]:
        """The factors of the f-element: block substitutions and bare letters.

        Each factor comes with its distinguished flag (blocks opening with a
        bilateral letter).
        """
        if word in self._f_factors:
            return self._f_factors[word]
        rj = right_justify(self.graph, word, self.class_cap)
        factors: List[Tuple[Coords, bool]] = []
        covered = {}
        for b in rj.blocks:
            covered[b.start] = b
        i = 0
        while i < len(rj.word):
            blk = covered.get(i)
            if blk is not None:
                acc: Coords = {}
                for coeff, sub in self._F_TABLE[blk.shape]:
                    _merge(acc, self.monomial_product(sub), LaurentPoly.const(coeff))
                factors.append((acc, blk.distinguished))
                i = blk.stop
            else:
                factors.append((self.monomial_product((rj.word[i],)), False))
                i += 1
        result = tuple(factors)
        self._f_factors[word] = result
        return result

    def f_element(self, w) -> AlgebraElement:
        word = w.word if isinstance(w, FcElement) else normal_form(self.graph, w)
        coords: Coords = {(): ONE}
        for factor, _ in self._f_factorization(word):
            coords = self._mul_coords(coords, factor)
        elem = AlgebraElement.make(self.graph, "monomial", coords)
        if elem.coeff(word) != ONE:
            raise AssertionError(f"f-element at {word} lost its leading coefficient")
        return elem

    def f_table(self) -> Dict[Word, Coords]:
        if self._f_table is None:
            self._f_table = {e.word: self.f_element(e).as_dict() for e in self.fc_elements()}
        return self._f_table

    # -- structure constants ----------------------------------------------------

    def structure_constants(self, basis: str, x, y) -> Dict[Word, LaurentPoly]:
        """Exact expansion of (basis element x) * (basis element y) in ``basis``."""
        xw = x.word if isinstance(x, FcElement) else normal_form(self.graph, x)
        yw = y.word if isinstance(y, FcElement) else normal_form(self.graph, y)
        if basis == "monomial":
            xm: Coords = {xw: ONE}
            ym: Coords = {yw: ONE}
            prod = self._mul_coords(xm, ym)
            return prod
        table = self._table_for(basis)
        prod = self._mul_coords(dict(table[xw]), dict(table[yw]))
        return self._convert_from_monomial(prod, table)

    def structure_constants_csv(self, basis: str) -> str:
        """The full multiplication table as CSV rows keyed by (x, y, z)."""
        def word_str(w):
            return ",".join(map(str, w)) if w else "e"

        lines = ["x;y;z;coeff"]
        for x in self.fc_elements():
            for y in self.fc_elements():
                sc = self.structure_constants(basis, x, y)
                for z, c in sorted(sc.items(), key=lambda t: (len(t[0]), t[0])):
                    lines.append(f"{word_str(x.word)};{word_str(y.word)};"
                                 f"{word_str(z)};{c}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# mixed products in the generators b_i and their t-tilde counterparts


MixedSymbol = Tuple[str, int]  # ("b", i) or ("t", i); scalars enter separately
MixedWord = Tuple[MixedSymbol, ...]


@dataclass(frozen=True)
class AuxElements:
    """Companion products attached to one fully commutative element.

    ``expanded_b`` doubles every bilateral letter; ``f_hat`` substitutes the
    t-tilde generator at internal and non-bad lateral letters; ``f_hat_prime``
    additionally doubles the bilateral substitutions; ``f_tilde`` also
    substitutes at critical letters.  ``kappa`` counts bilateral letters and
    ``f_prime`` is the f-element with an extra first generator inserted in
    front of each distinguished factor.
    """

    word: Word
    kappa: int
    expanded_b: MixedWord
    f_hat: MixedWord
    f_hat_prime: MixedWord
    f_tilde: MixedWord
    f_prime: AlgebraElement


def evaluate_mixed(alg: TLAlgebra, mixed: MixedWord, prescale: Optional[LaurentPoly] = None) -> AlgebraElement:
    """Multiply out a mixed word; the t-symbol expands as b_i - v^-1."""
    coords: Coords = {(): prescale if prescale is not None else ONE}
    for kind, i in mixed:
        nxt = alg._times_gen(coords, i)
        if kind == "t":
            _merge(nxt, coords, -V_INV)
        elif kind != "b":
            raise ValueError(f"unknown mixed symbol {kind!r}")
        coords = nxt
    return AlgebraElement.make(alg.graph, "monomial", coords)


def aux_elements(alg: TLAlgebra, w) -> AuxElements:
    # the mixed products depend on the chosen reduced expression, so the word
    # is used exactly as given (their lattice projections do not depend on it)
    word = w.word if isinstance(w, FcElement) else alg.graph.check_word(tuple(w))
    cls = classify_letters(alg.graph, word, alg.class_cap)
    kappa = sum(1 for i in range(len(word)) if cls.is_bilateral(i))

    expanded: List[MixedSymbol] = []
    f_hat: List[MixedSymbol] = []
    f_hat_prime: List[MixedSymbol] = []
    f_tilde: List[MixedSymbol] = []
    for i, s in enumerate(word):
        bilateral = cls.is_bilateral(i)
        expanded.append(("b", s))
        if bilateral:
            expanded.append(("b", s))
        hat_t = (cls.is_internal(i) or cls.is_lateral(i)) and not cls.bad[i]
        sym = ("t", s) if hat_t else ("b", s)
        f_hat.append(sym)
        f_hat_prime.append(sym)
        if bilateral:
            f_hat_prime.append(sym)
        tilde_t = hat_t or cls.critical[i] in ("i", "ii", "iii")
        f_tilde.append(("t", s) if tilde_t else ("b", s))

    factors = alg._f_factorization(word)
    coords: Coords = {(): ONE}
    for factor, distinguished in factors:
        if distinguished:
            coords = alg._times_gen(coords, 1)
        coords = alg._mul_coords(coords, factor)
    f_prime = AlgebraElement.make(alg.graph, "monomial", coords)

    return AuxElements(
        word=word,
        kappa=kappa,
        expanded_b=tuple(expanded),
        f_hat=tuple(f_hat),
        f_hat_prime=tuple(f_hat_prime),
        f_tilde=tuple(f_tilde),
        f_prime=f_prime,
    )
