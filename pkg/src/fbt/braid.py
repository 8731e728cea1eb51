"""The braid group B3 and its center quotient.

Generators are s1, s2 (Artin) and the half twist d = s1 s2 s1, whose square
generates the center Z3.  The word problem is solved through the exact
integer representation

    s1 -> [[1,1],[0,1]],   s2 -> [[1,0],[-1,1]],   d -> [[0,1],[-1,0]],

which identifies B3/Z3 with PSL(2,Z) and pure braids mod center with the
free group on a1 = s1^2, a2 = s2^2 (a congruence subgroup generated by
[[1,2],[0,1]] and [[1,0],[-2,1]]).  Equality in B3 itself additionally
compares exponent sums, since the representation kernel is the cyclic
group on d^4.

Every braid that is not a power of d has a unique normal form

    s_j^k b1 d^l,   k != 0,  b1 a reduced word in s1^2, s2^2

whose first term, when b1 != Id, is a power of the other generator than
s_j.  The projection theta sends such a braid to s_j^{q(k)} b1 with q(k)
the even neighbour of k closest to zero, read as the reduced word
a_j^{q(k)/2} b1 in the free group; powers of d map to the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from .bounds import LogNumber
from .errors import ValidationError
from .words import (
    ENUM_BUDGET_CAP,
    FreeWord,
    IDENTITY,
    enumerate_words,
    format_word,
    l_minus,
    reduce as reduce_word,
    word_json,
)

B3 = "B3"
MOD_CENTER = "B3-mod-center"

GENS = ("s1", "s2", "d")

BraidLetter = tuple[str, int]


@dataclass(frozen=True)
class BraidWord:
    letters: tuple[BraidLetter, ...] = ()
    ambient: str = B3

    def __post_init__(self):
        if self.ambient not in (B3, MOD_CENTER):
            raise ValidationError(f"unknown ambient {self.ambient!r}")
        for gen, exp in self.letters:
            if gen not in GENS:
                raise ValidationError(f"unknown braid generator {gen!r}")
            if exp == 0:
                raise ValidationError("zero exponent in braid letter")

    def sigma_letters(self) -> list[tuple[int, int]]:
        """Expand d to s1 s2 s1; returns (generator index, +-1) letters."""
        out: list[tuple[int, int]] = []
        for gen, exp in self.letters:
            sign = 1 if exp > 0 else -1
            for _ in range(abs(exp)):
                if gen == "d":
                    seq = [(1, 1), (2, 1), (1, 1)]
                    out.extend(seq if sign > 0 else [(g, -1) for g, _ in reversed(seq)])
                else:
                    out.append((int(gen[1]), sign))
        return out

    def exponent_sum(self) -> int:
        return sum(3 * e if g == "d" else e for g, e in self.letters)

    def __str__(self) -> str:
        return format_braid(self)


def braid(text_or_letters, ambient: str = B3) -> BraidWord:
    if isinstance(text_or_letters, str):
        return parse_braid(text_or_letters, ambient)
    return BraidWord(tuple(text_or_letters), ambient)


def braid_concat(*parts: BraidWord) -> BraidWord:
    if not parts:
        raise ValidationError("empty concat")
    ambient = parts[0].ambient
    if any(p.ambient != ambient for p in parts):
        raise ValidationError("ambient mismatch")
    letters: list[BraidLetter] = []
    for p in parts:
        for gen, exp in p.letters:
            if letters and letters[-1][0] == gen:
                merged = letters[-1][1] + exp
                if merged == 0:
                    letters.pop()
                else:
                    letters[-1] = (gen, merged)
            else:
                letters.append((gen, exp))
    return BraidWord(tuple(letters), ambient)


def braid_invert(b: BraidWord) -> BraidWord:
    return BraidWord(tuple((g, -e) for g, e in reversed(b.letters)), b.ambient)


# ---------------------------------------------------------------------------
# matrix oracle

_MAT = {
    (1, 1): (1, 1, 0, 1),
    (1, -1): (1, -1, 0, 1),
    (2, 1): (1, 0, -1, 1),
    (2, -1): (1, 0, 1, 1),
}


@dataclass(frozen=True)
class MatrixImage:
    a: int
    b: int
    c: int
    d: int
    exponent_sum: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValidationError("matrix image must have determinant 1")

    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def projective(self) -> tuple[int, int, int, int]:
        """Sign normalized so the first nonzero entry of the top row is positive."""
        lead = self.a if self.a != 0 else self.b
        s = 1 if lead > 0 else -1
        return (s * self.a, s * self.b, s * self.c, s * self.d)


def _mat_mul(m, n):
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def matrix_image(b: BraidWord) -> MatrixImage:
    m = (1, 0, 0, 1)
    for gen, sign in b.sigma_letters():
        m = _mat_mul(m, _MAT[(gen, sign)])
    return MatrixImage(*m, exponent_sum=b.exponent_sum())


def equal(b1: BraidWord, b2: BraidWord) -> bool:
    if b1.ambient != b2.ambient:
        raise ValidationError("ambient mismatch")
    m1, m2 = matrix_image(b1), matrix_image(b2)
    if b1.ambient == B3:
        return m1.entries() == m2.entries() and m1.exponent_sum == m2.exponent_sum
    return m1.projective() == m2.projective()


# ---------------------------------------------------------------------------
# the twist-prefix normal form

_A1 = (1, 2, 0, 1)     # image of a1 = s1^2
_A2 = (1, 0, -2, 1)    # image of a2 = s2^2
_D = (0, 1, -1, 0)     # image of d


def _nearest_int(p: int, q: int) -> int:
    """Exact nearest integer to p/q; callers guarantee no ties."""
    if q < 0:
        p, q = -p, -q
    return (2 * p + q) // (2 * q)


def _matrix_to_word(m: tuple[int, int, int, int]) -> FreeWord:
    """Decode a (projective) matrix of the free group on a1, a2.

    Continued-fraction peeling: while the lower-left entry is nonzero, strip
    the power of a1 or a2 that shrinks whichever of |a|, |c| dominates; the
    leftovers form the next letter.  Entries of the congruence subgroup have
    a, d odd and b, c even, so there are never ties.
    """
    a, b, c, d = m
    if a < 0 or (a == 0 and b < 0):
        a, b, c, d = -a, -b, -c, -d
    if a % 2 == 0 or d % 2 == 0 or b % 2 or c % 2:
        raise ValidationError("matrix is not in the pure-braid image")
    terms: list[tuple[int, int]] = []
    guard = 0
    while c != 0:
        guard += 1
        if guard > 10 ** 6:
            raise AssertionError("matrix peeling failed to terminate")
        if abs(a) > abs(c):
            k = _nearest_int(a, 2 * c)
            terms.append((1, k))
            a, b = a - 2 * k * c, b - 2 * k * d
        else:
            k = -_nearest_int(c, 2 * a)
            terms.append((2, k))
            c, d = c + 2 * k * a, d + 2 * k * b
    if a < 0:
        a, b, c, d = -a, -b, -c, -d
    if (a, c, d) != (1, 0, 1):
        raise ValidationError("matrix is not in the pure-braid image")
    if b != 0:
        if b % 2:
            raise ValidationError("matrix is not in the pure-braid image")
        terms.append((1, b // 2))
    w = reduce_word(terms)
    if len(w.terms) != len(terms):
        raise AssertionError("peeling produced a non-reduced word")
    return w


@dataclass(frozen=True)
class BraidNormalForm:
    kind: str             # "delta-power" | "general"
    l: int
    j: int = 0            # general form only
    k: int = 0
    b1: FreeWord = IDENTITY
    ambient: str = B3

    def __post_init__(self):
        if self.kind not in ("delta-power", "general"):
            raise ValidationError(f"unknown normal form kind {self.kind!r}")
        if self.kind == "general":
            if self.j not in (1, 2):
                raise ValidationError("j must be 1 or 2")
            if self.k == 0:
                raise ValidationError("k must be nonzero")
            if self.b1.terms and self.b1.terms[0][0] == self.j:
                raise ValidationError("b1 must start with the other generator")
        if self.ambient == MOD_CENTER and self.l not in (0, 1):
            raise ValidationError("l is reduced mod 2 in the center quotient")

    def sort_key(self):
        if self.kind == "delta-power":
            return (0, self.l, 0, 0, ())
        return (1, self.l, self.j, self.k, self.b1.letters())


def expand(nf: BraidNormalForm) -> BraidWord:
    letters: list[BraidLetter] = []
    if nf.kind == "general":
        letters.append((f"s{nf.j}", nf.k))
        letters.extend((f"s{g}", 2 * e) for g, e in nf.b1.terms)
    if nf.l != 0:
        letters.append(("d", nf.l))
    return BraidWord(tuple(letters), nf.ambient)


_PREFIXES = (
    (0, 0),  # pure already
    (0, 1),  # b = p d
    (1, 0),  # b = s1 p
    (2, 0),  # b = s2 p
    (1, 1),  # b = s1 p d
    (2, 1),  # b = s2 p d
)

_PERM = {"s1": (1, 0, 2), "s2": (0, 2, 1), "d": (2, 1, 0)}


def _permutation(b: BraidWord) -> tuple[int, int, int]:
    perm = (0, 1, 2)
    for gen, exp in b.letters:
        p = _PERM[gen]
        if exp % 2:
            perm = tuple(p[i] for i in perm)
    return perm


def normal_form(b: BraidWord) -> BraidNormalForm:
    """Compute the unique normal form; powers of d are reported as such.

    The strand permutation picks the unique prefix (s_j, d-parity) whose
    removal leaves a pure braid; the pure part is decoded from its matrix
    into a word in a1, a2 plus a central power of d^2 recovered from the
    exponent sum.  The expansion is checked against the input through the
    matrix oracle.
    """
    for j0, l0 in _PREFIXES:
        head = [] if j0 == 0 else [(f"s{j0}", -1)]
        tail = [] if l0 == 0 else [("d", -1)]
        p = braid_concat(BraidWord(tuple(head), b.ambient), b,
                         BraidWord(tuple(tail), b.ambient))
        if _permutation(p) == (0, 1, 2):
            break
    else:
        raise AssertionError("no prefix produced a pure braid")

    mp = matrix_image(p)
    w = _matrix_to_word(mp.projective())
    two_t, rem = divmod(mp.exponent_sum - 2 * sum(e for _, e in w.terms), 6)
    if rem:
        raise AssertionError("pure part has inconsistent exponent sum")

    if j0 == 0 and w.is_identity:
        ell = 2 * two_t + l0
        nf = BraidNormalForm("delta-power", _reduce_l(ell, b.ambient),
                             ambient=b.ambient)
    else:
        if j0 == 0:
            g, e = w.terms[0]
            j, k, b1 = g, 2 * e, FreeWord(w.terms[1:])
        elif w.is_identity:
            j, k, b1 = j0, 1, IDENTITY
        elif w.terms[0][0] == j0:
            j, k, b1 = j0, 2 * w.terms[0][1] + 1, FreeWord(w.terms[1:])
        else:
            j, k, b1 = j0, 1, w
        ell = 2 * two_t + l0
        nf = BraidNormalForm("general", _reduce_l(ell, b.ambient),
                             j=j, k=k, b1=b1, ambient=b.ambient)
    if not equal(expand(nf), b):
        raise AssertionError("normal form failed the round-trip oracle")
    return nf


def _reduce_l(ell: int, ambient: str) -> int:
    return ell % 2 if ambient == MOD_CENTER else ell


def q(k: int) -> int:
    """The even integer neighbour of k closest to zero (k itself if even)."""
    if k == 0:
        raise ValidationError("q(0) is undefined")
    return k if k % 2 == 0 else k - (1 if k > 0 else -1)


def theta(b: BraidWord) -> FreeWord:
    """theta(s_j^k b1 d^l) = s_j^{q(k)} b1 as a reduced word in a1, a2;
    powers of d map to the identity."""
    nf = normal_form(b)
    if nf.kind == "delta-power":
        return IDENTITY
    qk = q(nf.k)
    if qk == 0:
        return nf.b1
    return FreeWord(((nf.j, qk // 2),) + nf.b1.terms)


def lambda_tr_lower(b: BraidWord) -> float:
    """Lower bound L-(theta(b)) / (2 pi) for the transversal extremal
    length; zero for the exceptional braids s_j^k d^l and powers of d."""
    nf = normal_form(b)
    if nf.kind == "delta-power" or nf.b1.is_identity:
        return 0.0
    return l_minus(theta(b)) / (2.0 * math.pi)


def lemma4_admissible(b: BraidWord, lam: float) -> bool:
    """L-(theta(b)) <= 2 pi lambda, with braids s_j^k d^{2l} (and powers
    of d) vacuously admissible."""
    if lam < 0:
        raise ValidationError("lambda must be >= 0")
    nf = normal_form(b)
    if nf.kind == "delta-power" or (nf.b1.is_identity and nf.l % 2 == 0):
        return True
    return l_minus(theta(b)) <= 2.0 * math.pi * lam


def _log_plus(x: float) -> float:
    return math.log(x) if x > 1.0 else 0.0


def lemma3a_check(k: int, kp: int, lam: float) -> bool:
    """log+(3 [|k|/2]) + log+(3 [|k'|/2]) <= pi lambda."""
    if k == 0 or kp == 0:
        raise ValidationError("exponents must be nonzero")
    if lam < 0:
        raise ValidationError("lambda must be >= 0")
    lhs = _log_plus(3 * (abs(k) // 2)) + _log_plus(3 * (abs(kp) // 2))
    return lhs <= math.pi * lam


# ---------------------------------------------------------------------------
# census of quotient elements with small L-(theta)


def _word_to_braid(w: FreeWord, ambient: str) -> BraidWord:
    return BraidWord(tuple((f"s{g}", 2 * e) for g, e in w.terms), ambient)


def theta_preimages(w: FreeWord) -> list[BraidWord]:
    """All elements of B3 mod center with theta equal to w.

    For w != Id with first term a_j^k these are {w, s_j^{sgn k} w,
    s_j'^{+-1} w} times {1, d}; for w = Id they are {d^l, s_j^{+-1} d^l}
    with l in {0, 1}, ten elements in total.
    """
    out: list[BraidWord] = []
    if w.is_identity:
        heads: list[tuple[BraidLetter, ...]] = [()]
        heads += [((f"s{j}", s),) for j in (1, 2) for s in (1, -1)]
        for head in heads:
            for ell in (0, 1):
                tail = (("d", ell),) if ell else ()
                out.append(BraidWord(head + tail, MOD_CENTER))
        return out
    base = _word_to_braid(w, MOD_CENTER)
    j, kfirst = w.terms[0]
    sgn = 1 if kfirst > 0 else -1
    jp = 3 - j
    heads = [BraidWord((), MOD_CENTER),
             BraidWord(((f"s{j}", sgn),), MOD_CENTER),
             BraidWord(((f"s{jp}", 1),), MOD_CENTER),
             BraidWord(((f"s{jp}", -1),), MOD_CENTER)]
    for head in heads:
        for ell in (0, 1):
            tail = BraidWord((("d", ell),) if ell else (), MOD_CENTER)
            out.append(braid_concat(head, base, tail))
    return out


def census(budget: float, cap: float = ENUM_BUDGET_CAP) -> list[BraidWord]:
    """All elements b of B3 mod center with L-(theta(b)) <= budget,
    deduplicated by the projective matrix image and sorted by normal form."""
    seen: dict[tuple, BraidNormalForm] = {}
    for w in enumerate_words(budget, cap=cap):
        for b in theta_preimages(w):
            key = matrix_image(b).projective()
            if key not in seen:
                seen[key] = normal_form(b)
    forms = sorted(seen.values(), key=BraidNormalForm.sort_key)
    return [expand(nf) for nf in forms]


def braid_count_bound(budget: float) -> LogNumber:
    """The census bound 15 e^{3Y}."""
    if budget < 0:
        raise ValidationError("budget must be >= 0")
    return LogNumber(math.log(15.0) + 3.0 * budget)


# ---------------------------------------------------------------------------
# text grammar and JSON emission


def parse_braid(text: str, ambient: str | None = None) -> BraidWord:
    """Whitespace separated tokens s1^k, s2^k, d^k; a leading @mod-center
    directive selects the quotient."""
    toks = text.split()
    amb = ambient or B3
    if toks and toks[0] == "@mod-center":
        amb = MOD_CENTER
        toks = toks[1:]
    letters: list[BraidLetter] = []
    for tok in toks:
        if "^" in tok:
            gen, _, etext = tok.partition("^")
            try:
                exp = int(etext)
            except ValueError:
                raise ValidationError(f"bad braid token {tok!r}") from None
        else:
            gen, exp = tok, 1
        if gen not in GENS:
            raise ValidationError(f"bad braid token {tok!r}")
        if exp == 0:
            raise ValidationError(f"zero exponent in token {tok!r}")
        letters.append((gen, exp))
    return BraidWord(tuple(letters), amb)


def format_braid(b: BraidWord, directive: bool = False) -> str:
    body = " ".join(f"{g}" if e == 1 else f"{g}^{e}" for g, e in b.letters)
    if directive and b.ambient == MOD_CENTER:
        return f"@mod-center {body}".rstrip()
    return body


def normal_form_json(nf: BraidNormalForm) -> dict:
    if nf.kind == "delta-power":
        return {"kind": "delta-power", "l": nf.l}
    return {"kind": "general", "j": nf.j, "k": nf.k,
            "b1": format_word(nf.b1), "l": nf.l}


def braid_json(b: BraidWord) -> dict:
    wj = word_json(theta(b))
    return {
        "braid": format_braid(b),
        "ambient": b.ambient,
        "exponent_sum": b.exponent_sum(),
        "theta": wj["word"],
        "l_minus": wj["l_minus"],
        "l_plus": wj["l_plus"],
        "syllables": wj["syllables"],
        "normal_form": normal_form_json(normal_form(b)),
    }
