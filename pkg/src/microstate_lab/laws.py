"""Words, joint moment tables, free products, and empirical laws of matrix tuples.

A law is a finite table of joint moments: a map from words in grouped
self-adjoint variables (and optional unitary letters with exponents +-1) to
complex values, together with a degree bound and per-variable norm bounds.
Laws are immutable once built and safe to share between workers.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidInputError
from .linalg import HermitianTuple, UnitaryTuple, op_norm

# Hard cap on the moment-table degree; the alphabet grows exponentially with
# the degree, so tables beyond this are not supported.
MAX_DEGREE = 12
# Refuse to materialize tables with more entries than this.
MAX_TABLE_WORDS = 2_000_000

__all__ = [
    "MAX_DEGREE",
    "Letter",
    "Word",
    "NCLaw",
    "format_word",
    "parse_word",
    "enumerate_words",
    "empirical_law",
    "standard_law",
    "semicircular_law",
    "two_point_law",
    "projection_law",
    "law_from_spec",
    "quantile_from_spec",
    "free_product_law",
    "FreeProductEvaluator",
    "free_unitary_brownian_moment",
    "BrownianUnitaryMarginal",
    "brownian_presence_law",
    "law_deviation",
    "law_to_json",
    "law_from_json",
]


@dataclass(frozen=True)
class Letter:
    """One letter of a word.

    kind "x": self-adjoint variable ``j`` of group ``i`` (both 1-based).
    kind "u": unitary generator ``i`` with exponent ``j`` in {+1, -1}.
    """

    kind: str
    i: int
    j: int

    @staticmethod
    def x(group: int, var: int) -> "Letter":
        return Letter("x", group, var)

    @staticmethod
    def u(index: int, exp: int = 1) -> "Letter":
        if exp not in (1, -1):
            raise InvalidInputError(f"unitary exponent must be +1 or -1, got {exp}")
        return Letter("u", index, exp)

    def sort_key(self):
        # Variables before unitary letters; within unitaries, u before u*.
        if self.kind == "x":
            return (0, self.i, self.j)
        return (1, self.i, 0 if self.j == 1 else 1)


Word = tuple  # tuple[Letter, ...]; the empty word has moment 1 by convention


def format_word(word: Word) -> str:
    """Readable rendering, e.g. ``"X[1,1] X[2,1] U[1] U*[1]"``."""
    parts = []
    for let in word:
        if let.kind == "x":
            parts.append(f"X[{let.i},{let.j}]")
        else:
            parts.append(f"U[{let.i}]" if let.j == 1 else f"U*[{let.i}]")
    return " ".join(parts)


_LETTER_RE = re.compile(r"^(X)\[(\d+),(\d+)\]$|^(U)(\*?)\[(\d+)\]$")


def parse_word(text: str) -> Word:
    letters = []
    for token in text.split():
        m = _LETTER_RE.match(token)
        if m is None:
            raise InvalidInputError(f"cannot parse word letter {token!r}")
        if m.group(1) == "X":
            letters.append(Letter.x(int(m.group(2)), int(m.group(3))))
        else:
            letters.append(Letter.u(int(m.group(6)), -1 if m.group(5) else 1))
    return tuple(letters)


def _alphabet(groups: Sequence[Sequence[float]], n_unitaries: int) -> tuple[Letter, ...]:
    letters = [
        Letter.x(i + 1, j + 1)
        for i, rhos in enumerate(groups)
        for j in range(len(rhos))
    ]
    for k in range(n_unitaries):
        letters.append(Letter.u(k + 1, 1))
        letters.append(Letter.u(k + 1, -1))
    return tuple(sorted(letters, key=Letter.sort_key))


def enumerate_words(alphabet: Sequence[Letter], max_degree: int) -> Iterator[Word]:
    """All words of degree 1..max_degree in degree-major lexicographic order."""
    if max_degree < 1:
        raise InvalidInputError(f"degree bound must be >= 1, got {max_degree}")
    if max_degree > MAX_DEGREE:
        raise InvalidInputError(f"degree {max_degree} exceeds the table cap {MAX_DEGREE}")
    a = len(alphabet)
    total = sum(a**l for l in range(1, max_degree + 1))
    if total > MAX_TABLE_WORDS:
        raise InvalidInputError(
            f"alphabet of {a} letters at degree {max_degree} needs {total} table entries "
            f"(cap {MAX_TABLE_WORDS})"
        )
    ordered = tuple(sorted(alphabet, key=Letter.sort_key))
    return _word_iter(ordered, max_degree)


def _word_iter(ordered: tuple, max_degree: int) -> Iterator[Word]:
    def level(prefix, remaining):
        if remaining == 0:
            yield prefix
            return
        for let in ordered:
            yield from level(prefix + (let,), remaining - 1)

    for degree in range(1, max_degree + 1):
        yield from level((), degree)


@dataclass(frozen=True)
class NCLaw:
    """A complete joint moment table over a declared alphabet.

    ``groups[i]`` holds the per-variable norm bounds of group i+1; the table
    has one entry for every word of degree <= max_degree.
    """

    groups: tuple[tuple[float, ...], ...]
    n_unitaries: int
    max_degree: int
    moments: dict

    def __post_init__(self):
        if self.max_degree < 1 or self.max_degree > MAX_DEGREE:
            raise InvalidInputError(f"max_degree must be in 1..{MAX_DEGREE}, got {self.max_degree}")
        if not self.groups and self.n_unitaries == 0:
            raise InvalidInputError("a law needs at least one generator")
        if any(len(g) < 1 for g in self.groups):
            raise InvalidInputError("every group needs at least one variable")
        expected = 0
        a = len(self.alphabet())
        for l in range(1, self.max_degree + 1):
            expected += a**l
        if len(self.moments) != expected:
            raise InvalidInputError(
                f"moment table has {len(self.moments)} entries, expected {expected} "
                f"for {a} letters at degree {self.max_degree}"
            )

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def r(self, group: int) -> int:
        return len(self.groups[group - 1])

    def alphabet(self) -> tuple[Letter, ...]:
        return _alphabet(self.groups, self.n_unitaries)

    def words(self, max_degree: int | None = None) -> Iterator[Word]:
        m = self.max_degree if max_degree is None else max_degree
        if m > self.max_degree:
            raise InvalidInputError(f"law covers degree {self.max_degree}, asked for {m}")
        return enumerate_words(self.alphabet(), m)

    def moment(self, word: Word) -> complex:
        if len(word) == 0:
            return 1.0 + 0.0j
        try:
            return self.moments[word]
        except KeyError:
            raise InvalidInputError(
                f"word {format_word(word)!r} is outside this law's table "
                f"(degree {self.max_degree}, {self.n_groups} groups, {self.n_unitaries} unitaries)"
            ) from None

    def rho(self, letter: Letter) -> float:
        if letter.kind == "u":
            return 1.0
        return self.groups[letter.i - 1][letter.j - 1]

    def restrict_degree(self, max_degree: int) -> "NCLaw":
        if max_degree > self.max_degree:
            raise InvalidInputError(f"cannot extend degree {self.max_degree} to {max_degree}")
        table = {w: self.moments[w] for w in enumerate_words(self.alphabet(), max_degree)}
        return NCLaw(self.groups, self.n_unitaries, max_degree, table)

    def restrict_groups(self, indices: Sequence[int]) -> "NCLaw":
        """The marginal law of a subfamily of groups, relabeled 1..k.

        Unitary generators are dropped; the restricted table is read straight
        off this law's entries for words that only use the kept groups.
        """
        idx = tuple(indices)
        if not idx or any(i < 1 or i > self.n_groups for i in idx):
            raise InvalidInputError(f"group indices {idx} out of range 1..{self.n_groups}")
        if len(set(idx)) != len(idx):
            raise InvalidInputError("group indices must be distinct")
        back = {new + 1: old for new, old in enumerate(idx)}
        groups = tuple(self.groups[i - 1] for i in idx)
        table = {}
        for w in enumerate_words(_alphabet(groups, 0), self.max_degree):
            orig = tuple(Letter.x(back[let.i], let.j) for let in w)
            table[w] = self.moments[orig]
        return NCLaw(groups, 0, self.max_degree, table)

    def check_invariants(self, tol: float = 1e-9) -> None:
        """Raise if traciality, conjugate symmetry, or the norm bound fails."""
        for w, value in self.moments.items():
            rev = tuple(
                Letter(l.kind, l.i, -l.j) if l.kind == "u" else l for l in reversed(w)
            )
            if abs(np.conj(self.moments[rev]) - value) > tol:
                raise AssertionError(f"conjugate symmetry fails at {format_word(w)}")
            rot = w[1:] + w[:1]
            if abs(self.moments[rot] - value) > tol:
                raise AssertionError(f"traciality fails at {format_word(w)}")
            bound = 1.0
            for l in w:
                bound *= self.rho(l)
            if abs(value) > bound + tol:
                raise AssertionError(
                    f"|moment| = {abs(value):.6g} exceeds norm bound {bound:.6g} at {format_word(w)}"
                )


# ---------------------------------------------------------------------------
# Word evaluation on concrete matrices
# ---------------------------------------------------------------------------


def letter_matrices(
    tuples: Sequence[HermitianTuple],
    unitaries: UnitaryTuple | None = None,
) -> dict:
    """Map each alphabet letter to its matrix (adjoints for exponent -1)."""
    mats = {}
    for i, group in enumerate(tuples):
        for j, a in enumerate(group):
            mats[Letter.x(i + 1, j + 1)] = a.mat
    if unitaries is not None:
        for k, u in enumerate(unitaries):
            mats[Letter.u(k + 1, 1)] = u.mat
            mats[Letter.u(k + 1, -1)] = u.mat.conj().T
    return mats


def word_traces(letter_mats: dict, max_degree: int) -> dict:
    """Normalized traces of every word of degree <= max_degree.

    Prefix products are reused along a depth-first walk, so each word costs
    one matrix multiplication.
    """
    letters = sorted(letter_mats, key=Letter.sort_key)
    if not letters:
        raise InvalidInputError("empty alphabet")
    n = next(iter(letter_mats.values())).shape[0]
    out = {}

    def rec(prefix_word, prefix_mat, depth):
        for let in letters:
            mat = letter_mats[let] if prefix_mat is None else prefix_mat @ letter_mats[let]
            word = prefix_word + (let,)
            out[word] = complex(np.trace(mat)) / n
            if depth + 1 < max_degree:
                rec(word, mat, depth + 1)

    rec((), None, 0)
    return out


def scan_word_deviations(
    letter_mats: dict,
    law: NCLaw,
    max_degree: int,
    stop_beyond: float | None = None,
) -> tuple[float, Word | None]:
    """Max over words of |tr_N(word) - law moment| and the achieving word.

    Ties are broken toward the first word in degree-major lexicographic
    order, so the reported word is deterministic. With ``stop_beyond`` set,
    the depth-first walk returns as soon as some deviation reaches that
    threshold; the reported value is then only a witness, not the true
    maximum (used for fast hit counting).
    """
    letters = sorted(letter_mats, key=Letter.sort_key)
    moments = law.moments
    if stop_beyond is None:
        traces = word_traces(letter_mats, max_degree)
        best = -1.0
        best_word = None
        for word in enumerate_words(letters, max_degree):
            dev = abs(traces[word] - moments[word])
            if dev > best:
                best = dev
                best_word = word
        return best, best_word

    n = next(iter(letter_mats.values())).shape[0]
    best = 0.0
    best_word = None
    stack = [((), None, 0)]
    while stack:
        prefix_word, prefix_mat, depth = stack.pop()
        for let in reversed(letters):
            mat = letter_mats[let] if prefix_mat is None else prefix_mat @ letter_mats[let]
            word = prefix_word + (let,)
            dev = abs(complex(np.trace(mat)) / n - moments[word])
            if dev > best or best_word is None:
                best = dev
                best_word = word
                if best >= stop_beyond:
                    return best, best_word
            if depth + 1 < max_degree:
                stack.append((word, mat, depth + 1))
    return best, best_word


def empirical_law(
    tuples: Sequence[HermitianTuple],
    unitaries: UnitaryTuple | None = None,
    max_degree: int = 2,
) -> NCLaw:
    """The joint law of concrete matrices: moments are normalized traces of
    matrix products along each word; declared norm bounds are operator norms."""
    tuples = [t if isinstance(t, HermitianTuple) else HermitianTuple(t) for t in tuples]
    if not tuples:
        raise InvalidInputError("need at least one group of matrices")
    sizes = {t.n for t in tuples}
    if unitaries is not None:
        sizes.add(unitaries.n)
    if len(sizes) != 1:
        raise InvalidInputError(f"all matrices must share one size, got {sorted(sizes)}")
    groups = tuple(tuple(op_norm(a) for a in t) for t in tuples)
    s = 0 if unitaries is None else len(unitaries)
    mats = letter_matrices(tuples, unitaries)
    # Force the canonical word set (and the size guard) before computing.
    words = list(enumerate_words(_alphabet(groups, s), max_degree))
    traces = word_traces(mats, max_degree)
    return NCLaw(groups, s, max_degree, {w: traces[w] for w in words})


# ---------------------------------------------------------------------------
# Standard single-variable laws
# ---------------------------------------------------------------------------


def _single_variable_law(moment_fn: Callable[[int], float], rho: float, max_degree: int) -> NCLaw:
    table = {}
    for k in range(1, max_degree + 1):
        table[tuple([Letter.x(1, 1)] * k)] = complex(moment_fn(k))
    return NCLaw(((rho,),), 0, max_degree, table)


def semicircular_law(sigma: float, max_degree: int) -> NCLaw:
    """Odd moments vanish; moment(X^(2k)) = sigma^(2k) * Catalan(k)."""
    if not sigma > 0:
        raise InvalidInputError(f"semicircular scale must be positive, got {sigma}")

    def mom(k):
        if k % 2:
            return 0.0
        h = k // 2
        return sigma**k * math.comb(k, h) / (h + 1)

    return _single_variable_law(mom, 2.0 * sigma, max_degree)


def two_point_law(a: float, b: float, weight: float, max_degree: int) -> NCLaw:
    """Atoms at a and b with weights (weight, 1 - weight)."""
    if not 0.0 <= weight <= 1.0:
        raise InvalidInputError(f"two-point weight must lie in [0, 1], got {weight}")
    rho = max(abs(a), abs(b))
    return _single_variable_law(lambda k: weight * a**k + (1 - weight) * b**k, rho, max_degree)


def projection_law(alpha: float, max_degree: int) -> NCLaw:
    """A projection of trace alpha: every moment equals alpha."""
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"projection trace must lie strictly in (0, 1), got {alpha}")
    return _single_variable_law(lambda k: alpha, 1.0, max_degree)


def standard_law(kind: str, max_degree: int, *params: float) -> NCLaw:
    if kind == "semicircular":
        return semicircular_law(*params, max_degree=max_degree)
    if kind == "two_point":
        return two_point_law(*params, max_degree=max_degree)
    if kind == "projection":
        return projection_law(*params, max_degree=max_degree)
    raise InvalidInputError(f"unknown standard law kind {kind!r}")


_SPEC_RE = re.compile(r"^\s*([a-z_]+)\s*\(([^)]*)\)\s*$")


def _parse_spec(spec: str) -> tuple[str, list[float]]:
    m = _SPEC_RE.match(spec)
    if m is None:
        raise InvalidInputError(f"cannot parse law spec {spec!r}; expected name(arg, ...)")
    name = m.group(1)
    args = [float(tok) for tok in m.group(2).split(",") if tok.strip()]
    return name, args


def law_from_spec(spec: str, max_degree: int) -> NCLaw:
    """Build a standard law from a constructor string like ``two_point(1,-1,0.5)``."""
    name, args = _parse_spec(spec)
    return standard_law(name, max_degree, *args)


def _semicircle_cdf(x: float, sigma: float) -> float:
    r = 2.0 * sigma
    if x <= -r:
        return 0.0
    if x >= r:
        return 1.0
    return 0.5 + (x * math.sqrt(r * r - x * x) / (r * r) + math.asin(x / r)) / math.pi


def quantile_from_spec(spec: str) -> Callable[[float], float]:
    """Quantile function of a standard law, for deterministic diagonal bases."""
    name, args = _parse_spec(spec)
    if name == "two_point":
        a, b, w = args
        lo, hi = (a, b) if a <= b else (b, a)
        w_lo = w if a <= b else 1 - w
        return lambda u: lo if u <= w_lo else hi
    if name == "projection":
        (alpha,) = args
        return lambda u: 0.0 if u <= 1 - alpha else 1.0
    if name == "semicircular":
        (sigma,) = args

        def q(u, sigma=sigma):
            if u <= 0.0:
                return -2.0 * sigma
            if u >= 1.0:
                return 2.0 * sigma
            return brentq(lambda x: _semicircle_cdf(x, sigma) - u, -2.0 * sigma, 2.0 * sigma)

        return q
    raise InvalidInputError(f"no quantile function for law kind {name!r}")


# ---------------------------------------------------------------------------
# Free products
# ---------------------------------------------------------------------------


class BrownianUnitaryMarginal:
    """Moment oracle of a free unitary Brownian motion at a fixed time.

    A single unitary generator; a word in u^{+-1} reduces to a net power k
    and its moment is the first-moment family value at |k|.
    """

    def __init__(self, t: float):
        if t < 0:
            raise InvalidInputError(f"time must be nonnegative, got {t}")
        self.t = float(t)
        self.groups: tuple = ()
        self.n_unitaries = 1

    def moment(self, word: Word) -> complex:
        net = 0
        for let in word:
            if let.kind != "u" or let.i != 1:
                raise InvalidInputError(f"letter {let} is outside this marginal's alphabet")
            net += let.j
        return complex(free_unitary_brownian_moment(abs(net), self.t))


def free_unitary_brownian_moment(k: int, t: float) -> float:
    """k-th moment of the free unitary Brownian motion at time t.

    exp(-kt/2) * sum_{j=0}^{k-1} (-t)^j / j! * k^(j-1) * C(k, j+1); the first
    moment is exp(-t/2).
    """
    if k == 0:
        return 1.0
    acc = 0.0
    for j in range(k):
        acc += (-t) ** j / math.factorial(j) * k ** (j - 1) * math.comb(k, j + 1)
    return math.exp(-k * t / 2.0) * acc


class FreeProductEvaluator:
    """Evaluates joint moments of freely independent marginal laws.

    Marginals may be NCLaw instances or any object with ``groups``,
    ``n_unitaries`` and ``moment(word)``. Groups and unitary generators of
    the marginals are relabeled consecutively in order.

    The recursion: split a word into maximal blocks of letters from one
    marginal. A single block is a marginal moment. For p >= 2 alternating
    blocks a_1 ... a_p, the trace of the fully centered product vanishes, so
    expanding prod_i (a_i - tau(a_i)) = 0 in expectation gives

        tau(a_1 ... a_p) = sum over nonempty S of (-1)^(|S|+1)
                           prod_{i in S} tau(a_i) * tau(word without S),

    where removed blocks may merge their neighbours; every term on the right
    has strictly fewer blocks, so the recursion terminates.
    """

    def __init__(self, marginals: Sequence):
        if not marginals:
            raise InvalidInputError("need at least one marginal")
        self.marginals = list(marginals)
        self._group_owner = {}   # global group index -> (marginal idx, local group)
        self._unitary_owner = {}
        groups = []
        g_off = 0
        u_off = 0
        for k, m in enumerate(marginals):
            for local, rhos in enumerate(m.groups):
                groups.append(tuple(rhos))
                self._group_owner[g_off + local + 1] = (k, local + 1)
            g_off += len(m.groups)
            for local in range(m.n_unitaries):
                self._unitary_owner[u_off + local + 1] = (k, local + 1)
            u_off += m.n_unitaries
        self.groups = tuple(groups)
        self.n_unitaries = u_off
        self._memo = {}

    def _owner(self, letter: Letter) -> int:
        if letter.kind == "x":
            return self._group_owner[letter.i][0]
        return self._unitary_owner[letter.i][0]

    def _localize(self, letter: Letter) -> Letter:
        if letter.kind == "x":
            return Letter.x(self._group_owner[letter.i][1], letter.j)
        return Letter.u(self._unitary_owner[letter.i][1], letter.j)

    def _block_moment(self, marginal_idx: int, word: Word) -> complex:
        local = tuple(self._localize(l) for l in word)
        return complex(self.marginals[marginal_idx].moment(local))

    def moment(self, word: Word) -> complex:
        if len(word) == 0:
            return 1.0 + 0.0j
        cached = self._memo.get(word)
        if cached is not None:
            return cached

        blocks = []
        start = 0
        for pos in range(1, len(word) + 1):
            if pos == len(word) or self._owner(word[pos]) != self._owner(word[start]):
                blocks.append(word[start:pos])
                start = pos
        if len(blocks) == 1:
            value = self._block_moment(self._owner(word[0]), word)
            self._memo[word] = value
            return value

        p = len(blocks)
        block_tau = [self._block_moment(self._owner(b[0]), b) for b in blocks]
        total = 0.0 + 0.0j
        for mask in range(1, 1 << p):
            coeff = 1.0 + 0.0j
            rest = []
            for i in range(p):
                if mask >> i & 1:
                    coeff *= block_tau[i]
                else:
                    rest.extend(blocks[i])
            sign = -1.0 if bin(mask).count("1") % 2 == 0 else 1.0
            total += sign * coeff * self.moment(tuple(rest))
        self._memo[word] = total
        return total


def free_product_law(marginals: Sequence[NCLaw], max_degree: int) -> NCLaw:
    """The joint law making the marginals freely independent.

    Every marginal must cover ``max_degree``; group labels of the result
    enumerate the marginals' groups in order.
    """
    for k, m in enumerate(marginals):
        cover = getattr(m, "max_degree", None)
        if cover is not None and cover < max_degree:
            raise InvalidInputError(
                f"marginal {k + 1} covers degree {cover}, need {max_degree}"
            )
    ev = FreeProductEvaluator(marginals)
    table = {}
    for w in enumerate_words(_alphabet(ev.groups, ev.n_unitaries), max_degree):
        table[w] = ev.moment(w)
    return NCLaw(ev.groups, ev.n_unitaries, max_degree, table)


def brownian_presence_law(x_joint: NCLaw, t: float, max_degree: int) -> NCLaw:
    """Joint law of (v_i X_i v_i^*, v_i) for free unitary Brownian motions v_i
    at time t, one per group of ``x_joint``, free from each other and from the
    X family.

    A conjugated-variable letter expands to u_i x_{ij} u_i^{-1} in the free
    product of the X law with the n Brownian marginals, so each presence word
    of degree d is evaluated as an underlying word of degree <= 3d.
    """
    if x_joint.n_unitaries != 0:
        raise InvalidInputError("the conjugated family must consist of self-adjoint groups")
    if x_joint.max_degree < max_degree:
        raise InvalidInputError(
            f"the conjugated family's law covers degree {x_joint.max_degree}, need {max_degree}"
        )
    n = x_joint.n_groups
    if 3 * max_degree > MAX_DEGREE:
        raise InvalidInputError(
            f"presence degree {max_degree} needs underlying degree {3 * max_degree} > cap {MAX_DEGREE}"
        )
    ev = FreeProductEvaluator([x_joint] + [BrownianUnitaryMarginal(t) for _ in range(n)])
    table = {}
    for w in enumerate_words(_alphabet(x_joint.groups, n), max_degree):
        expanded = []
        for let in w:
            if let.kind == "x":
                expanded.append(Letter.u(let.i, 1))
                expanded.append(Letter.x(let.i, let.j))
                expanded.append(Letter.u(let.i, -1))
            else:
                expanded.append(let)
        table[w] = ev.moment(tuple(expanded))
    return NCLaw(x_joint.groups, n, max_degree, table)


# ---------------------------------------------------------------------------
# Comparison and serialization
# ---------------------------------------------------------------------------


def _compatible_alphabets(a: NCLaw, b: NCLaw) -> bool:
    return (
        tuple(len(g) for g in a.groups) == tuple(len(g) for g in b.groups)
        and a.n_unitaries == b.n_unitaries
    )


def law_deviation(a: NCLaw, b: NCLaw, max_degree: int) -> tuple[float, Word]:
    """Max over words of degree <= max_degree of |a(w) - b(w)|, with an
    achieving word (the first one in canonical order)."""
    if not _compatible_alphabets(a, b):
        raise InvalidInputError("laws have different alphabets")
    if max_degree > min(a.max_degree, b.max_degree):
        raise InvalidInputError(
            f"laws cover degrees {a.max_degree} and {b.max_degree}, asked for {max_degree}"
        )
    best = -1.0
    best_word = None
    for w in a.words(max_degree):
        dev = abs(a.moments[w] - b.moments[w])
        if dev > best:
            best = dev
            best_word = w
    return best, best_word


def law_to_json(law: NCLaw) -> dict:
    return {
        "groups": [list(g) for g in law.groups],
        "unitaries": law.n_unitaries,
        "max_degree": law.max_degree,
        "moments": [
            {"word": format_word(w), "re": v.real, "im": v.imag}
            for w, v in sorted(law.moments.items(), key=lambda kv: (len(kv[0]), [l.sort_key() for l in kv[0]]))
        ],
    }


def law_from_json(obj: dict) -> NCLaw:
    groups = tuple(tuple(float(x) for x in g) for g in obj["groups"])
    table = {
        parse_word(entry["word"]): complex(entry["re"], entry.get("im", 0.0))
        for entry in obj["moments"]
    }
    return NCLaw(groups, int(obj["unitaries"]), int(obj["max_degree"]), table)


def load_law(path: str) -> NCLaw:
    with open(path, "r", encoding="utf-8") as fh:
        return law_from_json(json.load(fh))
