"""Words in the free monoid on the simple reflections of S_n.

A word is a sequence of letters in 1..n-1, letter i standing for the simple
transposition s_i = (i, i+1).  Products act on the right: the permutation of
a word applies its letters left to right.  Masks (position subsets) index the
strata of the Demazure compactification attached to a word; two masks with
equal induced subwords are still distinct strata.

The rewriting operations are

    C -- cyclic shift, first letter moves to the end,
    K -- swap two adjacent commuting letters,
    R -- replace a factor s t s by t s t (|s - t| = 1),

and the height of a word counts how many s*s pairs must be cancelled (going
through K/R rewrites only) to reach a reduced word of minimal length in its
conjugacy class.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

from .repring import composition_of_support


class WordError(Exception):
    pass


class SearchExhausted(Exception):
    """A guaranteed rewriting search ran out of moves; indicates a bug or a
    genuine counterexample worth reporting."""


# ---------------------------------------------------------------------------
# words, permutations, masks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Word:
    """A word in the simple reflections of S_n."""

    n: int
    letters: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise WordError("rank must be >= 1")
        for a in self.letters:
            if not 1 <= a <= self.n - 1:
                raise WordError(f"letter {a} out of range for GL_{self.n}")

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.letters)

    @property
    def full_support(self) -> bool:
        return self.support == frozenset(range(1, self.n))

    def subword(self, positions) -> "Word":
        pos = sorted(positions)
        return Word(self.n, tuple(self.letters[p - 1] for p in pos))

    def to_json(self) -> dict:
        return {"n": self.n, "letters": list(self.letters)}

    @staticmethod
    def from_json(data) -> "Word":
        if isinstance(data, str):
            data = json.loads(data)
        return Word(int(data["n"]), tuple(int(a) for a in data["letters"]))

    def __str__(self) -> str:
        return f"W{self.n}[{','.join(map(str, self.letters))}]"


def word(n: int, letters) -> Word:
    return Word(n, tuple(letters))


@dataclass(frozen=True)
class Mask:
    """A subset of positions 1..len(parent); a stratum of the compactification."""

    parent: Word
    positions: frozenset[int]

    def __post_init__(self):
        for p in self.positions:
            if not 1 <= p <= len(self.parent):
                raise WordError(f"position {p} outside word of length {len(self.parent)}")

    def subword(self) -> Word:
        return self.parent.subword(self.positions)

    def to_json(self) -> list:
        return sorted(self.positions)


def meet(a: Mask, b: Mask) -> Mask:
    """Intersection of strata: positionwise meet of masks of a common parent."""
    if a.parent != b.parent:
        raise WordError("masks of different parent words have no meet")
    return Mask(a.parent, a.positions & b.positions)


@dataclass(frozen=True)
class Permutation:
    """Permutation of 1..n in one-line notation: images[i-1] = image of i."""

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise WordError(f"{self.images} is not a permutation")

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, x: int) -> int:
        return self.images[x - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, v in enumerate(self.images):
            inv[v - 1] = i + 1
        return Permutation(tuple(inv))

    def __mul__(self, other: "Permutation") -> "Permutation":
        """(self * other)(x) = other(self(x)): apply self first."""
        return Permutation(tuple(other.images[v - 1] for v in self.images))

    def length(self) -> int:
        """Coxeter length = inversion count."""
        img = self.images
        return sum(
            1
            for i in range(len(img))
            for j in range(i + 1, len(img))
            if img[i] > img[j]
        )

    def cycles(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for start in range(1, self.n + 1):
            if start in seen:
                continue
            cyc, x = [], start
            while x not in seen:
                seen.add(x)
                cyc.append(x)
                x = self(x)
            if len(cyc) > 1:
                out.append(tuple(cyc))
        return out

    def cycle_notation(self) -> str:
        cycs = self.cycles()
        if not cycs:
            return "e"
        return "".join("(" + ",".join(map(str, c)) + ")" for c in cycs)


def identity_perm(n: int) -> Permutation:
    return Permutation(tuple(range(1, n + 1)))


def simple_reflection(n: int, i: int) -> Permutation:
    img = list(range(1, n + 1))
    img[i - 1], img[i] = img[i], img[i - 1]
    return Permutation(tuple(img))


def gamma(w: Word) -> Permutation:
    """Image of a word in S_n: letters act left to right."""
    img = list(range(1, w.n + 1))
    for a in w.letters:
        for k in range(w.n):
            if img[k] == a:
                img[k] = a + 1
            elif img[k] == a + 1:
                img[k] = a
    return Permutation(tuple(img))


def is_reduced(w: Word) -> bool:
    """True iff the word length equals the Coxeter length of its image."""
    return gamma(w).length() == len(w)


def word_stats(w: Word) -> dict:
    return {
        "length": len(w),
        "support": set(w.support),
        "full_support": w.full_support,
    }


def cycle_type(p: Permutation) -> tuple[int, ...]:
    """Decreasing cycle lengths (including fixed points), a partition of n."""
    lens = sorted((len(c) for c in p.cycles()), reverse=True)
    total = sum(lens)
    return tuple(lens) + (1,) * (p.n - total)


def min_conjugacy_length(p: Permutation) -> int:
    """Minimal Coxeter length in the conjugacy class: sum of (cycle_len - 1)."""
    return sum(c - 1 for c in cycle_type(p))


# ---------------------------------------------------------------------------
# rewriting moves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RewriteMove:
    """One of the moves C (cyclic shift), K (commutation), R (braid flip).

    `site` is unused for C; for K it is the left position of the commuting
    pair; for R the left position of the s t s factor.
    """

    kind: str  # "C" | "K" | "R"
    site: int = 0

    def __post_init__(self):
        if self.kind not in ("C", "K", "R"):
            raise WordError(f"unknown move kind {self.kind!r}")


def applicable_moves(w: Word) -> list[RewriteMove]:
    """All moves applicable to w, in canonical (C, K-sites, R-sites) order."""
    out: list[RewriteMove] = []
    ls = w.letters
    if len(ls) >= 1:
        out.append(RewriteMove("C"))
    for p in range(1, len(ls)):
        if abs(ls[p - 1] - ls[p]) >= 2:
            out.append(RewriteMove("K", p))
    for p in range(1, len(ls) - 1):
        if ls[p - 1] == ls[p + 1] and abs(ls[p - 1] - ls[p]) == 1:
            out.append(RewriteMove("R", p))
    return out


def apply_move(w: Word, m: RewriteMove) -> Word:
    """Apply a rewriting move; raises WordError if the site does not match."""
    ls = list(w.letters)
    if m.kind == "C":
        if not ls:
            raise WordError("cyclic shift of the empty word")
        return Word(w.n, tuple(ls[1:] + ls[:1]))
    p = m.site
    if m.kind == "K":
        if not (1 <= p < len(ls)) or abs(ls[p - 1] - ls[p]) < 2:
            raise WordError(f"letters at {p},{p+1} do not commute")
        ls[p - 1], ls[p] = ls[p], ls[p - 1]
        return Word(w.n, tuple(ls))
    if not (1 <= p <= len(ls) - 2) or ls[p - 1] != ls[p + 1] or abs(ls[p - 1] - ls[p]) != 1:
        raise WordError(f"no braid factor s t s at position {p}")
    s, t = ls[p - 1], ls[p]
    ls[p - 1], ls[p], ls[p + 1] = t, s, t
    return Word(w.n, tuple(ls))


def invert_move(w_before: Word, m: RewriteMove) -> RewriteMove:
    """The move undoing m when applied to apply_move(w_before, m)."""
    if m.kind == "C":
        return RewriteMove("C")  # caller applies it len(w)-1 times; see undo_move
    return m


def undo_move(w_after: Word, m: RewriteMove) -> Word:
    """Invert a move: for C rotate backwards, K and R are involutions."""
    if m.kind == "C":
        ls = w_after.letters
        return Word(w_after.n, ls[-1:] + ls[:-1])
    return apply_move(w_after, m)


def transport_mask(positions: frozenset[int], length: int, m: RewriteMove) -> frozenset[int]:
    """Where mask positions go under a move on the parent word."""
    if m.kind == "C":
        return frozenset((p - 1) if p > 1 else length for p in positions)
    p = m.site
    if m.kind == "K":
        swap = {p: p + 1, p + 1: p}
        return frozenset(swap.get(q, q) for q in positions)
    raise WordError("R moves do not transport masks position-wise")


# ---------------------------------------------------------------------------
# braid classes, height, s.w.s normal forms
# ---------------------------------------------------------------------------

def _neighbors(w: Word, kinds: str) -> list[tuple[RewriteMove, Word]]:
    out = []
    for m in applicable_moves(w):
        if m.kind in kinds:
            out.append((m, apply_move(w, m)))
    return out


@lru_cache(maxsize=None)
def height(w: Word) -> int:
    """Height: 0 for words reduced to minimal length in the conjugacy class,
    otherwise 1 + height after cancelling one repeated letter.

    >>> height(word(3, [1, 2]))
    0
    >>> height(word(3, [2, 1, 2]))
    1
    >>> height(word(3, [1, 1]))
    1
    """
    if is_reduced(w):
        g = gamma(w)
        diff = len(w) - min_conjugacy_length(g)
        if diff % 2:
            raise SearchExhausted(f"length parity violated for {w}")
        return diff // 2
    # not reduced: some braid-equivalent word contains s s; find it by BFS
    # over K/R moves (these preserve the braid-monoid element).
    cap = max(10 * len(w), 10)
    seen = {w.letters}
    queue = deque([(w, 0)])
    while queue:
        cur, depth = queue.popleft()
        ls = cur.letters
        for p in range(len(ls) - 1):
            if ls[p] == ls[p + 1]:
                shorter = Word(w.n, ls[:p] + ls[p + 2:])
                return height(shorter) + 1
        if depth >= cap:
            raise SearchExhausted(f"height search hit depth cap for {w}")
        for _, nxt in _neighbors(cur, "KR"):
            if nxt.letters not in seen:
                seen.add(nxt.letters)
                queue.append((nxt, depth + 1))
    raise SearchExhausted(f"no square factor found for non-reduced word {w}")


@lru_cache(maxsize=None)
def find_cksws_form(w: Word):
    """Like find_sws_form but using only C and K moves.  Returns
    (moves, result) when a word with equal first and last letter is
    reachable, else (None, lexicographically least reachable word)."""
    if len(w) >= 2 and w.letters[0] == w.letters[-1]:
        return (), w
    seen = {w.letters: ((), w)}
    queue = deque([w])
    best = w.letters
    while queue:
        cur = queue.popleft()
        moves, _ = seen[cur.letters]
        for m, nxt in _neighbors(cur, "CK"):
            if nxt.letters in seen:
                continue
            seen[nxt.letters] = (moves + (m,), nxt)
            if nxt.letters < best:
                best = nxt.letters
            if len(nxt) >= 2 and nxt.letters[0] == nxt.letters[-1]:
                return seen[nxt.letters]
            queue.append(nxt)
    return None, Word(w.n, best)


@lru_cache(maxsize=None)
def braid_cyclic_class(w: Word) -> tuple[tuple[int, ...], ...]:
    """All words reachable from w by C/K/R moves, sorted lexicographically."""
    seen = {w.letters}
    queue = deque([w])
    while queue:
        cur = queue.popleft()
        for _, nxt in _neighbors(cur, "CKR"):
            if nxt.letters not in seen:
                seen.add(nxt.letters)
                queue.append(nxt)
    return tuple(sorted(seen))


@lru_cache(maxsize=None)
def find_sws_form(w: Word):
    """Search C/K/R rewrites for a word with equal first and last letter.

    Returns (moves, result) on success.  If the class contains no such word
    (exactly the height-zero case) returns (None, representative) with the
    lexicographically least word reachable from w.
    """
    if len(w) >= 2 and w.letters[0] == w.letters[-1]:
        return (), w
    seen = {w.letters: ((), w)}
    queue = deque([w])
    best = w.letters
    while queue:
        cur = queue.popleft()
        moves, _ = seen[cur.letters]
        for m, nxt in _neighbors(cur, "CKR"):
            if nxt.letters in seen:
                continue
            seen[nxt.letters] = (moves + (m,), nxt)
            if nxt.letters < best:
                best = nxt.letters
            if len(nxt) >= 2 and nxt.letters[0] == nxt.letters[-1]:
                return seen[nxt.letters]
            queue.append(nxt)
    return None, Word(w.n, best)


def sws_split(w: Word) -> tuple[int, Word]:
    """For a word s.w'.s return (s, w')."""
    if len(w) < 2 or w.letters[0] != w.letters[-1]:
        raise WordError(f"{w} is not of the shape s.w'.s")
    return w.letters[0], Word(w.n, w.letters[1:-1])


# ---------------------------------------------------------------------------
# Bruhat order and hypersquares in W
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def lex_min_reduced_word(p: Permutation) -> Word:
    """Lexicographically least reduced word, by greedy smallest left descent."""
    n = p.n
    letters = []
    img = list(p.images)
    while True:
        desc = [a for a in range(1, n) if img[a - 1] > img[a]]
        if not desc:
            break
        a = desc[0]
        img[a - 1], img[a] = img[a], img[a - 1]
        letters.append(a)
    return Word(n, tuple(letters))


@lru_cache(maxsize=None)
def bruhat_leq(v: Permutation, w: Permutation) -> bool:
    """Bruhat order via the subword criterion on the lex-least reduced word
    of w (any reduced word works)."""
    if v.n != w.n:
        raise WordError("rank mismatch")
    lv, lw = v.length(), w.length()
    if lv > lw:
        return False
    if lv == lw:
        return v == w
    rw = lex_min_reduced_word(w).letters
    target = v.images

    # scan subwords of rw of length lv; memoized on (position, partial product)
    seen = set()
    stack = [(0, identity_perm(v.n), 0)]
    while stack:
        i, acc, used = stack.pop()
        if used == lv:
            if acc.images == target:
                return True
            continue
        if i >= len(rw) or len(rw) - i < lv - used:
            continue
        key = (i, acc.images, used)
        if key in seen:
            continue
        seen.add(key)
        stack.append((i + 1, acc, used))
        nxt = acc * simple_reflection(v.n, rw[i])
        if nxt.length() == acc.length() + 1:
            stack.append((i + 1, nxt, used + 1))
    return False


@lru_cache(maxsize=None)
def all_permutations(n: int) -> tuple[Permutation, ...]:
    from itertools import permutations as iperm

    return tuple(Permutation(t) for t in iperm(range(1, n + 1)))


def bruhat_interval(v: Permutation, w: Permutation) -> list[Permutation]:
    if not bruhat_leq(v, w):
        raise WordError("lower element is not below the upper one")
    return [
        z
        for z in all_permutations(v.n)
        if bruhat_leq(v, z) and bruhat_leq(z, w)
    ]


def is_hypersquare(v: Permutation, w: Permutation) -> bool:
    """True iff the Bruhat interval [v, w] has binomial level counts.

    >>> from dlcoh.words import gamma, word
    >>> is_hypersquare(identity_perm(3), gamma(word(3, [1])))
    True
    """
    from math import comb

    interval = bruhat_interval(v, w)
    d = w.length() - v.length()
    counts = {}
    for z in interval:
        counts[w.length() - z.length()] = counts.get(w.length() - z.length(), 0) + 1
    return all(counts.get(i, 0) == comb(d, i) for i in range(d + 1))


# ---------------------------------------------------------------------------
# simultaneous pair rewriting (word + codimension-one mask)
# ---------------------------------------------------------------------------

def _pair_apply(vw: Word, hole: int, m: RewriteMove):
    """Apply a move to the pair (v, u) where u = v minus position `hole`.

    Returns (new_word, new_hole) or None when the move is the forbidden
    braid flip sending (v1 s t s v2, v1 s s v2) to (v1 t s t v2, v1 t t v2).
    """
    ls = vw.letters
    if m.kind == "C":
        new = apply_move(vw, m)
        return new, (hole - 1) if hole > 1 else len(ls)
    p = m.site
    if m.kind == "K":
        new = apply_move(vw, m)
        if hole == p:
            return new, p + 1
        if hole == p + 1:
            return new, p
        return new, hole
    # R at site p affects positions p, p+1, p+2
    if hole == p + 1:
        return None  # forbidden: u = v1 s s v2 would become v1 t t v2
    new = apply_move(vw, m)
    if hole == p:
        return new, p + 2
    if hole == p + 2:
        return new, p
    return new, hole


def pair_reduction(v: Word, u: Mask) -> tuple[tuple[RewriteMove, ...], Word, int]:
    """Move a pair (v, u), with u a codimension-one mask of v, into the shape
    where v = s.v'.s, never using the forbidden braid flip on the pair.

    Returns (moves, final_word, final_hole_position).
    """
    if u.parent != v or len(u.positions) != len(v) - 1:
        raise WordError("mask must omit exactly one position of its parent")
    (hole,) = set(range(1, len(v) + 1)) - u.positions
    start = (v.letters, hole)
    seen = {start: ()}
    queue = deque([(v, hole)])
    while queue:
        cur, ch = queue.popleft()
        moves = seen[(cur.letters, ch)]
        if len(cur) >= 2 and cur.letters[0] == cur.letters[-1]:
            return moves, cur, ch
        for m in applicable_moves(cur):
            res = _pair_apply(cur, ch, m)
            if res is None:
                continue
            nxt, nh = res
            key = (nxt.letters, nh)
            if key not in seen:
                seen[key] = moves + (m,)
                queue.append((nxt, nh))
    raise SearchExhausted(
        f"pair reduction exhausted for {v} with hole {hole}; "
        "this would be a counterexample to the avoiding lemma"
    )


# ---------------------------------------------------------------------------
# misc
# ---------------------------------------------------------------------------

def support_composition(w: Word) -> tuple[int, ...]:
    """Composition of the minimal standard Levi containing the word."""
    return composition_of_support(w.n, w.support)


def coxeter_word(n: int) -> Word:
    return Word(n, tuple(range(1, n)))


def is_standard_coxeter_like(w: Word) -> bool:
    """Letters strictly increasing (a standard Coxeter word of some Levi)."""
    ls = w.letters
    return all(ls[i] < ls[i + 1] for i in range(len(ls) - 1))


def _support_runs(n: int, support) -> list[list[int]]:
    runs, cur = [], []
    for a in range(1, n):
        if a in support:
            cur.append(a)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    return runs


def support_runs(w: Word) -> list[list[int]]:
    """Maximal runs of consecutive letters in the support."""
    return _support_runs(w.n, w.support)


def parse_cycles(n: int, text: str) -> Permutation:
    """Parse cycle notation like '(1,3)(2,4)'; cycles compose left to right.

    >>> parse_cycles(4, '(1,3)(2,4)').images
    (3, 4, 1, 2)
    """
    text = text.strip().replace(" ", "")
    if text in ("e", "()", "1", ""):
        return identity_perm(n)
    if not (text.startswith("(") and text.endswith(")")):
        raise WordError(f"bad cycle notation {text!r}")
    img = list(range(1, n + 1))
    for chunk in text[1:-1].split(")("):
        entries = [int(x) for x in chunk.split(",")]
        if len(set(entries)) != len(entries) or any(not 1 <= e <= n for e in entries):
            raise WordError(f"bad cycle {chunk!r}")
        mapping = {entries[i]: entries[(i + 1) % len(entries)] for i in range(len(entries))}
        img = [mapping.get(v, v) for v in img]
    return Permutation(tuple(img))
