"""Permutation modules C[S_n / S_d] and signed chain complexes of them.

The module attached to a composition d of n has as basis the ordered set
partitions of {1..n} with block sizes d.  Morphisms "at the identity double
coset" send a basis element A to the sum of all B whose block-intersection
profile with A equals the profile of the defining interval partitions; for
nested parabolics these are the familiar merge / fiber-sum maps.

Cohomology of a complex of such modules is computed exactly, either through
the central isotypic projectors (reference implementation) or through rank
computations in multiplicity spaces cut out by Young symmetrizers (default,
much smaller matrices).  Both are exact; they are cross-checked in the tests.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from . import linalg
from .repring import (
    RingError,
    VirtualModule,
    character_table,
    kostka,
    partitions,
    zero_module,
)
from .words import Permutation


# ---------------------------------------------------------------------------
# ordered set partitions and permutation modules
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def ordered_set_partitions(n: int, shape: tuple) -> tuple[tuple[frozenset, ...], ...]:
    """All ordered set partitions of {1..n} with block sizes `shape`, sorted
    lexicographically by their sorted block contents (reproducible order)."""
    if sum(shape) != n:
        raise ValueError(f"{shape} is not a composition of {n}")

    def rec(avail, sizes):
        if not sizes:
            yield ()
            return
        k = sizes[0]
        for combo in itertools.combinations(sorted(avail), k):
            block = frozenset(combo)
            for rest in rec(avail - block, sizes[1:]):
                yield (block,) + rest

    out = list(rec(frozenset(range(1, n + 1)), tuple(shape)))
    out.sort(key=lambda osp: tuple(tuple(sorted(b)) for b in osp))
    return tuple(out)


@dataclass(frozen=True)
class PermutationModule:
    """The G-module with basis all ordered set partitions of a given shape."""

    n: int
    shape: tuple[int, ...]

    @property
    def basis(self):
        return ordered_set_partitions(self.n, self.shape)

    @property
    def dim(self) -> int:
        return len(self.basis)


def interval_blocks(shape) -> list[frozenset]:
    """The consecutive-interval set partition of shape d: {1..d1}, ..."""
    out, start = [], 1
    for k in shape:
        out.append(frozenset(range(start, start + k)))
        start += k
    return out


@lru_cache(maxsize=None)
def identity_coset_map(frm: tuple, to: tuple):
    """Matrix (rows: target basis, cols: source basis) of the morphism at the
    identity double coset between the modules of two compositions of n.

    Entry (B, A) is 1 exactly when |A_i ∩ B_j| = |I_i ∩ J_j| for all blocks,
    where I, J are the interval partitions of the two shapes.

    >>> identity_coset_map((1, 1), (1, 1))
    [[1, 0], [0, 1]]
    """
    n = sum(frm)
    if n != sum(to):
        raise ValueError("compositions of different integers")
    I = interval_blocks(frm)
    J = interval_blocks(to)
    prof = tuple(tuple(len(a & b) for b in J) for a in I)
    src = ordered_set_partitions(n, tuple(frm))
    dst = ordered_set_partitions(n, tuple(to))
    dst_index = {osp: i for i, osp in enumerate(dst)}
    M = [[0] * len(src) for _ in range(len(dst))]
    for col, A in enumerate(src):
        for B in _compatible_targets(A, prof, n, tuple(to)):
            M[dst_index[B]][col] = 1
    return M


def _compatible_targets(A, prof, n, to):
    """All OSPs B of shape `to` with |A_i ∩ B_j| = prof[i][j]."""
    blocks_B: list[list[frozenset]] = []

    def rec(j, remaining_by_block):
        if j == len(to):
            yield []
            return
        # choose prof[i][j] elements from each remaining A_i chunk
        choices_per_i = []
        for i, rem in enumerate(remaining_by_block):
            need = prof[i][j]
            if need > len(rem):
                return
            choices_per_i.append(list(itertools.combinations(sorted(rem), need)))
        for picks in itertools.product(*choices_per_i):
            bj = frozenset(x for pick in picks for x in pick)
            new_rem = [
                rem - set(pick) for rem, pick in zip(remaining_by_block, picks)
            ]
            for rest in rec(j + 1, new_rem):
                yield [bj] + rest

    for blocks in rec(0, [set(a) for a in A]):
        yield tuple(blocks)


def module_character(shape, g: Permutation) -> int:
    """Trace of g on the permutation module: the number of fixed basis OSPs."""
    count = 0
    for osp in ordered_set_partitions(g.n, tuple(shape)):
        if all(frozenset(g(x) for x in block) == block for block in osp):
            count += 1
    return count


def decompose_permutation_character(n: int, shape) -> VirtualModule:
    """Inner-product decomposition of the permutation character (test oracle)."""
    table = character_table(n)
    coeffs = {}
    for mu in table.index:
        total = 0
        for k, rho in enumerate(table.index):
            g = _perm_of_cycle_type(n, rho)
            total += table.sizes[k] * table.chi(mu, rho) * module_character(shape, g)
        q, r = divmod(total, factorial(n))
        if r:
            raise RingError("non-integral permutation character multiplicity")
        if q:
            coeffs[mu] = q
    return VirtualModule.from_dict(n, coeffs)


def _perm_of_cycle_type(n: int, rho) -> Permutation:
    img = list(range(1, n + 1))
    start = 1
    for c in rho:
        for k in range(c):
            img[start + k - 1] = start + ((k + 1) % c)
        start += c
    return Permutation(tuple(img))


# ---------------------------------------------------------------------------
# chain complexes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Summand:
    """One labelled permutation-module summand of a chain-complex term."""

    shape: tuple[int, ...]
    label: object = None


@dataclass
class ChainComplex:
    """A cochain complex of direct sums of permutation modules.

    terms[p] is a list of Summands; differentials[p] maps term p to term p+1
    and is stored as a block dict {(row_summand_idx, col_summand_idx): sign}
    meaning sign * identity_coset_map(from_shape, to_shape).
    """

    n: int
    terms: list[list[Summand]]
    blocks: list[dict[tuple[int, int], int]]  # len == len(terms) - 1

    def term_dim(self, p: int) -> int:
        return sum(PermutationModule(self.n, s.shape).dim for s in self.terms[p])

    def differential_matrix(self, p: int):
        """Dense matrix of d^p: term p -> term p+1 (rows: target)."""
        src, dst = self.terms[p], self.terms[p + 1]
        col_off, off = [], 0
        for s in src:
            col_off.append(off)
            off += PermutationModule(self.n, s.shape).dim
        ncols = off
        row_off, off = [], 0
        for s in dst:
            row_off.append(off)
            off += PermutationModule(self.n, s.shape).dim
        nrows = off
        M = [[0] * ncols for _ in range(nrows)]
        for (i, j), sign in self.blocks[p].items():
            B = identity_coset_map(src[j].shape, dst[i].shape)
            for r, row in enumerate(B):
                target = M[row_off[i] + r]
                cj = col_off[j]
                for c, x in enumerate(row):
                    if x:
                        target[cj + c] += sign * x
        return M


def complex_check(c: ChainComplex) -> bool:
    """True iff consecutive differentials compose to zero."""
    for p in range(len(c.blocks) - 1):
        A = c.differential_matrix(p)
        B = c.differential_matrix(p + 1)
        if A and B and not linalg.is_zero_matrix(linalg.mat_mul(B, A)):
            return False
    return True


# ---------------------------------------------------------------------------
# Young symmetrizer multiplicity spaces
# ---------------------------------------------------------------------------

def _canonical_tableau(mu):
    """Rows filled left to right with 1, 2, 3, ..."""
    rows, nxt = [], 1
    for r in mu:
        rows.append(list(range(nxt, nxt + r)))
        nxt += r
    return rows


def _subgroup_perms(n, blocks):
    """All permutations of {1..n} preserving each block, as Permutations."""
    perms_per_block = [list(itertools.permutations(sorted(b))) for b in blocks]
    out = []
    for combo in itertools.product(*perms_per_block):
        img = list(range(1, n + 1))
        for block, arrangement in zip(blocks, combo):
            for src, dst in zip(sorted(block), arrangement):
                img[src - 1] = dst
        out.append(Permutation(tuple(img)))
    return out


def _perm_sign(p: Permutation) -> int:
    return -1 if p.length() % 2 else 1


@lru_cache(maxsize=None)
def young_symmetrizer(n: int, mu: tuple) -> tuple[tuple[Permutation, int], ...]:
    """The (unnormalized) Young symmetrizer of the canonical mu-tableau, as a
    list of (permutation, coefficient): sum over row perms p and column perms
    q of sgn(q) * p * q."""
    rows = _canonical_tableau(mu)
    cols_of = {}
    for r in rows:
        for j, x in enumerate(r):
            cols_of.setdefault(j, []).append(x)
    row_group = _subgroup_perms(n, [frozenset(r) for r in rows])
    col_group = _subgroup_perms(n, [frozenset(c) for c in cols_of.values()])
    acc: dict[tuple, int] = {}
    for p in row_group:
        for q in col_group:
            g = p * q
            acc[g.images] = acc.get(g.images, 0) + _perm_sign(q)
    return tuple((Permutation(img), c) for img, c in acc.items() if c)


def _act_on_osp(g: Permutation, osp):
    return tuple(frozenset(g(x) for x in block) for block in osp)


@lru_cache(maxsize=None)
def _symmetrizer_matrix(n: int, mu: tuple, shape: tuple):
    """Matrix of the Young symmetrizer acting on the module of `shape`."""
    basis = ordered_set_partitions(n, shape)
    index = {osp: i for i, osp in enumerate(basis)}
    M = [[0] * len(basis) for _ in range(len(basis))]
    for g, coef in young_symmetrizer(n, mu):
        for col, osp in enumerate(basis):
            M[index[_act_on_osp(g, osp)]][col] += coef
    return M


@lru_cache(maxsize=None)
def _multiplicity_space(n: int, mu: tuple, shape: tuple):
    """(basis matrix B, left inverse L) for the image of the Young symmetrizer
    on the module of `shape`; its dimension equals the Kostka multiplicity."""
    M = _symmetrizer_matrix(n, mu, shape)
    pivots, B = linalg.column_space_basis(M)
    expected = kostka(mu, tuple(shape))
    if len(pivots) != expected:
        raise RingError(
            f"Young symmetrizer image of {shape} for {mu} has dimension "
            f"{len(pivots)}, expected {expected}"
        )
    if not pivots:
        return B, []
    # left inverse: pick independent rows of B
    k = len(pivots)
    rows_idx = []
    chosen = []
    for i, row in enumerate(B):
        trial = chosen + [row]
        if linalg.rank(trial) == len(trial):
            rows_idx.append(i)
            chosen.append(row)
            if len(chosen) == k:
                break
    sub = [B[i] for i in rows_idx]
    inv = _invert_square(sub)
    return B, (inv, rows_idx)


def _invert_square(A):
    k = len(A)
    aug = [[Fraction(A[i][j]) for j in range(k)] + [Fraction(int(i == j)) for j in range(k)] for i in range(k)]
    for c in range(k):
        piv = next(i for i in range(c, k) if aug[i][c])
        aug[c], aug[piv] = aug[piv], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for i in range(k):
            if i != c and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [[aug[i][k + j] for j in range(k)] for i in range(k)]


@lru_cache(maxsize=None)
def _small_block(n: int, mu: tuple, frm: tuple, to: tuple):
    """The map induced on multiplicity spaces by the identity-coset map."""
    B_from, _ = _multiplicity_space(n, mu, frm)
    B_to, inv_data = _multiplicity_space(n, mu, to)
    k_from = len(B_from[0]) if B_from and B_from[0] else 0
    k_to = len(B_to[0]) if B_to and B_to[0] else 0
    if k_from == 0 or k_to == 0:
        return [[0] * k_from for _ in range(k_to)]
    M = identity_coset_map(frm, to)
    MB = linalg.mat_mul(M, B_from)
    inv, rows_idx = inv_data
    picked = [MB[i] for i in rows_idx]
    X = linalg.mat_mul(inv, picked)
    # certify that MB really lies in the span (exactness guard)
    check = linalg.mat_mul(B_to, X)
    if check != [[Fraction(x) for x in row] for row in MB] and not _mat_eq(check, MB):
        raise RingError("identity-coset map does not preserve multiplicity space")
    return X


def _mat_eq(A, B):
    if len(A) != len(B):
        return False
    for r1, r2 in zip(A, B):
        if len(r1) != len(r2):
            return False
        for x, y in zip(r1, r2):
            if Fraction(x) != Fraction(y):
                return False
    return True


# ---------------------------------------------------------------------------
# cohomology
# ---------------------------------------------------------------------------

def complex_cohomology(c: ChainComplex, method: str = "seed") -> list[VirtualModule]:
    """Exact cohomology of the complex at every position, as virtual modules
    (which must come out effective).

    method "seed": ranks in Young-symmetrizer multiplicity spaces (fast).
    method "isotypic": central projectors e_mu and isotypic ranks (reference).
    """
    if method == "seed":
        result = _cohomology_seed(c)
    elif method == "isotypic":
        result = _cohomology_isotypic(c)
    else:
        raise ValueError(f"unknown method {method!r}")
    for m in result:
        if not m.is_effective():
            raise RingError("negative multiplicity in complex cohomology")
    return result


def _cohomology_seed(c: ChainComplex) -> list[VirtualModule]:
    npos = len(c.terms)
    out = [dict() for _ in range(npos)]
    for mu in partitions(c.n):
        dims = []
        mats = []
        for p in range(npos):
            ks = [kostka(mu, s.shape) for s in c.terms[p]]
            dims.append(sum(ks))
        for p in range(npos - 1):
            src_k = [kostka(mu, s.shape) for s in c.terms[p]]
            dst_k = [kostka(mu, s.shape) for s in c.terms[p + 1]]
            src_off = [0]
            for k in src_k:
                src_off.append(src_off[-1] + k)
            dst_off = [0]
            for k in dst_k:
                dst_off.append(dst_off[-1] + k)
            M = [[Fraction(0)] * src_off[-1] for _ in range(dst_off[-1])]
            for (i, j), sign in c.blocks[p].items():
                if src_k[j] == 0 or dst_k[i] == 0:
                    continue
                blk = _small_block(
                    c.n, mu, c.terms[p][j].shape, c.terms[p + 1][i].shape
                )
                for r in range(dst_k[i]):
                    for s in range(src_k[j]):
                        if blk[r][s]:
                            M[dst_off[i] + r][src_off[j] + s] += sign * blk[r][s]
            mats.append(M)
        ranks = [linalg.rank(M) if M and M[0] else 0 for M in mats]
        for p in range(npos):
            r_out = ranks[p] if p < npos - 1 else 0
            r_in = ranks[p - 1] if p > 0 else 0
            m = dims[p] - r_out - r_in
            if m < 0:
                raise RingError(f"negative multiplicity for {mu} at position {p}")
            if m:
                out[p][mu] = m
    return [VirtualModule.from_dict(c.n, d) for d in out]


@lru_cache(maxsize=None)
def _central_idempotent_matrix(n: int, mu: tuple, shape: tuple):
    """Matrix of sum_g chi_mu(g) g on the module of `shape` (scaled projector)."""
    from itertools import permutations as iperm

    from .repring import character_value
    from .words import cycle_type as ctype

    basis = ordered_set_partitions(n, shape)
    index = {osp: i for i, osp in enumerate(basis)}
    M = [[0] * len(basis) for _ in range(len(basis))]
    for img in iperm(range(1, n + 1)):
        g = Permutation(img)
        chi = character_value(mu, ctype(g))
        if not chi:
            continue
        for col, osp in enumerate(basis):
            M[index[_act_on_osp(g, osp)]][col] += chi
    return M


def _cohomology_isotypic(c: ChainComplex) -> list[VirtualModule]:
    npos = len(c.terms)
    table = character_table(c.n)
    out = [dict() for _ in range(npos)]
    for mu in partitions(c.n):
        chi_e = table.dim(mu)
        proj: list = []
        for p in range(npos):
            blocks = [
                _central_idempotent_matrix(c.n, mu, s.shape) for s in c.terms[p]
            ]
            proj.append(_block_diag(blocks))
        iso_dims = [linalg.rank(P) if P else 0 for P in proj]
        ranks = []
        for p in range(npos - 1):
            D = c.differential_matrix(p)
            DP = linalg.mat_mul(D, proj[p]) if D and proj[p] else []
            ranks.append(linalg.rank(DP) if DP else 0)
        for p in range(npos):
            r_out = ranks[p] if p < npos - 1 else 0
            r_in = ranks[p - 1] if p > 0 else 0
            num = iso_dims[p] - r_out - r_in
            q, rem = divmod(num, chi_e)
            if rem:
                raise RingError(
                    f"non-integral isotypic multiplicity for {mu} at position {p}"
                )
            if q < 0:
                raise RingError(f"negative multiplicity for {mu} at position {p}")
            if q:
                out[p][mu] = q
    return [VirtualModule.from_dict(c.n, d) for d in out]


def _block_diag(blocks):
    total = sum(len(b) for b in blocks)
    if total == 0:
        return []
    M = [[0] * total for _ in range(total)]
    off = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                if x:
                    M[off + i][off + j] = x
        off += len(b)
    return M


def euler_of_complex(c: ChainComplex) -> VirtualModule:
    """Alternating sum of the terms as virtual modules (no ranks needed)."""
    from .repring import i_P

    out = zero_module(c.n)
    for p, term in enumerate(c.terms):
        for s in term:
            out = out + (-1) ** p * i_P(s.shape)
    return out


def complex_to_json(c: ChainComplex) -> dict:
    """Dump format with term shapes, labels, and dense rational matrices."""
    def fmt(x):
        f = Fraction(x)
        return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)

    return {
        "n": c.n,
        "terms": [
            [{"shape": list(s.shape), "label": _label_json(s.label)} for s in term]
            for term in c.terms
        ],
        "differentials": [
            [[fmt(x) for x in row] for row in c.differential_matrix(p)]
            for p in range(len(c.blocks))
        ],
    }


def _label_json(label):
    if label is None:
        return None
    if isinstance(label, (tuple, list, frozenset, set)):
        return sorted(label) if isinstance(label, (frozenset, set)) else list(label)
    return label
