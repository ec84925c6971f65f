"""The rational Grothendieck group of unipotent GL_n(F_q)-representations.

Every unipotent irreducible of GL_n(F_q) is indexed by a partition mu of n
(written j_mu below), and all multiplicity questions about the modules
i^G_P = Ind^G_P(1) reduce to ordinary character theory of the symmetric
group S_n.  This module therefore works entirely with S_n characters:

- integer character tables via the Murnaghan-Nakayama rule,
- i_P / generalized Steinberg v_P as integer vectors over partitions,
- parabolic induction (Littlewood-Richardson products) by inner products,
- graded modules (cohomological degree, Tate twist) -> virtual module.

All arithmetic is exact; any non-integral multiplicity raises RingError.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial


class RingError(Exception):
    """Internal consistency failure (non-integral or negative multiplicity)."""


# ---------------------------------------------------------------------------
# partitions and compositions
# ---------------------------------------------------------------------------

def partitions(n: int) -> tuple[tuple[int, ...], ...]:
    """All partitions of n, in descending lexicographic order.

    >>> partitions(4)
    ((4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1))
    """
    return _partitions_cached(n)


@lru_cache(maxsize=None)
def _partitions_cached(n: int) -> tuple[tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    out = []

    def rec(rest, mx, acc):
        if rest == 0:
            out.append(tuple(acc))
            return
        for k in range(min(mx, rest), 0, -1):
            acc.append(k)
            rec(rest - k, k, acc)
            acc.pop()

    rec(n, n, [])
    out.sort(reverse=True)
    return tuple(out)


@lru_cache(maxsize=None)
def compositions(n: int) -> tuple[tuple[int, ...], ...]:
    """All compositions of n (ordered tuples of positive integers), sorted.

    >>> compositions(3)
    ((1, 1, 1), (1, 2), (2, 1), (3,))
    """
    if n == 0:
        return ((),)
    out = []

    def rec(rest, acc):
        if rest == 0:
            out.append(tuple(acc))
            return
        for k in range(1, rest + 1):
            acc.append(k)
            rec(rest - k, acc)
            acc.pop()

    rec(n, [])
    return tuple(sorted(out))


def sort_partition(comp) -> tuple[int, ...]:
    """The partition lambda(d) obtained by sorting a composition decreasingly."""
    return tuple(sorted(comp, reverse=True))


def dominates(mu, nu) -> bool:
    """Dominance order: mu >= nu iff all partial sums of mu weakly exceed nu's."""
    a = b = 0
    for i in range(max(len(mu), len(nu))):
        a += mu[i] if i < len(mu) else 0
        b += nu[i] if i < len(nu) else 0
        if a < b:
            return False
    return True


def conjugate_partition(mu) -> tuple[int, ...]:
    """Transpose of the Young diagram.

    >>> conjugate_partition((3, 1))
    (2, 1, 1)
    """
    if not mu:
        return ()
    return tuple(sum(1 for p in mu if p > j) for j in range(mu[0]))


def coarsenings(d) -> tuple[tuple[int, ...], ...]:
    """All compositions obtained by merging adjacent blocks of d (including d).

    >>> coarsenings((1, 1, 2))
    ((1, 1, 2), (1, 3), (2, 2), (4,))
    """
    d = tuple(d)
    r = len(d)
    out = set()
    for bits in range(1 << max(r - 1, 0)):
        parts = []
        acc = d[0] if d else 0
        for i in range(1, r):
            if bits & (1 << (i - 1)):
                parts.append(acc)
                acc = d[i]
            else:
                acc += d[i]
        if d:
            parts.append(acc)
        out.add(tuple(parts))
    return tuple(sorted(out))


def composition_cuts(d) -> frozenset[int]:
    """Partial sums of d except the last; P_{d1} <= P_{d2} iff cuts reverse-contain."""
    acc, cuts = 0, []
    for part in d[:-1]:
        acc += part
        cuts.append(acc)
    return frozenset(cuts)


def composition_from_cuts(n: int, cuts) -> tuple[int, ...]:
    prev, parts = 0, []
    for c in sorted(cuts):
        parts.append(c - prev)
        prev = c
    parts.append(n - prev)
    return tuple(parts)


def composition_of_support(n: int, support) -> tuple[int, ...]:
    """Composition of the smallest standard Levi containing the reflections in
    `support` (a set of letters in 1..n-1): consecutive letters merge.

    >>> composition_of_support(4, {1})
    (2, 1, 1)
    >>> composition_of_support(5, {1, 2, 4})
    (3, 2)
    """
    cuts = [i for i in range(1, n) if i not in support]
    return composition_from_cuts(n, cuts)


# ---------------------------------------------------------------------------
# symmetric group characters (Murnaghan-Nakayama)
# ---------------------------------------------------------------------------

def _border_strips(mu, length):
    """Pairs (mu_minus_strip, height) for all removable border strips of the
    given length, via beta-numbers: strips of size t correspond to replacing
    a beta-number b by b-t when b-t is fresh and nonnegative."""
    k = len(mu)
    betas = [mu[i] + (k - 1 - i) for i in range(k)]
    bset = set(betas)
    res = []
    for i, b in enumerate(betas):
        nb = b - length
        if nb < 0 or nb in bset:
            continue
        height = sum(1 for c in betas if nb < c < b)
        new_betas = sorted((x for x in betas if x != b), reverse=True)
        new_betas.insert(0, nb)
        new_betas.sort(reverse=True)
        new_mu = tuple(
            p for j, v in enumerate(new_betas) if (p := v - (k - 1 - j)) > 0
        )
        res.append((new_mu, height))
    return res


@lru_cache(maxsize=None)
def character_value(mu: tuple, rho: tuple) -> int:
    """chi_mu evaluated on the class of cycle type rho, by Murnaghan-Nakayama.

    >>> character_value((2, 1), (1, 1, 1))
    2
    >>> character_value((2, 2), (2, 2))
    2
    """
    if not rho:
        return 1
    t, rest = rho[0], rho[1:]
    total = 0
    for smaller, height in _border_strips(mu, t):
        total += (-1) ** height * character_value(smaller, rest)
    return total


@lru_cache(maxsize=None)
def class_size(n: int, rho: tuple) -> int:
    """Size of the conjugacy class of cycle type rho in S_n."""
    cent = 1
    mult: dict[int, int] = {}
    for part in rho:
        mult[part] = mult.get(part, 0) + 1
    for part, m in mult.items():
        cent *= part**m * factorial(m)
    return factorial(n) // cent


@dataclass(frozen=True)
class CharacterTable:
    """Integer character table of S_n, rows and columns indexed by partitions."""

    n: int
    rows: tuple[tuple[int, ...], ...]      # chi_mu(rho), mu-major
    index: tuple[tuple[int, ...], ...]     # the partitions, fixed order
    sizes: tuple[int, ...]                 # class sizes per column

    def chi(self, mu, rho) -> int:
        return self.rows[self.index.index(tuple(mu))][self.index.index(tuple(rho))]

    def dim(self, mu) -> int:
        return self.chi(mu, (1,) * self.n)


@lru_cache(maxsize=None)
def character_table(n: int) -> CharacterTable:
    parts = partitions(n)
    rows = tuple(tuple(character_value(mu, rho) for rho in parts) for mu in parts)
    sizes = tuple(class_size(n, rho) for rho in parts)
    table = CharacterTable(n, rows, parts, sizes)
    _check_orthogonality(table)
    return table


def _check_orthogonality(table: CharacterTable) -> None:
    nfact = factorial(table.n)
    for i, mu in enumerate(table.index):
        for j in range(i, len(table.index)):
            s = sum(
                table.sizes[k] * table.rows[i][k] * table.rows[j][k]
                for k in range(len(table.index))
            )
            expected = nfact if i == j else 0
            if s != expected:
                raise RingError(f"character table of S_{table.n} fails orthogonality")


@lru_cache(maxsize=None)
def kostka(mu: tuple, d: tuple) -> int:
    """Multiplicity of j_mu inside i_P for a parabolic of composition d.

    Equals the Kostka number K_{mu,lambda(d)}, computed as the inner product
    of chi_mu with the permutation character of S_n on S_n/S_d.
    """
    n = sum(d)
    table = character_table(n)
    total = 0
    for k, rho in enumerate(table.index):
        total += table.sizes[k] * table.chi(mu, rho) * _young_fixed_points(d, rho)
    q, r = divmod(total, factorial(n))
    if r:
        raise RingError(f"non-integral Kostka multiplicity for {mu}, {d}")
    return q


@lru_cache(maxsize=None)
def _young_fixed_points(d: tuple, rho: tuple) -> int:
    """Permutation character of S_n on S_n/S_d at cycle type rho: the number
    of ways to distribute the cycles of rho into blocks of sizes d."""
    if not d:
        return 1 if not rho else 0
    first, rest = d[0], d[1:]
    total = 0
    seen = set()
    # choose a sub-multiset of rho summing to `first`
    idx = list(range(len(rho)))

    def choose(i, remaining, chosen):
        if remaining == 0:
            key = tuple(sorted(chosen))
            if key in seen:
                return
            seen.add(key)
            left = list(rho)
            for c in key:
                left.remove(c)
            mult = _multiset_choices(rho, key)
            nonlocal total
            total += mult * _young_fixed_points(rest, tuple(sorted(left, reverse=True)))
            return
        if i == len(rho) or remaining < 0:
            return
        choose(i + 1, remaining, chosen)
        chosen.append(rho[i])
        choose(i + 1, remaining - rho[i], chosen)
        chosen.pop()

    choose(0, first, [])
    return total


def _multiset_choices(rho, key) -> int:
    """Number of ways to pick the sub-multiset `key` out of the multiset rho."""
    from math import comb

    out = 1
    for v in set(key):
        out *= comb(rho.count(v), key.count(v))
    return out


# ---------------------------------------------------------------------------
# virtual modules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VirtualModule:
    """Integer combination of the unipotent irreducibles j_mu of GL_n(F_q)."""

    n: int
    coeffs: tuple[tuple[tuple[int, ...], int], ...]  # sorted ((mu, c), ...), c != 0

    @staticmethod
    def from_dict(n: int, d: dict) -> "VirtualModule":
        items = tuple(sorted((tuple(mu), c) for mu, c in d.items() if c))
        for mu, _ in items:
            if sum(mu) != n:
                raise ValueError(f"{mu} is not a partition of {n}")
        return VirtualModule(n, items)

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def __add__(self, other: "VirtualModule") -> "VirtualModule":
        if self.n != other.n:
            raise ValueError("rank mismatch")
        d = self.as_dict()
        for mu, c in other.coeffs:
            d[mu] = d.get(mu, 0) + c
        return VirtualModule.from_dict(self.n, d)

    def __sub__(self, other: "VirtualModule") -> "VirtualModule":
        return self + (-1) * other

    def __rmul__(self, k: int) -> "VirtualModule":
        return VirtualModule.from_dict(self.n, {mu: k * c for mu, c in self.coeffs})

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def coefficient(self, mu) -> int:
        return self.as_dict().get(tuple(mu), 0)

    def is_effective(self) -> bool:
        return all(c >= 0 for _, c in self.coeffs)

    def dim_as_sn_module(self) -> int:
        table = character_table(self.n)
        return sum(c * table.dim(mu) for mu, c in self.coeffs)

    def render(self) -> str:
        if not self.coeffs:
            return "0"
        bits = []
        for mu, c in self.coeffs:
            name = "j_(" + ",".join(str(p) for p in mu) + ")"
            if c == 1:
                bits.append(name)
            elif c == -1:
                bits.append("-" + name)
            else:
                bits.append(f"{c}*{name}")
        return " + ".join(bits).replace("+ -", "- ")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "coeffs": {",".join(str(p) for p in mu): c for mu, c in self.coeffs},
        }

    @staticmethod
    def from_json(data: dict) -> "VirtualModule":
        coeffs = {
            tuple(int(x) for x in key.split(",") if x): c
            for key, c in data["coeffs"].items()
        }
        return VirtualModule.from_dict(data["n"], coeffs)


def zero_module(n: int) -> VirtualModule:
    return VirtualModule(n, ())


def irreducible(n: int, mu) -> VirtualModule:
    return VirtualModule.from_dict(n, {tuple(mu): 1})


@lru_cache(maxsize=None)
def i_P(d: tuple) -> VirtualModule:
    """The permutation module i^G_P = Ind^G_P(1) for P of composition d.

    >>> i_P((2, 1)).render()
    'j_(2,1) + j_(3)'
    """
    n = sum(d)
    coeffs = {}
    for mu in partitions(n):
        k = kostka(mu, tuple(d))
        if k:
            coeffs[mu] = k
    return VirtualModule.from_dict(n, coeffs)


@lru_cache(maxsize=None)
def v_P(d: tuple) -> VirtualModule:
    """Generalized Steinberg: alternating sum of i_P over coarsenings of d.

    >>> v_P((1, 1, 1)).render()
    'j_(1,1,1)'
    """
    d = tuple(d)
    n = sum(d)
    out = zero_module(n)
    r = len(d)
    for dd in coarsenings(d):
        out = out + (-1) ** (r - len(dd)) * i_P(dd)
    if not out.is_effective():
        raise RingError(f"v_P({d}) came out non-effective")
    return out


def steinberg(n: int) -> VirtualModule:
    return irreducible(n, (1,) * n)


def trivial(n: int) -> VirtualModule:
    return irreducible(n, (n,))


@lru_cache(maxsize=None)
def _lr_coefficient(lam: tuple, mu: tuple, nu: tuple) -> int:
    """Littlewood-Richardson coefficient c^lam_{mu,nu} via character inner
    products over S_a x S_b classes."""
    a, b = sum(mu), sum(nu)
    n = a + b
    ta, tb = character_table(a), character_table(b)
    total = 0
    for i, r1 in enumerate(ta.index):
        for j, r2 in enumerate(tb.index):
            rho = tuple(sorted(r1 + r2, reverse=True))
            total += (
                ta.sizes[i] * tb.sizes[j]
                * ta.rows[ta.index.index(mu)][i]
                * tb.rows[tb.index.index(nu)][j]
                * character_value(lam, rho)
            )
    q, r = divmod(total, factorial(a) * factorial(b))
    if r:
        raise RingError("non-integral Littlewood-Richardson coefficient")
    return q


def induce_product(A: VirtualModule, B: VirtualModule) -> VirtualModule:
    """Parabolic induction Ind^{GL_{a+b}}(A box B), bilinear in both slots."""
    n = A.n + B.n
    coeffs: dict[tuple, int] = {}
    for mu, cm in A.coeffs:
        for nu, cn in B.coeffs:
            for lam in partitions(n):
                c = _lr_coefficient(lam, mu, nu)
                if c:
                    coeffs[lam] = coeffs.get(lam, 0) + c * cm * cn
    return VirtualModule.from_dict(n, coeffs)


# ---------------------------------------------------------------------------
# graded modules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GradedModule:
    """Finitely supported map (cohomological degree, Tate twist) -> VirtualModule."""

    n: int
    entries: tuple[tuple[tuple[int, int], VirtualModule], ...]

    @staticmethod
    def from_dict(n: int, d: dict) -> "GradedModule":
        items = tuple(sorted(((dg, tw), m) for (dg, tw), m in d.items() if m))
        return GradedModule(n, items)

    def as_dict(self) -> dict:
        return dict(self.entries)

    def entry(self, degree: int, twist: int) -> VirtualModule:
        return self.as_dict().get((degree, twist), zero_module(self.n))

    def degree(self, degree: int) -> VirtualModule:
        out = zero_module(self.n)
        for (dg, _), m in self.entries:
            if dg == degree:
                out = out + m
        return out

    def __add__(self, other: "GradedModule") -> "GradedModule":
        if self.n != other.n:
            raise ValueError("rank mismatch")
        d = self.as_dict()
        for key, m in other.entries:
            d[key] = d.get(key, zero_module(self.n)) + m if key in d else m
        return GradedModule.from_dict(self.n, d)

    def __sub__(self, other: "GradedModule") -> "GradedModule":
        return self + other.scale(-1)

    def scale(self, k: int) -> "GradedModule":
        return GradedModule.from_dict(self.n, {key: k * m for key, m in self.entries})

    def shift(self, degree: int = 0, twist: int = 0) -> "GradedModule":
        """Relocate all entries: degree += degree, twist += twist."""
        return GradedModule.from_dict(
            self.n, {(dg + degree, tw + twist): m for (dg, tw), m in self.entries}
        )

    def twist_slice(self, twist: int) -> "GradedModule":
        return GradedModule.from_dict(
            self.n, {(dg, tw): m for (dg, tw), m in self.entries if tw == twist}
        )

    def max_degree(self) -> int:
        return max((dg for (dg, _), _ in self.entries), default=-1)

    def is_effective(self) -> bool:
        return all(m.is_effective() for _, m in self.entries)

    def render(self) -> str:
        """Text form like 'j_(2,2)(-2)[-5] + j_(3)(-3)[-6]^2', sorted by
        degree, then twist, then partition."""
        bits = []
        for (dg, tw), m in sorted(self.entries):
            for mu, c in sorted(m.coeffs):
                if c < 0:
                    name = f"-{-c}*j_(" + ",".join(map(str, mu)) + ")"
                    c = 1
                else:
                    name = "j_(" + ",".join(map(str, mu)) + ")"
                s = name + (f"(-{tw})" if tw else "") + f"[-{dg}]"
                if c > 1:
                    s += f"^{c}"
                bits.append(s)
        return " + ".join(bits) if bits else "0"

    def to_json(self) -> list:
        return [
            {"deg": dg, "twist": tw, "module": m.to_json()}
            for (dg, tw), m in self.entries
        ]

    @staticmethod
    def from_json(n: int, data: list) -> "GradedModule":
        d = {}
        for item in data:
            d[(item["deg"], item["twist"])] = VirtualModule.from_json(item["module"])
        return GradedModule.from_dict(n, d)


def zero_graded(n: int) -> GradedModule:
    return GradedModule(n, ())


def graded_single(n: int, degree: int, twist: int, m: VirtualModule) -> GradedModule:
    return GradedModule.from_dict(n, {(degree, twist): m})


def twist_shift(M: GradedModule, twist: int, degree: int) -> GradedModule:
    """Relocate all entries of M by the given (degree, twist) offsets."""
    return M.shift(degree=degree, twist=twist)


def dual_symmetric(M: GradedModule, ell: int) -> bool:
    """Poincare-duality symmetry for the cohomology of a smooth projective
    variety of dimension ell: entry at (i, t) matches entry at (2*ell-i, ell-i+t).
    """
    d = M.as_dict()
    for (dg, tw), m in d.items():
        mirror = d.get((2 * ell - dg, ell - dg + tw), zero_module(M.n))
        if mirror != m:
            return False
    # also check mirror-side keys not present on this side
    for (dg, tw) in list(d):
        src = d.get((2 * ell - dg, ell - dg + tw))
        if src is None and d[(dg, tw)]:
            return False
    return True


def graded_to_text(M: GradedModule) -> str:
    return M.render()


def graded_roundtrip(M: GradedModule) -> GradedModule:
    return GradedModule.from_json(M.n, json.loads(json.dumps(M.to_json())))
