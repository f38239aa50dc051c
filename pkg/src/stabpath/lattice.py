"""Integer linear algebra on a charge lattice ``Z^n``.

Subgroups are canonically represented by the nonzero rows of their row
Hermite normal form (positive pivots, entries above each pivot reduced into
``[0, pivot)``), so two subgroups are equal iff their bases are equal.
Entries are Python ints checked against the signed 64-bit range.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .errors import NotASubgroup

LatticeVector = tuple[int, ...]

INT64_MAX = 2 ** 63 - 1


def _checked(x: int) -> int:
    if not -INT64_MAX <= x <= INT64_MAX:
        raise OverflowError(f"lattice entry {x} exceeds the 64-bit range")
    return x


def as_vector(v: Iterable[int]) -> LatticeVector:
    out = []
    for x in v:
        if isinstance(x, bool) or int(x) != x:
            raise TypeError(f"lattice coordinates must be integers, got {x!r}")
        out.append(_checked(int(x)))
    return tuple(out)


def add(v: Sequence[int], w: Sequence[int]) -> LatticeVector:
    return tuple(_checked(a + b) for a, b in zip(v, w))


def scale(k: int, v: Sequence[int]) -> LatticeVector:
    return tuple(_checked(k * a) for a in v)


def _row_hnf(rows: Sequence[Sequence[int]], ncols: int):
    """Row-style HNF with transform: returns ``(H, U, rank)`` with ``U @ A == H``."""
    a = [list(r) for r in rows]
    m = len(a)
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    r = 0
    for col in range(ncols):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if a[i][col] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(a[i][col]))
            a[r], a[p] = a[p], a[r]
            u[r], u[p] = u[p], u[r]
            clean = True
            for i in range(r + 1, m):
                if a[i][col]:
                    q = a[i][col] // a[r][col]
                    a[i] = [_checked(x - q * y) for x, y in zip(a[i], a[r])]
                    u[i] = [_checked(x - q * y) for x, y in zip(u[i], u[r])]
                    if a[i][col]:
                        clean = False
            if clean:
                break
        if a[r][col] == 0:
            continue
        if a[r][col] < 0:
            a[r] = [-x for x in a[r]]
            u[r] = [-x for x in u[r]]
        for i in range(r):
            q = a[i][col] // a[r][col]
            if q:
                a[i] = [_checked(x - q * y) for x, y in zip(a[i], a[r])]
                u[i] = [_checked(x - q * y) for x, y in zip(u[i], u[r])]
        r += 1
    return a, u, r


def hermite_basis(vectors: Sequence[Sequence[int]], n: int) -> tuple[LatticeVector, ...]:
    if not vectors:
        return ()
    h, _, r = _row_hnf(vectors, n)
    return tuple(tuple(row) for row in h[:r])


def _transpose(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    return [[row[j] for row in rows] for j in range(ncols)]


def right_kernel(rows: Sequence[Sequence[int]], n: int) -> list[LatticeVector]:
    """Basis of ``{x in Z^n : row . x = 0 for every row}``; always saturated."""
    if not rows:
        return [tuple(int(i == j) for j in range(n)) for i in range(n)]
    at = _transpose(rows, n)
    _, u, r = _row_hnf(at, len(rows))
    return [tuple(row) for row in u[r:]]


@dataclass(frozen=True)
class Subgroup:
    """Subgroup of ``Z^n`` spanned by ``generators``."""

    ambient_rank: int
    generators: tuple[LatticeVector, ...]
    hermite_basis: tuple[LatticeVector, ...] = field(compare=False)

    def __eq__(self, other):
        if not isinstance(other, Subgroup):
            return NotImplemented
        return (self.ambient_rank, self.hermite_basis) == (other.ambient_rank, other.hermite_basis)

    def __hash__(self):
        return hash((self.ambient_rank, self.hermite_basis))

    @property
    def rank(self) -> int:
        return len(self.hermite_basis)

    def coordinates(self, v: Sequence[int]) -> tuple[int, ...] | None:
        """Integer coordinates of ``v`` in the Hermite basis, or ``None`` if ``v`` is not a member."""
        rest = list(v)
        coords = []
        for row in self.hermite_basis:
            p = next(j for j, x in enumerate(row) if x)
            if rest[p] % row[p]:
                return None
            c = rest[p] // row[p]
            coords.append(c)
            if c:
                rest = [x - c * y for x, y in zip(rest, row)]
        if any(rest):
            return None
        return tuple(coords)

    def __contains__(self, v) -> bool:
        return self.coordinates(v) is not None

    def issubgroup(self, other: Subgroup) -> bool:
        return all(b in other for b in self.hermite_basis)

    def __le__(self, other: Subgroup) -> bool:
        return self.issubgroup(other)


def span(vectors: Iterable[Sequence[int]], n: int | None = None) -> Subgroup:
    vecs = [as_vector(v) for v in vectors]
    if n is None:
        if not vecs:
            raise ValueError("ambient rank required for an empty span")
        n = len(vecs[0])
    for v in vecs:
        if len(v) != n:
            raise ValueError(f"vector {v} does not have ambient length {n}")
    return Subgroup(n, tuple(vecs), hermite_basis(vecs, n))


def zero_subgroup(n: int) -> Subgroup:
    return span([], n)


def full_lattice(n: int) -> Subgroup:
    return span([tuple(int(i == j) for j in range(n)) for i in range(n)], n)


def rank_of(vectors: Sequence[Sequence[int]], n: int) -> int:
    return len(hermite_basis(list(vectors), n))


def saturate(s: Subgroup) -> Subgroup:
    if s.rank == 0:
        return s
    k = right_kernel(s.hermite_basis, s.ambient_rank)
    return span(right_kernel(k, s.ambient_rank), s.ambient_rank)


def smith_diagonal(rows: Sequence[Sequence[int]], ncols: int) -> list[int]:
    """Nonzero Smith invariant factors ``d_1 | d_2 | ...`` of an integer matrix."""
    a = [list(r) for r in hermite_basis(rows, ncols)]
    d = []
    while a and any(x for r in a for x in r):
        # pivot on the smallest nonzero entry, clear its row and column, repeat
        _, pi, pj = min((abs(x), i, j) for i, r in enumerate(a) for j, x in enumerate(r) if x)
        p = a[pi][pj]
        done = True
        for i in range(len(a)):
            if i != pi and a[i][pj]:
                q = a[i][pj] // p
                a[i] = [x - q * y for x, y in zip(a[i], a[pi])]
                done = done and a[i][pj] == 0
        for j in range(ncols):
            if j != pj and a[pi][j]:
                q = a[pi][j] // p
                for r in a:
                    r[j] -= q * r[pj]
                done = done and a[pi][j] == 0
        if not done:
            continue
        if any(x % p for i, r in enumerate(a) if i != pi for x in r):
            i = next(i for i, r in enumerate(a) if i != pi and any(x % p for x in r))
            a[pi] = [x + y for x, y in zip(a[pi], a[i])]
            continue
        d.append(abs(p))
        a = [[x for j, x in enumerate(r) if j != pj] for i, r in enumerate(a) if i != pi]
        ncols -= 1
    return sorted(d)


def _as_int_matrix(mat):
    if all(x.denominator == 1 for row in mat for x in row):
        return tuple(tuple(int(x) for x in row) for row in mat)
    return tuple(tuple(mat_row) for mat_row in mat)


def _invert_fraction_matrix(m: list[list[Fraction]]) -> list[list[Fraction]]:
    k = len(m)
    aug = [row[:] + [Fraction(int(i == j)) for j in range(k)] for i, row in enumerate(m)]
    for c in range(k):
        p = next(i for i in range(c, k) if aug[i][c] != 0)
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [x / piv for x in aug[c]]
        for i in range(k):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [row[k:] for row in aug]


@dataclass(frozen=True)
class QuotientPresentation:
    """Torsion-free quotient ``Num / saturate_Num(Den)`` with an explicit projection.

    ``projection`` maps ambient coordinates to quotient coordinates; it is an
    integer matrix whenever ``Num`` is saturated in the ambient lattice and a
    matrix of Fractions otherwise (it is only meaningful on ``Num``).
    """

    rank: int
    projection: tuple[tuple, ...]
    torsion_orders: tuple[int, ...]
    numerator: Subgroup
    denominator: Subgroup

    def project(self, v: Sequence[int]) -> tuple[int, ...]:
        if v not in self.numerator:
            raise NotASubgroup(f"{tuple(v)} does not lie in the numerator subgroup")
        out = []
        for row in self.projection:
            x = sum(Fraction(a) * b for a, b in zip(row, v))
            if x.denominator != 1:
                raise ArithmeticError("projection produced a non-integral coordinate")
            out.append(int(x))
        return tuple(out)


def quotient_torsion_free(num: Subgroup, den: Subgroup) -> QuotientPresentation:
    n = num.ambient_rank
    if den.ambient_rank != n:
        raise NotASubgroup("numerator and denominator live in different lattices")
    if not den.issubgroup(num):
        raise NotASubgroup("denominator is not contained in the numerator")
    r_num = num.rank
    c_den = [num.coordinates(b) for b in den.hermite_basis]
    torsion = tuple(d for d in smith_diagonal(c_den, r_num) if d > 1) if c_den else ()
    if c_den:
        sat = saturate(span(c_den, r_num))
        q_rows = hermite_basis(right_kernel(sat.hermite_basis, r_num), r_num)
    else:
        q_rows = tuple(tuple(int(i == j) for j in range(r_num)) for i in range(r_num))
    rank = len(q_rows)
    if r_num == 0:
        return QuotientPresentation(0, (), torsion, num, den)
    # right inverse M of the numerator basis N (N @ M == I), via the HNF of N^T
    nt = _transpose(num.hermite_basis, n)
    h, u, _ = _row_hnf(nt, r_num)
    r_top = [[Fraction(x) for x in row] for row in h[:r_num]]
    u_top = [[Fraction(x) for x in row] for row in u[:r_num]]
    rt_inv = _invert_fraction_matrix([list(col) for col in zip(*r_top)])
    # M = U_top^T @ (R^T)^-1 ; projection = Q @ M^T = Q @ (R^-1) @ U_top
    mt = [[sum(rt_inv[k][i] * u_top[k][j] for k in range(r_num)) for j in range(n)]
          for i in range(r_num)]
    proj = [[sum(Fraction(q[i]) * mt[i][j] for i in range(r_num)) for j in range(n)]
            for q in q_rows]
    return QuotientPresentation(rank, _as_int_matrix(proj), torsion, num, den)


def independent_over_Q(subgroups: Sequence[Subgroup]) -> bool:
    if not subgroups:
        return True
    n = subgroups[0].ambient_rank
    if any(s.ambient_rank != n for s in subgroups):
        raise ValueError("subgroups must share the ambient rank")
    union = [b for s in subgroups for b in s.hermite_basis]
    return rank_of(union, n) == sum(s.rank for s in subgroups)
