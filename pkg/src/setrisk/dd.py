"""Exact double description: generators of rational polyhedral cones.

Everything here works on integer vectors (rationals are cleared to primitive
integer form first), so all arithmetic is exact bignum arithmetic.  The
insertion order of constraints and all tie-breaking are deterministic, which
makes every downstream canonical form byte-stable.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, List, Sequence, Tuple

IntVec = Tuple[int, ...]


def primitive(vec: Sequence) -> IntVec:
    """Scale a rational vector to coprime integers, preserving direction."""
    fracs = [Fraction(x) for x in vec]
    den = 1
    for f in fracs:
        den = lcm(den, f.denominator)
    ints = [int(f * den) for f in fracs]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g > 1:
        ints = [x // g for x in ints]
    return tuple(ints)


def dot(a: Sequence, b: Sequence) -> int:
    return sum(x * y for x, y in zip(a, b))


def rref(rows: Sequence[Sequence], width: int) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form over the rationals.

    Returns the nonzero reduced rows and their pivot column indices.
    """
    mat = [[Fraction(x) for x in row] for row in rows]
    pivots: List[int] = []
    r = 0
    for col in range(width):
        pivot_row = None
        for i in range(r, len(mat)):
            if mat[i][col] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        pv = mat[r][col]
        mat[r] = [x / pv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def nullspace_basis(rows: Sequence[Sequence], width: int) -> List[IntVec]:
    """Canonical primitive-integer basis of {x : rows @ x = 0}."""
    red, pivots = rref(rows, width)
    pivot_set = set(pivots)
    free = [c for c in range(width) if c not in pivot_set]
    basis: List[IntVec] = []
    for f in free:
        vec = [Fraction(0)] * width
        vec[f] = Fraction(1)
        for i, p in enumerate(pivots):
            vec[p] = -red[i][f]
        basis.append(primitive(vec))
    return basis


def _invert(mat: List[List[Fraction]]) -> List[List[Fraction]]:
    n = len(mat)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


def _independent_rows(rows: List[IntVec], width: int, rank: int) -> List[int]:
    """Greedy deterministic choice of `rank` linearly independent row indices."""
    chosen: List[int] = []
    elim: List[List[Fraction]] = []
    for idx, row in enumerate(rows):
        cand = [Fraction(x) for x in row]
        for basis_row in elim:
            lead = next((c for c, v in enumerate(basis_row) if v != 0), None)
            if lead is not None and cand[lead] != 0:
                f = cand[lead] / basis_row[lead]
                cand = [x - f * y for x, y in zip(cand, basis_row)]
        if any(x != 0 for x in cand):
            elim.append(cand)
            chosen.append(idx)
            if len(chosen) == rank:
                break
    return chosen


def _pointed_cone_rays(mrows: List[IntVec], q: int) -> List[IntVec]:
    """Extreme rays of the pointed cone {z in R^q : m.z >= 0 for m in mrows}.

    Requires rank(mrows) == q.  Standard double description with the
    combinatorial adjacency test; active sets are bitmasks over row indices.
    """
    init = _independent_rows(mrows, q, q)
    inv = _invert([[Fraction(x) for x in mrows[i]] for i in init])
    rays: List[IntVec] = [primitive([inv[r][c] for r in range(q)]) for c in range(q)]

    processed: List[int] = list(init)
    init_set = set(init)

    def active_mask(ray: IntVec) -> int:
        mask = 0
        for idx in processed:
            if dot(mrows[idx], ray) == 0:
                mask |= 1 << idx
        return mask

    masks = [active_mask(r) for r in rays]

    for j in range(len(mrows)):
        if j in init_set:
            continue
        vals = [dot(mrows[j], r) for r in rays]
        if all(v >= 0 for v in vals):
            processed.append(j)
            masks = [m | (1 << j) if v == 0 else m for m, v in zip(masks, vals)]
            continue
        pos = [i for i, v in enumerate(vals) if v > 0]
        zero = [i for i, v in enumerate(vals) if v == 0]
        neg = [i for i, v in enumerate(vals) if v < 0]
        new_rays: List[IntVec] = []
        for p in pos:
            for n in neg:
                meet = masks[p] & masks[n]
                if meet.bit_count() < q - 2:
                    continue
                adjacent = True
                for k, mk in enumerate(masks):
                    if k != p and k != n and (mk & meet) == meet:
                        adjacent = False
                        break
                if adjacent:
                    combo = tuple(
                        vals[p] * rays[n][c] - vals[n] * rays[p][c] for c in range(q)
                    )
                    new_rays.append(primitive(combo))
        processed.append(j)
        rays = [rays[i] for i in pos + zero] + new_rays
        masks = [active_mask(r) for r in rays]
    return rays


def cone_generators(rows: Iterable[Sequence], dim: int) -> Tuple[List[IntVec], List[IntVec]]:
    """Generators of the cone {y in R^dim : row . y >= 0 for every row}.

    Returns ``(lines, rays)``: a canonical primitive-integer basis of the
    lineality space and the extreme rays of the pointed part, so the cone is
    span(lines) + cone(rays).  Rays are sorted for determinism.
    """
    seen = {}
    for row in rows:
        p = primitive(row)
        if any(p):
            seen.setdefault(p, None)
    brows: List[IntVec] = list(seen)
    if not brows:
        return ([primitive(tuple(int(i == j) for j in range(dim))) for i in range(dim)], [])

    red, _ = rref(brows, dim)
    q = len(red)
    lines = nullspace_basis(brows, dim)
    nbasis = [primitive(r) for r in red]

    mrows = [primitive(tuple(dot(b, n) for n in nbasis)) for b in brows]
    zrays = _pointed_cone_rays(mrows, q)

    rays = []
    for z in zrays:
        lifted = tuple(sum(z[j] * nbasis[j][c] for j in range(q)) for c in range(dim))
        rays.append(primitive(lifted))
    rays.sort()
    return lines, rays
