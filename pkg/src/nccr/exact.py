"""Exact integer and rational linear algebra kernels.

Everything in this module is computed over arbitrary-precision integers or
`fractions.Fraction`; no floating point is used anywhere.  Matrices are plain
sequences of row sequences, vectors are sequences; results are returned as
tuples so they can be shared freely between threads.

The two decision procedures (`feasibility` and `cone_contains`) never return a
bare verdict: a feasible answer carries a witness that satisfies every
constraint under exact substitution, an infeasible answer carries a Farkas-type
certificate, and both can be re-checked with the ``check_*`` helpers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

IntVec = tuple[int, ...]
IntMat = tuple[IntVec, ...]

#: relation tokens accepted by `feasibility`
RELATIONS = (">", ">=", "=")


def _as_matrix(rows: Iterable[Sequence[int]]) -> list[list[int]]:
    out = [list(map(int, row)) for row in rows]
    if out and any(len(r) != len(out[0]) for r in out):
        raise ValueError("ragged matrix")
    return out


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with g = gcd(a, b) >= 0 and x*a + y*b = g."""
    x, nx, y, ny, g, ng = 1, 0, 0, 1, a, b
    while ng:
        q = g // ng
        x, nx = nx, x - q * nx
        y, ny = ny, y - q * ny
        g, ng = ng, g - q * ng
    if g < 0:
        x, y, g = -x, -y, -g
    return g, x, y


def vec_gcd(v: Sequence[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, abs(x))
    return g


def primitive(v: Sequence[int]) -> IntVec:
    """v divided by the gcd of its entries (the zero vector stays zero)."""
    g = vec_gcd(v)
    if g == 0:
        return tuple(int(x) for x in v)
    return tuple(int(x) // g for x in v)


def identity_matrix(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def mat_mul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> list[list[int]]:
    if a and b and len(a[0]) != len(b):
        raise ValueError("shape mismatch")
    cols = len(b[0]) if b else 0
    return [[sum(ra[k] * b[k][j] for k in range(len(b))) for j in range(cols)] for ra in a]


def mat_vec(a: Sequence[Sequence[int]], v: Sequence[int]) -> list[int]:
    return [sum(row[j] * v[j] for j in range(len(v))) for row in a]


def dot(u: Sequence, v: Sequence):
    if len(u) != len(v):
        raise ValueError("dimension mismatch")
    return sum(x * y for x, y in zip(u, v))


def int_det(rows: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix (fraction-free Bareiss)."""
    a = _as_matrix(rows)
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("matrix not square")
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1]


def int_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix, by exact rational elimination."""
    a = [[Fraction(x) for x in row] for row in rows]
    if not a:
        return 0
    ncols = len(a[0])
    rank = 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(len(a)):
            if i != rank and a[i][c] != 0:
                f = a[i][c] / a[rank][c]
                a[i] = [a[i][j] - f * a[rank][j] for j in range(ncols)]
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# Smith and Hermite normal forms
# ---------------------------------------------------------------------------


def smith_normal_form(
    rows: Sequence[Sequence[int]],
) -> tuple[IntMat, IntMat, IntMat]:
    """Smith normal form with transforms.

    Returns (U, D, V) with U * A * V = D, U and V unimodular, D diagonal with
    nonnegative entries d_1 | d_2 | ... .
    """
    a = _as_matrix(rows)
    m = len(a)
    n = len(a[0]) if a else 0
    d = [row[:] for row in a]
    u = identity_matrix(m)
    v = identity_matrix(n)

    def row_combine(i1, i2, p, q, r, s):
        # rows (i1, i2) <- (p*r1 + q*r2, r*r1 + s*r2); |ps - qr| = 1
        for mat in (d, u):
            r1, r2 = mat[i1], mat[i2]
            for j in range(len(r1)):
                r1[j], r2[j] = p * r1[j] + q * r2[j], r * r1[j] + s * r2[j]

    def col_combine(j1, j2, p, q, r, s):
        # cols (j1, j2) <- (p*c1 + r*c2, q*c1 + s*c2); |ps - qr| = 1
        for mat in (d, v):
            for row in mat:
                row[j1], row[j2] = p * row[j1] + r * row[j2], q * row[j1] + s * row[j2]

    def negate_row(i):
        for mat in (d, u):
            mat[i] = [-x for x in mat[i]]

    t = 0
    while t < min(m, n):
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if d[i][j] != 0 and (piv is None or abs(d[i][j]) < abs(d[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        if piv[0] != t:
            row_combine(t, piv[0], 0, 1, 1, 0)
        if piv[1] != t:
            col_combine(t, piv[1], 0, 1, 1, 0)
        while True:
            for i in range(t + 1, m):
                if d[i][t] != 0:
                    a, b = d[t][t], d[i][t]
                    if b % a == 0:
                        # plain subtraction keeps the pivot row intact
                        row_combine(t, i, 1, 0, -(b // a), 1)
                    else:
                        g, x, y = xgcd(a, b)
                        row_combine(t, i, x, y, -(b // g), a // g)
            for j in range(t + 1, n):
                if d[t][j] != 0:
                    a, b = d[t][t], d[t][j]
                    if b % a == 0:
                        col_combine(t, j, 1, -(b // a), 0, 1)
                    else:
                        g, x, y = xgcd(a, b)
                        col_combine(t, j, x, -(b // g), y, a // g)
            if all(d[i][t] == 0 for i in range(t + 1, m)):
                break
        if d[t][t] < 0:
            negate_row(t)
        t += 1

    # Enforce the divisibility chain d_i | d_{i+1}: fold the later diagonal
    # entry into column i, replace the 2x2 block diag(a, b) by diag(g, ab/g)
    # with g = gcd(a, b), and sweep until stable.
    k = min(m, n)
    changed = True
    while changed:
        changed = False
        for i in range(k - 1):
            a_i, b_i = d[i][i], d[i + 1][i + 1]
            if a_i != 0 and b_i % a_i != 0:
                changed = True
                col_combine(i, i + 1, 1, 0, 1, 1)  # block [[a, 0], [b, b]]
                g, x, y = xgcd(d[i][i], d[i + 1][i])
                p, q = d[i][i] // g, d[i + 1][i] // g
                row_combine(i, i + 1, x, y, -q, p)  # block [[g, y*b], [0, ab/g]]
                fill = d[i][i + 1]
                assert fill % d[i][i] == 0
                col_combine(i, i + 1, 1, -(fill // d[i][i]), 0, 1)
                if d[i][i] < 0:
                    negate_row(i)
                if d[i + 1][i + 1] < 0:
                    negate_row(i + 1)

    return (
        tuple(tuple(r) for r in u),
        tuple(tuple(r) for r in d),
        tuple(tuple(r) for r in v),
    )


def hermite_row_basis(rows: Iterable[Sequence[int]]) -> IntMat:
    """Canonical basis of the row lattice spanned by ``rows``.

    Row-style Hermite normal form: staircase shape, positive pivots, entries
    above each pivot reduced into [0, pivot).  Zero rows are dropped, so the
    output is a canonical basis of the lattice generated by the input rows.
    """
    r = [list(map(int, row)) for row in rows]
    if not r:
        return ()
    n = len(r[0])
    top = 0
    for c in range(n):
        piv = None
        for i in range(top, len(r)):
            if r[i][c] != 0 and (piv is None or abs(r[i][c]) < abs(r[piv][c])):
                piv = i
        if piv is None:
            continue
        r[top], r[piv] = r[piv], r[top]
        while True:
            done = True
            for i in range(top + 1, len(r)):
                if r[i][c] != 0:
                    q = r[i][c] // r[top][c]
                    r[i] = [r[i][j] - q * r[top][j] for j in range(n)]
                    if r[i][c] != 0:
                        r[top], r[i] = r[i], r[top]
                        done = False
            if done:
                break
        if r[top][c] < 0:
            r[top] = [-x for x in r[top]]
        for i in range(top):
            q = r[i][c] // r[top][c]
            if q:
                r[i] = [r[i][j] - q * r[top][j] for j in range(n)]
        top += 1
    return tuple(tuple(row) for row in r[:top])


def lattice_kernel(rows: Sequence[Sequence[int]], ncols: int | None = None) -> IntMat:
    """Canonical saturated Z-basis of {m : A m = 0}, one basis vector per row.

    The basis comes from the Smith normal form transforms, so the quotient of
    Z^n by the kernel is torsion-free, and it is Hermite-reduced so the result
    is deterministic.
    """
    a = _as_matrix(rows)
    if not a:
        if ncols is None:
            raise ValueError("ncols required for an empty matrix")
        return hermite_row_basis(identity_matrix(ncols))
    n = len(a[0])
    if ncols is not None and ncols != n:
        raise ValueError("ncols disagrees with matrix shape")
    _, d, v = smith_normal_form(a)
    rank = sum(1 for i in range(min(len(a), n)) if d[i][i] != 0)
    basis = [tuple(v[i][j] for i in range(n)) for j in range(rank, n)]
    return hermite_row_basis(basis)


def solve_integer(rows: Sequence[Sequence[int]], rhs: Sequence[int]) -> IntVec | None:
    """One integer solution x of A x = b, or None if there is none."""
    a = _as_matrix(rows)
    m = len(a)
    if len(rhs) != m:
        raise ValueError("dimension mismatch")
    if m == 0:
        return ()
    n = len(a[0])
    u, d, v = smith_normal_form(a)
    ub = mat_vec(u, list(map(int, rhs)))
    y = [0] * n
    for i in range(m):
        di = d[i][i] if i < min(m, n) else 0
        if di == 0:
            if ub[i] != 0:
                return None
        else:
            if ub[i] % di != 0:
                return None
            y[i] = ub[i] // di
    x = mat_vec(v, y)
    return tuple(x)


# ---------------------------------------------------------------------------
# Feasibility with certificates (exact Fourier-Motzkin)
# ---------------------------------------------------------------------------

Constraint = tuple[Sequence, str]


@dataclass(frozen=True)
class FeasibilityCertificate:
    """Verdict plus re-checkable evidence for a linear feasibility query.

    For `feasibility`: ``witness`` is a rational point satisfying every
    constraint; ``separator`` holds Farkas multipliers, one per constraint
    (nonnegative on inequalities, free on equations) whose combination of the
    constraint vectors is zero with positive total weight on the strict ones.

    For `cone_contains`: ``witness`` holds the nonnegative coordinates of the
    target in terms of the generators; ``separator`` is a linear functional
    that is nonnegative on every generator and strictly negative on the target.
    """

    feasible: bool
    witness: tuple[Fraction, ...] | None = None
    separator: tuple[Fraction, ...] | None = None

    def __bool__(self) -> bool:
        return self.feasible


def _normalize_constraints(
    constraints: Sequence[Constraint], dim: int | None
) -> tuple[list[tuple[tuple[Fraction, ...], str]], int]:
    rows = []
    for vec, rel in constraints:
        if rel not in RELATIONS:
            raise ValueError(f"unknown relation {rel!r}")
        v = tuple(Fraction(x) for x in vec)
        if dim is None:
            dim = len(v)
        elif len(v) != dim:
            raise ValueError("dimension mismatch among constraint vectors")
        rows.append((v, rel))
    if dim is None:
        raise ValueError("cannot infer dimension from an empty constraint list")
    return rows, dim


def _ineq_key(coeffs: Sequence[Fraction]) -> tuple[int, ...]:
    denom = 1
    for c in coeffs:
        denom = denom * c.denominator // gcd(denom, c.denominator)
    ints = [int(c * denom) for c in coeffs]
    return primitive(ints)


def _fm_witness(
    rows: Sequence[tuple[tuple[Fraction, ...], str]], dim: int
) -> tuple[Fraction, ...] | None:
    """Fourier-Motzkin: a rational solution of the homogeneous system, или None.

    Each constraint is <x, v> rel 0.  Equations are split into opposite
    non-strict inequalities.  Variables are eliminated from the highest index
    down; the witness is rebuilt front to back with a deterministic rule.
    """
    ineqs: dict[tuple[int, ...], bool] = {}

    def push(vec: tuple[Fraction, ...], strict: bool, into: dict) -> bool:
        if all(c == 0 for c in vec):
            return not strict  # "0 > 0" is the contradiction marker
        key = _ineq_key(vec)
        into[key] = into.get(key, False) or strict
        return True

    for vec, rel in rows:
        if rel == "=":
            if not push(vec, False, ineqs):
                return None
            if not push(tuple(-c for c in vec), False, ineqs):
                return None
        else:
            if not push(vec, rel == ">", ineqs):
                return None

    levels: list[list[tuple[tuple[Fraction, ...], bool]]] = []
    current = [(tuple(Fraction(x) for x in k), s) for k, s in ineqs.items()]
    for k in range(dim - 1, 0, -1):
        levels.append(current)
        nxt: dict[tuple[int, ...], bool] = {}
        pos = [(v, s) for v, s in current if v[k] > 0]
        neg = [(v, s) for v, s in current if v[k] < 0]
        for v, s in current:
            if v[k] == 0:
                if not push(v[:k], s, nxt):
                    return None
        for vp, sp in pos:
            for vn, sn in neg:
                comb = tuple(vp[j] / vp[k] - vn[j] / vn[k] for j in range(k))
                if not push(comb, sp or sn, nxt):
                    return None
        current = [(tuple(Fraction(x) for x in k2), s) for k2, s in nxt.items()]
    levels.append(current)

    witness: list[Fraction] = []
    for k in range(dim):
        system = levels[dim - 1 - k]
        lo: tuple[Fraction, bool] | None = None  # (bound, strict)
        hi: tuple[Fraction, bool] | None = None
        for vec, strict in system:
            c = vec[k]
            rest = -sum(vec[j] * witness[j] for j in range(k))
            if c == 0:
                val = -rest  # fully instantiated constraint; recheck
                if val < 0 or (strict and val == 0):
                    return None
                continue
            bound = rest / c
            if c > 0:
                if lo is None or bound > lo[0] or (bound == lo[0] and strict):
                    lo = (bound, strict)
            else:
                if hi is None or bound < hi[0] or (bound == hi[0] and strict):
                    hi = (bound, strict)
        if lo is None and hi is None:
            witness.append(Fraction(0))
        elif hi is None:
            witness.append(lo[0] + 1)
        elif lo is None:
            witness.append(hi[0] - 1)
        else:
            if lo[0] > hi[0] or (lo[0] == hi[0] and (lo[1] or hi[1])):
                return None
            witness.append((lo[0] + hi[0]) / 2)
    return tuple(witness)


def feasibility(
    constraints: Sequence[Constraint], dim: int | None = None
) -> FeasibilityCertificate:
    """Decide whether some rational x satisfies <x, v> rel 0 for every (v, rel).

    Feasible answers carry a witness; infeasible answers carry Farkas
    multipliers over the original constraints (see FeasibilityCertificate).
    """
    rows, dim = _normalize_constraints(constraints, dim)
    witness = _fm_witness(rows, dim)
    if witness is not None:
        assert check_feasibility_witness(rows, witness)
        return FeasibilityCertificate(True, witness=witness)
    if not rows:
        raise AssertionError("empty system cannot be infeasible")
    # Farkas multipliers: y_i (free on equations, >= 0 otherwise) with
    # sum_i y_i v_i = 0 and positive weight on the strict constraints.
    m = len(rows)
    dual: list[tuple[tuple[Fraction, ...], str]] = []
    for j in range(dim):
        dual.append((tuple(rows[i][0][j] for i in range(m)), "="))
    for i, (_, rel) in enumerate(rows):
        if rel != "=":
            e = [Fraction(0)] * m
            e[i] = Fraction(1)
            dual.append((tuple(e), ">="))
    strict_row = [Fraction(1) if rel == ">" else Fraction(0) for _, rel in rows]
    dual.append((tuple(strict_row), ">"))
    multipliers = _fm_witness(dual, m)
    assert multipliers is not None, "Farkas dual must be feasible"
    assert check_farkas_certificate(rows, multipliers)
    return FeasibilityCertificate(False, separator=multipliers)


def check_feasibility_witness(
    constraints: Sequence[Constraint], witness: Sequence
) -> bool:
    """Exact substitution check of a feasibility witness."""
    for vec, rel in constraints:
        val = dot(tuple(Fraction(x) for x in vec), tuple(Fraction(x) for x in witness))
        if rel == "=" and val != 0:
            return False
        if rel == ">" and not val > 0:
            return False
        if rel == ">=" and not val >= 0:
            return False
    return True


def check_farkas_certificate(
    constraints: Sequence[Constraint], multipliers: Sequence
) -> bool:
    """Check Farkas multipliers proving infeasibility of a constraint system."""
    rows = [(tuple(Fraction(x) for x in vec), rel) for vec, rel in constraints]
    y = tuple(Fraction(x) for x in multipliers)
    if len(y) != len(rows):
        return False
    dim = len(rows[0][0]) if rows else 0
    for i, (_, rel) in enumerate(rows):
        if rel != "=" and y[i] < 0:
            return False
    for j in range(dim):
        if sum(y[i] * rows[i][0][j] for i in range(len(rows))) != 0:
            return False
    strict_weight = sum(y[i] for i, (_, rel) in enumerate(rows) if rel == ">")
    return strict_weight > 0


# ---------------------------------------------------------------------------
# Cone membership with certificates
# ---------------------------------------------------------------------------


def cone_contains(
    generators: Sequence[Sequence], target: Sequence
) -> FeasibilityCertificate:
    """Is target a nonnegative rational combination of the generators?

    Contained: witness = coefficients a with sum a_i g_i = target, a_i >= 0.
    Not contained: separator = functional lam with <lam, g_i> >= 0 for all i
    and <lam, target> < 0 (exists by Farkas duality).
    """
    gens = [tuple(Fraction(x) for x in g) for g in generators]
    t = tuple(Fraction(x) for x in target)
    for g in gens:
        if len(g) != len(t):
            raise ValueError("dimension mismatch")
    k = len(gens)
    # homogenized primal: variables (a_1..a_k, s); sum a_i g_i = s*t, a >= 0, s > 0
    constraints: list[Constraint] = []
    for j in range(len(t)):
        constraints.append((tuple(g[j] for g in gens) + (-t[j],), "="))
    for i in range(k):
        e = [Fraction(0)] * (k + 1)
        e[i] = Fraction(1)
        constraints.append((tuple(e), ">="))
    s_pos = [Fraction(0)] * (k + 1)
    s_pos[k] = Fraction(1)
    constraints.append((tuple(s_pos), ">"))
    cert = feasibility(constraints, dim=k + 1)
    if cert.feasible:
        w = cert.witness
        coeffs = tuple(w[i] / w[k] for i in range(k))
        assert check_cone_witness(gens, t, coeffs)
        return FeasibilityCertificate(True, witness=coeffs)
    dual: list[Constraint] = [(g, ">=") for g in gens]
    dual.append((tuple(-x for x in t), ">"))
    sep = feasibility(dual, dim=len(t))
    assert sep.feasible, "Farkas alternative must hold"
    assert check_cone_separator(gens, t, sep.witness)
    return FeasibilityCertificate(False, separator=sep.witness)


def check_cone_witness(
    generators: Sequence[Sequence], target: Sequence, coefficients: Sequence
) -> bool:
    gens = [tuple(Fraction(x) for x in g) for g in generators]
    t = tuple(Fraction(x) for x in target)
    a = tuple(Fraction(x) for x in coefficients)
    if len(a) != len(gens) or any(x < 0 for x in a):
        return False
    for j in range(len(t)):
        if sum(a[i] * gens[i][j] for i in range(len(gens))) != t[j]:
            return False
    return True


def check_cone_separator(
    generators: Sequence[Sequence], target: Sequence, lam: Sequence
) -> bool:
    lam = tuple(Fraction(x) for x in lam)
    if any(dot(lam, tuple(Fraction(x) for x in g)) < 0 for g in generators):
        return False
    return dot(lam, tuple(Fraction(x) for x in target)) < 0


def integer_direction(witness: Sequence[Fraction]) -> IntVec:
    """Scale a rational vector to a primitive integer vector (same ray)."""
    denom = 1
    for c in witness:
        f = Fraction(c)
        denom = denom * f.denominator // gcd(denom, f.denominator)
    return primitive([int(Fraction(c) * denom) for c in witness])
