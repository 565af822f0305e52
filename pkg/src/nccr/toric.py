"""Stacky fans, lattice polytopes, Ehrhart counts, and K-theory ranks.

The singularity attached to a weight configuration is toric: the kernel of
the weight matrix carries the rays of a stacky fan, and when the weights sum
to zero all rays lie on a common height-one hyperplane.  The rank of K_0 of a
stacky crepant resolution is the normalized volume of the height-one
polytope, which this module computes twice, by a deterministic pulling
triangulation and by interpolating the lattice-point counting polynomial of
the dilates; the two must agree exactly.  (The counting polynomial's leading
coefficient is the Euclidean volume; multiplying by (dim P)! gives the
integer normalized volume and the K_0 rank.)
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .exact import (
    hermite_row_basis,
    int_det,
    int_rank,
    lattice_kernel,
    primitive,
    smith_normal_form,
    solve_integer,
)
from .git import Character, WeightConfig, is_unimodular

Point = tuple[int, ...]


@dataclass(frozen=True)
class StackyFan:
    """Rays (marked lattice points on the 1-cones) plus the maximal cones,
    each a sorted tuple of 0-based ray indices."""

    rays: tuple[Point, ...]
    cones: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.rays:
            n = len(self.rays[0])
            if any(len(r) != n for r in self.rays):
                raise ValueError("rays must share one dimension")
        object.__setattr__(
            self, "cones", tuple(tuple(sorted(set(c))) for c in self.cones)
        )
        covered = set(itertools.chain.from_iterable(self.cones))
        if self.rays and covered != set(range(len(self.rays))):
            raise ValueError("every ray index must appear in some cone")

    @property
    def lattice_rank(self) -> int:
        return len(self.rays[0]) if self.rays else 0

    @property
    def num_rays(self) -> int:
        return len(self.rays)

    def at_height_one(self) -> bool:
        return all(r[-1] == 1 for r in self.rays)


@dataclass(frozen=True)
class LatticePolytope:
    """Exact vertex set of a lattice polytope (lexicographically sorted)."""

    ambient_dim: int
    vertices: tuple[Point, ...]
    affine_dim: int

    @classmethod
    def from_points(cls, points: Iterable[Sequence[int]]) -> "LatticePolytope":
        pts = sorted({tuple(int(x) for x in p) for p in points})
        if not pts:
            raise ValueError("a polytope needs at least one point")
        dim = len(pts[0])
        if any(len(p) != dim for p in pts):
            raise ValueError("points must share one dimension")
        adim = _affine_rank(pts)
        verts = _hull_vertices(pts, adim)
        return cls(ambient_dim=dim, vertices=tuple(sorted(verts)), affine_dim=adim)

    @property
    def is_full_dimensional(self) -> bool:
        return self.affine_dim == self.ambient_dim


@dataclass(frozen=True)
class EhrhartData:
    """Coefficients c_0..c_D of the dilate-counting polynomial and the
    normalized volume D! * c_D (always an integer)."""

    coefficients: tuple[Fraction, ...]
    normalized_volume: int

    def evaluate(self, t: int) -> Fraction:
        return sum(c * Fraction(t) ** k for k, c in enumerate(self.coefficients))


# ---------------------------------------------------------------------------
# polytope internals
# ---------------------------------------------------------------------------


def _affine_rank(points: Sequence[Point]) -> int:
    if len(points) <= 1:
        return 0
    base = points[0]
    return int_rank([[p[j] - base[j] for j in range(len(base))] for p in points[1:]])


def _projection_coords(points: Sequence[Point], target: int) -> tuple[int, ...]:
    """Lexicographically first coordinate subset of the given size on which
    the points still have full affine rank."""
    dim = len(points[0])
    for combo in itertools.combinations(range(dim), target):
        proj = [tuple(p[j] for j in combo) for p in points]
        if _affine_rank(proj) == target:
            return combo
    raise ValueError("no coordinate projection preserves the affine rank")


@lru_cache(maxsize=None)
def _facet_data(
    points: tuple[Point, ...]
) -> tuple[tuple[tuple[Point, int], frozenset[int]], ...]:
    """Facets of the full-dimensional conv(points).

    Each entry is ((normal, offset), incident point indices) with the
    primitive integer normal oriented so that <normal, x> <= offset on the
    polytope.  Brute force over codimension-one point subsets; exact.
    """
    dim = len(points[0])
    out: dict[tuple[Point, int], frozenset[int]] = {}
    for combo in itertools.combinations(range(len(points)), dim):
        pts = [points[i] for i in combo]
        diffs = [[pts[k][j] - pts[0][j] for j in range(dim)] for k in range(1, dim)]
        ker = lattice_kernel(diffs, ncols=dim)
        if len(ker) != 1:
            continue
        normal = primitive(ker[0])
        offset = sum(normal[j] * pts[0][j] for j in range(dim))
        vals = [sum(normal[j] * p[j] for j in range(dim)) for p in points]
        if all(v <= offset for v in vals):
            key = (normal, offset)
        elif all(v >= offset for v in vals):
            key = (tuple(-x for x in normal), -offset)
        else:
            continue
        incident = frozenset(
            i for i, p in enumerate(points)
            if sum(key[0][j] * p[j] for j in range(dim)) == key[1]
        )
        out[key] = incident
    return tuple(sorted(out.items()))


def _hull_vertices(points: Sequence[Point], adim: int) -> list[Point]:
    """Vertices of conv(points): the points whose active facet normals span.

    Works in a rank-preserving coordinate projection, where the hull is
    full-dimensional; affine bijections preserve vertex sets.
    """
    pts = sorted(set(points))
    if len(pts) == 1 or adim == 0:
        return [pts[0]]
    dim = len(pts[0])
    if adim < dim:
        combo = _projection_coords(pts, adim)
        proj = [tuple(p[j] for j in combo) for p in pts]
        back = {q: p for q, p in zip(proj, pts)}
        return [back[q] for q in _hull_vertices(proj, adim)]
    facets = _facet_data(tuple(pts))
    verts = []
    for i, p in enumerate(pts):
        active = [list(key[0]) for key, inc in facets if i in inc]
        if int_rank(active) == dim:
            verts.append(p)
    return verts


def _require_full_dim(polytope: LatticePolytope, what: str) -> None:
    if not polytope.is_full_dimensional:
        raise ValueError(
            f"{what} requires a full-dimensional polytope "
            f"(affine dim {polytope.affine_dim} < ambient {polytope.ambient_dim}); "
            "project to the affine hull first"
        )


def count_lattice_points(polytope: LatticePolytope, dilation: int) -> int:
    """Exact number of lattice points of (dilation * P), by bounding-box
    enumeration against the facet inequalities."""
    _require_full_dim(polytope, "lattice point counting")
    if dilation < 0:
        raise ValueError("dilation must be >= 0")
    if dilation == 0:
        return 1
    dim = polytope.ambient_dim
    facets = _facet_data(polytope.vertices)
    lows = [min(v[j] for v in polytope.vertices) * dilation for j in range(dim)]
    highs = [max(v[j] for v in polytope.vertices) * dilation for j in range(dim)]
    count = 0
    for z in itertools.product(*[range(lo, hi + 1) for lo, hi in zip(lows, highs)]):
        if all(
            sum(key[0][j] * z[j] for j in range(dim)) <= key[1] * dilation
            for key, _ in facets
        ):
            count += 1
    return count


def _pulling_simplices(points: tuple[Point, ...], dim: int) -> list[tuple[Point, ...]]:
    """Lexicographic pulling triangulation of conv(points), full-dimensional.

    Cone the lex-smallest point over the recursively triangulated facets not
    containing it.  The recursion depends only on each face's point set, so
    shared faces are triangulated consistently.
    """
    pts = tuple(sorted(set(points)))
    if len(pts) == dim + 1:
        return [pts]
    v0 = pts[0]
    simplices = []
    for key, incident in _facet_data(pts):
        face = [pts[i] for i in sorted(incident)]
        if v0 in face:
            continue
        combo = _projection_coords(face, dim - 1)
        proj = [tuple(p[j] for j in combo) for p in face]
        back = {q: p for q, p in zip(proj, face)}
        for simplex in _pulling_simplices(tuple(proj), dim - 1):
            simplices.append((v0,) + tuple(back[q] for q in simplex))
    return simplices


def normalized_volume(polytope: LatticePolytope) -> int:
    """(dim P)! times the Euclidean volume, via the pulling triangulation."""
    _require_full_dim(polytope, "normalized volume")
    dim = polytope.ambient_dim
    if dim == 0:
        raise ValueError("volume of a zero-dimensional polytope is undefined")
    total = 0
    for simplex in _pulling_simplices(polytope.vertices, dim):
        rows = [
            [simplex[k][j] - simplex[0][j] for j in range(dim)]
            for k in range(1, dim + 1)
        ]
        total += abs(int_det(rows))
    return total


def ehrhart_polynomial(polytope: LatticePolytope) -> EhrhartData:
    """Interpolate the lattice-point counting polynomial from the exact
    counts of the dilates 0..dim P."""
    _require_full_dim(polytope, "the counting polynomial")
    dim = polytope.ambient_dim
    counts = [count_lattice_points(polytope, t) for t in range(dim + 1)]
    coeffs = _interpolate(counts)
    assert coeffs[0] == 1
    lead = coeffs[-1]
    nvol = lead
    for k in range(2, dim + 1):
        nvol *= k
    assert nvol.denominator == 1, "leading term times (dim P)! must be integral"
    return EhrhartData(coefficients=tuple(coeffs), normalized_volume=int(nvol))


def _interpolate(values: Sequence[int]) -> list[Fraction]:
    """Coefficients of the unique polynomial p with p(i) = values[i]."""
    n = len(values)
    a = [[Fraction(i) ** k for k in range(n)] for i in range(n)]
    b = [Fraction(v) for v in values]
    for c in range(n):
        p = next(i for i in range(c, n) if a[i][c] != 0)
        a[c], a[p] = a[p], a[c]
        b[c], b[p] = b[p], b[c]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c] / a[c][c]
                a[i] = [a[i][j] - f * a[c][j] for j in range(n)]
                b[i] -= f * b[c]
    return [b[i] / a[i][i] for i in range(n)]


# ---------------------------------------------------------------------------
# weights <-> stacky fans
# ---------------------------------------------------------------------------


def weights_to_stacky_fan(config: WeightConfig) -> StackyFan:
    """Rays of the quotient singularity's fan, from the kernel of the weight
    matrix; a single maximal cone spans them all.

    For a unimodular configuration the all-ones relation among the weights
    yields an integral height functional, and the emitted basis puts every
    ray at last coordinate 1.
    """
    if config.torsion_orders:
        raise ValueError("stacky-fan conversion requires a torsion-free group")
    matrix = config.free_matrix()
    if int_rank(matrix) != config.rank:
        raise ValueError("weights must span the character lattice rationally")
    basis = lattice_kernel(matrix, ncols=config.num_weights)
    n = len(basis)
    rays = [tuple(basis[j][i] for j in range(n)) for i in range(config.num_weights)]
    if is_unimodular(config) and n > 0:
        height = solve_integer([list(r) for r in rays], [1] * len(rays))
        assert height is not None, "unimodular weights admit a height functional"
        change = _basis_with_last_row(height)
        rays = [
            tuple(sum(change[i][j] * r[j] for j in range(n)) for i in range(n))
            for r in rays
        ]
        assert all(r[-1] == 1 for r in rays)
    cone = tuple(range(len(rays)))
    return StackyFan(rays=tuple(rays), cones=(cone,))


def _basis_with_last_row(functional: Sequence[int]) -> list[list[int]]:
    """A unimodular matrix whose last row is the given primitive vector, so
    that the new last coordinate of S*v equals <functional, v>."""
    n = len(functional)
    _, d, v = smith_normal_form([list(functional)])
    assert d[0][0] == 1, "height functional must be primitive"
    av = [sum(functional[i] * v[i][j] for i in range(n)) for j in range(n)]
    order = list(range(1, n)) + [0]
    t = [[v[i][j] for j in order] for i in range(n)]
    if av[0] == -1:
        for i in range(n):
            t[i][n - 1] = -t[i][n - 1]
    s = _integer_inverse(t)
    assert s[-1] == list(functional)
    return s


def _integer_inverse(mat: Sequence[Sequence[int]]) -> list[list[int]]:
    n = len(mat)
    a = [
        [Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
        for i, row in enumerate(mat)
    ]
    for c in range(n):
        p = next(i for i in range(c, n) if a[i][c] != 0)
        a[c], a[p] = a[p], a[c]
        f = a[c][c]
        a[c] = [x / f for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                g = a[i][c]
                a[i] = [a[i][j] - g * a[c][j] for j in range(2 * n)]
    out = [[a[i][n + j] for j in range(n)] for i in range(n)]
    assert all(x.denominator == 1 for row in out for x in row), "matrix not unimodular"
    return [[int(x) for x in row] for row in out]


def stacky_fan_to_weights(fan: StackyFan) -> WeightConfig:
    """Present the cokernel of m -> (<m, v_i>)_i as a weight configuration:
    the images of the coordinate vectors in Z^l / rho(M)."""
    l = fan.num_rays
    n = fan.lattice_rank
    rho = [list(r) for r in fan.rays]
    if int_rank(rho) != n:
        raise ValueError("rays must span their lattice rationally")
    u, d, _ = smith_normal_form(rho)
    diag = [d[i][i] for i in range(min(l, n))]
    assert all(x > 0 for x in diag)
    torsion_positions = [i for i, x in enumerate(diag) if x > 1]
    torsion_orders = tuple(diag[i] for i in torsion_positions)
    free_positions = list(range(n, l))
    weights = []
    for i in range(l):
        col = [u[row][i] for row in range(l)]
        free = tuple(col[p] for p in free_positions)
        tors = tuple(col[p] % diag[p] for p in torsion_positions)
        weights.append(Character(free, tors))
    return WeightConfig(rank=l - n, weights=tuple(weights), torsion_orders=torsion_orders)


def relation_lattice(config: WeightConfig) -> tuple[tuple[int, ...], ...]:
    """Canonical basis of {m in Z^d : sum_i m_i beta_i = 0 in X(G)}.

    Torsion congruences are handled with one auxiliary unknown per finite
    factor; the kernel of the stacked system is projected back to the
    exponent block and canonicalized.
    """
    d = config.num_weights
    t = len(config.torsion_orders)
    stacked = [
        [w.free[j] for w in config.weights] + [0] * t for j in range(config.rank)
    ]
    for j, k in enumerate(config.torsion_orders):
        row = [w.torsion[j] for w in config.weights] + [0] * t
        row[d + j] = k
        stacked.append(row)
    basis = lattice_kernel(stacked, ncols=d + t)
    return hermite_row_basis([row[:d] for row in basis])


def weight_configs_equivalent(a: WeightConfig, b: WeightConfig) -> bool:
    """Equality up to a group automorphism fixing the coordinate order: both
    present X(G) = Z^d / (relation lattice), so when the weights generate in
    both, equal relation lattices mean equivalent configurations."""
    from .git import _generates_character_group

    if a.num_weights != b.num_weights:
        return False
    if not (_generates_character_group(a) and _generates_character_group(b)):
        raise ValueError("equivalence test requires generating weight sets")
    return relation_lattice(a) == relation_lattice(b)


# ---------------------------------------------------------------------------
# height-one sections and K_0
# ---------------------------------------------------------------------------


def polytope_from_cone_section(fan: StackyFan) -> LatticePolytope:
    """The polytope cut out at height one: drop the last coordinate of the
    rays (which must all equal 1) and take the convex hull."""
    if not fan.rays:
        raise ValueError("fan has no rays")
    if not fan.at_height_one():
        raise ValueError("rays are not at height 1 in this basis")
    return LatticePolytope.from_points([r[:-1] for r in fan.rays])


def _fan_at_height_one(fan: StackyFan) -> StackyFan:
    """Change basis so the last coordinate is the common height, when an
    integral functional with <a, v_i> = 1 exists; error otherwise."""
    if fan.at_height_one():
        return fan
    height = solve_integer([list(r) for r in fan.rays], [1] * fan.num_rays)
    if height is None:
        raise ValueError("rays are not co-planar at height 1 (no Gorenstein form)")
    n = fan.lattice_rank
    change = _basis_with_last_row(height)
    rays = tuple(
        tuple(sum(change[i][j] * r[j] for j in range(n)) for i in range(n))
        for r in fan.rays
    )
    return StackyFan(rays=rays, cones=fan.cones)


def k0_rank(fan: StackyFan) -> int:
    """Rank of K_0 of the stacky crepant resolution: the normalized volume of
    the height-one polytope, cross-checked against the counting polynomial's
    leading coefficient; the two routes must agree exactly."""
    fan = _fan_at_height_one(fan)
    polytope = polytope_from_cone_section(fan)
    _require_full_dim(polytope, "the K_0 rank")
    by_triangulation = normalized_volume(polytope)
    by_counting = ehrhart_polynomial(polytope).normalized_volume
    if by_triangulation != by_counting:
        raise AssertionError(
            f"volume routes disagree: {by_triangulation} vs {by_counting}"
        )
    return by_triangulation


@dataclass(frozen=True)
class K0Presentation:
    """Generators-and-relations data for K_0 of a toric DM stack: one
    invertible class per ray, the lattice of monomial relations (row j gives
    the exponents <e_j, v_i>), and the minimal non-faces I (each contributing
    a relation prod_{i in I} (1 - x_i) = 0)."""

    num_rays: int
    exponent_matrix: tuple[tuple[int, ...], ...]
    minimal_nonfaces: tuple[tuple[int, ...], ...]


def k0_presentation(fan: StackyFan) -> K0Presentation:
    n = fan.lattice_rank
    exponents = tuple(
        tuple(ray[j] for ray in fan.rays) for j in range(n)
    )
    cones = [set(c) for c in fan.cones]
    nonfaces: list[tuple[int, ...]] = []
    for size in range(1, fan.num_rays + 1):
        for combo in itertools.combinations(range(fan.num_rays), size):
            s = set(combo)
            if any(set(nf) <= s for nf in nonfaces):
                continue
            if not any(s <= cone for cone in cones):
                nonfaces.append(combo)
    return K0Presentation(
        num_rays=fan.num_rays,
        exponent_matrix=exponents,
        minimal_nonfaces=tuple(sorted(nonfaces)),
    )


def triangulate_fan(fan: StackyFan) -> StackyFan:
    """Replace the cones by the lexicographic pulling triangulation of the
    height-one section.  Requires every ray to be a vertex of the section."""
    fan = _fan_at_height_one(fan)
    points = [r[:-1] for r in fan.rays]
    index_of = {p: i for i, p in enumerate(points)}
    if len(index_of) != len(points):
        raise ValueError("duplicate rays")
    polytope = LatticePolytope.from_points(points)
    _require_full_dim(polytope, "triangulation")
    if set(polytope.vertices) != set(points):
        raise ValueError(
            "triangulation supports only fans whose rays are all vertices "
            "of the height-one section"
        )
    simplices = _pulling_simplices(polytope.vertices, polytope.ambient_dim)
    cones = tuple(tuple(sorted(index_of[p] for p in s)) for s in simplices)
    return StackyFan(rays=fan.rays, cones=cones)


def simplicial_cone_volume_sum(fan: StackyFan) -> int:
    """Sum over the maximal cones of |det| of their rays.  For a complete
    simplicial height-one fan this equals the K_0 rank."""
    n = fan.lattice_rank
    total = 0
    for cone in fan.cones:
        if len(cone) != n:
            raise ValueError("cones must be simplicial of full dimension")
        total += abs(int_det([list(fan.rays[i]) for i in cone]))
    return total
