"""Weight combinatorics for abelian quotient singularities.

A configuration is an abelian reductive group G = (torus of rank r) x (finite
abelian part) together with the characters by which it scales the coordinates
of a linear representation.  Everything downstream of the existence criterion
for a non-commutative crepant resolution reduces to exact questions about
these weight vectors: which coordinate supports admit a destabilizing
one-parameter subgroup, which supports survive a chosen linearization, and how
large the unstable locus is.

One-parameter subgroups live in Z^rank only (the finite factors admit none),
so every lambda-quantified computation uses free parts; unimodularity and
lattice generation also see the torsion components.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .exact import (
    FeasibilityCertificate,
    cone_contains,
    feasibility,
    int_rank,
    integer_direction,
    smith_normal_form,
)

#: exhaustive support enumeration is refused beyond this many weights
MAX_ENUMERATION_WEIGHTS = 24


@dataclass(frozen=True)
class Character:
    """An element of X(G) = Z^rank  (+)  Z/k_1 (+) ... (+) Z/k_t."""

    free: tuple[int, ...]
    torsion: tuple[int, ...] = ()


@dataclass(frozen=True)
class WeightConfig:
    """The group G and representation, as a list of characters.

    rank: rank of the torus part of G.
    torsion_orders: orders (each >= 2) of the finite cyclic factors.
    weights: one character per coordinate of the representation.
    """

    rank: int
    weights: tuple[Character, ...]
    torsion_orders: tuple[int, ...] = ()

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be >= 0")
        if any(k < 2 for k in self.torsion_orders):
            raise ValueError("torsion orders must be >= 2")
        fixed = tuple(self._normalize(w) for w in self.weights)
        object.__setattr__(self, "weights", fixed)

    @classmethod
    def make(
        cls,
        rank: int,
        weights: Iterable,
        torsion_orders: Sequence[int] = (),
    ) -> "WeightConfig":
        """Build a configuration from raw weight data.

        Each weight may be a Character, a flat integer sequence (the free
        part; allowed only when there is no torsion), or a pair
        (free part, torsion part).
        """
        orders = tuple(int(k) for k in torsion_orders)
        cfg = cls(rank=int(rank), weights=(), torsion_orders=orders)
        coerced = tuple(cfg.character(w) for w in weights)
        return cls(rank=int(rank), weights=coerced, torsion_orders=orders)

    # -- characters -------------------------------------------------------

    def _normalize(self, c: Character) -> Character:
        if len(c.free) != self.rank:
            raise ValueError(f"free part must have length {self.rank}")
        if len(c.torsion) != len(self.torsion_orders):
            raise ValueError(
                f"torsion part must have length {len(self.torsion_orders)}"
            )
        tors = tuple(x % k for x, k in zip(c.torsion, self.torsion_orders))
        return Character(tuple(int(x) for x in c.free), tors)

    def character(self, data) -> Character:
        """Coerce raw data (see `make`) to a normalized Character."""
        if isinstance(data, Character):
            return self._normalize(data)
        data = tuple(data)
        if (
            len(data) == 2
            and not isinstance(data[0], int)
            and not isinstance(data[1], int)
        ):
            free, torsion = data
            return self._normalize(Character(tuple(free), tuple(torsion)))
        if self.torsion_orders:
            raise ValueError("configuration has torsion; pass (free, torsion) pairs")
        return self._normalize(Character(data))

    def zero_character(self) -> Character:
        return Character((0,) * self.rank, (0,) * len(self.torsion_orders))

    def add(self, a: Character, b: Character) -> Character:
        return self._normalize(
            Character(
                tuple(x + y for x, y in zip(a.free, b.free)),
                tuple(x + y for x, y in zip(a.torsion, b.torsion)),
            )
        )

    def neg(self, a: Character) -> Character:
        return self._normalize(
            Character(tuple(-x for x in a.free), tuple(-x for x in a.torsion))
        )

    def sub(self, a: Character, b: Character) -> Character:
        return self.add(a, self.neg(b))

    def scale(self, k: int, a: Character) -> Character:
        return self._normalize(
            Character(tuple(k * x for x in a.free), tuple(k * x for x in a.torsion))
        )

    def sum_characters(self, chars: Iterable[Character]) -> Character:
        total = self.zero_character()
        for c in chars:
            total = self.add(total, c)
        return total

    # -- views ------------------------------------------------------------

    @property
    def num_weights(self) -> int:
        return len(self.weights)

    @property
    def dim_group(self) -> int:
        return self.rank

    def free_matrix(self) -> tuple[tuple[int, ...], ...]:
        """rank x d integer matrix whose i-th column is the i-th free part."""
        return tuple(
            tuple(w.free[j] for w in self.weights) for j in range(self.rank)
        )

    def pairing(self, lam: Sequence[int], c: Character) -> int:
        """<lambda, c> for a one-parameter subgroup lambda in Z^rank."""
        if len(lam) != self.rank:
            raise ValueError("lambda must have length rank")
        return sum(int(l) * x for l, x in zip(lam, c.free))


def is_unimodular(config: WeightConfig) -> bool:
    """True iff the weights sum to zero in X(G), torsion included."""
    total = config.sum_characters(config.weights)
    return total == config.zero_character()


# ---------------------------------------------------------------------------
# Genericity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenericityReport:
    """Operational genericity check, with one flag per condition.

    generates_group: the weights generate X(G) as a group.
    zero_interior: 0 lies in the interior of the real cone of the weights.
    two_positive: every nonzero one-parameter subgroup pairs strictly
        positively with at least two weights.
    counterexample: a primitive integer lambda violating the last condition,
        when one exists.
    """

    generates_group: bool
    zero_interior: bool
    two_positive: bool
    counterexample: tuple[int, ...] | None = None

    @property
    def generic(self) -> bool:
        return self.generates_group and self.zero_interior and self.two_positive

    def __bool__(self) -> bool:
        return self.generic


def _generates_character_group(config: WeightConfig) -> bool:
    r = config.rank
    t = len(config.torsion_orders)
    if r + t == 0:
        return True
    rows = [list(w.free) + list(w.torsion) for w in config.weights]
    for j, k in enumerate(config.torsion_orders):
        rel = [0] * (r + t)
        rel[r + j] = k
        rows.append(rel)
    if not rows:
        return False
    _, d, _ = smith_normal_form(rows)
    factors = [d[i][i] for i in range(min(len(rows), r + t))]
    return len(factors) == r + t and all(f == 1 for f in factors)


def _zero_in_cone_interior(config: WeightConfig) -> bool:
    # cone(weights) = R^rank iff every signed unit vector is contained
    r = config.rank
    if r == 0:
        return True
    gens = [w.free for w in config.weights]
    for j in range(r):
        for sign in (1, -1):
            target = [0] * r
            target[j] = sign
            if not cone_contains(gens, target):
                return False
    return True


def _single_positive_witness(config: WeightConfig) -> tuple[int, ...] | None:
    """A nonzero lambda with at most one strictly positive pairing, or None."""
    r = config.rank
    if r == 0:
        return None
    d = config.num_weights
    for exempt in [None, *range(d)]:
        base = [
            (config.weights[i].free, ">=")
            for i in range(d)
            if i != exempt
        ]
        base = [(tuple(-x for x in vec), rel) for vec, rel in base]  # <lam, b> <= 0
        for j in range(r):
            for sign in (1, -1):
                unit = [0] * r
                unit[j] = sign
                cert = feasibility(base + [(tuple(unit), ">")], dim=r)
                if cert.feasible:
                    lam = integer_direction(cert.witness)
                    positives = [
                        i for i, w in enumerate(config.weights)
                        if config.pairing(lam, w) > 0
                    ]
                    assert len(positives) <= 1
                    return lam
    return None


def is_generic(config: WeightConfig) -> GenericityReport:
    """Operational genericity: lattice generation, interior zero, and the
    two-strictly-positive-pairings condition for every nonzero lambda."""
    g1 = _generates_character_group(config)
    g2 = _zero_in_cone_interior(config)
    bad = _single_positive_witness(config)
    return GenericityReport(
        generates_group=g1,
        zero_interior=g2,
        two_positive=bad is None,
        counterexample=bad,
    )


# ---------------------------------------------------------------------------
# Unstable supports
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _support_certificate(
    config: WeightConfig, support: frozenset[int]
) -> FeasibilityCertificate:
    """Feasibility of { <lam, beta_i> > 0 for i in support }."""
    constraints = [(config.weights[i].free, ">") for i in sorted(support)]
    return feasibility(constraints, dim=config.rank)


def support_is_destabilizable(config: WeightConfig, support: Iterable[int]) -> bool:
    """Can some one-parameter subgroup pair strictly positively with every
    weight in the support?  (Then the corresponding stratum is unstable.)"""
    support = frozenset(support)
    if not support:
        return config.rank > 0
    return _support_certificate(config, support).feasible


def _check_enumeration_size(config: WeightConfig) -> None:
    if config.num_weights > MAX_ENUMERATION_WEIGHTS:
        raise ValueError(
            f"support enumeration refused for d = {config.num_weights} > "
            f"{MAX_ENUMERATION_WEIGHTS} weights"
        )


def maximal_destabilizable_supports(
    config: WeightConfig,
) -> tuple[frozenset[int], ...]:
    """All inclusion-maximal nonempty supports admitting a destabilizing
    one-parameter subgroup.  Feasible supports are closed under subsets, so
    the depth-first search prunes an entire branch on the first failure."""
    _check_enumeration_size(config)
    d = config.num_weights
    found: list[frozenset[int]] = []

    def feasible(t: frozenset[int]) -> bool:
        return _support_certificate(config, t).feasible

    def dfs(current: frozenset[int], start: int) -> None:
        extended = False
        for j in range(start, d):
            bigger = current | {j}
            if feasible(bigger):
                extended = True
                dfs(bigger, j + 1)
        if not extended and current:
            if all(j in current or not feasible(current | {j}) for j in range(d)):
                if current not in found:
                    found.append(current)

    dfs(frozenset(), 0)
    return tuple(sorted(found, key=lambda s: (len(s), sorted(s))))


@dataclass(frozen=True)
class UnstableDimension:
    dimension: int
    witness_lambda: tuple[int, ...] | None = None
    witness_support: tuple[int, ...] | None = None


def unstable_dimension(config: WeightConfig) -> UnstableDimension:
    """Dimension of the unstable locus: the largest support size admitting a
    destabilizing lambda; 0 with no witness if there is none.

    Tie-break: the lexicographically smallest support of maximal size, with
    the canonical integer lambda scaled out of the feasibility witness.
    """
    maxima = maximal_destabilizable_supports(config)
    if not maxima:
        return UnstableDimension(0)
    best = max(len(s) for s in maxima)
    winner = min((tuple(sorted(s)) for s in maxima if len(s) == best))
    cert = _support_certificate(config, frozenset(winner))
    lam = integer_direction(cert.witness)
    assert all(config.pairing(lam, config.weights[i]) > 0 for i in winner)
    return UnstableDimension(best, witness_lambda=lam, witness_support=winner)


# ---------------------------------------------------------------------------
# Semistability and the chosen linearization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SemistabilityCertificate:
    semistable: bool
    support: tuple[int, ...]
    certificate: FeasibilityCertificate

    def __bool__(self) -> bool:
        return self.semistable


def is_support_semistable(
    config: WeightConfig, support: Iterable[int], chi
) -> SemistabilityCertificate:
    """A point with the given nonzero coordinates survives the linearization
    chi iff -chi lies in the cone of the supported weights (free parts; the
    finite factors admit no one-parameter subgroups and are ignored here)."""
    chi = config.character(chi)
    support = tuple(sorted(set(support)))
    gens = [config.weights[i].free for i in support]
    target = tuple(-x for x in chi.free)
    cert = cone_contains(gens, target)
    return SemistabilityCertificate(cert.feasible, support, cert)


def is_chi_generic(config: WeightConfig, chi) -> bool:
    """True iff every semistable stratum has full-rank weight span, i.e. -chi
    avoids every cone spanned by a rank-deficient weight subset.

    Every rank-deficient subset spans some subspace generated by at most
    rank-1 of the weights, so it suffices to test the saturated supports of
    those finitely many subspaces.
    """
    chi = config.character(chi)
    r = config.rank
    d = config.num_weights
    target = tuple(-x for x in chi.free)
    seen: set[frozenset[int]] = set()
    for size in range(r):
        for subset in itertools.combinations(range(d), size):
            span_rows = [config.weights[i].free for i in subset]
            if int_rank(span_rows) != size:
                continue  # not an independent spanning set; a smaller one exists
            support = frozenset(
                i
                for i in range(d)
                if int_rank(span_rows + [config.weights[i].free]) == size
            )
            if support in seen:
                continue
            seen.add(support)
            gens = [config.weights[i].free for i in sorted(support)]
            if cone_contains(gens, target).feasible:
                return False
    return True


def fiber_dimension_bound(config: WeightConfig, chi) -> int:
    """Largest size of a destabilizable support that is also semistable for
    chi, minus the group dimension; -rank when no stratum qualifies.

    Semistability is monotone under support inclusion, so it is enough to
    examine the maximal destabilizable supports.
    """
    chi = config.character(chi)
    best: int | None = None
    for support in maximal_destabilizable_supports(config):
        if is_support_semistable(config, support, chi).semistable:
            best = max(best or 0, len(support))
    if best is None:
        # the origin itself: its (empty) support is destabilizable whenever a
        # nonzero lambda exists at all, and semistable only for chi = 0
        zero_free = all(x == 0 for x in chi.free)
        if config.rank > 0 and zero_free:
            best = 0
    return (best if best is not None else 0) - config.rank


# ---------------------------------------------------------------------------
# The existence criterion
# ---------------------------------------------------------------------------

VERDICT_GUARANTEED = "NCCR-guaranteed"
VERDICT_CRITERION_FAILS = "criterion-fails"
VERDICT_HYPOTHESES_FAIL = "hypotheses-fail"


@dataclass(frozen=True)
class CriterionReport:
    unimodular: bool
    genericity: GenericityReport
    dim_unstable: int
    dim_group: int
    verdict: str
    witness_lambda: tuple[int, ...] | None
    witness_support: tuple[int, ...] | None
    shortcut_applies: bool

    @property
    def generic(self) -> bool:
        return self.genericity.generic

    @property
    def margin(self) -> int:
        return self.dim_unstable - self.dim_group


def nccr_criterion(config: WeightConfig) -> CriterionReport:
    """Decide the existence criterion: a generic unimodular configuration
    whose unstable locus exceeds the group dimension by at most one is
    guaranteed a non-commutative crepant resolution.

    shortcut_applies records the low-dimensional shortcut: for a generic
    configuration with d - rank <= 3 the bound holds automatically.
    """
    uni = is_unimodular(config)
    gen = is_generic(config)
    unstable = unstable_dimension(config)
    if not (uni and gen.generic):
        verdict = VERDICT_HYPOTHESES_FAIL
    elif unstable.dimension - config.rank <= 1:
        verdict = VERDICT_GUARANTEED
    else:
        verdict = VERDICT_CRITERION_FAILS
    shortcut = gen.generic and (config.num_weights - config.rank) <= 3
    return CriterionReport(
        unimodular=uni,
        genericity=gen,
        dim_unstable=unstable.dimension,
        dim_group=config.rank,
        verdict=verdict,
        witness_lambda=unstable.witness_lambda,
        witness_support=unstable.witness_support,
        shortcut_applies=shortcut,
    )
