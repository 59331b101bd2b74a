"""Covering lab: arrays of translates, their hypotheses, eps-disjointness
and the selection of an eps-disjoint subfamily covering most of F."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence

import networkx as nx
import numpy as np

from .enums import GroupKind
from .exceptions import HypothesisViolatedError, PreconditionError
from .groups import Element, identity, inverse_set, multiply, product_set
from .model import GroupSpec, ShapeSpec, TranslateArray
from .schema import HypothesisCheck, HypothesisReport, SelectionResult
from .settings import get_settings

logger = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 16

Translate = tuple[int, int, Element]


@dataclass(frozen=True)
class DisjointnessWitness:
    """
    The outcome of an eps-disjointness check.

    Attributes:
        holds (bool): Whether shrinkings with |A_i'| >= (1 - eps)|A_i| were found.
        shrinkings (tuple[frozenset, ...] | None): The mutually disjoint A_i'.
        heuristic (bool): True when decided by the greedy heuristic, whose
            negative answers are not certain.
    """

    holds: bool
    shrinkings: tuple[frozenset, ...] | None
    heuristic: bool = False


def _needed(size: int, eps: float) -> int:
    return max(0, math.ceil((1.0 - eps) * size - 1e-9))


def epsilon_disjoint_check(
    family: Sequence[Iterable[Any]], eps: float
) -> DisjointnessWitness:
    """
    Decide whether a family of finite sets is eps-disjoint, i.e. admits
    mutually disjoint A_i' subset of A_i with |A_i'| >= (1 - eps)|A_i|.

    Families with at most `FLOW_CELL_LIMIT` cells in total are decided
    exactly as a maximum flow source -> set -> cell -> sink; larger ones
    by greedy shrinking, flagged as heuristic.

    Args:
        family (Sequence[Iterable[Any]]): The sets A_i.
        eps (float): The parameter, at least 0.

    Returns:
        DisjointnessWitness: The decision with witness shrinkings.
    """
    if eps < 0:
        raise PreconditionError("eps must be nonnegative.")
    sets = [frozenset(members) for members in family]
    needs = [_needed(len(members), eps) for members in sets]
    if not any(needs):
        return DisjointnessWitness(True, tuple(frozenset() for _ in sets))
    total = sum(len(members) for members in sets)
    if total > get_settings().FLOW_CELL_LIMIT:
        return _greedy_shrinking(sets, needs)

    graph = nx.DiGraph()
    for i, (members, need) in enumerate(zip(sets, needs)):
        graph.add_edge("source", ("set", i), capacity=need)
        for cell in members:
            graph.add_edge(("set", i), ("cell", cell), capacity=1)
            graph.add_edge(("cell", cell), "sink", capacity=1)
    value, flow = nx.maximum_flow(graph, "source", "sink")
    if value < sum(needs):
        return DisjointnessWitness(False, None)
    shrinkings = tuple(
        frozenset(
            node[1]
            for node, amount in flow.get(("set", i), {}).items()
            if amount > 0
        )
        for i in range(len(sets))
    )
    return DisjointnessWitness(True, shrinkings)


def _greedy_shrinking(
    sets: list[frozenset], needs: list[int]
) -> DisjointnessWitness:
    claims: dict[Any, int] = {}
    for members in sets:
        for cell in members:
            claims[cell] = claims.get(cell, 0) + 1
    taken: set[Any] = set()
    shrinkings: list[frozenset] = [frozenset()] * len(sets)
    for i in sorted(range(len(sets)), key=lambda i: (len(sets[i]), i)):
        free = sorted(
            (cell for cell in sets[i] if cell not in taken),
            key=lambda cell: (claims[cell], repr(cell)),
        )
        if len(free) < needs[i]:
            return DisjointnessWitness(False, None, heuristic=True)
        chosen = frozenset(free[: needs[i]])
        taken |= chosen
        shrinkings[i] = chosen
    return DisjointnessWitness(True, tuple(shrinkings), heuristic=True)


@dataclass(frozen=True)
class _Instance:
    """Set views of a TranslateArray."""

    shapes: tuple[tuple[frozenset, ...], ...]
    bases: tuple[tuple[frozenset, ...], ...]
    ambient: frozenset
    D: frozenset

    @classmethod
    def of(cls, t: TranslateArray) -> _Instance:
        return cls(
            shapes=tuple(tuple(frozenset(s.shape) for s in level) for level in t.levels),
            bases=tuple(tuple(frozenset(s.base) for s in level) for level in t.levels),
            ambient=frozenset(t.ambient),
            D=frozenset(t.D) or frozenset({identity(t.group)}),
        )


def translate(shape: Iterable[Element], a: Element, group: GroupSpec) -> frozenset:
    """Return the right translate F a = {f a : f in F}."""
    return frozenset(multiply(f, a, group) for f in shape)


def check_hypotheses(t: TranslateArray) -> HypothesisReport:
    """
    Evaluate every hypothesis of the covering lemma exactly.

    Checks containment F_{i,j} a in F for a in A_{i,j}, the per-level
    condition |U_{k'<k} F_{i,k'}^-1 F_{i,k}| <= C |F_{i,k}| and the
    cross-level condition |U_{i'<i} D F_{i',*}^-1 F_{i,k}| <= (1 + delta)|F_{i,k}|,
    and computes alpha = min_i |D A_{i,*}| / |F|.

    Args:
        t (TranslateArray): The instance.

    Returns:
        HypothesisReport: All checks and alpha.
    """
    group = t.group
    sets = _Instance.of(t)
    checks: list[HypothesisCheck] = []
    for i, (shapes, bases) in enumerate(zip(sets.shapes, sets.bases), start=1):
        for k, (shape, base) in enumerate(zip(shapes, bases), start=1):
            outside = sum(
                1 for a in base if not translate(shape, a, group) <= sets.ambient
            )
            checks.append(
                HypothesisCheck(
                    name="containment",
                    level=i,
                    index=k,
                    lhs=outside,
                    rhs=0,
                    passed=outside == 0,
                )
            )
            earlier = set().union(*shapes[: k - 1]) if k > 1 else set()
            tempered = (
                len(product_set(inverse_set(earlier, group), shape, group))
                if earlier
                else 0
            )
            checks.append(
                HypothesisCheck(
                    name="tempered",
                    level=i,
                    index=k,
                    lhs=tempered,
                    rhs=t.C * len(shape),
                    passed=tempered <= t.C * len(shape),
                )
            )
            lower = set().union(*(s for level in sets.shapes[: i - 1] for s in level))
            cross = (
                len(
                    product_set(
                        product_set(sets.D, inverse_set(lower, group), group),
                        shape,
                        group,
                    )
                )
                if lower
                else 0
            )
            checks.append(
                HypothesisCheck(
                    name="cross_level",
                    level=i,
                    index=k,
                    lhs=cross,
                    rhs=(1 + t.delta) * len(shape),
                    passed=cross <= (1 + t.delta) * len(shape),
                )
            )
    if not sets.ambient:
        raise PreconditionError("The ambient set F must be nonempty.")
    alpha = min(
        (
            Fraction(
                len(product_set(sets.D, set().union(*bases), group)),
                len(sets.ambient),
            )
            for bases in sets.bases
        ),
        default=Fraction(0),
    )
    return HypothesisReport(
        checks=checks,
        alpha=float(alpha),
        passed=all(check.passed for check in checks),
    )


def disjointness_parameter(delta: float) -> float:
    """Return 10 delta^(1/4)."""
    return 10.0 * delta**0.25


def _translates_in_order(sets: _Instance) -> list[Translate]:
    """Levels from the top down, larger shapes first, base points sorted."""
    order: list[Translate] = []
    for i in range(len(sets.shapes), 0, -1):
        shapes = sets.shapes[i - 1]
        by_size = sorted(range(len(shapes)), key=lambda k: (-len(shapes[k]), k))
        for k in by_size:
            order.extend((i, k + 1, a) for a in sorted(sets.bases[i - 1][k]))
    return order


def _greedy_pass(
    order: Sequence[Translate], sets: _Instance, group: GroupSpec, eps: float
) -> tuple[list[Translate], set, int]:
    chosen: list[Translate] = []
    union: set = set()
    total = 0
    for i, k, a in order:
        cells = translate(sets.shapes[i - 1][k - 1], a, group)
        fresh = len(cells - union)
        # T \ U is the shrinking of T; later translates avoid all of U
        if fresh and fresh >= (1.0 - eps) * len(cells):
            chosen.append((i, k, a))
            union |= cells
            total += len(cells)
    return chosen, union, total


def _shuffled(order: list[Translate], rng: np.random.Generator) -> list[Translate]:
    shuffled: list[Translate] = []
    for _, items in itertools.groupby(order, key=lambda item: item[0]):
        level = list(items)
        shuffled.extend(level[index] for index in rng.permutation(len(level)))
    return shuffled


def select_subfamily(
    t: TranslateArray, seed: int = 0, restarts: int = 32
) -> SelectionResult:
    """
    Select an eps-disjoint subfamily of translates, eps = 10 delta^(1/4),
    aiming at coverage (alpha - delta^(1/4)) |F|.

    The greedy pass goes from the top level down, larger shapes first, and
    admits a translate T when |T \\ U| >= (1 - eps)|T| for the union U of
    the admitted ones. If the target is missed, the pass is repeated with
    the order inside each level shuffled by a seeded generator.

    Args:
        t (TranslateArray): The instance.
        seed (int): The seed of the restarts.
        restarts (int): The maximum number of restarts.

    Returns:
        SelectionResult: The best selection found; `met_target` is False if
            every attempt missed the target.

    Raises:
        HypothesisViolatedError: If the instance violates the hypotheses.
    """
    report = check_hypotheses(t)
    if not report.passed:
        failure = report.failures[0]
        raise HypothesisViolatedError(
            f"{failure.name} at level {failure.level}, shape {failure.index}: "
            f"{failure.lhs} > {failure.rhs}"
        )
    sets = _Instance.of(t)
    eps = disjointness_parameter(t.delta)
    target = (report.alpha - t.delta**0.25) * len(sets.ambient)
    order = _translates_in_order(sets)
    chosen, union, total = _greedy_pass(order, sets, t.group, eps)
    used = 0
    rng = np.random.default_rng(seed)
    while len(union) < target and used < restarts:
        used += 1
        logger.debug("Restart %d: coverage %d below %.2f", used, len(union), target)
        candidate = _greedy_pass(_shuffled(order, rng), sets, t.group, eps)
        if len(candidate[1]) > len(union):
            chosen, union, total = candidate
    witness = epsilon_disjoint_check(
        [translate(sets.shapes[i - 1][k - 1], a, t.group) for i, k, a in chosen], eps
    )
    return SelectionResult(
        chosen=chosen,
        epsilon=eps,
        covered=len(union),
        ambient_size=len(sets.ambient),
        target=target,
        met_target=len(union) >= target,
        disjoint=witness.holds,
        heuristic=witness.heuristic,
        restarts=used,
        total_size=total,
    )


def disjointness_consequence(result: SelectionResult) -> bool:
    """
    Check sum |T| <= |U T| / (1 - eps), which every eps-disjoint family
    satisfies when eps < 1.

    Args:
        result (SelectionResult): A selection.

    Returns:
        bool: True when the inequality holds or eps >= 1.
    """
    if result.epsilon >= 1.0:
        return True
    return result.total_size * (1.0 - result.epsilon) <= result.covered + 1e-9


def exhaustive_selection(t: TranslateArray) -> SelectionResult:
    """
    Search all subfamilies of a tiny instance for the eps-disjoint one with
    the largest coverage.

    Args:
        t (TranslateArray): An instance with at most EXHAUSTIVE_LIMIT translates.

    Returns:
        SelectionResult: The best subfamily (first in size-then-order on ties).
    """
    sets = _Instance.of(t)
    order = _translates_in_order(sets)
    if len(order) > EXHAUSTIVE_LIMIT:
        raise PreconditionError(
            f"Exhaustive search is limited to {EXHAUSTIVE_LIMIT} translates."
        )
    eps = disjointness_parameter(t.delta)
    report = check_hypotheses(t)
    cells = {
        item: translate(sets.shapes[item[0] - 1][item[1] - 1], item[2], t.group)
        for item in order
    }
    best: tuple[Translate, ...] = ()
    best_union: frozenset = frozenset()
    for size in range(1, len(order) + 1):
        for family in itertools.combinations(order, size):
            union = frozenset().union(*(cells[item] for item in family))
            if len(union) <= len(best_union):
                continue
            if epsilon_disjoint_check([cells[item] for item in family], eps).holds:
                best, best_union = family, union
    target = (report.alpha - t.delta**0.25) * len(sets.ambient)
    return SelectionResult(
        chosen=list(best),
        epsilon=eps,
        covered=len(best_union),
        ambient_size=len(sets.ambient),
        target=target,
        met_target=len(best_union) >= target,
        disjoint=True,
        total_size=sum(len(cells[item]) for item in best),
    )


def interval(start: int, stop: int) -> tuple[Element, ...]:
    """Return the integers start..stop-1 as elements of Z."""
    return tuple((n,) for n in range(start, stop))


def _random_base(
    rng: np.random.Generator, stop: int, density: float
) -> tuple[Element, ...]:
    picks = np.flatnonzero(rng.random(stop) < density)
    if not picks.size:
        picks = np.asarray([int(rng.integers(stop))])
    return tuple((int(n),) for n in picks)


def generate_instance(preset: str, seed: int = 0, size: int | None = None) -> TranslateArray:
    """
    Generate a covering instance over the integers.

    Presets:
        disjoint: one level of pairwise disjoint intervals covering 90% of F.
        interval: two levels, short intervals below and intervals longer than
            1/delta above, with dense random base sets.
        overlap: one level of heavily overlapping intervals on a tiny F,
            small enough for `exhaustive_selection`.
        random: points below and two random interval lengths above, with
            delta < 1e-5 so that eps = 10 delta^(1/4) stays below 0.57.

    Args:
        preset (str): The preset name.
        seed (int): The seed of the generator.
        size (int | None): |F| for `interval` and `random`.

    Returns:
        TranslateArray: The instance; hypotheses hold by construction.
    """
    rng = np.random.default_rng(seed)
    integers = GroupSpec(kind=GroupKind.INTEGER_LATTICE, rank=1)
    if preset == "disjoint":
        return TranslateArray(
            group=integers,
            levels=(
                (
                    ShapeSpec(
                        shape=interval(0, 10),
                        base=tuple((10 * n,) for n in range(9)),
                    ),
                ),
            ),
            ambient=interval(0, 100),
            delta=0.005,
        )
    if preset == "overlap":
        n = 20
        base = tuple(sorted(_pick(rng, n - 4, 10)))
        return TranslateArray(
            group=integers,
            levels=((ShapeSpec(shape=interval(0, 4), base=base),),),
            ambient=interval(0, n),
            delta=1e-5,
        )
    if preset == "interval":
        n = size or 10_000
        return _two_level_instance(rng, n, delta=0.009, lengths=(120, 200), density=0.8)
    if preset == "random":
        n = size or int(rng.integers(100, 301))
        if n < 16:
            raise PreconditionError("The random preset needs |F| of at least 16.")
        first, second = sorted(
            int(length) for length in rng.choice(np.arange(2, n // 4 + 1), 2, replace=False)
        )
        # singletons below keep D F_1^-1 F_2,k = F_2,k for any delta
        points = ShapeSpec(
            shape=interval(0, 1),
            base=_random_base(rng, n, float(rng.uniform(0.05, 0.95))),
        )
        density = float(rng.uniform(0.05, 0.5))
        high = tuple(
            ShapeSpec(
                shape=interval(0, length),
                base=_random_base(rng, n - length + 1, density),
            )
            for length in (first, second)
        )
        return TranslateArray(
            group=integers,
            levels=((points,), high),
            ambient=interval(0, n),
            delta=float(rng.uniform(1e-6, 1e-5)),
        )
    raise PreconditionError(f"Unknown covering preset: {preset}")


def _pick(rng: np.random.Generator, stop: int, count: int) -> list[Element]:
    return [(int(n),) for n in rng.choice(stop, size=min(count, stop), replace=False)]


def _two_level_instance(
    rng: np.random.Generator,
    n: int,
    delta: float,
    lengths: tuple[int, int],
    density: float,
) -> TranslateArray:
    """Level 1: lengths 1 and 2; level 2: the given lengths, all >= 1/delta."""
    if min(lengths) * delta < 1 or max(lengths) >= n:
        raise PreconditionError("Top level shapes must satisfy 1/delta <= L < |F|.")
    low = tuple(
        ShapeSpec(shape=interval(0, length), base=_random_base(rng, n - length + 1, density))
        for length in (1, 2)
    )
    high = tuple(
        ShapeSpec(
            shape=interval(0, length),
            base=_random_base(rng, n - length + 1, 2.0 / length),
        )
        for length in lengths
    )
    return TranslateArray(
        group=GroupSpec(kind=GroupKind.INTEGER_LATTICE, rank=1),
        levels=(low, high),
        ambient=interval(0, n),
        delta=delta,
    )
