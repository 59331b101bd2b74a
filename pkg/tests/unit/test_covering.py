"""Tests for meandim.covering module."""

from pytest import MonkeyPatch, approx
from pytest import raises as pytest_raises

from meandim.covering import (
    EXHAUSTIVE_LIMIT,
    check_hypotheses,
    disjointness_consequence,
    disjointness_parameter,
    epsilon_disjoint_check,
    exhaustive_selection,
    generate_instance,
    interval,
    select_subfamily,
    translate,
)
from meandim.exceptions import HypothesisViolatedError, PreconditionError
from meandim.model import GroupSpec, ShapeSpec, TranslateArray

from ..common import set_cap


def _one_level(shape, base, ambient, delta=0.005, C=2.0) -> TranslateArray:
    return TranslateArray(
        group=GroupSpec.integers(),
        levels=((ShapeSpec(shape=shape, base=base),),),
        ambient=ambient,
        delta=delta,
        C=C,
    )


def test_epsilon_disjoint_pairwise_disjoint() -> None:
    """It should accept a disjoint family at eps = 0 with the sets as shrinkings."""
    family = [{1, 2}, {3}, {4, 5, 6}]
    witness = epsilon_disjoint_check(family, 0.0)
    assert witness.holds
    assert not witness.heuristic
    assert witness.shrinkings == tuple(frozenset(members) for members in family)


def test_epsilon_disjoint_overlap() -> None:
    """It should need eps >= 1/2 to split two overlapping pairs and a singleton."""
    family = [{1, 2}, {2, 3}, {2}]
    assert not epsilon_disjoint_check(family, 0.0).holds
    assert not epsilon_disjoint_check(family, 0.4).holds
    witness = epsilon_disjoint_check([{1, 2}, {2, 3}], 0.5)
    assert witness.holds
    first, second = witness.shrinkings
    assert not first & second
    assert first <= {1, 2} and second <= {2, 3}


def test_epsilon_disjoint_hall_violation() -> None:
    """It should find the shortage that no pairwise test sees."""
    family = [{1, 2}, {1, 3}, {2, 3}, {1, 2, 3}]
    assert not epsilon_disjoint_check(family, 0.5).holds


def test_epsilon_disjoint_large_eps() -> None:
    """It should accept every family once eps >= 1."""
    assert epsilon_disjoint_check([{1}, {1}, {1}], 1.0).holds


def test_epsilon_disjoint_negative() -> None:
    """It should reject a negative eps."""
    with pytest_raises(PreconditionError):
        epsilon_disjoint_check([{1}], -0.1)


def test_epsilon_disjoint_greedy(caps: MonkeyPatch) -> None:
    """It should fall back to the flagged heuristic above FLOW_CELL_LIMIT."""
    set_cap(caps, "FLOW_CELL_LIMIT", 3)
    witness = epsilon_disjoint_check([{1, 2}, {3, 4}], 0.0)
    assert witness.holds
    assert witness.heuristic
    assert not epsilon_disjoint_check([{1, 2}, {2, 3}], 0.0).holds


def test_translate_right(dihedral: GroupSpec) -> None:
    """It should multiply on the right."""
    assert translate([(0, 0), (1, 0)], (0, 1), dihedral) == {(0, 1), (1, 1)}


def test_disjointness_parameter() -> None:
    """It should return 10 delta^(1/4)."""
    assert disjointness_parameter(1e-4) == approx(1.0)


def test_check_hypotheses_disjoint() -> None:
    """It should accept a single level of disjoint translates."""
    report = check_hypotheses(generate_instance("disjoint"))
    assert report.passed
    assert report.alpha == approx(0.09)
    assert {check.name for check in report.checks} == {
        "containment",
        "tempered",
        "cross_level",
    }


def test_check_hypotheses_containment() -> None:
    """It should count the translates leaving F."""
    report = check_hypotheses(_one_level(interval(0, 10), [(0,), (95,)], interval(0, 100)))
    assert not report.passed
    assert report.failures[0].name == "containment"
    assert report.failures[0].lhs == 1


def test_check_hypotheses_tempered() -> None:
    """It should bound the union of earlier shapes per level."""
    t = TranslateArray(
        group=GroupSpec.integers(),
        levels=(
            (
                ShapeSpec(shape=interval(0, 10), base=[(0,)]),
                ShapeSpec(shape=interval(0, 2), base=[(0,)]),
            ),
        ),
        ambient=interval(0, 20),
        delta=0.005,
    )
    failure = check_hypotheses(t).failures[0]
    assert failure.name == "tempered"
    assert failure.lhs == 11
    assert failure.rhs == 4


def test_check_hypotheses_cross_level() -> None:
    """It should require top shapes of length at least 1/delta."""
    t = TranslateArray(
        group=GroupSpec.integers(),
        levels=(
            (ShapeSpec(shape=interval(0, 2), base=[(0,)]),),
            (ShapeSpec(shape=interval(0, 5), base=[(0,)]),),
        ),
        ambient=interval(0, 20),
        delta=0.005,
    )
    report = check_hypotheses(t)
    assert [check.name for check in report.failures] == ["cross_level"]
    with pytest_raises(HypothesisViolatedError) as exc_info:
        select_subfamily(t)
    assert "cross_level at level 2" in exc_info.value.message


def test_check_hypotheses_empty_ambient() -> None:
    """It should reject an empty F."""
    with pytest_raises(PreconditionError):
        check_hypotheses(_one_level(interval(0, 1), [], ()))


def test_select_subfamily_disjoint() -> None:
    """It should keep every disjoint translate."""
    result = select_subfamily(generate_instance("disjoint"))
    assert len(result.chosen) == 9
    assert result.covered == 90
    assert result.covered_fraction == approx(0.9)
    assert result.met_target
    assert result.disjoint
    assert result.restarts == 0
    assert disjointness_consequence(result)


def test_select_subfamily_order() -> None:
    """It should report translates as (level, shape, base point)."""
    result = select_subfamily(generate_instance("interval", seed=1, size=2000))
    levels = [i for i, _, _ in result.chosen]
    assert levels == sorted(levels, reverse=True)
    assert result.disjoint
    assert result.met_target


def test_overlap_matches_exhaustive() -> None:
    """It should never beat the exhaustive optimum and stay disjoint."""
    for seed in range(5):
        t = generate_instance("overlap", seed=seed)
        greedy = select_subfamily(t, seed=seed)
        best = exhaustive_selection(t)
        assert greedy.disjoint
        assert not greedy.heuristic
        assert best.epsilon == greedy.epsilon < 1
        assert greedy.covered <= best.covered
        assert epsilon_disjoint_check(
            [translate(interval(0, 4), a, t.group) for _, _, a in best.chosen],
            best.epsilon,
        ).holds
        assert disjointness_consequence(greedy)
        assert disjointness_consequence(best)


def test_exhaustive_selection_limit() -> None:
    """It should refuse instances with too many translates."""
    t = _one_level(interval(0, 1), interval(0, EXHAUSTIVE_LIMIT + 1), interval(0, 20))
    with pytest_raises(PreconditionError):
        exhaustive_selection(t)


def test_generate_instance_unknown() -> None:
    """It should reject unknown presets."""
    with pytest_raises(PreconditionError):
        generate_instance("spiral")


def test_generate_instance_deterministic() -> None:
    """It should reproduce the instance from the seed."""
    assert generate_instance("random", seed=4) == generate_instance("random", seed=4)
    assert generate_instance("random", seed=4) != generate_instance("random", seed=5)


def test_generate_random_too_small() -> None:
    """It should refuse F too small for two top level lengths."""
    with pytest_raises(PreconditionError):
        generate_instance("random", size=10)


def test_random_instances() -> None:
    """It should select an eps-disjoint family meeting the coverage target."""
    for seed in range(1000):
        t = generate_instance("random", seed=seed)
        assert disjointness_parameter(t.delta) < 0.6
        assert len(t.ambient) <= 10_000
        assert check_hypotheses(t).passed
        result = select_subfamily(t, seed=seed)
        assert result.disjoint, seed
        assert not result.heuristic, seed
        assert result.met_target, seed
        assert disjointness_consequence(result)
        assert result.covered <= result.ambient_size
