"""Tests for meandim.model and meandim.schema modules."""

from pydantic import ValidationError
from pytest import approx
from pytest import raises as pytest_raises

from meandim.enums import GroupKind, MeasureKind, SubshiftKind
from meandim.model import (
    Budget,
    GroupSpec,
    MeasureSpec,
    PatternSpec,
    SubshiftSpec,
    freeze,
)
from meandim.schema import (
    ConvergenceTable,
    Findings,
    GrowthConstants,
    GrowthTable,
    TableRow,
    Verdict,
)


def test_freeze() -> None:
    """It should turn nested lists into nested tuples."""
    assert freeze([[1], [0, [2, 3]]]) == ((1,), (0, (2, 3)))
    assert freeze(5) == 5


def test_group_spec_label(z_dinf: GroupSpec) -> None:
    """It should name products by their factors."""
    assert z_dinf.label == "(Z^1 x D_inf)"
    assert GroupSpec.cyclic(3).label == "Z/3Z"


def test_group_spec_hashable(z_dinf: GroupSpec) -> None:
    """It should hash equal specs equally."""
    same = GroupSpec.product(GroupSpec.integers(), GroupSpec.dihedral())
    assert {z_dinf, same} == {z_dinf}


def test_group_spec_product_needs_factors() -> None:
    """It should reject a product without factors."""
    with pytest_raises(ValidationError):
        GroupSpec(kind=GroupKind.DIRECT_PRODUCT)


def test_group_spec_product_generators(integers: GroupSpec) -> None:
    """It should refuse explicit generators on a product."""
    with pytest_raises(ValidationError):
        GroupSpec(
            kind=GroupKind.DIRECT_PRODUCT,
            left=integers,
            right=integers,
            generators=[[[1], [0]]],
        )


def test_group_spec_ranges() -> None:
    """It should reject a zero rank and a trivial modulus."""
    with pytest_raises(ValidationError):
        GroupSpec.integers(0)
    with pytest_raises(ValidationError):
        GroupSpec.cyclic(1)


def test_group_spec_is_integer_line() -> None:
    """It should only accept Z with its standard generators."""
    assert GroupSpec.integers().is_integer_line
    assert not GroupSpec.integers(2).is_integer_line
    custom = GroupSpec(kind=GroupKind.INTEGER_LATTICE, generators=[[2], [-2], [3], [-3]])
    assert not custom.is_integer_line


def test_subshift_spec_checks_symbols() -> None:
    """It should reject unknown, duplicate and misplaced symbols."""
    with pytest_raises(ValidationError):
        SubshiftSpec(kind=SubshiftKind.FULL_SHIFT, alphabet=())
    with pytest_raises(ValidationError):
        SubshiftSpec(kind=SubshiftKind.FULL_SHIFT, alphabet=("a", "a"))
    with pytest_raises(ValidationError):
        SubshiftSpec(kind=SubshiftKind.FIBER_SFT, alphabet=("0", "1"), forbidden_words=[[2]])
    with pytest_raises(ValidationError):
        SubshiftSpec(kind=SubshiftKind.FULL_SHIFT, alphabet=("0", "1"), forbidden_words=[[1]])


def test_pattern_spec_distinct_cells() -> None:
    """It should reject a pattern repeating a cell."""
    with pytest_raises(ValidationError):
        PatternSpec(letters=[[[[0], [0]], 1], [[[0], [0]], 0]])
    with pytest_raises(ValidationError):
        PatternSpec(letters=[])


def test_measure_spec_bernoulli() -> None:
    """It should require nonnegative weights summing to 1."""
    assert MeasureSpec.uniform(4).size == 4
    with pytest_raises(ValidationError):
        MeasureSpec.bernoulli(0.5, 0.6)
    with pytest_raises(ValidationError):
        MeasureSpec.bernoulli(1.5, -0.5)


def test_measure_spec_markov_stationary() -> None:
    """It should compute the stationary vector when none is given."""
    measure = MeasureSpec(kind=MeasureKind.FIBER_MARKOV, transition=[[0.9, 0.1], [0.3, 0.7]])
    assert measure.stationary == approx((0.75, 0.25))
    assert measure.size == 2


def test_measure_spec_markov_wrong_stationary() -> None:
    """It should reject a vector not fixed by the chain."""
    with pytest_raises(ValidationError):
        MeasureSpec(
            kind=MeasureKind.FIBER_MARKOV,
            transition=[[0.9, 0.1], [0.3, 0.7]],
            stationary=[0.5, 0.5],
        )
    with pytest_raises(ValidationError):
        MeasureSpec(kind=MeasureKind.FIBER_MARKOV, transition=[[1.0, 0.0]])


def test_budget_lists() -> None:
    """It should require increasing nonnegative lists and eps in (0, 1)."""
    assert Budget(N_list=[0, 3]).N_list == (0, 3)
    with pytest_raises(ValidationError):
        Budget(M_list=[2, 2])
    with pytest_raises(ValidationError):
        Budget(n_list=[-1, 1])
    with pytest_raises(ValidationError):
        Budget(eps_list=[1.0])
    with pytest_raises(ValidationError):
        Budget(delta=0.5)


def test_growth_table_nondecreasing() -> None:
    """It should reject a shrinking growth function."""
    with pytest_raises(ValidationError):
        GrowthTable(group="G", radii=[0, 1], ball_sizes=[1, 0], degree_fit=0.0)
    with pytest_raises(ValidationError):
        GrowthTable(group="G", radii=[0], ball_sizes=[2], degree_fit=0.0)


def test_table_row_finite() -> None:
    """It should reject infinite values."""
    with pytest_raises(ValidationError):
        TableRow(N=1, M=1, value=float("inf"))


def test_convergence_table_sorted() -> None:
    """It should sort rows by (M, N) and look them up."""
    table = ConvergenceTable(
        estimator="mdim_M",
        rows=[
            TableRow(N=4, M=2, value=1.0),
            TableRow(N=1, M=2, value=2.0, exact=False),
            TableRow(N=4, M=1, value=3.0),
        ],
    )
    assert [(row.N, row.M) for row in table.rows] == [(4, 1), (1, 2), (4, 2)]
    assert table.value_at(1, 2) == 2.0
    assert not table.exact
    with pytest_raises(KeyError):
        table.value_at(8, 8)


def test_growth_constants_order() -> None:
    """It should reject c2 > c1."""
    with pytest_raises(ValidationError):
        GrowthConstants(
            group="G", estimates=[1.0], c1=1.0, c2=2.0, slope=1.0, degree_fit=1.0
        )


def test_verdict_deviation() -> None:
    """It should fill in the deviation from the target."""
    assert Verdict(name="x", target=2.0, achieved=2.5).deviation == approx(0.5)
    assert Verdict(name="x", achieved=2.5).deviation is None


def test_findings_lookup() -> None:
    """It should find tables and verdicts by name."""
    findings = Findings(
        tables=[ConvergenceTable(estimator="h_top")],
        verdicts=[Verdict(name="h_top", achieved=1.0)],
    )
    assert findings.table("h_top").estimator == "h_top"
    assert findings.verdict("h_top").achieved == 1.0
    with pytest_raises(KeyError):
        findings.table("h_mu")
