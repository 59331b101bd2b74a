"""Tests for meandim.subshifts module."""

import itertools
import math
from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st
from pytest import MonkeyPatch, approx
from pytest import raises as pytest_raises

from meandim.enums import Resolution, SubshiftKind
from meandim.exceptions import (
    IncompatibleSpecsError,
    PreconditionError,
    ResourceCapExceeded,
)
from meandim.groups import box_ball
from meandim.model import GroupSpec, PatternSpec, SubshiftSpec
from meandim.subshifts import (
    Pattern,
    ShiftAction,
    Window,
    apply_shift,
    ball_window,
    box_window,
    brute_force_count,
    check_compatible,
    count_patterns,
    cylinder_of,
    dynamical_ball_window,
    fiber_entropy,
    fiber_form,
    fiber_word_count,
    in_cylinder,
    metric_distance,
    safe_symbol,
    shift_window,
)

from ..common import set_cap

HORIZONTAL_PAIR = PatternSpec(letters=[[[[0], [0]], 1], [[[1], [0]], 1]])
VERTICAL_PAIR = PatternSpec(letters=[[[[0], [0]], 1], [[[0], [1]], 1]])
HARD_SQUARE = SubshiftSpec(
    kind=SubshiftKind.GENERAL_SFT,
    alphabet=("0", "1"),
    forbidden_patterns=(HORIZONTAL_PAIR, VERTICAL_PAIR),
)
# no symbol is safe: 0 0 and 1 1 are both forbidden along G1
NO_SAFE_SYMBOL = SubshiftSpec(
    kind=SubshiftKind.GENERAL_SFT,
    alphabet=("0", "1"),
    forbidden_patterns=(
        HORIZONTAL_PAIR,
        PatternSpec(letters=[[[[0], [0]], 0], [[[1], [0]], 0]]),
    ),
)
# 0 0 and 1 1 both forbidden along G2: one-dimensional, no safe symbol
ALTERNATING = SubshiftSpec(
    kind=SubshiftKind.GENERAL_SFT,
    alphabet=("0", "1"),
    forbidden_patterns=(
        VERTICAL_PAIR,
        PatternSpec(letters=[[[[0], [0]], 0], [[[0], [1]], 0]]),
    ),
)
EMPTY_ALONG_G1 = SubshiftSpec(
    kind=SubshiftKind.GENERAL_SFT,
    alphabet=("0",),
    forbidden_patterns=(PatternSpec(letters=[[[[0], [0]], 0], [[[1], [0]], 0]]),),
)


def _zeros(cells) -> Pattern:
    return Pattern({cell: 0 for cell in cells})


def test_check_compatible_fiber_needs_integers(
    z_dinf: GroupSpec, golden_mean: SubshiftSpec
) -> None:
    """It should name both specs when G2 is not Z."""
    with pytest_raises(IncompatibleSpecsError) as exc_info:
        check_compatible(z_dinf, golden_mean)
    assert exc_info.value.exit_code == 3
    assert "FiberSFT" in exc_info.value.message
    assert "D_inf" in exc_info.value.message


def test_check_compatible_needs_product(
    dihedral: GroupSpec, full_shift: SubshiftSpec
) -> None:
    """It should reject a group that is not a direct product."""
    with pytest_raises(IncompatibleSpecsError):
        check_compatible(dihedral, full_shift)


def test_ball_window(z_dinf: GroupSpec) -> None:
    """It should build B_S1(M + N) x B_S2(M)."""
    window = ball_window(2, 1, z_dinf)
    assert len(window.first) == 7
    assert len(window.second) == 3
    assert len(window) == 21
    assert ((3,), (0, 1)) in window


def test_dynamical_ball_window_empty_F(z_dinf: GroupSpec) -> None:
    """It should read an empty F as {e}."""
    window = dynamical_ball_window([], 1, z_dinf)
    assert window.cells == ball_window(0, 1, z_dinf).cells


def test_dynamical_ball_window_negative(z_dinf: GroupSpec) -> None:
    """It should reject a negative depth."""
    with pytest_raises(PreconditionError):
        dynamical_ball_window([(0,)], -1, z_dinf)


def test_count_patterns_full_shift(z_dinf: GroupSpec, full_shift: SubshiftSpec) -> None:
    """It should return |A|^|W| in closed form."""
    count = count_patterns(full_shift, ball_window(1, 1, z_dinf), z_dinf)
    assert count.value == 2**15
    assert count.log2 == 15
    assert count.exact


def test_fiber_word_count_fibonacci(golden_mean: SubshiftSpec) -> None:
    """It should count golden mean words by Fibonacci numbers."""
    fibonacci = [1, 2]
    while len(fibonacci) < 40:
        fibonacci.append(fibonacci[-1] + fibonacci[-2])
    assert fiber_word_count(golden_mean, 0) == 1
    for length in range(1, 39):
        assert fiber_word_count(golden_mean, length) == fibonacci[length]


def test_fiber_word_count_exact_integers(golden_mean: SubshiftSpec) -> None:
    """It should stay exact beyond floating point range."""
    count = fiber_word_count(golden_mean, 2000)
    assert isinstance(count, int)
    assert count.bit_length() > 1300


def test_fiber_entropy_golden_mean(golden_mean: SubshiftSpec) -> None:
    """It should return log2 of the golden ratio."""
    assert fiber_entropy(golden_mean) == approx(math.log2((1 + 5**0.5) / 2))


def test_fiber_entropy_prunes_dead_states() -> None:
    """It should ignore states that lie on no bi-infinite path."""
    # the symbol 2 never occurs
    shift = SubshiftSpec(
        kind=SubshiftKind.FIBER_SFT,
        alphabet=("0", "1", "2"),
        forbidden_words=((2,),),
    )
    assert fiber_entropy(shift) == approx(1.0)
    assert fiber_word_count(shift, 5) == 32


def test_count_patterns_fiber_box(z_z: GroupSpec, golden_mean: SubshiftSpec) -> None:
    """It should raise the fiber count to the number of fibers."""
    count = count_patterns(golden_mean, box_window(1, z_z), z_z)
    assert count.value == 5**3
    assert count.method == "fiber transfer matrix"


def test_count_patterns_fiber_needs_intervals(
    z_z: GroupSpec, golden_mean: SubshiftSpec
) -> None:
    """It should reject a window with a gap along a fiber."""
    window = Window(frozenset({((0,), (0,)), ((0,), (2,))}))
    with pytest_raises(PreconditionError):
        count_patterns(golden_mean, window, z_z)


def test_count_patterns_matches_brute_force(
    z_z: GroupSpec, full_shift: SubshiftSpec, golden_mean: SubshiftSpec
) -> None:
    """It should agree with exhaustive enumeration on small windows."""
    windows = [
        box_window(1, z_z),
        ball_window(1, 1, z_z),
        dynamical_ball_window([(0,), (2,)], 1, z_z),
        Window(frozenset({((0,), (0,)), ((1,), (0,)), ((1,), (1,)), ((2,), (1,))})),
    ]
    for shift in (full_shift, golden_mean, HARD_SQUARE):
        for window in windows:
            assert len(window) <= 15
            count = count_patterns(shift, window, z_z)
            assert count.exact
            assert count.value == brute_force_count(shift, window, z_z)


def test_count_patterns_hard_square(z_z: GroupSpec) -> None:
    """It should count independent sets of the 3 x 3 grid."""
    count = count_patterns(HARD_SQUARE, box_window(1, z_z), z_z)
    assert count.value == 63
    assert count.method == "backtracking"
    assert safe_symbol(HARD_SQUARE) == 0


def test_count_patterns_upper_bound(z_z: GroupSpec) -> None:
    """It should flag locally admissible counts without a safe symbol."""
    count = count_patterns(NO_SAFE_SYMBOL, box_window(1, z_z), z_z)
    assert safe_symbol(NO_SAFE_SYMBOL) is None
    assert not count.exact
    assert count.value == 2**3
    assert "upper bound" in count.method


def test_fiber_form(z_z: GroupSpec, z_dinf: GroupSpec) -> None:
    """It should turn single-fiber patterns into forbidden words over their span."""
    gap = SubshiftSpec(
        kind=SubshiftKind.GENERAL_SFT,
        alphabet=("0", "1"),
        forbidden_patterns=(PatternSpec(letters=[[[[0], [0]], 1], [[[0], [2]], 1]]),),
    )
    fibers = fiber_form(gap, z_z)
    assert fibers is not None
    assert fibers.kind == SubshiftKind.FIBER_SFT
    assert fibers.forbidden_words == ((1, 0, 1), (1, 1, 1))
    assert fiber_form(HARD_SQUARE, z_z) is None
    assert fiber_form(gap, z_dinf) is None


def test_count_patterns_one_dimensional(z_z: GroupSpec) -> None:
    """It should count a single-fiber SFT without a safe symbol exactly."""
    window = box_window(1, z_z)
    count = count_patterns(ALTERNATING, window, z_z)
    assert safe_symbol(ALTERNATING) is None
    assert count.exact
    assert count.method == "fiber transfer matrix (one-dimensional)"
    assert count.value == 2**3 == brute_force_count(ALTERNATING, window, z_z)


def test_count_patterns_one_dimensional_dead_end(z_z: GroupSpec) -> None:
    """It should drop locally admissible words that no point extends."""
    # nothing may follow 2 along G2, so 2 occurs in no point
    shift = SubshiftSpec(
        kind=SubshiftKind.GENERAL_SFT,
        alphabet=("0", "1", "2"),
        forbidden_patterns=tuple(
            PatternSpec(letters=[[[[0], [0]], 2], [[[0], [1]], a]]) for a in range(3)
        ),
    )
    window = box_window(1, z_z)
    count = count_patterns(shift, window, z_z)
    assert count.exact
    assert count.value == 8**3
    assert brute_force_count(shift, window, z_z) == 12**3


def test_count_patterns_one_dimensional_gap(z_z: GroupSpec) -> None:
    """It should fall back to backtracking when a slice is not an interval."""
    window = Window(frozenset({((0,), (0,)), ((0,), (2,))}))
    count = count_patterns(ALTERNATING, window, z_z)
    assert count.method == "backtracking (upper bound)"
    assert count.value == 4


def test_count_patterns_empty_subshift(z_z: GroupSpec) -> None:
    """It should report 0 patterns with no logarithm."""
    count = count_patterns(EMPTY_ALONG_G1, box_window(1, z_z), z_z)
    assert count.value == 0
    assert count.log2 is None
    assert not count.exact
    with pytest_raises(PreconditionError):
        count.positive_log2()
    single = SubshiftSpec(
        kind=SubshiftKind.GENERAL_SFT,
        alphabet=("0",),
        forbidden_patterns=(PatternSpec(letters=[[[[0], [0]], 0]]),),
    )
    count = count_patterns(single, box_window(1, z_z), z_z)
    assert count.value == 0
    assert count.exact


def test_count_patterns_window_cap(caps: MonkeyPatch, z_z: GroupSpec) -> None:
    """It should refuse general SFT windows above MAX_WINDOW_CELLS."""
    set_cap(caps, "MAX_WINDOW_CELLS", 20)
    with pytest_raises(ResourceCapExceeded) as exc_info:
        count_patterns(HARD_SQUARE, box_window(2, z_z), z_z)
    assert exc_info.value.details == {
        "cap": "MAX_WINDOW_CELLS",
        "limit": 20,
        "requested": 25,
    }


def test_metric_distance(z_z: GroupSpec) -> None:
    """It should return 2^-depth of the nearest disagreement."""
    box = box_ball(z_z, 3)
    x = _zeros(box)
    y = Pattern({**x.letters, ((1,), (-2,)): 1, ((3,), (0,)): 1})
    assert metric_distance(x, y, 3, z_z) == Fraction(1, 4)
    assert metric_distance(x, x, 3, z_z) is Resolution.INDISTINGUISHABLE


def test_metric_distance_needs_box(z_z: GroupSpec) -> None:
    """It should reject patterns not defined on the whole box."""
    x = _zeros(box_ball(z_z, 1))
    with pytest_raises(PreconditionError):
        metric_distance(x, x, 2, z_z)


def _as_number(distance) -> Fraction:
    return Fraction(0) if distance is Resolution.INDISTINGUISHABLE else distance


@given(*(st.lists(st.integers(0, 1), min_size=25, max_size=25) for _ in range(3)))
def test_metric_distance_ultrametric(xs: list[int], ys: list[int], zs: list[int]) -> None:
    """It should satisfy d(x, z) <= max(d(x, y), d(y, z))."""
    z_z = GroupSpec.product(GroupSpec.integers(), GroupSpec.integers())
    cells = sorted(box_ball(z_z, 2))
    x, y, z = (Pattern(dict(zip(cells, values))) for values in (xs, ys, zs))
    d = [_as_number(metric_distance(p, q, 2, z_z)) for p, q in ((x, z), (x, y), (y, z))]
    assert d[0] <= max(d[1], d[2])
    assert metric_distance(x, y, 2, z_z) == metric_distance(y, x, 2, z_z)


@given(st.integers(-3, 3), st.integers(-3, 3))
def test_apply_shift_axes_commute(a: int, b: int) -> None:
    """It should give the same pattern for sigma_1 sigma_2 and sigma_2 sigma_1."""
    z_z = GroupSpec.product(GroupSpec.integers(), GroupSpec.integers())
    p = Pattern({((0,), (0,)): 1, ((1,), (2,)): 0, ((-2,), (1,)): 1})
    first, second = ShiftAction(1, (a,)), ShiftAction(2, (b,))
    assert apply_shift(apply_shift(p, first, z_z), second, z_z) == apply_shift(
        apply_shift(p, second, z_z), first, z_z
    )


@given(st.integers(-3, 3), st.integers(-3, 3))
def test_apply_shift_composes(a: int, b: int) -> None:
    """It should act: shifting by a then by b is shifting by a + b."""
    z_z = GroupSpec.product(GroupSpec.integers(), GroupSpec.integers())
    p = Pattern({((0,), (0,)): 1, ((1,), (2,)): 0})
    twice = apply_shift(
        apply_shift(p, ShiftAction(1, (a,)), z_z), ShiftAction(1, (b,)), z_z
    )
    assert twice == apply_shift(p, ShiftAction(1, (a + b,)), z_z)


def test_apply_shift_second_axis(z_z: GroupSpec) -> None:
    """It should read x at g2 h."""
    p = Pattern({((0,), (5,)): 1})
    shifted = apply_shift(p, ShiftAction(2, (5,)), z_z)
    assert shifted.letters == {((0,), (0,)): 1}
    assert shift_window(p.window, ShiftAction(2, (5,)), z_z).cells == {((0,), (0,))}


def test_apply_shift_target(z_z: GroupSpec) -> None:
    """It should restrict to the target window or report missing cells."""
    p = _zeros(box_ball(z_z, 2))
    action = ShiftAction(1, (1,))
    shifted = apply_shift(p, action, z_z, target=box_window(1, z_z))
    assert len(shifted) == 9
    with pytest_raises(PreconditionError):
        apply_shift(p, action, z_z, target=box_window(2, z_z))


def test_shift_action_axis() -> None:
    """It should only accept axes 1 and 2."""
    with pytest_raises(PreconditionError):
        ShiftAction(3, (0,))


def test_cylinder(z_z: GroupSpec) -> None:
    """It should contain exactly the points agreeing on the window."""
    window = box_window(1, z_z)
    x = _zeros(box_ball(z_z, 2))
    cylinder = cylinder_of(x, window)
    assert in_cylinder(x, cylinder)
    assert in_cylinder(Pattern({**x.letters, ((2,), (2,)): 1}), cylinder)
    assert not in_cylinder(Pattern({**x.letters, ((1,), (1,)): 1}), cylinder)


def test_pattern_restrict_missing(z_z: GroupSpec) -> None:
    """It should raise PreconditionError for undefined cells."""
    with pytest_raises(PreconditionError):
        _zeros(box_ball(z_z, 0)).restrict([((1,), (0,))])


def test_pattern_hashable(z_z: GroupSpec) -> None:
    """It should hash equal patterns equally."""
    cells = box_ball(z_z, 1)
    patterns = {_zeros(cells), _zeros(sorted(cells))}
    assert len(patterns) == 1


def test_brute_force_full_enumeration(z_z: GroupSpec) -> None:
    """It should enumerate every assignment of the window."""
    window = box_window(1, z_z, depth=0)
    expected = sum(
        1
        for word in itertools.product(range(2), repeat=3)
        if not any(a == b == 1 for a, b in zip(word, word[1:]))
    )
    assert brute_force_count(HARD_SQUARE, window, z_z) == expected
