"""Subshifts over product groups G1 x G2: windows, patterns, the ultrametric,
shift actions, cylinders and exact pattern counting."""

from __future__ import annotations

import itertools
import logging
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .enums import GroupKind, Resolution, SubshiftKind
from .exceptions import IncompatibleSpecsError, PreconditionError, ResourceCapExceeded
from .groups import (
    Element,
    ball,
    box_ball,
    identity,
    inverse,
    multiply,
    product_set,
    word_length,
)
from .model import GroupSpec, SubshiftSpec
from .schema import PatternCount
from .settings import get_settings

logger = logging.getLogger(__name__)

Cell = tuple[Element, Element]


@dataclass(frozen=True)
class Window:
    """
    A finite set of cells of G1 x G2.

    Attributes:
        cells (frozenset[Cell]): The cells (g1, g2).
        provenance (str): How the window was built.
    """

    cells: frozenset[Cell]
    provenance: str = "explicit"

    def __len__(self) -> int:
        return len(self.cells)

    def __contains__(self, cell: object) -> bool:
        return cell in self.cells

    def slices(self) -> dict[Element, frozenset[Element]]:
        """
        Group the cells by their G1 coordinate.

        Returns:
            dict[Element, frozenset[Element]]: g1 -> {g2 : (g1, g2) in W}.
        """
        grouped: dict[Element, set[Element]] = {}
        for first, second in self.cells:
            grouped.setdefault(first, set()).add(second)
        return {first: frozenset(seconds) for first, seconds in grouped.items()}


@dataclass(frozen=True)
class BoxWindow:
    """
    A product window E1 x E2 whose cells are only built on demand.

    Attributes:
        first (frozenset[Element]): The G1 factor E1.
        second (frozenset[Element]): The G2 factor E2.
        provenance (str): How the window was built.
    """

    first: frozenset[Element]
    second: frozenset[Element]
    provenance: str = "box"

    def __len__(self) -> int:
        return len(self.first) * len(self.second)

    def __contains__(self, cell: object) -> bool:
        return (
            isinstance(cell, tuple)
            and len(cell) == 2
            and cell[0] in self.first
            and cell[1] in self.second
        )

    @cached_property
    def cells(self) -> frozenset[Cell]:
        """The cells of E1 x E2."""
        return frozenset(itertools.product(self.first, self.second))

    def slices(self) -> dict[Element, frozenset[Element]]:
        """Every G1-slice of a product window is E2."""
        return {first: self.second for first in self.first}


AnyWindow = Window | BoxWindow


@dataclass(frozen=True)
class Pattern:
    """
    An assignment of alphabet indices to the cells of a window.

    Attributes:
        letters (Mapping[Cell, int]): cell -> symbol index.
    """

    letters: Mapping[Cell, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "letters", MappingProxyType(dict(self.letters)))

    def __hash__(self) -> int:
        return hash(frozenset(self.letters.items()))

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def window(self) -> Window:
        """The window the pattern is defined on."""
        return Window(frozenset(self.letters), provenance="pattern")

    def restrict(self, cells: Iterable[Cell]) -> Pattern:
        """
        Return the restriction x|_E.

        Args:
            cells (Iterable[Cell]): The cells E; all must be defined.

        Returns:
            Pattern: The restricted pattern.
        """
        try:
            return Pattern({cell: self.letters[cell] for cell in cells})
        except KeyError as error:
            raise PreconditionError(
                f"Pattern is not defined on cell {error.args[0]!r}."
            ) from error


@dataclass(frozen=True)
class ShiftAction:
    """
    A shift sigma_{1,g} (axis 1, g in G1) or sigma_{2,h} (axis 2, h in G2).

    Attributes:
        axis (int): 1 or 2.
        element (Element): The group element of the chosen factor.
    """

    axis: int
    element: Element

    def __post_init__(self) -> None:
        if self.axis not in (1, 2):
            raise PreconditionError("Shift axis must be 1 or 2.")


def _factors(spec: GroupSpec) -> tuple[GroupSpec, GroupSpec]:
    if spec.kind != GroupKind.DIRECT_PRODUCT:
        raise PreconditionError(f"{spec.label} is not a direct product G1 x G2.")
    assert spec.left is not None and spec.right is not None
    return spec.left, spec.right


def check_compatible(group: GroupSpec, shift: SubshiftSpec) -> None:
    """
    Check that a subshift can live over the given product group.

    Args:
        group (GroupSpec): The group G1 x G2.
        shift (SubshiftSpec): The subshift.

    Raises:
        IncompatibleSpecsError: If the subshift needs a structure G lacks.
    """
    if group.kind != GroupKind.DIRECT_PRODUCT:
        raise IncompatibleSpecsError(
            f"subshift {shift.kind.value}", f"group {group.label}", "G must be G1 x G2"
        )
    _, second = _factors(group)
    if shift.kind == SubshiftKind.FIBER_SFT and not second.is_integer_line:
        raise IncompatibleSpecsError(
            f"subshift {shift.kind.value}",
            f"group {group.label}",
            "FiberSFT requires G2 to be the integers",
        )


def sup_norm_of(cell: Cell, group: GroupSpec) -> int:
    """Return |g|_inf = max(l_{S1}(g1), l_{S2}(g2)) of a cell."""
    first, second = _factors(group)
    return max(word_length(cell[0], first), word_length(cell[1], second))


def metric_distance(
    x: Pattern, y: Pattern, depth_cap: int, group: GroupSpec
) -> Fraction | Resolution:
    """
    Return d(x, y) = 2^-min{|g|_inf : x_g != y_g}, scanning |g|_inf <= depth_cap.

    Args:
        x (Pattern): The first point, known at least on box_ball(depth_cap).
        y (Pattern): The second point, known at least on box_ball(depth_cap).
        depth_cap (int): The radius M of the inspected box.
        group (GroupSpec): The group G1 x G2.

    Returns:
        Fraction | Resolution: The dyadic distance, or
            `Resolution.INDISTINGUISHABLE` when x and y agree on the whole box
            (the true distance is then below 2^-depth_cap).

    Raises:
        PreconditionError: If a pattern is not defined on the whole box.
    """
    box = box_ball(group, depth_cap)
    for pattern in (x, y):
        if not box <= pattern.letters.keys():
            raise PreconditionError(
                f"Patterns must be defined on the box of radius {depth_cap}."
            )
    disagreements = [cell for cell in box if x.letters[cell] != y.letters[cell]]
    if not disagreements:
        return Resolution.INDISTINGUISHABLE
    depth = min(sup_norm_of(cell, group) for cell in disagreements)
    return Fraction(1, 2**depth)


def dynamical_ball_window(
    F: Iterable[Element], M: int, group: GroupSpec
) -> BoxWindow:
    """
    Return W = B_{S1}(M)F x B_{S2}(M); two points are within 2^-(M+1) for
    the dynamical metric d_F exactly when they agree on W.

    Args:
        F (Iterable[Element]): A finite subset of G1.
        M (int): The depth.
        group (GroupSpec): The group G1 x G2.

    Returns:
        BoxWindow: The window.
    """
    if M < 0:
        raise PreconditionError("Depth must be nonnegative.")
    first, second = _factors(group)
    F = frozenset(F)
    if not F:
        F = frozenset({identity(first)})
    return BoxWindow(
        first=product_set(ball(first, M), F, first),
        second=ball(second, M),
        provenance=f"B_S1({M})F x B_S2({M})",
    )


def ball_window(N: int, M: int, group: GroupSpec) -> BoxWindow:
    """
    Return B_{S1}(M)B_{S1}(N) x B_{S2}(M) = B_{S1}(M+N) x B_{S2}(M).

    Args:
        N (int): The radius of the Folner ball in G1.
        M (int): The depth.
        group (GroupSpec): The group G1 x G2.

    Returns:
        BoxWindow: The window.
    """
    if N < 0 or M < 0:
        raise PreconditionError("N and M must be nonnegative.")
    first, second = _factors(group)
    return BoxWindow(
        first=ball(first, M + N),
        second=ball(second, M),
        provenance=f"B_S1({M})B_S1({N}) x B_S2({M})",
    )


def box_window(n: int, group: GroupSpec, depth: int | None = None) -> BoxWindow:
    """
    Return B_{S1}(n) x B_{S2}(depth), the box Folner set (depth defaults to n).

    Args:
        n (int): The G1 radius.
        group (GroupSpec): The group G1 x G2.
        depth (int | None): The G2 radius.

    Returns:
        BoxWindow: The window.
    """
    first, second = _factors(group)
    depth = n if depth is None else depth
    return BoxWindow(
        first=ball(first, n),
        second=ball(second, depth),
        provenance=f"B_S1({n}) x B_S2({depth})",
    )


def cylinder_of(x: Pattern, window: AnyWindow) -> Pattern:
    """
    Return the representative x|_W of the cylinder of x over W.

    Args:
        x (Pattern): The point, defined on W.
        window (AnyWindow): The window W.

    Returns:
        Pattern: The restriction.
    """
    return x.restrict(window.cells)


def in_cylinder(y: Pattern, cylinder: Pattern) -> bool:
    """
    Check whether y lies in the cylinder represented by `cylinder`.

    Args:
        y (Pattern): The point.
        cylinder (Pattern): The cylinder representative.

    Returns:
        bool: True when y agrees with the representative on its window.
    """
    return all(y.letters.get(cell) == letter for cell, letter in cylinder.letters.items())


def apply_shift(
    p: Pattern,
    action: ShiftAction,
    group: GroupSpec,
    target: AnyWindow | None = None,
) -> Pattern:
    """
    Apply a shift: (sigma_{1,g}x)_(g1,g2) = x_(g1 g, g2) and
    (sigma_{2,h}x)_(g1,g2) = x_(g1, g2 h).

    Args:
        p (Pattern): The pattern.
        action (ShiftAction): The shift.
        group (GroupSpec): The group G1 x G2.
        target (AnyWindow | None): The window the result is needed on;
            the whole pulled-back window when None.

    Returns:
        Pattern: The shifted pattern.

    Raises:
        PreconditionError: If p does not cover the cells `target` needs.
    """
    first, second = _factors(group)
    factor = first if action.axis == 1 else second
    g_inv = inverse(action.element, factor)
    shifted: dict[Cell, int] = {}
    for (g1, g2), letter in p.letters.items():
        if action.axis == 1:
            shifted[(multiply(g1, g_inv, first), g2)] = letter
        else:
            shifted[(g1, multiply(g2, g_inv, second))] = letter
    result = Pattern(shifted)
    if target is None:
        return result
    missing = [cell for cell in target.cells if cell not in shifted]
    if missing:
        raise PreconditionError(
            f"Shifted pattern misses {len(missing)} cells of the target window."
        )
    return result.restrict(target.cells)


def shift_window(window: AnyWindow, action: ShiftAction, group: GroupSpec) -> Window:
    """
    Return the cells the shifted pattern is defined on.

    Args:
        window (AnyWindow): The window of the pattern.
        action (ShiftAction): The shift.
        group (GroupSpec): The group G1 x G2.

    Returns:
        Window: The pulled-back window.
    """
    first, second = _factors(group)
    factor = first if action.axis == 1 else second
    g_inv = inverse(action.element, factor)
    if action.axis == 1:
        cells = {(multiply(g1, g_inv, first), g2) for g1, g2 in window.cells}
    else:
        cells = {(g1, multiply(g2, g_inv, second)) for g1, g2 in window.cells}
    return Window(frozenset(cells), provenance=f"shifted {window.provenance}")


@lru_cache(maxsize=32)
def essential_graph(shift: SubshiftSpec) -> tuple[tuple[tuple[int, ...], ...], np.ndarray]:
    """
    Build the transfer graph of a fiber SFT, pruned to its essential part.

    States are the allowed words of length max(k-1, 1), k the longest
    forbidden word; only states on bi-infinite paths are kept.

    Args:
        shift (SubshiftSpec): A fiber SFT (or full shift).

    Returns:
        tuple: The states and the 0/1 adjacency matrix (object dtype).
    """
    longest = max((len(word) for word in shift.forbidden_words), default=1)
    span = max(longest - 1, 1)
    forbidden = set(shift.forbidden_words)

    def allowed(word: tuple[int, ...]) -> bool:
        return not any(
            word[i : i + len(bad)] == bad
            for bad in forbidden
            for i in range(len(word) - len(bad) + 1)
        )

    states = [
        word
        for word in itertools.product(range(shift.alphabet_size), repeat=span)
        if allowed(word)
    ]
    while True:
        index = {state: i for i, state in enumerate(states)}
        matrix = np.zeros((len(states), len(states)), dtype=object)
        for state in states:
            for letter in range(shift.alphabet_size):
                successor = state[1:] + (letter,)
                if successor in index and allowed(state + (letter,)):
                    matrix[index[state], index[successor]] = 1
        keep = [
            state
            for i, state in enumerate(states)
            if matrix[i, :].any() and matrix[:, i].any()
        ]
        if len(keep) == len(states):
            return tuple(states), matrix
        states = keep


def _matrix_power(matrix: np.ndarray, exponent: int) -> np.ndarray:
    result = np.identity(matrix.shape[0], dtype=object)
    base = matrix
    while exponent:
        if exponent & 1:
            result = result.dot(base)
        base = base.dot(base)
        exponent >>= 1
    return result


@lru_cache(maxsize=4096)
def fiber_word_count(shift: SubshiftSpec, length: int) -> int:
    """
    Return the exact number of words of the given length occurring in the
    one-dimensional SFT along a fiber.

    Args:
        shift (SubshiftSpec): A fiber SFT.
        length (int): The word length L.

    Returns:
        int: The number of globally admissible words of length L.
    """
    if length < 0:
        raise PreconditionError("Word length must be nonnegative.")
    if length == 0:
        return 1
    states, matrix = essential_graph(shift)
    if not states:
        return 0
    span = len(states[0])
    if length < span:
        return len({state[:length] for state in states})
    power = _matrix_power(matrix, length - span)
    return int(power.sum())


@lru_cache(maxsize=32)
def fiber_entropy(shift: SubshiftSpec) -> float:
    """
    Return the entropy of the fiber SFT, log2 of the Perron root of its
    essential transfer graph.

    Args:
        shift (SubshiftSpec): A fiber SFT.

    Returns:
        float: The entropy in bits per site.
    """
    states, matrix = essential_graph(shift)
    if not states:
        raise PreconditionError("The fiber SFT is empty.")
    radius = max(abs(np.linalg.eigvals(matrix.astype(float))))
    return float(np.log2(radius))


def _interval_length(seconds: frozenset[Element]) -> int:
    values = sorted(g[0] for g in seconds)
    if values[-1] - values[0] + 1 != len(values):
        raise PreconditionError(
            "FiberSFT counting needs every G2-slice of the window to be an interval."
        )
    return len(values)


def safe_symbol(shift: SubshiftSpec) -> int | None:
    """
    Return a symbol that occurs in no forbidden pattern, if any. Padding a
    locally admissible pattern with it gives a point of the subshift.

    Args:
        shift (SubshiftSpec): A general SFT.

    Returns:
        int | None: The smallest safe symbol.
    """
    used = {letter for pattern in shift.forbidden_patterns for _, letter in pattern.letters}
    free = [a for a in range(shift.alphabet_size) if a not in used]
    return free[0] if free else None


def fiber_form(shift: SubshiftSpec, group: GroupSpec) -> SubshiftSpec | None:
    """
    Return the fiber SFT equal to a one-dimensional general SFT: every
    forbidden pattern sits inside one G2 fiber and G2 is the integers.

    A pattern with gaps becomes the forbidden words over its span with every
    letter at the free positions.

    Args:
        shift (SubshiftSpec): A general SFT.
        group (GroupSpec): The group G1 x G2.

    Returns:
        SubshiftSpec | None: The fiber SFT, or None if a pattern spans two
            fibers or G2 is not the integers.
    """
    _, second = _factors(group)
    if shift.kind != SubshiftKind.GENERAL_SFT or not second.is_integer_line:
        return None
    words: set[tuple[int, ...]] = set()
    for pattern in shift.forbidden_patterns:
        if len({cell[0] for cell, _ in pattern.letters}) != 1:
            return None
        fixed = {cell[1][0]: letter for cell, letter in pattern.letters}
        span = range(min(fixed), max(fixed) + 1)
        choices = [
            (fixed[k],) if k in fixed else range(shift.alphabet_size) for k in span
        ]
        words.update(itertools.product(*choices))
    return SubshiftSpec(
        kind=SubshiftKind.FIBER_SFT,
        alphabet=shift.alphabet,
        forbidden_words=tuple(sorted(words)),
    )


def _fiber_count(shift: SubshiftSpec, window: AnyWindow) -> int:
    if isinstance(window, BoxWindow) and window.first:
        return fiber_word_count(shift, _interval_length(window.second)) ** len(
            window.first
        )
    return math.prod(
        fiber_word_count(shift, _interval_length(seconds))
        for seconds in window.slices().values()
    )


def _has_interval_slices(window: AnyWindow) -> bool:
    for seconds in window.slices().values():
        values = sorted(g[0] for g in seconds)
        if values and values[-1] - values[0] + 1 != len(values):
            return False
    return True


def count_patterns(
    shift: SubshiftSpec, window: AnyWindow, group: GroupSpec
) -> PatternCount:
    """
    Count |pi_W(X)|, the patterns of the subshift on a window.

    Args:
        shift (SubshiftSpec): The subshift.
        window (AnyWindow): The window W.
        group (GroupSpec): The group G1 x G2.

    Returns:
        PatternCount: The count, exact for full shifts, fiber SFTs, general
            SFTs with a safe symbol and one-dimensional general SFTs on
            windows with interval slices; an upper bound (locally admissible
            patterns) otherwise. A count of 0 has no logarithm.

    Raises:
        ResourceCapExceeded: If a general SFT window exceeds `MAX_WINDOW_CELLS`.
    """
    check_compatible(group, shift)
    size = len(window)
    if shift.kind == SubshiftKind.FULL_SHIFT:
        value = shift.alphabet_size**size
        return _pattern_count(value, True, "full shift closed form", size)
    if shift.kind == SubshiftKind.FIBER_SFT:
        return _pattern_count(
            _fiber_count(shift, window), True, "fiber transfer matrix", size
        )
    fibers = fiber_form(shift, group)
    if fibers is not None and _has_interval_slices(window):
        method = "fiber transfer matrix (one-dimensional)"
        return _pattern_count(_fiber_count(fibers, window), True, method, size)
    cap = get_settings().MAX_WINDOW_CELLS
    if size > cap:
        raise ResourceCapExceeded("MAX_WINDOW_CELLS", cap, requested=size)
    value = count_locally_admissible(shift, window, group)
    exact = not shift.forbidden_patterns or safe_symbol(shift) is not None
    method = "backtracking" + ("" if exact else " (upper bound)")
    logger.debug("Counted %d locally admissible patterns on %d cells", value, size)
    return _pattern_count(value, exact, method, size)


def _pattern_count(value: int, exact: bool, method: str, cells: int) -> PatternCount:
    return PatternCount(
        value=value,
        log2=math.log2(value) if value else None,
        exact=exact,
        method=method,
        cells=cells,
    )


def _constraints(
    shift: SubshiftSpec, order: list[Cell], group: GroupSpec
) -> list[list[tuple[tuple[int, ...], tuple[int, ...]]]]:
    """Place every forbidden pattern inside the window, indexed by last cell."""
    index = {cell: i for i, cell in enumerate(order)}
    placed: set[tuple[tuple[int, ...], tuple[int, ...]]] = set()
    for pattern in shift.forbidden_patterns:
        anchor = pattern.letters[0][0]
        anchor_inv = inverse(anchor, group)
        for cell in order:
            g = multiply(anchor_inv, cell, group)
            positions = []
            for offset, _ in pattern.letters:
                position = index.get(multiply(offset, g, group))
                if position is None:
                    break
                positions.append(position)
            else:
                letters = tuple(letter for _, letter in pattern.letters)
                placed.add((tuple(positions), letters))
    by_last: list[list[tuple[tuple[int, ...], tuple[int, ...]]]] = [[] for _ in order]
    for positions, letters in sorted(placed):
        by_last[max(positions)].append((positions, letters))
    return by_last


def count_locally_admissible(
    shift: SubshiftSpec, window: AnyWindow, group: GroupSpec
) -> int:
    """
    Count patterns on W containing no forbidden pattern, by backtracking
    over the cells in sorted order with memoisation on the assigned cells
    that later constraints still read.

    Args:
        shift (SubshiftSpec): The subshift.
        window (AnyWindow): The window W.
        group (GroupSpec): The group G1 x G2.

    Returns:
        int: The number of locally admissible patterns.
    """
    order = sorted(window.cells)
    size = len(order)
    if not size:
        return 1
    by_last = _constraints(shift, order, group)
    last_use = list(range(size))
    for constraints in by_last:
        for positions, _ in constraints:
            for position in positions:
                last_use[position] = max(last_use[position], max(positions))
    frontier = [
        tuple(p for p in range(i) if last_use[p] >= i) for i in range(size + 1)
    ]
    assignment = [0] * size
    memo: dict[tuple[int, tuple[int, ...]], int] = {}
    letters = range(shift.alphabet_size)

    def search(i: int) -> int:
        if i == size:
            return 1
        key = (i, tuple(assignment[p] for p in frontier[i]))
        if key in memo:
            return memo[key]
        total = 0
        for letter in letters:
            assignment[i] = letter
            if not any(
                all(assignment[p] == a for p, a in zip(positions, bad))
                for positions, bad in by_last[i]
            ):
                total += search(i + 1)
        memo[key] = total
        return total

    limit = sys.getrecursionlimit()
    if size + 50 > limit:
        sys.setrecursionlimit(size + 50)
    return search(0)


def brute_force_count(shift: SubshiftSpec, window: AnyWindow, group: GroupSpec) -> int:
    """
    Count patterns on W by enumerating all |A|^|W| assignments and checking
    every forbidden word or pattern that fits inside W.

    Args:
        shift (SubshiftSpec): The subshift.
        window (AnyWindow): A small window.
        group (GroupSpec): The group G1 x G2.

    Returns:
        int: The number of assignments avoiding every forbidden occurrence.
    """
    order = sorted(window.cells)
    if shift.kind == SubshiftKind.FULL_SHIFT:
        checks: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    elif shift.kind == SubshiftKind.GENERAL_SFT:
        checks = [c for bucket in _constraints(shift, order, group) for c in bucket]
    else:
        index = {cell: i for i, cell in enumerate(order)}
        checks = []
        for g1, g2 in order:
            for word in shift.forbidden_words:
                positions = [index.get((g1, (g2[0] + k,))) for k in range(len(word))]
                if None not in positions:
                    checks.append((tuple(positions), word))  # type: ignore[arg-type]
    count = 0
    for assignment in itertools.product(range(shift.alphabet_size), repeat=len(order)):
        if not any(
            all(assignment[p] == a for p, a in zip(positions, bad))
            for positions, bad in checks
        ):
            count += 1
    return count
