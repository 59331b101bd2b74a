"""Word geometry of the catalog groups: multiplication, word length, balls,
growth functions and Folner diagnostics."""

from __future__ import annotations

import json
import logging
import threading
from fractions import Fraction
from functools import lru_cache
from typing import Any, Iterable

import numpy as np

from .enums import GroupKind
from .exceptions import (
    BoundedSearchError,
    ElementMismatchError,
    PreconditionError,
    ResourceCapExceeded,
)
from .model import GroupSpec, freeze
from .schema import GrowthTable
from .settings import get_settings

logger = logging.getLogger(__name__)

Element = tuple[Any, ...]


def identity(spec: GroupSpec) -> Element:
    """
    Return the identity element 1_G in normal form.

    Args:
        spec (GroupSpec): The group.

    Returns:
        Element: The all-zero normal form.
    """
    match spec.kind:
        case GroupKind.INTEGER_LATTICE:
            return (0,) * spec.rank
        case GroupKind.CYCLIC_FINITE:
            return (0,)
        case GroupKind.INFINITE_DIHEDRAL:
            return (0, 0)
        case GroupKind.HEISENBERG3:
            return (0, 0, 0)
    assert spec.left is not None and spec.right is not None
    return (identity(spec.left), identity(spec.right))


def contains(spec: GroupSpec, g: Any) -> bool:
    """
    Check whether `g` is a normal form of an element of the group.

    Args:
        spec (GroupSpec): The group.
        g (Any): The candidate element.

    Returns:
        bool: True if `g` is a valid normal form for `spec`.
    """
    if not isinstance(g, tuple):
        return False
    match spec.kind:
        case GroupKind.INTEGER_LATTICE:
            return len(g) == spec.rank and all(_is_int(x) for x in g)
        case GroupKind.CYCLIC_FINITE:
            return len(g) == 1 and _is_int(g[0]) and 0 <= g[0] < spec.modulus
        case GroupKind.INFINITE_DIHEDRAL:
            return len(g) == 2 and _is_int(g[0]) and g[1] in (0, 1)
        case GroupKind.HEISENBERG3:
            return len(g) == 3 and all(_is_int(x) for x in g)
    assert spec.left is not None and spec.right is not None
    return len(g) == 2 and contains(spec.left, g[0]) and contains(spec.right, g[1])


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _check(spec: GroupSpec, *elements: Any) -> None:
    for element in elements:
        if not contains(spec, element):
            raise ElementMismatchError(element, spec.label)


def multiply(g: Element, h: Element, spec: GroupSpec) -> Element:
    """
    Multiply two elements of the group.

    Args:
        g (Element): The left factor.
        h (Element): The right factor.
        spec (GroupSpec): The group.

    Returns:
        Element: The product gh in normal form.

    Raises:
        ElementMismatchError: If either element does not belong to the group.
    """
    _check(spec, g, h)
    return _multiply(g, h, spec)


def _multiply(g: Element, h: Element, spec: GroupSpec) -> Element:
    match spec.kind:
        case GroupKind.INTEGER_LATTICE:
            return tuple(a + b for a, b in zip(g, h))
        case GroupKind.CYCLIC_FINITE:
            return ((g[0] + h[0]) % spec.modulus,)
        case GroupKind.INFINITE_DIHEDRAL:
            # (n, e)(m, f) = (n + (-1)^e m, e xor f)
            return (g[0] - h[0] if g[1] else g[0] + h[0], g[1] ^ h[1])
        case GroupKind.HEISENBERG3:
            return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])
    assert spec.left is not None and spec.right is not None
    return (_multiply(g[0], h[0], spec.left), _multiply(g[1], h[1], spec.right))


def inverse(g: Element, spec: GroupSpec) -> Element:
    """
    Return the inverse of an element.

    Args:
        g (Element): The element.
        spec (GroupSpec): The group.

    Returns:
        Element: g^-1 in normal form.
    """
    _check(spec, g)
    return _inverse(g, spec)


def _inverse(g: Element, spec: GroupSpec) -> Element:
    match spec.kind:
        case GroupKind.INTEGER_LATTICE:
            return tuple(-a for a in g)
        case GroupKind.CYCLIC_FINITE:
            return ((-g[0]) % spec.modulus,)
        case GroupKind.INFINITE_DIHEDRAL:
            return g if g[1] else (-g[0], 0)
        case GroupKind.HEISENBERG3:
            return (-g[0], -g[1], -g[2] + g[0] * g[1])
    assert spec.left is not None and spec.right is not None
    return (_inverse(g[0], spec.left), _inverse(g[1], spec.right))


def catalog_generators(spec: GroupSpec) -> tuple[Element, ...]:
    """
    Return the default symmetric generating set of a catalog kind.

    Args:
        spec (GroupSpec): The group.

    Returns:
        tuple[Element, ...]: The generators in list order.
    """
    match spec.kind:
        case GroupKind.INTEGER_LATTICE:
            basis = []
            for axis in range(spec.rank):
                for sign in (1, -1):
                    basis.append(
                        tuple(sign if i == axis else 0 for i in range(spec.rank))
                    )
            return tuple(basis)
        case GroupKind.CYCLIC_FINITE:
            return tuple(dict.fromkeys([(1,), (spec.modulus - 1,)]))
        case GroupKind.INFINITE_DIHEDRAL:
            # r(x) = -x and s(x) = 1 - x
            return ((0, 1), (1, 1))
        case GroupKind.HEISENBERG3:
            return ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0))
    assert spec.left is not None and spec.right is not None
    return product_generators(spec)


def product_generators(spec: GroupSpec) -> tuple[Element, ...]:
    """
    Return the generating set (S1 x {1}) u ({1} x S2) of a direct product.

    Args:
        spec (GroupSpec): A direct product.

    Returns:
        tuple[Element, ...]: The generators, first-factor generators first.
    """
    if spec.kind != GroupKind.DIRECT_PRODUCT:
        raise PreconditionError(f"{spec.label} is not a direct product.")
    assert spec.left is not None and spec.right is not None
    one_left, one_right = identity(spec.left), identity(spec.right)
    return tuple((s, one_right) for s in generators(spec.left)) + tuple(
        (one_left, t) for t in generators(spec.right)
    )


def generators(spec: GroupSpec) -> tuple[Element, ...]:
    """
    Return the effective generating set of the group.

    Args:
        spec (GroupSpec): The group.

    Returns:
        tuple[Element, ...]: The configured generators, or the catalog default.
    """
    if spec.generators:
        return spec.generators
    return catalog_generators(spec)


def validate_generators(spec: GroupSpec) -> None:
    """
    Check that the generating set is symmetric, excludes the identity and
    generates the group.

    Args:
        spec (GroupSpec): The group.

    Raises:
        PreconditionError: If an invariant of the generating set fails.
    """
    if spec.kind == GroupKind.DIRECT_PRODUCT:
        assert spec.left is not None and spec.right is not None
        validate_generators(spec.left)
        validate_generators(spec.right)
        return
    gens = generators(spec)
    _check(spec, *gens)
    if not gens:
        raise PreconditionError(f"{spec.label} needs at least one generator.")
    if identity(spec) in gens:
        raise PreconditionError(f"Generators of {spec.label} include the identity.")
    if len(set(gens)) != len(gens):
        raise PreconditionError(f"Generators of {spec.label} are not distinct.")
    missing = [s for s in gens if _inverse(s, spec) not in gens]
    if missing:
        raise PreconditionError(
            f"Generators of {spec.label} are not symmetric: {missing} lack inverses."
        )
    if spec.generators:
        # Reaching every catalog generator means the catalog test balls, hence
        # the whole group, are reachable.
        for target in catalog_generators(spec):
            word_length(target, spec, max_radius=64)


def parse_element(spec: GroupSpec, text: str) -> Element:
    """
    Parse an element from its JSON array encoding, e.g. `[[1], [0, 1]]`.

    Args:
        spec (GroupSpec): The group.
        text (str): The JSON text.

    Returns:
        Element: The element in normal form.

    Raises:
        ElementMismatchError: If the text does not encode an element of `spec`.
    """
    try:
        element = freeze(json.loads(text))
    except json.JSONDecodeError as error:
        raise ElementMismatchError(text, spec.label) from error
    _check(spec, element)
    return element


def format_element(g: Element) -> str:
    """
    Format an element as a JSON array.

    Args:
        g (Element): The element.

    Returns:
        str: The compact JSON encoding.
    """
    return json.dumps(g, separators=(",", ":"))


class _BallExplorer:
    """Breadth-first search over the Cayley graph, grown on demand.

    Spheres are stored in discovery order, which is the order of the
    BFS-first shortest words compared letter by letter in generator order.
    """

    def __init__(self, spec: GroupSpec) -> None:
        self.spec = spec
        self.gens = generators(spec)
        start = identity(spec)
        self.spheres: list[list[Element]] = [[start]]
        self.lengths: dict[Element, int] = {start: 0}
        self.lock = threading.Lock()
        self.finite = False

    @property
    def radius(self) -> int:
        return len(self.spheres) - 1

    def extend_to(self, radius: int) -> None:
        with self.lock:
            cap = get_settings().MAX_BALL_ELEMENTS
            while self.radius < radius and not self.finite:
                layer: list[Element] = []
                for g in self.spheres[-1]:
                    for s in self.gens:
                        h = _multiply(g, s, self.spec)
                        if h not in self.lengths:
                            self.lengths[h] = len(self.spheres)
                            layer.append(h)
                if len(self.lengths) > cap:
                    raise ResourceCapExceeded(
                        "MAX_BALL_ELEMENTS", cap, requested=len(self.lengths)
                    )
                if not layer:
                    self.finite = True
                    break
                self.spheres.append(layer)
                logger.debug(
                    "%s: sphere %d has %d elements",
                    self.spec.label,
                    self.radius,
                    len(layer),
                )

    def sphere(self, n: int) -> list[Element]:
        self.extend_to(n)
        return self.spheres[n] if n <= self.radius else []


@lru_cache(maxsize=64)
def _explorer(spec: GroupSpec) -> _BallExplorer:
    return _BallExplorer(spec)


def word_length(g: Element, spec: GroupSpec, max_radius: int | None = None) -> int:
    """
    Return the word length l_S(g), the least n with g = s_1...s_n.

    Args:
        g (Element): The element.
        spec (GroupSpec): The group.
        max_radius (int | None): The search radius cap. Defaults to the
            `MAX_SEARCH_RADIUS` setting.

    Returns:
        int: The word length; 0 exactly for the identity.

    Raises:
        BoundedSearchError: If g is not reached within the radius cap.
    """
    _check(spec, g)
    cap = get_settings().MAX_SEARCH_RADIUS if max_radius is None else max_radius
    explorer = _explorer(spec)
    radius = 0
    while g not in explorer.lengths:
        if radius >= cap or explorer.finite:
            raise BoundedSearchError("MAX_SEARCH_RADIUS", cap)
        radius += 1
        explorer.extend_to(radius)
    return explorer.lengths[g]


def distance(g: Element, h: Element, spec: GroupSpec) -> int:
    """
    Return the word metric d_S(g, h) = l_S(g^-1 h).

    Args:
        g (Element): The first element.
        h (Element): The second element.
        spec (GroupSpec): The group.

    Returns:
        int: The distance.
    """
    return word_length(multiply(inverse(g, spec), h, spec), spec)


def sphere(spec: GroupSpec, n: int) -> list[Element]:
    """
    Return the elements of word length exactly n, in enumeration order.

    Args:
        spec (GroupSpec): The group.
        n (int): The radius.

    Returns:
        list[Element]: The sphere.
    """
    if n < 0:
        raise PreconditionError("Radius must be nonnegative.")
    return list(_explorer(spec).sphere(n))


def ball(spec: GroupSpec, n: int) -> frozenset[Element]:
    """
    Return the ball B_S(n) = {g : l_S(g) <= n}.

    Args:
        spec (GroupSpec): The group.
        n (int): The radius.

    Returns:
        frozenset[Element]: The ball.
    """
    return frozenset(g for k in range(n + 1) for g in sphere(spec, k))


def ball_size(spec: GroupSpec, n: int) -> int:
    """
    Return the growth function gamma_S(n) = |B_S(n)|.

    Args:
        spec (GroupSpec): The group.
        n (int): The radius.

    Returns:
        int: The ball size.
    """
    if n < 0:
        raise PreconditionError("Radius must be nonnegative.")
    explorer = _explorer(spec)
    explorer.extend_to(n)
    return sum(len(layer) for layer in explorer.spheres[: n + 1])


def box_ball(spec: GroupSpec, m: int) -> frozenset[Element]:
    """
    Return the sup-norm ball B_{S1}(m) x B_{S2}(m) of a direct product.

    Args:
        spec (GroupSpec): A direct product.
        m (int): The radius.

    Returns:
        frozenset[Element]: The product of the factor balls.
    """
    if spec.kind != GroupKind.DIRECT_PRODUCT:
        raise PreconditionError(f"{spec.label} is not a direct product.")
    assert spec.left is not None and spec.right is not None
    first, second = ball(spec.left, m), ball(spec.right, m)
    return frozenset((a, b) for a in first for b in second)


def sup_norm(g: Element, spec: GroupSpec) -> int:
    """
    Return |g|_inf = max(l_{S1}(g_1), l_{S2}(g_2)) for a direct product.

    Args:
        g (Element): An element of the product.
        spec (GroupSpec): A direct product.

    Returns:
        int: The sup norm.
    """
    if spec.kind != GroupKind.DIRECT_PRODUCT:
        raise PreconditionError(f"{spec.label} is not a direct product.")
    assert spec.left is not None and spec.right is not None
    _check(spec, g)
    return max(word_length(g[0], spec.left), word_length(g[1], spec.right))


def bass_degree(spec: GroupSpec) -> int:
    """
    Return the polynomial growth degree computed from the lower central series.

    The degree is sum_i i * rank(C^{i-1}/C^i); for the Heisenberg group the
    abelianization has rank 2 and the center rank 1, giving 4.

    Args:
        spec (GroupSpec): The group.

    Returns:
        int: The growth degree.
    """
    match spec.kind:
        case GroupKind.INTEGER_LATTICE:
            return spec.rank
        case GroupKind.CYCLIC_FINITE:
            return 0
        case GroupKind.INFINITE_DIHEDRAL:
            return 1
        case GroupKind.HEISENBERG3:
            return 4
    assert spec.left is not None and spec.right is not None
    return bass_degree(spec.left) + bass_degree(spec.right)


def fit_degree(ball_sizes: list[int]) -> float:
    """
    Estimate the growth degree from ball sizes gamma(0..n_max).

    Least squares of log gamma(n) against log n over the upper half of the
    radii, with 1/n and 1/n^2 correction columns when there are enough points.

    Args:
        ball_sizes (list[int]): The growth function from radius 0.

    Returns:
        float: The fitted degree; 0.0 when fewer than two radii are available.
    """
    n_max = len(ball_sizes) - 1
    radii = np.arange(max(1, (n_max + 1) // 2), n_max + 1, dtype=float)
    if len(radii) < 2:
        return 0.0
    values = np.log(np.asarray([ball_sizes[int(n)] for n in radii], dtype=float))
    columns = [np.ones_like(radii), np.log(radii)]
    for power in (1, 2):
        if len(radii) >= len(columns) + 2:
            columns.append(radii**-power)
    solution, *_ = np.linalg.lstsq(np.column_stack(columns), values, rcond=None)
    return float(solution[1])


def growth_table(
    spec: GroupSpec,
    n_max: int,
    include_enumeration: bool = True,
) -> GrowthTable:
    """
    Compute the growth function up to n_max together with the enumeration
    g_0, g_1, ... ordered by (word length, generator-lexicographic order).

    Args:
        spec (GroupSpec): The group.
        n_max (int): The largest radius.
        include_enumeration (bool): Whether to keep the enumeration.

    Returns:
        GrowthTable: The table with sizes, enumeration and degree fit.
    """
    if n_max < 0:
        raise PreconditionError("n_max must be nonnegative.")
    spheres = [sphere(spec, n) for n in range(n_max + 1)]
    sizes: list[int] = []
    total = 0
    for layer in spheres:
        total += len(layer)
        sizes.append(total)
    enumeration = [g for layer in spheres for g in layer]
    return GrowthTable(
        group=spec.label,
        radii=list(range(n_max + 1)),
        ball_sizes=sizes,
        enumeration=enumeration if include_enumeration else None,
        degree_fit=fit_degree(sizes),
        bass_degree=bass_degree(spec),
    )


def product_set(
    first: Iterable[Element], second: Iterable[Element], spec: GroupSpec
) -> frozenset[Element]:
    """
    Return the product set AB = {ab : a in A, b in B}.

    Args:
        first (Iterable[Element]): The set A.
        second (Iterable[Element]): The set B.
        spec (GroupSpec): The group.

    Returns:
        frozenset[Element]: The product set.
    """
    second = list(second)
    return frozenset(_multiply(a, b, spec) for a in first for b in second)


def inverse_set(elements: Iterable[Element], spec: GroupSpec) -> frozenset[Element]:
    """Return {g^-1 : g in elements}."""
    return frozenset(_inverse(g, spec) for g in elements)


def boundary(
    A: Iterable[Element], K: Iterable[Element], spec: GroupSpec
) -> frozenset[Element]:
    """
    Return the K-boundary B(A, K) = {g : Kg meets A and Kg meets G \\ A}.

    Args:
        A (Iterable[Element]): A finite nonempty set.
        K (Iterable[Element]): A finite nonempty set.
        spec (GroupSpec): The group.

    Returns:
        frozenset[Element]: The boundary.
    """
    A, K = frozenset(A), frozenset(K)
    if not A or not K:
        raise PreconditionError("A and K must be nonempty.")
    _check(spec, *A, *K)
    # Kg meets A exactly when g lies in K^-1 A.
    candidates = product_set(inverse_set(K, spec), A, spec)
    return frozenset(
        g
        for g in candidates
        if any(_multiply(k, g, spec) not in A for k in K)
    )


def invariance_ratio(
    A: Iterable[Element], K: Iterable[Element], spec: GroupSpec
) -> Fraction:
    """
    Return |B(A, K)| / |A|; A is (K, delta)-invariant when this is below delta.

    Args:
        A (Iterable[Element]): A finite nonempty set.
        K (Iterable[Element]): A finite nonempty set.
        spec (GroupSpec): The group.

    Returns:
        Fraction: The exact ratio.
    """
    A = frozenset(A)
    return Fraction(len(boundary(A, K, spec)), len(A))


def is_tempered_prefix(spec: GroupSpec, n_max: int) -> Fraction:
    """
    Return the smallest C witnessing temperedness of the balls up to n_max,
    max over 2 <= n <= n_max of |U_{k<n} B(k)^-1 B(n)| / |B(n)|.

    Balls are symmetric and B(k)B(n) = B(k+n), so the union is B(2n-1).

    Args:
        spec (GroupSpec): The group.
        n_max (int): The largest radius, at least 1.

    Returns:
        Fraction: The witnessed constant; 1 when the range is empty.
    """
    if n_max < 1:
        raise PreconditionError("n_max must be at least 1.")
    witness = Fraction(1)
    for n in range(2, n_max + 1):
        witness = max(
            witness, Fraction(ball_size(spec, 2 * n - 1), ball_size(spec, n))
        )
    return witness


def tempered_union(spec: GroupSpec, n: int) -> frozenset[Element]:
    """
    Return U_{k<n} B(k)^-1 B(n) by explicit set products.

    Args:
        spec (GroupSpec): The group.
        n (int): The index n >= 1.

    Returns:
        frozenset[Element]: The union.
    """
    target = ball(spec, n)
    union: set[Element] = set()
    for k in range(n):
        union |= product_set(inverse_set(ball(spec, k), spec), target, spec)
    return frozenset(union)


def growth_sandwich(spec: GroupSpec, n_max: int, degree: int) -> tuple[float, float]:
    """
    Return the best constants A, B with A n^d <= gamma(n) <= B n^d on 1..n_max.

    Args:
        spec (GroupSpec): The group.
        n_max (int): The largest radius, at least 1.
        degree (int): The exponent d.

    Returns:
        tuple[float, float]: The constants (A, B).
    """
    ratios = [ball_size(spec, n) / n**degree for n in range(1, n_max + 1)]
    return min(ratios), max(ratios)
