"""Model classes for the meandim package."""

from __future__ import annotations

import math
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .enums import Command, GroupKind, MeasureKind, OutputFormat, SubshiftKind

MEASURE_TOLERANCE = 1e-9


def freeze(value: Any) -> Any:
    """
    Recursively convert lists into tuples so that elements are hashable.

    Args:
        value (Any): A nested structure of lists, tuples and integers.

    Returns:
        Any: The same structure with every list replaced by a tuple.
    """
    if isinstance(value, (list, tuple)):
        return tuple(freeze(item) for item in value)
    return value


class GroupSpec(BaseModel):
    """
    A finitely generated group from the catalog, with an ordered symmetric
    generating set.

    Attributes:
        kind (GroupKind): The catalog kind.
        rank (int): The rank d of an integer lattice.
        modulus (int): The order m of a finite cyclic group.
        left (GroupSpec | None): The first factor of a direct product.
        right (GroupSpec | None): The second factor of a direct product.
        generators (tuple): The generators in normal form. Empty means the
            catalog default; direct products always use the product set
            (S1 x {1}) u ({1} x S2) built from their factors.
    """

    model_config = ConfigDict(frozen=True)

    kind: GroupKind
    rank: int = 1
    modulus: int = 2
    left: GroupSpec | None = None
    right: GroupSpec | None = None
    generators: tuple[Any, ...] = ()

    @field_validator("generators", mode="before")
    @classmethod
    def _freeze_generators(cls, value: Any) -> Any:
        return freeze(value)

    @model_validator(mode="after")
    def _check_shape(self) -> GroupSpec:
        if self.kind == GroupKind.INTEGER_LATTICE and self.rank < 1:
            raise ValueError("IntegerLattice rank must be at least 1.")
        if self.kind == GroupKind.CYCLIC_FINITE and self.modulus < 2:
            raise ValueError("CyclicFinite modulus must be at least 2.")
        is_product = self.kind == GroupKind.DIRECT_PRODUCT
        if is_product and (self.left is None or self.right is None):
            raise ValueError("DirectProduct needs a left and a right factor.")
        if not is_product and (self.left is not None or self.right is not None):
            raise ValueError(f"{self.kind.value} takes no factors.")
        if is_product and self.generators:
            raise ValueError("DirectProduct generators come from its factors.")
        return self

    @property
    def label(self) -> str:
        """Short human readable name, e.g. `Z^1 x D_inf`."""
        match self.kind:
            case GroupKind.INTEGER_LATTICE:
                return f"Z^{self.rank}"
            case GroupKind.CYCLIC_FINITE:
                return f"Z/{self.modulus}Z"
            case GroupKind.INFINITE_DIHEDRAL:
                return "D_inf"
            case GroupKind.HEISENBERG3:
                return "H3"
        assert self.left is not None and self.right is not None
        return f"({self.left.label} x {self.right.label})"

    @property
    def is_integer_line(self) -> bool:
        """True for the group of integers with its standard generators."""
        return (
            self.kind == GroupKind.INTEGER_LATTICE
            and self.rank == 1
            and set(self.generators) in (set(), {(1,), (-1,)})
        )

    @classmethod
    def integers(cls, rank: int = 1) -> GroupSpec:
        """Return the integer lattice of the given rank."""
        return cls(kind=GroupKind.INTEGER_LATTICE, rank=rank)

    @classmethod
    def cyclic(cls, modulus: int) -> GroupSpec:
        """Return the cyclic group of the given order."""
        return cls(kind=GroupKind.CYCLIC_FINITE, modulus=modulus)

    @classmethod
    def dihedral(cls) -> GroupSpec:
        """Return the infinite dihedral group generated by r and s."""
        return cls(kind=GroupKind.INFINITE_DIHEDRAL)

    @classmethod
    def heisenberg(cls) -> GroupSpec:
        """Return the discrete Heisenberg group."""
        return cls(kind=GroupKind.HEISENBERG3)

    @classmethod
    def product(cls, left: GroupSpec, right: GroupSpec) -> GroupSpec:
        """Return the direct product of two catalog groups."""
        return cls(kind=GroupKind.DIRECT_PRODUCT, left=left, right=right)


class PatternSpec(BaseModel):
    """
    A forbidden pattern of a general SFT.

    Attributes:
        letters (tuple): Pairs ((g1, g2), letter) with the cell offsets in
            G1 x G2 and the alphabet index.
    """

    model_config = ConfigDict(frozen=True)

    letters: tuple[tuple[Any, int], ...]

    @field_validator("letters", mode="before")
    @classmethod
    def _freeze_letters(cls, value: Any) -> Any:
        return freeze(value)

    @field_validator("letters")
    @classmethod
    def _check_letters(cls, value: tuple) -> tuple:
        if not value:
            raise ValueError("A forbidden pattern needs at least one cell.")
        cells = [cell for cell, _ in value]
        if len(set(cells)) != len(cells):
            raise ValueError("Forbidden pattern cells must be distinct.")
        return value


class SubshiftSpec(BaseModel):
    """
    A subshift of the full shift over a finite alphabet.

    Attributes:
        kind (SubshiftKind): Full shift, fiber SFT or general SFT.
        alphabet (tuple[str, ...]): The user labels; symbol i is alphabet[i].
        forbidden_words (tuple): Words of symbol indices along the second
            factor (FiberSFT).
        forbidden_patterns (tuple[PatternSpec, ...]): Forbidden patterns
            (GeneralSFT).
    """

    model_config = ConfigDict(frozen=True)

    kind: SubshiftKind
    alphabet: tuple[str, ...]
    forbidden_words: tuple[tuple[int, ...], ...] = ()
    forbidden_patterns: tuple[PatternSpec, ...] = ()

    @field_validator("forbidden_words", mode="before")
    @classmethod
    def _freeze_words(cls, value: Any) -> Any:
        return freeze(value)

    @model_validator(mode="after")
    def _check_symbols(self) -> SubshiftSpec:
        if not self.alphabet:
            raise ValueError("The alphabet must not be empty.")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("Alphabet labels must be distinct.")
        size = len(self.alphabet)
        for word in self.forbidden_words:
            if not word:
                raise ValueError("Forbidden words must not be empty.")
            if any(not 0 <= letter < size for letter in word):
                raise ValueError(f"Forbidden word {word} uses an unknown symbol.")
        for pattern in self.forbidden_patterns:
            if any(not 0 <= letter < size for _, letter in pattern.letters):
                raise ValueError("Forbidden pattern uses an unknown symbol.")
        if self.kind != SubshiftKind.FIBER_SFT and self.forbidden_words:
            raise ValueError("Forbidden words are only allowed for FiberSFT.")
        if self.kind != SubshiftKind.GENERAL_SFT and self.forbidden_patterns:
            raise ValueError("Forbidden patterns are only allowed for GeneralSFT.")
        return self

    @property
    def alphabet_size(self) -> int:
        """The number of symbols |A|."""
        return len(self.alphabet)

    @classmethod
    def full(cls, size: int = 2) -> SubshiftSpec:
        """Return the full shift over `size` symbols labelled 0..size-1."""
        return cls(
            kind=SubshiftKind.FULL_SHIFT,
            alphabet=tuple(str(i) for i in range(size)),
        )

    @classmethod
    def golden_mean(cls) -> SubshiftSpec:
        """Return the fiber SFT forbidding two consecutive ones."""
        return cls(
            kind=SubshiftKind.FIBER_SFT,
            alphabet=("0", "1"),
            forbidden_words=((1, 1),),
        )


class MeasureSpec(BaseModel):
    """
    An invariant probability measure on a subshift.

    Attributes:
        kind (MeasureKind): Bernoulli or fiber Markov.
        weights (tuple[float, ...]): Per-letter probabilities (Bernoulli).
        transition (tuple): Row-stochastic matrix along each fiber (FiberMarkov).
        stationary (tuple[float, ...]): Stationary vector of the transition
            matrix; computed when not given.
    """

    model_config = ConfigDict(frozen=True)

    kind: MeasureKind
    weights: tuple[float, ...] = ()
    transition: tuple[tuple[float, ...], ...] = ()
    stationary: tuple[float, ...] = ()

    @model_validator(mode="after")
    def _check_stochastic(self) -> MeasureSpec:
        if self.kind == MeasureKind.BERNOULLI:
            _check_probability_vector(self.weights, "Bernoulli weights")
            return self
        matrix = np.asarray(self.transition, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or not matrix.size:
            raise ValueError("The transition matrix must be square and non-empty.")
        for row in self.transition:
            _check_probability_vector(row, "Transition rows")
        if not self.stationary:
            object.__setattr__(self, "stationary", _stationary_vector(matrix))
        _check_probability_vector(self.stationary, "The stationary vector")
        vector = np.asarray(self.stationary)
        if len(vector) != matrix.shape[0] or not np.allclose(
            vector @ matrix, vector, atol=1e-9
        ):
            raise ValueError("The stationary vector is not fixed by the matrix.")
        return self

    @property
    def size(self) -> int:
        """The number of letters the measure is defined on."""
        if self.kind == MeasureKind.BERNOULLI:
            return len(self.weights)
        return len(self.transition)

    @classmethod
    def bernoulli(cls, *weights: float) -> MeasureSpec:
        """Return the Bernoulli measure with the given letter weights."""
        return cls(kind=MeasureKind.BERNOULLI, weights=weights)

    @classmethod
    def uniform(cls, size: int = 2) -> MeasureSpec:
        """Return the uniform Bernoulli measure on `size` letters."""
        return cls.bernoulli(*([1.0 / size] * size))


def _check_probability_vector(vector: tuple[float, ...], name: str) -> None:
    if not vector:
        raise ValueError(f"{name} must not be empty.")
    if any(value < 0 or not math.isfinite(value) for value in vector):
        raise ValueError(f"{name} must be finite and nonnegative.")
    if abs(math.fsum(vector) - 1.0) > MEASURE_TOLERANCE:
        raise ValueError(f"{name} must sum to 1.")


def _stationary_vector(matrix: np.ndarray) -> tuple[float, ...]:
    values, vectors = np.linalg.eig(matrix.T)
    index = int(np.argmin(np.abs(values - 1.0)))
    vector = np.real(vectors[:, index])
    vector = np.abs(vector) / np.abs(vector).sum()
    return tuple(float(value) for value in vector)


class ShapeSpec(BaseModel):
    """
    One shape F_{i,j} of a covering instance together with its base set A_{i,j}.

    Attributes:
        shape (tuple): The elements of F_{i,j}.
        base (tuple): The elements of A_{i,j}.
    """

    model_config = ConfigDict(frozen=True)

    shape: tuple[Any, ...]
    base: tuple[Any, ...]

    @field_validator("shape", "base", mode="before")
    @classmethod
    def _freeze_elements(cls, value: Any) -> Any:
        return freeze(value)


class TranslateArray(BaseModel):
    """
    An instance of the covering lemma: an array of shapes with base sets
    inside an ambient finite set.

    Attributes:
        group (GroupSpec): The group the shapes live in.
        levels (tuple[tuple[ShapeSpec, ...], ...]): levels[i-1][j-1] is
            (F_{i,j}, A_{i,j}); level 1 holds the smallest shapes.
        ambient (tuple): The finite set F.
        delta (float): The parameter delta in (0, 1/100).
        C (float): The per-level tempered constant.
        D (tuple): The finite set D; empty means {identity}.
    """

    model_config = ConfigDict(frozen=True)

    group: GroupSpec
    levels: tuple[tuple[ShapeSpec, ...], ...]
    ambient: tuple[Any, ...]
    delta: float = Field(gt=0.0, lt=0.01)
    C: float = Field(default=2.0, gt=0.0)
    D: tuple[Any, ...] = ()

    @field_validator("ambient", "D", mode="before")
    @classmethod
    def _freeze_elements(cls, value: Any) -> Any:
        return freeze(value)

    @property
    def depth(self) -> int:
        """The number of levels M."""
        return len(self.levels)


class Budget(BaseModel):
    """
    Budget parameters of a run.

    Attributes:
        N_list (tuple[int, ...]): Radii of the G1 Folner balls.
        M_list (tuple[int, ...]): Depths, i.e. scales 2^-M.
        n_list (tuple[int, ...]): Radii for entropy tables.
        n_max (int): Largest radius for growth tables.
        eps_list (tuple[float, ...]): Distortion levels for rate distortion.
        delta (float): The mismatch level of the rate distortion lower bound.
        window_N (int): The N of a `ball:N=..,M=..` counting window.
        window_M (int): The M of a `ball:N=..,M=..` counting window.
    """

    model_config = ConfigDict(frozen=True)

    N_list: tuple[int, ...] = (1, 2, 4, 8, 16, 32)
    M_list: tuple[int, ...] = (1, 2, 4, 8, 16)
    n_list: tuple[int, ...] = (1, 2, 4, 8, 16, 30)
    n_max: int = Field(default=10, ge=0)
    eps_list: tuple[float, ...] = ()
    delta: float = Field(default=0.1, gt=0.0, lt=0.5)
    window_N: int = Field(default=1, ge=0)
    window_M: int = Field(default=1, ge=0)

    @field_validator("N_list", "M_list", "n_list")
    @classmethod
    def _check_increasing(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if any(item < 0 for item in value):
            raise ValueError("Budget radii must be nonnegative.")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("Budget lists must be strictly increasing.")
        return value

    @field_validator("eps_list")
    @classmethod
    def _check_eps(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if any(not 0.0 < eps < 1.0 for eps in value):
            raise ValueError("Distortion levels must lie in (0, 1).")
        return value


class RunConfig(BaseModel):
    """
    A complete run of one subcommand.

    Attributes:
        command (Command): The subcommand.
        group (GroupSpec | None): The group G = G1 x G2 (or a single group for
            `group`).
        shift (SubshiftSpec | None): The subshift.
        measure (MeasureSpec | None): The invariant measure.
        instance (TranslateArray | None): The covering lab instance.
        generate (str | None): Covering instance preset to generate instead.
        budget (Budget): Budget parameters.
        seed (int): The random seed.
        jobs (int): Worker processes for table cells.
        enumerate (bool): Include the full enumeration in growth reports.
        tempered (bool): Include the tempered witness in growth reports.
        output_format (OutputFormat): csv or json.
        output_path (str | None): Where to write; stdout when None.
    """

    model_config = ConfigDict(frozen=True)

    command: Command
    group: GroupSpec | None = None
    shift: SubshiftSpec | None = None
    measure: MeasureSpec | None = None
    instance: TranslateArray | None = None
    generate: str | None = None
    budget: Budget = Budget()
    seed: int = 0
    jobs: int = Field(default=1, ge=1)
    enumerate: bool = False
    tempered: bool = False
    output_format: OutputFormat = OutputFormat.JSON
    output_path: str | None = None
