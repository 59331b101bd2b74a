"""Enum classes for the meandim package."""

from enum import Enum


class GroupKind(Enum):
    """
    Enum class for the catalog of finitely generated groups.

    Attributes:
        INTEGER_LATTICE (str): The free abelian group of rank d.
        CYCLIC_FINITE (str): The cyclic group of order m.
        INFINITE_DIHEDRAL (str): The infinite dihedral group.
        DIRECT_PRODUCT (str): The direct product of two catalog groups.
        HEISENBERG3 (str): The discrete Heisenberg group.
    """

    INTEGER_LATTICE: str = "IntegerLattice"
    CYCLIC_FINITE: str = "CyclicFinite"
    INFINITE_DIHEDRAL: str = "InfiniteDihedral"
    DIRECT_PRODUCT: str = "DirectProduct"
    HEISENBERG3: str = "Heisenberg3"


class SubshiftKind(Enum):
    """
    Enum class for the kinds of subshifts.

    Attributes:
        FULL_SHIFT (str): Every configuration is allowed.
        FIBER_SFT (str): Forbidden words along the second factor only.
        GENERAL_SFT (str): Forbidden patterns on arbitrary finite windows.
    """

    FULL_SHIFT: str = "FullShift"
    FIBER_SFT: str = "FiberSFT"
    GENERAL_SFT: str = "GeneralSFT"


class MeasureKind(Enum):
    """
    Enum class for the kinds of invariant measures.

    Attributes:
        BERNOULLI (str): An i.i.d. product measure.
        FIBER_MARKOV (str): A stationary Markov chain along each fiber.
    """

    BERNOULLI: str = "Bernoulli"
    FIBER_MARKOV: str = "FiberMarkov"


class OutputFormat(Enum):
    """Enum class for the report output formats."""

    CSV: str = "csv"
    JSON: str = "json"


class Command(Enum):
    """Enum class for the command line subcommands."""

    GROUP: str = "group"
    COUNT: str = "count"
    ENTROPY: str = "entropy"
    MDIM: str = "mdim"
    HDIM: str = "hdim"
    RDIM: str = "rdim"
    COVERING: str = "covering"
    VERIFY_T1: str = "verify-t1"
    VERIFY_T2: str = "verify-t2"


class Resolution(Enum):
    """Sentinel returned when two patterns agree on the whole inspected box."""

    INDISTINGUISHABLE: str = "indistinguishable at cap"
