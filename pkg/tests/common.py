"""Common functions for tests."""

import numpy as np

from meandim.information import JointDistribution
from meandim.settings import get_settings


def set_cap(monkeypatch, name: str, value: int) -> None:
    """Set a settings cap through the environment and reload the settings."""
    monkeypatch.setenv(f"MEANDIM_{name}", str(value))
    get_settings.cache_clear()


def random_joint(rng: np.random.Generator, rows: int, columns: int) -> JointDistribution:
    """Draw a joint distribution with some zero entries."""
    matrix = rng.random((rows, columns)) * (rng.random((rows, columns)) > 0.2)
    if not matrix.any():
        matrix[0, 0] = 1.0
    return JointDistribution(matrix / matrix.sum())


def noisy_copy(
    p: np.ndarray, sites: int, alphabet_size: int, flip: float
) -> JointDistribution:
    """
    Return the joint law of a random word X ~ p and Y obtained by replacing
    each letter of X, independently with probability `flip`, by a uniform
    other letter.
    """
    states = alphabet_size**sites
    digits = np.asarray(
        [np.unravel_index(i, (alphabet_size,) * sites) for i in range(states)]
    )
    mismatches = (digits[:, None, :] != digits[None, :, :]).sum(axis=2)
    keep = (1.0 - flip) ** (sites - mismatches)
    change = (flip / (alphabet_size - 1)) ** mismatches
    joint = p[:, None] * keep * change
    return JointDistribution(joint / joint.sum())
