"""Fixtures for meandim tests."""

from pathlib import Path
from typing import Generator

from hypothesis import settings as hypothesis_settings
from pytest import MonkeyPatch, fixture

from meandim.model import Budget, GroupSpec, MeasureSpec, RunConfig, SubshiftSpec
from meandim.enums import Command
from meandim.settings import get_settings

hypothesis_settings.register_profile("meandim", derandomize=True, deadline=None)
hypothesis_settings.load_profile("meandim")


@fixture(name="dir_data")
def _dir_data() -> Path:
    return Path(__file__).parent / "data"


@fixture(name="file_run")
def _file_run(dir_data: Path) -> Path:
    return dir_data / "run-mdim.xml"


@fixture(name="file_malformed")
def _file_malformed(dir_data: Path) -> Path:
    return dir_data / "malformed.xml"


@fixture(name="integers")
def _integers() -> GroupSpec:
    return GroupSpec.integers()


@fixture(name="dihedral")
def _dihedral() -> GroupSpec:
    return GroupSpec.dihedral()


@fixture(name="z_dinf")
def _z_dinf(integers: GroupSpec, dihedral: GroupSpec) -> GroupSpec:
    return GroupSpec.product(integers, dihedral)


@fixture(name="z_z")
def _z_z(integers: GroupSpec) -> GroupSpec:
    return GroupSpec.product(integers, integers)


@fixture(name="z_z2")
def _z_z2(integers: GroupSpec) -> GroupSpec:
    return GroupSpec.product(integers, GroupSpec.cyclic(2))


@fixture(name="full_shift")
def _full_shift() -> SubshiftSpec:
    return SubshiftSpec.full(2)


@fixture(name="golden_mean")
def _golden_mean() -> SubshiftSpec:
    return SubshiftSpec.golden_mean()


@fixture(name="uniform")
def _uniform() -> MeasureSpec:
    return MeasureSpec.uniform(2)


@fixture(name="budget")
def _budget() -> Budget:
    return Budget(N_list=(1, 4, 16), M_list=(1, 2, 4, 8), n_list=(1, 2, 4), n_max=20)


@fixture(name="run_config")
def _run_config(
    z_dinf: GroupSpec, full_shift: SubshiftSpec, budget: Budget
) -> RunConfig:
    return RunConfig(
        command=Command.MDIM, group=z_dinf, shift=full_shift, budget=budget
    )


@fixture(name="caps")
def _caps(monkeypatch: MonkeyPatch) -> Generator[MonkeyPatch, None, None]:
    """Reload the settings after the test sets `MEANDIM_*` variables."""
    get_settings.cache_clear()
    yield monkeypatch
    monkeypatch.undo()
    get_settings.cache_clear()
