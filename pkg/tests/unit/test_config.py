"""Tests for meandim.config module."""

from pathlib import Path

from pytest import approx, mark
from pytest import raises as pytest_raises

from meandim.config import (
    dumps,
    load_group,
    load_instance,
    load_measure,
    load_shift,
    parse_config,
)
from meandim.covering import interval
from meandim.enums import Command, GroupKind, MeasureKind, OutputFormat, SubshiftKind
from meandim.exceptions import ConfigParseError
from meandim.main import load_preset, preset_names
from meandim.model import GroupSpec, SubshiftSpec


def _write(directory: Path, name: str, content: str) -> Path:
    path = directory / name
    path.write_text('<?xml version="1.0" encoding="UTF-8"?>\n' + content)
    return path


def test_load_group_product(dir_data: Path, z_dinf: GroupSpec) -> None:
    """It should read nested factors."""
    assert load_group(dir_data / "group-z-dinf.xml") == z_dinf


def test_load_group_generators(dir_data: Path) -> None:
    """It should read explicit generators as element tuples."""
    spec = load_group(dir_data / "group-dihedral.xml")
    assert spec.kind == GroupKind.INFINITE_DIHEDRAL
    assert spec.generators == ((0, 1), (1, 1))


def test_load_shift(dir_data: Path, full_shift: SubshiftSpec) -> None:
    """It should read symbols, sizes, forbidden words and patterns."""
    assert load_shift(dir_data / "shift-full.xml") == full_shift
    golden = load_shift(dir_data / "shift-golden-mean.xml")
    assert golden.kind == SubshiftKind.FIBER_SFT
    assert golden.forbidden_words == ((1, 1),)
    hard_square = load_shift(dir_data / "shift-hard-square.xml")
    assert len(hard_square.forbidden_patterns) == 2


def test_load_measure_markov(dir_data: Path) -> None:
    """It should fill in the stationary vector."""
    measure = load_measure(dir_data / "measure-markov.xml")
    assert measure.kind == MeasureKind.FIBER_MARKOV
    assert measure.stationary[0] == approx(2 / 3)
    assert load_measure(dir_data / "measure-uniform.xml").weights == (0.5, 0.5)


def test_load_instance_descriptors(dir_data: Path) -> None:
    """It should expand interval descriptors."""
    instance = load_instance(dir_data / "instance-disjoint.xml")
    assert instance.ambient == interval(0, 100)
    assert instance.levels[0][0].shape == interval(0, 10)
    assert len(instance.levels[0][0].base) == 9
    assert instance.delta == 0.005


def test_load_instance_ball(tmp_path: Path) -> None:
    """It should expand ball descriptors in enumeration order."""
    path = _write(
        tmp_path,
        "instance.xml",
        """<instance delta="0.001">
  <group kind="InfiniteDihedral"/>
  <ambient>ball:3</ambient>
  <level><shape><elements>ball:1</elements><base>[[0,0]]</base></shape></level>
</instance>""",
    )
    instance = load_instance(path)
    assert len(instance.ambient) == 7
    assert instance.levels[0][0].shape == ((0, 0), (0, 1), (1, 1))


def test_load_instance_foreign_element(tmp_path: Path) -> None:
    """It should reject elements outside the group with their line."""
    path = _write(
        tmp_path,
        "instance.xml",
        """<instance>
  <group kind="InfiniteDihedral"/>
  <ambient>[[0,2]]</ambient>
</instance>""",
    )
    with pytest_raises(ConfigParseError) as exc_info:
        load_instance(path)
    assert exc_info.value.details["line"] == 4


def test_parse_config(file_run: Path) -> None:
    """It should read the attributes and the budget."""
    config = parse_config(file_run)
    assert config.command == Command.MDIM
    assert config.seed == 3
    assert config.output_format == OutputFormat.CSV
    assert config.shift.alphabet == ("a", "b")
    assert config.budget.N_list == (1, 4, 16)
    assert config.budget.M_list == (1, 2, 4)
    assert config.budget.n_max == 20


def test_round_trip(file_run: Path, tmp_path: Path) -> None:
    """It should parse its own output back to the same config."""
    config = parse_config(file_run)
    path = tmp_path / "run.xml"
    path.write_text(dumps(config))
    assert parse_config(path) == config


@mark.parametrize("name", preset_names())
def test_presets_round_trip(name: str, tmp_path: Path) -> None:
    """It should bundle presets that parse and dump consistently."""
    config = load_preset(name)
    path = tmp_path / f"{name}.xml"
    path.write_text(dumps(config))
    assert parse_config(path) == config


def test_malformed(file_malformed: Path) -> None:
    """It should report the XML syntax error with its position."""
    with pytest_raises(ConfigParseError) as exc_info:
        parse_config(file_malformed)
    assert exc_info.value.exit_code == 2
    assert exc_info.value.details["line"] >= 4
    assert exc_info.value.details["path"] == str(file_malformed)


def test_unknown_kind(dir_data: Path) -> None:
    """It should list the allowed kinds and point at the element."""
    with pytest_raises(ConfigParseError) as exc_info:
        parse_config(dir_data / "unknown-kind.xml")
    assert "FreeGroup" in exc_info.value.message
    assert "InfiniteDihedral" in exc_info.value.message
    assert exc_info.value.details["line"] == 3


def test_wrong_root(dir_data: Path) -> None:
    """It should refuse a file with another root element."""
    with pytest_raises(ConfigParseError):
        load_shift(dir_data / "group-z-z.xml")


def test_missing_file(tmp_path: Path) -> None:
    """It should turn a missing file into a parse error."""
    with pytest_raises(ConfigParseError) as exc_info:
        parse_config(tmp_path / "missing.xml")
    assert "cannot read file" in exc_info.value.message


def test_validation_error_located(tmp_path: Path) -> None:
    """It should report model validation errors at the element line."""
    path = _write(
        tmp_path,
        "shift.xml",
        """<shift kind="FiberSFT">
  <symbol>0</symbol>
  <forbidden-word>[1]</forbidden-word>
</shift>""",
    )
    with pytest_raises(ConfigParseError) as exc_info:
        load_shift(path)
    assert "unknown symbol" in exc_info.value.message
    assert exc_info.value.details["line"] == 2


def test_invalid_json(tmp_path: Path) -> None:
    """It should locate JSON errors inside an element."""
    path = _write(
        tmp_path,
        "measure.xml",
        """<measure kind="Bernoulli">
  <weights>[0.5, 0.5</weights>
</measure>""",
    )
    with pytest_raises(ConfigParseError) as exc_info:
        load_measure(path)
    assert exc_info.value.details["line"] == 3


def test_invalid_budget(tmp_path: Path) -> None:
    """It should reject decreasing budget lists."""
    path = _write(
        tmp_path,
        "run.xml",
        """<run command="mdim">
  <budget><N_list>[4, 2]</N_list></budget>
</run>""",
    )
    with pytest_raises(ConfigParseError) as exc_info:
        parse_config(path)
    assert "increasing" in exc_info.value.message


def test_invalid_boolean(tmp_path: Path) -> None:
    """It should accept only true and false."""
    path = _write(tmp_path, "run.xml", '<run command="group" enumerate="yes"/>')
    with pytest_raises(ConfigParseError):
        parse_config(path)
