"""Integration tests for the meandim command line."""

import csv
import json
from pathlib import Path

from pytest import CaptureFixture, MonkeyPatch, approx

from meandim import __version__
from meandim.main import main, preset_names

from ..common import set_cap


def _run(tmp_path: Path, name: str, *argv: str) -> dict:
    output = tmp_path / name
    assert main([*argv, "--out", "json", "-o", str(output)]) == 0
    return json.loads(output.read_text())


def _without_clock(document: dict) -> dict:
    document["metadata"].pop("timestamp")
    return document


def test_version(capsys: CaptureFixture[str]) -> None:
    """It should print the tool version as JSON."""
    assert main(["--version"]) == 0
    assert json.loads(capsys.readouterr().out)["version"] == __version__


def test_no_command(capsys: CaptureFixture[str]) -> None:
    """It should print the help and exit with 2."""
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_presets(capsys: CaptureFixture[str]) -> None:
    """It should list the bundled presets."""
    assert main(["presets"]) == 0
    assert capsys.readouterr().out.split() == preset_names()


def test_group_command(dir_data: Path, tmp_path: Path) -> None:
    """It should tabulate the growth of D_inf."""
    document = _run(
        tmp_path,
        "group.json",
        "group",
        "--spec",
        str(dir_data / "group-dihedral.xml"),
        "--n-max",
        "4",
        "--enumerate",
    )
    values = [row["value"] for row in document["tables"][0]["rows"]]
    assert values == [1.0, 3.0, 5.0, 7.0, 9.0]
    assert document["metadata"]["command"] == "group"


def test_count_command(dir_data: Path, tmp_path: Path) -> None:
    """It should count golden mean patterns on a window."""
    document = _run(
        tmp_path,
        "count.json",
        "count",
        "--group",
        str(dir_data / "group-z-z.xml"),
        "--shift",
        str(dir_data / "shift-golden-mean.xml"),
        "--window",
        "ball:N=1,M=1",
    )
    assert document["diagnostics"]["count"] == str(5**5)


def test_count_bad_window(dir_data: Path, capsys: CaptureFixture[str]) -> None:
    """It should reject a window it cannot parse."""
    code = main(
        [
            "count",
            "--group",
            str(dir_data / "group-z-z.xml"),
            "--shift",
            str(dir_data / "shift-golden-mean.xml"),
            "--window",
            "box:3",
        ]
    )
    assert code == 2
    assert "ball:N=..,M=.." in json.loads(capsys.readouterr().err)["error"]["message"]


def test_run_config_csv(file_run: Path, tmp_path: Path) -> None:
    """It should honor the format of the config file."""
    output = tmp_path / "run.csv"
    assert main(["run", "--config", str(file_run), "-o", str(output)]) == 0
    with output.open() as file:
        rows = list(csv.DictReader(file))
    assert {row["estimator"] for row in rows} == {"mdim_M", "s_rate"}
    assert all(row["target"] for row in rows if row["estimator"] == "mdim_M")


def test_run_deterministic(file_run: Path, tmp_path: Path) -> None:
    """It should reproduce the report up to the timestamp."""
    first = _run(tmp_path, "first.json", "run", "--config", str(file_run))
    second = _run(tmp_path, "second.json", "run", "--config", str(file_run))
    assert _without_clock(first) == _without_clock(second)
    assert first["metadata"]["seed"] == 3


def test_run_jobs_independent(file_run: Path, tmp_path: Path) -> None:
    """It should compute the same tables with several workers."""
    serial = _run(tmp_path, "serial.json", "run", "--config", str(file_run))
    parallel = _run(
        tmp_path, "parallel.json", "run", "--config", str(file_run), "--jobs", "2"
    )
    assert serial["tables"] == parallel["tables"]
    assert serial["verdicts"] == parallel["verdicts"]


def test_run_preset(tmp_path: Path) -> None:
    """It should run a bundled covering preset."""
    document = _run(tmp_path, "covering.json", "run", "--preset", "covering-disjoint")
    verdicts = {verdict["name"]: verdict for verdict in document["verdicts"]}
    assert verdicts["coverage"]["passed"]
    assert verdicts["eps-disjoint"]["passed"]


def test_run_preset_rdim(tmp_path: Path) -> None:
    """It should keep rd_lower below rd_upper at every depth."""
    document = _run(tmp_path, "rdim.json", "run", "--preset", "rdim-uniform")
    tables = {table["estimator"]: table for table in document["tables"]}
    assert tables["rd_upper_per_log"]["target"] == approx(2.0)
    assert len(tables["rd_lower"]["rows"]) == len(tables["rd_upper"]["rows"])


def test_unknown_preset(capsys: CaptureFixture[str]) -> None:
    """It should exit with 2 and list the presets."""
    assert main(["run", "--preset", "spiral"]) == 2
    assert "covering-disjoint" in json.loads(capsys.readouterr().err)["error"]["message"]


def test_malformed_config(
    file_malformed: Path, tmp_path: Path, capsys: CaptureFixture[str]
) -> None:
    """It should exit with 2 and leave no output file."""
    output = tmp_path / "out.json"
    assert main(["run", "--config", str(file_malformed), "-o", str(output)]) == 2
    error = json.loads(capsys.readouterr().err)
    assert error["error"]["path"] == str(file_malformed)
    assert not output.exists()
    assert not list(tmp_path.iterdir())


def test_incompatible_config(
    dir_data: Path, tmp_path: Path, capsys: CaptureFixture[str]
) -> None:
    """It should exit with 3 for a fiber SFT over D_inf."""
    output = tmp_path / "out.json"
    code = main(["run", "--config", str(dir_data / "incompatible.xml"), "-o", str(output)])
    assert code == 3
    assert "FiberSFT" in capsys.readouterr().err
    assert not output.exists()


def test_resource_cap(
    tmp_path: Path, caps: MonkeyPatch, capsys: CaptureFixture[str]
) -> None:
    """It should exit with 4 when a ball exceeds the element cap."""
    set_cap(caps, "MAX_BALL_ELEMENTS", 100)
    spec = tmp_path / "group.xml"
    spec.write_text('<group kind="IntegerLattice" rank="6"/>')
    output = tmp_path / "out.json"
    assert main(["group", "--spec", str(spec), "--n-max", "10", "-o", str(output)]) == 4
    assert json.loads(capsys.readouterr().err)["error"]["cap"] == "MAX_BALL_ELEMENTS"
    assert not output.exists()
