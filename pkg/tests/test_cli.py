import filecmp
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from specdecay import cli
from specdecay.errors import ConfigError

COMMANDS = sorted(cli.SCHEMAS)


def write(tmp_path, text):
    p = tmp_path / "cfg.txt"
    p.write_text(text)
    return p


@pytest.mark.parametrize("text,line,col", [
    ("K = 12\nbogus = 3\n", 2, 1),
    ("K = 12\n  M 3\n", 2, 3),
    ("K = twelve\n", 1, 5),
    ("K = 1\nK = 2\n", 2, 1),
    ("# comment\nM =\n", 2, 4),
])
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(ConfigError) as info:
        cli.parse_config(text, "parseval")
    assert (info.value.line, info.value.column) == (line, col)
    assert f"line {line}, column {col}" in str(info.value)


def test_parse_error_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "K = 12\nnope = 1\n")
    assert cli.main(["parseval", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "line 2, column 1" in capsys.readouterr().err


def test_missing_config_file_exit_code(tmp_path):
    assert cli.main(["parseval", "--config", str(tmp_path / "absent.txt")]) == 2


def test_failing_tolerance_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "oracle_tol = 1e-300\n")
    assert cli.main(["kernel-bounds", "--config", str(cfg), "--out", str(tmp_path / "o"), "--quiet"]) == 1
    assert "invariant violated" in capsys.readouterr().err


def test_values_are_typed():
    cfg = cli.parse_config("K = 7\ntol = 1e-3 # inline\n", "parseval")
    assert cfg["K"] == 7 and isinstance(cfg["K"], int)
    assert cfg["tol"] == 1e-3


def test_threads_env(monkeypatch, tmp_path):
    monkeypatch.setenv(cli.THREADS_ENV, "0")
    assert cli.main(["spaces-verify", "--out", str(tmp_path), "--quiet"]) == 2
    monkeypatch.setenv(cli.THREADS_ENV, "x")
    assert cli.main(["spaces-verify", "--out", str(tmp_path), "--quiet"]) == 2
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    assert cli._threads() == 3


def test_bad_seed(tmp_path):
    assert cli.main(["spaces-verify", "--seed", "-1", "--out", str(tmp_path)]) == 2


def test_dump_config_roundtrip(capsys):
    assert cli.main(["moments", "--dump-config"]) == 0
    text = capsys.readouterr().out
    assert cli.parse_config(text, "moments").canonical() == text


@settings(max_examples=60, deadline=None)
@given(command=st.sampled_from(COMMANDS), data=st.data())
def test_canonical_dump_idempotent(command, data):
    schema = cli.SCHEMAS[command]
    overrides = {}
    for key, default in schema.items():
        if not data.draw(st.booleans()):
            continue
        if isinstance(default, bool):
            overrides[key] = data.draw(st.booleans())
        elif isinstance(default, int):
            overrides[key] = data.draw(st.integers(0, 10 ** 6))
        elif isinstance(default, float):
            overrides[key] = data.draw(st.floats(allow_nan=False, allow_infinity=False))
    text = "".join(f"{k} = {cli._fmt(v)}\n" for k, v in overrides.items())
    once = cli.parse_config(text, command).canonical()
    assert cli.parse_config(once, command).canonical() == once
    assert all(cli.parse_config(once, command)[k] == v for k, v in overrides.items())


def test_help_lists_csv_columns(capsys):
    with pytest.raises(SystemExit):
        cli.main(["ingham-build", "--help"])
    assert "decay.csv" in capsys.readouterr().out


def run_twice(tmp_path, command, seed=0):
    dirs = [tmp_path / "a", tmp_path / "b"]
    codes = [cli.main([command, "--out", str(d), "--seed", str(seed), "--quiet"]) for d in dirs]
    return codes, dirs


def identical_trees(a: Path, b: Path) -> bool:
    files = sorted(p.name for p in a.iterdir())
    if files != sorted(p.name for p in b.iterdir()):
        return False
    _, mismatch, errors = filecmp.cmpfiles(a, b, files, shallow=False)
    return not mismatch and not errors


@pytest.mark.parametrize("command", ["moments", "spaces-verify"])
def test_outputs_byte_identical(tmp_path, command):
    codes, (a, b) = run_twice(tmp_path, command, seed=11)
    assert codes == [0, 0]
    assert identical_trees(a, b)
    assert (a / "config.txt").read_text() == cli.parse_config("", command).canonical()


def test_seed_changes_random_sweep(tmp_path):
    for name, seed in (("a", 1), ("b", 2)):
        assert cli.main(["kernel-bounds", "--out", str(tmp_path / name), "--seed", str(seed), "--quiet"]) == 0
    assert (tmp_path / "a" / "oracle.csv").read_bytes() != (tmp_path / "b" / "oracle.csv").read_bytes()
