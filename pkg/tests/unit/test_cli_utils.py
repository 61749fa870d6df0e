"""
Unit tests for CLI utilities and run manifests.
"""

import pytest

from graphscribe import __version__
from graphscribe.cli.manifest import MANIFEST_FILE, RunManifest, git_blob_sha1
from graphscribe.cli.utils import (
    EXIT_DATA,
    EXIT_FAILURE,
    EXIT_NUMERIC,
    EXIT_USAGE,
    check_beam,
    exit_code_for,
    format_duration,
    handle_errors,
    new_run_dir,
    parse_choice,
    parse_seeds,
    setup_logging,
)
from graphscribe.errors import (
    CheckpointError,
    ConfigError,
    DataError,
    GraphscribeError,
    NumericError,
    OversizeGraphError,
    UnknownTaggerError,
    VocabularyError,
)
from graphscribe.models.config import OrderMode


class TestFormatDuration:

    @pytest.mark.unit
    def test_format_milliseconds(self):
        assert format_duration(0.5) == "500ms"

    @pytest.mark.unit
    def test_format_seconds(self):
        assert format_duration(5.5) == "5.5s"

    @pytest.mark.unit
    def test_format_minutes(self):
        assert format_duration(125) == "2m 5s"


class TestExitCodes:

    @pytest.mark.unit
    @pytest.mark.parametrize("exc,code", [
        (ConfigError("x"), EXIT_USAGE),
        (UnknownTaggerError("x"), EXIT_USAGE),
        (DataError("x"), EXIT_DATA),
        (OversizeGraphError("g", 9, 8), EXIT_DATA),
        (VocabularyError("x"), EXIT_DATA),
        (CheckpointError("x"), EXIT_DATA),
        (NumericError("x"), EXIT_NUMERIC),
        (GraphscribeError("x"), EXIT_FAILURE),
    ])
    def test_mapping(self, exc, code):
        assert exit_code_for(exc) == code

    @pytest.mark.unit
    def test_handle_errors_exits(self):
        with pytest.raises(SystemExit) as excinfo:
            with handle_errors():
                raise CheckpointError("broken")
        assert excinfo.value.code == EXIT_DATA

    @pytest.mark.unit
    def test_other_exceptions_propagate(self):
        with pytest.raises(KeyError):
            with handle_errors():
                raise KeyError("x")


class TestParsing:

    @pytest.mark.unit
    def test_seeds(self):
        assert parse_seeds("13,14, 15") == [13, 14, 15]
        with pytest.raises(ConfigError):
            parse_seeds("13,x")
        with pytest.raises(ConfigError):
            parse_seeds(" , ")

    @pytest.mark.unit
    def test_choice(self):
        assert parse_choice(OrderMode, "gold", "--order-mode") is OrderMode.GOLD
        with pytest.raises(ConfigError, match="learned"):
            parse_choice(OrderMode, "sideways", "--order-mode")

    @pytest.mark.unit
    def test_beam(self):
        assert check_beam(3) == 3
        with pytest.raises(ConfigError):
            check_beam(0)

    @pytest.mark.unit
    def test_log_level(self):
        setup_logging("warning")
        with pytest.raises(ConfigError):
            setup_logging("chatty")


class TestRunDirectories:

    @pytest.mark.unit
    def test_explicit_directory(self, tmp_path):
        run_dir = new_run_dir("train", tmp_path / "run")
        assert run_dir.is_dir()

    @pytest.mark.unit
    def test_under_run_root(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GRAPHSCRIBE_RUN_ROOT", str(tmp_path))
        run_dir = new_run_dir("evaluate")
        assert run_dir.parent == tmp_path
        assert run_dir.name.startswith("evaluate-")

    @pytest.mark.unit
    def test_never_reuses_a_run(self, tmp_path):
        run_dir = new_run_dir("train", tmp_path / "run")
        (run_dir / MANIFEST_FILE).write_text("{}")
        with pytest.raises(ConfigError):
            new_run_dir("train", run_dir)


class TestManifest:

    @pytest.mark.unit
    def test_git_blob_hash(self, tmp_path):
        path = tmp_path / "hello.txt"
        path.write_bytes(b"hello\n")
        assert git_blob_sha1(path) == "ce013625030ba8dba906f756967f9e9ca394464a"

    @pytest.mark.unit
    def test_write_read(self, tmp_path, awh_jsonl):
        manifest = RunManifest(command="preprocess", seed=13, arguments={"n_slots": 8})
        manifest.add_input("data", awh_jsonl)
        manifest.add_input("missing", tmp_path / "absent.jsonl")
        manifest.add_output("sidecar", tmp_path / "awh.sup.jsonl")
        manifest.finish()
        manifest.write(tmp_path / "run")

        loaded = RunManifest.read(tmp_path / "run")
        assert loaded.version == __version__
        assert loaded.input_hashes["data"] == git_blob_sha1(awh_jsonl)
        assert "missing" not in loaded.input_hashes
        assert loaded.outputs["sidecar"].endswith("awh.sup.jsonl")
        assert loaded.finished_at is not None
