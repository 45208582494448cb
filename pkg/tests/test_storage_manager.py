"""
Unit tests for StorageManager

Bundle layout and atomic manifests.
"""

import json
from unittest.mock import patch

import pytest

from urlab.storage_manager import BUNDLE_SUBDIRS, MANIFEST_NAME, StorageManager


@pytest.mark.unit
class TestStorageManager:
    """Test cases for StorageManager"""

    def test_base_dir_created(self, temp_dir):
        storage = StorageManager(base_dir=temp_dir / "runs")
        assert storage.base_dir.is_dir()

    def test_default_base_dir(self, temp_dir, monkeypatch):
        monkeypatch.chdir(temp_dir)
        storage = StorageManager()
        assert storage.base_dir == temp_dir / "urlab_runs"

    def test_bundle_structure(self, temp_dir):
        """Test that all bundle subdirectories are created"""
        storage = StorageManager(base_dir=temp_dir)
        bundle = storage.get_bundle_dir("abc123")

        assert bundle == temp_dir / "abc123"
        for sub in BUNDLE_SUBDIRS:
            assert (bundle / sub).is_dir()
        assert storage.get_logs_dir("abc123") == bundle / "logs"

    def test_bundle_dir_without_create(self, temp_dir):
        storage = StorageManager(base_dir=temp_dir)
        assert not storage.get_bundle_dir("abc123", create=False).exists()

    @patch("platform.system")
    def test_windows_skips_chmod(self, mock_system, temp_dir):
        mock_system.return_value = "Windows"
        with patch("os.chmod") as mock_chmod:
            StorageManager(base_dir=temp_dir / "win").get_bundle_dir("abc123")
        mock_chmod.assert_not_called()

    def test_manifest_round_trip(self, temp_dir):
        storage = StorageManager(base_dir=temp_dir)
        path = storage.save_manifest("abc123", {"verb": "solve", "constants": {"C_sigma": 1.5}})

        assert path.name == MANIFEST_NAME
        assert not path.with_suffix(".tmp").exists()
        assert storage.load_manifest("abc123") == {"verb": "solve", "constants": {"C_sigma": 1.5}}
        assert storage.load_manifest(temp_dir / "abc123")["verb"] == "solve"

    def test_manifest_is_sorted_and_newline_terminated(self, temp_dir):
        storage = StorageManager(base_dir=temp_dir)
        path = storage.save_manifest("abc123", {"b": 1, "a": 2})
        text = path.read_text(encoding="utf-8")

        assert text.endswith("\n")
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": 2, "b": 1}

    def test_failed_manifest_write_leaves_no_temp(self, temp_dir):
        storage = StorageManager(base_dir=temp_dir)
        with pytest.raises(TypeError):
            storage.save_manifest("abc123", {object(): 1})
        assert not (temp_dir / "abc123" / "manifest.tmp").exists()
        assert not (temp_dir / "abc123" / MANIFEST_NAME).exists()

    def test_missing_manifest(self, temp_dir):
        storage = StorageManager(base_dir=temp_dir)
        with pytest.raises(FileNotFoundError):
            storage.load_manifest("absent")
