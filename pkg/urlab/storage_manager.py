"""
Storage Manager for urlab

Manages the on-disk layout of experiment bundles. Each bundle lives in
<base_dir>/<config_hash>/ with subdirectories for tables, fields, plots
and logs, plus a manifest.json at its root.
"""

import json
import os
import platform
from pathlib import Path
from typing import Any

BUNDLE_SUBDIRS = ("tables", "fields", "plots", "logs")
MANIFEST_NAME = "manifest.json"


class StorageManager:
    """Bundle directories and atomic manifest writes"""

    def __init__(self, base_dir: Path | str | None = None):
        """
        Initialize StorageManager

        Args:
            base_dir: Root for bundles. Defaults to ./urlab_runs
        """
        self.base_dir = Path(base_dir) if base_dir is not None else Path.cwd() / "urlab_runs"
        self._ensure_directory(self.base_dir)

    def _ensure_directory(self, directory: Path) -> None:
        directory.mkdir(parents=True, exist_ok=True)
        if platform.system() != "Windows":
            try:
                os.chmod(directory, 0o755)
            except OSError:
                pass

    def get_bundle_dir(self, config_hash: str, create: bool = True) -> Path:
        """Directory of one bundle, with its standard subdirectories"""
        bundle = self.base_dir / config_hash
        if create:
            for sub in ("", *BUNDLE_SUBDIRS):
                self._ensure_directory(bundle / sub)
        return bundle

    def get_logs_dir(self, config_hash: str) -> Path:
        return self.get_bundle_dir(config_hash) / "logs"

    def save_manifest(self, config_hash: str, manifest: dict[str, Any]) -> Path:
        """
        Write manifest.json atomically (temp file then rename)

        Args:
            config_hash: Bundle name
            manifest: JSON-serializable provenance record

        Returns:
            Path to the manifest
        """
        path = self.get_bundle_dir(config_hash) / MANIFEST_NAME
        temp_path = path.with_suffix(".tmp")
        try:
            with open(temp_path, "w", encoding="utf-8", newline="\n") as f:
                json.dump(manifest, f, indent=2, sort_keys=True, default=str)
                f.write("\n")
            temp_path.replace(path)
        except Exception:
            if temp_path.exists():
                temp_path.unlink()
            raise
        return path

    def load_manifest(self, bundle: Path | str) -> dict[str, Any]:
        """Read the manifest of a bundle given its directory or hash"""
        bundle = Path(bundle)
        if not bundle.is_dir():
            bundle = self.base_dir / bundle
        path = bundle / MANIFEST_NAME
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
        return data if isinstance(data, dict) else {}
