"""Run-directory plumbing: atomic artifact writes and the run manifest."""

from __future__ import annotations

import contextlib
import hashlib
import json
import os
import tempfile
from pathlib import Path

from sctsa import __version__

MANIFEST = "manifest.json"


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@contextlib.contextmanager
def atomic_path(path: str | Path):
    """Yield a temporary sibling path; rename it onto ``path`` on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def write_text(path: str | Path, text: str) -> None:
    with atomic_path(path) as tmp:
        tmp.write_text(text, encoding="utf-8")


def write_json(path: str | Path, doc) -> None:
    write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_manifest(run_dir: Path) -> dict:
    p = run_dir / MANIFEST
    if p.exists():
        return json.loads(p.read_text(encoding="utf-8"))
    return {"schema": "sctsa.manifest/1", "tool_version": __version__, "inputs": {}, "stages": {}}


def record_stage(
    run_dir: Path,
    stage: str,
    outputs: list[Path],
    config: dict,
    inputs: dict[str, str] | None = None,
    seconds: float | None = None,
) -> dict:
    """Register a finished stage and the digests of what it wrote."""
    manifest = load_manifest(run_dir)
    manifest["tool_version"] = __version__
    if inputs:
        manifest["inputs"].update(inputs)
    entry = {
        "config": config,
        "outputs": {p.relative_to(run_dir).as_posix(): sha256_file(p) for p in sorted(outputs)},
    }
    if seconds is not None:
        entry["wall_clock_seconds"] = round(seconds, 3)
    manifest["stages"][stage] = entry
    write_json(run_dir / MANIFEST, manifest)
    return manifest
