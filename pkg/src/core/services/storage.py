from __future__ import annotations
import json
from pathlib import Path
from typing import Any, Dict, Optional

from src.core.settings import get_settings


def reports_dir() -> Path:
    return Path(get_settings().reports_dir)


def ensure_dirs():
    """
    Make dirs if needed.
    """
    reports_dir().mkdir(parents=True, exist_ok=True)


def report_path(out: str) -> Path:
    """
    Output path for --out; a bare file name goes under the reports dir.
    """
    p = Path(out)
    if p.parent == Path("."):
        ensure_dirs()
        return reports_dir() / p.name
    return p


def dumps(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def write_json(payload: Dict[str, Any], out: Optional[str]) -> Optional[Path]:
    """
    Write a JSON artifact; no-op without a destination.
    """
    if not out:
        return None
    p = report_path(out)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(dumps(payload), encoding="utf-8")
    return p


def read_json(path: str) -> Dict[str, Any]:
    """
    Read a JSON artifact.

    Raises:
        FileNotFoundError, ValueError
    """
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such file: {path}")
    return json.loads(p.read_text(encoding="utf-8") or "{}")
