# web/runs.py
# Shared helpers for run listing, time formatting and safe artifact lookup.

import os
from datetime import datetime, timezone
from typing import Optional, Dict, Any, List

# --- Config / timezone ---
try:
    from config import LOCAL_TZ as LOCAL_TZ_NAME
except Exception:
    LOCAL_TZ_NAME = "UTC"

try:
    from zoneinfo import ZoneInfo
    _ZONE = ZoneInfo(LOCAL_TZ_NAME)
except Exception:
    _ZONE = None  # fall back to UTC

from layout import ERROR_RECORD, F_MATRICES, F_SERIES, family_dir, list_runs, read_manifest

DOWNLOADABLE = (F_SERIES, F_MATRICES)


# ----------------- Time formatting -----------------

def fmt_ts_local_from_iso(iso: Optional[str]) -> str:
    """ISO-8601 UTC stamp -> 'YYYY-MM-DD HH:MM:SS' in the local zone; '' when unparsable."""
    if not iso:
        return ""
    try:
        dt = datetime.fromisoformat(iso)
    except ValueError:
        return ""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(_ZONE or timezone.utc).strftime("%Y-%m-%d %H:%M:%S")


# ----------------- Runs -----------------

def run_summary(runs_root: str, name: str) -> Optional[Dict[str, Any]]:
    man = read_manifest(os.path.join(runs_root, name))
    if man is None:
        return None
    return {
        "run": name,
        "command": man.get("command", ""),
        "toolkit_version": man.get("toolkit_version", ""),
        "created": man.get("created", ""),
        "created_local": fmt_ts_local_from_iso(man.get("created")),
        "summary": man.get("summary", {}),
        "error": os.path.exists(os.path.join(runs_root, name, ERROR_RECORD)),
    }


def list_run_summaries(runs_root: str) -> List[Dict[str, Any]]:
    """Newest first."""
    rows = [s for s in (run_summary(runs_root, n) for n in list_runs(runs_root)) if s]
    rows.sort(key=lambda r: r["created"], reverse=True)
    return rows


def is_run(runs_root: str, name: str) -> bool:
    return name in list_runs(runs_root)


def artifact_dir(runs_root: str, name: str, family: str) -> Optional[str]:
    """Directory of a downloadable family inside a known run, else None."""
    if family not in DOWNLOADABLE or not is_run(runs_root, name):
        return None
    return family_dir(os.path.join(runs_root, name), family)


def list_artifacts(runs_root: str, name: str, family: str) -> List[str]:
    d = artifact_dir(runs_root, name, family)
    if d is None or not os.path.isdir(d):
        return []
    return sorted(e.name for e in os.scandir(d) if e.is_file() and e.name.endswith(".csv"))
