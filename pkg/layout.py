# layout.py
# Run directory layout: <out>/{manifest.json, fields/, series/, matrices/},
# CSV/JSON writers and run listing for the results browser.
import os, json
from typing import List, Dict, Optional, Any, Sequence, Iterable
from datetime import datetime, timezone

from config import LAYOUT
from errors import ExportError

# Families of artifacts inside one run directory
F_FIELDS   = LAYOUT["fields"]     # bath snapshots (binary / pgm)
F_SERIES   = LAYOUT["series"]     # time series and sweep tables
F_MATRICES = LAYOUT["matrices"]   # collective J, gamma
FAMILIES = (F_FIELDS, F_SERIES, F_MATRICES)

MANIFEST = "manifest.json"
ERROR_RECORD = "error.json"
FLOAT_FMT = "%.17g"

def join(*a): return os.path.join(*a)

def ensure_layout(out_dir: str):
    try:
        for fam in FAMILIES:
            os.makedirs(join(out_dir, fam), exist_ok=True)
    except OSError as e:
        raise ExportError(f"Cannot create output layout under {out_dir}: {e}") from e

def family_dir(out_dir: str, fam: str) -> str:
    return join(out_dir, fam)

def manifest_path(out_dir: str) -> str:
    return join(out_dir, MANIFEST)

def _fmt(v) -> str:
    if isinstance(v, float): return FLOAT_FMT % v
    return str(v)

def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]],
              meta: Optional[Dict[str, Any]] = None):
    """Comma-separated, optional '# key=value' lines, header row, floats at 17 digits."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for k, v in (meta or {}).items():
                f.write(f"# {k}={_fmt(v)}\n")
            f.write(",".join(header) + "\n")
            for r in rows:
                f.write(",".join(_fmt(float(x)) if not isinstance(x, str) else x for x in r) + "\n")
    except OSError as e:
        raise ExportError(f"Cannot write {path}: {e}") from e

def read_csv(path: str):
    """(meta, header, rows as float lists) of a file written by write_csv."""
    meta, header, rows = {}, None, []
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if line.startswith("# "):
                    k, _, v = line[2:].partition("=")
                    meta[k] = v
                elif header is None:
                    header = line.split(",")
                elif line:
                    rows.append([float(x) for x in line.split(",")])
    except OSError as e:
        raise ExportError(f"Cannot read {path}: {e}") from e
    return meta, header or [], rows

def write_json(path: str, doc: Dict[str, Any]):
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=1, sort_keys=True)
    except OSError as e:
        raise ExportError(f"Cannot write {path}: {e}") from e

def write_manifest(out_dir: str, command: str, config: Dict[str, Any], version: str,
                   artifacts: Dict[str, Any], summary: Optional[Dict[str, Any]] = None):
    """Full resolved config + toolkit version; 'created' is UTC."""
    write_json(manifest_path(out_dir), {
        "command": command,
        "toolkit_version": version,
        "created": datetime.now(timezone.utc).replace(microsecond=0).isoformat(),
        "config": config,
        "artifacts": artifacts,
        "summary": summary or {},
    })

def read_manifest(out_dir: str) -> Optional[Dict[str, Any]]:
    p = manifest_path(out_dir)
    if not os.path.exists(p): return None
    try:
        with open(p, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, ValueError):
        return None

def write_error_record(out_dir: Optional[str], record: Dict[str, Any]) -> Optional[str]:
    """Drop error.json into an existing output directory; never raises."""
    if not out_dir or not os.path.isdir(out_dir): return None
    p = join(out_dir, ERROR_RECORD)
    try:
        with open(p, "w", encoding="utf-8") as f:
            json.dump(record, f, indent=1, sort_keys=True)
    except OSError:
        return None
    return p

def list_runs(runs_root: str) -> List[str]:
    """Run directories (those holding a manifest) directly under runs_root, sorted."""
    if not os.path.isdir(runs_root): return []
    return sorted(e.name for e in os.scandir(runs_root)
                  if e.is_dir() and os.path.exists(manifest_path(e.path)))

