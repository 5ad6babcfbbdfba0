# web/storage_status.py
import os
from typing import Dict, Any, Tuple

from layout import FAMILIES, list_runs

MB = 1024 * 1024

def _sum_files_under(path: str) -> Tuple[int, int]:
    total, count = 0, 0
    if not os.path.isdir(path):
        return 0, 0
    for root, _dirs, files in os.walk(path):
        for fn in files:
            try:
                total += os.path.getsize(os.path.join(root, fn))
                count += 1
            except OSError:
                pass
    return total, count

def get_storage_status(runs_root: str) -> Dict[str, Any]:
    """
    Bytes and file counts per artifact family, summed over every run:
      RUNS_ROOT/<run>/{fields,series,matrices}/
    Top-level files of a run (manifest.json, profiles, error.json) count as "other".
    """
    families: Dict[str, Dict[str, Any]] = {f: {"bytes": 0, "files": 0} for f in FAMILIES}
    families["other"] = {"bytes": 0, "files": 0}
    runs = list_runs(runs_root)

    for run in runs:
        base = os.path.join(runs_root, run)
        for fam in FAMILIES:
            b, n = _sum_files_under(os.path.join(base, fam))
            families[fam]["bytes"] += b
            families[fam]["files"] += n
        for e in os.scandir(base):
            if e.is_file():
                try:
                    families["other"]["bytes"] += e.stat().st_size
                    families["other"]["files"] += 1
                except OSError:
                    pass

    def mb(n: int) -> float: return round(n / MB, 3)

    total = sum(v["bytes"] for v in families.values())
    return {
        "root": runs_root,
        "runs": len(runs),
        "total_bytes": total,
        "total_mb": mb(total),
        "files_total": sum(v["files"] for v in families.values()),
        "families": {k: {"bytes": v["bytes"], "mb": mb(v["bytes"]), "files": v["files"]}
                     for k, v in families.items()},
    }
