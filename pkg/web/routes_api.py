# API routes: /api/runs, /api/runs/<run>/..., /api/storage

import os

from flask import Blueprint, abort, current_app, jsonify, make_response

from layout import F_MATRICES, F_SERIES, read_manifest
from .runs import artifact_dir, is_run, list_artifacts, list_run_summaries
from .storage_status import get_storage_status

api_bp = Blueprint("api", __name__)

# ---------- helpers ----------

def _root() -> str:
    return current_app.config["RUNS_ROOT"]

def _safe_name(s: str) -> bool:
    return bool(s) and s not in (".", "..") and "/" not in s and "\\" not in s

def _csv_response(path: str, filename: str):
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError:
        abort(404)
    resp = make_response(text)
    resp.headers["Content-Type"] = "text/csv"
    resp.headers["Content-Disposition"] = f"attachment; filename={filename}"
    return resp

def _download(run: str, family: str, name: str):
    if not (_safe_name(run) and _safe_name(name)) or not name.endswith(".csv"):
        abort(404)
    d = artifact_dir(_root(), run, family)
    if d is None:
        abort(404)
    path = os.path.join(d, name)
    if not os.path.isfile(path):
        abort(404)
    return _csv_response(path, name)

# ---------- routes ----------

@api_bp.route("/runs")
def runs():
    return jsonify(list_run_summaries(_root()))

@api_bp.route("/runs/<run>/manifest")
def manifest(run):
    if not _safe_name(run) or not is_run(_root(), run):
        abort(404)
    man = read_manifest(os.path.join(_root(), run))
    if man is None:
        abort(404)
    return jsonify(man)

@api_bp.route("/runs/<run>/series")
def series_index(run):
    if not _safe_name(run) or not is_run(_root(), run):
        abort(404)
    return jsonify(list_artifacts(_root(), run, F_SERIES))

@api_bp.route("/runs/<run>/matrices")
def matrices_index(run):
    if not _safe_name(run) or not is_run(_root(), run):
        abort(404)
    return jsonify(list_artifacts(_root(), run, F_MATRICES))

@api_bp.route("/runs/<run>/series/<name>")
def series_csv(run, name):
    return _download(run, F_SERIES, name)

@api_bp.route("/runs/<run>/matrices/<name>")
def matrices_csv(run, name):
    return _download(run, F_MATRICES, name)

@api_bp.route("/storage")
def storage():
    return jsonify(get_storage_status(_root()))
