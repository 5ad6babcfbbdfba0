# web/__init__.py
# Read-only results browser over the run directories.
from flask import Flask
from .routes_api import api_bp

def create_app(runs_root=None):
    app = Flask(__name__)

    from config import LOCAL_TZ, RUNS_ROOT
    app.config["RUNS_ROOT"] = runs_root or RUNS_ROOT
    app.config["LOCAL_TZ"] = LOCAL_TZ

    app.register_blueprint(api_bp, url_prefix="/api")

    @app.route("/healthz")
    def healthz():
        return "ok", 200

    return app
