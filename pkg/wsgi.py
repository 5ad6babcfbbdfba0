# wsgi.py
# gunicorn -w 2 -b 127.0.0.1:8080 wsgi:app
import os
from web import create_app
app = create_app(os.environ.get("RUNS_ROOT"))
