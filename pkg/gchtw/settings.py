import json
from multiprocessing import cpu_count
import os

# Path to here is something like
# .../<repo>/gchtw/settings.py
PROJECT_DIR = os.path.abspath(os.path.dirname(__file__))
BASE_DIR = os.path.dirname(PROJECT_DIR)

try:
    with open(os.path.join(os.path.expanduser("~"), ".gchtw")) as f:
        config = json.load(f)
except FileNotFoundError:
    # No config file, so take everything from GCHTW_* environment
    # variables instead.
    config = {
        key: os.environ[f"GCHTW_{key}"]
        for key in [
            "THREADS",
            "DEFAULT_M",
            "DEFAULT_TOL",
            "LOG_LEVEL",
            "OUTPUT_DIRECTORY",
            "SECRET_KEY",
        ]
        if f"GCHTW_{key}" in os.environ
    }
    config["DEBUG"] = bool(os.environ.get("DEBUG"))

# The environment always has the last word on the size of the worker pool
if "GCHTW_THREADS" in os.environ:
    config["THREADS"] = os.environ["GCHTW_THREADS"]

# Number of worker processes a sweep may use.
GCHTW_THREADS = max(1, int(config.get("THREADS", cpu_count())))

# Truncation order of exponential series when --M is not given.
GCHTW_DEFAULT_M = int(config.get("DEFAULT_M", 25))

# Relative tolerance for the regularized-flow integrator.
GCHTW_DEFAULT_TOL = float(config.get("DEFAULT_TOL", 1e-10))

# Where sweep results go when --out-dir is not given.
GCHTW_OUTPUT_DIRECTORY = config.get("OUTPUT_DIRECTORY", os.path.join(os.getcwd(), "gchtw-output"))

GCHTW_LOG_LEVEL = str(config.get("LOG_LEVEL", "INFO")).upper()

DEBUG = bool(config.get("DEBUG", False))

# Nothing is served or signed, but Django insists on having one.
SECRET_KEY = config.get("SECRET_KEY", "gchtw-has-no-secrets")

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    "gchtw",
]

# All results are written to files; there is no database.
DATABASES = {}

USE_TZ = True
TIME_ZONE = "UTC"

DEFAULT_AUTO_FIELD = "django.db.models.AutoField"


def skip_progress_records(record):
    return DEBUG or not getattr(record, "progress", False)


LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "filters": {
        "skip_progress": {
            "()": "django.utils.log.CallbackFilter",
            "callback": skip_progress_records,
        }
    },
    "formatters": {
        "verbose": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "level": "DEBUG",
            "filters": ["skip_progress"],
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        "gchtw": {
            "handlers": ["console"],
            "level": GCHTW_LOG_LEVEL,
            "propagate": False,
        },
    },
}
