"""
Django settings for running tests.
"""

from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

DEBUG = True

SECRET_KEY = "test-secret-key-for-deniakit"

INSTALLED_APPS = [
    "deniakit",
]

# SimpleTestCase only; no test touches a database
DATABASES = {}

USE_TZ = True

DENIAKIT = {
    "SEED": 0,
    "THREADS": 1,
    "ROW_TOL": 1e-9,
    "DEGRADED_TOL": 1e-7,
    "EPS": 0.1,
    "GRID": 11,
    # small optimizer budgets keep the command tests fast
    "RESTARTS": 4,
    "MAX_ITER": 400,
}

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {
            "format": "{levelname} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
    },
    "loggers": {
        "deniakit": {
            "handlers": ["console"],
            "level": "ERROR",
            "propagate": False,
        },
    },
}
