"""
Standalone settings for the deniakit console script.

Reads environment variables with defaults, like a deployment settings file:
DENIAKIT_SEED, DENIAKIT_THREADS and DENIAKIT_LOG_LEVEL.
"""

import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

# No sessions or signing happen in a batch run; Django still wants a key.
SECRET_KEY = os.environ.get('SECRET_KEY', 'deniakit-batch-runs-have-no-secrets')

DEBUG = os.environ.get('DEBUG', 'False').lower() in ('true', '1', 't', 'yes')

INSTALLED_APPS = [
    'deniakit',
]

DATABASES = {}

USE_TZ = True


# Library defaults
# Command line arguments and run manifests take precedence over these.

DENIAKIT = {
    'SEED': int(os.environ.get('DENIAKIT_SEED', '0')),
    'THREADS': int(os.environ.get('DENIAKIT_THREADS', '1')),
    'ROW_TOL': 1e-9,
    'DEGRADED_TOL': 1e-7,
    'EPS': 0.1,
    'GRID': 101,
    'RESTARTS': None,
    'MAX_ITER': None,
}


# Logging Configuration
# https://docs.djangoproject.com/en/5.1/topics/logging/

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'deniakit': {
            'handlers': ['console'],
            'level': os.environ.get('DENIAKIT_LOG_LEVEL', 'WARNING').upper(),
            'propagate': False,
        },
    },
}
