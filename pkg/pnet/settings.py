from pathlib import Path
import os
from dotenv import load_dotenv

load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv("DJANGO_SECRET_KEY", "pnet-local-analysis-key")

DEBUG = os.getenv("DEBUG", "False") == "True"

ALLOWED_HOSTS = ['localhost', '127.0.0.1']


# Application definition

INSTALLED_APPS = [
    # django defaults...
    'django.contrib.auth',
    'django.contrib.contenttypes',

    # third party
    'rest_framework',

    # app
    'proofnets',
]

# Configuration SQLite (only used by the test runner)
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

# ============================================================
# PROOF-NET ANALYSIS
# ============================================================

# Contexts visited by one token exploration, and states visited by one
# exhaustive reduction search.
PNET_STEP_BUDGET = int(os.getenv("PNET_STEP_BUDGET", 10**6))

# iso_equal refuses nets above this many graph nodes
PNET_ISO_NODE_LIMIT = int(os.getenv("PNET_ISO_NODE_LIMIT", 200))

# default --max-steps of the normalize command
PNET_MAX_STEPS = int(os.getenv("PNET_MAX_STEPS", 10_000))

PNET_FIXTURES_DIR = Path(os.getenv("PNET_FIXTURES_DIR", BASE_DIR / 'fixtures'))

PNET_LOG_LEVEL = os.getenv("PNET_LOG_LEVEL", "WARNING")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {"format": "{levelname} {name}: {message}", "style": "{"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "simple"},
    },
    "loggers": {
        "proofnets": {
            "handlers": ["console"],
            "level": PNET_LOG_LEVEL,
            "propagate": False,
        },
    },
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'
