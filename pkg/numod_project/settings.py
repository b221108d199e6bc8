"""
Django settings for numod_project project.

The project runs no web server: Django supplies the settings layer, the
management-command CLI and the test runner for the moving object detection
pipeline.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

from pathlib import Path
from decouple import config
import os

# Load local environment file if it exists
if os.path.exists('.env.local'):
    from decouple import Config, RepositoryEnv
    config = Config(RepositoryEnv('.env.local'))

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

NUMOD_VERSION = '1.0.0'

SECRET_KEY = config(
    'SECRET_KEY', default='django-insecure-numod-local-only')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'common',  # Shared errors, command base class, config loading
    'sequence',  # Frame sequence and mask I/O
    'invariant',  # Illumination invariant representation
    'gfcn',  # Generative fully connected network engine
    'decomposition',  # Background / illumination / foreground decomposition
    'evaluation',  # F-measure scoring
    'synth',  # Synthetic sequence generator
]


# Database
# Commands and tests never touch it; Django still expects a default alias.

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

# Django REST Framework is used only for its serializers (config and
# checkpoint validation), so keep the renderer surface minimal.
REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'UNAUTHENTICATED_USER': None,
}


def _csv_ints(value):
    return tuple(int(s.strip()) for s in value.split(',') if s.strip())


# Pipeline defaults. CLI flags override a --config file, which overrides these.
NUMOD_DEFAULTS = {
    'latent_dim': config('NUMOD_LATENT_DIM', default=5, cast=int),
    'hidden_sizes': config('NUMOD_HIDDEN_SIZES', default='10,20', cast=_csv_ints),
    'weight_decay': config('NUMOD_WEIGHT_DECAY', default=0.005, cast=float),
    'learning_rate': config('NUMOD_LEARNING_RATE', default=0.001, cast=float),
    'epochs': config('NUMOD_EPOCHS', default=500, cast=int),
    'minibatch_frames': config('NUMOD_MINIBATCH_FRAMES', default=0, cast=int),
    'online_iterations': config('NUMOD_ONLINE_ITERATIONS', default=500, cast=int),
    'online_stream': config('NUMOD_ONLINE_STREAM', default=10, cast=int),
    'pretrain_fraction': config('NUMOD_PRETRAIN_FRACTION', default=0.5, cast=float),
    'threshold_factor': config('NUMOD_THRESHOLD_FACTOR', default=2.0, cast=float),
    'latent_init_std': config('NUMOD_LATENT_INIT_STD', default=0.1, cast=float),
    'prior_mode': config('NUMOD_PRIOR_MODE', default='shifted'),
    'seed': config('NUMOD_SEED', default=0, cast=int),
    'threads': config('NUMOD_THREADS', default=1, cast=int),
    'wiener_window': config('NUMOD_WIENER_WINDOW', default=7, cast=int),
    'n_angles': config('NUMOD_N_ANGLES', default=180, cast=int),
    'epsilon_log': config('NUMOD_EPSILON_LOG', default=1e-4, cast=float),
    'log_every': config('NUMOD_LOG_EVERY', default=50, cast=int),
}

# Acceptance-scale tests take minutes; the CDnet check needs local data.
NUMOD_SLOW_TESTS = config('NUMOD_SLOW_TESTS', default=False, cast=bool)
NUMOD_CDNET_BACKDOOR = config('NUMOD_CDNET_BACKDOOR', default='')

LOG_LEVEL = config('LOG_LEVEL', default='DEBUG' if DEBUG else 'INFO')

# Logging Configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {asctime} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': LOG_LEVEL,
            'class': 'logging.StreamHandler',
            'formatter': 'verbose' if DEBUG else 'simple',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': False,
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
}

for _app_logger in ('common', 'sequence', 'invariant', 'gfcn',
                    'decomposition', 'evaluation', 'synth'):
    LOGGING['loggers'][_app_logger] = {
        'handlers': ['console'],
        'level': LOG_LEVEL,
        'propagate': False,
    }
