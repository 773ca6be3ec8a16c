# Django settings for test_proj project.

DEBUG = True

DATABASES = {}

# Local time zone for this installation.
TIME_ZONE = 'UTC'
USE_TZ = True

LANGUAGE_CODE = 'en-us'

# Make this unique, and don't share it with anybody.
SECRET_KEY = 'soilqr-test-project-not-secret'

INSTALLED_APPS = (
    'soilqr',
)

# Overrides of the soilqr.conf defaults.
SOILQR_CONF = {
    'MASTER_SEED': 20240601,
}

# Solver warnings and skipped folds go to the console; everything else
# stays quiet during the tests.
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'handlers': {
        'console': {
            'level': 'WARNING',
            'class': 'logging.StreamHandler',
        }
    },
    'loggers': {
        'soilqr': {
            'handlers': ['console'],
            'level': 'ERROR',
            'propagate': False,
        },
    }
}
