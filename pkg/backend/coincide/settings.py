"""
Django settings for coincide project.

Generated by 'django-admin startproject' using Django 5.0.

For more information on this file, see
https://docs.djangoproject.com/en/5.0/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.0/ref/settings/
"""

# cSpell: words dotenv coincide

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv("DJANGO_SECRET_KEY", "django-insecure-coincide-dev-only-key")

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.getenv("DJANGO_DEBUG", "false").lower() == "true"

ALLOWED_HOSTS = ["localhost", "127.0.0.1", "testserver"]


# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",
    "rest_framework",
    "spikes",
]

REST_FRAMEWORK = {
    "DEFAULT_AUTHENTICATION_CLASSES": [],
    "DEFAULT_PERMISSION_CLASSES": ["rest_framework.permissions.AllowAny"],
    "DEFAULT_RENDERER_CLASSES": ["rest_framework.renderers.JSONRenderer"],
    "UNAUTHENTICATED_USER": None,
}

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.middleware.common.CommonMiddleware",
]

ROOT_URLCONF = "coincide.urls"

WSGI_APPLICATION = "coincide.wsgi.application"


# Database
# Nenhum modelo persistente: o banco existe apenas para o runner de testes do Django.

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    },
}


# Internationalization

LANGUAGE_CODE = "pt-br"

TIME_ZONE = "America/Sao_Paulo"

USE_I18N = True

USE_TZ = False

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# ================================================================================================ #
#                                       PARÂMETROS DA ANÁLISE                                      #
# ================================================================================================ #
COINCIDE = {
    # Número de workers usados pelo dask nas repetições de Monte-Carlo
    "THREADS": int(os.getenv("COINCIDE_THREADS", "1")),
    # Scheduler do dask quando THREADS > 1 ("processes" ou "threads")
    "DASK_SCHEDULER": os.getenv("COINCIDE_DASK_SCHEDULER", "processes"),
    # Diretório padrão das curvas geradas
    "OUTPUT_DIR": Path(os.getenv("COINCIDE_OUTPUT_DIR", "results")),
    # Limites de segurança
    "HAWKES_EVENT_CAP": int(os.getenv("COINCIDE_HAWKES_EVENT_CAP", str(10**6))),
    "MULTI_PATTERN_MAX_NEURONS": int(os.getenv("COINCIDE_MAX_NEURONS", "10")),
}


# Logging - progresso e falhas vão para o stderr, stdout fica reservado para o JSON

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "stderr": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "simple",
        },
    },
    "loggers": {
        "spikes": {
            "handlers": ["stderr"],
            "level": os.getenv("COINCIDE_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
    },
}
