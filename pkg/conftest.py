"""Configura o Django para rodar a suíte com pytest (equivale ao que o manage.py faz)."""
import os
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent / "backend"))
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "coincide.settings")

import django  # noqa: E402

django.setup()
