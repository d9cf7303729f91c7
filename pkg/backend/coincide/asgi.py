"""
ASGI do projeto coincide.

Mesma API REST do WSGI (``/api/``), para servidores assíncronos.
"""

import os

from django.core.asgi import get_asgi_application

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "coincide.settings")

application = get_asgi_application()
