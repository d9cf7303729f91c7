"""
WSGI do projeto coincide.

Expõe a API REST de testes de independência (``/api/``) como o callable ``application``.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "coincide.settings")

application = get_wsgi_application()
