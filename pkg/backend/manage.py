#!/usr/bin/env python
"""Utilitário de linha de comando do Django (os comandos spike_* ficam em spikes/management)."""
import os
import sys


def main():
    """Executa tarefas administrativas e os comandos de análise."""
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "coincide.settings")
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == "__main__":
    main()
