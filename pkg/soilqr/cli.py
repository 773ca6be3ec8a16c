# -*- coding: utf-8 -*-
"""
The ``soilqr`` console script: the management command without a Django
project around it.
"""
import sys

import django
from django.conf import settings


def main(argv=None):
    if not settings.configured:
        settings.configure(INSTALLED_APPS=['soilqr'], USE_TZ=True)
    django.setup()

    from soilqr.management.commands.soilqr import Command
    argv = sys.argv[1:] if argv is None else list(argv)
    Command().run_from_argv(['soilqr', 'soilqr'] + argv)


if __name__ == '__main__':
    main()
