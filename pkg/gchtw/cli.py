"""Run a gchtw subcommand the way manage.py would, returning the exit status."""

import os
import sys

SUBCOMMANDS = ("equilibria", "portrait", "classify", "series", "wave", "gstar", "verify", "sweep")


def cli(argv=None):
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "gchtw.settings")

    from django.core.management import execute_from_command_line

    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in SUBCOMMANDS:
        sys.stderr.write(f"usage: gchtw {{{','.join(SUBCOMMANDS)}}} ...\n")
        return 64
    try:
        execute_from_command_line(["gchtw", *argv])
    except SystemExit as e:
        if e.code is None:
            return 0
        return e.code if isinstance(e.code, int) else 1
    return 0


if __name__ == "__main__":
    sys.exit(cli())
