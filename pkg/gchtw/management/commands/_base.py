"""Option parsing and error translation shared by every gchtw command."""

import logging
import sys

from django.core.management.base import BaseCommand, CommandError, CommandParser

from gchtw.equations import EquationId, WaveParams
from gchtw.exceptions import EXIT_USAGE, GchError
from gchtw.output import RunManifest
from gchtw.series import CONVENTIONS, VALIDATED

logger = logging.getLogger(__name__)

EQUATION_TAGS = [eq.value for eq in EquationId]


class UsageErrorParser(CommandParser):
    """A CommandParser that reports usage errors with EX_USAGE rather than 2."""

    def error(self, message):
        if self.called_from_command_line:
            self.print_usage(sys.stderr)
            self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")
        raise CommandError(f"Error: {message}", returncode=EXIT_USAGE)


def _parts(text, separator, count, name):
    parts = text.split(separator)
    if len(parts) != count:
        raise ValueError(f"{name} needs {count} values separated by “{separator}”")
    return parts


def number_range(text):
    """a:b:n, n values from a to b inclusive."""
    start, stop, count = _parts(text, ":", 3, "a range")
    count = int(count)
    if count < 1:
        raise ValueError("a range needs at least one value")
    return float(start), float(stop), count


number_range.__name__ = "range a:b:n"


def x_range(text):
    """xmin:xmax:step"""
    xmin, xmax, step = _parts(text, ":", 3, "an x range")
    return float(xmin), float(xmax), float(step)


x_range.__name__ = "range xmin:xmax:step"


def window(text):
    xmin, xmax, ymin, ymax = (float(v) for v in _parts(text, ":", 4, "a window"))
    if not (xmax > xmin and ymax > ymin):
        raise ValueError("a window needs xmin < xmax and ymin < ymax")
    return xmin, xmax, ymin, ymax


window.__name__ = "window xmin:xmax:ymin:ymax"


def number_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


number_list.__name__ = "list t1,t2,..."


def pair(text):
    first, second = _parts(text, ",", 2, "the constants")
    return float(first), float(second)


pair.__name__ = "pair k,k"


class GchCommand(BaseCommand):
    """Base for commands that act on one equation at one (c, g)."""

    requires_system_checks = []
    needs_wave_params = True

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.__class__ = UsageErrorParser
        return parser

    def add_arguments(self, parser):
        if self.needs_wave_params:
            parser.add_argument("--eq", required=True, choices=EQUATION_TAGS, help="Which equation")
            parser.add_argument("--c", required=True, type=float, help="Wave speed (nonzero)")
            parser.add_argument("--g", required=True, type=float, help="Integration constant")
        parser.add_argument(
            "--seed", type=int, default=0, help="Seed for every random choice the command makes (default 0)"
        )

    def add_recurrence_argument(self, parser):
        parser.add_argument(
            "--recurrence",
            choices=CONVENTIONS,
            default=VALIDATED,
            help="Sign convention of the GCH-III recurrence (default validated)",
        )

    def wave_params(self, options):
        return EquationId.from_tag(options["eq"]), WaveParams(options["c"], options["g"])

    def manifest(self, options, **fields):
        inputs = {k: v for k, v in options.items() if k not in DJANGO_OPTIONS and v is not None}
        return RunManifest(
            command=self.__module__.rsplit(".", 1)[-1],
            equation=options.get("eq"),
            params={"c": options["c"], "g": options["g"]} if "c" in options and "g" in options else None,
            inputs=inputs,
            seed=options.get("seed", 0),
            **fields,
        )

    def emit(self, text):
        self.stdout.write(text.rstrip("\n"))

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except GchError as e:
            logger.debug("%s: %s", type(e).__name__, e)
            raise CommandError(str(e), returncode=e.exit_code)


DJANGO_OPTIONS = {
    "verbosity",
    "settings",
    "pythonpath",
    "traceback",
    "no_color",
    "force_color",
    "skip_checks",
    "stdout",
    "stderr",
}
