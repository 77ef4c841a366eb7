from dataclasses import asdict

from gchtw import output
from gchtw.management.commands._base import GchCommand
from gchtw.phase_plane import gstar


class Command(GchCommand):
    help = "Find g* for GCH-III: the g at which the middle saddle's level set passes through (√c, 0)"

    needs_wave_params = False

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--c", required=True, type=float, help="Wave speed (positive)")
        parser.add_argument("--tol", type=float, default=1e-10, help="Bisection tolerance (default 1e-10)")
        parser.add_argument("--g", type=float, help="Also report the intersection points P± at this g < g*")
        parser.add_argument("--json", action="store_true", help="Print JSON")

    def handle(self, **options):
        result = gstar(options["c"], options["tol"], options["g"])
        if options["json"]:
            data = asdict(result)
            data["intersections"] = [list(point) for point in result.intersections]
            self.emit(output.dump_json(data))
            return
        lines = [
            f"g* = {result.g_star:.12g}",
            f"h2 = {result.h2:.12g} (shifted {result.h2_shifted:.12g}, published {result.h2_published:.12g})",
        ]
        for phi, y in result.intersections:
            lines.append(f"P = ({phi:.12g}, {y:.12g})")
        self.emit("\n".join(lines))
