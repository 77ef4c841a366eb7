from django.conf import settings

from gchtw import jobs, output
from gchtw.management.commands._base import GchCommand, window
from gchtw.phase_plane import portrait

CSV_HEADER = ["trajectory", "zeta", "phi", "y", "terminated_by"]


def trajectory_rows(result):
    for index, trajectory in enumerate(result.trajectories):
        for zeta, phi, y in trajectory.samples:
            yield index, float(zeta), float(phi), float(y), trajectory.terminated_by


class Command(GchCommand):
    help = "Integrate a phase portrait of the regularized system"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--window",
            type=window,
            help="Plot window xmin:xmax:ymin:ymax (write --window=-1:1:-1:1 for negative bounds)",
        )
        parser.add_argument("--seeds", type=int, default=16, help="Number of seed points (default 16)")
        parser.add_argument("--tol", type=float, help="Integrator tolerance (default from settings)")
        parser.add_argument("--svg", metavar="FILE", help="Write a static SVG plot")
        parser.add_argument("--csv", metavar="FILE", help="Write every trajectory sample as CSV")

    def handle(self, **options):
        eq, p = self.wave_params(options)
        tol = options["tol"] or settings.GCHTW_DEFAULT_TOL
        result = portrait(eq, p, options["window"], options["seeds"], seed=options["seed"], tol=tol)
        written = []
        if options["svg"]:
            output.portrait_svg(result, options["svg"])
            written.append(options["svg"])
        if options["csv"]:
            output.write_csv(options["csv"], CSV_HEADER, trajectory_rows(result))
            written.append(options["csv"])
        equilibria = [jobs.equilibrium_to_dict(info) for info in result.equilibria]
        summary = {
            "window": list(result.window),
            "trajectories": len(result.trajectories),
            "equilibria": equilibria,
            "singular_set": jobs.singular_set_to_dict(result.singular_set),
        }
        self.emit(output.dump_json(summary))
        for filename in written:
            self.manifest(options, derived=summary, outputs=[filename]).write_beside(filename)
