from django.conf import settings

from gchtw import jobs, output, series
from gchtw.management.commands._base import GchCommand, pair

STRATEGIES = {
    "continuity": series.CONTINUITY_ROOT,
    "mirror": series.MIRROR,
    "matched": series.MATCHED_LEFT,
    "exact": series.EXACT_G0,
}


def base_point(text):
    if text == "auto":
        return text
    return float(text)


base_point.__name__ = "x0 (a number or auto)"


class Command(GchCommand):
    help = "Build a two-sided exponential series homoclinic solution"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_recurrence_argument(parser)
        parser.add_argument(
            "--x0", type=base_point, default="auto", help="Saddle to anchor on, or auto (default auto)"
        )
        parser.add_argument("--M", type=int, help="Truncation order (default from settings)")
        parser.add_argument("--strategy", choices=list(STRATEGIES), default="continuity")
        parser.add_argument("--a1", type=float, help="Leading coefficient for mirror and matched")
        parser.add_argument("--target", type=float, help="Value of φ(0) for the continuity strategy (default 0)")
        parser.add_argument("--family", type=int, choices=[1, 2, 3], help="Closed-form family for exact")
        parser.add_argument("--constants", type=pair, help="The two constants k,k of the closed-form family")
        parser.add_argument("--out", metavar="FILE", help="Write the solution JSON (and a manifest) to FILE")

    def handle(self, **options):
        eq, p = self.wave_params(options)
        M = options["M"] if options["M"] is not None else settings.GCHTW_DEFAULT_M
        solution = jobs.build_solution(
            eq,
            p.c,
            p.g,
            x0=options["x0"],
            M=M,
            strategy=STRATEGIES[options["strategy"]],
            a1=options["a1"],
            target=options["target"],
            family=options["family"],
            constants=options["constants"],
            convention=options["recurrence"],
        )
        document = output.solution_to_dict(solution)
        self.emit(output.dump_json(document))
        if options["out"]:
            output.write_json(options["out"], document)
            derived = jobs.equilibria_report(eq, p.c, p.g)
            manifest = jobs.manifest_for(
                "series", eq, p.c, p.g, derived=derived, solution=solution, seed=options["seed"]
            )
            manifest.inputs = self.manifest(options).inputs
            manifest.outputs = [options["out"]]
            manifest.write_beside(options["out"])
