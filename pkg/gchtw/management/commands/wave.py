from gchtw import jobs, output
from gchtw.management.commands._base import GchCommand, number_list, x_range

CSV_HEADER = ["t", "x", "z", "u"]


class Command(GchCommand):
    help = "Evaluate u(x, t) = φ(x - ct) of a stored solution"

    needs_wave_params = False

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--solution", required=True, metavar="FILE", help="Solution JSON from the series command")
        parser.add_argument(
            "--x", required=True, type=x_range, help="Positions xmin:xmax:step (write --x=-30:30:0.1 if negative)"
        )
        parser.add_argument("--t", type=number_list, default=[0.0], help="Times t1,t2,... (default 0)")
        parser.add_argument("--out", metavar="FILE", help="Write the profile CSV (and a manifest) to FILE")

    def handle(self, **options):
        solution = output.read_solution(options["solution"])
        rows = jobs.wave_rows(solution, jobs.x_values(options["x"]), options["t"])
        if options["out"]:
            output.write_csv(options["out"], CSV_HEADER, rows)
            manifest = jobs.manifest_for(
                "wave", solution.equation, solution.params.c, solution.params.g, solution=solution
            )
            manifest.inputs = self.manifest(options).inputs
            manifest.outputs = [options["out"]]
            manifest.write_beside(options["out"])
            self.emit(f"Wrote {len(rows)} samples to {options['out']}")
        else:
            self.emit(output.csv_text(CSV_HEADER, rows))
