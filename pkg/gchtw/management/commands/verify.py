from gchtw import jobs, output
from gchtw.exceptions import VerificationFailed
from gchtw.management.commands._base import GchCommand


class Command(GchCommand):
    help = "Check a stored solution against the oracle; exits 5 if any check fails"

    needs_wave_params = False

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--solution", required=True, metavar="FILE", help="Solution JSON from the series command")
        parser.add_argument(
            "--shoot", action="store_true", help="Also compare with the integrated manifolds of the saddle"
        )
        parser.add_argument("--out", metavar="FILE", help="Write the report JSON to FILE")

    def handle(self, **options):
        solution = output.read_solution(options["solution"])
        report = jobs.verify_report(solution, shoot=options["shoot"], seed=options["seed"])
        self.emit(output.dump_json(report))
        if options["out"]:
            output.write_json(options["out"], report)
            manifest = jobs.manifest_for(
                "verify",
                solution.equation,
                solution.params.c,
                solution.params.g,
                derived=report,
                solution=solution,
                seed=options["seed"],
            )
            manifest.inputs = self.manifest(options).inputs
            manifest.outputs = [options["out"]]
            manifest.write_beside(options["out"])
        if not report["passed"]:
            failed = ", ".join(check["name"] for check in report["checks"] if not check["passed"])
            raise VerificationFailed(f"Verification failed: {failed}")
