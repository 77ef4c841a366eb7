from gchtw import jobs, output
from gchtw.management.commands._base import GchCommand


class Command(GchCommand):
    help = "Classify the singular traveling waves (solitary peakon, periodic cuspon or none)"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--json", action="store_true", help="Print the full verdict as JSON")
        parser.add_argument(
            "--strict",
            action="store_true",
            help="Fail for equations whose singular geometry is not analyzed instead of answering none",
        )

    def handle(self, **options):
        eq, p = self.wave_params(options)
        report = jobs.classify_report(eq, p.c, p.g, strict=options["strict"])
        if options["json"]:
            self.emit(output.dump_json(report))
        else:
            verdict = report["verdict"]
            detail = f" ({verdict['geometry']})" if verdict["geometry"] else ""
            self.emit(f"{verdict['label']}{detail}")
