from gchtw import jobs, output
from gchtw.management.commands._base import GchCommand

CSV_HEADER = ["phi", "y", "kind", "origin", "multiplicity", "eigenvalue_1", "eigenvalue_2", "determinant", "trace"]


def _eigenvalue_text(pair):
    real, imag = pair
    if imag == 0.0:
        return output.format_number(real)
    return f"{output.format_number(real)}{imag:+.17g}j"


def csv_rows(report):
    for row in report["equilibria"]:
        first, second = (_eigenvalue_text(v) for v in row["eigenvalues"])
        yield (
            row["location"][0],
            row["location"][1],
            row["kind"],
            row["origin"],
            row["multiplicity"],
            first,
            second,
            row["determinant"],
            row["trace"],
        )


class Command(GchCommand):
    help = "List the equilibria of the regularized traveling-wave system with their kinds and eigenvalues"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        formats = parser.add_mutually_exclusive_group()
        formats.add_argument("--json", action="store_true", help="Print JSON")
        formats.add_argument("--csv", action="store_true", help="Print CSV")
        parser.add_argument("--out", metavar="FILE", help="Also write the report (and a manifest) to FILE")

    def handle(self, **options):
        eq, p = self.wave_params(options)
        report = jobs.equilibria_report(eq, p.c, p.g)
        if options["csv"]:
            text = output.csv_text(CSV_HEADER, csv_rows(report))
        elif options["json"]:
            text = output.dump_json(report)
        else:
            lines = [f"{eq.label} equilibria at c={p.c:g}, g={p.g:g}:"]
            for row in report["equilibria"]:
                phi, y = row["location"]
                lines.append(f"  ({phi:.6f}, {y:.6f})  {row['origin']} {row['kind']}")
            text = "\n".join(lines)
        self.emit(text)
        if options["out"]:
            if options["csv"]:
                output.write_csv(options["out"], CSV_HEADER, csv_rows(report))
            else:
                output.write_json(options["out"], report)
            manifest = self.manifest(options, derived=report, outputs=[options["out"]])
            manifest.write_beside(options["out"])
