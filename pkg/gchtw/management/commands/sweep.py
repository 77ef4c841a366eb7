from functools import partial
from itertools import product
from multiprocessing import Pool
from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError
from tqdm import tqdm

from gchtw import jobs
from gchtw.management.commands._base import EQUATION_TAGS, GchCommand, number_range


class Command(GchCommand):
    help = "Run a job over a (c, g) grid, one JSON file with its manifest per cell"

    needs_wave_params = False

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_recurrence_argument(parser)
        parser.add_argument("--eq", required=True, choices=EQUATION_TAGS)
        parser.add_argument("--c-range", required=True, type=number_range, help="Wave speeds a:b:n")
        parser.add_argument("--g-range", required=True, type=number_range, help="Values of g a:b:m")
        parser.add_argument("--job", required=True, choices=jobs.JOBS)
        parser.add_argument("--M", type=int, help="Truncation order for the series job (default from settings)")
        parser.add_argument("-o", "--out-dir", metavar="OUTPUT-DIRECTORY", help="Default from settings")
        parser.add_argument("--threads", type=int, help="Worker processes, at most GCHTW_THREADS (the default)")

    def handle(self, **options):
        output_directory = Path(options["out_dir"] or settings.GCHTW_OUTPUT_DIRECTORY)
        output_directory.mkdir(parents=True, exist_ok=True)

        threads = min(options["threads"] or settings.GCHTW_THREADS, settings.GCHTW_THREADS)
        if threads < 1:
            raise CommandError("--threads must be at least 1", returncode=64)

        cells = [
            (c, g)
            for c, g in product(jobs.grid(options["c_range"]), jobs.grid(options["g_range"]))
            if c != 0.0
        ]
        job_options = {}
        if options["job"] == "series":
            job_options = {
                "M": options["M"] or settings.GCHTW_DEFAULT_M,
                "convention": options["recurrence"],
            }
        run = partial(jobs.run_cell, options["job"], options["eq"], job_options, str(output_directory))

        if threads == 1:
            results = [run(cell) for cell in tqdm(cells)]
        else:
            with Pool(processes=min(threads, len(cells) or 1)) as pool:
                results = list(tqdm(pool.imap_unordered(run, cells), total=len(cells)))

        failures = sum(1 for _, status in results if status != "ok")
        self.emit(f"Wrote {len(results)} cells to {output_directory} ({failures} recorded errors)")
