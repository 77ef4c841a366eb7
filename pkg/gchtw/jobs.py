"""Reports shared by the management commands and the sweep workers.

Every job takes plain values and returns plain, JSON-ready data, so a
sweep cell can run in a worker process and write its own file.
"""

import logging
import math
from pathlib import Path

from gchtw.equations import EquationId, WaveParams, equilibria, singular_set
from gchtw.exceptions import GchError, InvalidParameters
from gchtw import oracle, output, phase_plane, series

logger = logging.getLogger(__name__)

JOBS = ("equilibria", "classify", "series")


def _complex_pair(value):
    return [value.real, value.imag]


def equilibrium_to_dict(info, multiplicity=1):
    return {
        "location": list(info.location),
        "kind": info.kind,
        "origin": info.origin,
        "eigenvalues": [_complex_pair(v) for v in info.eigenvalues],
        "determinant": info.determinant,
        "trace": info.trace,
        "multiplicity": multiplicity,
    }


def singular_set_to_dict(singular):
    return {
        "kind": singular.kind,
        "coefficients": list(singular.coefficients),
        "Y": singular.Y,
        "points": [list(point) for point in singular.points],
        "degenerate": singular.degenerate,
    }


def equilibria_report(eq, c, g):
    eq = EquationId.from_tag(eq)
    p = WaveParams(c, g)
    rows = [
        equilibrium_to_dict(phase_plane.classify_equilibrium(eq, p, (root.value, 0.0)), root.multiplicity)
        for root in equilibria(eq, p)
    ]
    rows += [equilibrium_to_dict(info) for info in phase_plane.singular_equilibria(eq, p)]
    return {
        "equation": eq.value,
        "params": {"c": p.c, "g": p.g},
        "equilibria": rows,
        "singular_set": singular_set_to_dict(singular_set(eq, p)),
    }


def verdict_to_dict(verdict):
    return {
        "label": verdict.label,
        "geometry": verdict.geometry,
        "level": verdict.level,
        "singular_points": [list(point) for point in verdict.singular_points],
        "center": None if verdict.center is None else list(verdict.center),
        "contact": None if verdict.contact is None else list(verdict.contact),
        "level_curve": None if verdict.level_curve is None else verdict.level_curve.tolist(),
        "reason": verdict.reason,
    }


def classify_report(eq, c, g, strict=False):
    eq = EquationId.from_tag(eq)
    p = WaveParams(c, g)
    verdict = phase_plane.classify_singular_wave(eq, p, strict=strict)
    return {"equation": eq.value, "params": {"c": p.c, "g": p.g}, "verdict": verdict_to_dict(verdict)}


def resolve_x0(eq, p, x0):
    if x0 is None or x0 == "auto":
        chosen = oracle.select_saddle(eq, p)
        logger.info("Selected the saddle x0=%.10g for %s", chosen, eq.label)
        return chosen
    return series.snap_base(eq, p, float(x0))


def build_solution(
    eq,
    c,
    g,
    *,
    x0="auto",
    M=series.DEFAULT_M,
    strategy=series.CONTINUITY_ROOT,
    a1=None,
    target=None,
    family=None,
    constants=None,
    convention=series.VALIDATED,
):
    eq = EquationId.from_tag(eq)
    p = WaveParams(c, g)
    if strategy == series.EXACT_G0:
        return series.assemble(eq, p, None, M, strategy, family=family, constants=constants)
    return series.assemble(
        eq, p, resolve_x0(eq, p, x0), M, strategy, a1=a1, target=target, convention=convention
    )


def manifest_for(command, eq, c, g, *, inputs=None, derived=None, solution=None, seed=0):
    manifest = output.RunManifest(
        command=command,
        equation=EquationId.from_tag(eq).value,
        params={"c": float(c), "g": float(g)},
        inputs=dict(inputs or {}),
        derived=dict(derived or {}),
        seed=seed,
    )
    if solution is not None and not isinstance(solution, series.ExactG0Solution):
        manifest.series = {
            "x0": solution.x0,
            "M": solution.right.M,
            "leading": {"right": solution.right.leading, "left": solution.left.leading},
            "verdicts": {side: report.verdict for side, report in solution.reports().items()},
        }
    return manifest


def cell_filename(job, c, g):
    return f"{job}_c{c:.10g}_g{g:.10g}.json"


def run_cell(job, eq, options, output_directory, cell):
    """Compute one (c, g) cell of a sweep and write it; errors are recorded, not raised."""
    c, g = cell
    filename = Path(output_directory) / cell_filename(job, c, g)
    manifest = manifest_for(f"sweep --job {job}", eq, c, g, inputs=options)
    data = {"job": job, "equation": EquationId.from_tag(eq).value, "params": {"c": c, "g": g}}
    try:
        if job == "equilibria":
            data["result"] = equilibria_report(eq, c, g)
            manifest.derived = data["result"]
        elif job == "classify":
            data["result"] = classify_report(eq, c, g)
        elif job == "series":
            solution = build_solution(eq, c, g, **options)
            data["result"] = output.solution_to_dict(solution)
            manifest = manifest_for(f"sweep --job {job}", eq, c, g, inputs=options, solution=solution)
        else:
            raise InvalidParameters(f"Unknown sweep job “{job}”")
        data["status"] = "ok"
    except GchError as e:
        data["status"] = "error"
        data["error"] = {"type": type(e).__name__, "message": str(e), "exit_code": e.exit_code}
    logger.info("%s cell c=%g g=%g: %s", job, c, g, data["status"], extra={"progress": True})
    manifest.outputs = [str(filename)]
    data["manifest"] = manifest.finish().to_dict()
    output.write_json(filename, data)
    return str(filename), data["status"]


def grid(bounds):
    """Values a + i (b - a) / (n - 1), i = 0..n-1, for a range (a, b, n)."""
    start, stop, count = bounds
    if count == 1:
        return [float(start)]
    step = (stop - start) / (count - 1)
    return [float(start + i * step) for i in range(count)]


def wave_rows(sol, xs, ts):
    """(t, x, z, u) rows of the traveling profile."""
    rows = []
    for t in ts:
        values = series.evaluate_wave(sol, xs, t)
        for x, u in zip(xs, values):
            rows.append((float(t), float(x), float(x - sol.params.c * t), float(u)))
    return rows


def x_values(bounds):
    xmin, xmax, step = bounds
    if step <= 0 or xmax < xmin:
        raise InvalidParameters(f"Need xmin ≤ xmax and a positive step, got {bounds}")
    count = int(math.floor((xmax - xmin) / step + 1e-9)) + 1
    return [xmin + i * step for i in range(count)]


def verify_report(sol, *, shoot=False, seed=0):
    report = oracle.verify_solution(sol, shoot=shoot, seed=seed)
    return {
        "passed": report.passed,
        "checks": [
            {"name": check.name, "passed": check.passed, "value": check.value, "limit": check.limit}
            for check in report.checks
        ],
    }
