"""CSV, JSON and SVG writers, and the run manifests that go with them."""

import csv
from dataclasses import asdict, dataclass, field
import hashlib
import io
import json
import math
from pathlib import Path

from django.utils import timezone
from lxml import etree

from gchtw import __version__
from gchtw.equations import EquationId, WaveParams
from gchtw.exceptions import InvalidParameters
from gchtw import series

SOLUTION_SCHEMA = "gchtw.solution/1"
MANIFEST_SCHEMA = "gchtw.manifest/1"
SVG_NAMESPACE = "http://www.w3.org/2000/svg"


def format_number(value):
    return format(float(value), ".17g")


def _write_rows(f, header, rows):
    writer = csv.writer(f, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) if isinstance(v, float) else v for v in row])


def csv_text(header, rows):
    buffer = io.StringIO()
    _write_rows(buffer, header, rows)
    return buffer.getvalue()


def write_csv(filename, header, rows):
    with open(filename, "w", newline="", encoding="utf-8") as f:
        _write_rows(f, header, rows)


def dump_json(data):
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_json(filename, data):
    with open(filename, "w", encoding="utf-8") as f:
        f.write(dump_json(data))


def read_json(filename):
    with open(filename, encoding="utf-8") as f:
        return json.load(f)


def _finite_or_none(value):
    return value if math.isfinite(value) else None


def branch_to_dict(branch):
    return {
        "x0": branch.x0,
        "exponent": branch.exponent,
        "M": branch.M,
        "side": branch.side,
        "coefficients": list(branch.coefficients),
        "overflowed": branch.overflowed,
    }


def report_to_dict(report):
    return {
        "verdict": report.verdict,
        "tail_ratio": _finite_or_none(report.tail_ratio),
        "max_coefficient_index": report.max_coefficient_index,
    }


def solution_to_dict(sol):
    data = {
        "schema": SOLUTION_SCHEMA,
        "equation": sol.equation.value,
        "params": {"c": sol.params.c, "g": sol.params.g},
        "construction": sol.construction,
    }
    if isinstance(sol, series.ExactG0Solution):
        data.update(family=sol.family, constants=list(sol.constants))
        return data
    data.update(
        convention=sol.convention,
        x0=sol.x0,
        junction_value=sol.junction_value,
        junction_jump=sol.junction_jump,
        right=branch_to_dict(sol.right),
        left=branch_to_dict(sol.left),
        convergence={side: report_to_dict(report) for side, report in sol.reports().items()},
    )
    return data


def _branch_from_dict(data, convention):
    return series.SeriesBranch(
        x0=float(data["x0"]),
        exponent=float(data["exponent"]),
        M=int(data["M"]),
        coefficients=tuple(float(v) for v in data["coefficients"]),
        side=data["side"],
        overflowed=bool(data.get("overflowed", False)),
        convention=convention,
    )


def solution_from_dict(data):
    if data.get("schema") != SOLUTION_SCHEMA:
        raise InvalidParameters(f"Not a {SOLUTION_SCHEMA} document (schema {data.get('schema')!r})")
    try:
        eq = EquationId.from_tag(data["equation"])
        params = WaveParams(data["params"]["c"], data["params"]["g"])
        if data["construction"] == series.EXACT_G0:
            return series.exact_g0(eq, params.c, int(data["family"]), data["constants"])
        convention = data.get("convention", series.VALIDATED)
        return series.HomoclinicSolution(
            equation=eq,
            params=params,
            right=_branch_from_dict(data["right"], convention),
            left=_branch_from_dict(data["left"], convention),
            junction_value=float(data["junction_value"]),
            junction_jump=float(data["junction_jump"]),
            construction=data["construction"],
        )
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidParameters(f"Malformed solution document: {e}")


def read_solution(filename):
    try:
        return solution_from_dict(read_json(filename))
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidParameters(f"Could not read a solution from {filename}: {e}")


def _svg_transform(window, width, height, margin):
    xmin, xmax, ymin, ymax = window
    sx = (width - 2 * margin) / (xmax - xmin)
    sy = (height - 2 * margin) / (ymax - ymin)

    def transform(x, y):
        return margin + (x - xmin) * sx, height - margin - (y - ymin) * sy

    return transform


def _points_attribute(points, transform):
    return " ".join("{:.3f},{:.3f}".format(*transform(x, y)) for x, y in points)


def portrait_svg(portrait, filename, width=640, height=480, margin=20):
    transform = _svg_transform(portrait.window, width, height, margin)
    svg = etree.Element(
        "svg",
        nsmap={None: SVG_NAMESPACE},
        version="1.1",
        width=str(width),
        height=str(height),
        viewBox=f"0 0 {width} {height}",
    )
    clip = etree.SubElement(etree.SubElement(svg, "defs"), "clipPath", id="window")
    etree.SubElement(
        clip, "rect", x=str(margin), y=str(margin), width=str(width - 2 * margin), height=str(height - 2 * margin)
    )
    plot = etree.SubElement(svg, "g", {"clip-path": "url(#window)", "fill": "none"})
    for trajectory in portrait.trajectories:
        if len(trajectory.phi) < 2:
            continue
        etree.SubElement(
            plot, "polyline", points=_points_attribute(trajectory.points, transform), stroke="#4a6fa5"
        )
    for curve in portrait.singular_curves:
        etree.SubElement(
            plot,
            "polyline",
            {"points": _points_attribute(curve, transform), "stroke": "#c0392b", "stroke-dasharray": "6,4"},
        )
    for info in portrait.equilibria:
        x, y = transform(*info.location)
        if info.kind == "saddle":
            etree.SubElement(
                svg, "rect", x=f"{x - 4:.3f}", y=f"{y - 4:.3f}", width="8", height="8", fill="#222222"
            )
        else:
            etree.SubElement(
                svg, "circle", cx=f"{x:.3f}", cy=f"{y:.3f}", r="4", fill="white", stroke="#222222"
            )
    with open(filename, "wb") as f:
        f.write(etree.tostring(svg, pretty_print=True, encoding="utf-8", xml_declaration=True))


def input_hash(inputs):
    canonical = json.dumps(inputs, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class RunManifest:
    command: str
    equation: str = None
    params: dict = None
    derived: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    seed: int = 0
    tool_version: str = __version__
    started: str = field(default_factory=lambda: timezone.now().isoformat())
    finished: str = None

    @property
    def input_hash(self):
        return input_hash(
            {"command": self.command, "equation": self.equation, "params": self.params, "inputs": self.inputs}
        )

    def finish(self):
        self.finished = timezone.now().isoformat()
        return self

    def to_dict(self):
        data = asdict(self)
        data["schema"] = MANIFEST_SCHEMA
        data["input_hash"] = self.input_hash
        data["timestamps"] = {"started": data.pop("started"), "finished": data.pop("finished")}
        return data

    def write_beside(self, filename):
        """Write the manifest to <filename>.manifest.json and return that path."""
        if self.finished is None:
            self.finish()
        path = Path(f"{filename}.manifest.json")
        write_json(path, self.to_dict())
        return path
