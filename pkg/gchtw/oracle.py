"""Independent checks of the series construction.

Nothing here reads the recurrence formulas.  Brackets are recovered from
the traveling residual by finite differences in coefficient space, series
orbits are compared with directly integrated invariant manifolds, and
solutions are scanned for their pointwise residual.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from gchtw.equations import EquationId, build_system, traveling_residual
from gchtw.exceptions import (
    IllConditioned,
    InvalidParameters,
    NoSaddleFound,
    NotASaddle,
    SingularDegeneracy,
)
from gchtw.phase_plane import (
    DIVERGENCE,
    REGULAR,
    SADDLE,
    all_equilibria,
    classify_equilibrium,
    integrate_regularized,
    regular_equilibria,
)
from gchtw import series

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12
BRACKET_TOLERANCE = 1e-9
RESIDUAL_TAIL_LIMIT = 1e-6
EXACT_RESIDUAL_LIMIT = 1e-10
SHOT_DISTANCE_LIMIT = 1e-3
SHOT_SAMPLES = 20000


@dataclass(frozen=True)
class OrderRelation:
    """What the residual says about order k: F and the nonlinear brackets."""

    k: int
    linear: float
    brackets: dict


def _series_residual(eq, p, x0, exponent, coefficients, z):
    kappa = np.arange(1, len(coefficients) + 1) * exponent
    modes = np.exp(np.multiply.outer(z, kappa)) * coefficients
    phi = x0 + modes.sum(axis=1)
    dphi = (modes * kappa).sum(axis=1)
    d2phi = (modes * kappa * kappa).sum(axis=1)
    return traveling_residual(eq, p, phi, dphi, d2phi)


def _keys(k):
    keys = [(i, k - i) for i in range(1, k // 2 + 1)]
    for l in range(1, k // 3 + 1):
        for m in range(l, (k - l) // 2 + 1):
            keys.append((l, m, k - l - m))
    return keys


def _mode_coefficient(values, modes, k):
    """Least-squares weight of E^k in values, fitted with a constant."""
    design = np.column_stack([np.ones_like(modes), modes**k])
    condition = np.linalg.cond(design)
    if condition > CONDITION_LIMIT:
        raise IllConditioned(f"Sampling matrix for order {k} has condition number {condition:.3e}")
    solution, *_ = np.linalg.lstsq(design, values, rcond=None)
    return float(solution[1])


def extract_recurrence(eq, p, x0, exponent, k_max, *, seed=0):
    """Recover F and the brackets of orders 2..k_max from the residual alone.

    The residual is a cubic polynomial in the coefficients, so a mixed
    difference with steps ±h isolates one product exactly.  The E^k weight
    of that difference is then read off by least squares over samples with
    E = e^{exponent z} spread across [0.5, 1].
    """
    eq = EquationId.from_tag(eq)
    if k_max < 2:
        raise InvalidParameters(f"Need k_max ≥ 2, got {k_max}")
    if exponent == 0.0:
        raise InvalidParameters("Exponent must be nonzero")
    rng = np.random.default_rng(seed)
    modes = np.linspace(0.5, 1.0, max(3 * k_max, 8))
    z = np.log(modes) / exponent

    def probe(k, assigned):
        coefficients = np.zeros(k)
        for index, value in assigned.items():
            coefficients[index - 1] += value
        return _series_residual(eq, p, x0, exponent, coefficients, z)

    relations = {}
    for k in range(2, k_max + 1):
        h = float(rng.uniform(0.25, 0.75))

        def odd(s, k=k):
            return 0.5 * (probe(k, {k: s}) - probe(k, {k: -s}))

        linear = _mode_coefficient((8.0 * odd(h) - odd(2.0 * h)) / (6.0 * h), modes, k)
        brackets = {}
        for key in _keys(k):
            distinct = sorted(set(key))
            if len(key) == 2 and len(distinct) == 2:
                i, j = key
                values = sum(
                    si * sj * probe(k, {i: si * h, j: sj * h}) for si in (1.0, -1.0) for sj in (1.0, -1.0)
                ) / (4.0 * h * h)
            elif len(key) == 2:
                (i,) = distinct
                values = (probe(k, {i: h}) + probe(k, {i: -h}) - 2.0 * probe(k, {})) / (2.0 * h * h)
            elif len(distinct) == 3:
                l, m, n = key
                values = sum(
                    sl * sm * sn * probe(k, {l: sl * h, m: sm * h, n: sn * h})
                    for sl in (1.0, -1.0)
                    for sm in (1.0, -1.0)
                    for sn in (1.0, -1.0)
                ) / (8.0 * h**3)
            elif len(distinct) == 2:
                double = max(distinct, key=key.count)
                single = min(distinct, key=key.count)

                def spread(s, double=double, single=single, k=k):
                    return probe(k, {double: s, single: h}) - probe(k, {double: s, single: -h})

                values = (spread(h) + spread(-h) - 2.0 * spread(0.0)) / (4.0 * h**3)
            else:
                (l,) = distinct

                def odd_l(s, l=l, k=k):
                    return 0.5 * (probe(k, {l: s}) - probe(k, {l: -s}))

                values = (odd_l(2.0 * h) - 2.0 * odd_l(h)) / (6.0 * h**3)
            # The residual carries F a_k minus the right-hand side
            brackets[key] = -_mode_coefficient(values, modes, k)
        relations[k] = OrderRelation(k, linear, brackets)
    return relations


@dataclass(frozen=True)
class BracketComparison:
    mismatches: tuple
    checked: int
    worst: float

    @property
    def passed(self):
        return not self.mismatches


def compare_with_recurrence(eq, p, x0, exponent, k_max, *, convention=series.VALIDATED, seed=0):
    """Oracle brackets against series.recurrence_terms and series.linear_factor."""
    eq = EquationId.from_tag(eq)
    relations = extract_recurrence(eq, p, x0, exponent, k_max, seed=seed)
    mismatches = []
    checked = 0
    worst = 0.0
    for k, relation in relations.items():
        implemented = series.recurrence_terms(eq, p, x0, exponent, k, convention)
        expected = [("linear", relation.linear, series.linear_factor(eq, p, x0, k * exponent))]
        expected += [(key, value, implemented.get(key, 0.0)) for key, value in relation.brackets.items()]
        for key, found, wanted in expected:
            checked += 1
            error = abs(found - wanted) / max(1.0, abs(found))
            worst = max(worst, error)
            if error > BRACKET_TOLERANCE:
                mismatches.append((k, key, found, wanted))
    if mismatches:
        logger.warning("%d of %d %s brackets disagree with the residual", len(mismatches), checked, eq.label)
    return BracketComparison(tuple(mismatches), checked, worst)


@dataclass(frozen=True, eq=False)
class ResidualScan:
    max_residual: float
    z: np.ndarray
    residual: np.ndarray
    near_zero: np.ndarray


def _decay_rate(sol):
    if isinstance(sol, series.ExactG0Solution):
        return None
    return min(abs(sol.right.exponent), abs(sol.left.exponent))


def default_grid(sol, count=2001):
    rate = _decay_rate(sol)
    if rate is None:
        return np.linspace(-5.0, 5.0, count)
    extent = max(10.0, 4.0 / rate)
    return np.linspace(-extent, extent, count)


def residual_scan(sol, z_grid=None):
    """Residual along z; the maximum skips |z| < 2/|exponent| for series solutions."""
    z = default_grid(sol) if z_grid is None else np.asarray(z_grid, dtype=float)
    residual = np.abs(traveling_residual(sol.equation, sol.params, *sol.derivatives(z)))
    rate = _decay_rate(sol)
    if rate is None:
        tail = np.ones_like(z, dtype=bool)
    else:
        tail = np.abs(z) >= 2.0 / rate
    near = ~tail
    return ResidualScan(
        max_residual=float(residual[tail].max()) if tail.any() else 0.0,
        z=z,
        residual=residual,
        near_zero=np.column_stack([z[near], residual[near]]),
    )


@dataclass(frozen=True, eq=False)
class ShotResult:
    saddle: tuple
    offset: float
    scale: float
    unstable: tuple
    stable: tuple
    returned: tuple
    distance: float = None
    escaped: tuple = field(default_factory=tuple)

    @property
    def homoclinic(self):
        return any(self.returned)

    @property
    def trajectory(self):
        """The first unstable branch that came back, else the first one."""
        for branch, back in zip(self.unstable, self.returned):
            if back:
                return branch
        return self.unstable[0]


def _returns(points, saddle, scale):
    distance = np.hypot(points[:, 0] - saddle[0], points[:, 1] - saddle[1])
    away = np.nonzero(distance > 0.1 * scale)[0]
    if not len(away):
        return False
    return bool(np.any(distance[away[0] :] < 0.02 * scale))


def _series_points(sol, count=400):
    rate = _decay_rate(sol)
    z = np.linspace(0.0, 30.0 / rate, count)
    right = np.column_stack(sol.right.derivatives(z)[:2])
    left = np.column_stack(sol.left.derivatives(-z)[:2])
    return np.vstack([right, left])


def manifold_shoot(eq, p, x0, offset=1e-6, tol=1e-9, *, series_solution=None, window=None, strict=False):
    """Integrate the invariant manifolds of the saddle x0 and test for a homoclinic return."""
    eq = EquationId.from_tag(eq)
    if not 1e-8 <= offset <= 1e-4:
        raise InvalidParameters(f"Shooting offset {offset} outside [1e-8, 1e-4]")
    x0 = series.snap_base(eq, p, x0)
    info = classify_equilibrium(eq, p, (x0, 0.0))
    if info.kind != SADDLE or info.origin != REGULAR:
        raise NotASaddle(f"x0={x0:.10g} is a {info.origin} {info.kind}, not a regular saddle")
    saddle = np.array(info.location)

    others = [other.location for other in all_equilibria(eq, p) if other.location != info.location]
    distances = [math.hypot(x - saddle[0], y - saddle[1]) for x, y in others]
    scale = min(distances) if distances else max(1.0, abs(x0))

    values, vectors = np.linalg.eig(build_system(eq, p).regularized_jacobian(*saddle))
    order = np.argsort(values.real)
    rate = float(values.real[order[-1]])
    stable_vector, unstable_vector = vectors[:, order[0]].real, vectors[:, order[-1]].real

    series_points = None
    if series_solution is not None:
        series_points = _series_points(series_solution)
    if window is None:
        reach = 5.0 * scale
        xmin, xmax, ymin, ymax = saddle[0] - reach, saddle[0] + reach, -reach, reach
        if series_points is not None:
            margin = 0.1 * scale
            xmin = min(xmin, series_points[:, 0].min() - margin)
            xmax = max(xmax, series_points[:, 0].max() + margin)
            ymin = min(ymin, series_points[:, 1].min() - margin)
            ymax = max(ymax, series_points[:, 1].max() + margin)
        window = (xmin, xmax, ymin, ymax)

    span = (2.0 * math.log(scale / offset) + 40.0) / rate
    unstable, stable, escaped = [], [], []
    for vector, duration, bucket in ((unstable_vector, span, unstable), (stable_vector, -span, stable)):
        for sign in (1.0, -1.0):
            start = saddle + sign * offset * vector
            trajectory = integrate_regularized(
                eq, p, start, (0.0, duration), tol, window=window, strict=strict, detect_closed=False
            )
            bucket.append(trajectory)
            escaped.append(trajectory.terminated_by == DIVERGENCE)
    returned = tuple(_returns(branch.resample(SHOT_SAMPLES), saddle, scale) for branch in unstable)

    distance = None
    if series_points is not None:
        shot = np.vstack([branch.resample(SHOT_SAMPLES) for branch in unstable + stable])
        distance = float(directed_hausdorff(series_points, shot)[0])
    logger.info("Shot from %s x0=%.10g: returned=%s distance=%s", eq.label, x0, returned, distance)
    return ShotResult(
        saddle=tuple(saddle),
        offset=offset,
        scale=scale,
        unstable=tuple(unstable),
        stable=tuple(stable),
        returned=returned,
        distance=distance,
        escaped=tuple(escaped),
    )


def regular_saddles(eq, p):
    saddles = []
    for info in regular_equilibria(eq, p):
        if info.kind != SADDLE or info.origin != REGULAR:
            continue
        try:
            series.saddle_eigenvalues(eq, p, info.phi)
        except (NotASaddle, SingularDegeneracy):
            continue
        saddles.append(info.phi)
    return saddles


def select_saddle(eq, p, *, offset=1e-6, tol=1e-9):
    """x0 for `--x0 auto`: the returning regular saddle of smallest |x0|."""
    eq = EquationId.from_tag(eq)
    saddles = regular_saddles(eq, p)
    if not saddles:
        raise NoSaddleFound(f"{eq.label} has no regular saddle at c={p.c}, g={p.g}")
    returning = [x0 for x0 in saddles if manifold_shoot(eq, p, x0, offset, tol).homoclinic]
    if not returning:
        raise NoSaddleFound(f"No saddle of {eq.label} at c={p.c}, g={p.g} has a homoclinic return")
    return min(returning, key=abs)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    limit: float


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    @property
    def failures(self):
        return [check for check in self.checks if not check.passed]


def verify_solution(sol, *, shoot=False, seed=0):
    eq, p = sol.equation, sol.params
    checks = []
    if isinstance(sol, series.ExactG0Solution):
        scan = residual_scan(sol)
        limit = EXACT_RESIDUAL_LIMIT * max(1.0, float(np.max(np.abs(sol(scan.z)))))
        checks.append(Check("residual", scan.max_residual <= limit, scan.max_residual, limit))
        return VerificationReport(tuple(checks))

    defect = max(series.rebuild_defect(sol.right, eq, p), series.rebuild_defect(sol.left, eq, p))
    checks.append(Check("rebuild", defect <= 1e-12, defect, 1e-12))

    k_max = min(sol.right.M, 10)
    sides = [sol.right] if eq.reversible else [sol.right, sol.left]
    worst = 0.0
    for branch in sides:
        comparison = compare_with_recurrence(
            eq, p, branch.x0, branch.exponent, k_max, convention=branch.convention, seed=seed
        )
        worst = max(worst, comparison.worst)
    checks.append(Check("brackets", worst <= BRACKET_TOLERANCE, worst, BRACKET_TOLERANCE))

    scan = residual_scan(sol)
    checks.append(Check("residual", scan.max_residual <= RESIDUAL_TAIL_LIMIT, scan.max_residual, RESIDUAL_TAIL_LIMIT))

    limit = 1e-9 * max(1.0, abs(sol.junction_value))
    checks.append(Check("junction", sol.junction_jump <= limit, sol.junction_jump, limit))

    if shoot:
        shot = manifold_shoot(eq, p, sol.x0, series_solution=sol)
        checks.append(Check("shot", shot.distance <= SHOT_DISTANCE_LIMIT, shot.distance, SHOT_DISTANCE_LIMIT))
    return VerificationReport(tuple(checks))
