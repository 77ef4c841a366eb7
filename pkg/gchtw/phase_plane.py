"""Phase-plane analysis of the regularized traveling-wave systems."""

from dataclasses import dataclass, field
import logging
import math

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import solve_ivp
from scipy.optimize import bisect

from gchtw.equations import (
    EquationId,
    WaveParams,
    build_system,
    equilibria,
    singular_set,
    three_root_bound,
)
from gchtw.exceptions import (
    DivergenceError,
    InvalidParameters,
    NoRoot,
    NotAnEquilibrium,
    UnsupportedEquation,
)

logger = logging.getLogger(__name__)

SADDLE = "saddle"
CENTER = "center"
DEGENERATE = "degenerate"

REGULAR = "regular"
SINGULAR = "singular"

TIME_LIMIT = "time-limit"
SINGULAR_CROSSING = "singular-crossing"
DIVERGENCE = "divergence"
CLOSED_ORBIT = "closed-orbit-detected"

PERIODIC_CUSPON = "periodic-cuspon"
SOLITARY_PEAKON = "solitary-peakon"
NO_SINGULAR_WAVE = "none"

ARCH = "arch"
TRIANGLE = "triangle"

SNAP_RADIUS = 1e-3
EQUILIBRIUM_RESIDUAL = 1e-8
DEGENERATE_DETERMINANT = 1e-10
ESCAPE_NORM = 1e6
# Return gap accepted beyond 10·tol, as a fraction of the orbit extent
RETURN_GAP_FRACTION = 1e-4


@dataclass(frozen=True)
class EquilibriumInfo:
    location: tuple
    kind: str
    eigenvalues: tuple
    determinant: float
    trace: float
    origin: str

    @property
    def phi(self):
        return self.location[0]


def _snap(system, point):
    """Newton iteration from point to a zero of the regularized field."""
    start = point.copy()
    for _ in range(60):
        residual = system.regularized_rhs(*point)
        if np.max(np.abs(residual)) <= 1e-15 * max(1.0, np.max(np.abs(point))):
            break
        jacobian = system.regularized_jacobian(*point)
        step = np.linalg.lstsq(jacobian, -residual, rcond=None)[0]
        point = point + step
        if math.hypot(*(point - start)) > SNAP_RADIUS:
            return None
        if np.max(np.abs(step)) <= 1e-17 * max(1.0, np.max(np.abs(point))):
            break
    return point


def classify_equilibrium(eq, p, location):
    eq = EquationId.from_tag(eq)
    system = build_system(eq, p)
    requested = np.asarray(location, dtype=float)
    point = _snap(system, requested)
    if point is None:
        raise NotAnEquilibrium(f"No equilibrium of {eq.label} within {SNAP_RADIUS} of {tuple(requested)}")
    residual = float(np.max(np.abs(system.regularized_rhs(*point))))
    if residual > EQUILIBRIUM_RESIDUAL:
        raise NotAnEquilibrium(f"Residual {residual:.3e} at {tuple(point)} exceeds {EQUILIBRIUM_RESIDUAL}")

    jacobian = system.regularized_jacobian(*point)
    determinant = float(jacobian[0, 0] * jacobian[1, 1] - jacobian[0, 1] * jacobian[1, 0])
    trace = float(jacobian[0, 0] + jacobian[1, 1])
    scale = max(float(np.max(np.abs(jacobian))) ** 2, np.finfo(float).tiny)
    if abs(determinant) <= DEGENERATE_DETERMINANT * scale:
        kind = DEGENERATE
    elif determinant < 0:
        kind = SADDLE
    else:
        kind = CENTER
        if abs(trace) > 1e-8 * math.sqrt(scale):
            logger.warning("Equilibrium %s has positive determinant but trace %.3e", tuple(point), trace)
    eigenvalues = sorted(np.linalg.eigvals(jacobian), key=lambda v: (-v.real, -v.imag))
    on_singular_set = abs(system.denominator_at(*point)) <= 1e-9 * max(1.0, abs(p.c))
    return EquilibriumInfo(
        location=(float(point[0]), float(point[1])),
        kind=kind,
        eigenvalues=tuple(complex(v) for v in eigenvalues),
        determinant=determinant,
        trace=trace,
        origin=SINGULAR if on_singular_set else REGULAR,
    )


def regular_equilibria(eq, p):
    return [classify_equilibrium(eq, p, (root.value, 0.0)) for root in equilibria(eq, p)]


def singular_equilibria(eq, p):
    classified = []
    for point in singular_set(eq, p).points:
        try:
            classified.append(classify_equilibrium(eq, p, point))
        except NotAnEquilibrium:
            logger.debug("Singular point %s is not an isolated equilibrium", point)
    return classified


def all_equilibria(eq, p):
    return regular_equilibria(eq, p) + singular_equilibria(eq, p)


@dataclass(frozen=True, eq=False)
class FirstIntegral:
    equation: EquationId
    params: WaveParams
    coefficients: np.ndarray

    def __call__(self, phi, y):
        return P.polyval2d(phi, y, self.coefficients)

    def gradient(self, phi, y):
        return (
            P.polyval2d(phi, y, P.polyder(self.coefficients, axis=0)),
            P.polyval2d(phi, y, P.polyder(self.coefficients, axis=1)),
        )

    def flow_derivative(self, phi, y):
        """∇H · (regularized field); vanishes identically."""
        h_phi, h_y = self.gradient(phi, y)
        d_phi, d_y = build_system(self.equation, self.params).regularized_rhs(phi, y)
        return h_phi * d_phi + h_y * d_y


def first_integral(eq, p):
    eq = EquationId.from_tag(eq)
    c, g = p.c, p.g
    if eq is EquationId.GCH1:
        # y²G² + 2∫GF dφ with G = c + 2φ, F = -(4φ² + cφ + g)
        h = np.zeros((5, 3))
        h[0, 2], h[1, 2], h[2, 2] = c * c, 4.0 * c, 4.0
        h[1, 0], h[2, 0], h[3, 0], h[4, 0] = -2.0 * c * g, -(c * c + 2.0 * g), -4.0 * c, -4.0
    elif eq is EquationId.GCH2:
        h = np.zeros((4, 4))
        h[0, 2], h[1, 2], h[0, 3] = c / 2.0, 2.0, -2.0 / 3.0
        h[1, 0], h[2, 0], h[3, 0] = -g, -c / 2.0, -8.0 / 3.0
    else:
        h = np.zeros((5, 5))
        h[0, 2], h[2, 2], h[0, 4] = c / 2.0, -0.5, 0.25
        h[1, 0], h[2, 0], h[4, 0] = g, -c / 2.0, 0.25
    return FirstIntegral(eq, p, h)


@dataclass(frozen=True, eq=False)
class Trajectory:
    zeta: np.ndarray
    phi: np.ndarray
    y: np.ndarray
    h_drift: float
    terminated_by: str
    singular_crossings: np.ndarray = field(default_factory=lambda: np.empty(0))
    dense: object = None

    @property
    def samples(self):
        return np.column_stack([self.zeta, self.phi, self.y])

    @property
    def points(self):
        return np.column_stack([self.phi, self.y])

    @property
    def path_length(self):
        return float(np.sum(np.hypot(np.diff(self.phi), np.diff(self.y))))

    def resample(self, count):
        if self.dense is None or len(self.zeta) < 2:
            return self.points
        states = self.dense(np.linspace(self.zeta[0], self.zeta[-1], count))
        return states.T


def _nearest_center(eq, p, start):
    centers = [info.location for info in all_equilibria(eq, p) if info.kind == CENTER]
    if not centers:
        return None
    return min(centers, key=lambda point: math.hypot(point[0] - start[0], point[1] - start[1]))


def _winding(points, center):
    angles = np.unwrap(np.arctan2(points[:, 1] - center[1], points[:, 0] - center[0]))
    return float(np.max(np.abs(angles - angles[0])))


def integrate_regularized(
    eq,
    p,
    start,
    span,
    tol=1e-10,
    *,
    window=None,
    center=None,
    stop_at_singular=False,
    strict=True,
    max_step=np.inf,
    detect_closed=True,
):
    """Integrate dφ/dζ = y f, dy/dζ = Q from start over span = (ζ0, ζ1).

    Closed orbits are recognized when the trajectory comes back within
    max(10 tol, 1e-4 of its extent) of the start after winding at least
    half a turn about the nearest center.  A window (xmin, xmax, ymin, ymax)
    replaces the default escape radius.
    """
    eq = EquationId.from_tag(eq)
    if not 1e-12 <= tol <= 1e-3:
        raise InvalidParameters(f"Integrator tolerance {tol} outside [1e-12, 1e-3]")
    start = np.asarray(start, dtype=float)
    if start.shape != (2,) or not np.all(np.isfinite(start)):
        raise InvalidParameters(f"Start point must be a finite (φ, y) pair, got {start}")
    zeta0, zeta1 = float(span[0]), float(span[1])
    if zeta0 == zeta1:
        raise InvalidParameters("Integration span is empty")
    system = build_system(eq, p)
    first = first_integral(eq, p)
    forward = zeta1 > zeta0

    def rhs(_, state):
        return system.regularized_rhs(state[0], state[1])

    def crossing(_, state):
        return system.denominator_at(state[0], state[1])

    crossing.terminal = stop_at_singular

    if window is None:

        def escape(_, state):
            return ESCAPE_NORM - math.hypot(state[0], state[1])

    else:
        xmin, xmax, ymin, ymax = window

        def escape(_, state):
            return min(state[0] - xmin, xmax - state[0], state[1] - ymin, ymax - state[1])

    escape.terminal = True
    escape.direction = -1

    def returning(_, state):
        return float(np.dot(state - start, rhs(None, state)))

    # A local minimum of the distance to the start, in the direction of travel
    returning.direction = 1 if forward else -1

    solution = solve_ivp(
        rhs,
        (zeta0, zeta1),
        start,
        method="RK45",
        rtol=tol,
        atol=tol * 1e-2,
        dense_output=True,
        events=[crossing, escape, returning] if detect_closed else [crossing, escape],
        max_step=max_step,
    )
    zeta = solution.t
    states = solution.y
    terminated_by = TIME_LIMIT
    if solution.status == -1:
        logger.debug("Integrator gave up at ζ=%g: %s", zeta[-1], solution.message)
        terminated_by = DIVERGENCE
    elif solution.status == 1:
        if len(solution.t_events[1]):
            terminated_by = DIVERGENCE
        elif len(solution.t_events[0]):
            terminated_by = SINGULAR_CROSSING

    returns = solution.t_events[2] if detect_closed else ()
    if len(returns):
        if center is None:
            center = _nearest_center(eq, p, start)
        for zeta_return, state_return in zip(returns, solution.y_events[2]):
            before = (zeta <= zeta_return) if forward else (zeta >= zeta_return)
            if not before.any():
                continue
            grid = np.linspace(zeta0, zeta_return, max(200, 8 * int(before.sum())))
            path = solution.sol(grid).T
            extent = float(np.max(np.hypot(path[:, 0] - start[0], path[:, 1] - start[1])))
            gap = math.hypot(*(state_return - start))
            if gap > max(10.0 * tol, RETURN_GAP_FRACTION * extent):
                continue
            pivot = center if center is not None else tuple(path.mean(axis=0))
            if _winding(path, pivot) < math.pi:
                continue
            zeta = np.append(zeta[before], zeta_return)
            states = np.column_stack([states[:, before], state_return])
            terminated_by = CLOSED_ORBIT
            break

    if terminated_by == DIVERGENCE and strict:
        raise DivergenceError(f"{eq.label} trajectory from {tuple(start)} escaped at ζ={zeta[-1]:.6g}")

    h_values = first(states[0], states[1])
    crossings = solution.t_events[0]
    crossings = crossings[(crossings <= zeta[-1]) if forward else (crossings >= zeta[-1])]
    trajectory = Trajectory(
        zeta=zeta,
        phi=states[0].copy(),
        y=states[1].copy(),
        h_drift=float(np.max(np.abs(h_values - h_values[0]))),
        terminated_by=terminated_by,
        singular_crossings=crossings,
        dense=solution.sol,
    )
    logger.debug(
        "%s trajectory from %s: %s, H drift %.3e over path length %.4g",
        eq.label,
        tuple(start),
        terminated_by,
        trajectory.h_drift,
        trajectory.path_length,
    )
    return trajectory


def trace_level_set(value, gradient, start, step, *, level=0.0, heading=None, max_steps=20000, stop=None):
    """Predictor-corrector continuation of the curve value(φ, y) = level.

    Each step moves along the unit tangent and then returns to the curve by
    Newton iterations along the gradient.
    """
    point = np.asarray(start, dtype=float)
    previous = None if heading is None else np.asarray(heading, dtype=float)
    points = [point]
    for _ in range(max_steps):
        g_phi, g_y = gradient(*point)
        tangent = np.array([g_y, -g_phi], dtype=float)
        norm = math.hypot(*tangent)
        if norm == 0.0:
            break
        tangent /= norm
        if previous is not None and tangent @ previous < 0:
            tangent = -tangent
        candidate = point + step * tangent
        for _ in range(8):
            g_phi, g_y = gradient(*candidate)
            g_squared = g_phi * g_phi + g_y * g_y
            if g_squared == 0.0:
                break
            delta = (value(*candidate) - level) / g_squared
            candidate = candidate - delta * np.array([g_phi, g_y])
            if abs(delta) * math.sqrt(g_squared) <= 1e-15:
                break
        points.append(candidate)
        previous = tangent
        point = candidate
        if stop is not None and stop(point):
            break
    return np.array(points)


@dataclass(frozen=True, eq=False)
class SingularWaveVerdict:
    label: str
    level: float = None
    geometry: str = None
    singular_points: tuple = ()
    center: tuple = None
    contact: tuple = None
    level_curve: np.ndarray = None
    reason: str = ""


def _between(middle, a, b):
    return min(a, b) < middle < max(a, b)


def _reduced_level_polynomial(first, phi_s, h_s):
    """q(φ) with H(φ, y) - h_s = (φ - φ_s)² (4y² + q(φ)) for GCH-I."""
    on_axis = first.coefficients[:, 0].copy()
    on_axis[0] -= h_s
    quotient, remainder = P.polydiv(on_axis, np.array([phi_s * phi_s, -2.0 * phi_s, 1.0]))
    if np.max(np.abs(remainder)) > 1e-9 * max(1.0, np.max(np.abs(on_axis))):
        logger.warning("Singular level does not factor through the line (remainder %s)", remainder)
    return quotient


def classify_singular_wave(eq, p, strict=False):
    eq = EquationId.from_tag(eq)
    if eq is EquationId.GCH2:
        return SingularWaveVerdict(NO_SINGULAR_WAVE, reason="no peakons or cuspons for GCH-II")
    if eq is EquationId.GCH3:
        if strict:
            raise UnsupportedEquation(
                "Singular-wave geometry for GCH-III needs M-wave assembly, which is not provided"
            )
        return SingularWaveVerdict(NO_SINGULAR_WAVE, reason="GCH-III singular geometry not analyzed")

    singular = singular_set(eq, p)
    if singular.Y <= 0:
        return SingularWaveVerdict(NO_SINGULAR_WAVE, reason=f"Y={singular.Y:.6g} gives no singular points")
    (phi_s,) = singular.coefficients
    root_y = math.sqrt(singular.Y)
    first = first_integral(eq, p)
    h_s = float(first(phi_s, root_y))
    regular = regular_equilibria(eq, p)
    centers = [info.phi for info in regular if info.kind == CENTER]
    saddles = [info.phi for info in regular if info.kind == SADDLE]
    level_scale = max([1.0, abs(h_s)] + [abs(float(first(x, 0.0))) for x in centers + saddles])
    evidence = dict(level=h_s, singular_points=singular.points)

    for saddle in saddles:
        if abs(float(first(saddle, 0.0)) - h_s) > 1e-6 * level_scale:
            continue
        for center in centers:
            if _between(center, saddle, phi_s):
                curve = np.array([[phi_s, -root_y], [saddle, 0.0], [phi_s, root_y]])
                return SingularWaveVerdict(
                    SOLITARY_PEAKON,
                    geometry=TRIANGLE,
                    center=(center, 0.0),
                    contact=(saddle, 0.0),
                    level_curve=curve,
                    **evidence,
                )

    reduced = _reduced_level_polynomial(first, phi_s, h_s)

    def conic(phi, y):
        return 4.0 * y * y + P.polyval(phi, reduced)

    def conic_gradient(phi, y):
        return P.polyval(phi, P.polyder(reduced)), 8.0 * y

    roots = [r.real for r in P.polyroots(reduced) if abs(r.imag) <= 1e-12 * max(1.0, abs(r))]
    for center in centers:
        far_side = [r for r in roots if (r - center) * (phi_s - center) < 0]
        if not far_side:
            continue
        foot = min(far_side, key=lambda r: abs(r - center))
        scale = max(abs(phi_s - foot), root_y)

        def stop(point, foot=foot):
            return (point[0] - phi_s) * (foot - phi_s) <= 0 or point[1] < 0

        arc = trace_level_set(conic, conic_gradient, (foot, 0.0), 1e-3 * scale, heading=(0.0, 1.0), stop=stop)
        end, before = arc[-1], arc[-2]
        if end[1] < 0 or (end[0] - phi_s) * (foot - phi_s) > 0:
            logger.debug("Level arc from %.6g turned back before the singular line", foot)
            continue
        weight = (phi_s - before[0]) / (end[0] - before[0])
        arrival = before[1] + weight * (end[1] - before[1])
        if abs(arrival - root_y) > 1e-3 * scale:
            continue
        curve = np.vstack([arc[::-1] * [1.0, -1.0], arc[1:]])
        return SingularWaveVerdict(
            PERIODIC_CUSPON,
            geometry=ARCH,
            center=(center, 0.0),
            contact=(foot, 0.0),
            level_curve=curve,
            **evidence,
        )

    return SingularWaveVerdict(
        NO_SINGULAR_WAVE, reason="no closed level component meets the singular line", **evidence
    )


@dataclass(frozen=True, eq=False)
class Portrait:
    equation: EquationId
    params: WaveParams
    window: tuple
    trajectories: tuple
    equilibria: tuple
    singular_set: object
    singular_curves: list


def default_window(eq, p):
    points = [(info.location[0], info.location[1]) for info in all_equilibria(eq, p)]
    points += list(singular_set(eq, p).points)
    if not points:
        half = max(1.0, abs(p.c))
        return (-half, half, -half, half)
    xs = [x for x, _ in points]
    ys = [y for _, y in points]
    size = max(max(xs) - min(xs), max(ys) - min(ys), 0.5 * abs(p.c), 1e-3)
    return (min(xs) - 0.5 * size, max(xs) + 0.5 * size, min(ys) - 0.5 * size, max(ys) + 0.5 * size)


def _in_window(point, window):
    xmin, xmax, ymin, ymax = window
    return xmin <= point[0] <= xmax and ymin <= point[1] <= ymax


def portrait(eq, p, window=None, seeds=16, *, seed=0, tol=1e-8, span=200.0):
    eq = EquationId.from_tag(eq)
    if window is None:
        window = default_window(eq, p)
    xmin, xmax, ymin, ymax = (float(v) for v in window)
    if not (xmax > xmin and ymax > ymin):
        raise InvalidParameters(f"Portrait window {window} has zero area")
    if seeds < 1:
        raise InvalidParameters("A portrait needs at least one seed")
    window = (xmin, xmax, ymin, ymax)
    width, height = xmax - xmin, ymax - ymin
    margin = 0.05 * max(width, height)
    bounds = (xmin - margin, xmax + margin, ymin - margin, ymax + margin)

    classified = [info for info in all_equilibria(eq, p) if _in_window(info.location, window)]
    centers = [info.location for info in classified if info.kind == CENTER]

    rng = np.random.default_rng(seed)
    per_side = math.ceil(math.sqrt(seeds))
    cells = [(i, j) for j in range(per_side) for i in range(per_side)][:seeds]
    jitter = rng.uniform(-0.25, 0.25, size=(len(cells), 2))
    starts = [
        (xmin + (i + 0.5 + dx) * width / per_side, ymin + (j + 0.5 + dy) * height / per_side)
        for (i, j), (dx, dy) in zip(cells, jitter)
    ]
    system = build_system(eq, p)
    for info in classified:
        if info.kind != SADDLE:
            continue
        _, vectors = np.linalg.eig(system.regularized_jacobian(*info.location))
        for vector in vectors.T:
            for sign in (1.0, -1.0):
                starts.append(tuple(np.asarray(info.location) + sign * 1e-4 * max(width, height) * vector.real))

    trajectories = []
    for start in starts:
        center = None
        if centers:
            center = min(centers, key=lambda point: math.hypot(point[0] - start[0], point[1] - start[1]))
        for direction in (1.0, -1.0):
            trajectories.append(
                integrate_regularized(
                    eq,
                    p,
                    start,
                    (0.0, direction * span),
                    tol,
                    window=bounds,
                    center=center,
                    strict=False,
                    max_step=span / 400.0,
                )
            )
    singular = singular_set(eq, p)
    logger.info("%s portrait: %d trajectories, %d equilibria", eq.label, len(trajectories), len(classified))
    return Portrait(eq, p, window, tuple(trajectories), tuple(classified), singular, singular.curve(window))


@dataclass(frozen=True)
class GStarResult:
    c: float
    g_star: float
    h2: float
    h2_shifted: float
    h2_published: float
    g: float = None
    level: float = None
    intersections: tuple = ()


def _middle_root(c, g):
    """Middle root of φ³ - cφ + g inside the three-root regime."""
    m = 2.0 * math.sqrt(c / 3.0)
    argument = -(3.0 * g / (2.0 * c)) * math.sqrt(3.0 / c)
    theta = math.acos(min(1.0, max(-1.0, argument))) / 3.0
    return sorted(m * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3))[1]


def _saddle_level(c, g):
    return float(first_integral(EquationId.GCH3, WaveParams(c, g))(_middle_root(c, g), 0.0))


def gstar(c, tol=1e-10, g=None):
    """g at which the level through the middle saddle of GCH-III passes (√c, 0)."""
    c = float(c)
    if not c > 0:
        raise InvalidParameters(f"g* needs c > 0, got c={c}")
    root_c = math.sqrt(c)

    def mismatch(value):
        # H(√c, 0) = g√c - c²/4
        return _saddle_level(c, value) - (value * root_c - c * c / 4.0)

    upper = three_root_bound(c)
    low, high = mismatch(0.0), mismatch(upper)
    if low * high > 0:
        raise NoRoot(f"No sign change of the g* condition on [0, {upper:.6g}] for c={c}")
    g_star = bisect(mismatch, 0.0, upper, xtol=tol)
    h2 = g_star * root_c - c * c / 4.0
    result = dict(c=c, g_star=g_star, h2=h2, h2_shifted=h2 + c * c / 4.0, h2_published=g_star * root_c / 4.0)
    if g is not None:
        g = float(g)
        if not 0.0 < g < g_star:
            raise InvalidParameters(f"Intersection points need 0 < g < g*={g_star:.10g}, got g={g}")
        level = _saddle_level(c, g)
        # On φ² - y² = c the first integral reduces to gφ - c²/4
        phi_s = (level + c * c / 4.0) / g
        y_s = math.sqrt(phi_s * phi_s - c)
        result.update(g=g, level=level, intersections=((phi_s, -y_s), (phi_s, y_s)))
    logger.info("g*(c=%g) = %.12g", c, g_star)
    return GStarResult(**result)
