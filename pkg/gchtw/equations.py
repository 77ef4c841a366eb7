"""Traveling-wave reductions of the three generalized Camassa-Holm equations.

With u(x, t) = φ(z), z = x - ct, each equation integrates once to a second
order ODE of the form

    f(φ, φ') φ'' = Q(φ, φ')

which we keep as a planar system dφ/dz = y, dy/dz = Q/f.  Multiplying through
by f gives the regularized system dφ/dζ = y f, dy/dζ = Q, which is smooth
across the singular set f = 0.

Both Q and f are stored as two dimensional coefficient arrays, indexed
[i, j] for the monomial φ**i * y**j, so that numpy.polynomial can evaluate
and differentiate them.
"""

import enum
from dataclasses import dataclass
from functools import lru_cache
import logging
import math

import numpy as np
from numpy.polynomial import polynomial as P

from gchtw.exceptions import InvalidParameters

logger = logging.getLogger(__name__)

TYPE_ONE = "type-one"
TYPE_TWO = "type-two"

VERTICAL_LINE = "vertical-line"
STRAIGHT_LINE = "straight-line"
HYPERBOLA = "hyperbola"

# Roots closer than this (relative) are reported once with multiplicity two.
ROOT_MERGE_TOLERANCE = 1e-9


class EquationId(enum.Enum):
    GCH1 = "gch1"
    GCH2 = "gch2"
    GCH3 = "gch3"

    @classmethod
    def from_tag(cls, tag):
        if isinstance(tag, cls):
            return tag
        normalized = str(tag).strip().lower().replace("-", "").replace("_", "")
        aliases = {"gchi": "gch1", "gchii": "gch2", "gchiii": "gch3"}
        normalized = aliases.get(normalized, normalized)
        try:
            return cls(normalized)
        except ValueError:
            raise InvalidParameters(f"Unknown equation tag “{tag}”")

    @property
    def label(self):
        return {"gch1": "GCH-I", "gch2": "GCH-II", "gch3": "GCH-III"}[self.value]

    @property
    def reversible(self):
        # Invariant under (φ, φ', φ'') -> (φ, -φ', φ'')
        return self is not EquationId.GCH2


@dataclass(frozen=True)
class WaveParams:
    c: float
    g: float

    def __post_init__(self):
        c, g = float(self.c), float(self.g)
        if not (math.isfinite(c) and math.isfinite(g)):
            raise InvalidParameters(f"Wave parameters must be finite (c={self.c}, g={self.g})")
        if c == 0.0:
            raise InvalidParameters("The wave speed c must be nonzero")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "g", g)


def _frozen(array):
    array = np.array(array, dtype=float)
    array.flags.writeable = False
    return array


def _monomials(coefficients):
    return tuple(
        (float(coefficients[i, j]), i, j) for i, j in zip(*np.nonzero(coefficients))
    )


def _evaluate(monomials, phi, y):
    # A handful of terms; cheaper than polyval2d inside the integrator loop
    total = 0.0
    for coefficient, i, j in monomials:
        total = total + coefficient * phi**i * y**j
    return total


@dataclass(frozen=True, eq=False)
class PlanarSystem:
    equation: EquationId
    params: WaveParams
    numerator: np.ndarray
    denominator: np.ndarray
    system_class: str

    def __post_init__(self):
        object.__setattr__(self, "numerator", _frozen(self.numerator))
        object.__setattr__(self, "denominator", _frozen(self.denominator))
        terms = {
            "_q": self.numerator,
            "_f": self.denominator,
            "_q_phi": P.polyder(self.numerator, axis=0),
            "_q_y": P.polyder(self.numerator, axis=1),
            "_f_phi": P.polyder(self.denominator, axis=0),
            "_f_y": P.polyder(self.denominator, axis=1),
        }
        for name, coefficients in terms.items():
            object.__setattr__(self, name, _monomials(coefficients))

    def numerator_at(self, phi, y):
        return _evaluate(self._q, phi, y)

    def denominator_at(self, phi, y):
        return _evaluate(self._f, phi, y)

    def singular_rhs(self, phi, y):
        return y, self.numerator_at(phi, y) / self.denominator_at(phi, y)

    def regularized_rhs(self, phi, y):
        return np.array([y * self.denominator_at(phi, y), self.numerator_at(phi, y)])

    def regularized_jacobian(self, phi, y):
        f = self.denominator_at(phi, y)
        return np.array(
            [
                [y * _evaluate(self._f_phi, phi, y), f + y * _evaluate(self._f_y, phi, y)],
                [_evaluate(self._q_phi, phi, y), _evaluate(self._q_y, phi, y)],
            ],
            dtype=float,
        )

    def integrability(self, phi, y):
        """y ∂f/∂φ + ∂Q/∂y, identically zero for type-two systems."""
        return y * _evaluate(self._f_phi, phi, y) + _evaluate(self._q_y, phi, y)


@dataclass(frozen=True)
class SingularSet:
    kind: str
    coefficients: tuple
    Y: float = None
    points: tuple = ()
    # GCH-III with g = 0: every point of the hyperbola is an equilibrium
    degenerate: bool = False

    def defect(self, phi, y):
        """How far (phi, y) is from satisfying the defining equation."""
        if self.kind == VERTICAL_LINE:
            (phi_s,) = self.coefficients
            return phi - phi_s
        if self.kind == STRAIGHT_LINE:
            a, b, d = self.coefficients
            return a * phi + b * y + d
        (c,) = self.coefficients
        return phi * phi - y * y - c

    def curve(self, window, samples=400):
        """Polylines of the set clipped to window = (xmin, xmax, ymin, ymax)."""
        xmin, xmax, ymin, ymax = window
        if self.kind == VERTICAL_LINE:
            (phi_s,) = self.coefficients
            if not xmin <= phi_s <= xmax:
                return []
            return [np.array([[phi_s, ymin], [phi_s, ymax]])]
        if self.kind == STRAIGHT_LINE:
            a, b, d = self.coefficients
            phi = np.linspace(xmin, xmax, samples)
            y = -(a * phi + d) / b
            inside = (y >= ymin) & (y <= ymax)
            return [np.column_stack([phi[inside], y[inside]])] if inside.any() else []
        (c,) = self.coefficients
        pieces = []
        if c > 0:
            # φ = ±sqrt(c + y²), parameterized by y
            y = np.linspace(ymin, ymax, samples)
            for sign in (1.0, -1.0):
                phi = sign * np.sqrt(c + y * y)
                inside = (phi >= xmin) & (phi <= xmax)
                if inside.any():
                    pieces.append(np.column_stack([phi[inside], y[inside]]))
        else:
            phi = np.linspace(xmin, xmax, samples)
            for sign in (1.0, -1.0):
                y = sign * np.sqrt(phi * phi - c)
                inside = (y >= ymin) & (y <= ymax)
                if inside.any():
                    pieces.append(np.column_stack([phi[inside], y[inside]]))
        return pieces


@dataclass(frozen=True)
class Root:
    value: float
    multiplicity: int = 1


@lru_cache(maxsize=256)
def build_system(eq, p):
    eq = EquationId.from_tag(eq)
    c, g = p.c, p.g
    if eq is EquationId.GCH1:
        numerator = np.zeros((3, 3))
        numerator[0, 0], numerator[1, 0], numerator[2, 0], numerator[0, 2] = g, c, 4.0, -2.0
        denominator = np.zeros((2, 1))
        denominator[0, 0], denominator[1, 0] = c, 2.0
        system_class = TYPE_ONE
    elif eq is EquationId.GCH2:
        numerator = np.zeros((3, 3))
        numerator[0, 0], numerator[1, 0], numerator[2, 0], numerator[0, 2] = g, c, 8.0, -2.0
        denominator = np.zeros((2, 2))
        denominator[0, 0], denominator[1, 0], denominator[0, 1] = c, 4.0, -2.0
        system_class = TYPE_TWO
    else:
        numerator = np.zeros((4, 3))
        numerator[0, 0], numerator[1, 0], numerator[3, 0], numerator[1, 2] = -g, c, -1.0, 1.0
        denominator = np.zeros((3, 3))
        denominator[0, 0], denominator[2, 0], denominator[0, 2] = c, -1.0, 1.0
        system_class = TYPE_TWO
    return PlanarSystem(eq, p, numerator, denominator, system_class)


def singular_set(eq, p):
    eq = EquationId.from_tag(eq)
    c, g = p.c, p.g
    if eq is EquationId.GCH1:
        phi_s = -c / 2.0
        # Q(φ_s, ±sqrt(Y)) = 0 on the line
        Y = (4.0 * phi_s * phi_s + c * phi_s + g) / 2.0
        points = ()
        if Y > 0:
            root_y = math.sqrt(Y)
            points = ((phi_s, -root_y), (phi_s, root_y))
        return SingularSet(VERTICAL_LINE, (phi_s,), Y=Y, points=points)
    if eq is EquationId.GCH2:
        point = ((2.0 * g - c * c) / (6.0 * c), (c * c + 4.0 * g) / (6.0 * c))
        return SingularSet(STRAIGHT_LINE, (4.0, -2.0, c), points=(point,))
    return SingularSet(HYPERBOLA, (c,), degenerate=(g == 0.0))


def traveling_residual(eq, p, phi, dphi, d2phi):
    """LHS - RHS of the traveling ODE; zero on true solutions.

    Accepts scalars or numpy arrays.
    """
    eq = EquationId.from_tag(eq)
    c, g = p.c, p.g
    phi = np.asarray(phi, dtype=float)
    dphi = np.asarray(dphi, dtype=float)
    d2phi = np.asarray(d2phi, dtype=float)
    if eq is EquationId.GCH1:
        result = (c + 2.0 * phi) * d2phi - (4.0 * phi * phi - 2.0 * dphi * dphi + c * phi + g)
    elif eq is EquationId.GCH2:
        result = (c + 4.0 * phi - 2.0 * dphi) * d2phi - (8.0 * phi * phi - 2.0 * dphi * dphi + c * phi + g)
    else:
        # Q = φ f - g, so the residual factors through φ'' - φ
        result = (c - phi * phi + dphi * dphi) * (d2phi - phi) + g
    return result if result.ndim else float(result)


def equilibrium_polynomial(eq, p):
    """Coefficients, lowest degree first, of the polynomial whose real roots are the regular equilibria."""
    eq = EquationId.from_tag(eq)
    if eq is EquationId.GCH1:
        return np.array([p.g, p.c, 4.0])
    if eq is EquationId.GCH2:
        return np.array([p.g, p.c, 8.0])
    return np.array([p.g, -p.c, 0.0, 1.0])


def three_root_bound(c):
    """|g| below this gives φ³ - cφ + g three simple real roots (c > 0)."""
    if c <= 0:
        return 0.0
    return (2.0 * c / 3.0) * math.sqrt(c / 3.0)


def _quadratic_roots(a, b, c):
    disc = b * b - 4.0 * a * c
    if disc < 0:
        return []
    root_disc = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(root_disc, b))
    if q == 0.0:
        return [0.0, 0.0]
    return [q / a, c / q]


def _cubic_roots(p_coef, q_coef):
    """Real roots of t³ + p t + q."""
    if p_coef == 0.0:
        return [math.copysign(abs(q_coef) ** (1.0 / 3.0), -q_coef)] * (3 if q_coef == 0.0 else 1)
    delta = -(4.0 * p_coef**3 + 27.0 * q_coef * q_coef)
    if delta > 0:
        m = 2.0 * math.sqrt(-p_coef / 3.0)
        argument = (3.0 * q_coef / (2.0 * p_coef)) * math.sqrt(-3.0 / p_coef)
        theta = math.acos(min(1.0, max(-1.0, argument))) / 3.0
        return [m * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
    if delta == 0:
        simple = 3.0 * q_coef / p_coef
        double = -3.0 * q_coef / (2.0 * p_coef)
        return [simple, double, double]
    if p_coef < 0:
        argument = (-3.0 * abs(q_coef) / (2.0 * p_coef)) * math.sqrt(-3.0 / p_coef)
        return [-2.0 * math.copysign(1.0, q_coef) * math.sqrt(-p_coef / 3.0) * math.cosh(math.acosh(argument) / 3.0)]
    argument = (3.0 * q_coef / (2.0 * p_coef)) * math.sqrt(3.0 / p_coef)
    return [-2.0 * math.sqrt(p_coef / 3.0) * math.sinh(math.asinh(argument) / 3.0)]


def _polish(coefficients, root):
    derivative = P.polyder(coefficients)
    slope = P.polyval(root, derivative)
    if slope != 0.0:
        candidate = root - P.polyval(root, coefficients) / slope
        if abs(P.polyval(candidate, coefficients)) <= abs(P.polyval(root, coefficients)):
            return float(candidate)
    return float(root)


def _merge(values):
    roots = []
    for value in sorted(values):
        if roots and abs(value - roots[-1].value) <= ROOT_MERGE_TOLERANCE * max(1.0, abs(value)):
            previous = roots.pop()
            roots.append(Root(previous.value, previous.multiplicity + 1))
        else:
            roots.append(Root(value))
    return roots


def equilibria(eq, p):
    """Real roots of the equilibrium polynomial, ascending, with multiplicity."""
    eq = EquationId.from_tag(eq)
    coefficients = equilibrium_polynomial(eq, p)
    if eq is EquationId.GCH3:
        raw = _cubic_roots(-p.c, p.g)
    else:
        raw = _quadratic_roots(coefficients[2], coefficients[1], coefficients[0])
    polished = [_polish(coefficients, r) for r in raw]
    roots = _merge(polished)
    logger.debug("%s equilibria at c=%g, g=%g: %s", eq.label, p.c, p.g, roots)
    return roots
