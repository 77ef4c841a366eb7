"""Two-sided exponential series for homoclinic orbits at regular saddles.

A branch is φ(z) = x0 + Σ a_k e^{k α z}, k = 1..M.  The right branch (z > 0)
uses the negative eigenvalue, the left branch (z < 0) the positive one, so
both tend to x0 away from the junction at z = 0.  Substituting a branch into
the traveling ODE and collecting e^{k α z} gives

    F(kα) a_k = Σ bracket · (products of lower coefficients)

which fixes every a_k once the leading coefficient a_1 is chosen.  The
brackets below are the ones the oracle recovers numerically from the
residual.
"""

from dataclasses import dataclass, replace
import logging
import math

import numpy as np
from numpy.polynomial import polynomial as P

from gchtw.equations import EquationId, WaveParams, equilibria, traveling_residual
from gchtw.exceptions import (
    InvalidFamily,
    InvalidParameters,
    NoContinuousAssembly,
    NotASaddle,
    Resonance,
    SingularDegeneracy,
    UnsupportedEquation,
)

logger = logging.getLogger(__name__)

RIGHT = "right"
LEFT = "left"

# GCH-III sign conventions: the validated one agrees with the residual, the
# printed one negates the right-hand side and reproduces the published roots.
VALIDATED = "validated"
PRINTED = "printed"
CONVENTIONS = (VALIDATED, PRINTED)

CONTINUITY_ROOT = "continuity-root"
MIRROR = "mirror"
MATCHED_LEFT = "matched-left"
EXACT_G0 = "exact-g0"
STRATEGIES = (CONTINUITY_ROOT, MIRROR, MATCHED_LEFT, EXACT_G0)

CONVERGING = "converging"
DIVERGING = "diverging"
INCONCLUSIVE = "inconclusive"

DEFAULT_M = 25
MAX_M = 200
OVERFLOW = 1e12
RESONANCE_TOLERANCE = 1e-10
X0_SNAP = 1e-3


def _check_order(M):
    if isinstance(M, bool) or int(M) != M:
        raise InvalidParameters(f"Truncation order must be an integer, got {M}")
    M = int(M)
    if not 2 <= M <= MAX_M:
        raise InvalidParameters(f"Truncation order {M} outside [2, {MAX_M}]")
    return M


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise InvalidParameters(f"Unknown recurrence convention “{convention}”")
    return convention


def _linear_parts(eq, p, x0):
    """(D, N) with F(κ) = κ² D - N."""
    c = p.c
    if eq is EquationId.GCH1:
        return c + 2.0 * x0, 8.0 * x0 + c
    if eq is EquationId.GCH2:
        return c + 4.0 * x0, c + 16.0 * x0
    return c - x0 * x0, c - 3.0 * x0 * x0


def snap_base(eq, p, x0):
    """The exact equilibrium a (possibly rounded) x0 refers to."""
    eq = EquationId.from_tag(eq)
    x0 = float(x0)
    roots = [root.value for root in equilibria(eq, p)]
    if roots:
        nearest = min(roots, key=lambda value: abs(value - x0))
        if abs(nearest - x0) <= X0_SNAP * max(1.0, abs(x0)):
            if nearest != x0:
                logger.debug("Snapped x0=%.10g to the equilibrium %.17g", x0, nearest)
            return nearest
    raise NotASaddle(f"x0={x0} is not a regular equilibrium of {eq.label} at c={p.c}, g={p.g}")


def saddle_eigenvalues(eq, p, x0):
    """(α_plus, α_minus) at the regular saddle x0."""
    eq = EquationId.from_tag(eq)
    x0 = snap_base(eq, p, x0)
    denominator, numerator = _linear_parts(eq, p, x0)
    if abs(denominator) <= 1e-12 * max(1.0, abs(p.c)):
        raise SingularDegeneracy(f"x0={x0:.10g} lies on the singular set of {eq.label}")
    radicand = numerator / denominator
    if radicand <= 0:
        raise NotASaddle(f"x0={x0:.10g} is not a saddle of {eq.label} (radicand {radicand:.6g})")
    root = math.sqrt(radicand)
    return root, -root


def linear_factor(eq, p, x0, kappa):
    """F(κ) for the mode e^{κ z}."""
    denominator, numerator = _linear_parts(EquationId.from_tag(eq), p, x0)
    return kappa * kappa * denominator - numerator


def _sign(eq, convention):
    return -1.0 if eq is EquationId.GCH3 and convention == PRINTED else 1.0


def _pair_bracket(eq, x0, exponent, k, i):
    A = exponent * exponent
    j = k - i
    if eq is EquationId.GCH1:
        return 4.0 - 2.0 * i * i * A - 2.0 * i * j * A
    if eq is EquationId.GCH2:
        return 8.0 - 4.0 * i * i * A - 2.0 * i * j * A + 2.0 * i * j * j * A * exponent
    return x0 * (2.0 * i * i * A + i * j * A - 3.0)


def _triple_bracket(exponent, l, m, n):
    A = exponent * exponent
    return n * n * A + m * n * A - l * m * n * n * A * A - 1.0


def recurrence_terms(eq, p, x0, exponent, k, convention=VALIDATED):
    """Right-hand side brackets at order k, keyed by sorted index tuples.

    Brackets of ordered tuples that are permutations of one another are
    summed, so each value multiplies a single product of coefficients.
    """
    eq = EquationId.from_tag(eq)
    sign = _sign(eq, _check_convention(convention))
    terms = {}
    for i in range(1, k):
        key = tuple(sorted((i, k - i)))
        terms[key] = terms.get(key, 0.0) + sign * _pair_bracket(eq, x0, exponent, k, i)
    if eq is EquationId.GCH3:
        for l in range(1, k - 1):
            for m in range(1, k - l):
                n = k - l - m
                key = tuple(sorted((l, m, n)))
                terms[key] = terms.get(key, 0.0) + sign * _triple_bracket(exponent, l, m, n)
    return terms


def _cubic_sum(a, exponent, k):
    """Σ over ordered l + m + n = k of the cubic bracket times a_l a_m a_n.

    a is indexed from 0 with a[0] = 0 and holds a_1..a_{k-1}.
    """
    A = exponent * exponent
    index = np.arange(len(a), dtype=float)
    weighted = index * a
    p0 = np.convolve(a, a)
    p1 = np.convolve(a, weighted)
    p2 = np.convolve(weighted, weighted)
    n = np.arange(1, k)
    rest = k - n
    return float(
        A * np.sum(n * n * a[n] * p0[rest])
        + A * np.sum(n * a[n] * p1[rest])
        - A * A * np.sum(n * n * a[n] * p2[rest])
        - np.sum(a[n] * p0[rest])
    )


def _next_coefficient(eq, x0, exponent, a, k, sign):
    i = np.arange(1, k)
    A = exponent * exponent
    j = k - i
    if eq is EquationId.GCH1:
        brackets = 4.0 - 2.0 * i * i * A - 2.0 * i * j * A
    elif eq is EquationId.GCH2:
        brackets = 8.0 - 4.0 * i * i * A - 2.0 * i * j * A + 2.0 * i * j * j * A * exponent
    else:
        brackets = x0 * (2.0 * i * i * A + i * j * A - 3.0)
    total = float(np.sum(brackets * a[i] * a[j]))
    if eq is EquationId.GCH3 and k >= 3:
        total += _cubic_sum(a[:k], exponent, k)
    return sign * total


def _coefficients(eq, p, x0, exponent, leading, M, convention, guard=True):
    sign = _sign(eq, convention)
    denominator, numerator = _linear_parts(eq, p, x0)
    a = np.zeros(M + 1)
    a[1] = leading
    for k in range(2, M + 1):
        factor = linear_factor(eq, p, x0, k * exponent)
        scale = max(1.0, abs(k * k * exponent * exponent * denominator), abs(numerator))
        if abs(factor) <= RESONANCE_TOLERANCE * scale:
            raise Resonance(k, factor)
        a[k] = _next_coefficient(eq, x0, exponent, a, k, sign) / factor
        if guard and abs(a[k]) > OVERFLOW:
            logger.info("|a_%d| = %.3e exceeds %.0e; stopping the branch there", k, abs(a[k]), OVERFLOW)
            return a[1 : k + 1], True
    return a[1:], False


@dataclass(frozen=True, eq=False)
class SeriesBranch:
    x0: float
    exponent: float
    M: int
    coefficients: tuple
    side: str
    overflowed: bool = False
    convention: str = VALIDATED

    @property
    def leading(self):
        return self.coefficients[0]

    @property
    def value_at_zero(self):
        return self.x0 + math.fsum(self.coefficients)

    def derivatives(self, z):
        """(φ, φ', φ'') of the truncated branch at z."""
        z = np.asarray(z, dtype=float)
        k = np.arange(1, len(self.coefficients) + 1)
        kappa = k * self.exponent
        modes = np.exp(np.multiply.outer(z, kappa)) * np.asarray(self.coefficients)
        return (
            self.x0 + modes.sum(axis=-1),
            (modes * kappa).sum(axis=-1),
            (modes * kappa * kappa).sum(axis=-1),
        )

    def __call__(self, z):
        return self.derivatives(z)[0]

    def mirrored(self):
        """The reflected branch φ(-z), valid for reversible equations."""
        return replace(self, exponent=-self.exponent, side=LEFT if self.side == RIGHT else RIGHT)


def build_branch(eq, p, x0, leading, M=DEFAULT_M, side=RIGHT, convention=VALIDATED):
    eq = EquationId.from_tag(eq)
    M = _check_order(M)
    convention = _check_convention(convention)
    if side not in (RIGHT, LEFT):
        raise InvalidParameters(f"Unknown branch side “{side}”")
    if not math.isfinite(leading):
        raise InvalidParameters(f"Leading coefficient must be finite, got {leading}")
    x0 = snap_base(eq, p, x0)
    alpha_plus, alpha_minus = saddle_eigenvalues(eq, p, x0)
    exponent = alpha_minus if side == RIGHT else alpha_plus
    coefficients, overflowed = _coefficients(eq, p, x0, exponent, float(leading), M, convention)
    return SeriesBranch(x0, exponent, M, tuple(float(v) for v in coefficients), side, overflowed, convention)


def normalized_coefficients(eq, p, x0, M, side=RIGHT, convention=VALIDATED):
    """φ_1..φ_M with a_k = φ_k a_1^k; φ_1 = 1."""
    eq = EquationId.from_tag(eq)
    M = _check_order(M)
    x0 = snap_base(eq, p, x0)
    alpha_plus, alpha_minus = saddle_eigenvalues(eq, p, x0)
    exponent = alpha_minus if side == RIGHT else alpha_plus
    coefficients, _ = _coefficients(eq, p, x0, exponent, 1.0, M, _check_convention(convention), guard=False)
    return coefficients


def _real_roots(coefficients):
    coefficients = np.asarray(coefficients, dtype=float)
    finite = np.isfinite(coefficients)
    if not finite.all():
        cut = int(np.argmin(finite))
        logger.warning("Continuity polynomial truncated at degree %d (non-finite coefficient)", cut - 1)
        coefficients = coefficients[:cut]
    coefficients = P.polytrim(coefficients, 0.0)
    if len(coefficients) < 2:
        return []
    derivative = P.polyder(coefficients)
    roots = []
    for root in P.polyroots(coefficients):
        root = complex(root)
        for _ in range(3):
            slope = P.polyval(root, derivative)
            if slope == 0:
                break
            root = root - P.polyval(root, coefficients) / slope
        if not np.isfinite(root):
            continue
        if abs(root.imag) <= 1e-9 * (1.0 + abs(root.real)):
            roots.append(float(root.real))
    merged = []
    for value in sorted(roots):
        if abs(value) <= 1e-12:
            continue
        if merged and abs(value - merged[-1]) <= 1e-9 * max(1.0, abs(value)):
            continue
        merged.append(value)
    return merged


def solve_continuity(eq, p, x0, M=DEFAULT_M, target=0.0, *, side=RIGHT, convention=VALIDATED):
    """Every real nonzero a_1 with x0 + Σ φ_k a_1^k = target."""
    eq = EquationId.from_tag(eq)
    x0 = snap_base(eq, p, x0)
    phis = normalized_coefficients(eq, p, x0, M, side, convention)
    roots = _real_roots(np.concatenate([[x0 - float(target)], phis]))
    logger.debug("%s %s continuity roots (M=%d, target=%g): %s", eq.label, side, M, target, roots)
    return roots


@dataclass(frozen=True)
class ConvergenceReport:
    verdict: str
    tail_ratio: float
    max_coefficient_index: int


def convergence_report(branch):
    coefficients = np.abs(np.asarray(branch.coefficients, dtype=float))
    n = len(coefficients)
    largest = int(np.argmax(coefficients)) + 1
    if branch.overflowed:
        return ConvergenceReport(DIVERGING, math.inf, largest)
    tail_length = max(3, math.ceil(n / 4))
    tail = coefficients[-tail_length:]
    index = np.arange(n - len(tail) + 1, n + 1)
    nonzero = tail > 0
    if not nonzero.any():
        ratio = 0.0
    elif nonzero.sum() < 2:
        return ConvergenceReport(INCONCLUSIVE, math.nan, largest)
    else:
        slope = np.polyfit(index[nonzero], np.log(tail[nonzero]), 1)[0]
        ratio = float(math.exp(slope))
    if branch.M < 8:
        verdict = INCONCLUSIVE
    elif ratio < 1.0 - 1e-3 and coefficients[-1] < coefficients[0]:
        verdict = CONVERGING
    elif ratio > 1.0 + 1e-3:
        verdict = DIVERGING
    else:
        verdict = INCONCLUSIVE
    return ConvergenceReport(verdict, ratio, largest)


@dataclass(frozen=True, eq=False)
class HomoclinicSolution:
    equation: EquationId
    params: WaveParams
    right: SeriesBranch
    left: SeriesBranch
    junction_value: float
    junction_jump: float
    construction: str

    @property
    def x0(self):
        return self.right.x0

    @property
    def convention(self):
        return self.right.convention

    def derivatives(self, z):
        z = np.asarray(z, dtype=float)
        flat = np.atleast_1d(z)
        values = np.empty((3,) + flat.shape)
        # Each branch only sees its own half line, where it decays
        positive = flat > 0
        values[:, positive] = self.right.derivatives(flat[positive])
        values[:, ~positive] = self.left.derivatives(flat[~positive])
        values[0, flat == 0] = self.junction_value
        if z.ndim == 0:
            return tuple(float(v[0]) for v in values)
        return tuple(values)

    def __call__(self, z):
        return self.derivatives(z)[0]

    def reports(self):
        return {RIGHT: convergence_report(self.right), LEFT: convergence_report(self.left)}


@dataclass(frozen=True, eq=False)
class ExactG0Solution:
    """Closed-form GCH-III waves at g = 0; each is A e^z + B e^{-z}."""

    family: int
    constants: tuple
    params: WaveParams
    equation: EquationId = EquationId.GCH3
    construction: str = EXACT_G0

    @property
    def amplitudes(self):
        c = self.params.c
        first, second = self.constants
        if self.family == 1:
            return first, second
        if self.family == 2:
            return c * math.exp(-first), 0.25 * math.exp(2.0 * second - first)
        return (4.0 * c + math.exp(2.0 * second)) * math.exp(-first) / 4.0, 0.0

    @property
    def junction_value(self):
        return float(self(0.0))

    junction_jump = 0.0

    def derivatives(self, z):
        z = np.asarray(z, dtype=float)
        growing, decaying = self.amplitudes
        phi = growing * np.exp(z) + decaying * np.exp(-z)
        dphi = growing * np.exp(z) - decaying * np.exp(-z)
        return phi, dphi, phi

    def __call__(self, z):
        phi = self.derivatives(z)[0]
        return phi if phi.ndim else float(phi)

    def residual(self, z):
        return traveling_residual(self.equation, self.params, *self.derivatives(z))


def exact_g0(eq, c, family, constants):
    eq = EquationId.from_tag(eq)
    if eq is not EquationId.GCH3:
        raise UnsupportedEquation(f"Closed-form g = 0 waves exist only for GCH-III, not {eq.label}")
    if family not in (1, 2, 3):
        raise InvalidFamily(f"Family must be 1, 2 or 3, got {family}")
    constants = tuple(float(v) for v in constants)
    if len(constants) != 2 or not all(math.isfinite(v) for v in constants):
        raise InvalidFamily(f"Family {family} takes two finite constants, got {constants}")
    solution = ExactG0Solution(family, constants, WaveParams(c, 0.0))
    residual = float(np.max(np.abs(solution.residual(np.linspace(-5.0, 5.0, 101)))))
    if residual > 1e-10 * max(1.0, abs(solution.junction_value)):
        raise InvalidFamily(f"Family {family} with constants {constants} leaves residual {residual:.3e}")
    return solution


def _admissible(eq, p, x0, roots, M, side, convention):
    for root in sorted(roots, key=abs):
        branch = build_branch(eq, p, x0, root, M, side, convention)
        report = convergence_report(branch)
        if report.verdict == CONVERGING:
            return branch
        logger.info("Continuity root a_1=%.10g on the %s rejected: %s", root, side, report.verdict)
    return None


def _solution(eq, p, right, left, construction):
    jump = abs(right.value_at_zero - left.value_at_zero)
    value = right.value_at_zero
    if jump > 1e-9 * max(1.0, abs(value)):
        raise NoContinuousAssembly(f"Branches meet with jump {jump:.3e} at z = 0")
    return HomoclinicSolution(eq, p, right, left, value, jump, construction)


def assemble(
    eq,
    p,
    x0,
    M=DEFAULT_M,
    strategy=CONTINUITY_ROOT,
    *,
    a1=None,
    target=None,
    family=None,
    constants=None,
    convention=VALIDATED,
):
    eq = EquationId.from_tag(eq)
    if strategy not in STRATEGIES:
        raise InvalidParameters(f"Unknown assembly strategy “{strategy}”")
    if strategy == EXACT_G0:
        if p.g != 0.0:
            raise InvalidParameters(f"Closed-form waves need g = 0, got g={p.g}")
        return exact_g0(eq, p.c, family or 1, constants or (0.0, 0.0))

    x0 = snap_base(eq, p, x0)
    if strategy == CONTINUITY_ROOT:
        goal = 0.0 if target is None else float(target)
        roots = solve_continuity(eq, p, x0, M, goal, side=RIGHT, convention=convention)
        right = _admissible(eq, p, x0, roots, M, RIGHT, convention)
        if right is None:
            raise NoContinuousAssembly(
                f"No converging real continuity root for {eq.label} at c={p.c}, g={p.g}, M={M}"
            )
        if eq.reversible:
            return _solution(eq, p, right, right.mirrored(), CONTINUITY_ROOT)
        roots = solve_continuity(eq, p, x0, M, goal, side=LEFT, convention=convention)
        left = _admissible(eq, p, x0, roots, M, LEFT, convention)
        if left is None:
            raise NoContinuousAssembly(
                f"No converging real left continuity root for {eq.label} at c={p.c}, g={p.g}, M={M}"
            )
        return _solution(eq, p, right, left, CONTINUITY_ROOT)

    if a1 is None:
        raise InvalidParameters(f"Strategy {strategy} needs a leading coefficient a_1")
    right = build_branch(eq, p, x0, a1, M, RIGHT, convention)
    if strategy == MIRROR:
        if not eq.reversible:
            raise InvalidParameters(f"{eq.label} is not reversible; use the matched-left strategy")
        return HomoclinicSolution(eq, p, right, right.mirrored(), right.value_at_zero, 0.0, MIRROR)

    if eq.reversible:
        raise InvalidParameters(f"Matched-left assembly is for GCH-II; use mirror for {eq.label}")
    goal = right.value_at_zero
    roots = solve_continuity(eq, p, x0, M, goal, side=LEFT, convention=convention)
    if not roots:
        raise NoContinuousAssembly(f"No real b_1 reaches φ(0)={goal:.10g} on the left")
    left = _admissible(eq, p, x0, roots, M, LEFT, convention)
    if left is None:
        root = min(roots, key=abs)
        logger.warning("No converging left root for φ(0)=%.10g; using b_1=%.10g", goal, root)
        left = build_branch(eq, p, x0, root, M, LEFT, convention)
    return _solution(eq, p, right, left, MATCHED_LEFT)


def evaluate_wave(sol, x, t):
    """u(x, t) = φ(x - c t)."""
    return sol(np.asarray(x, dtype=float) - sol.params.c * np.asarray(t, dtype=float))


def rebuild_defect(branch, eq, p):
    """Largest relative change when the branch is rebuilt from its a_1."""
    rebuilt = build_branch(eq, p, branch.x0, branch.leading, branch.M, branch.side, branch.convention)
    stored = np.asarray(branch.coefficients)
    fresh = np.asarray(rebuilt.coefficients)
    if stored.shape != fresh.shape:
        return math.inf
    scale = np.maximum(np.abs(fresh), np.finfo(float).tiny)
    return float(np.max(np.abs(stored - fresh) / scale))
