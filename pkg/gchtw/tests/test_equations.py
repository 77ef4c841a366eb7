"""Equation registry, equilibria and singular sets."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gchtw.equations import (
    HYPERBOLA,
    STRAIGHT_LINE,
    TYPE_ONE,
    TYPE_TWO,
    VERTICAL_LINE,
    EquationId,
    WaveParams,
    build_system,
    equilibria,
    singular_set,
    three_root_bound,
    traveling_residual,
)
from gchtw.exceptions import InvalidParameters
from gchtw.phase_plane import CENTER, SADDLE, regular_equilibria

GCH1, GCH2, GCH3 = EquationId.GCH1, EquationId.GCH2, EquationId.GCH3

PUBLISHED_EQUILIBRIA = [
    (GCH1, 0.5, 0.014, [(-0.0827, CENTER), (-0.0423, SADDLE)]),
    (GCH1, -1.0, 0.06, [(0.1, SADDLE), (0.15, CENTER)]),
    (GCH2, -1.0, -1.25, [(-0.3377, SADDLE), (0.4627, SADDLE)]),
    (GCH2, 3.0, 0.1, [(-0.3380, CENTER), (-0.0370, SADDLE)]),
    (GCH2, 1.0, -1.25, [(-0.4627, SADDLE), (0.3377, SADDLE)]),
    (GCH3, 2.0, 0.8, [(-1.5828, SADDLE), (0.4436, SADDLE), (1.1391, CENTER)]),
    (GCH3, 0.5, 0.13, [(-0.8124, SADDLE), (0.3356, SADDLE), (0.4768, CENTER)]),
    (GCH3, 0.5, -0.1, [(-0.5696, CENTER), (-0.2218, SADDLE), (0.7914, SADDLE)]),
]


@pytest.mark.parametrize("tag", ["gch1", "GCH-I", "gch_ii", "GCHIII", EquationId.GCH2])
def test_from_tag_accepts_aliases(tag):
    assert isinstance(EquationId.from_tag(tag), EquationId)


def test_from_tag_rejects_unknown():
    with pytest.raises(InvalidParameters):
        EquationId.from_tag("gch4")


def test_only_gch2_breaks_reversibility():
    assert GCH1.reversible and GCH3.reversible
    assert not GCH2.reversible


@pytest.mark.parametrize("c, g", [(0.0, 1.0), (math.nan, 0.0), (1.0, math.inf)])
def test_wave_params_rejects(c, g):
    with pytest.raises(InvalidParameters):
        WaveParams(c, g)


def test_system_classes():
    p = WaveParams(1.0, 0.1)
    assert build_system(GCH1, p).system_class == TYPE_ONE
    assert build_system(GCH2, p).system_class == TYPE_TWO
    assert build_system(GCH3, p).system_class == TYPE_TWO


def test_build_system_coefficients_match_closed_forms():
    p = WaveParams(0.7, -0.3)
    for eq, q, f in [
        (GCH1, lambda x, y: 4 * x * x - 2 * y * y + 0.7 * x - 0.3, lambda x, y: 0.7 + 2 * x),
        (GCH2, lambda x, y: 8 * x * x - 2 * y * y + 0.7 * x - 0.3, lambda x, y: 0.7 + 4 * x - 2 * y),
        (GCH3, lambda x, y: x * y * y + 0.7 * x + 0.3 - x**3, lambda x, y: 0.7 - x * x + y * y),
    ]:
        system = build_system(eq, p)
        for x, y in [(0.3, -1.2), (-2.0, 0.5), (1.1, 1.1)]:
            assert system.numerator_at(x, y) == pytest.approx(q(x, y), abs=1e-12), f"{eq.label} Q at {(x, y)}"
            assert system.denominator_at(x, y) == pytest.approx(f(x, y), abs=1e-12), f"{eq.label} f at {(x, y)}"


def test_type_two_systems_are_integrable():
    p = WaveParams(0.7, -0.3)
    for x, y in [(0.3, -1.2), (-2.0, 0.5), (1.1, 1.1)]:
        assert build_system(GCH2, p).integrability(x, y) == pytest.approx(0.0, abs=1e-12)
        assert build_system(GCH3, p).integrability(x, y) == pytest.approx(0.0, abs=1e-12)
        assert build_system(GCH1, p).integrability(x, y) == pytest.approx(-2.0 * y)


def test_regularized_field_is_the_singular_field_times_f():
    system = build_system(GCH1, WaveParams(0.5, 0.014))
    x, y = 0.3, -0.4
    f = system.denominator_at(x, y)
    assert system.regularized_rhs(x, y) == pytest.approx(f * np.array(system.singular_rhs(x, y)))


@pytest.mark.parametrize("eq, c, g, expected", PUBLISHED_EQUILIBRIA)
def test_published_equilibria_and_kinds(eq, c, g, expected):
    p = WaveParams(c, g)
    roots = equilibria(eq, p)
    assert [r.value for r in roots] == pytest.approx([x for x, _ in expected], abs=5e-4)
    kinds = [info.kind for info in regular_equilibria(eq, p)]
    assert kinds == [kind for _, kind in expected], f"{eq.label} c={c} g={g}: {kinds}"


def test_double_root_is_reported_once():
    roots = equilibria(GCH1, WaveParams(1.0, 0.0625))
    assert len(roots) == 1
    assert roots[0].value == pytest.approx(-0.125)
    assert roots[0].multiplicity == 2


def test_cubic_double_root_on_three_root_boundary():
    assert three_root_bound(3.0) == pytest.approx(2.0)
    roots = equilibria(GCH3, WaveParams(3.0, 2.0))
    assert [(r.value, r.multiplicity) for r in roots] == [(pytest.approx(-2.0), 1), (pytest.approx(1.0), 2)]


def test_no_real_equilibria():
    assert equilibria(GCH1, WaveParams(1.0, 1.0)) == []


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(list(EquationId)),
    st.floats(min_value=-5, max_value=5).filter(lambda c: abs(c) > 1e-2),
    st.floats(min_value=-5, max_value=5),
)
def test_equilibria_zero_the_numerator_on_the_axis(eq, c, g):
    p = WaveParams(c, g)
    system = build_system(eq, p)
    values = [r.value for r in equilibria(eq, p)]
    assert values == sorted(values)
    for value in values:
        scale = max(1.0, abs(value) ** 3, abs(c * value), abs(g))
        assert abs(system.numerator_at(value, 0.0)) <= 1e-9 * scale, f"Q({value}, 0) for {eq.label}"


def test_gch1_singular_points_lie_on_both_curves():
    p = WaveParams(0.5, 0.014)
    singular = singular_set(GCH1, p)
    assert singular.kind == VERTICAL_LINE
    assert singular.coefficients == (-0.25,)
    assert singular.Y == pytest.approx(0.0695)
    system = build_system(GCH1, p)
    assert len(singular.points) == 2
    for phi, y in singular.points:
        assert system.numerator_at(phi, y) == pytest.approx(0.0, abs=1e-12)
        assert system.denominator_at(phi, y) == pytest.approx(0.0, abs=1e-12)


def test_gch1_singular_line_without_points():
    singular = singular_set(GCH1, WaveParams(1.0, -1.0))
    assert singular.Y < 0
    assert singular.points == ()


def test_gch2_singular_point():
    p = WaveParams(1.5, 0.2)
    singular = singular_set(GCH2, p)
    assert singular.kind == STRAIGHT_LINE
    ((phi, y),) = singular.points
    system = build_system(GCH2, p)
    assert system.numerator_at(phi, y) == pytest.approx(0.0, abs=1e-12)
    assert system.denominator_at(phi, y) == pytest.approx(0.0, abs=1e-12)
    assert singular.defect(phi, y) == pytest.approx(0.0, abs=1e-12)


def test_gch2_singular_point_at_g_zero():
    ((phi, y),) = singular_set(GCH2, WaveParams(0.6, 0.0)).points
    assert (phi, y) == (pytest.approx(-0.1), pytest.approx(0.1))


def test_gch3_hyperbola():
    singular = singular_set(GCH3, WaveParams(2.0, 0.8))
    assert singular.kind == HYPERBOLA
    assert not singular.degenerate
    assert singular.defect(math.sqrt(3.0), 1.0) == pytest.approx(0.0)
    assert singular_set(GCH3, WaveParams(2.0, 0.0)).degenerate


def test_hyperbola_curve_is_clipped():
    pieces = singular_set(GCH3, WaveParams(1.0, 0.1)).curve((-3.0, 3.0, -2.0, 2.0))
    assert len(pieces) == 2
    for piece in pieces:
        assert np.all(np.abs(piece[:, 0]) <= 3.0)
        assert np.allclose(piece[:, 0] ** 2 - piece[:, 1] ** 2, 1.0)


def test_residual_vanishes_at_equilibria():
    for eq, c, g, expected in PUBLISHED_EQUILIBRIA:
        p = WaveParams(c, g)
        for root in equilibria(eq, p):
            assert traveling_residual(eq, p, root.value, 0.0, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_residual_accepts_arrays():
    p = WaveParams(1.0, 0.0)
    z = np.linspace(-1.0, 1.0, 5)
    # cosh is an exact GCH-III wave at g = 0
    residual = traveling_residual(GCH3, p, np.cosh(z), np.sinh(z), np.cosh(z))
    assert residual.shape == z.shape
    assert np.max(np.abs(residual)) <= 1e-12
