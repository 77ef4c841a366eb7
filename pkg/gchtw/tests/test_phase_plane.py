"""Equilibrium classification, first integrals, integration and singular-wave geometry."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gchtw.equations import EquationId, WaveParams, equilibria
from gchtw.exceptions import DivergenceError, InvalidParameters, NotAnEquilibrium, UnsupportedEquation
from gchtw.phase_plane import (
    ARCH,
    CENTER,
    CLOSED_ORBIT,
    DIVERGENCE,
    NO_SINGULAR_WAVE,
    PERIODIC_CUSPON,
    REGULAR,
    SADDLE,
    SINGULAR,
    SOLITARY_PEAKON,
    TIME_LIMIT,
    TRIANGLE,
    classify_equilibrium,
    classify_singular_wave,
    default_window,
    first_integral,
    gstar,
    integrate_regularized,
    portrait,
    singular_equilibria,
)

GCH1, GCH2, GCH3 = EquationId.GCH1, EquationId.GCH2, EquationId.GCH3


def test_regularized_eigenvalues_at_a_saddle():
    info = classify_equilibrium(GCH1, WaveParams(-1.0, 0.06), (0.1, 0.0))
    assert info.kind == SADDLE
    assert info.origin == REGULAR
    assert [v.real for v in info.eigenvalues] == pytest.approx([0.4, -0.4])
    assert info.determinant == pytest.approx(-0.16)
    assert info.trace == pytest.approx(0.0, abs=1e-12)


def test_center_has_imaginary_eigenvalues():
    info = classify_equilibrium(GCH2, WaveParams(3.0, 0.1), (-0.338, 0.0))
    assert info.kind == CENTER
    assert info.location[0] == pytest.approx(-0.33798, abs=1e-4)
    assert all(abs(v.real) <= 1e-9 for v in info.eigenvalues)


def test_classification_snaps_rounded_locations():
    exact = equilibria(GCH3, WaveParams(2.0, 0.8))[1].value
    info = classify_equilibrium(GCH3, WaveParams(2.0, 0.8), (0.4436, 0.0))
    assert info.location[0] == pytest.approx(exact, abs=1e-14)


def test_classification_rejects_ordinary_points():
    with pytest.raises(NotAnEquilibrium):
        classify_equilibrium(GCH1, WaveParams(0.5, 0.014), (1.0, 1.0))


def test_gch1_singular_points_are_saddles():
    infos = singular_equilibria(GCH1, WaveParams(0.5, 0.014))
    assert len(infos) == 2
    for info in infos:
        assert info.origin == SINGULAR
        assert info.location[0] == pytest.approx(-0.25)
        assert info.kind == SADDLE, f"{info.location} has determinant {info.determinant}"


@settings(max_examples=50, deadline=None)
@given(
    st.sampled_from(list(EquationId)),
    st.floats(min_value=-3, max_value=3).filter(lambda c: abs(c) > 1e-2),
    st.floats(min_value=-1, max_value=1),
    st.floats(min_value=-2, max_value=2),
    st.floats(min_value=-2, max_value=2),
)
def test_first_integral_is_conserved_by_the_field(eq, c, g, phi, y):
    first = first_integral(eq, WaveParams(c, g))
    h_phi, h_y = first.gradient(phi, y)
    scale = max(1.0, abs(h_phi), abs(h_y)) * max(1.0, abs(c)) * 50.0
    assert abs(first.flow_derivative(phi, y)) <= 1e-12 * scale


def test_closed_orbit_around_a_center():
    p = WaveParams(0.5, 0.014)
    trajectory = integrate_regularized(GCH1, p, (-0.0777, 0.0), (0.0, 200.0), 1e-10)
    assert trajectory.terminated_by == CLOSED_ORBIT
    assert trajectory.h_drift <= 1e-8
    assert math.hypot(trajectory.phi[-1] + 0.0777, trajectory.y[-1]) <= 1e-6


def test_conservation_without_return_detection():
    """About a thousand steps around a center keep H to 1e-8."""
    p = WaveParams(3.0, 0.1)
    trajectory = integrate_regularized(
        GCH2, p, (-0.30, 0.0), (0.0, 100.0), 1e-10, detect_closed=False, max_step=0.1
    )
    assert trajectory.terminated_by == TIME_LIMIT
    assert len(trajectory.zeta) >= 1000
    assert trajectory.h_drift <= 1e-8, f"drift {trajectory.h_drift:.3e}"


def test_gch3_conservation_around_a_center():
    trajectory = integrate_regularized(
        GCH3, WaveParams(0.5, 0.13), (0.46, 0.0), (0.0, 100.0), 1e-10, detect_closed=False, max_step=0.1
    )
    assert trajectory.terminated_by == TIME_LIMIT
    assert len(trajectory.zeta) >= 1000
    assert trajectory.h_drift <= 1e-8, f"drift {trajectory.h_drift:.3e}"


def test_escape_from_window():
    p = WaveParams(0.5, 0.014)
    window = (-1.0, 1.0, -1.0, 1.0)
    trajectory = integrate_regularized(GCH1, p, (0.9, 0.9), (0.0, 50.0), window=window, strict=False)
    assert trajectory.terminated_by == DIVERGENCE
    with pytest.raises(DivergenceError):
        integrate_regularized(GCH1, p, (0.9, 0.9), (0.0, 50.0), window=window)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(start=(0.0, 0.0), span=(0.0, 1.0), tol=1e-2),
        dict(start=(0.0,), span=(0.0, 1.0)),
        dict(start=(0.0, 0.0), span=(1.0, 1.0)),
    ],
)
def test_integration_rejects(kwargs):
    with pytest.raises(InvalidParameters):
        integrate_regularized(GCH1, WaveParams(1.0, 0.0), **kwargs)


def test_trajectory_resample():
    trajectory = integrate_regularized(GCH3, WaveParams(2.0, 0.8), (1.2, 0.0), (0.0, 5.0), detect_closed=False)
    points = trajectory.resample(50)
    assert points.shape == (50, 2)
    assert points[0] == pytest.approx([1.2, 0.0])
    assert trajectory.samples.shape[1] == 3


def test_portrait_is_reproducible():
    p = WaveParams(0.5, 0.014)
    first = portrait(GCH1, p, seeds=4, span=20.0, tol=1e-6)
    second = portrait(GCH1, p, seeds=4, span=20.0, tol=1e-6)
    assert len(first.trajectories) == len(second.trajectories) >= 8
    for a, b in zip(first.trajectories, second.trajectories):
        assert a.points[0] == pytest.approx(b.points[0])
    assert first.singular_curves


def test_portrait_window_around_the_gch1_loop():
    result = portrait(GCH1, WaveParams(0.5, 0.014), (-0.3, 0.3, -0.3, 0.3), seeds=4, span=20.0, tol=1e-6)
    kinds = sorted((info.origin, info.kind) for info in result.equilibria)
    assert kinds == [(REGULAR, CENTER), (REGULAR, SADDLE), (SINGULAR, SADDLE), (SINGULAR, SADDLE)]


def test_default_window_contains_every_equilibrium():
    p = WaveParams(2.0, 0.8)
    xmin, xmax, ymin, ymax = default_window(GCH3, p)
    for root in equilibria(GCH3, p):
        assert xmin < root.value < xmax
    assert ymin < 0.0 < ymax


def test_portrait_rejects_empty_window():
    with pytest.raises(InvalidParameters):
        portrait(GCH1, WaveParams(1.0, 0.0), window=(0.0, 0.0, -1.0, 1.0))


def test_periodic_cuspon():
    verdict = classify_singular_wave(GCH1, WaveParams(1.0, -0.02))
    assert verdict.label == PERIODIC_CUSPON
    assert verdict.geometry == ARCH
    assert verdict.contact[0] == pytest.approx(-0.1, abs=1e-9)
    assert verdict.center[0] == pytest.approx(-0.26861, abs=1e-4)
    assert verdict.level == pytest.approx(-0.01)
    ends = verdict.level_curve[[0, -1]]
    assert np.abs(ends[:, 0] + 0.5).max() <= 1e-3
    assert np.abs(np.abs(ends[:, 1]) - math.sqrt(0.24)).max() <= 1e-3


@pytest.mark.parametrize("c", [1.0, -1.0])
def test_solitary_peakon_at_g_zero(c):
    verdict = classify_singular_wave(GCH1, WaveParams(c, 0.0))
    assert verdict.label == SOLITARY_PEAKON
    assert verdict.geometry == TRIANGLE


@pytest.mark.parametrize("c, g", [(-1.0, -0.005), (1.0, -0.005), (-2.0, -0.02)])
def test_periodic_cuspon_for_either_speed(c, g):
    assert classify_singular_wave(GCH1, WaveParams(c, g)).label == PERIODIC_CUSPON


def test_singular_level_that_misses_the_centers():
    # With g > 0 the level through the singular points opens away from the center
    verdict = classify_singular_wave(GCH1, WaveParams(0.5, 0.014))
    assert verdict.label == NO_SINGULAR_WAVE
    assert verdict.level == pytest.approx(0.00175)


def test_no_singular_points_no_wave():
    assert classify_singular_wave(GCH1, WaveParams(1.0, -1.0)).label == NO_SINGULAR_WAVE


def test_gch2_and_gch3_verdicts():
    assert classify_singular_wave(GCH2, WaveParams(1.0, 0.0)).label == NO_SINGULAR_WAVE
    assert classify_singular_wave(GCH3, WaveParams(1.0, 0.1)).label == NO_SINGULAR_WAVE
    with pytest.raises(UnsupportedEquation):
        classify_singular_wave(GCH3, WaveParams(1.0, 0.1), strict=True)


def test_gstar_condition():
    result = gstar(1.0, 1e-12)
    assert 0.1 < result.g_star < 2.0 / (3.0 * math.sqrt(3.0))
    first = first_integral(GCH3, WaveParams(1.0, result.g_star))
    middle = equilibria(GCH3, WaveParams(1.0, result.g_star))[1].value
    assert float(first(middle, 0.0)) == pytest.approx(float(first(1.0, 0.0)), abs=1e-9)
    assert result.h2_shifted == pytest.approx(result.g_star)
    assert result.h2_published == pytest.approx(result.g_star / 4.0)


def test_gstar_intersections_lie_on_the_hyperbola():
    result = gstar(1.0, 1e-12, g=0.1)
    first = first_integral(GCH3, WaveParams(1.0, 0.1))
    assert len(result.intersections) == 2
    for phi, y in result.intersections:
        assert phi * phi - y * y == pytest.approx(1.0)
        assert float(first(phi, y)) == pytest.approx(result.level, abs=1e-12)


@pytest.mark.parametrize("c, g", [(-1.0, None), (1.0, 0.5)])
def test_gstar_rejects(c, g):
    with pytest.raises(InvalidParameters):
        gstar(c, 1e-10, g)
