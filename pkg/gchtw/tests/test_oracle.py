"""The oracle recovers the recurrences from the residual and checks assembled solutions."""

from types import SimpleNamespace

import numpy as np
import pytest

from gchtw import oracle, series
from gchtw.equations import EquationId, WaveParams, three_root_bound
from gchtw.exceptions import IllConditioned, InvalidParameters, NoSaddleFound, NotASaddle

GCH1, GCH2, GCH3 = EquationId.GCH1, EquationId.GCH2, EquationId.GCH3


def saddle_configurations(eq, count=5, seed=0):
    """(p, x0, α_minus) at random parameters with a regular saddle."""
    rng = np.random.default_rng(seed)
    found = []
    while len(found) < count:
        if eq is GCH3:
            c = rng.uniform(0.5, 3.0)
            g = rng.uniform(-0.9, 0.9) * three_root_bound(c)
        else:
            c = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 3.0)
            g = rng.uniform(0.05, 0.9) * c * c / (16.0 if eq is GCH1 else 32.0)
        p = WaveParams(c, g)
        for x0 in oracle.regular_saddles(eq, p):
            found.append((p, x0, series.saddle_eigenvalues(eq, p, x0)[1]))
    return found[:count]


def test_gch1_second_order_relation():
    p = WaveParams(0.5, 0.014)
    x0 = series.snap_base(GCH1, p, -0.0423)
    alpha = series.saddle_eigenvalues(GCH1, p, x0)[1]
    relation = oracle.extract_recurrence(GCH1, p, x0, alpha, 2)[2]
    A = alpha * alpha
    assert relation.brackets[(1, 1)] == pytest.approx(4.0 - 4.0 * A, rel=1e-9)
    assert relation.linear == pytest.approx(3.0 * (8.0 * x0 + 0.5), rel=1e-9)


def test_gch3_cubic_bracket_sign():
    p = WaveParams(2.0, 0.8)
    x0 = series.snap_base(GCH3, p, 0.4436)
    alpha = series.saddle_eigenvalues(GCH3, p, x0)[1]
    A = alpha * alpha
    relation = oracle.extract_recurrence(GCH3, p, x0, alpha, 3)[3]
    assert relation.brackets[(1, 1, 1)] == pytest.approx(-((A - 1.0) ** 2), rel=1e-9)


@pytest.mark.parametrize("eq", list(EquationId))
def test_recurrences_agree_with_the_residual(eq):
    for p, x0, alpha in saddle_configurations(eq):
        for exponent in (alpha, -alpha):
            comparison = oracle.compare_with_recurrence(eq, p, x0, exponent, 10)
            assert comparison.passed, f"{eq.label} c={p.c:.4f} g={p.g:.4f}: {comparison.mismatches[:3]}"
            assert comparison.checked > 5


def test_printed_gch3_sign_is_caught():
    p = WaveParams(2.0, 0.8)
    x0 = series.snap_base(GCH3, p, 0.4436)
    alpha = series.saddle_eigenvalues(GCH3, p, x0)[1]
    comparison = oracle.compare_with_recurrence(GCH3, p, x0, alpha, 4, convention=series.PRINTED)
    assert not comparison.passed
    assert {key for _, key, _, _ in comparison.mismatches} >= {(1, 1), (1, 1, 1)}


def test_extraction_rejects():
    p = WaveParams(0.5, 0.014)
    with pytest.raises(InvalidParameters):
        oracle.extract_recurrence(GCH1, p, -0.0423, -0.6, 1)
    with pytest.raises(InvalidParameters):
        oracle.extract_recurrence(GCH1, p, -0.0423, 0.0, 4)


def test_degenerate_sampling_is_ill_conditioned():
    with pytest.raises(IllConditioned):
        oracle._mode_coefficient(np.zeros(6), np.ones(6), 3)


def test_residual_scan_of_the_gch1_anchor():
    sol = series.assemble(GCH1, WaveParams(0.5, 0.014), -0.0423, 10)
    scan = oracle.residual_scan(sol)
    assert scan.max_residual <= oracle.RESIDUAL_TAIL_LIMIT
    assert scan.near_zero.shape[1] == 2
    assert np.all(np.abs(scan.near_zero[:, 0]) < 2.0 / abs(sol.right.exponent))


@pytest.mark.parametrize("eq, c, g, x0", [(GCH1, 0.5, 0.014, -0.0423), (GCH3, 2.0, 0.8, 0.4436)])
def test_mirror_residual_is_even(eq, c, g, x0):
    sol = series.assemble(eq, WaveParams(c, g), x0, 10, series.MIRROR, a1=0.02)
    scan = oracle.residual_scan(sol)
    np.testing.assert_allclose(scan.residual, scan.residual[::-1], rtol=0, atol=1e-10)


def test_exact_solution_scan():
    sol = series.exact_g0(GCH3, 1.0, 2, (0.1, 0.2))
    scan = oracle.residual_scan(sol)
    assert scan.max_residual <= 1e-10
    assert scan.z[0] == -5.0


def test_shooting_reproduces_the_gch1_loop():
    p = WaveParams(0.5, 0.014)
    sol = series.assemble(GCH1, p, -0.0423, 10)
    shot = oracle.manifold_shoot(GCH1, p, -0.0423, series_solution=sol)
    assert shot.homoclinic
    assert shot.distance <= oracle.SHOT_DISTANCE_LIMIT, f"distance {shot.distance:.3e}"
    assert len(shot.unstable) == len(shot.stable) == 2


def test_outer_gch3_saddle_has_no_loop():
    shot = oracle.manifold_shoot(GCH3, WaveParams(0.5, 0.13), -0.8124)
    assert not shot.homoclinic
    assert shot.distance is None


def test_gch2_saddle_returns_on_one_side():
    shot = oracle.manifold_shoot(GCH2, WaveParams(-1.0, -1.25), 0.4627)
    assert shot.returned == (True, False)
    assert shot.homoclinic


def test_shooting_rejects():
    p = WaveParams(0.5, 0.014)
    with pytest.raises(InvalidParameters):
        oracle.manifold_shoot(GCH1, p, -0.0423, offset=1e-2)
    with pytest.raises(NotASaddle):
        oracle.manifold_shoot(GCH1, p, -0.0827)


def test_select_saddle():
    assert oracle.select_saddle(GCH1, WaveParams(0.5, 0.014)) == pytest.approx(-0.0423, abs=5e-4)
    assert oracle.select_saddle(GCH3, WaveParams(0.5, 0.13)) == pytest.approx(0.3356, abs=5e-4)
    with pytest.raises(NoSaddleFound):
        oracle.select_saddle(GCH1, WaveParams(1.0, 1.0))


def test_a_lone_saddle_must_still_return(monkeypatch):
    shots = []

    def no_return(eq, p, x0, *args, **kwargs):
        shots.append(x0)
        return SimpleNamespace(homoclinic=False)

    monkeypatch.setattr(oracle, "manifold_shoot", no_return)
    with pytest.raises(NoSaddleFound):
        oracle.select_saddle(GCH1, WaveParams(0.5, 0.014))
    assert shots == [pytest.approx(-0.0423, abs=5e-4)]


def test_verify_accepts_the_gch1_anchor():
    sol = series.assemble(GCH1, WaveParams(0.5, 0.014), -0.0423, 10)
    report = oracle.verify_solution(sol, shoot=True)
    assert report.passed, report.failures
    assert [check.name for check in report.checks] == ["rebuild", "brackets", "residual", "junction", "shot"]


def test_verify_two_sided_gch2():
    sol = series.assemble(GCH2, WaveParams(3.0, 0.1), -0.0370, 10)
    report = oracle.verify_solution(sol)
    assert report.passed, report.failures


def test_verify_flags_tampered_coefficients():
    sol = series.assemble(GCH1, WaveParams(0.5, 0.014), -0.0423, 10)
    right = series.SeriesBranch(
        sol.right.x0, sol.right.exponent, sol.right.M, sol.right.coefficients[:-1] + (0.5,), sol.right.side
    )
    tampered = series.HomoclinicSolution(
        sol.equation, sol.params, right, sol.left, sol.junction_value, sol.junction_jump, sol.construction
    )
    report = oracle.verify_solution(tampered)
    assert not report.passed
    assert "rebuild" in [check.name for check in report.failures]


def test_verify_flags_the_printed_convention():
    sol = series.assemble(GCH3, WaveParams(0.5, -0.1), -0.2218, 10, convention=series.PRINTED)
    report = oracle.verify_solution(sol)
    assert "brackets" in [check.name for check in report.failures]


def test_verify_exact_solution():
    report = oracle.verify_solution(series.exact_g0(GCH3, 1.0, 1, (0.5, 0.5)))
    assert report.passed
    assert [check.name for check in report.checks] == ["residual"]
