import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_torque.errors import ConsistencyError, OptimizationError, RegimeError
from casimir_torque.landscape import (
    CorrugationPair,
    Orientation,
    PlateExtent,
    check_perturbative,
    energy_general,
    energy_long_lines,
    first_sinc_minimum,
    general_shape,
    lateral_force,
    max_torque,
    normalized_landscape,
    optimize_corrugation_wavelength,
    peak_torque_constants,
    pfa_torque,
    sinc,
    sinc_derivative,
    stability_threshold,
    steepest_sinc_slope,
    torque,
)
from casimir_torque.lifshitz import (
    GOLD,
    IDEAL,
    PlaneGeometry,
    epp_second_derivative,
    ideal_epp_second_derivative_closed_form,
)
from casimir_torque.response import RegimeWarning, ResponseBackend, ResponseSample

A = math.sqrt(200e-18)
LAMBDA_C = 2.4e-6
K = 2 * math.pi / LAMBDA_C
G_VALUE = -2000.0
EXTENT = PlateExtent(24e-6, 24e-6)


def sample(k=K, G=G_VALUE):
    return ResponseSample(k, G, ResponseBackend.PFA, 1e-6, 137e-9)


def pair(b1=0.0, b2=0.0, k=K):
    return CorrugationPair(A, A, k, b1, b2)


AMP = 0.5 * A * A * G_VALUE


def test_sinc_and_derivative():
    x = np.array([0.0, 1e-6, 1e-4 * 0.999, 1e-4, 0.3, 2.0, math.pi])
    ref = np.array([1.0] + [math.sin(v) / v for v in x[1:]])
    np.testing.assert_allclose(sinc(x), ref, rtol=1e-15, atol=1e-16)
    assert sinc(0.0) == 1.0 and sinc_derivative(0.0) == 0.0
    h = 1e-5
    for v in (1e-5, 0.7, 2.0816, 4.0):
        fd = (sinc(v + h) - sinc(v - h)) / (2 * h)
        assert sinc_derivative(v) == pytest.approx(fd, rel=1e-8, abs=1e-10)


def test_sinc_constants():
    x, slope = steepest_sinc_slope()
    assert x == pytest.approx(2.0816, abs=1e-4)
    assert slope == pytest.approx(-0.4362, abs=1e-4)
    prefactor, angle = peak_torque_constants()
    assert prefactor == pytest.approx(0.109, rel=5e-3)
    assert angle == pytest.approx(0.66, rel=5e-3)
    xm, depth = first_sinc_minimum()
    assert xm == pytest.approx(4.4934, abs=1e-4)
    assert -depth == pytest.approx(0.2172, abs=1e-4)


def test_type_validation():
    with pytest.raises(ValueError):
        CorrugationPair(0.0, A, K)
    with pytest.raises(ValueError):
        CorrugationPair(A, A, -K)
    with pytest.raises(ValueError):
        PlateExtent(1e-6, 0.0)
    assert CorrugationPair.from_wavelength(A, A, LAMBDA_C).k == pytest.approx(K)
    assert pair().lambda_c == pytest.approx(LAMBDA_C)


def test_general_energy_examples():
    n_cells = PlateExtent(10 * LAMBDA_C, 10 * LAMBDA_C)
    assert energy_general(pair(), n_cells, Orientation(0.0), sample()) == pytest.approx(AMP, rel=1e-12)
    half = pair(b2=LAMBDA_C / 2)
    assert energy_general(half, n_cells, Orientation(0.0), sample()) == pytest.approx(-AMP, rel=1e-12)
    k_big = 100 * math.pi / 24e-6
    crossed = energy_general(pair(k=k_big), EXTENT, Orientation(math.pi / 2), sample(k=k_big))
    assert abs(crossed) <= abs(AMP) * (2 / (50 * math.pi)) ** 2 * 1.0001


def test_k_mismatch():
    with pytest.raises(ConsistencyError):
        energy_general(pair(), EXTENT, Orientation(0.0), sample(k=1.01 * K))


def test_perturbative_guard():
    big = CorrugationPair(100e-9, 10e-9, K)
    with pytest.raises(RegimeError):
        energy_general(big, EXTENT, Orientation(0.0), sample())
    with pytest.warns(RegimeWarning):
        energy_general(big, EXTENT, Orientation(0.0), sample(), force=True)
    check_perturbative(40e-9, 40e-9, 1e-6, 2.4e-6, 137e-9)
    with pytest.raises(RegimeError):
        check_perturbative(42e-9, 1e-9, 1e-6, 2.4e-6, 137e-9)


@settings(max_examples=80, deadline=None)
@given(theta=st.floats(-math.pi, math.pi), b1=st.floats(-5e-6, 5e-6), b2=st.floats(-5e-6, 5e-6),
       lx=st.floats(2e-6, 60e-6), ly=st.floats(2e-6, 60e-6))
def test_general_energy_symmetries(theta, b1, b2, lx, ly):
    extent = PlateExtent(lx, ly)
    e = energy_general(pair(b1, b2), extent, Orientation(theta), sample())
    # theta -> -theta leaves b2 cos(theta) unchanged
    mirrored = energy_general(pair(b1, b2), extent, Orientation(-theta), sample())
    assert mirrored == pytest.approx(e, rel=1e-12, abs=1e-30)
    # theta -> pi - theta flips cos(theta); relabel b2 -> -b2 to keep b fixed
    flipped = energy_general(pair(b1, -b2), extent, Orientation(math.pi - theta), sample())
    assert flipped == pytest.approx(e, rel=1e-9, abs=1e-12 * abs(AMP))
    # a full corrugation period in either offset
    shifted = energy_general(pair(b1 + LAMBDA_C, b2), extent, Orientation(theta), sample())
    assert shifted == pytest.approx(e, rel=1e-9, abs=1e-12 * abs(AMP))


@settings(max_examples=40, deadline=None)
@given(b1=st.floats(-5e-6, 5e-6), shift=st.floats(-5e-6, 5e-6))
def test_only_relative_offset_matters_when_aligned(b1, shift):
    ref = energy_general(pair(0.0, shift), EXTENT, Orientation(0.0), sample())
    moved = energy_general(pair(b1, b1 + shift), EXTENT, Orientation(0.0), sample())
    assert moved == pytest.approx(ref, rel=1e-9, abs=1e-12 * abs(AMP))


def test_long_line_examples():
    assert energy_long_lines(pair(), EXTENT, Orientation(0.0), sample()) == pytest.approx(AMP, rel=1e-15)
    zero = energy_long_lines(pair(), EXTENT, Orientation(LAMBDA_C / EXTENT.Ly), sample())
    assert abs(zero) < 1e-15 * abs(AMP)
    theta_w = 1.43 * LAMBDA_C / EXTENT.Ly
    well = pair(b2=LAMBDA_C / 2)
    centre = energy_long_lines(well, EXTENT, Orientation(theta_w), sample())
    for dt in (-0.02, 0.02):
        assert energy_long_lines(well, EXTENT, Orientation(theta_w * (1 + dt)), sample()) > centre
    for db in (-0.02, 0.02):
        assert energy_long_lines(pair(b2=LAMBDA_C * (0.5 + db)), EXTENT, Orientation(theta_w), sample()) > centre


def test_long_line_fallback():
    short = PlateExtent(24e-6, 2e-6)
    with pytest.warns(RegimeWarning):
        e = energy_long_lines(pair(), short, Orientation(0.1), sample())
    assert e == energy_general(pair(), short, Orientation(0.1), sample())
    with pytest.warns(RegimeWarning):
        energy_long_lines(pair(), EXTENT, Orientation(0.5), sample())


def test_long_lines_contained_in_general():
    k = 100.0 / EXTENT.Ly * 1.5
    extent = PlateExtent(40 * 2 * math.pi / k, EXTENT.Ly)  # kLx a multiple of 2 pi
    for theta in np.linspace(-0.05, 0.05, 21):
        for b2 in (0.0, 0.3e-6):
            p, G = pair(b2=b2, k=k), sample(k=k)
            eg = energy_general(p, extent, Orientation(theta), G)
            el = energy_long_lines(p, extent, Orientation(theta), G)
            assert abs(el - eg) <= 0.01 * abs(AMP)


@pytest.mark.parametrize("theta", [0.013, 0.0663, 0.1, 0.17, -0.05])
@pytest.mark.parametrize("b2", [0.0, 0.37e-6])
def test_torque_matches_finite_difference(theta, b2):
    p = pair(b2=b2)
    h = 1e-6 * LAMBDA_C / EXTENT.Ly
    fd = (energy_long_lines(p, EXTENT, Orientation(theta + h), sample())
          - energy_long_lines(p, EXTENT, Orientation(theta - h), sample())) / (2 * h)
    tau = torque(p, EXTENT, Orientation(theta), sample()).torque_per_area
    assert tau == pytest.approx(fd, rel=1e-6)


def test_torque_sign_and_symmetry():
    assert torque(pair(), EXTENT, Orientation(0.0), sample()).torque_per_area == 0.0
    t = torque(pair(), EXTENT, Orientation(0.05), sample()).torque_per_area
    assert t > 0  # restoring
    assert torque(pair(), EXTENT, Orientation(-0.05), sample()).torque_per_area == -t


def test_torque_outside_long_lines_uses_general_derivative():
    short = PlateExtent(24e-6, 2e-6)
    theta, h = 0.4, 1e-7
    with pytest.warns(RegimeWarning):
        tau = torque(pair(), short, Orientation(theta), sample()).torque_per_area
    fd = (energy_general(pair(), short, Orientation(theta + h), sample())
          - energy_general(pair(), short, Orientation(theta - h), sample())) / (2 * h)
    assert tau == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("formula", ["general", "long_lines"])
@pytest.mark.parametrize("b2", [0.2e-6, 0.9e-6, 1.7e-6])
def test_lateral_force_matches_finite_difference(formula, b2):
    theta = 0.02
    h = 1e-6 * LAMBDA_C
    energy = energy_general if formula == "general" else energy_long_lines
    # b = b2 cos(theta) - b1 in the general form, so vary b1 to move b by -h
    fd = -(energy(pair(b1=-h, b2=b2), EXTENT, Orientation(theta), sample())
           - energy(pair(b1=h, b2=b2), EXTENT, Orientation(theta), sample())) / (2 * h)
    f = lateral_force(pair(b2=b2), EXTENT, Orientation(theta), sample(), formula)
    assert f == pytest.approx(fd, rel=1e-6)


def test_lateral_force_examples():
    n_cells = PlateExtent(10 * LAMBDA_C, 10 * LAMBDA_C)
    assert lateral_force(pair(), n_cells, Orientation(0.0), sample()) == 0.0
    quarter = lateral_force(pair(b2=LAMBDA_C / 4), n_cells, Orientation(0.0), sample())
    assert abs(quarter) == pytest.approx(abs(AMP) * K, rel=1e-12)
    for b in (0.1, 0.25, 0.4):
        assert lateral_force(pair(b2=b * LAMBDA_C), n_cells, Orientation(0.0), sample()) < 0  # back toward b = 0
    for b in (0.5, 1.0):
        assert abs(lateral_force(pair(b2=b * LAMBDA_C), n_cells, Orientation(0.0), sample())) < 1e-12 * abs(AMP) * K
    with pytest.raises(ValueError):
        lateral_force(pair(), EXTENT, Orientation(0.0), sample(), "exact")


def test_stability_threshold():
    assert stability_threshold(pair(), EXTENT) == pytest.approx(0.1, rel=1e-15)
    half = CorrugationPair.from_wavelength(A, A, 1.2e-6)
    assert stability_threshold(half, EXTENT) == pytest.approx(0.05, rel=1e-15)
    assert stability_threshold(pair(), PlateExtent(24e-6, 48e-6)) == pytest.approx(0.05, rel=1e-15)
    with pytest.raises(RegimeError):
        stability_threshold(pair(), PlateExtent(24e-6, 2e-6))


def test_landscape_structure():
    b = np.linspace(0, 2, 81)[:, None] * LAMBDA_C
    u = np.linspace(-3, 3, 1201)[None, :]
    e = normalized_landscape(b, u * LAMBDA_C / EXTENT.Ly, K, EXTENT.Ly)
    i, j = np.unravel_index(np.argmin(e), e.shape)
    assert e[i, j] == -1.0 and u[0, j] == 0.0 and b[i, 0] % LAMBDA_C == 0.0
    # well depth relative to the global minimum
    shallow = normalized_landscape(LAMBDA_C / 2, 4.4934 * 2 / (K * EXTENT.Ly), K, EXTENT.Ly)
    assert shallow == pytest.approx(-0.2172, abs=1e-4)


def test_rotation_favored_inside_threshold():
    thetas = np.linspace(0, LAMBDA_C / EXTENT.Ly, 400)[1:-1]
    energies = [energy_long_lines(pair(), EXTENT, Orientation(t), sample()) for t in thetas]
    assert all(b > a for a, b in zip(energies, energies[1:]))


def test_general_shape_at_alignment():
    assert general_shape(0.0, K, 10 * LAMBDA_C, EXTENT.Ly) == pytest.approx(1.0, abs=1e-15)


def test_max_torque_constants_against_formula():
    res = max_torque(pair(), EXTENT, PlaneGeometry(1e-6), GOLD, "pfa")
    G = res.torque_per_area / (0.109 * A * A * K * EXTENT.Ly)
    assert G == pytest.approx(abs(epp_second_derivative(PlaneGeometry(1e-6), GOLD)), rel=5e-3)
    assert res.theta_at == pytest.approx(0.66 * LAMBDA_C / EXTENT.Ly, rel=5e-3)


def test_pfa_torque_ideal_example():
    k = 2.6e6
    res = pfa_torque(CorrugationPair(A, A, k), EXTENT, PlaneGeometry(1e-6), IDEAL)
    expected = 0.109 * 2e-16 * k * abs(ideal_epp_second_derivative_closed_form(1e-6)) * 24e-6
    assert res.torque_per_area == pytest.approx(expected, rel=5e-3)
    assert res.torque_per_area == pytest.approx(7.1e-12, rel=0.01)
    double = pfa_torque(CorrugationPair(A, A, 2 * k), EXTENT, PlaneGeometry(1e-6), IDEAL)
    assert double.torque_per_area == pytest.approx(2 * res.torque_per_area, rel=1e-12)


def test_max_torque_reference_configurations():
    r1 = max_torque(pair(), EXTENT, PlaneGeometry(1e-6), GOLD)
    assert r1.torque_per_area == pytest.approx(3.0e-12, rel=0.1)
    assert math.degrees(r1.theta_at) == pytest.approx(3.8, abs=0.05)
    p2 = CorrugationPair.from_wavelength(A, A, 1.2e-6)
    r2 = max_torque(p2, EXTENT, PlaneGeometry(100e-9), GOLD)
    assert r2.torque_per_area == pytest.approx(5.2e-7, rel=0.1)
    with pytest.raises(RegimeError):
        max_torque(pair(), PlateExtent(24e-6, 2e-6), PlaneGeometry(1e-6), GOLD)


def test_pfa_overestimates_near_peak():
    geom = PlaneGeometry(1e-6)
    p = pair(k=2.6e6)
    ratio = pfa_torque(p, EXTENT, geom, GOLD).torque_per_area / max_torque(p, EXTENT, geom, GOLD).torque_per_area
    assert ratio == pytest.approx(2.03, rel=0.05)


@pytest.mark.slow
def test_optimize_at_one_micron():
    k = optimize_corrugation_wavelength(PlaneGeometry(1e-6), GOLD)
    assert k * 1e-6 == pytest.approx(2.6, abs=0.1)
    assert 2 * math.pi / k == pytest.approx(2.4e-6, rel=0.05)


@pytest.mark.slow
def test_optimum_scales_with_distance_for_perfect_mirrors():
    k1 = optimize_corrugation_wavelength(PlaneGeometry(1e-6), IDEAL, "ideal", tol=1e-7)
    k2 = optimize_corrugation_wavelength(PlaneGeometry(2e-6), IDEAL, "ideal", tol=1e-7)
    assert k2 == pytest.approx(k1 / 2, rel=1e-5)


def test_optimize_rejects_pfa():
    with pytest.raises(OptimizationError):
        optimize_corrugation_wavelength(PlaneGeometry(1e-6), GOLD, "pfa")


def test_optimize_flat_objective():
    with pytest.raises(OptimizationError):
        optimize_corrugation_wavelength(PlaneGeometry(1e-6), IDEAL, "ideal", k_min=800e6, k_max=900e6)
