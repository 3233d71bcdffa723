import math

import numpy as np
import pytest

from merid.constants import CONST, DEFAULTS, torr_to_pascal
from merid.collapse import csl_model
from merid.interference import (
    GridSpec,
    NoFringes,
    PatternGrid,
    apply_localization_to_pattern,
    double_slit_state,
    extract_visibility,
    fourier_contrast,
    free_propagate,
    fringe_peaks,
    gaussian_state,
    grid_for_double_slit,
    momentum_distribution,
    momentum_fringe_contrast,
    simulate_pattern,
)
from merid.localization import CompositeModel, LocalizationModel
from merid.protocol import ProtocolPlan, fringe_spacing, make_plan, select_times, standard_models

HBAR = CONST.hbar
M = 1.152e-18
SIGMA = 1e-7


def _peak_to_valley(g):
    y = g.density
    c = y.size // 2
    return y.max() / y[c - 2:c + 3].min()


def test_double_slit_resolvedness_grows_with_chi():
    d = SIGMA / 2
    ratios = [_peak_to_valley(double_slit_state(SIGMA, d, chi)) for chi in (6, 10, 20)]
    assert ratios == sorted(ratios)
    assert ratios[-1] > 10
    peaks = fringe_peaks(double_slit_state(SIGMA, d, 20).probability(), rel_height=0.5)
    assert len(peaks) == 2


def test_sharp_slits_sit_at_plus_minus_half_d():
    d = SIGMA / 2
    g = double_slit_state(SIGMA, d, 1e5)
    peaks = fringe_peaks(g.probability(), rel_height=0.5)
    assert len(peaks) == 2
    assert np.allclose(np.sort(peaks), [-d / 2, d / 2], atol=g.dx)


def test_parity_symmetry_and_norm():
    g = double_slit_state(SIGMA, SIGMA / 3, 30)
    assert np.max(np.abs(g.density - g.density[::-1][np.r_[-1, 0:g.n - 1]])) < 1e-10 * g.density.max()
    assert g.norm == pytest.approx(1.0, abs=1e-12)


def test_parseval():
    g = double_slit_state(SIGMA, SIGMA / 2, 20, phi_total=3.0)
    assert momentum_distribution(g).norm == pytest.approx(g.norm, rel=1e-10)


def test_momentum_fringes_match_two_gaussian_transform():
    d, chi = SIGMA / 2, 20
    g = double_slit_state(SIGMA, d, chi)
    pg = momentum_distribution(g)
    sd = SIGMA**2 / (2 * chi * d)
    s2 = 1 / (1 / sd**2 + 1 / SIGMA**2)        # width^2 of each packet under the envelope
    c = d / 2 * s2 / sd**2                      # its shifted centre
    p = pg.axis
    analytic = np.exp(-2 * p**2 * s2 / HBAR**2) * np.cos(p * c / HBAR) ** 2
    analytic /= np.sum(analytic) * pg.dx
    assert np.max(np.abs(pg.density - analytic)) < 1e-8 * analytic.max()


def test_phase_degrades_momentum_fringes():
    d, chi = SIGMA / 2, 50
    contrasts = [momentum_fringe_contrast(double_slit_state(SIGMA, d, chi, phi_total=a), d) for a in (0, 50, 100, 150)]
    assert all(b < a for a, b in zip(contrasts, contrasts[1:]))
    assert contrasts[0] > 0.99


def test_free_propagate_identity_and_spreading():
    grid = GridSpec(2048, 2e-9)
    w = 2e-8
    g = gaussian_state(w, grid)
    assert free_propagate(g, 0.0, M) is g
    for t, method in ((1e-3, "spectral"), (0.5, "auto")):
        out = free_propagate(g, t, M, method=method)
        var = out.moment(2) - out.moment(1) ** 2
        assert var == pytest.approx(w * w * (1 + (HBAR * t / (2 * M * w * w)) ** 2), rel=1e-3)
        assert out.norm == pytest.approx(1.0, abs=1e-8)


def test_fresnel_and_spectral_agree_on_shared_grid():
    grid = GridSpec(1024, 1e-9)
    g = gaussian_state(2e-8, grid)
    t_switch = M * grid.n * grid.dx**2 / (2 * math.pi * HBAR)
    a = free_propagate(g, t_switch, M, method="spectral")
    b = free_propagate(g, t_switch, M, method="fresnel")
    assert np.allclose(a.axis, b.axis, rtol=0, atol=1e-6 * grid.dx)
    assert np.max(np.abs(a.density - b.density)) < 1e-9 * a.density.max()
    with pytest.raises(ValueError):
        free_propagate(g, t_switch / 2, M, method="fresnel")


def test_edge_check():
    grid = GridSpec(256, 1e-9)
    with pytest.raises(ValueError, match="edge"):
        free_propagate(gaussian_state(2e-8, grid), 50.0, M, method="spectral")


def test_two_packet_fringe_spacing():
    d, chi, t2 = SIGMA / 2, 1000, 0.2
    plan = ProtocolPlan(t1=1e-3, t2=t2, d=d, chi=chi, delta_x=1e-10, sigma=SIGMA)
    P = simulate_pattern(plan, M)
    x_f = fringe_spacing(M, d, t2)
    peaks = fringe_peaks(P)
    central = peaks[np.abs(peaks) < 4 * x_f]
    assert abs(np.median(np.diff(central)) - x_f) < P.dx
    assert P.norm == pytest.approx(1.0, abs=1e-8)


def _pattern():
    plan = ProtocolPlan(t1=1e-3, t2=0.2, d=SIGMA / 2, chi=1000, delta_x=1e-10, sigma=SIGMA)
    return plan, simulate_pattern(plan, M)


def test_localization_identity_and_dc():
    plan, P = _pattern()
    same = apply_localization_to_pattern(P, LocalizationModel.quadratic(0.0), plan.t2, M)
    assert np.array_equal(same.P, P.P) or np.allclose(same.P, P.P, rtol=0, atol=1e-12 * P.P.max())
    damp = apply_localization_to_pattern(P, LocalizationModel.saturating(5.0, 10e-9), plan.t2, M)
    assert damp.norm == pytest.approx(P.norm, rel=1e-12)


@pytest.mark.parametrize("gamma, a", [(2.0, 5e-9), (1.0, 50e-9), (4.0, 1e-6)])
def test_fringe_component_attenuated_by_theta(gamma, a):
    plan, P = _pattern()
    m = LocalizationModel.saturating(gamma, a)
    out = apply_localization_to_pattern(P, m, plan.t2, M)
    v = extract_visibility(out, fringe_spacing(M, plan.d, plan.t2), reference=P)
    assert v == pytest.approx(math.exp(-plan.t2 * float(m.theta(plan.d))), rel=1e-2)


def test_extract_visibility_cases():
    plan, P = _pattern()
    x_f = fringe_spacing(M, plan.d, plan.t2)
    assert extract_visibility(P, x_f, reference=P) == pytest.approx(1.0, abs=0.02)
    # raw contrast is a little below 1: the envelope pulls each packet centre inward,
    # which detunes the fringe period slightly from x_f
    assert 0.95 < extract_visibility(P, x_f) <= 1.0
    gone = apply_localization_to_pattern(P, LocalizationModel.saturating(100.0, 1e-9), plan.t2, M)
    assert extract_visibility(gone, x_f, reference=P) < 0.01
    theta_t = 0.7
    synth = apply_localization_to_pattern(P, LocalizationModel.quadratic(3 * theta_t / (plan.d**2 * plan.t2)),
                                          plan.t2, M)
    assert extract_visibility(synth, x_f, reference=P) == pytest.approx(math.exp(-theta_t), rel=0.02)
    with pytest.raises(NoFringes):
        extract_visibility(P, 100 * x_f)


def test_reference_point_csl_reduces_contrast():
    D, d = 100e-9, 30e-9
    s = DEFAULTS.sphere(D / 2, T_internal=100.0)
    e = DEFAULTS.environment(torr_to_pascal(1e-14))
    trap = DEFAULTS.trap()
    t = select_times(s, trap, e, 1000)
    plan = make_plan(s, trap, t.t1, t.t2, d, 1000)
    grid = grid_for_double_slit(plan.sigma, d, 1000)
    std = standard_models(s, e)
    csl = csl_model(s)
    x_f = fringe_spacing(s.mass, d, t.t2)
    P_std = simulate_pattern(plan, s.mass, std, grid)
    P_csl = simulate_pattern(plan, s.mass, std + CompositeModel([csl]), grid)
    ratio = extract_visibility(P_csl, x_f, reference=P_std)
    assert ratio < 1
    assert ratio == pytest.approx(math.exp(-csl.Lambda * d * d * t.t2 / 3), rel=0.05)


def test_pattern_grid_validation():
    with pytest.raises(ValueError):
        PatternGrid(np.arange(4.0))
    with pytest.raises(ValueError):
        GridSpec(100, 1.0)
    with pytest.raises(ValueError):
        grid_for_double_slit(1e-6, 1e-6, 1e9)
    assert fourier_contrast(PatternGrid(np.arange(8.0), P=np.ones(8)), 4.0) == pytest.approx(0.0, abs=1e-12)
