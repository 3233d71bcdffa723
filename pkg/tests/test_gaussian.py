import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from merid.constants import CONST
from merid.gaussian import (
    GaussianState,
    coherence_length,
    coherence_length_schrodinger,
    evolve_with_decoherence,
    expand_free_coherent,
    t_max_coherence,
    thermal_initial_state,
    xi_max,
    zero_point_motion,
)

HBAR = CONST.hbar
W = 2 * math.pi * 1e5
M = 1.152e-18


def test_zero_point_motion_oracle_and_scaling():
    x0 = zero_point_motion(M, W)
    assert x0 == pytest.approx(math.sqrt(HBAR / (2 * M * W)), rel=1e-15)
    assert x0 == pytest.approx(8.53e-12, rel=2e-3)
    assert zero_point_motion(4 * M, W) == pytest.approx(x0 / 2)
    assert zero_point_motion(M, 4 * W) == pytest.approx(x0 / 2)


def test_ground_state_saturates_heisenberg():
    s = thermal_initial_state(M, W, 0.0)
    assert 4 * s.xx * s.pp == pytest.approx(HBAR**2, rel=1e-14)


def test_thermal_state():
    s = thermal_initial_state(M, W, 0.1)
    assert s.xx == pytest.approx(1.2 * zero_point_motion(M, W) ** 2)
    assert s.xp_sym == 0


def test_heisenberg_violation_rejected():
    with pytest.raises(ValueError):
        GaussianState(mass=M, xx=1e-24, pp=HBAR**2 / 4e-24 * 0.5)


def test_expansion():
    x0 = zero_point_motion(M, W)
    r = expand_free_coherent(M, W, 0.0)
    assert r.sigma2 == x0**2 and r.phi_tof == 0
    assert expand_free_coherent(M, W, 1 / W).sigma2 == pytest.approx(2 * x0**2)
    t1 = 10 / W
    assert expand_free_coherent(M, W, t1).sigma2 == pytest.approx(x0**2 * (t1 * W) ** 2, rel=0.01)


def test_schrodinger_spreading():
    s0 = thermal_initial_state(M, W, 0.3)
    t = 0.02
    s = evolve_with_decoherence(s0, t)
    assert s.xx == pytest.approx(s0.xx + s0.pp * t * t / M**2, rel=1e-14)


def test_diffusion_excess_exact():
    s0 = thermal_initial_state(M, W, 0.1)
    lam, t = 1e12, 0.05
    excess = evolve_with_decoherence(s0, t, lam).xx - evolve_with_decoherence(s0, t).xx
    assert excess == pytest.approx(2 * lam * HBAR**2 * t**3 / (3 * M * M), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(t=st.floats(1e-5, 1.0), t2=st.floats(1e-5, 1.0), log_lam=st.floats(0, 18), nbar=st.floats(0, 10))
def test_semigroup(t, t2, log_lam, nbar):
    lam = 10**log_lam
    s0 = thermal_initial_state(M, W, nbar)
    a = evolve_with_decoherence(evolve_with_decoherence(s0, t, lam), t2, lam)
    b = evolve_with_decoherence(s0, t + t2, lam)
    for f in ("xx", "pp", "xp_sym", "det"):
        assert getattr(a, f) == pytest.approx(getattr(b, f), rel=1e-9)


def test_determinant_stays_exact_at_large_omega_t():
    s0 = thermal_initial_state(M, W, 0.1)
    s = evolve_with_decoherence(s0, 10.0, 0.0)  # omega t ~ 6e6
    assert s.det == pytest.approx(s0.det, rel=1e-14)
    # xi_s takes the ground-state width; the thermal <x^2> is (2 nbar + 1) times larger
    sigma2 = s.xx / 1.2
    assert coherence_length(s) == pytest.approx(coherence_length_schrodinger(sigma2, 0.1), rel=1e-12)


def test_coherence_length_special_states():
    x0 = zero_point_motion(M, W)
    assert coherence_length(thermal_initial_state(M, W, 0)) == pytest.approx(math.sqrt(8) * x0)
    assert coherence_length(thermal_initial_state(M, W, 0.1)) == pytest.approx(math.sqrt(8 / 1.2) * x0)
    assert coherence_length_schrodinger(x0**2, 0) == pytest.approx(math.sqrt(8) * x0)
    assert coherence_length_schrodinger(x0**2, 0.1) == pytest.approx(math.sqrt(8 / 1.2) * x0)


def test_xi_s_monotone_in_time():
    s0 = thermal_initial_state(M, W, 0.1)
    vals = [coherence_length(evolve_with_decoherence(s0, t)) for t in (1e-6, 1e-4, 1e-2, 1.0)]
    assert vals == sorted(vals)


def test_t_max_oracle_and_scaling():
    assert t_max_coherence(1e-18, 0, W, 1e10) == pytest.approx(1.31, rel=3e-3)
    r = t_max_coherence(M, 0.1, W, 8e10) / t_max_coherence(M, 0.1, W, 1e10)
    assert r == pytest.approx(0.5, rel=1e-12)
    assert t_max_coherence(M, 0.1, W, 0.0) is None and xi_max(M, 0.1, W, 0.0) is None


def test_xi_max_scalings():
    # xi_max ~ Lambda^{-1/3}
    assert xi_max(M, 0.1, W, 8e10) / xi_max(M, 0.1, W, 1e10) == pytest.approx(0.5, rel=1e-12)
    # ~ (2 nbar + 1)^{-1/6}
    assert xi_max(M, 3.5, W, 1e10) / xi_max(M, 0.0, W, 1e10) == pytest.approx(8 ** (-1 / 6), rel=1e-12)


def test_xi_at_t_max_is_xi_max():
    s0 = thermal_initial_state(M, W, 0.1)
    lam = 1e11
    tm = t_max_coherence(M, 0.1, W, lam)
    xi = coherence_length(evolve_with_decoherence(s0, tm, lam))
    assert xi == pytest.approx(xi_max(M, 0.1, W, lam), rel=5e-3)
